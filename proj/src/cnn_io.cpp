// Copyright 2026 The specmask Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "specmask/cnn_io.hpp"

#include <optional>
#include <string>

#include "specmask/binary_io.hpp"
#include "specmask/errors.hpp"

namespace specmask {

namespace {

// Guards allocations driven by header fields.
constexpr std::uint32_t kMaxDim = 1u << 20;

std::uint32_t read_dim(ByteReader& in, const char* what) {
  const std::size_t at = in.offset();
  const std::uint32_t v = in.u32();
  if (v > kMaxDim) throw FormatError(std::string(what) + " is implausibly large", at);
  return v;
}

// Throws before allocating `count` floats that the input cannot contain.
void require_floats(const ByteReader& in, std::uint64_t count) {
  if (count * 4 > in.remaining()) {
    throw FormatError("truncated weight payload", in.offset() + in.remaining());
  }
}

void read_floats(ByteReader& in, std::span<float> out) {
  if (out.size_bytes() > in.remaining()) {
    throw FormatError("truncated weight payload", in.offset() + in.remaining());
  }
  in.f32s(out);
}

void put_projector_payload(ByteWriter& out, const PcaProjector& p) {
  out.f32s(p.mean);
  out.f32s(p.basis.data());
  for (double v : p.spectrum) out.f64(v);
}

PcaProjector get_projector_payload(ByteReader& in, std::size_t dim, std::size_t d) {
  if (d == 0 || d > dim) throw FormatError("projector dimensions must satisfy 1 <= d <= D", in.offset());
  require_floats(in, std::uint64_t{dim} * (d + 3));  // f64 spectrum counts twice
  PcaProjector p;
  p.input_dim = dim;
  p.components = d;
  p.mean.resize(dim);
  read_floats(in, p.mean);
  p.basis = Matrix(dim, d);
  read_floats(in, p.basis.data());
  p.spectrum.resize(dim);
  for (auto& v : p.spectrum) v = in.f64();
  p.explained.assign(p.spectrum.begin(), p.spectrum.begin() + static_cast<std::ptrdiff_t>(d));
  return p;
}

void encode_into(ByteWriter& out, const SpectralCnn& model, const PcaProjector* projector) {
  model.validate();
  out.magic("SCNN");
  out.u16(kScnnVersion);
  out.u32(static_cast<std::uint32_t>(model.input_length));
  out.u32(static_cast<std::uint32_t>(model.class_count));
  out.u8(projector ? 1 : 0);
  if (projector) {
    out.u32(static_cast<std::uint32_t>(projector->input_dim));
    out.u32(static_cast<std::uint32_t>(projector->components));
  }
  out.u32(static_cast<std::uint32_t>(model.conv_stack.size()));
  for (const auto& layer : model.conv_stack) {
    const auto shape = conv_shape(layer);
    const auto* f = std::get_if<FactorizedConv1dLayer>(&layer);
    out.u8(f ? 1 : 0);
    out.u32(static_cast<std::uint32_t>(shape.in_channels));
    out.u32(static_cast<std::uint32_t>(shape.out_channels));
    out.u32(static_cast<std::uint32_t>(shape.kernel));
    out.u32(f ? static_cast<std::uint32_t>(f->rank) : 0);
  }
  out.u32(static_cast<std::uint32_t>(model.dense.in));
  out.u32(static_cast<std::uint32_t>(model.dense.out));
  out.u8(model.dense.has_bias() ? 1 : 0);

  if (projector) put_projector_payload(out, *projector);
  for (const auto& layer : model.conv_stack) {
    std::visit(
        [&](const auto& l) {
          using L = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<L, Conv1dLayer>) {
            out.f32s(l.weights);
          } else {
            out.f32s(l.factor_a.data());
            out.f32s(l.factor_b.data());
          }
          out.f32s(l.bias);
        },
        layer);
  }
  out.f32s(model.dense.weights);
  out.f32s(model.dense.bias);
}

}  // namespace

std::vector<std::uint8_t> encode_model(const SpectralCnn& model) {
  ByteWriter out;
  encode_into(out, model, nullptr);
  return out.data();
}

std::vector<std::uint8_t> encode_model(const ReducedModel& model) {
  model.projector.validate();
  if (model.head.input_length != model.projector.components) {
    throw InvalidData("reduced model head width differs from projector components");
  }
  ByteWriter out;
  encode_into(out, model.head, &model.projector);
  return out.data();
}

CnnModel decode_model(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  in.expect_magic("SCNN");
  {
    const std::size_t at = in.offset();
    const std::uint16_t version = in.u16();
    if (version != kScnnVersion) {
      throw FormatError("unsupported SCNN version " + std::to_string(version), at);
    }
  }
  SpectralCnn model;
  model.input_length = read_dim(in, "input length");
  model.class_count = read_dim(in, "class count");
  const std::size_t flag_at = in.offset();
  const std::uint8_t has_projector = in.u8();
  if (has_projector > 1) throw FormatError("projector flag must be 0 or 1", flag_at);
  std::size_t proj_dim = 0, proj_d = 0;
  if (has_projector) {
    proj_dim = read_dim(in, "projector input dimension");
    proj_d = read_dim(in, "projector components");
  }

  struct LayerDesc {
    std::uint8_t kind;
    std::uint32_t in, out, kernel, rank;
  };
  const std::uint32_t conv_count = read_dim(in, "conv layer count");
  std::vector<LayerDesc> descs;
  for (std::uint32_t i = 0; i < conv_count; ++i) {
    LayerDesc d{};
    const std::size_t at = in.offset();
    d.kind = in.u8();
    if (d.kind > 1) throw FormatError("unknown layer kind " + std::to_string(d.kind), at);
    d.in = read_dim(in, "conv in_channels");
    d.out = read_dim(in, "conv out_channels");
    d.kernel = read_dim(in, "conv kernel");
    d.rank = read_dim(in, "conv rank");
    descs.push_back(d);
  }
  model.dense.in = read_dim(in, "dense input");
  model.dense.out = read_dim(in, "dense output");
  const std::size_t bias_at = in.offset();
  const std::uint8_t dense_bias = in.u8();
  if (dense_bias > 1) throw FormatError("dense bias flag must be 0 or 1", bias_at);

  std::optional<PcaProjector> projector;
  if (has_projector) projector = get_projector_payload(in, proj_dim, proj_d);
  for (const auto& d : descs) {
    const std::uint64_t window = std::uint64_t{d.in} * d.kernel;
    require_floats(in, d.kind == 0 ? d.out * window + d.out
                                   : std::uint64_t{d.rank} * (d.out + window) + d.out);
    if (d.kind == 0) {
      Conv1dLayer l = Conv1dLayer::zeros(d.in, d.out, d.kernel);
      read_floats(in, l.weights);
      read_floats(in, l.bias);
      model.conv_stack.emplace_back(std::move(l));
    } else {
      FactorizedConv1dLayer l;
      l.in_channels = d.in;
      l.out_channels = d.out;
      l.kernel = d.kernel;
      l.rank = d.rank;
      l.factor_a = Matrix(d.out, d.rank);
      l.factor_b = Matrix(d.rank, std::size_t{d.in} * d.kernel);
      l.bias.resize(d.out);
      read_floats(in, l.factor_a.data());
      read_floats(in, l.factor_b.data());
      read_floats(in, l.bias);
      model.conv_stack.emplace_back(std::move(l));
    }
  }
  require_floats(in, std::uint64_t{model.dense.in} * model.dense.out);
  model.dense.weights.resize(model.dense.in * model.dense.out);
  read_floats(in, model.dense.weights);
  if (dense_bias) {
    model.dense.bias.resize(model.dense.out);
    read_floats(in, model.dense.bias);
  }
  in.expect_end();

  try {
    model.validate();
    if (projector) {
      projector->validate();
      if (projector->components != model.input_length) {
        throw InvalidData("projector components differ from head input length");
      }
    }
  } catch (const InvalidData& e) {
    throw FormatError(std::string("inconsistent SCNN architecture: ") + e.what(), 0);
  }
  if (projector) return ReducedModel{std::move(*projector), std::move(model)};
  return model;
}

void serialize(const SpectralCnn& model, const std::filesystem::path& path) {
  write_file(path, encode_model(model));
}

void serialize(const ReducedModel& model, const std::filesystem::path& path) {
  write_file(path, encode_model(model));
}

CnnModel deserialize(const std::filesystem::path& path) { return decode_model(read_file(path)); }

std::vector<std::uint8_t> encode_projector(const PcaProjector& projector) {
  projector.validate();
  ByteWriter out;
  out.magic("PCA1");
  out.u32(static_cast<std::uint32_t>(projector.input_dim));
  out.u32(static_cast<std::uint32_t>(projector.components));
  put_projector_payload(out, projector);
  return out.data();
}

PcaProjector decode_projector(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  in.expect_magic("PCA1");
  const std::size_t dim = read_dim(in, "projector input dimension");
  const std::size_t d = read_dim(in, "projector components");
  PcaProjector p = get_projector_payload(in, dim, d);
  in.expect_end();
  try {
    p.validate();
  } catch (const InvalidData& e) {
    throw FormatError(std::string("inconsistent PCA1 projector: ") + e.what(), 0);
  }
  return p;
}

void write_projector(const PcaProjector& projector, const std::filesystem::path& path) {
  write_file(path, encode_projector(projector));
}

PcaProjector read_projector(const std::filesystem::path& path) {
  return decode_projector(read_file(path));
}

}  // namespace specmask
