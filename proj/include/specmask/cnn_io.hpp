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

// SCNN model files. Layout (little-endian):
//
//   "SCNN"  u16 version
//   u32 input_length  u32 class_count  u8 has_projector
//   [u32 D  u32 d]                                  if has_projector
//   u32 conv_count
//   conv_count x { u8 kind (0 plain, 1 factorized)  u32 in  u32 out  u32 kernel  u32 rank }
//   u32 dense_in  u32 dense_out  u8 dense_has_bias
//   payload, in declaration order, f32 unless noted:
//     projector: mean[D] basis[D*d] f64 spectrum[D]
//     plain conv: weights[out*in*kernel] bias[out]
//     factorized conv: factor_a[out*rank] factor_b[rank*in*kernel] bias[out]
//     dense: weights[out*in] bias[out]
//
// input_length is the head's input width; reduced models consume D bands.
// PCA1 files hold a standalone projector: "PCA1" u32 D u32 d + the same
// projector payload.

#ifndef SPECMASK_CNN_IO_HPP_
#define SPECMASK_CNN_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

#include "specmask/cnn.hpp"
#include "specmask/reduce.hpp"

namespace specmask {

inline constexpr std::uint16_t kScnnVersion = 1;

using CnnModel = std::variant<SpectralCnn, ReducedModel>;

std::vector<std::uint8_t> encode_model(const SpectralCnn& model);
std::vector<std::uint8_t> encode_model(const ReducedModel& model);
CnnModel decode_model(std::span<const std::uint8_t> bytes);

void serialize(const SpectralCnn& model, const std::filesystem::path& path);
void serialize(const ReducedModel& model, const std::filesystem::path& path);
CnnModel deserialize(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_projector(const PcaProjector& projector);
PcaProjector decode_projector(std::span<const std::uint8_t> bytes);
void write_projector(const PcaProjector& projector, const std::filesystem::path& path);
PcaProjector read_projector(const std::filesystem::path& path);

}  // namespace specmask

#endif  // SPECMASK_CNN_IO_HPP_
