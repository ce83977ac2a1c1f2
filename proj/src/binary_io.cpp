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

#include "specmask/binary_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "specmask/errors.hpp"

namespace specmask {

static_assert(std::endian::native == std::endian::little,
              "on-disk formats are little-endian; big-endian hosts need byte swapping");

namespace {

template <typename T>
void append_raw(std::vector<std::uint8_t>& buf, T v) {
  std::uint8_t raw[sizeof(T)];
  std::memcpy(raw, &v, sizeof(T));
  buf.insert(buf.end(), raw, raw + sizeof(T));
}

}  // namespace

void ByteWriter::bytes(std::span<const std::uint8_t> data) {
  buf_.insert(buf_.end(), data.begin(), data.end());
}

void ByteWriter::magic(std::string_view tag) {
  buf_.insert(buf_.end(), tag.begin(), tag.end());
}

void ByteWriter::u8(std::uint8_t v) { buf_.push_back(v); }
void ByteWriter::u16(std::uint16_t v) { append_raw(buf_, v); }
void ByteWriter::u32(std::uint32_t v) { append_raw(buf_, v); }
void ByteWriter::f32(float v) { append_raw(buf_, v); }
void ByteWriter::f64(double v) { append_raw(buf_, v); }

void ByteWriter::f32s(std::span<const float> values) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(values.data());
  buf_.insert(buf_.end(), p, p + values.size_bytes());
}

void ByteReader::require(std::size_t n, const char* what) const {
  if (remaining() < n) {
    throw FormatError(std::string("truncated input reading ") + what, pos_);
  }
}

void ByteReader::expect_magic(std::string_view tag) {
  require(tag.size(), "magic");
  if (std::memcmp(data_.data() + pos_, tag.data(), tag.size()) != 0) {
    throw FormatError("bad magic, expected \"" + std::string(tag) + "\"", pos_);
  }
  pos_ += tag.size();
}

std::uint8_t ByteReader::u8() {
  require(1, "u8");
  return data_[pos_++];
}

#define SPECMASK_READ_RAW(T, name)                  \
  require(sizeof(T), name);                         \
  T v;                                              \
  std::memcpy(&v, data_.data() + pos_, sizeof(T));  \
  pos_ += sizeof(T);                                \
  return v

std::uint16_t ByteReader::u16() { SPECMASK_READ_RAW(std::uint16_t, "u16"); }
std::uint32_t ByteReader::u32() { SPECMASK_READ_RAW(std::uint32_t, "u32"); }
float ByteReader::f32() { SPECMASK_READ_RAW(float, "f32"); }
double ByteReader::f64() { SPECMASK_READ_RAW(double, "f64"); }

#undef SPECMASK_READ_RAW

void ByteReader::f32s(std::span<float> out) {
  require(out.size_bytes(), "f32 array");
  std::memcpy(out.data(), data_.data() + pos_, out.size_bytes());
  pos_ += out.size_bytes();
}

std::span<const std::uint8_t> ByteReader::bytes(std::size_t n) {
  require(n, "byte array");
  auto s = data_.subspan(pos_, n);
  pos_ += n;
  return s;
}

void ByteReader::expect_end() const {
  if (pos_ != data_.size()) {
    throw FormatError("unexpected trailing bytes", pos_);
  }
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failure on " + path.string());
  return data;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size()));
  if (!out) throw IoError("write failure on " + path.string());
}

std::string peek_magic(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  char tag[4];
  in.read(tag, 4);
  if (in.gcount() != 4) return {};
  return std::string(tag, 4);
}

}  // namespace specmask
