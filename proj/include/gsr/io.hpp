#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "gsr/dense_matrix.hpp"
#include "gsr/error.hpp"

namespace gsr::io {

static_assert(std::endian::native == std::endian::little,
              "binary checkpoints are written in host order and require a little-endian host");

// Append-only little-endian byte buffer.
class BinaryWriter {
 public:
  template <typename T>
    requires std::is_arithmetic_v<T>
  void put(T v) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
    bytes_.insert(bytes_.end(), p, p + sizeof(T));
  }

  template <typename T>
    requires std::is_arithmetic_v<T>
  void put_array(std::span<const T> v) {
    put<std::uint64_t>(v.size());
    const auto* p = reinterpret_cast<const std::uint8_t*>(v.data());
    bytes_.insert(bytes_.end(), p, p + v.size_bytes());
  }

  void put_magic(std::string_view magic) { bytes_.insert(bytes_.end(), magic.begin(), magic.end()); }
  void put_string(std::string_view s);
  void put_matrix(const DenseMatrix& m);

  const std::vector<std::uint8_t>& bytes() const { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
};

class BinaryReader {
 public:
  BinaryReader(std::vector<std::uint8_t> bytes, std::string source)
      : bytes_(std::move(bytes)), source_(std::move(source)) {}

  template <typename T>
    requires std::is_arithmetic_v<T>
  T get(const char* field) {
    need(sizeof(T), field);
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  template <typename T>
    requires std::is_arithmetic_v<T>
  std::vector<T> get_array(const char* field) {
    const auto n = get<std::uint64_t>(field);
    if (n > (bytes_.size() - pos_) / sizeof(T)) fail(field, "array length exceeds file size");
    std::vector<T> v(n);
    std::memcpy(v.data(), bytes_.data() + pos_, n * sizeof(T));
    pos_ += n * sizeof(T);
    return v;
  }

  void expect_magic(std::string_view magic);
  std::string get_string(const char* field);
  DenseMatrix get_matrix(const char* field);
  bool at_end() const { return pos_ == bytes_.size(); }

  [[noreturn]] void fail(const char* field, const std::string& why) const;

 private:
  void need(std::size_t n, const char* field) const {
    if (bytes_.size() - pos_ < n) fail(field, "unexpected end of file");
  }

  std::vector<std::uint8_t> bytes_;
  std::string source_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
std::string read_text(const std::filesystem::path& path);

// Writes to a sibling temp file and renames over the target, so readers
// never observe a partially written artifact.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text_atomic(const std::filesystem::path& path, std::string_view text);

// FNV-1a 64.
std::uint64_t fnv1a(std::span<const std::uint8_t> bytes);

}  // namespace gsr::io
