#include "gsr/io.hpp"

#include <atomic>
#include <fstream>
#include <iterator>
#include <sstream>

#include <unistd.h>

namespace gsr::io {

void BinaryWriter::put_string(std::string_view s) {
  put<std::uint64_t>(s.size());
  bytes_.insert(bytes_.end(), s.begin(), s.end());
}

void BinaryWriter::put_matrix(const DenseMatrix& m) {
  put<std::uint64_t>(m.rows());
  put<std::uint64_t>(m.cols());
  put_array<double>(m.values());
}

void BinaryReader::expect_magic(std::string_view magic) {
  need(magic.size(), "magic");
  if (std::string_view(reinterpret_cast<const char*>(bytes_.data() + pos_), magic.size()) != magic) {
    fail("magic", "expected \"" + std::string(magic) + "\"");
  }
  pos_ += magic.size();
}

std::string BinaryReader::get_string(const char* field) {
  const auto n = get<std::uint64_t>(field);
  need(n, field);
  std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
  pos_ += n;
  return s;
}

DenseMatrix BinaryReader::get_matrix(const char* field) {
  const auto rows = get<std::uint64_t>(field);
  const auto cols = get<std::uint64_t>(field);
  auto values = get_array<double>(field);
  if (values.size() != rows * cols) fail(field, "matrix payload does not match its shape");
  return DenseMatrix(rows, cols, std::move(values));
}

void BinaryReader::fail(const char* field, const std::string& why) const {
  throw ParseError(source_ + ": field '" + field + "': " + why);
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  static std::atomic<unsigned> counter{0};
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot rename into " + path.string());
  }
}

void write_text_atomic(const std::filesystem::path& path, std::string_view text) {
  write_file_atomic(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

std::uint64_t fnv1a(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace gsr::io
