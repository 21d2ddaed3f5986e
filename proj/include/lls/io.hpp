#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace lls {

/// 17 significant digits, round-trips every double.
std::string format_double(double v);

std::string to_hex(std::uint64_t value);

/// Writes via a temporary sibling file then renames, so a crash never leaves a
/// half-written output under the final name.
void write_text_file(const std::filesystem::path& path, const std::string& content);

std::string read_text_file(const std::filesystem::path& path);

/// Minimal CSV builder. Cells are emitted verbatim; numbers go through
/// format_double.
class CsvBuilder {
 public:
  explicit CsvBuilder(std::vector<std::string> header);

  CsvBuilder& cell(double v);
  CsvBuilder& cell(long long v);
  CsvBuilder& cell(int v) { return cell(static_cast<long long>(v)); }
  CsvBuilder& cell(bool v);
  CsvBuilder& cell(const std::string& v);
  CsvBuilder& cell(const char* v) { return cell(std::string(v)); }
  void end_row();

  std::size_t columns() const { return n_cols_; }
  const std::string& str() const { return out_; }

 private:
  void sep();

  std::string out_;
  std::size_t n_cols_;
  std::size_t in_row_ = 0;
};

/// Tracks files produced by a run; remove_all() deletes them on failure.
class OutputSet {
 public:
  explicit OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {}

  std::filesystem::path add(const std::string& name);
  const std::vector<std::filesystem::path>& files() const { return files_; }
  const std::filesystem::path& dir() const { return dir_; }
  void remove_all() noexcept;

 private:
  std::filesystem::path dir_;
  std::vector<std::filesystem::path> files_;
};

}  // namespace lls
