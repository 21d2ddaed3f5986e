#include "lls/io.hpp"

#include "lls/errors.hpp"
#include "lls/hashing.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace lls {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string to_hex(std::uint64_t value) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string(), {path.string()});
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CsvBuilder::CsvBuilder(std::vector<std::string> header) : n_cols_(header.size()) {
  for (const auto& h : header) cell(h);
  end_row();
}

void CsvBuilder::sep() {
  if (in_row_ > 0) out_ += ',';
  ++in_row_;
}

CsvBuilder& CsvBuilder::cell(double v) {
  sep();
  out_ += format_double(v);
  return *this;
}

CsvBuilder& CsvBuilder::cell(long long v) {
  sep();
  out_ += std::to_string(v);
  return *this;
}

CsvBuilder& CsvBuilder::cell(bool v) {
  sep();
  out_ += v ? "true" : "false";
  return *this;
}

CsvBuilder& CsvBuilder::cell(const std::string& v) {
  sep();
  out_ += v;
  return *this;
}

void CsvBuilder::end_row() {
  if (in_row_ != n_cols_) throw Error("CSV row has " + std::to_string(in_row_) + " cells, expected " +
                                      std::to_string(n_cols_));
  out_ += '\n';
  in_row_ = 0;
}

std::filesystem::path OutputSet::add(const std::string& name) {
  auto p = dir_ / name;
  files_.push_back(p);
  return p;
}

void OutputSet::remove_all() noexcept {
  for (const auto& f : files_) {
    std::error_code ec;
    if (std::filesystem::is_regular_file(f, ec)) std::filesystem::remove(f, ec);
    auto tmp = f;
    tmp += ".tmp";
    std::filesystem::remove(tmp, ec);
  }
  files_.clear();
}

}  // namespace lls
