#pragma once

// Minimal CSV emission: header row, fixed column order, locale-independent
// formatting. All simulator outputs go through this.

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace spinflow {

class CsvWriter {
 public:
  CsvWriter(std::ostream& os, std::vector<std::string> columns, int precision = 12)
      : os_(os), n_cols_(columns.size()) {
    os_ << std::setprecision(precision);
    for (size_t i = 0; i < columns.size(); ++i) {
      if (i) os_ << ',';
      os_ << columns[i];
    }
    os_ << '\n';
  }

  template <typename... Fields>
  void row(const Fields&... fields) {
    if (sizeof...(fields) != n_cols_)
      throw std::logic_error("CsvWriter: wrong number of fields in row");
    size_t i = 0;
    ((os_ << (i++ ? "," : "") << fields), ...);
    os_ << '\n';
  }

  void row_strings(const std::vector<std::string>& fields) {
    if (fields.size() != n_cols_)
      throw std::logic_error("CsvWriter: wrong number of fields in row");
    for (size_t i = 0; i < fields.size(); ++i) {
      if (i) os_ << ',';
      os_ << fields[i];
    }
    os_ << '\n';
  }

  template <typename T>
  static std::string format(const T& value, int precision = 12) {
    std::ostringstream ss;
    ss << std::setprecision(precision) << value;
    return ss.str();
  }

 private:
  std::ostream& os_;
  size_t n_cols_;
};

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << std::setprecision(12);
  return out;
}

}  // namespace spinflow
