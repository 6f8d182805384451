#pragma once

// Deterministic CSV emission. Numbers are formatted with a fixed "%.12g"
// conversion so repeated runs of the same configuration produce byte-identical
// files. Every file starts with a "# config-hash:" provenance comment.

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "backflow/errors.hpp"

namespace backflow {

inline std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return std::string(buf);
}

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::string& config_hash, const std::string& header)
      : out_(path, std::ios::trunc) {
    if (!out_) throw ConfigError("csv: cannot open " + path + " for writing");
    out_ << "# config-hash: " << config_hash << "\n" << header << "\n";
    out_.flush();
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i != 0) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
    out_.flush();
  }

  void numeric_row(const std::vector<double>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i != 0) out_ << ',';
      out_ << format_number(cells[i]);
    }
    out_ << '\n';
    out_.flush();
  }

 private:
  std::ofstream out_;
};

}  // namespace backflow
