#pragma once

#include <cstddef>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "slbfgs/types.hpp"

// Strict parser for whitespace-separated sparse sample lines:
//   <label> <index>:<value> <index>:<value> ...
// Indices are 1-based and must be strictly increasing within a line. Blank
// lines are skipped. Comments are not part of the format; a '#' anywhere is a
// ParseError. Errors name the offending 1-based line.

namespace slbfgs {

struct SparseSample {
  double label = 0.0;
  std::vector<std::pair<Index, double>> features;  ///< (0-based index, value)
};

struct SparseDataset {
  Index n_features = 0;  ///< largest feature index seen
  std::vector<SparseSample> samples;
};

namespace detail_libsvm {

inline ParseError error(std::size_t line_no, const std::string& what) {
  return ParseError("line " + std::to_string(line_no) + ": " + what);
}

inline double parse_double(const std::string& token, std::size_t line_no, const char* what) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(token, &used);
  } catch (const std::exception&) {
    throw error(line_no, std::string("cannot parse ") + what + " '" + token + "'");
  }
  if (used != token.size())
    throw error(line_no, std::string("trailing characters in ") + what + " '" + token + "'");
  return value;
}

}  // namespace detail_libsvm

inline SparseDataset parse_libsvm(std::istream& in) {
  SparseDataset data;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find('#') != std::string::npos)
      throw detail_libsvm::error(line_no, "comments are not allowed");
    std::istringstream tokens(line);
    std::string token;
    if (!(tokens >> token)) continue;  // blank line
    SparseSample sample;
    sample.label = detail_libsvm::parse_double(token, line_no, "label");
    Index prev_index = 0;
    while (tokens >> token) {
      const std::size_t colon = token.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 == token.size())
        throw detail_libsvm::error(line_no, "malformed feature '" + token + "'");
      const std::string index_part = token.substr(0, colon);
      Index index = 0;
      for (char ch : index_part) {
        if (ch < '0' || ch > '9')
          throw detail_libsvm::error(line_no, "malformed feature index '" + index_part + "'");
        index = index * 10 + (ch - '0');
      }
      if (index < 1)
        throw detail_libsvm::error(line_no, "feature indices are 1-based");
      if (index <= prev_index)
        throw detail_libsvm::error(line_no, "feature indices must be strictly increasing");
      prev_index = index;
      const double value =
          detail_libsvm::parse_double(token.substr(colon + 1), line_no, "feature value");
      sample.features.emplace_back(index - 1, value);
      if (index > data.n_features) data.n_features = index;
    }
    data.samples.push_back(std::move(sample));
  }
  return data;
}

inline SparseDataset parse_libsvm_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open data file '" + path + "'");
  return parse_libsvm(in);
}

}  // namespace slbfgs
