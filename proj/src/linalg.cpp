#include "conewalk/linalg.hpp"

#include <charconv>
#include <string_view>

#include "conewalk/text.hpp"

namespace conewalk {

MatrixXd parse_matrix_literal(const std::string& text) {
  const auto rows = split(text, ';');
  if (rows.empty() || (rows.size() == 1 && trim(rows[0]).empty())) {
    throw Error("empty matrix literal");
  }
  std::vector<std::vector<double>> values;
  for (const auto& row : rows) {
    std::vector<double> r;
    for (const auto& cell : split(row, ',')) r.push_back(parse_double(cell));
    values.push_back(std::move(r));
  }
  const auto cols = values.front().size();
  for (const auto& r : values) {
    if (r.size() != cols) throw Error("ragged matrix literal '" + text + "'");
  }
  MatrixXd m(static_cast<Index>(values.size()), static_cast<Index>(cols));
  for (std::size_t i = 0; i < values.size(); ++i)
    for (std::size_t j = 0; j < cols; ++j)
      m(static_cast<Index>(i), static_cast<Index>(j)) = values[i][j];
  return m;
}

std::string format_matrix_literal(const MatrixXd& m) {
  std::string out;
  for (Index i = 0; i < m.rows(); ++i) {
    if (i > 0) out += ';';
    for (Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out += ',';
      out += format_double(m(i, j));
    }
  }
  return out;
}

}  // namespace conewalk
