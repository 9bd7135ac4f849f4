#include "edmcal/matrix_csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace edmcal::io {

namespace {

std::vector<std::vector<double>> read_rows(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      // trim whitespace
      const auto begin = cell.find_first_not_of(" \t\r");
      if (begin == std::string::npos) {
        row.push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      const auto end = cell.find_last_not_of(" \t\r");
      const std::string token = cell.substr(begin, end - begin + 1);
      if (token == "nan" || token == "NaN" || token == "NAN") {
        row.push_back(std::numeric_limits<double>::quiet_NaN());
      } else {
        try {
          row.push_back(std::stod(token));
        } catch (const std::exception&) {
          throw std::runtime_error("bad numeric cell '" + token + "' in " + path);
        }
      }
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("no data rows in " + path);
  const std::size_t width = rows.front().size();
  for (const auto& row : rows)
    if (row.size() != width)
      throw std::runtime_error("ragged rows in " + path);
  return rows;
}

Matrix to_matrix(const std::vector<std::vector<double>>& rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()),
           static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.12g", value);
  return buffer;
}

Matrix read_matrix_csv(const std::string& path) {
  const Matrix m = to_matrix(read_rows(path));
  if (m.rows() != m.cols())
    throw std::runtime_error("matrix in " + path + " is not square");
  return m;
}

void write_matrix_csv(const std::string& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

observation::ObservedMatrix read_observed_csv(const std::string& path) {
  const Matrix raw = read_matrix_csv(path);
  const Eigen::Index n = raw.rows();
  observation::ObservedMatrix observed;
  observed.values = Matrix::Zero(n, n);
  observed.mask.known = BoolMatrix::Constant(n, n, false);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      if (!std::isnan(raw(i, j))) {
        observed.values(i, j) = raw(i, j);
        observed.mask.known(i, j) = true;
      }
    }
  }
  // symmetry of the mask: both orientations must agree
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (observed.mask.known(i, j) != observed.mask.known(j, i))
        throw std::runtime_error("asymmetric mask in " + path);
  return observed;
}

void write_observed_csv(const std::string& path,
                        const observation::ObservedMatrix& observed) {
  const Eigen::Index n = observed.size();
  Matrix raw = Matrix::Constant(n, n, std::numeric_limits<double>::quiet_NaN());
  raw.diagonal().setZero();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j && observed.known(i, j)) raw(i, j) = observed.values(i, j);
  write_matrix_csv(path, raw);
}

Matrix read_positions_csv(const std::string& path) {
  const Matrix m = to_matrix(read_rows(path));
  if (!m.allFinite()) throw std::runtime_error("positions in " + path + " must be finite");
  return m;
}

void write_positions_csv(const std::string& path, const Matrix& positions) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (Eigen::Index i = 0; i < positions.rows(); ++i) {
    for (Eigen::Index j = 0; j < positions.cols(); ++j) {
      if (j) out << ',';
      out << format_double(positions(i, j));
    }
    out << '\n';
  }
}

}  // namespace edmcal::io
