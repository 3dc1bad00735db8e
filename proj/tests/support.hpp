#pragma once

#include "spl/linalg.hpp"
#include "spl/rng.hpp"

#include <Eigen/QR>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <string>

namespace spl::testing {

inline std::filesystem::path data_path(const std::string& name) {
  return std::filesystem::path(SPL_TEST_DATA_DIR) / name;
}

inline nlohmann::json load_json(const std::string& name) {
  std::ifstream in(data_path(name));
  return nlohmann::json::parse(in);
}

inline Matrix matrix_from_json(const nlohmann::json& rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.at(0).size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rows.at(i).at(j).get<double>();
  return m;
}

inline Matrix gaussian(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

// Orthonormal frame from Householder QR, independent of the library's
// Gram-Schmidt.
inline Matrix random_frame(Rng& rng, Eigen::Index n, Eigen::Index k) {
  Eigen::HouseholderQR<Matrix> qr(gaussian(rng, n, k));
  return qr.householderQ() * Matrix::Identity(n, k);
}

inline Matrix random_orthogonal(Rng& rng, Eigen::Index k) { return random_frame(rng, k, k); }

// Central differences of a scalar function of a matrix argument.
template <class F>
Matrix numeric_gradient(F&& f, const Matrix& x, double h = 1e-6) {
  Matrix g(x.rows(), x.cols());
  Matrix probe = x;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      probe(i, j) = x(i, j) + h;
      const double up = f(probe);
      probe(i, j) = x(i, j) - h;
      const double down = f(probe);
      probe(i, j) = x(i, j);
      g(i, j) = (up - down) / (2.0 * h);
    }
  }
  return g;
}

inline double relative_error(const Matrix& a, const Matrix& b) {
  const double scale = std::max({a.norm(), b.norm(), 1e-300});
  return (a - b).norm() / scale;
}

}  // namespace spl::testing
