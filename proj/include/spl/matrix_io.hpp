#pragma once

#include "spl/linalg.hpp"
#include "spl/markov.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace spl {

/// Row-major CSV, no header, 17 significant digits per entry.
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix_csv(const std::filesystem::path& path);

std::string format_double(double x);

/// JSON sidecar describing a generated matrix.
struct MatrixMetadata {
  Eigen::Index n = 0;
  std::optional<std::uint64_t> seed;
  std::optional<double> alpha;  // nullopt: drawn at random (or not applicable)
  std::string kind;             // doubly_stochastic | symmetric | fixed_2x2 | fixed_3x3 | ...
  bool symmetric = false;
  bool doubly_stochastic = false;
};

void write_matrix_metadata(const std::filesystem::path& path, const MatrixMetadata& meta);
MatrixMetadata read_matrix_metadata(const std::filesystem::path& path);

}  // namespace spl
