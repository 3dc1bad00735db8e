#include "spl/matrix_io.hpp"

#include "spl/error.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace spl {

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw Error(ErrorKind::IoError, "malformed number '" + cell + "' in " + path.string());
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw Error(ErrorKind::IoError, "ragged rows in " + path.string());
    rows.push_back(std::move(row));
  }
  Matrix m(static_cast<Eigen::Index>(rows.size()),
           rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  return m;
}

void write_matrix_metadata(const std::filesystem::path& path, const MatrixMetadata& meta) {
  nlohmann::ordered_json j;
  j["n"] = meta.n;
  j["seed"] = meta.seed ? nlohmann::ordered_json(*meta.seed) : nlohmann::ordered_json(nullptr);
  j["alpha"] = meta.alpha ? nlohmann::ordered_json(*meta.alpha) : nlohmann::ordered_json("random");
  j["kind"] = meta.kind;
  j["flags"] = {{"symmetric", meta.symmetric}, {"doubly_stochastic", meta.doubly_stochastic}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
}

MatrixMetadata read_matrix_metadata(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  MatrixMetadata meta;
  try {
    const auto j = nlohmann::json::parse(in);
    meta.n = j.at("n").get<Eigen::Index>();
    if (!j.at("seed").is_null()) meta.seed = j.at("seed").get<std::uint64_t>();
    if (j.at("alpha").is_number()) meta.alpha = j.at("alpha").get<double>();
    meta.kind = j.at("kind").get<std::string>();
    meta.symmetric = j.at("flags").at("symmetric").get<bool>();
    meta.doubly_stochastic = j.at("flags").at("doubly_stochastic").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::IoError, "bad metadata in " + path.string() + ": " + e.what());
  }
  return meta;
}

}  // namespace spl
