#pragma once

#include "gtsrep/linalg.hpp"
#include "gtsrep/random.hpp"

#include <cstdlib>
#include <filesystem>
#include <string>

namespace gtsrep::test {

inline MatrixXd random_matrix(Index rows, Index cols, Rng& rng, double lo = -1.0, double hi = 1.0) {
  MatrixXd m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = rng.uniform(lo, hi);
  return m;
}

inline MatrixXd random_symmetric(Index n, Rng& rng) {
  const MatrixXd a = random_matrix(n, n, rng);
  return (a + a.transpose()) / 2;
}

/// Relative error with a 1e-6 floor on the scale: central differences with
/// h = 1e-6 carry about 1e-10 of rounding noise, which would dominate the
/// ratio for near-zero gradient entries.
inline double rel_err(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-6});
  return std::abs(a - b) / scale;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("gtsrep_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace gtsrep::test
