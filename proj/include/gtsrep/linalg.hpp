#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace gtsrep {

/// Thrown for every violated precondition (shape mismatch, bad argument,
/// malformed input file).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <class Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXd = Mat<double>;
using VectorXd = Vec<double>;
using Index = Eigen::Index;

inline std::string shape_str(Index rows, Index cols) {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

template <class Derived>
void require_finite(const Eigen::DenseBase<Derived>& x, const char* what) {
  if (!x.derived().allFinite()) throw Error(std::string(what) + ": non-finite entry");
}

/// Checked matrix product.
template <class A, class B>
auto matmul(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  if (a.cols() != b.rows())
    throw Error("matmul: dimension mismatch " + shape_str(a.rows(), a.cols()) + " * " +
                shape_str(b.rows(), b.cols()));
  using Scalar = typename A::Scalar;
  Mat<Scalar> out = a * b;
  return out;
}

/// Mean over all entries of the squared difference.
template <class A, class B>
auto mse(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw Error("mse: shape mismatch " + shape_str(a.rows(), a.cols()) + " vs " +
                shape_str(b.rows(), b.cols()));
  using Scalar = typename A::Scalar;
  if (a.size() == 0) return Scalar(0);
  return (a - b).squaredNorm() / static_cast<Scalar>(a.size());
}

template <class Scalar>
struct SymEig {
  Vec<Scalar> eigenvalues;   ///< ascending
  Mat<Scalar> eigenvectors;  ///< column k pairs with eigenvalues[k]
};

template <class Derived>
bool is_symmetric(const Eigen::MatrixBase<Derived>& s, typename Derived::Scalar tol) {
  if (s.rows() != s.cols()) return false;
  for (Index j = 0; j < s.cols(); ++j)
    for (Index i = j + 1; i < s.rows(); ++i)
      if (std::abs(s(i, j) - s(j, i)) > tol) return false;
  return true;
}

/// Full eigendecomposition of a real symmetric matrix by cyclic Jacobi
/// rotations. Sweeps stop once the off-diagonal Frobenius norm falls below
/// 1e-12 * ||S||_F. Eigenvalues are returned in ascending order; the sign of
/// each eigenvector and the order within a degenerate eigenspace are
/// unspecified.
template <class Derived>
SymEig<typename Derived::Scalar> sym_eig(const Eigen::MatrixBase<Derived>& s) {
  using Scalar = typename Derived::Scalar;
  using std::abs;
  using std::sqrt;

  if (s.rows() != s.cols()) throw Error("sym_eig: matrix is not square (" + shape_str(s.rows(), s.cols()) + ")");
  require_finite(s, "sym_eig");
  const Index n = s.rows();
  const Scalar scale = std::max<Scalar>(Scalar(1), s.cwiseAbs().maxCoeff());
  if (!is_symmetric(s, Scalar(1e-10) * scale)) throw Error("sym_eig: matrix is not symmetric");

  // Work on the symmetrised copy so the rotations see an exactly symmetric
  // matrix.
  Mat<Scalar> a = (s + s.transpose()) / Scalar(2);
  Mat<Scalar> v = Mat<Scalar>::Identity(n, n);

  const Scalar norm = a.norm();
  const Scalar target = Scalar(1e-12) * norm;
  auto off_norm = [&] {
    Scalar sum = 0;
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < n; ++i)
        if (i != j) sum += a(i, j) * a(i, j);
    return sqrt(sum);
  };

  constexpr int kMaxSweeps = 100;
  int sweep = 0;
  for (; sweep < kMaxSweeps && norm > 0 && off_norm() >= target; ++sweep) {
    for (Index p = 0; p < n - 1; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const Scalar apq = a(p, q);
        if (apq == Scalar(0)) continue;
        const Scalar app = a(p, p);
        const Scalar aqq = a(q, q);
        // Negligible against both diagonal entries: annihilate without rotating.
        if (sweep > 3 && abs(apq) * Scalar(1e18) < abs(app) && abs(apq) * Scalar(1e18) < abs(aqq)) {
          a(p, q) = a(q, p) = 0;
          continue;
        }
        const Scalar theta = (aqq - app) / (Scalar(2) * apq);
        Scalar t = Scalar(1) / (abs(theta) + sqrt(theta * theta + Scalar(1)));
        if (theta < 0) t = -t;
        const Scalar c = Scalar(1) / sqrt(t * t + Scalar(1));
        const Scalar sn = t * c;

        // Columns p and q are contiguous; rows are restored by symmetry.
        auto col_p = a.col(p);
        auto col_q = a.col(q);
        for (Index k = 0; k < n; ++k) {
          const Scalar akp = col_p(k);
          const Scalar akq = col_q(k);
          col_p(k) = c * akp - sn * akq;
          col_q(k) = sn * akp + c * akq;
        }
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = 0;
        a(q, p) = 0;
        for (Index k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          a(p, k) = a(k, p);
          a(q, k) = a(k, q);
        }

        auto vp = v.col(p);
        auto vq = v.col(q);
        for (Index k = 0; k < n; ++k) {
          const Scalar vkp = vp(k);
          const Scalar vkq = vq(k);
          vp(k) = c * vkp - sn * vkq;
          vq(k) = sn * vkp + c * vkq;
        }
      }
    }
  }
  if (sweep == kMaxSweeps && off_norm() >= target) throw Error("sym_eig: Jacobi iteration did not converge");

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index i, Index j) { return a(i, i) < a(j, j); });

  SymEig<Scalar> out{Vec<Scalar>(n), Mat<Scalar>(n, n)};
  for (Index k = 0; k < n; ++k) {
    const Index src = order[static_cast<std::size_t>(k)];
    out.eigenvalues(k) = a(src, src);
    out.eigenvectors.col(k) = v.col(src);
  }
  return out;
}

}  // namespace gtsrep
