#pragma once

#include "gtsrep/linalg.hpp"

#include <utility>

namespace gtsrep {

/// Truncated graph Fourier basis: the m eigenvectors of a Laplacian with the
/// lowest eigenvalues, as columns of an n x m matrix.
template <class Scalar>
struct SpectralBasis {
  Mat<Scalar> basis;
  Vec<Scalar> eigenvalues;

  Index n() const { return basis.rows(); }
  Index m() const { return basis.cols(); }
};

enum class EigenBackend {
  jacobi,       ///< cyclic Jacobi (sym_eig); exact but cubic per sweep
  tridiagonal,  ///< Eigen's Householder + implicit QL, for large graphs
};

template <class Derived>
SymEig<typename Derived::Scalar> decompose_laplacian(const Eigen::MatrixBase<Derived>& l,
                                                     EigenBackend backend = EigenBackend::jacobi) {
  using Scalar = typename Derived::Scalar;
  if (backend == EigenBackend::jacobi) return sym_eig(l);
  if (l.rows() != l.cols()) throw Error("decompose_laplacian: matrix is not square");
  Eigen::SelfAdjointEigenSolver<Mat<Scalar>> solver(l);
  if (solver.info() != Eigen::Success) throw Error("decompose_laplacian: eigensolver failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

/// Truncates a full decomposition to its first m columns.
template <class Scalar>
SpectralBasis<Scalar> compute_basis(const SymEig<Scalar>& eig, Index m) {
  const Index n = eig.eigenvalues.size();
  if (m < 1 || m > n)
    throw Error("compute_basis: m = " + std::to_string(m) + " outside [1, " + std::to_string(n) + "]");
  return {eig.eigenvectors.leftCols(m), eig.eigenvalues.head(m)};
}

template <class Derived>
SpectralBasis<typename Derived::Scalar> compute_basis(const Eigen::MatrixBase<Derived>& laplacian, Index m) {
  if (m < 1 || m > laplacian.rows())
    throw Error("compute_basis: m = " + std::to_string(m) + " outside [1, " + std::to_string(laplacian.rows()) +
                "]");
  return compute_basis(sym_eig(laplacian), m);
}

/// x_hat = U_m^T x.
template <class Scalar, class Derived>
Vec<Scalar> gft_encode(const SpectralBasis<Scalar>& b, const Eigen::MatrixBase<Derived>& x) {
  if (x.cols() != 1 || x.rows() != b.n())
    throw Error("gft_encode: signal length " + std::to_string(x.size()) + ", basis expects " + std::to_string(b.n()));
  return b.basis.transpose() * x;
}

/// x = U_m x_hat.
template <class Scalar, class Derived>
Vec<Scalar> gft_decode(const SpectralBasis<Scalar>& b, const Eigen::MatrixBase<Derived>& xhat) {
  if (xhat.cols() != 1 || xhat.rows() != b.m())
    throw Error("gft_decode: coefficient length " + std::to_string(xhat.size()) + ", basis expects " +
                std::to_string(b.m()));
  return b.basis * xhat;
}

/// Row-batched forms: each row of `frames` is one signal.
template <class Scalar, class Derived>
Mat<Scalar> gft_encode_rows(const SpectralBasis<Scalar>& b, const Eigen::MatrixBase<Derived>& frames) {
  if (frames.cols() != b.n()) throw Error("gft_encode_rows: frame length mismatch");
  return frames * b.basis;
}

template <class Scalar, class Derived>
Mat<Scalar> gft_decode_rows(const SpectralBasis<Scalar>& b, const Eigen::MatrixBase<Derived>& latents) {
  if (latents.cols() != b.m()) throw Error("gft_decode_rows: latent length mismatch");
  return latents * b.basis.transpose();
}

}  // namespace gtsrep
