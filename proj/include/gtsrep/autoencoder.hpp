#pragma once

#include "gtsrep/linalg.hpp"
#include "gtsrep/optim.hpp"
#include "gtsrep/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

namespace gtsrep {

/// Tied-weight linear autoencoder: encode x_hat = A^T x, decode x = A x_hat.
template <class Scalar>
struct LinearCodec {
  Mat<Scalar> a;  ///< n x m

  Index n() const { return a.rows(); }
  Index m() const { return a.cols(); }
};

/// Entries i.i.d. uniform on [-1/sqrt(n), 1/sqrt(n)].
template <class Scalar = double>
LinearCodec<Scalar> init_codec(Index n, Index m, std::uint64_t seed) {
  if (n < 1 || m < 1 || m > n) throw Error("init_codec: need 1 <= m <= n");
  Rng rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(n));
  Mat<Scalar> a(n, m);
  for (Index j = 0; j < m; ++j)
    for (Index i = 0; i < n; ++i) a(i, j) = static_cast<Scalar>(rng.uniform(-bound, bound));
  return {std::move(a)};
}

template <class Scalar, class Derived>
Vec<Scalar> ae_encode(const LinearCodec<Scalar>& c, const Eigen::MatrixBase<Derived>& x) {
  if (x.cols() != 1 || x.rows() != c.n()) throw Error("ae_encode: signal length mismatch");
  return c.a.transpose() * x;
}

template <class Scalar, class Derived>
Vec<Scalar> ae_decode(const LinearCodec<Scalar>& c, const Eigen::MatrixBase<Derived>& xhat) {
  if (xhat.cols() != 1 || xhat.rows() != c.m()) throw Error("ae_decode: latent length mismatch");
  return c.a * xhat;
}

template <class Scalar, class Derived>
Mat<Scalar> ae_encode_rows(const LinearCodec<Scalar>& c, const Eigen::MatrixBase<Derived>& frames) {
  if (frames.cols() != c.n()) throw Error("ae_encode_rows: frame length mismatch");
  return frames * c.a;
}

template <class Scalar, class Derived>
Mat<Scalar> ae_decode_rows(const LinearCodec<Scalar>& c, const Eigen::MatrixBase<Derived>& latents) {
  if (latents.cols() != c.m()) throw Error("ae_decode_rows: latent length mismatch");
  return latents * c.a.transpose();
}

template <class Scalar>
struct LossAndGrad {
  Scalar loss;
  Mat<Scalar> grad;
};

/// Reconstruction MSE over a batch (one sample per row of `batch`, averaged
/// over samples and entries) and its gradient with respect to A.
///
/// With r = A A^T x - x and z = A^T x, the per-sample gradient of ||r||^2 is
/// 2 (r z^T + x r^T A); in row-batched form that is 2 (R^T Z + X^T R A).
template <class Scalar, class Derived>
LossAndGrad<Scalar> ae_loss_and_grad(const LinearCodec<Scalar>& c, const Eigen::MatrixBase<Derived>& batch) {
  if (batch.rows() == 0) throw Error("ae_loss_and_grad: empty batch");
  if (batch.cols() != c.n()) throw Error("ae_loss_and_grad: sample length mismatch");
  const Mat<Scalar> z = batch * c.a;
  const Mat<Scalar> r = z * c.a.transpose() - batch;
  const auto count = static_cast<Scalar>(batch.rows() * batch.cols());
  LossAndGrad<Scalar> out;
  out.loss = r.squaredNorm() / count;
  out.grad = (Scalar(2) / count) * (r.transpose() * z + batch.transpose() * (r * c.a));
  return out;
}

template <class Scalar>
struct CodecTraining {
  LinearCodec<Scalar> codec;
  std::vector<double> loss_history;  ///< sample-weighted mean batch loss per epoch
};

/// Mini-batch Adam on the reconstruction MSE. Samples are the rows of
/// `frames`; they are reshuffled every epoch and the last partial batch is
/// used as is.
template <class Scalar, class Derived>
CodecTraining<Scalar> train_autoencoder(LinearCodec<Scalar> codec, const Eigen::MatrixBase<Derived>& frames,
                                        const TrainSchedule& schedule, std::uint64_t seed,
                                        AdamHyper hyper = {}) {
  schedule.validate();
  if (frames.rows() == 0) throw Error("train_autoencoder: empty dataset");
  if (frames.cols() != codec.n()) throw Error("train_autoencoder: frame length mismatch");

  Rng rng(seed);
  auto state = adam_init_like(codec.a, hyper);
  std::vector<Index> order(static_cast<std::size_t>(frames.rows()));
  std::iota(order.begin(), order.end(), Index{0});

  CodecTraining<Scalar> out;
  out.loss_history.reserve(static_cast<std::size_t>(schedule.epochs));
  Mat<Scalar> batch;
  for (int epoch = 0; epoch < schedule.epochs; ++epoch) {
    const auto rates = schedule_at(schedule, epoch);
    rng.shuffle(std::span<Index>(order));
    double weighted = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(schedule.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(schedule.batch_size));
      batch.resize(static_cast<Index>(stop - start), frames.cols());
      for (std::size_t k = start; k < stop; ++k) batch.row(static_cast<Index>(k - start)) = frames.row(order[k]);
      auto lg = ae_loss_and_grad(codec, batch);
      weighted += static_cast<double>(lg.loss) * static_cast<double>(stop - start);
      adam_step(state, codec.a, lg.grad, rates.lr, rates.weight_decay);
    }
    out.loss_history.push_back(weighted / static_cast<double>(order.size()));
  }
  out.codec = std::move(codec);
  return out;
}

}  // namespace gtsrep
