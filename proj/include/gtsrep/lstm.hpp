#pragma once

#include "gtsrep/linalg.hpp"
#include "gtsrep/optim.hpp"
#include "gtsrep/random.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace gtsrep {

/// Gate order used by every per-gate array below.
enum Gate : std::size_t { kInputGate = 0, kForgetGate = 1, kCellGate = 2, kOutputGate = 3 };

/// Fully connected LSTM cell whose hidden size equals its input size m. The
/// hidden state is the prediction of the next frame, so there is no output
/// projection.
template <class Scalar>
struct LstmCell {
  std::array<Mat<Scalar>, 4> w_input;   ///< W_ii, W_if, W_ig, W_io
  std::array<Mat<Scalar>, 4> w_hidden;  ///< W_hi, W_hf, W_hg, W_ho
  std::array<Vec<Scalar>, 4> b_input;   ///< b_ii, b_if, b_ig, b_io
  std::array<Vec<Scalar>, 4> b_hidden;  ///< b_hi, b_hf, b_hg, b_ho

  Index m() const { return w_input[0].rows(); }

  static LstmCell zeros(Index m) {
    LstmCell c;
    for (std::size_t k = 0; k < 4; ++k) {
      c.w_input[k] = Mat<Scalar>::Zero(m, m);
      c.w_hidden[k] = Mat<Scalar>::Zero(m, m);
      c.b_input[k] = Vec<Scalar>::Zero(m);
      c.b_hidden[k] = Vec<Scalar>::Zero(m);
    }
    return c;
  }
};

inline constexpr std::array<const char*, 16> kLstmParameterNames = {
    "W_ii", "W_if", "W_ig", "W_io", "W_hi", "W_hf", "W_hg", "W_ho",
    "b_ii", "b_if", "b_ig", "b_io", "b_hi", "b_hf", "b_hg", "b_ho"};

/// Calls f(name, tensor_of_each_cell...) for the 16 parameter tensors, in
/// kLstmParameterNames order.
template <class F, class... Cells>
void for_each_parameter(F&& f, Cells&... cells) {
  for (std::size_t k = 0; k < 4; ++k) f(kLstmParameterNames[k], cells.w_input[k]...);
  for (std::size_t k = 0; k < 4; ++k) f(kLstmParameterNames[4 + k], cells.w_hidden[k]...);
  for (std::size_t k = 0; k < 4; ++k) f(kLstmParameterNames[8 + k], cells.b_input[k]...);
  for (std::size_t k = 0; k < 4; ++k) f(kLstmParameterNames[12 + k], cells.b_hidden[k]...);
}

template <class Scalar>
void validate_cell(const LstmCell<Scalar>& cell) {
  const Index m = cell.m();
  if (m < 1) throw Error("LstmCell: m must be >= 1");
  for_each_parameter(
      [m](const char* name, const auto& t) {
        const bool ok = t.rows() == m && (t.cols() == m || t.cols() == 1);
        if (!ok) throw Error(std::string("LstmCell: bad shape for ") + name);
        require_finite(t, name);
      },
      cell);
}

/// Weights uniform on [-1/sqrt(m), 1/sqrt(m)], biases zero.
template <class Scalar = double>
LstmCell<Scalar> lstm_init(Index m, std::uint64_t seed) {
  if (m < 1) throw Error("lstm_init: m must be >= 1");
  auto cell = LstmCell<Scalar>::zeros(m);
  Rng rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(m));
  auto fill = [&](Mat<Scalar>& w) {
    for (Index j = 0; j < m; ++j)
      for (Index i = 0; i < m; ++i) w(i, j) = static_cast<Scalar>(rng.uniform(-bound, bound));
  };
  for (auto& w : cell.w_input) fill(w);
  for (auto& w : cell.w_hidden) fill(w);
  return cell;
}

template <class Scalar>
struct LstmState {
  Vec<Scalar> h;
  Vec<Scalar> c;

  static LstmState zeros(Index m) { return {Vec<Scalar>::Zero(m), Vec<Scalar>::Zero(m)}; }
};

namespace detail {

template <class S>
S sigmoid(S x) {
  return S(1) / (S(1) + std::exp(-x));
}

/// Gate activations and new state for a batch (one column per sequence).
template <class Scalar>
struct StepCache {
  Mat<Scalar> x, h_prev, c_prev;
  std::array<Mat<Scalar>, 4> gate;
  Mat<Scalar> c, tanh_c, h;
};

template <class Scalar>
void step_batch(const LstmCell<Scalar>& cell, StepCache<Scalar>& s) {
  for (std::size_t k = 0; k < 4; ++k) {
    Mat<Scalar> z = cell.w_input[k] * s.x + cell.w_hidden[k] * s.h_prev;
    z.colwise() += cell.b_input[k] + cell.b_hidden[k];
    if (k == kCellGate)
      s.gate[k] = z.array().tanh().matrix();
    else
      s.gate[k] = z.unaryExpr([](Scalar v) { return sigmoid(v); });
  }
  s.c = (s.gate[kForgetGate].array() * s.c_prev.array() + s.gate[kInputGate].array() * s.gate[kCellGate].array())
            .matrix();
  s.tanh_c = s.c.array().tanh().matrix();
  s.h = (s.gate[kOutputGate].array() * s.tanh_c.array()).matrix();
}

/// Runs the warm-up/free-run protocol over a batch of equal-length
/// sequences. Step s (0-based, s < T-1) consumes real frame s when s < W and
/// the previous prediction otherwise; its hidden state predicts frame s+1.
template <class Scalar>
std::vector<StepCache<Scalar>> forward(const LstmCell<Scalar>& cell, std::span<const Mat<Scalar>> seqs, Index warmup) {
  const Index batch = static_cast<Index>(seqs.size());
  const Index steps = seqs.front().rows();
  const Index m = cell.m();
  std::vector<StepCache<Scalar>> caches(static_cast<std::size_t>(steps - 1));
  for (Index s = 0; s < steps - 1; ++s) {
    auto& cache = caches[static_cast<std::size_t>(s)];
    if (s == 0) {
      cache.h_prev = Mat<Scalar>::Zero(m, batch);
      cache.c_prev = Mat<Scalar>::Zero(m, batch);
    } else {
      cache.h_prev = caches[static_cast<std::size_t>(s - 1)].h;
      cache.c_prev = caches[static_cast<std::size_t>(s - 1)].c;
    }
    if (s < warmup) {
      cache.x.resize(m, batch);
      for (Index b = 0; b < batch; ++b) cache.x.col(b) = seqs[static_cast<std::size_t>(b)].row(s).transpose();
    } else {
      cache.x = cache.h_prev;
    }
    step_batch(cell, cache);
  }
  return caches;
}

template <class Scalar>
void check_sequences(const LstmCell<Scalar>& cell, std::span<const Mat<Scalar>> seqs, Index warmup,
                     const char* who) {
  if (seqs.empty()) throw Error(std::string(who) + ": no sequences");
  const Index steps = seqs.front().rows();
  for (const auto& s : seqs) {
    if (s.rows() != steps) throw Error(std::string(who) + ": sequences differ in length");
    if (s.cols() != cell.m())
      throw Error(std::string(who) + ": frame dimension " + std::to_string(s.cols()) + ", cell expects " +
                  std::to_string(cell.m()));
  }
  if (warmup < 1 || warmup > steps - 1)
    throw Error(std::string(who) + ": warm-up " + std::to_string(warmup) + " outside [1, " +
                std::to_string(steps - 1) + "]");
}

}  // namespace detail

/// One application of the LSTM recurrence.
template <class Scalar, class Derived>
LstmState<Scalar> lstm_step(const LstmCell<Scalar>& cell, const Eigen::MatrixBase<Derived>& x,
                            const LstmState<Scalar>& state) {
  const Index m = cell.m();
  if (x.size() != m || state.h.size() != m || state.c.size() != m) throw Error("lstm_step: dimension mismatch");
  detail::StepCache<Scalar> s;
  s.x = x;
  s.h_prev = state.h;
  s.c_prev = state.c;
  detail::step_batch(cell, s);
  return {s.h.col(0), s.c.col(0)};
}

/// Predictions for frames 2..T of one sequence (rows = frames), as a
/// (T-1) x m matrix. The first `warmup` inputs are real frames; after that
/// each prediction is fed back as the next input.
template <class Scalar>
Mat<Scalar> run_sequence(const LstmCell<Scalar>& cell, const Mat<Scalar>& frames, Index warmup) {
  std::span<const Mat<Scalar>> one(&frames, 1);
  detail::check_sequences(cell, one, warmup, "run_sequence");
  const auto caches = detail::forward(cell, one, warmup);
  Mat<Scalar> out(static_cast<Index>(caches.size()), cell.m());
  for (std::size_t s = 0; s < caches.size(); ++s) out.row(static_cast<Index>(s)) = caches[s].h.col(0).transpose();
  return out;
}

/// Batched run_sequence.
template <class Scalar>
std::vector<Mat<Scalar>> run_sequences(const LstmCell<Scalar>& cell, std::span<const Mat<Scalar>> seqs, Index warmup) {
  detail::check_sequences(cell, seqs, warmup, "run_sequences");
  const auto caches = detail::forward(cell, seqs, warmup);
  std::vector<Mat<Scalar>> out(seqs.size(), Mat<Scalar>(static_cast<Index>(caches.size()), cell.m()));
  for (std::size_t s = 0; s < caches.size(); ++s)
    for (std::size_t b = 0; b < seqs.size(); ++b)
      out[b].row(static_cast<Index>(s)) = caches[s].h.col(static_cast<Index>(b)).transpose();
  return out;
}

template <class Scalar>
struct LstmLossAndGrad {
  Scalar loss;
  LstmCell<Scalar> grad;
};

/// MSE between frames 2..T and all T-1 predictions (warm-up and free-run),
/// averaged over the batch, with its gradient by backpropagation through
/// time. Fed-back predictions are differentiated through as well.
template <class Scalar>
LstmLossAndGrad<Scalar> lstm_loss_and_grad(const LstmCell<Scalar>& cell, std::span<const Mat<Scalar>> seqs,
                                           Index warmup) {
  detail::check_sequences(cell, seqs, warmup, "lstm_loss_and_grad");
  const Index m = cell.m();
  const Index batch = static_cast<Index>(seqs.size());
  const auto caches = detail::forward(cell, seqs, warmup);
  const Index steps = static_cast<Index>(caches.size());
  const auto count = static_cast<Scalar>(batch * steps * m);

  LstmLossAndGrad<Scalar> out{Scalar(0), LstmCell<Scalar>::zeros(m)};
  std::vector<Mat<Scalar>> residual(caches.size());
  Mat<Scalar> target(m, batch);
  for (Index s = 0; s < steps; ++s) {
    for (Index b = 0; b < batch; ++b) target.col(b) = seqs[static_cast<std::size_t>(b)].row(s + 1).transpose();
    residual[static_cast<std::size_t>(s)] = caches[static_cast<std::size_t>(s)].h - target;
    out.loss += residual[static_cast<std::size_t>(s)].squaredNorm();
  }
  out.loss /= count;

  Mat<Scalar> dh_next = Mat<Scalar>::Zero(m, batch);
  Mat<Scalar> dc_next = Mat<Scalar>::Zero(m, batch);
  std::array<Mat<Scalar>, 4> dz;
  for (Index s = steps - 1; s >= 0; --s) {
    const auto& c = caches[static_cast<std::size_t>(s)];
    const auto& gi = c.gate[kInputGate].array();
    const auto& gf = c.gate[kForgetGate].array();
    const auto& gg = c.gate[kCellGate].array();
    const auto& go = c.gate[kOutputGate].array();

    const Mat<Scalar> dh = (Scalar(2) / count) * residual[static_cast<std::size_t>(s)] + dh_next;
    const auto tc = c.tanh_c.array();
    const Mat<Scalar> dc = (dc_next.array() + dh.array() * go * (Scalar(1) - tc.square())).matrix();

    dz[kOutputGate] = (dh.array() * tc * go * (Scalar(1) - go)).matrix();
    dz[kInputGate] = (dc.array() * gg * gi * (Scalar(1) - gi)).matrix();
    dz[kCellGate] = (dc.array() * gi * (Scalar(1) - gg.square())).matrix();
    dz[kForgetGate] = (dc.array() * c.c_prev.array() * gf * (Scalar(1) - gf)).matrix();
    dc_next = (dc.array() * gf).matrix();

    dh_next.setZero();
    Mat<Scalar> dx = Mat<Scalar>::Zero(m, batch);
    for (std::size_t k = 0; k < 4; ++k) {
      out.grad.w_input[k].noalias() += dz[k] * c.x.transpose();
      out.grad.w_hidden[k].noalias() += dz[k] * c.h_prev.transpose();
      const Vec<Scalar> db = dz[k].rowwise().sum();
      out.grad.b_input[k] += db;
      out.grad.b_hidden[k] += db;
      dh_next.noalias() += cell.w_hidden[k].transpose() * dz[k];
      if (s >= warmup) dx.noalias() += cell.w_input[k].transpose() * dz[k];
    }
    // In free-run the input at step s is the hidden state of step s-1.
    if (s >= warmup) dh_next += dx;
  }
  return out;
}

template <class Scalar>
struct LstmTraining {
  LstmCell<Scalar> cell;
  std::vector<double> loss_history;  ///< sequence-weighted mean batch loss per epoch
};

/// Mini-batch Adam with batch-averaged BPTT gradients. Sequences are
/// reshuffled each epoch; the last partial batch is used as is. A positive
/// `clip_norm` rescales each batch gradient to at most that global norm.
template <class Scalar>
LstmTraining<Scalar> train_lstm(LstmCell<Scalar> cell, std::span<const Mat<Scalar>> seqs, const TrainSchedule& schedule,
                                Index warmup, std::uint64_t seed, double clip_norm = 0.0, AdamHyper hyper = {}) {
  schedule.validate();
  validate_cell(cell);
  detail::check_sequences(cell, seqs, warmup, "train_lstm");

  std::vector<AdamState<Mat<Scalar>>> weight_states;
  std::vector<AdamState<Vec<Scalar>>> bias_states;
  for_each_parameter(
      [&](const char*, auto& t) {
        using Plain = std::decay_t<decltype(t)>;
        if constexpr (Plain::ColsAtCompileTime == 1)
          bias_states.push_back(adam_init_like(t, hyper));
        else
          weight_states.push_back(adam_init_like(t, hyper));
      },
      cell);

  Rng rng(seed);
  std::vector<std::size_t> order(seqs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<Mat<Scalar>> batch;

  LstmTraining<Scalar> out;
  out.loss_history.reserve(static_cast<std::size_t>(schedule.epochs));
  for (int epoch = 0; epoch < schedule.epochs; ++epoch) {
    const auto rates = schedule_at(schedule, epoch);
    rng.shuffle(std::span<std::size_t>(order));
    double weighted = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(schedule.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(schedule.batch_size));
      batch.clear();
      for (std::size_t k = start; k < stop; ++k) batch.push_back(seqs[order[k]]);
      auto lg = lstm_loss_and_grad(cell, std::span<const Mat<Scalar>>(batch), warmup);
      weighted += static_cast<double>(lg.loss) * static_cast<double>(stop - start);
      if (clip_norm > 0) {
        double sq = 0;
        for_each_parameter([&](const char*, const auto& g) { sq += static_cast<double>(g.squaredNorm()); }, lg.grad);
        const double norm = std::sqrt(sq);
        if (norm > clip_norm) {
          const auto factor = static_cast<Scalar>(clip_norm / norm);
          for_each_parameter([&](const char*, auto& g) { g *= factor; }, lg.grad);
        }
      }

      std::size_t wi = 0, bi = 0;
      for_each_parameter(
          [&](const char*, auto& param, auto& grad) {
            using Plain = std::decay_t<decltype(param)>;
            if constexpr (Plain::ColsAtCompileTime == 1)
              adam_step(bias_states[bi++], param, grad, rates.lr, rates.weight_decay);
            else
              adam_step(weight_states[wi++], param, grad, rates.lr, rates.weight_decay);
          },
          cell, lg.grad);
    }
    out.loss_history.push_back(weighted / static_cast<double>(order.size()));
  }
  out.cell = std::move(cell);
  return out;
}

/// Mean over sequences of the pixel-space MSE on the free-run part only:
/// raw frames W+1..T (1-based) against decoded predictions of those frames.
/// `decode` maps a block of latent rows to ambient rows.
template <class Scalar, class Decoder>
double evaluate_prediction(const LstmCell<Scalar>& cell, std::span<const Mat<Scalar>> latent_seqs,
                           std::span<const Mat<Scalar>> raw_seqs, Index warmup, Decoder&& decode) {
  if (latent_seqs.size() != raw_seqs.size()) throw Error("evaluate_prediction: latent/raw sequence count mismatch");
  const auto preds = run_sequences(cell, latent_seqs, warmup);
  double total = 0;
  for (std::size_t b = 0; b < preds.size(); ++b) {
    const auto& raw = raw_seqs[b];
    const Index free_run = raw.rows() - warmup;
    const Mat<Scalar> decoded = decode(preds[b].bottomRows(free_run));
    total += static_cast<double>(mse(decoded, raw.bottomRows(free_run)));
  }
  return total / static_cast<double>(preds.size());
}

}  // namespace gtsrep
