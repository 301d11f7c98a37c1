#pragma once

#include "gtsrep/linalg.hpp"

#include <cmath>
#include <vector>

namespace gtsrep {

struct AdamHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Moment accumulators for one parameter tensor of type `Plain` (an Eigen
/// matrix or vector).
template <class Plain>
struct AdamState {
  Plain first;
  Plain second;
  long step = 0;
  AdamHyper hyper;
};

template <class Plain>
AdamState<Plain> adam_init(Index rows, Index cols, AdamHyper hyper = {}) {
  AdamState<Plain> s;
  s.first = Plain::Zero(rows, cols);
  s.second = Plain::Zero(rows, cols);
  s.hyper = hyper;
  return s;
}

template <class Derived>
AdamState<typename Derived::PlainObject> adam_init_like(const Eigen::MatrixBase<Derived>& params,
                                                        AdamHyper hyper = {}) {
  return adam_init<typename Derived::PlainObject>(params.rows(), params.cols(), hyper);
}

/// One Adam update with L2 weight decay folded into the gradient.
template <class Plain, class Grad>
void adam_step(AdamState<Plain>& state, Plain& params, const Eigen::MatrixBase<Grad>& grad, double lr,
               double weight_decay) {
  if (params.rows() != grad.rows() || params.cols() != grad.cols() || state.first.rows() != params.rows() ||
      state.first.cols() != params.cols())
    throw Error("adam_step: shape mismatch");
  using Scalar = typename Plain::Scalar;
  const auto b1 = static_cast<Scalar>(state.hyper.beta1);
  const auto b2 = static_cast<Scalar>(state.hyper.beta2);
  const auto eps = static_cast<Scalar>(state.hyper.eps);

  ++state.step;
  const Plain g = grad + static_cast<Scalar>(weight_decay) * params;
  state.first = b1 * state.first + (Scalar(1) - b1) * g;
  state.second = b2 * state.second + (Scalar(1) - b2) * g.cwiseAbs2();
  const Scalar c1 = Scalar(1) - std::pow(b1, static_cast<Scalar>(state.step));
  const Scalar c2 = Scalar(1) - std::pow(b2, static_cast<Scalar>(state.step));
  params.array() -= static_cast<Scalar>(lr) * (state.first.array() / c1) /
                    ((state.second.array() / c2).sqrt() + eps);
}

/// Divide a rate by `divisor` from `epoch` onward (inclusive).
struct Milestone {
  int epoch = 0;
  double divisor = 1.0;
};

struct TrainSchedule {
  int epochs = 0;
  int batch_size = 1;
  double lr0 = 1e-3;
  std::vector<Milestone> lr_milestones;
  double wd0 = 0.0;
  std::vector<Milestone> wd_milestones;

  void validate() const {
    if (epochs < 0) throw Error("TrainSchedule: epochs must be >= 0");
    if (batch_size < 1) throw Error("TrainSchedule: batch_size must be >= 1");
    if (!(lr0 > 0)) throw Error("TrainSchedule: lr0 must be > 0");
    if (!(wd0 >= 0)) throw Error("TrainSchedule: wd0 must be >= 0");
    for (const auto* list : {&lr_milestones, &wd_milestones}) {
      for (std::size_t k = 0; k < list->size(); ++k) {
        if (!((*list)[k].divisor > 0)) throw Error("TrainSchedule: milestone divisor must be > 0");
        if (k > 0 && (*list)[k].epoch <= (*list)[k - 1].epoch)
          throw Error("TrainSchedule: milestone epochs must be strictly increasing");
      }
    }
  }
};

struct ScheduledRates {
  double lr;
  double weight_decay;
};

inline ScheduledRates schedule_at(const TrainSchedule& s, int epoch) {
  if (epoch < 0 || epoch >= s.epochs)
    throw Error("schedule_at: epoch " + std::to_string(epoch) + " outside [0, " + std::to_string(s.epochs) + ")");
  auto apply = [epoch](double rate, const std::vector<Milestone>& ms) {
    for (const auto& m : ms)
      if (m.epoch <= epoch) rate /= m.divisor;
    return rate;
  };
  return {apply(s.lr0, s.lr_milestones), apply(s.wd0, s.wd_milestones)};
}

namespace schedules {

/// Autoencoder on image sequences: 400 epochs, batches of 100, lr 1e-5,
/// weight decay 1e-5 divided by 10 at epochs 4 and 120.
inline TrainSchedule autoencoder_images() { return {400, 100, 1e-5, {}, 1e-5, {{4, 10.0}, {120, 10.0}}}; }

/// Autoencoder on ROI series: 400 epochs, batches of 6, lr 1e-5 halved at
/// epoch 200, weight decay 1e-5.
inline TrainSchedule autoencoder_series() { return {400, 6, 1e-5, {{200, 2.0}}, 1e-5, {}}; }

/// FC-LSTM: 600 epochs, batches of 6, lr 1e-3 halved at 200 and 400, no decay.
inline TrainSchedule lstm() { return {600, 6, 1e-3, {{200, 2.0}, {400, 2.0}}, 0.0, {}}; }

}  // namespace schedules

}  // namespace gtsrep
