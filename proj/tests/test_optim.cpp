#include "gtsrep/optim.hpp"

#include <doctest.h>

using namespace gtsrep;

using Scalar1 = Eigen::Matrix<double, 1, 1>;

TEST_CASE("adam_init") {
  const auto s = adam_init<MatrixXd>(3, 4);
  CHECK(s.first == MatrixXd::Zero(3, 4));
  CHECK(s.second == MatrixXd::Zero(3, 4));
  CHECK(s.step == 0);
  const auto t = adam_init<MatrixXd>(3, 4);
  CHECK(t.first == s.first);
  CHECK(t.hyper.beta1 == 0.9);
  CHECK(t.hyper.beta2 == 0.999);
  CHECK(t.hyper.eps == 1e-8);
  CHECK(adam_init_like(VectorXd::Ones(5)).first.size() == 5);
}

TEST_CASE("adam_step") {
  SUBCASE("zero gradient") {
    auto s = adam_init<MatrixXd>(2, 2);
    MatrixXd p = MatrixXd::Constant(2, 2, 0.5);
    adam_step(s, p, MatrixXd::Zero(2, 2), 0.1, 0.0);
    CHECK(p == MatrixXd::Constant(2, 2, 0.5));
  }
  SUBCASE("first step is lr times the sign") {
    for (double g : {3.0, -0.02, 1e3}) {
      auto s = adam_init<Scalar1>(1, 1);
      Scalar1 p(2.0);
      adam_step(s, p, Scalar1(g), 0.01, 0.0);
      CHECK(p(0) - 2.0 == doctest::Approx(-0.01 * (g > 0 ? 1 : -1)).epsilon(1e-5));
    }
  }
  SUBCASE("p squared from 1") {
    // Oracle: the update rule written out on plain doubles.
    double m = 0, v = 0, q = 1;
    auto s = adam_init<Scalar1>(1, 1);
    Scalar1 p(1.0);
    double prev = 1;
    for (int t = 1; t <= 5; ++t) {
      const double g = 2 * q;
      m = 0.9 * m + 0.1 * g;
      v = 0.999 * v + 0.001 * g * g;
      q -= 0.1 * (m / (1 - std::pow(0.9, t))) / (std::sqrt(v / (1 - std::pow(0.999, t))) + 1e-8);

      adam_step(s, p, Scalar1(2 * p(0)), 0.1, 0.0);
      CHECK(p(0) == doctest::Approx(q).epsilon(1e-14));
      CHECK(std::abs(p(0)) < prev);
      prev = std::abs(p(0));
    }
    CHECK(s.step == 5);
    CHECK(s.second(0) >= 0);
  }
  SUBCASE("weight decay enters the gradient") {
    auto a = adam_init<Scalar1>(1, 1);
    auto b = adam_init<Scalar1>(1, 1);
    Scalar1 pa(1.5), pb(1.5);
    for (int k = 0; k < 3; ++k) {
      adam_step(a, pa, Scalar1(0.2), 0.01, 0.1);
      adam_step(b, pb, Scalar1(0.2 + 0.1 * pb(0)), 0.01, 0.0);
    }
    CHECK(pa(0) == pb(0));
  }
  SUBCASE("vanishing rate") {
    auto s = adam_init<MatrixXd>(2, 3);
    MatrixXd p = MatrixXd::Constant(2, 3, 0.25);
    adam_step(s, p, MatrixXd::Constant(2, 3, 4.0), 1e-20, 0.0);
    CHECK((p.array() - 0.25).abs().maxCoeff() < 1e-15);
  }
  SUBCASE("shape mismatch") {
    auto s = adam_init<MatrixXd>(2, 2);
    MatrixXd p = MatrixXd::Zero(2, 2);
    CHECK_THROWS_AS(adam_step(s, p, MatrixXd::Zero(2, 3), 0.1, 0.0), Error);
    MatrixXd q = MatrixXd::Zero(3, 3);
    CHECK_THROWS_AS(adam_step(s, q, MatrixXd::Zero(3, 3), 0.1, 0.0), Error);
  }
}

TEST_CASE("schedule_at") {
  SUBCASE("image autoencoder") {
    const auto s = schedules::autoencoder_images();
    CHECK(s.epochs == 400);
    CHECK(s.batch_size == 100);
    auto r = schedule_at(s, 0);
    CHECK(r.lr == doctest::Approx(1e-5));
    CHECK(r.weight_decay == doctest::Approx(1e-5));
    CHECK(schedule_at(s, 3).weight_decay == doctest::Approx(1e-5));
    CHECK(schedule_at(s, 4).weight_decay == doctest::Approx(1e-6));
    r = schedule_at(s, 130);
    CHECK(r.lr == doctest::Approx(1e-5));
    CHECK(r.weight_decay == doctest::Approx(1e-7));
  }
  SUBCASE("series autoencoder") {
    const auto s = schedules::autoencoder_series();
    CHECK(s.batch_size == 6);
    CHECK(schedule_at(s, 199).lr == doctest::Approx(1e-5));
    CHECK(schedule_at(s, 200).lr == doctest::Approx(5e-6));
    CHECK(schedule_at(s, 399).weight_decay == doctest::Approx(1e-5));
  }
  SUBCASE("lstm") {
    const auto s = schedules::lstm();
    CHECK(s.epochs == 600);
    const auto r = schedule_at(s, 450);
    CHECK(r.lr == doctest::Approx(0.00025));
    CHECK(r.weight_decay == 0);
    CHECK(schedule_at(s, 250).lr == doctest::Approx(0.0005));
  }
  SUBCASE("range") {
    const auto s = schedules::lstm();
    CHECK_THROWS_AS(schedule_at(s, -1), Error);
    CHECK_THROWS_AS(schedule_at(s, 600), Error);
  }
  SUBCASE("validate") {
    CHECK_THROWS_AS((TrainSchedule{-1, 1, 1e-3, {}, 0, {}}.validate()), Error);
    CHECK_THROWS_AS((TrainSchedule{1, 0, 1e-3, {}, 0, {}}.validate()), Error);
    CHECK_THROWS_AS((TrainSchedule{1, 1, 0, {}, 0, {}}.validate()), Error);
    CHECK_THROWS_AS((TrainSchedule{1, 1, 1e-3, {}, -1, {}}.validate()), Error);
    CHECK_THROWS_AS((TrainSchedule{9, 1, 1e-3, {{5, 2.0}, {5, 2.0}}, 0, {}}.validate()), Error);
    CHECK_THROWS_AS((TrainSchedule{9, 1, 1e-3, {{5, 0.0}}, 0, {}}.validate()), Error);
    CHECK_NOTHROW((TrainSchedule{0, 1, 1e-3, {}, 0, {}}.validate()));
  }
}
