#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "heleshaw/dynamics.hpp"

using namespace heleshaw;

namespace {

DtnConfig dtn_default() { return DtnConfig{}; }

StepperConfig stepper(Scheme scheme, double dt, double t_end) {
  StepperConfig sc;
  sc.scheme = scheme;
  sc.dt = dt;
  sc.t_end = t_end;
  return sc;
}

}  // namespace

TEST_CASE("stepper config validation") {
  StepperConfig sc;
  sc.dt = -1.0;
  sc.cfl_safety = 2.0;
  try {
    sc.validate();
    FAIL("expected invalid_argument");
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    CHECK(msg.find("dt") != std::string::npos);
    CHECK(msg.find("cfl_safety") != std::string::npos);
  }
}

TEST_CASE("rhs at equilibria and in the linear regime") {
  auto g = build_grid(1, 128);
  DtnConfig cfg = dtn_default();
  CHECK(norm_linf(rhs({0.0, Field(g, 0.0)}, cfg)) <= 1e-14);
  CHECK(norm_linf(rhs({0.0, Field(g, 2.3)}, cfg)) <= 1e-12);

  const double eps = 0.01;
  Field h = cosine_mode(g, {1, 0}, eps);
  Field expected = -apply_multiplier(h, symbols::abs_k());
  CHECK(norm_linf(rhs({0.0, h}, cfg) - expected) <= 10 * eps * eps);
}

TEST_CASE("flat state is an exact fixed point of both schemes") {
  auto g = build_grid(1, 64);
  DtnConfig cfg = dtn_default();
  for (Scheme scheme : {Scheme::semi_implicit, Scheme::rk4}) {
    SimState s{0.0, Field(g, 0.0)};
    for (int i = 0; i < 5; ++i) s = step(s, stepper(scheme, 1e-3, 1.0), cfg);
    CHECK(norm_linf(s.h) == 0.0);
  }
}

TEST_CASE("steps conserve the mean and do not increase the L2 norm") {
  auto g = build_grid(1, 128);
  DtnConfig cfg = dtn_default();
  for (Scheme scheme : {Scheme::semi_implicit, Scheme::rk4}) {
    SimState s{0.0, cosine_mode(g, {1, 0}, 0.1) + cosine_mode(g, {3, 0}, 0.02, 0.9)};
    double m0 = mean(s.h);
    double l2 = norm_l2(s.h);
    for (int i = 0; i < 20; ++i) {
      s = step(s, stepper(scheme, 1e-3, 1.0), cfg);
      CHECK(std::abs(mean(s.h) - m0) <= 1e-10);
      const double l2_new = norm_l2(s.h);
      CHECK(l2_new <= l2 + 1e-8);
      l2 = l2_new;
    }
  }
}

TEST_CASE("linear-regime amplitude decay matches e^{-k t}") {
  auto g = build_grid(1, 128);
  DtnConfig cfg = dtn_default();
  const double eps = 1e-3;
  // semi-implicit carries an O(k^2 dt / 2) rate bias; rk4 is sharp
  {
    Field h0 = cosine_mode(g, {2, 0}, eps);
    auto r = run(h0, stepper(Scheme::semi_implicit, 1e-3, 1.0), cfg, {}, 0);
    const double ratio = mode_magnitude(r.final_state.h, {2, 0}) / (eps / 2);
    CHECK(std::abs(ratio / std::exp(-2.0) - 1.0) <= 1e-2);
  }
  for (int k : {1, 3}) {
    Field h0 = cosine_mode(g, {k, 0}, eps);
    auto r = run(h0, stepper(Scheme::rk4, 1e-3, 1.0), cfg, {}, 0);
    const double ratio = mode_magnitude(r.final_state.h, {k, 0}) / (eps / 2);
    CHECK(std::abs(ratio / std::exp(-double(k)) - 1.0) <= 1e-4);
  }
}

TEST_CASE("schemes agree as dt shrinks (first-order Richardson)") {
  auto g = build_grid(1, 128);
  DtnConfig cfg = dtn_default();
  Field h0 = cosine_mode(g, {1, 0}, 0.1);
  auto gap = [&](double dt) {
    auto a = run(h0, stepper(Scheme::semi_implicit, dt, 0.5), cfg, {}, 0);
    auto b = run(h0, stepper(Scheme::rk4, dt, 0.5), cfg, {}, 0);
    return norm_l2(a.final_state.h - b.final_state.h);
  };
  const double coarse = gap(1e-3);
  const double fine = gap(5e-4);
  CHECK(coarse <= 1e-4);
  const double ratio = coarse / fine;
  CHECK(ratio >= 1.6);
  CHECK(ratio <= 2.6);
}

TEST_CASE("second time derivative: equilibria and the linearized oracle") {
  auto g = build_grid(1, 128);
  DtnConfig cfg = dtn_default();
  CHECK(norm_linf(second_time_derivative({0.0, Field(g, 0.0)}, cfg)) <= 1e-14);

  const double eps = 0.01;
  const int k = 2;
  SimState s{0.0, cosine_mode(g, {k, 0}, eps)};
  Field d2 = second_time_derivative(s, cfg);
  CHECK(norm_linf(d2 - double(k * k) * s.h) <= 10 * eps * eps);
}

TEST_CASE("second time derivative matches a central difference in time") {
  auto g = build_grid(1, 128);
  DtnConfig cfg = dtn_default();
  Field h0 = cosine_mode(g, {1, 0}, 0.1);
  auto fd_error = [&](double dt) {
    StepperConfig sc = stepper(Scheme::rk4, dt, 1.0);
    SimState s0{0.0, h0};
    SimState s1 = step(s0, sc, cfg);
    SimState s2 = step(s1, sc, cfg);
    Field fd = (1.0 / (dt * dt)) * (s2.h - 2.0 * s1.h + s0.h);
    return norm_linf(fd - second_time_derivative(s1, cfg));
  };
  const double e1 = fd_error(2e-3);
  const double e2 = fd_error(1e-3);
  CHECK(e1 <= 1e-5);        // O(dt^2) scale for this amplitude
  CHECK(e2 <= e1 / 2.5);    // observed second order
}

TEST_CASE("run: records, stride semantics, decay") {
  auto g = build_grid(1, 64);
  DtnConfig cfg = dtn_default();
  StepperConfig sc = stepper(Scheme::semi_implicit, 1e-3, 0.05);

  auto zero = run(Field(g, 0.0), sc, cfg, {}, 0);
  CHECK(zero.records.size() == 2);
  CHECK(zero.records.front().t == 0.0);
  CHECK(zero.records.back().t == doctest::Approx(0.05));
  CHECK(zero.records.back().h_linf == 0.0);
  CHECK_FALSE(zero.truncated);

  Field h0 = cosine_mode(g, {1, 0}, 0.1);
  auto res = run(h0, sc, cfg, {}, 10);
  CHECK(res.records.size() == 2 + 4);  // t=0, steps 10,20,30,40, t_end
  CHECK(norm_l2(res.final_state.h) < norm_l2(h0));
  CHECK(std::abs(mean(res.final_state.h) - mean(h0)) <= 1e-8 * sc.t_end);
}

TEST_CASE("run aborts cleanly outside the validated regime") {
  auto g = build_grid(1, 16);
  DtnConfig cfg;
  cfg.backend = DtnBackend::elliptic;
  StepperConfig sc = stepper(Scheme::semi_implicit, 1e-3, 0.1);
  auto res = run(cosine_mode(g, {1, 0}, 60.0), sc, cfg, {}, 1);
  CHECK(res.truncated);
  CHECK(res.note.find("blow-up") != std::string::npos);
  CHECK(res.records.size() >= 1);
  CHECK(res.final_state.h.finite());
}

TEST_CASE("two-dimensional evolution conserves mean and decays") {
  auto g = build_grid(2, 16);
  DtnConfig cfg = dtn_default();
  Field h0 = Field::sample(g, [](const std::array<double, 2>& x) {
    return 0.05 * std::cos(x[0]) * std::cos(x[1]);
  });
  StepperConfig sc = stepper(Scheme::semi_implicit, 1e-3, 0.02);
  auto res = run(h0, sc, cfg, {}, 0);
  CHECK_FALSE(res.truncated);
  CHECK(std::abs(mean(res.final_state.h) - mean(h0)) <= 1e-10);
  CHECK(norm_l2(res.final_state.h) < norm_l2(h0));
  // cos(x0)cos(x1) is an eigenfunction of the linearization with |k| = sqrt 2
  const double ratio = mode_magnitude(res.final_state.h, {1, 1}) /
                       mode_magnitude(h0, {1, 1});
  CHECK(std::abs(ratio / std::exp(-std::sqrt(2.0) * 0.02) - 1.0) <= 1e-2);
}

TEST_CASE("adaptive stepping tracks the fixed-step solution") {
  auto g = build_grid(1, 64);
  DtnConfig cfg = dtn_default();
  Field h0 = cosine_mode(g, {1, 0}, 0.1);
  StepperConfig fixed = stepper(Scheme::semi_implicit, 1e-3, 0.05);
  StepperConfig adaptive = fixed;
  adaptive.adaptive = true;
  adaptive.dt = 4e-3;  // let the controller pick the step
  auto a = run(h0, fixed, cfg, {}, 0);
  auto b = run(h0, adaptive, cfg, {}, 0);
  CHECK(b.final_state.t == doctest::Approx(0.05));
  CHECK(norm_l2(a.final_state.h - b.final_state.h) <= 1e-5);
}
