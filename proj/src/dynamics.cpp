#include "heleshaw/dynamics.hpp"

#include <cmath>
#include <sstream>

namespace heleshaw {

bool DiagnosticsRecord::all_finite() const {
  auto ok = [](double v) { return std::isfinite(v); };
  for (const auto& [name, v] : functionals)
    if (!ok(v)) return false;
  for (const auto& [name, v] : dissipation)
    if (!ok(v)) return false;
  for (const auto& opt : {min_a, max_gamma, elliptic_residual_l2, cordoba_min_gap,
                          entropy_min_residual})
    if (opt && !ok(*opt)) return false;
  return ok(t) && ok(h_l2) && ok(h_linf) && ok(h_mean);
}

void StepperConfig::validate() const {
  std::ostringstream problems;
  if (!(dt > 0.0) || !std::isfinite(dt)) problems << "dt must be positive; ";
  if (!(t_end >= dt)) problems << "t_end must be >= dt; ";
  if (!(cfl_safety > 0.0) || cfl_safety > 1.0)
    problems << "cfl_safety must be in (0,1]; ";
  const std::string msg = problems.str();
  if (!msg.empty()) throw std::invalid_argument("StepperConfig: " + msg);
}

Field rhs(const SimState& state, const DtnConfig& cfg) {
  return -dtn_apply(state.h, state.h, cfg);
}

namespace {

// High-order smoothing applied to the state after each step.  The expansion
// backend's effective symbol is wrong for modes within the h-bandwidth of
// the dealias cutoff (their product sidebands are truncated), and both
// schemes would otherwise amplify roundoff there.  Any resolved solution
// content the taper touches is far below discretization error.
Field pin_boundary_band(const Field& h) { return spectral_taper(h); }

void check_state(const Field& h, const SimState& last) {
  if (!h.finite())
    throw blowup_error("time step produced non-finite values", last);
  if (norm_linf(h) > 50.0)
    throw blowup_error("max|h| exceeded the blow-up threshold 50", last);
}

SimState semi_implicit_step(const SimState& state, double dt, const DtnConfig& cfg) {
  const Field g = dtn_apply(state.h, state.h, cfg);
  const TorusGrid& grid = state.h.grid();
  auto h_hat = *state.h.spectrum();
  const auto& g_hat = *g.spectrum();
  for (std::size_t i = 0; i < h_hat.size(); ++i) {
    const auto k = grid.wavenumbers(i);
    const double absk = std::hypot(double(k[0]), double(k[1]));
    h_hat[i] = (h_hat[i] - dt * (g_hat[i] - absk * h_hat[i])) / (1.0 + dt * absk);
  }
  Field h_new = pin_boundary_band(
      Field::from_spectrum(state.h.grid_ptr(), std::move(h_hat)));
  check_state(h_new, state);
  return {state.t + dt, std::move(h_new)};
}

double rk4_cfl_dt(const SimState& state, const StepperConfig& sc, const DtnConfig& cfg) {
  // max|V| from the horizontal velocity trace V = (1-B) grad h
  const Field b = trace_b(state.h, state.h, cfg);
  const auto grad_h = gradient(state.h);
  double vmax = 0.0;
  for (const auto& ga : grad_h) {
    const Field va = pointwise(b, ga, [](double bb, double gg) { return (1.0 - bb) * gg; });
    vmax = std::max(vmax, norm_linf(va));
  }
  const double cap = sc.cfl_safety * state.h.grid().spacing() / std::max(1.0, vmax);
  return std::min(sc.dt, cap);
}

SimState rk4_step(const SimState& state, double dt, const DtnConfig& cfg) {
  const Field& h = state.h;
  const Field k1 = rhs(state, cfg);
  const Field k2 = rhs({state.t + dt / 2, h + (dt / 2) * k1}, cfg);
  const Field k3 = rhs({state.t + dt / 2, h + (dt / 2) * k2}, cfg);
  const Field k4 = rhs({state.t + dt, h + dt * k3}, cfg);
  Field h_new = pin_boundary_band(h + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
  check_state(h_new, state);
  return {state.t + dt, std::move(h_new)};
}

}  // namespace

SimState step(const SimState& state, const StepperConfig& sc, const DtnConfig& cfg) {
  sc.validate();
  cfg.validate();
  ensure_finite(state.h, "step");
  if (sc.scheme == Scheme::semi_implicit)
    return semi_implicit_step(state, sc.dt, cfg);
  return rk4_step(state, rk4_cfl_dt(state, sc, cfg), cfg);
}

Field second_time_derivative(const SimState& state, const DtnConfig& cfg) {
  const Field dh = rhs(state, cfg);
  return -shape_derivative(state.h, state.h, dh, cfg) - dtn_apply(state.h, dh, cfg);
}

RunResult run(const Field& h0, const StepperConfig& sc, const DtnConfig& cfg,
              const std::vector<DiagnosticHook>& hooks, int stride) {
  sc.validate();
  cfg.validate();
  ensure_finite(h0, "run");
  if (stride < 0) throw std::invalid_argument("run: stride must be >= 0");

  RunResult result;
  SimState state{0.0, h0};
  auto record = [&](const SimState& s) {
    DiagnosticsRecord rec;
    rec.t = s.t;
    rec.h_l2 = norm_l2(s.h);
    rec.h_linf = norm_linf(s.h);
    rec.h_mean = mean(s.h);
    for (const auto& hook : hooks) hook(s, rec);
    result.records.push_back(std::move(rec));
  };

  record(state);
  double dt = sc.dt;
  const double dt_floor = sc.dt * std::pow(2.0, -20);
  long accepted = 0;
  try {
    while (state.t < sc.t_end - 1e-12 * sc.t_end) {
      StepperConfig local = sc;
      local.dt = std::min(dt, sc.t_end - state.t);
      if (!sc.adaptive) {
        state = step(state, local, cfg);
      } else {
        // step-doubling local error control
        const SimState full = step(state, local, cfg);
        StepperConfig half = local;
        half.dt = local.dt / 2;
        const SimState two = step(step(state, half, cfg), half, cfg);
        const double err = norm_l2(full.h - two.h);
        const double tol = 1e-8 * std::max(1.0, norm_l2(state.h));
        if (err > tol && local.dt > dt_floor) {
          dt = local.dt / 2;
          if (dt < dt_floor)
            throw std::runtime_error("run: adaptive dt underflow");
          continue;  // reject
        }
        state = two;
        if (err < tol / 16) dt = 2 * dt;
      }
      ++accepted;
      if (stride > 0 && accepted % stride == 0 && state.t < sc.t_end - 1e-12)
        record(state);
    }
    record(state);
  } catch (const blowup_error& e) {
    result.truncated = true;
    result.note = e.what();
    state = e.last_state;
    record(state);
  }
  result.final_state = std::move(state);
  return result;
}

}  // namespace heleshaw
