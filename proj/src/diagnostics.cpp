#include "heleshaw/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace heleshaw {

namespace {

// Composite (nonlinearly formed) fields are projected to the 2/3 band
// before entering an operator, matching the product-dealiasing policy.
Field opin(const Field& f) { return dealias(f); }

Field product(const Field& f, const Field& g) {
  return pointwise(f, g, [](double a, double b) { return a * b; });
}

double min_value(const Field& f) {
  double m = f[0];
  for (double v : f.values()) m = std::min(m, v);
  return m;
}

double max_value(const Field& f) {
  double m = f[0];
  for (double v : f.values()) m = std::max(m, v);
  return m;
}

}  // namespace

ConvexFunctional ConvexFunctional::make(std::string name,
                                        std::function<double(double)> phi,
                                        std::function<double(double)> dphi,
                                        std::function<double(double)> d2phi,
                                        bool phi_convex, bool dphi_convex,
                                        bool nonneg) {
  ConvexFunctional f{std::move(name), std::move(phi), std::move(dphi),
                     std::move(d2phi), phi_convex, dphi_convex, nonneg};
  const int samples = 1000;
  const double lo = -5.0, hi = 5.0;
  const double delta = (hi - lo) / samples;
  for (int i = 0; i <= samples; ++i) {
    const double x = lo + i * delta;
    if (f.phi_convex && f.d2phi(x) < 0.0)
      throw std::logic_error("ConvexFunctional " + f.name +
                             ": phi_convex flag contradicted at x=" + std::to_string(x));
    if (f.nonneg && f.phi(x) < 0.0)
      throw std::logic_error("ConvexFunctional " + f.name +
                             ": nonneg flag contradicted at x=" + std::to_string(x));
    if (f.dphi_convex && i + 3 <= samples) {
      const double third = f.phi(x + 3 * delta) - 3 * f.phi(x + 2 * delta) +
                           3 * f.phi(x + delta) - f.phi(x);
      if (third < -1e-10)
        throw std::logic_error("ConvexFunctional " + f.name +
                               ": dphi_convex flag contradicted at x=" +
                               std::to_string(x));
    }
  }
  return f;
}

namespace convex {

ConvexFunctional square() {
  return ConvexFunctional::make(
      "x2", [](double x) { return x * x; }, [](double x) { return 2 * x; },
      [](double) { return 2.0; }, true, true, true);
}

ConvexFunctional fourth() {
  return ConvexFunctional::make(
      "x4", [](double x) { return x * x * x * x; },
      [](double x) { return 4 * x * x * x; }, [](double x) { return 12 * x * x; },
      true, false, true);
}

ConvexFunctional exponential() {
  return ConvexFunctional::make(
      "exp", [](double x) { return std::exp(x); }, [](double x) { return std::exp(x); },
      [](double x) { return std::exp(x); }, true, true, true);
}

ConvexFunctional cosh_profile() {
  return ConvexFunctional::make(
      "cosh", [](double x) { return std::cosh(x); }, [](double x) { return std::sinh(x); },
      [](double x) { return std::cosh(x); }, true, false, true);
}

ConvexFunctional negative_part_squared(double width) {
  // p(x) = (sqrt(x^2 + w^2) - x)/2 is a smooth convex model of max(-x, 0);
  // p^2 mollifies x^2 1_{x<0} with transition width w.
  auto p = [width](double x) { return 0.5 * (std::sqrt(x * x + width * width) - x); };
  auto dp = [width](double x) {
    return 0.5 * (x / std::sqrt(x * x + width * width) - 1.0);
  };
  auto d2p = [width](double x) {
    const double r = std::sqrt(x * x + width * width);
    return 0.5 * width * width / (r * r * r);
  };
  return ConvexFunctional::make(
      "negpart2", [p](double x) { return p(x) * p(x); },
      [p, dp](double x) { return 2 * p(x) * dp(x); },
      [p, dp, d2p](double x) { return 2 * (dp(x) * dp(x) + p(x) * d2p(x)); }, true,
      false, true);
}

ConvexFunctional affine(double a, double b) {
  return ConvexFunctional::make(
      "affine", [a, b](double x) { return a * x + b; }, [a](double) { return a; },
      [](double) { return 0.0; }, true, true, false);
}

}  // namespace convex

std::vector<ConvexFunctional> lyapunov_suite() {
  return {convex::square(), convex::exponential(), convex::cosh_profile()};
}

std::vector<ConvexFunctional> strong_lyapunov_suite() {
  return {convex::square(), convex::exponential()};
}

std::vector<ConvexFunctional> cordoba_suite() {
  return {convex::square(), convex::fourth(), convex::cosh_profile(),
          convex::negative_part_squared()};
}

TraceFields taylor_fields(const SimState& state, const DtnConfig& cfg) {
  TraceFields out;
  out.h = state.h;
  out.g_h = dtn_apply(state.h, state.h, cfg);
  const Field g2 = grad_squared(state.h);
  out.b = pointwise(out.g_h, g2,
                    [](double g, double q) { return (g + q) / (1.0 + q); });
  out.a = pointwise(out.b, [](double b) { return 1.0 - b; });
  const auto grad_h = gradient(state.h);
  for (const auto& ga : grad_h) out.v.push_back(product(out.a, ga));
  return out;
}

Field gamma_coefficient(const TraceFields& traces, const DtnConfig& cfg) {
  const Field& h = traces.h;
  Field speed2 = product(traces.b, traces.b);
  for (const auto& va : traces.v) speed2 = speed2 + product(va, va);

  Field sum = dtn_apply(h, opin(speed2), cfg) -
              2.0 * product(traces.b, dtn_apply(h, opin(traces.b), cfg));
  for (const auto& va : traces.v)
    sum = sum - 2.0 * product(va, dtn_apply(h, opin(va), cfg));

  const Field g2 = grad_squared(h);
  return pointwise(sum, g2, [](double s, double q) { return s / (1.0 + q); });
}

Field gamma_coefficient(const SimState& state, const DtnConfig& cfg) {
  return gamma_coefficient(taylor_fields(state, cfg), cfg);
}

double lyapunov_value(const SimState& state, const ConvexFunctional& f) {
  const Field phi_h = pointwise(state.h, f.phi);
  if (!phi_h.finite())
    throw std::runtime_error("lyapunov_value: Phi(h) overflowed for " + f.name);
  return integrate(phi_h);
}

double dissipation_value(const SimState& state, const ConvexFunctional& f,
                         const DtnConfig& cfg) {
  const Field g = dtn_apply(state.h, state.h, cfg);
  const Field dphi_h = pointwise(state.h, f.dphi);
  if (!dphi_h.finite())
    throw std::runtime_error("dissipation_value: Phi'(h) overflowed for " + f.name);
  return inner(dphi_h, g);
}

LyapunovDifferences lyapunov_differences(
    const std::vector<std::pair<double, double>>& series) {
  if (series.size() < 3)
    throw std::invalid_argument("lyapunov_differences: need at least 3 samples");
  const double dt = series[1].first - series[0].first;
  for (std::size_t i = 1; i + 1 < series.size(); ++i) {
    const double step_i = series[i + 1].first - series[i].first;
    if (std::abs(step_i - dt) > 1e-9 * std::max(std::abs(dt), 1.0))
      throw std::invalid_argument("lyapunov_differences: non-uniform time stride");
  }
  LyapunovDifferences out;
  for (std::size_t i = 0; i + 1 < series.size(); ++i)
    out.first.push_back(series[i + 1].second - series[i].second);
  for (std::size_t i = 1; i + 1 < series.size(); ++i)
    out.second.push_back(series[i + 1].second - 2 * series[i].second +
                         series[i - 1].second);
  return out;
}

std::pair<double, double> l2_convexity_identity(const SimState& state,
                                                const DtnConfig& cfg) {
  const Field& h = state.h;
  const Field g = dtn_apply(h, h, cfg);
  const Field zeta = -g;  // dh/dt
  const double lhs = -(inner(zeta, g) + inner(h, shape_derivative(h, h, zeta, cfg)) +
                       inner(h, dtn_apply(h, zeta, cfg)));
  const TraceFields traces = taylor_fields(state, cfg);
  const Field w = pointwise(g, grad_squared(h),
                            [](double gg, double q) { return gg * gg + q; });
  const double rhs = inner(traces.a, w);
  return {lhs, rhs};
}

Field elliptic_residual(const SimState& state, const DtnConfig& cfg) {
  const Field& h = state.h;
  const Field g = dtn_apply(h, h, cfg);
  const Field w = pointwise(g, grad_squared(h),
                            [](double gg, double q) { return gg * gg + q; });
  return second_time_derivative(state, cfg) + laplacian_of(h) + adjoint_b(h, w, cfg);
}

Field elliptic_residual_alt(const SimState& state, const DtnConfig& cfg) {
  const Field& h = state.h;
  const TraceFields traces = taylor_fields(state, cfg);
  Field speed2 = product(traces.b, traces.b);
  for (const auto& va : traces.v) speed2 = speed2 + product(va, va);
  const auto grad_h = gradient(h);
  std::vector<Field> flux;
  flux.reserve(grad_h.size());
  for (const auto& ga : grad_h) flux.push_back(product(speed2, ga));
  return second_time_derivative(state, cfg) + laplacian_of(h) +
         dtn_apply(h, speed2, cfg) - divergence(flux);
}

Field cordoba_gap(const Field& h, const Field& f, const ConvexFunctional& phi,
                  const DtnConfig& cfg) {
  ensure_finite(f, "cordoba_gap");
  const Field gf = dtn_apply(h, f, cfg);
  const Field lhs = product(pointwise(f, phi.dphi), gf);
  const Field rhs = dtn_apply(h, opin(pointwise(f, phi.phi)), cfg);
  return lhs - rhs;
}

Field operator_l(const TraceFields& traces, const Field& f, const DtnConfig& cfg) {
  ensure_finite(f, "operator_l");
  if (min_value(traces.a) <= 0.0)
    throw std::runtime_error(
        "operator_l: Rayleigh-Taylor coefficient is not positive; "
        "numerical breakdown");
  const Field sqrt_a = pointwise(traces.a, [](double a) { return std::sqrt(a); });
  const Field nonlocal =
      product(sqrt_a, dtn_apply(traces.h, opin(product(sqrt_a, f)), cfg));

  const auto grad_f = gradient(f);
  Field advect = product(traces.v[0], grad_f[0]);
  for (std::size_t a = 1; a < traces.v.size(); ++a)
    advect = advect + product(traces.v[a], grad_f[a]);

  const Field div_v = divergence(traces.v);
  return -advect - 0.5 * product(div_v, f) + nonlocal;
}

Field operator_l(const SimState& state, const Field& f, const DtnConfig& cfg) {
  return operator_l(taylor_fields(state, cfg), f, cfg);
}

EntropyReport entropy_residual(const SimState& state, double m, const DtnConfig& cfg) {
  if (!(m > 0.0)) throw std::invalid_argument("entropy_residual: m must be positive");
  const TraceFields traces = taylor_fields(state, cfg);
  if (min_value(traces.a) <= 0.0)
    throw std::runtime_error("entropy_residual: Rayleigh-Taylor coefficient not positive");

  const Field gamma = gamma_coefficient(traces, cfg);
  const Field u = pointwise(traces.a, [m](double a) {
    return std::log(m * a) / std::sqrt(a);
  });

  // d_t a = V.grad a - a G(h)a - gamma
  const auto grad_a = gradient(traces.a);
  Field advect = product(traces.v[0], grad_a[0]);
  for (std::size_t i = 1; i < traces.v.size(); ++i)
    advect = advect + product(traces.v[i], grad_a[i]);
  const Field g_a = dtn_apply(traces.h, opin(traces.a), cfg);
  const Field dt_a = advect - product(traces.a, g_a) - gamma;

  // du/da = 1/(a sqrt a) - log(m a)/(2 a sqrt a)
  const Field du_da = pointwise(traces.a, [m](double a) {
    const double s = a * std::sqrt(a);
    return 1.0 / s - std::log(m * a) / (2.0 * s);
  });
  const Field dt_u = product(du_da, dt_a);

  const Field lu = operator_l(traces, u, cfg);
  const Field damping = pointwise(gamma, traces.a,
                                  [](double g, double a) { return -g / (2.0 * a); });
  EntropyReport out;
  out.residual = dt_u + lu + product(damping, u);
  out.damping = damping;
  out.forcing_bound = pointwise(gamma, traces.a, [](double g, double a) {
    return -g / (a * std::sqrt(a));
  });
  return out;
}

std::vector<std::size_t> min_a_violations(const std::vector<DiagnosticsRecord>& records,
                                          double tol) {
  if (records.empty())
    throw std::invalid_argument("min_a_violations: empty series");
  if (!records.front().min_a)
    throw std::invalid_argument("min_a_violations: series lacks min_a entries");
  const double base = *records.front().min_a;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < records.size(); ++i)
    if (records[i].min_a && *records[i].min_a < base - tol) out.push_back(i);
  return out;
}

DiagnosticHook hook_lyapunov(std::vector<ConvexFunctional> suite, DtnConfig cfg) {
  return [suite = std::move(suite), cfg](const SimState& s, DiagnosticsRecord& rec) {
    const Field g = dtn_apply(s.h, s.h, cfg);  // shared across the suite
    for (const auto& f : suite) {
      rec.functionals.emplace_back(f.name, lyapunov_value(s, f));
      rec.dissipation.emplace_back(f.name, inner(pointwise(s.h, f.dphi), g));
    }
  };
}

DiagnosticHook hook_signs(DtnConfig cfg) {
  return [cfg, suite = cordoba_suite()](const SimState& s, DiagnosticsRecord& rec) {
    const TraceFields traces = taylor_fields(s, cfg);
    rec.min_a = min_value(traces.a);
    rec.max_gamma = max_value(gamma_coefficient(traces, cfg));
    double worst = 0.0;
    bool first = true;
    for (const auto& f : suite) {
      const double gap = min_value(cordoba_gap(s.h, s.h, f, cfg));
      worst = first ? gap : std::min(worst, gap);
      first = false;
    }
    rec.cordoba_min_gap = worst;
  };
}

DiagnosticHook hook_entropy(DtnConfig cfg) {
  return [cfg](const SimState& s, DiagnosticsRecord& rec) {
    double worst = 0.0;
    bool first = true;
    for (double m : {1.0, 10.0}) {
      const double r = min_value(entropy_residual(s, m, cfg).residual);
      worst = first ? r : std::min(worst, r);
      first = false;
    }
    rec.entropy_min_residual = worst;
  };
}

DiagnosticHook hook_elliptic(DtnConfig cfg) {
  return [cfg](const SimState& s, DiagnosticsRecord& rec) {
    const Field r = elliptic_residual(s, cfg);
    const double scale = norm_l2(laplacian_of(s.h));
    rec.elliptic_residual_l2 = norm_l2(r) / std::max(scale, 1e-300);
  };
}

}  // namespace heleshaw
