#ifndef HELESHAW_DIAGNOSTICS_HPP
#define HELESHAW_DIAGNOSTICS_HPP

#include <utility>
#include <vector>

#include "heleshaw/dynamics.hpp"
#include "heleshaw/record.hpp"

namespace heleshaw {

// Scalar convex profile Phi with derivative evaluators and declared
// convexity flags; the factory samples [-5,5] and rejects flags the
// samples contradict.
struct ConvexFunctional {
  std::string name;
  std::function<double(double)> phi;
  std::function<double(double)> dphi;
  std::function<double(double)> d2phi;
  bool phi_convex = false;
  bool dphi_convex = false;
  bool nonneg = false;

  static ConvexFunctional make(std::string name, std::function<double(double)> phi,
                               std::function<double(double)> dphi,
                               std::function<double(double)> d2phi, bool phi_convex,
                               bool dphi_convex, bool nonneg);
};

namespace convex {
ConvexFunctional square();               // x^2
ConvexFunctional fourth();               // x^4
ConvexFunctional exponential();          // e^x  (Phi and Phi' convex)
ConvexFunctional cosh_profile();         // cosh x
ConvexFunctional negative_part_squared(double width = 1e-3);  // C-inf mollified x^2 1_{x<0}
ConvexFunctional affine(double a, double b);  // a x + b (equality case)
}  // namespace convex

// Monotonicity suite (Phi convex), strong suite (Phi and Phi' convex), and
// the pointwise-inequality suite.
std::vector<ConvexFunctional> lyapunov_suite();
std::vector<ConvexFunctional> strong_lyapunov_suite();
std::vector<ConvexFunctional> cordoba_suite();

// Velocity traces at the free surface, all derived from one operator
// application:  B = (G(h)h + |grad h|^2)/(1 + |grad h|^2),  V = (1-B) grad h,
// and the stability coefficient a = 1 - B.
struct TraceFields {
  Field h;
  Field g_h;  // G(h)h
  Field b;
  std::vector<Field> v;
  Field a;
};

TraceFields taylor_fields(const SimState& state, const DtnConfig& cfg);

// Forcing coefficient in the evolution equation of B,
//   gamma = (G(h)(B^2+|V|^2) - 2B G(h)B - 2V.G(h)V) / (1+|grad h|^2),
// non-positive along the flow.
Field gamma_coefficient(const SimState& state, const DtnConfig& cfg);
Field gamma_coefficient(const TraceFields& traces, const DtnConfig& cfg);

// I_Phi = integral Phi(h).
double lyapunov_value(const SimState& state, const ConvexFunctional& f);

// integral Phi'(h) G(h)h; non-negative for convex Phi and itself
// non-increasing when Phi' is convex.
double dissipation_value(const SimState& state, const ConvexFunctional& f,
                         const DtnConfig& cfg);

// Forward first differences and central second differences of a uniformly
// sampled series of (t, I) pairs; throws for fewer than 3 samples or a
// non-uniform stride.
struct LyapunovDifferences {
  std::vector<double> first;   // I_{i+1} - I_i
  std::vector<double> second;  // I_{i+1} - 2 I_i + I_{i-1}
};
LyapunovDifferences lyapunov_differences(
    const std::vector<std::pair<double, double>>& series);

// Both sides of d^2/dt^2 int h^2 = -d/dt int h G(h)h = int a |grad_{t,x} h|^2,
// evaluated exactly in space (shape derivative, no time differencing).
std::pair<double, double> l2_convexity_identity(const SimState& state,
                                                const DtnConfig& cfg);

// Residual of the elliptic form of the flow,
//   R = d2h/dt2 + lap h + B(h)*(|grad_{t,x} h|^2),
// and the equivalent pre-adjoint form
//   R = d2h/dt2 + lap h + G(h)(B^2+|V|^2) - div((B^2+|V|^2) grad h).
Field elliptic_residual(const SimState& state, const DtnConfig& cfg);
Field elliptic_residual_alt(const SimState& state, const DtnConfig& cfg);

// Pointwise convexity gap Phi'(f) G(h)f - G(h)(Phi(f)), non-negative for
// convex Phi in the continuum.
Field cordoba_gap(const Field& h, const Field& f, const ConvexFunctional& phi,
                  const DtnConfig& cfg);

// L(h)f = -V.grad f - (div V) f / 2 + sqrt(a) G(h)(sqrt(a) f).
// Hard error if a is not strictly positive on all nodes.
Field operator_l(const SimState& state, const Field& f, const DtnConfig& cfg);
Field operator_l(const TraceFields& traces, const Field& f, const DtnConfig& cfg);

// Entropy sub-solution residual for u = log(m a)/sqrt(a):
//   residual = d_t u + L(h)u - (gamma/2a) u          (expected >= 0),
// with d_t a = V.grad a - a G(h)a - gamma evaluated exactly in space.
// damping = -gamma/(2a) >= 0 and forcing_bound = -gamma/(a sqrt a) >= 0 are
// emitted for reporting.
struct EntropyReport {
  Field residual;
  Field damping;
  Field forcing_bound;
};
EntropyReport entropy_residual(const SimState& state, double m, const DtnConfig& cfg);

// Indices t_i with min_a(t_i) < min_a(t_0) - tol.
std::vector<std::size_t> min_a_violations(const std::vector<DiagnosticsRecord>& records,
                                          double tol = 1e-6);

// ---- record-filling hooks for run() ----

DiagnosticHook hook_lyapunov(std::vector<ConvexFunctional> suite, DtnConfig cfg);
DiagnosticHook hook_signs(DtnConfig cfg);     // min_a, max_gamma, cordoba_min_gap
DiagnosticHook hook_entropy(DtnConfig cfg);   // min residual over m in {1,10}
DiagnosticHook hook_elliptic(DtnConfig cfg);  // ||R||_L2 / ||lap h||_L2

}  // namespace heleshaw

#endif
