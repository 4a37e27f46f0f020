#include <cmath>
#include <sstream>
#include <stdexcept>

#include "heleshaw/dtn.hpp"

namespace heleshaw {

void DtnConfig::validate() const {
  std::ostringstream problems;
  if (taylor_order < 1 || taylor_order > 12)
    problems << "taylor_order must be in [1,12]; ";
  if (!(truncation_depth >= 2.0) || !std::isfinite(truncation_depth))
    problems << "truncation_depth must be >= 2; ";
  if (vertical_points < 16) problems << "vertical_points must be >= 16; ";
  const std::string msg = problems.str();
  if (!msg.empty()) throw std::invalid_argument("DtnConfig: " + msg);
}

Field grad_squared(const Field& h) {
  const auto grad = gradient(h);
  Field out = pointwise(grad[0], [](double g) { return g * g; });
  for (std::size_t a = 1; a < grad.size(); ++a)
    out = out + pointwise(grad[a], [](double g) { return g * g; });
  return out;
}

Field dtn_apply(const Field& h, const Field& psi, const DtnConfig& cfg) {
  cfg.validate();
  ensure_finite(h, "dtn_apply");
  ensure_finite(psi, "dtn_apply");
  ensure_same_grid(h, psi, "dtn_apply");
  return cfg.backend == DtnBackend::taylor
             ? detail::taylor_dtn(h, psi, cfg.taylor_order)
             : detail::elliptic_dtn(h, psi, cfg);
}

Field trace_b(const Field& h, const Field& psi, const DtnConfig& cfg) {
  const Field g = dtn_apply(h, psi, cfg);
  const auto grad_h = gradient(h);
  const auto grad_psi = gradient(psi);
  Field advect = pointwise(grad_h[0], grad_psi[0], [](double a, double b) { return a * b; });
  for (std::size_t a = 1; a < grad_h.size(); ++a)
    advect = advect + pointwise(grad_h[a], grad_psi[a],
                                [](double x, double y) { return x * y; });
  const Field denom = grad_squared(h);
  return pointwise(g + advect, denom, [](double num, double g2) { return num / (1.0 + g2); });
}

std::vector<Field> trace_v(const Field& h, const Field& psi, const DtnConfig& cfg) {
  const Field b = trace_b(h, psi, cfg);
  const auto grad_h = gradient(h);
  const auto grad_psi = gradient(psi);
  std::vector<Field> v;
  v.reserve(grad_h.size());
  for (std::size_t a = 0; a < grad_h.size(); ++a)
    v.push_back(grad_psi[a] - pointwise(b, grad_h[a],
                                        [](double x, double y) { return x * y; }));
  return v;
}

Field adjoint_b(const Field& h, const Field& chi, const DtnConfig& cfg) {
  const auto grad_h = gradient(h);
  const Field g2 = grad_squared(h);
  const Field w = pointwise(chi, g2, [](double c, double g) { return c / (1.0 + g); });
  std::vector<Field> flux;
  flux.reserve(grad_h.size());
  for (std::size_t a = 0; a < grad_h.size(); ++a)
    flux.push_back(pointwise(w, grad_h[a], [](double x, double y) { return x * y; }));
  return dtn_apply(h, w, cfg) - divergence(flux);
}

Field shape_derivative(const Field& h, const Field& psi, const Field& zeta,
                       const DtnConfig& cfg) {
  ensure_finite(zeta, "shape_derivative");
  ensure_same_grid(h, zeta, "shape_derivative");
  const Field b = trace_b(h, psi, cfg);
  const auto v = trace_v(h, psi, cfg);
  std::vector<Field> flux;
  flux.reserve(v.size());
  for (const auto& va : v)
    flux.push_back(pointwise(va, zeta, [](double x, double y) { return x * y; }));
  const Field bz = pointwise(b, zeta, [](double x, double y) { return x * y; });
  return -dtn_apply(h, bz, cfg) - divergence(flux);
}

}  // namespace heleshaw
