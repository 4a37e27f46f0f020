#ifndef HELESHAW_DTN_HPP
#define HELESHAW_DTN_HPP

#include <vector>

#include "heleshaw/grid.hpp"

namespace heleshaw {

// Dirichlet-to-Neumann operator of the fluid domain {y < h(x)}:
//   G(h)psi = d_y phi - grad h . grad phi   at y = h(x),
// where phi is the decaying harmonic extension of psi.
//
// Two backends:
//  * elliptic: the defining boundary-value problem, flattened by
//    y = h(x) - s onto the slab s in [0, H], spectral collocation in x and
//    exact propagation in s (the coefficients do not depend on s).
//    Bottom closure: d_s phi = 0 at s = H.
//  * taylor: graded expansion G = sum_j G_j(h) about the flat surface with
//    G_0 = |D|; each G_j is assembled from |D|, grad, and multiplication by
//    powers of (h - mean h), dealiased.  Valid for max|h - mean h| <= 0.3.
enum class DtnBackend { elliptic, taylor };

struct DtnConfig {
  DtnBackend backend = DtnBackend::taylor;
  int taylor_order = 6;            // expansion order M, 1..12
  double truncation_depth = 15.0;  // slab depth H >= 2
  int vertical_points = 64;        // stored extension levels Nz >= 16

  void validate() const;  // throws std::invalid_argument listing all problems
};

// Harmonic extension in flattened coordinates (x, s), s = h(x) - y.
// levels[j] = j * H / (Nz - 1); values[j] and flux[j] = d_s phi are the
// collocation fields on each level.  B(h)psi corresponds to -flux[0].
struct HarmonicExtension {
  GridPtr grid;
  Field surface_h;
  Field surface_psi;
  std::vector<double> levels;
  std::vector<Field> values;
  std::vector<Field> flux;
  double trace_error = 0.0;         // relative L2 surface-trace mismatch
  double interface_residual = 0.0;  // max relative flux mismatch across slabs
};

HarmonicExtension harmonic_extension(const Field& h, const Field& psi,
                                     const DtnConfig& cfg);

Field dtn_apply(const Field& h, const Field& psi, const DtnConfig& cfg);

// B(h)psi = (G(h)psi + grad h . grad psi) / (1 + |grad h|^2); vertical trace
// of the velocity potential gradient.  Computed from dtn_apply.
Field trace_b(const Field& h, const Field& psi, const DtnConfig& cfg);

// V(h)psi = grad psi - (B(h)psi) grad h; horizontal trace.
std::vector<Field> trace_v(const Field& h, const Field& psi, const DtnConfig& cfg);

// L2 adjoint of B(h):
//   B(h)* chi = G(h)(chi / (1+|grad h|^2)) - div(chi grad h / (1+|grad h|^2)).
Field adjoint_b(const Field& h, const Field& chi, const DtnConfig& cfg);

// Shape derivative dG(h)psi . zeta = -G(h)(B zeta) - div(V zeta) with
// B = trace_b(h, psi), V = trace_v(h, psi).
Field shape_derivative(const Field& h, const Field& psi, const Field& zeta,
                       const DtnConfig& cfg);

// |grad h|^2 evaluated at nodes.
Field grad_squared(const Field& h);

namespace detail {
Field taylor_dtn(const Field& h, const Field& psi, int order);
Field elliptic_dtn(const Field& h, const Field& psi, const DtnConfig& cfg);
}  // namespace detail

}  // namespace heleshaw

#endif
