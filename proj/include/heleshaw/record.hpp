#ifndef HELESHAW_RECORD_HPP
#define HELESHAW_RECORD_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace heleshaw {

// One row of the per-step diagnostic series.  Scalar entries are optional:
// a diagnostic that was not selected stays absent rather than zero.
struct DiagnosticsRecord {
  double t = 0.0;
  std::vector<std::pair<std::string, double>> functionals;  // I_Phi by name
  std::vector<std::pair<std::string, double>> dissipation;  // per functional
  std::optional<double> min_a;
  std::optional<double> max_gamma;
  std::optional<double> elliptic_residual_l2;  // relative to ||lap h||
  std::optional<double> cordoba_min_gap;
  std::optional<double> entropy_min_residual;  // min over m in {1, 10}
  double h_l2 = 0.0;
  double h_linf = 0.0;
  double h_mean = 0.0;

  bool all_finite() const;
};

}  // namespace heleshaw

#endif
