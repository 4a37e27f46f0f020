#ifndef HELESHAW_DYNAMICS_HPP
#define HELESHAW_DYNAMICS_HPP

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "heleshaw/dtn.hpp"
#include "heleshaw/record.hpp"

namespace heleshaw {

// Interface evolution dh/dt = -G(h)h.

struct SimState {
  double t = 0.0;
  Field h;
};

enum class Scheme { semi_implicit, rk4 };

struct StepperConfig {
  Scheme scheme = Scheme::semi_implicit;
  double dt = 1e-3;
  double t_end = 1.0;
  double cfl_safety = 0.5;  // rk4 step cap: cfl * dx / max(1, max|V|)
  bool adaptive = false;

  void validate() const;
};

// Thrown when the solution leaves the validated regime (max|h| > 50 or any
// non-finite value); carries the last valid state.
class blowup_error : public std::runtime_error {
 public:
  blowup_error(std::string what, SimState last)
      : std::runtime_error(std::move(what)), last_state(std::move(last)) {}
  SimState last_state;
};

// -G(h)h.
Field rhs(const SimState& state, const DtnConfig& cfg);

// One step of the selected scheme.  semi_implicit treats the linearization
// |D| implicitly:  h' = (I + dt|D|)^{-1} (h - dt (G(h)h - |D|h)).
// rk4 is the classical four-stage scheme with the CFL cap applied.
SimState step(const SimState& state, const StepperConfig& sc, const DtnConfig& cfg);

// d2h/dt2 = -dG(h)h.(dh/dt) - G(h)(dh/dt), evaluated exactly in space.
Field second_time_derivative(const SimState& state, const DtnConfig& cfg);

using DiagnosticHook = std::function<void(const SimState&, DiagnosticsRecord&)>;

struct RunResult {
  std::vector<DiagnosticsRecord> records;
  SimState final_state;
  bool truncated = false;  // aborted on blow-up; records hold the partial series
  std::string note;
};

// Advances h0 to t_end, filling one record (all hooks applied) at t = 0,
// every `stride` accepted steps, and at t_end.  stride = 0 records only the
// endpoints.  Blow-up aborts cleanly with truncated = true.
RunResult run(const Field& h0, const StepperConfig& sc, const DtnConfig& cfg,
              const std::vector<DiagnosticHook>& hooks, int stride = 1);

}  // namespace heleshaw

#endif
