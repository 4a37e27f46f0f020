#ifndef HELESHAW_CONFIG_HPP
#define HELESHAW_CONFIG_HPP

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "heleshaw/diagnostics.hpp"

namespace heleshaw {

// Raised for malformed or invalid experiment configurations; the message
// lists every violation found, one per line.
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ModeSpec {
  std::array<int, 2> k{1, 0};
  double amplitude = 0.0;
  double phase = 0.0;
};

struct RandomSpec {
  int kmax = 4;
  double decay = 0.6;
  double amplitude = 0.0;
};

enum class ExperimentKind { evolution, elliptic_refinement, identities, convergence };

// Full description of one batch run.  Parsed from strict JSON (unknown keys
// are errors); see README for the documented key set and defaults.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::evolution;
  int dimension = 1;
  int n = 256;
  std::vector<ModeSpec> modes{{{1, 0}, 0.1, 0.0}};
  std::optional<RandomSpec> random_part;
  unsigned seed = 1;
  DtnConfig dtn;
  StepperConfig stepper;
  std::vector<std::string> diagnostics{"lyapunov", "signs"};
  int stride = 1;
  std::string output_dir = "out";
  std::string preset;
  bool override_amplitude = false;

  // Collected constraint violations; empty means valid.
  std::vector<std::string> problems() const;

  double total_amplitude() const;
  Field initial_condition(const GridPtr& grid) const;

  // Canonical serialized form (sorted keys); basis of the config hash and
  // of determinism checks.
  std::string canonical_text() const;
  std::string config_hash() const;
};

// Strict parse + validation; throws config_error listing all problems.
ExperimentConfig parse_config_text(const std::string& json_text);
ExperimentConfig parse_config_file(const std::string& path);

std::vector<std::string> preset_names();
ExperimentConfig preset_config(const std::string& name);

}  // namespace heleshaw

#endif
