#include "heleshaw/config.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace heleshaw {

namespace {

using nlohmann::json;

const std::set<std::string> kDiagnosticNames = {"norms", "lyapunov", "signs",
                                                "entropy", "elliptic"};

void expect_keys(const json& obj, const std::set<std::string>& allowed,
                 const std::string& scope, std::vector<std::string>& problems) {
  for (const auto& item : obj.items())
    if (!allowed.count(item.key()))
      problems.push_back("unknown key \"" + item.key() + "\" in " + scope);
}

template <typename T>
void read(const json& obj, const char* key, T& out, std::vector<std::string>& problems,
          const std::string& scope) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    problems.push_back(std::string("key \"") + key + "\" in " + scope +
                       " has the wrong type");
  }
}

ExperimentKind parse_kind(const std::string& text, std::vector<std::string>& problems) {
  if (text == "evolution") return ExperimentKind::evolution;
  if (text == "elliptic_refinement") return ExperimentKind::elliptic_refinement;
  if (text == "identities") return ExperimentKind::identities;
  if (text == "convergence") return ExperimentKind::convergence;
  problems.push_back("unknown kind \"" + text + "\"");
  return ExperimentKind::evolution;
}

const char* kind_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::evolution: return "evolution";
    case ExperimentKind::elliptic_refinement: return "elliptic_refinement";
    case ExperimentKind::identities: return "identities";
    case ExperimentKind::convergence: return "convergence";
  }
  return "evolution";
}

ExperimentConfig from_json(const json& root) {
  std::vector<std::string> problems;
  if (!root.is_object()) throw config_error("config root must be a JSON object");

  ExperimentConfig cfg;
  expect_keys(root,
              {"kind", "dimension", "n", "initial", "dtn", "stepper", "diagnostics",
               "output_dir", "preset", "override_amplitude", "seed"},
              "config", problems);

  std::string kind_text = "evolution";
  read(root, "kind", kind_text, problems, "config");
  cfg.kind = parse_kind(kind_text, problems);
  read(root, "dimension", cfg.dimension, problems, "config");
  read(root, "n", cfg.n, problems, "config");
  read(root, "output_dir", cfg.output_dir, problems, "config");
  read(root, "preset", cfg.preset, problems, "config");
  read(root, "override_amplitude", cfg.override_amplitude, problems, "config");
  read(root, "seed", cfg.seed, problems, "config");

  if (root.contains("initial")) {
    const json& init = root.at("initial");
    expect_keys(init, {"modes", "random"}, "initial", problems);
    if (init.contains("modes")) {
      cfg.modes.clear();
      for (const auto& entry : init.at("modes")) {
        expect_keys(entry, {"k", "amplitude", "phase"}, "initial.modes[]", problems);
        ModeSpec mode;
        if (entry.contains("k")) {
          const auto& kv = entry.at("k");
          if (!kv.is_array() || kv.empty() || kv.size() > 2) {
            problems.push_back("initial.modes[].k must be an array of 1 or 2 integers");
          } else {
            mode.k[0] = kv[0].get<int>();
            mode.k[1] = kv.size() > 1 ? kv[1].get<int>() : 0;
          }
        }
        read(entry, "amplitude", mode.amplitude, problems, "initial.modes[]");
        read(entry, "phase", mode.phase, problems, "initial.modes[]");
        cfg.modes.push_back(mode);
      }
    }
    if (init.contains("random")) {
      const json& rnd = init.at("random");
      expect_keys(rnd, {"kmax", "decay", "amplitude"}, "initial.random", problems);
      RandomSpec spec;
      read(rnd, "kmax", spec.kmax, problems, "initial.random");
      read(rnd, "decay", spec.decay, problems, "initial.random");
      read(rnd, "amplitude", spec.amplitude, problems, "initial.random");
      cfg.random_part = spec;
    }
  }

  if (root.contains("dtn")) {
    const json& d = root.at("dtn");
    expect_keys(d, {"backend", "taylor_order", "truncation_depth", "vertical_points"},
                "dtn", problems);
    std::string backend = "taylor";
    read(d, "backend", backend, problems, "dtn");
    if (backend == "taylor")
      cfg.dtn.backend = DtnBackend::taylor;
    else if (backend == "elliptic")
      cfg.dtn.backend = DtnBackend::elliptic;
    else
      problems.push_back("dtn.backend must be \"taylor\" or \"elliptic\"");
    read(d, "taylor_order", cfg.dtn.taylor_order, problems, "dtn");
    read(d, "truncation_depth", cfg.dtn.truncation_depth, problems, "dtn");
    read(d, "vertical_points", cfg.dtn.vertical_points, problems, "dtn");
  }

  if (root.contains("stepper")) {
    const json& s = root.at("stepper");
    expect_keys(s, {"scheme", "dt", "t_end", "cfl_safety", "adaptive"}, "stepper",
                problems);
    std::string scheme = "semi_implicit";
    read(s, "scheme", scheme, problems, "stepper");
    if (scheme == "semi_implicit")
      cfg.stepper.scheme = Scheme::semi_implicit;
    else if (scheme == "rk4")
      cfg.stepper.scheme = Scheme::rk4;
    else
      problems.push_back("stepper.scheme must be \"semi_implicit\" or \"rk4\"");
    read(s, "dt", cfg.stepper.dt, problems, "stepper");
    read(s, "t_end", cfg.stepper.t_end, problems, "stepper");
    read(s, "cfl_safety", cfg.stepper.cfl_safety, problems, "stepper");
    read(s, "adaptive", cfg.stepper.adaptive, problems, "stepper");
  }

  if (root.contains("diagnostics")) {
    const json& d = root.at("diagnostics");
    expect_keys(d, {"select", "stride"}, "diagnostics", problems);
    if (d.contains("select")) {
      cfg.diagnostics.clear();
      for (const auto& name : d.at("select")) cfg.diagnostics.push_back(name);
    }
    read(d, "stride", cfg.stride, problems, "diagnostics");
  }

  for (const auto& extra : cfg.problems()) problems.push_back(extra);

  if (!problems.empty()) {
    std::ostringstream msg;
    msg << "invalid config (" << problems.size() << " problem(s)):";
    for (const auto& p : problems) msg << "\n  - " << p;
    throw config_error(msg.str());
  }
  return cfg;
}

}  // namespace

std::vector<std::string> ExperimentConfig::problems() const {
  std::vector<std::string> out;
  if (dimension != 1 && dimension != 2) out.push_back("dimension must be 1 or 2");
  if (n % 2 != 0 || n < 8 || n > 4096)
    out.push_back("n must be even and in [8,4096]");
  if (total_amplitude() > 0.3 && !override_amplitude)
    out.push_back(
        "total initial amplitude exceeds 0.3; set override_amplitude to proceed");
  for (const auto& mode : modes) {
    if (dimension == 1 && mode.k[1] != 0)
      out.push_back("initial mode has a second wavenumber component in dimension 1");
    if (std::max(std::abs(mode.k[0]), std::abs(mode.k[1])) > n / 2 - 1)
      out.push_back("initial mode wavenumber exceeds the grid Nyquist range");
  }
  if (random_part) {
    if (random_part->kmax < 1 || random_part->kmax > n / 2 - 1)
      out.push_back("initial.random.kmax out of range");
    if (random_part->amplitude < 0) out.push_back("initial.random.amplitude negative");
    if (!(random_part->decay > 0)) out.push_back("initial.random.decay must be positive");
  }
  for (const auto& name : diagnostics)
    if (!kDiagnosticNames.count(name))
      out.push_back("unknown diagnostic \"" + name + "\"");
  if (stride < 0) out.push_back("diagnostics.stride must be >= 0");
  try {
    dtn.validate();
  } catch (const std::exception& e) {
    out.push_back(e.what());
  }
  try {
    stepper.validate();
  } catch (const std::exception& e) {
    out.push_back(e.what());
  }
  if (output_dir.empty()) out.push_back("output_dir must not be empty");
  return out;
}

double ExperimentConfig::total_amplitude() const {
  double total = 0.0;
  for (const auto& mode : modes) total += std::abs(mode.amplitude);
  if (random_part) total += std::abs(random_part->amplitude);
  return total;
}

Field ExperimentConfig::initial_condition(const GridPtr& grid) const {
  Field h(grid, 0.0);
  for (const auto& mode : modes)
    h = h + cosine_mode(grid, mode.k, mode.amplitude, mode.phase);
  if (random_part && random_part->amplitude > 0)
    h = h + random_band_limited(grid, random_part->kmax, random_part->decay, seed,
                                random_part->amplitude);
  return dealias(h);
}

std::string ExperimentConfig::canonical_text() const {
  json root;
  root["kind"] = kind_name(kind);
  root["dimension"] = dimension;
  root["n"] = n;
  json modes_json = json::array();
  for (const auto& mode : modes)
    modes_json.push_back({{"k", {mode.k[0], mode.k[1]}},
                          {"amplitude", mode.amplitude},
                          {"phase", mode.phase}});
  root["initial"]["modes"] = modes_json;
  if (random_part)
    root["initial"]["random"] = {{"kmax", random_part->kmax},
                                 {"decay", random_part->decay},
                                 {"amplitude", random_part->amplitude}};
  root["seed"] = seed;
  root["dtn"] = {{"backend", dtn.backend == DtnBackend::taylor ? "taylor" : "elliptic"},
                 {"taylor_order", dtn.taylor_order},
                 {"truncation_depth", dtn.truncation_depth},
                 {"vertical_points", dtn.vertical_points}};
  root["stepper"] = {
      {"scheme", stepper.scheme == Scheme::semi_implicit ? "semi_implicit" : "rk4"},
      {"dt", stepper.dt},
      {"t_end", stepper.t_end},
      {"cfl_safety", stepper.cfl_safety},
      {"adaptive", stepper.adaptive}};
  root["diagnostics"] = {{"select", diagnostics}, {"stride", stride}};
  // output_dir is deliberately excluded: the hash identifies the experiment,
  // not its destination
  root["preset"] = preset;
  root["override_amplitude"] = override_amplitude;
  return root.dump();
}

std::string ExperimentConfig::config_hash() const {
  const std::string text = canonical_text();
  std::uint64_t hash = 1469598103934665603ull;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

ExperimentConfig parse_config_text(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw config_error(std::string("config is not valid JSON: ") + e.what());
  }
  return from_json(root);
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file: " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str());
}

std::vector<std::string> preset_names() {
  return {"lyapunov", "elliptic", "entropy", "convergence", "identities"};
}

ExperimentConfig preset_config(const std::string& name) {
  ExperimentConfig cfg;
  cfg.preset = name;
  if (name == "lyapunov") {
    cfg.modes = {{{1, 0}, 0.1, 0.0}};
    cfg.diagnostics = {"lyapunov"};
    cfg.stride = 1;
  } else if (name == "elliptic") {
    cfg.kind = ExperimentKind::elliptic_refinement;
    cfg.modes = {{{1, 0}, 0.08, 0.0}, {{2, 0}, 0.03, 0.5}};
    cfg.diagnostics = {"elliptic"};
  } else if (name == "entropy") {
    cfg.modes = {{{1, 0}, 0.05, 0.0}};
    cfg.diagnostics = {"signs", "entropy"};
    cfg.stride = 10;
  } else if (name == "convergence") {
    cfg.kind = ExperimentKind::convergence;
    cfg.n = 128;
    cfg.modes = {{{1, 0}, 0.07, 0.0}, {{3, 0}, 0.05, 0.3}};
  } else if (name == "identities") {
    cfg.kind = ExperimentKind::identities;
    cfg.modes = {{{1, 0}, 0.08, 0.0}, {{3, 0}, 0.02, 1.1}};
  } else {
    throw config_error("unknown preset \"" + name + "\"");
  }
  return cfg;
}

}  // namespace heleshaw
