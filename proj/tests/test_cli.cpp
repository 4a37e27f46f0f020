#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "heleshaw/experiment.hpp"

using namespace heleshaw;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::filesystem::path temp_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() / ("heleshaw_test_" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("minimal config takes the documented defaults") {
  auto cfg = parse_config_text("{}");
  CHECK(cfg.kind == ExperimentKind::evolution);
  CHECK(cfg.dimension == 1);
  CHECK(cfg.n == 256);
  CHECK(cfg.stepper.dt == 1e-3);
  CHECK(cfg.stepper.t_end == 1.0);
  CHECK(cfg.dtn.backend == DtnBackend::taylor);
  CHECK(cfg.dtn.taylor_order == 6);
  CHECK(cfg.dtn.truncation_depth == 15.0);
  CHECK(cfg.dtn.vertical_points == 64);
  CHECK(cfg.problems().empty());
}

TEST_CASE("full config round trip") {
  const char* text = R"({
    "dimension": 1, "n": 128,
    "initial": {"modes": [{"k": [2], "amplitude": 0.05, "phase": 0.25}],
                 "random": {"kmax": 5, "decay": 0.5, "amplitude": 0.01}},
    "seed": 7,
    "dtn": {"backend": "elliptic", "taylor_order": 8, "truncation_depth": 12.0,
             "vertical_points": 32},
    "stepper": {"scheme": "rk4", "dt": 0.002, "t_end": 0.5, "cfl_safety": 0.4,
                 "adaptive": true},
    "diagnostics": {"select": ["signs", "entropy"], "stride": 5},
    "output_dir": "somewhere"
  })";
  auto cfg = parse_config_text(text);
  CHECK(cfg.n == 128);
  CHECK(cfg.modes.size() == 1);
  CHECK(cfg.modes[0].k[0] == 2);
  CHECK(cfg.modes[0].amplitude == 0.05);
  REQUIRE(cfg.random_part.has_value());
  CHECK(cfg.random_part->kmax == 5);
  CHECK(cfg.seed == 7);
  CHECK(cfg.dtn.backend == DtnBackend::elliptic);
  CHECK(cfg.dtn.vertical_points == 32);
  CHECK(cfg.stepper.scheme == Scheme::rk4);
  CHECK(cfg.stepper.adaptive);
  CHECK(cfg.stride == 5);
  CHECK(cfg.output_dir == "somewhere");
}

TEST_CASE("amplitude guard and override") {
  const char* steep = R"({"initial": {"modes": [{"k": [1], "amplitude": 0.5}]}})";
  CHECK_THROWS_WITH_AS(parse_config_text(steep),
                       doctest::Contains("amplitude"), config_error);
  const char* forced = R"({"initial": {"modes": [{"k": [1], "amplitude": 0.5}]},
                            "override_amplitude": true})";
  CHECK_NOTHROW(parse_config_text(forced));
}

TEST_CASE("unknown keys are hard errors, all violations reported") {
  CHECK_THROWS_WITH_AS(parse_config_text(R"({"viscosity": 1.0})"),
                       doctest::Contains("viscosity"), config_error);
  try {
    parse_config_text(R"({"viscosity": 1.0, "n": 11,
                          "dtn": {"backend": "magic"}})");
    FAIL("expected config_error");
  } catch (const config_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("viscosity") != std::string::npos);
    CHECK(msg.find("n must be even") != std::string::npos);
    CHECK(msg.find("backend") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config_text(R"({"n": "many"})"), config_error);
  CHECK_THROWS_AS(parse_config_text("not json at all"), config_error);
  CHECK_THROWS_AS(parse_config_text(R"({"diagnostics": {"select": ["plots"]}})"),
                  config_error);
}

TEST_CASE("presets parse and carry their kinds") {
  for (const auto& name : preset_names()) {
    auto cfg = preset_config(name);
    CHECK(cfg.preset == name);
    CHECK(cfg.problems().empty());
  }
  CHECK(preset_config("elliptic").kind == ExperimentKind::elliptic_refinement);
  CHECK(preset_config("identities").kind == ExperimentKind::identities);
  CHECK_THROWS_AS(preset_config("nope"), config_error);
}

TEST_CASE("timeseries csv shape and determinism") {
  auto dir = temp_dir("csv");
  std::vector<DiagnosticsRecord> records(1);
  records[0].t = 0.0;
  records[0].functionals = {{"x2", 1.5}};
  records[0].dissipation = {{"x2", 0.25}};
  records[0].h_l2 = 1.0;
  const std::string path = (dir / "one.csv").string();
  write_timeseries_csv(records, path);
  const std::string text = slurp(path);
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);  // header + 1 row
  CHECK(text.rfind("t,I_x2,D_x2,min_a", 0) == 0);

  write_timeseries_csv(records, (dir / "two.csv").string());
  CHECK(slurp((dir / "two.csv").string()) == text);

  CHECK_THROWS_AS(write_timeseries_csv({}, (dir / "empty.csv").string()),
                  std::invalid_argument);
}

TEST_CASE("snapshot carries metadata header") {
  auto dir = temp_dir("snap");
  auto g = build_grid(1, 8);
  const std::string path = (dir / "snap.txt").string();
  write_snapshot(cosine_mode(g, {1, 0}, 0.1), "cafebabe01234567", path);
  const std::string text = slurp(path);
  CHECK(text.find("# heleshaw snapshot") == 0);
  CHECK(text.find("config=cafebabe01234567") != std::string::npos);
  CHECK(text.find("dim=1 n=8") != std::string::npos);
  CHECK(std::count(text.begin(), text.end(), '\n') == 4 + 8);
}

TEST_CASE("run_experiment: evolution writes deterministic outputs") {
  ExperimentConfig cfg;
  cfg.n = 32;
  cfg.stepper.t_end = 0.02;
  cfg.diagnostics = {"lyapunov", "signs"};
  auto dir_a = temp_dir("run_a");
  auto dir_b = temp_dir("run_b");
  cfg.output_dir = dir_a.string();
  auto res_a = run_experiment(cfg);
  cfg.output_dir = dir_b.string();
  auto res_b = run_experiment(cfg);
  CHECK(res_a.exit_code == 0);
  CHECK(res_b.exit_code == 0);
  CHECK(slurp((dir_a / "timeseries.csv").string()) ==
        slurp((dir_b / "timeseries.csv").string()));
  CHECK(slurp((dir_a / "snapshot_final.txt").string()) ==
        slurp((dir_b / "snapshot_final.txt").string()));
  CHECK(std::filesystem::exists(dir_a / "summary.txt"));
}

TEST_CASE("run_experiment: identities and convergence kinds on a small grid") {
  // n = 128 is the smallest grid whose dealias band supports the preset
  // field bandwidths at expansion order 8
  ExperimentConfig cfg = preset_config("identities");
  cfg.n = 128;
  cfg.output_dir = temp_dir("ident").string();
  auto res = run_experiment(cfg);
  CHECK(res.exit_code == 0);

  ExperimentConfig conv = preset_config("convergence");
  conv.n = 128;
  conv.output_dir = temp_dir("conv").string();
  auto res2 = run_experiment(conv);
  CHECK(res2.exit_code == 0);
  CHECK(slurp((std::filesystem::path(conv.output_dir) / "convergence.csv").string())
            .rfind("taylor_order,", 0) == 0);
}

TEST_CASE("run_experiment: elliptic refinement preset ladder decreases") {
  ExperimentConfig cfg = preset_config("elliptic");
  cfg.output_dir = temp_dir("refine").string();
  auto res = run_experiment(cfg);
  CHECK(res.exit_code == 0);
  const std::string csv =
      slurp((std::filesystem::path(cfg.output_dir) / "refinement.csv").string());
  CHECK(csv.rfind("n,taylor_order,elliptic_residual_rel", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
}

TEST_CASE("run_experiment flags solver failure with exit 2") {
  ExperimentConfig cfg;
  cfg.n = 16;
  cfg.dtn.backend = DtnBackend::elliptic;
  cfg.modes = {{{1, 0}, 60.0, 0.0}};  // far outside the validated regime
  cfg.override_amplitude = true;
  cfg.stepper.t_end = 0.01;
  cfg.diagnostics = {"norms"};
  cfg.output_dir = temp_dir("blowup").string();
  auto res = run_experiment(cfg);
  CHECK(res.exit_code == 2);
  CHECK(std::filesystem::exists(std::filesystem::path(cfg.output_dir) / "timeseries.csv"));
}

TEST_CASE("run_experiment rejects invalid configs") {
  ExperimentConfig cfg;
  cfg.n = 11;  // odd point counts are rejected
  cfg.output_dir = temp_dir("invalid").string();
  CHECK_THROWS_AS(run_experiment(cfg), config_error);
}

#ifdef CLI_BIN
TEST_CASE("command-line driver: exit codes and flag overrides") {
  auto dir = temp_dir("cli");
  auto run_cli = [&](const std::string& args) {
    const std::string cmd = std::string(CLI_BIN) + " " + args + " > " +
                            (dir / "stdout.txt").string() + " 2> " +
                            (dir / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
  };
  CHECK(run_cli("--list-presets") == 0);
  CHECK(slurp((dir / "stdout.txt").string()).find("lyapunov") != std::string::npos);

  const std::string bad = (dir / "bad.json").string();
  std::ofstream(bad) << R"({"viscosity": 1})";
  CHECK(run_cli("--config " + bad) == 3);
  CHECK(slurp((dir / "stderr.txt").string()).find("viscosity") != std::string::npos);

  const std::string small = (dir / "small.json").string();
  std::ofstream(small) << R"({"n": 32, "stepper": {"dt": 1e-3, "t_end": 0.01},
                              "diagnostics": {"select": ["lyapunov"]}})";
  CHECK(run_cli("--config " + small + " --out " + (dir / "out1").string()) == 0);
  CHECK(std::filesystem::exists(dir / "out1" / "timeseries.csv"));

  // flags override config-file values
  CHECK(run_cli("--config " + small + " --out " + (dir / "out2").string()) == 0);
  CHECK(slurp((dir / "out1" / "timeseries.csv").string()) ==
        slurp((dir / "out2" / "timeseries.csv").string()));
}
#endif
