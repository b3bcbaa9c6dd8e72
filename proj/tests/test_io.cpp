#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "utmost/io.hpp"

using namespace utmost;
namespace fs = std::filesystem;

namespace {

std::string write_temp(const std::string& name, const std::string& body) {
  const fs::path p = fs::temp_directory_path() / name;
  std::ofstream out(p);
  out << body;
  return p.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kToaConfig = R"({
  "model": "toa", "m": 6, "n": 3,
  "criterion": "D", "rho": 2.0, "seed": 9,
  "init": "random", "noise": "identity"
})";

}  // namespace

TEST_CASE("load_run_config parses a minimal solver config") {
  const RunConfig cfg = load_run_config(write_temp("cfg_ok.json", kToaConfig));
  CHECK(cfg.spec.kind == ModelKind::Toa);
  CHECK(cfg.spec.m == 6);
  CHECK(cfg.spec.n == 3);
  CHECK(cfg.criterion == Criterion::D);
  CHECK(cfg.solver.rho == 2.0);
  CHECK(cfg.solver.seed == 9);
  CHECK(cfg.solver.init == SolverConfig::Init::RandomSeeded);
  CHECK((cfg.noise.r - Matrix::Identity(6, 6)).norm() == 0.0);
  CHECK_FALSE(cfg.simulate.has_value());
}

TEST_CASE("config rejection messages name the offending field") {
  CHECK_THROWS_WITH_AS(
      load_run_config(write_temp("cfg_nomodel.json", R"({"m": 6, "n": 3})")),
      doctest::Contains("model"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      load_run_config(write_temp(
          "cfg_badcrit.json",
          R"({"model":"toa","m":6,"n":3,"criterion":"Z","noise":"identity"})")),
      doctest::Contains("criterion"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      load_run_config(write_temp(
          "cfg_asym.json",
          R"({"model":"toa","m":3,"n":2,"criterion":"A",
              "noise":[[1.0,0.5,0.0],[0.0,1.0,0.0],[0.0,0.0,1.0]]})")),
      doctest::Contains("noise covariance not symmetric"),
      std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      load_run_config(write_temp(
          "cfg_npd.json",
          R"({"model":"toa","m":3,"n":2,"criterion":"A",
              "noise":[[1.0,2.0,0.0],[2.0,1.0,0.0],[0.0,0.0,1.0]]})")),
      doctest::Contains("not positive definite"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      load_run_config(write_temp(
          "cfg_noranges.json",
          R"({"model":"rss","m":4,"n":2,"criterion":"A","noise":"identity"})")),
      doctest::Contains("ranges"), std::invalid_argument);
}

TEST_CASE("result files round-trip the orientation rows") {
  const RunConfig cfg = load_run_config(write_temp("cfg_rt.json", kToaConfig));
  const PlacementResult res =
      solve(cfg.spec, cfg.noise, cfg.criterion, cfg.solver);
  const fs::path out = fs::temp_directory_path() / "result_rt.json";
  write_result(out.string(), cfg, res);
  const OrientationMatrix h = read_result_orientation(out.string());
  CHECK((h.h - res.h_opt.h).cwiseAbs().maxCoeff() <= 1e-12);
  for (int i = 0; i < 6; ++i) {
    CHECK(std::abs(h.h.row(i).norm() - 1.0) <= 1e-12);
  }
  const std::string body = slurp(out.string());
  CHECK(body.find("\"objective_unified\"") != std::string::npos);
  CHECK(body.find("\"objective_model_scaled\"") != std::string::npos);
  CHECK(body.find("\"wall_time_s\"") != std::string::npos);
  CHECK(body.find("\"angles\"") != std::string::npos);
}

TEST_CASE("trace CSV starts with the documented header") {
  std::vector<TraceRecord> trace{{0, 1.0, 0.5, 0.25}, {1, 0.9, 0.1, 0.05}};
  const fs::path out = fs::temp_directory_path() / "trace.csv";
  write_trace_csv(out.string(), trace);
  std::ifstream in(out.string());
  std::string header;
  std::getline(in, header);
  CHECK(header == "iter,objective,primal_residual,dual_residual");
  std::string row;
  int rows = 0;
  while (std::getline(in, row))
    if (!row.empty()) ++rows;
  CHECK(rows == 2);
}

TEST_CASE("simulation noise prefers a full m-dim header covariance") {
  RunConfig cfg = load_run_config(write_temp("cfg_sim.json", R"({
    "model": "toa", "m": 4, "n": 2, "criterion": "A",
    "noise": [[2,0,0,0],[0,2,0,0],[0,0,2,0],[0,0,0,2]],
    "simulate": {
      "target": [0.1, -0.3], "trials": 5, "noise_stddev": 0.5,
      "placements": [{"type": "uniform"}, {"type": "random", "seed": 3}]
    }
  })"));
  REQUIRE(cfg.simulate.has_value());
  CHECK((simulation_noise(cfg).r - 2.0 * Matrix::Identity(4, 4)).norm() ==
        0.0);
  cfg.noise = NoiseCovariance();  // unset -> fall back to noise_stddev^2 I
  CHECK((simulation_noise(cfg).r - 0.25 * Matrix::Identity(4, 4)).norm() ==
        0.0);
}

TEST_CASE("placements expand to m sensors at the requested radius") {
  const RunConfig cfg = load_run_config(write_temp("cfg_pl.json", R"({
    "model": "toa", "m": 4, "n": 2, "criterion": "A", "rho": 2.0,
    "noise": "identity",
    "simulate": {
      "target": [0.1, -0.3], "radius": 1.5, "trials": 2,
      "placements": [{"type": "optimal"}, {"type": "uniform"},
                     {"type": "random", "seed": 11},
                     {"type": "explicit", "name": "fixed",
                      "sensors": [[1,0],[0,1],[-1,0],[0,-1]]}]
    }
  })"));
  const auto placements = build_placements(cfg);
  REQUIRE(placements.size() == 4);
  CHECK(placements[3].name == "fixed");
  for (size_t p = 0; p < 3; ++p) {
    REQUIRE(placements[p].sensors.size() == 4);
    for (const Vector& s : placements[p].sensors) {
      CHECK(s.norm() == doctest::Approx(1.5).epsilon(1e-9));
    }
  }
}

TEST_CASE("a single no-noise trial localizes exactly") {
  const RunConfig cfg = load_run_config(write_temp("cfg_nn.json", R"({
    "model": "toa", "m": 4, "n": 2, "criterion": "A",
    "noise": "identity",
    "simulate": {
      "target": [0.1, -0.3], "trials": 1, "no_noise": true,
      "placements": [{"type": "uniform"}]
    }
  })"));
  SimScenario sc = build_scenario(cfg);
  const auto reports = run_monte_carlo(sc, build_placements(cfg));
  REQUIRE(reports.size() == 1);
  CHECK(reports[0].mse < 1e-10);
}

TEST_CASE("sanity sweep passes and the negative control fails") {
  std::ostringstream out;
  CHECK(run_sanity(out, 1e-3, 5e-3));
  const std::string table = out.str();
  CHECK(table.find("15/15") != std::string::npos);
  std::ostringstream bad;
  CHECK_FALSE(run_sanity(bad, 1e-3, 5e-3, 0.05));
}
