#include "utmost/io.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace utmost {

namespace {

using nlohmann::json;

std::string fp(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

ModelKind kind_from_string(const std::string& s) {
  if (s == "toa") return ModelKind::Toa;
  if (s == "tdoa") return ModelKind::Tdoa;
  if (s == "rss") return ModelKind::Rss;
  if (s == "aoa") return ModelKind::Aoa;
  throw std::invalid_argument("model: must be one of toa, tdoa, rss, aoa");
}

const char* kind_to_string(ModelKind k) {
  switch (k) {
    case ModelKind::Toa: return "toa";
    case ModelKind::Tdoa: return "tdoa";
    case ModelKind::Rss: return "rss";
    case ModelKind::Aoa: return "aoa";
  }
  return "?";
}

Criterion criterion_from_string(const std::string& s) {
  if (s == "A") return Criterion::A;
  if (s == "D") return Criterion::D;
  if (s == "E") return Criterion::E;
  throw std::invalid_argument("criterion: must be one of A, D, E");
}

const char* criterion_to_string(Criterion c) {
  switch (c) {
    case Criterion::A: return "A";
    case Criterion::D: return "D";
    case Criterion::E: return "E";
  }
  return "?";
}

Vector parse_vector(const json& j, const std::string& field) {
  if (!j.is_array()) {
    throw std::invalid_argument(field + ": expected an array of numbers");
  }
  Vector v(j.size());
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) {
      throw std::invalid_argument(field + ": expected an array of numbers");
    }
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

Matrix parse_matrix(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) {
    throw std::invalid_argument(field + ": expected an array of rows");
  }
  const size_t cols = j[0].size();
  Matrix m(j.size(), cols);
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != cols) {
      throw std::invalid_argument(field + ": ragged matrix rows");
    }
    for (size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
          j[i][c].get<double>();
    }
  }
  return m;
}

NoiseCovariance parse_noise(const json& j, int dim) {
  Matrix r;
  if (j.is_string() && j.get<std::string>() == "identity") {
    r = Matrix::Identity(dim, dim);
  } else if (j.is_object() && j.contains("scaled")) {
    const double u = j.at("scaled").get<double>();
    r = u * u * Matrix::Identity(dim, dim);
  } else if (j.is_array() && !j.empty() && j[0].is_number()) {
    r = Matrix(parse_vector(j, "noise").asDiagonal());
  } else if (j.is_array()) {
    r = parse_matrix(j, "noise");
  } else {
    throw std::invalid_argument(
        "noise: expected \"identity\", {\"scaled\": v}, a diagonal, or a "
        "matrix");
  }
  if (r.rows() != r.cols()) {
    throw std::invalid_argument("noise: covariance must be square");
  }
  const double scale = std::max(1.0, r.cwiseAbs().maxCoeff());
  if ((r - r.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw std::invalid_argument("noise: noise covariance not symmetric");
  }
  try {
    return NoiseCovariance(std::move(r));
  } catch (const std::invalid_argument&) {
    throw std::invalid_argument("noise: noise covariance not positive definite");
  }
}

GridSpec parse_grid(const json& j, int n) {
  GridSpec grid;
  grid.lower = Vector::Constant(n, -2.0);
  grid.upper = Vector::Constant(n, 2.0);
  if (j.contains("lower")) grid.lower = parse_vector(j["lower"], "simulate.grid.lower");
  if (j.contains("upper")) grid.upper = parse_vector(j["upper"], "simulate.grid.upper");
  if (j.contains("resolution")) grid.resolution = j["resolution"].get<int>();
  if (j.contains("gn_iters")) grid.gn_iters = j["gn_iters"].get<int>();
  if (j.contains("gn_tol")) grid.gn_tol = j["gn_tol"].get<double>();
  grid.validate(n);
  return grid;
}

SimulateConfig parse_simulate(const json& j, const ModelSpec& spec) {
  SimulateConfig sim;
  if (!j.contains("target")) {
    throw std::invalid_argument("simulate.target: required");
  }
  sim.target = parse_vector(j["target"], "simulate.target");
  if (sim.target.size() != spec.n) {
    throw std::invalid_argument("simulate.target: dimension mismatch");
  }
  if (j.contains("radius")) sim.radius = j["radius"].get<double>();
  if (!(sim.radius > 0.0)) {
    throw std::invalid_argument("simulate.radius: must be > 0");
  }
  if (j.contains("trials")) sim.trials = j["trials"].get<int>();
  if (sim.trials < 1) {
    throw std::invalid_argument("simulate.trials: must be >= 1");
  }
  if (j.contains("seed")) sim.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("noise_stddev")) sim.noise_stddev = j["noise_stddev"].get<double>();
  if (!(sim.noise_stddev > 0.0)) {
    throw std::invalid_argument("simulate.noise_stddev: must be > 0");
  }
  if (j.contains("no_noise")) sim.no_noise = j["no_noise"].get<bool>();
  sim.grid = parse_grid(j.contains("grid") ? j["grid"] : json::object(), spec.n);
  if (!j.contains("placements") || !j["placements"].is_array() ||
      j["placements"].empty()) {
    throw std::invalid_argument("simulate.placements: at least one required");
  }
  for (const json& p : j["placements"]) {
    PlacementSpec ps;
    const std::string type = p.value("type", std::string("uniform"));
    ps.name = p.value("name", type);
    if (type == "optimal") {
      ps.type = PlacementSpec::Type::Optimal;
      if (p.contains("design_target")) {
        ps.design_target =
            parse_vector(p["design_target"], "simulate.placements.design_target");
      }
    } else if (type == "uniform") {
      ps.type = PlacementSpec::Type::Uniform;
    } else if (type == "random") {
      ps.type = PlacementSpec::Type::Random;
      ps.seed = p.value("seed", std::uint64_t{0});
    } else if (type == "explicit") {
      ps.type = PlacementSpec::Type::Explicit;
      if (!p.contains("sensors")) {
        throw std::invalid_argument("simulate.placements.sensors: required");
      }
      const Matrix s = parse_matrix(p["sensors"], "simulate.placements.sensors");
      if (s.rows() != spec.m || s.cols() != spec.n) {
        throw std::invalid_argument(
            "simulate.placements.sensors: expected m rows of dimension n");
      }
      for (Eigen::Index i = 0; i < s.rows(); ++i) {
        ps.sensors.push_back(s.row(i).transpose());
      }
    } else {
      throw std::invalid_argument(
          "simulate.placements.type: must be optimal, uniform, random, or "
          "explicit");
    }
    sim.placements.push_back(std::move(ps));
  }
  return sim;
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
  }

  RunConfig cfg;
  if (!j.contains("model")) throw std::invalid_argument("model: required");
  cfg.spec.kind = kind_from_string(j["model"].get<std::string>());
  if (!j.contains("m")) throw std::invalid_argument("m: required");
  cfg.spec.m = j["m"].get<int>();
  if (!j.contains("n")) throw std::invalid_argument("n: required");
  cfg.spec.n = j["n"].get<int>();
  if (j.contains("reference_index")) {
    cfg.spec.reference_index = j["reference_index"].get<int>();
  }
  if (j.contains("ranges")) cfg.spec.ranges = parse_vector(j["ranges"], "ranges");
  if (j.contains("path_loss")) cfg.spec.path_loss = j["path_loss"].get<double>();
  if (j.contains("row_norms")) {
    cfg.spec.row_norms = parse_vector(j["row_norms"], "row_norms");
  }
  cfg.spec.validate();

  if (!j.contains("criterion")) throw std::invalid_argument("criterion: required");
  cfg.criterion = criterion_from_string(j["criterion"].get<std::string>());

  if (j.contains("rho")) cfg.solver.rho = j["rho"].get<double>();
  if (j.contains("max_outer")) cfg.solver.max_outer = j["max_outer"].get<int>();
  if (j.contains("tol_primal")) cfg.solver.tol_primal = j["tol_primal"].get<double>();
  if (j.contains("tol_dual")) cfg.solver.tol_dual = j["tol_dual"].get<double>();
  if (j.contains("mm_x_max")) cfg.solver.mm_x_max = j["mm_x_max"].get<int>();
  if (j.contains("mm_x_tol")) cfg.solver.mm_x_tol = j["mm_x_tol"].get<double>();
  if (j.contains("mm_h_max")) cfg.solver.mm_h_max = j["mm_h_max"].get<int>();
  if (j.contains("mm_h_tol")) cfg.solver.mm_h_tol = j["mm_h_tol"].get<double>();
  if (j.contains("seed")) cfg.solver.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("init")) {
    const std::string init = j["init"].get<std::string>();
    if (init == "uniform") {
      cfg.solver.init = SolverConfig::Init::Uniform;
    } else if (init == "random") {
      cfg.solver.init = SolverConfig::Init::RandomSeeded;
    } else {
      throw std::invalid_argument("init: must be uniform or random");
    }
  }
  cfg.solver.validate();

  const int noise_dim = [&] {
    if (cfg.spec.kind != ModelKind::Tdoa) return cfg.spec.m;
    // Dimension m means a per-sensor range-noise covariance; m-1 means an
    // already-differenced one. Inline matrices carry their own size.
    if (j.contains("noise") && j["noise"].is_array() &&
        static_cast<int>(j["noise"].size()) == cfg.spec.m - 1) {
      return cfg.spec.m - 1;
    }
    return cfg.spec.m;
  }();
  cfg.noise = parse_noise(j.contains("noise") ? j["noise"] : json("identity"),
                          noise_dim);

  if (j.contains("simulate")) {
    cfg.simulate = parse_simulate(j["simulate"], cfg.spec);
  }
  return cfg;
}

void write_result(const std::string& path, const RunConfig& config,
                  const PlacementResult& result) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  const Vector norms = config.spec.effective_row_norms();
  const auto angles = orientation_to_angles(result.h_opt);

  out << "{\n";
  out << "  \"model\": \"" << kind_to_string(config.spec.kind) << "\",\n";
  out << "  \"m\": " << config.spec.m << ",\n";
  out << "  \"n\": " << config.spec.n << ",\n";
  out << "  \"criterion\": \"" << criterion_to_string(config.criterion)
      << "\",\n";
  out << "  \"rho\": " << fp(config.solver.rho) << ",\n";
  out << "  \"seed\": " << config.solver.seed << ",\n";
  out << "  \"objective_unified\": " << fp(result.objective) << ",\n";
  out << "  \"objective_model_scaled\": "
      << fp(model_scaled_objective(result.objective, config.criterion,
                                   config.spec))
      << ",\n";
  out << "  \"iterations\": " << result.trace.size() << ",\n";
  out << "  \"termination\": \""
      << (result.termination == Termination::Converged ? "converged"
                                                       : "max_iterations")
      << "\",\n";
  out << "  \"degeneracy_events\": " << result.degeneracy_events << ",\n";
  out << "  \"degenerate_fim\": "
      << (result.degenerate_fim ? "true" : "false") << ",\n";
  out << "  \"wall_time_s\": " << fp(result.wall_time) << ",\n";
  out << "  \"row_norms\": [";
  for (Eigen::Index i = 0; i < norms.size(); ++i) {
    out << (i ? ", " : "") << fp(norms(i));
  }
  out << "],\n";
  out << "  \"h\": [\n";
  const Matrix& h = result.h_opt.h;
  for (Eigen::Index i = 0; i < h.rows(); ++i) {
    out << "    [";
    for (Eigen::Index c = 0; c < h.cols(); ++c) {
      out << (c ? ", " : "") << fp(h(i, c));
    }
    out << (i + 1 < h.rows() ? "],\n" : "]\n");
  }
  out << "  ],\n";
  out << "  \"angles\": [\n";
  for (size_t i = 0; i < angles.size(); ++i) {
    out << "    [" << fp(angles[i].azimuth);
    if (angles[i].elevation) out << ", " << fp(*angles[i].elevation);
    out << (i + 1 < angles.size() ? "],\n" : "]\n");
  }
  out << "  ]\n";
  out << "}\n";
}

OrientationMatrix read_result_orientation(const std::string& path,
                                          const Vector& row_norms) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("result: cannot open " + path);
  json j;
  in >> j;
  const Matrix h = parse_matrix(j.at("h"), "h");
  Vector norms = row_norms;
  if (!norms.size() && j.contains("row_norms")) {
    norms = parse_vector(j["row_norms"], "row_norms");
  }
  return OrientationMatrix(h, norms);
}

void write_trace_csv(const std::string& path,
                     const std::vector<TraceRecord>& trace) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "iter,objective,primal_residual,dual_residual\n";
  for (const TraceRecord& rec : trace) {
    out << rec.iter << ',' << fp(rec.objective) << ','
        << fp(rec.primal_residual) << ',' << fp(rec.dual_residual) << '\n';
  }
}

void write_sim_report(const std::string& path, const RunConfig& config,
                      const std::vector<SimReport>& reports) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  const SimulateConfig& sim = *config.simulate;
  out << "{\n";
  out << "  \"model\": \"" << kind_to_string(config.spec.kind) << "\",\n";
  out << "  \"criterion\": \"" << criterion_to_string(config.criterion)
      << "\",\n";
  out << "  \"trials\": " << sim.trials << ",\n";
  out << "  \"target\": [";
  for (Eigen::Index i = 0; i < sim.target.size(); ++i) {
    out << (i ? ", " : "") << fp(sim.target(i));
  }
  out << "],\n";
  out << "  \"placements\": [\n";
  for (size_t i = 0; i < reports.size(); ++i) {
    const SimReport& r = reports[i];
    out << "    {\"name\": \"" << r.placement << "\", \"mse\": " << fp(r.mse)
        << ", \"bias\": " << fp(r.bias) << ", \"crlb_trace\": "
        << fp(r.crlb_trace) << ", \"excluded\": " << r.excluded << "}"
        << (i + 1 < reports.size() ? ",\n" : "\n");
  }
  out << "  ]\n";
  out << "}\n";
}

void write_per_trial_csv(const std::string& path,
                         const std::vector<SimReport>& reports) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "placement,trial,estimate\n";
  for (const SimReport& r : reports) {
    for (size_t t = 0; t < r.estimates.size(); ++t) {
      out << r.placement << ',' << t;
      for (Eigen::Index c = 0; c < r.estimates[t].size(); ++c) {
        out << ',' << fp(r.estimates[t](c));
      }
      out << '\n';
    }
  }
}

NoiseCovariance simulation_noise(const RunConfig& config) {
  if (config.noise.dim() == config.spec.m) return config.noise;
  const double s = config.simulate ? config.simulate->noise_stddev : 0.3;
  return NoiseCovariance(
      Matrix(s * s * Matrix::Identity(config.spec.m, config.spec.m)));
}

std::vector<NamedPlacement> build_placements(const RunConfig& config) {
  const SimulateConfig& sim = *config.simulate;
  const int m = config.spec.m;
  const int n = config.spec.n;

  const auto sensors_from_rows = [&](const Matrix& rows) {
    // Rows are sensor-to-target directions for a design target at the
    // origin; sensors sit on the radius-R sphere opposite to them.
    std::vector<Vector> sensors;
    sensors.reserve(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) {
      sensors.push_back(-sim.radius * rows.row(i).transpose() /
                        rows.row(i).norm());
    }
    return sensors;
  };

  std::vector<NamedPlacement> out;
  for (const PlacementSpec& ps : sim.placements) {
    switch (ps.type) {
      case PlacementSpec::Type::Uniform:
        out.push_back({ps.name, sensors_from_rows(uniform_initial_orientation(m, n))});
        break;
      case PlacementSpec::Type::Random:
        out.push_back(
            {ps.name, sensors_from_rows(random_initial_orientation(m, n, ps.seed))});
        break;
      case PlacementSpec::Type::Explicit:
        out.push_back({ps.name, ps.sensors});
        break;
      case PlacementSpec::Type::Optimal: {
        ModelSpec design = config.spec;
        if (design.kind == ModelKind::Rss || design.kind == ModelKind::Aoa) {
          // Design ranges from the (possibly coarse) design target to the
          // uniform baseline geometry.
          const Vector dt = ps.design_target.size()
                                ? ps.design_target
                                : Vector(Vector::Zero(n));
          const Matrix base = uniform_initial_orientation(m, n);
          Vector ranges(m);
          for (int i = 0; i < m; ++i) {
            ranges(i) = (dt + sim.radius * base.row(i).transpose()).norm();
          }
          design.ranges = ranges;
        }
        const PlacementResult res =
            solve(design, simulation_noise(config), config.criterion,
                  config.solver);
        out.push_back({ps.name, sensors_from_rows(res.h_opt.h)});
        break;
      }
    }
  }
  return out;
}

SimScenario build_scenario(const RunConfig& config) {
  if (!config.simulate) {
    throw std::invalid_argument("simulate: block required for this command");
  }
  const SimulateConfig& sim = *config.simulate;
  SimScenario sc;
  sc.target = sim.target;
  sc.model = config.spec;
  sc.noise = simulation_noise(config);
  sc.trials = sim.trials;
  sc.seed = sim.seed;
  sc.grid = sim.grid;
  sc.no_noise = sim.no_noise;
  return sc;
}

bool run_sanity(std::ostream& out, double tol_a, double tol_e,
                double inject_offset) {
  const int ms[] = {5, 10, 15, 20, 25};
  const Criterion crits[] = {Criterion::A, Criterion::D, Criterion::E};
  bool all_pass = true;
  out << "m  crit  theoretical    numerical      structure   status\n";
  for (int m : ms) {
    for (Criterion c : crits) {
      ModelSpec spec;
      spec.kind = ModelKind::Toa;
      spec.m = m;
      spec.n = 3;
      NoiseCovariance r{Matrix(Matrix::Identity(m, m))};
      SolverConfig cfg;
      // The pure +/- axis pattern is a stationary saddle when R is a
      // multiple of the identity, so these cells start from a fixed
      // random rotation instead.
      cfg.init = SolverConfig::Init::RandomSeeded;
      cfg.seed = 3;
      // rho must dominate the objective curvature for the nonconvex ADMM
      // to contract on these cells; 2 converges for all of them, 1 stalls.
      cfg.rho = 2.0;
      const PlacementResult res = solve(spec, r, c, cfg);
      double theo = theoretical_optimum(m, 1.0, c);
      if (c == Criterion::A && m == 5) theo += inject_offset;
      const double tol = c == Criterion::E ? tol_e : tol_a;
      const double structure =
          (res.h_opt.h.transpose() * res.h_opt.h -
           (m / 3.0) * Matrix::Identity(3, 3))
              .norm();
      const bool pass =
          std::abs(res.objective - theo) <= tol && structure <= 1e-2;
      all_pass = all_pass && pass;
      out << m << (m < 10 ? "  " : " ") << criterion_to_string(c) << "     "
          << std::fixed << std::setprecision(6) << theo << "      "
          << res.objective << "      " << std::setprecision(4) << structure
          << "      " << (pass ? "PASS" : "FAIL") << "\n";
      out.unsetf(std::ios::fixed);
    }
  }
  out << (all_pass ? "sanity: 15/15 cells passed\n"
                   : "sanity: FAILURES present\n");
  return all_pass;
}

}  // namespace utmost
