// semiinfo_cli: analyze | validate | influence | paramcheck from a JSON config.
// Exit codes: 0 ok, 1 property failure, 2 configuration error, 3 numerical failure.

#include "semiinfo/config.hpp"
#include "semiinfo/io.hpp"
#include "semiinfo/validation.hpp"
#include "semiinfo/zoo.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <iostream>
#include <optional>

using namespace semiinfo;
using nlohmann::json;

namespace {

struct StageFailure : std::runtime_error {
  StageFailure(const std::string& stage, const std::string& what)
      : std::runtime_error(stage + ": " + what) {}
};

struct IllPosedSolve : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Runs `fn`, turning numerical errors into a failure that names the stage.
template <class F>
auto stage(const char* name, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw StageFailure(name, e.what());
  }
}

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json header(const RunConfig& cfg) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = to_string(cfg.command);
  j["timestamp"] = timestamp();
  return j;
}

json engine_json(const RunConfig& cfg) {
  static const char* names[] = {"exact", "monte_carlo", "closed_form"};
  return {{"kind", names[static_cast<int>(cfg.engine)]}, {"n", cfg.engine_n}, {"seed", cfg.seed}};
}

json ladder_json(const std::vector<LadderPoint>& ladder) {
  json out = json::array();
  for (const auto& p : ladder)
    out.push_back({{"ridge", p.ridge},
                   {"residual", number(p.residual_norm)},
                   {"relative_residual", number(p.relative_residual)},
                   {"solution_norm", number(p.solution_norm)}});
  return out;
}

json structural_json(const StructuralFunctions& sf) {
  json j;
  j["gamma"] = vector_to_json(sf.gamma);
  j["kappa"] = matrix_to_json(sf.kappa);
  j["alpha"] = matrix_to_json(sf.alpha);
  j["beta"] = json::array();
  for (const auto& b : sf.beta) j["beta"].push_back(matrix_to_json(b));
  j["max_standard_error"] = sf.max_se();
  return j;
}

void write_report(const std::filesystem::path& dir, const json& report) {
  write_file_atomic(dir / "report.json", report.dump(2) + "\n");
}

void write_csv(const std::filesystem::path& dir, const char* name, const Matrix& m) {
  write_file_atomic(dir / name, matrix_to_csv(m));
}

ExpectationEngine configured_engine(const RunConfig& cfg, const ZooModel& model) {
  return stage("engine", [&] { return make_engine(model, cfg.engine, cfg.engine_n, cfg.seed); });
}

int run_analyze(const RunConfig& cfg) {
  const ZooModel model = build_configured_model(cfg);
  const ExpectationEngine engine = configured_engine(cfg, model);
  const InfoReport rep = stage("analysis", [&] { return analyze(engine, model.components, model.state, cfg.info); });

  json r = header(cfg);
  r["model"] = to_string(model.id);
  r["theta"] = vector_to_json(model.state.theta);
  r["engine"] = engine_json(cfg);
  r["tangent"] = to_string(model.components.tangent);
  r["category"] = to_string(rep.category);
  r["structural"] = structural_json(rep.structural);
  r["fisher_theta"] = matrix_to_json(rep.fisher_theta);
  r["adjoint_score"] = matrix_to_json(rep.adjoint_score);
  r["lfd"] = matrix_to_json(rep.lfd);
  r["efficient_information"] = matrix_to_json(rep.eff_info);
  r["efficient_information_cross"] = matrix_to_json(rep.eff_info_cross);
  r["min_eigen_efficient_information"] = rep.min_eig_eff;
  const auto& d = rep.diagnostics;
  json diag;
  diag["info_condition"] = number(d.info_condition);
  diag["ridge"] = d.ridge;
  diag["regularized"] = d.regularized;
  diag["lfd_residual"] = d.lfd_residual;
  diag["gamma_min"] = d.gamma_min;
  diag["gamma_max"] = d.gamma_max;
  diag["zero_tolerance"] = d.tol_zero;
  diag["min_eigen_v"] = d.min_eig_v;
  diag["ridge_ladder"] = json::array();
  for (const auto& l : d.ladder) diag["ridge_ladder"].push_back(ladder_json(l));
  r["diagnostics"] = diag;

  std::filesystem::create_directories(cfg.output_dir);
  write_csv(cfg.output_dir, "gamma.csv", rep.structural.gamma);
  write_csv(cfg.output_dir, "kappa.csv", rep.structural.kappa);
  write_csv(cfg.output_dir, "adjoint_score.csv", rep.adjoint_score);
  write_csv(cfg.output_dir, "lfd.csv", rep.lfd);
  write_file_atomic(cfg.output_dir / "measure.csv", measure_to_csv(model.state.eta));
  write_report(cfg.output_dir, r);
  std::cout << to_string(model.id) << ": category " << to_string(rep.category) << ", min eigen efficient info "
            << format_number(rep.min_eig_eff) << "\n";
  return 0;
}

int run_validate(const RunConfig& cfg) {
  std::vector<SuiteCase> cases;
  if (cfg.all_models) {
    for (ModelId id : all_models()) {
      ZooModel m = build_configured_model(cfg, id, json::object(), std::nullopt);
      std::vector<ModelState> states{m.state};
      cases.push_back({std::move(m), std::move(states)});
    }
  } else {
    ZooModel m = build_configured_model(cfg);
    std::vector<ModelState> states{m.state};
    for (const Vector& th : cfg.validate.thetas) {
      if (th.size() != m.components.p) throw ConfigError("validate.thetas entry has the wrong length");
      states.push_back({th, m.state.eta});
    }
    cases.push_back({std::move(m), std::move(states)});
  }
  std::vector<std::uint64_t> seeds = cfg.validate.seeds;
  if (seeds.empty())
    for (std::uint64_t k = 0; k < 20; ++k) seeds.push_back(cfg.seed + k);

  SuiteConfig sc;
  sc.fd = cfg.fd;
  sc.info = cfg.info;
  sc.n_directions = cfg.validate.n_directions;
  sc.mc_n = cfg.validate.mc_n;
  sc.mc_sigma = cfg.info.mc_sigma;
  sc.mutate_kappa = cfg.validate.mutate_kappa;
  const std::vector<PropertyResult> results = run_suite(cases, seeds, sc);

  json r = header(cfg);
  r["results"] = json::array();
  std::size_t failed = 0;
  for (const auto& p : results) {
    json d = json::object();
    for (const auto& [k, v] : p.details) d[k] = number(v);
    r["results"].push_back({{"name", p.name},
                            {"passed", p.passed},
                            {"max_discrepancy", number(p.max_discrepancy)},
                            {"tolerance", p.tolerance},
                            {"context", p.context},
                            {"details", d}});
    if (!p.passed) ++failed;
    std::printf("%-4s %-46s %-12s %-10s %s\n", p.passed ? "ok" : "FAIL", p.name.c_str(),
                format_number(p.max_discrepancy).c_str(), format_number(p.tolerance).c_str(), p.context.c_str());
  }
  r["total"] = results.size();
  r["failed"] = failed;
  r["seeds"] = seeds;
  std::filesystem::create_directories(cfg.output_dir);
  write_report(cfg.output_dir, r);
  std::printf("%zu checks, %zu failed\n", results.size(), failed);
  return failed ? 1 : 0;
}

Direction configured_functional(const RunConfig& cfg, const ZooModel& model) {
  const DiscreteMeasure& eta = model.state.eta;
  const FunctionalSpec& f = cfg.functional;
  if (f.kind == "zero") return Direction::zeros(eta.size());
  if (f.kind == "survival_at") {
    if (model.id != ModelId::KaplanMeier) throw ConfigError("survival_at needs the kaplan_meier model");
    return km_chi_dot(eta, f.t);
  }
  if (f.kind == "cdf_at" || f.kind == "point_at") {
    if (model.id != ModelId::Mixture) throw ConfigError(f.kind + " needs the mixture model");
    try {
      return f.kind == "cdf_at" ? mixture_cdf_chi_dot(eta, f.t) : mixture_point_chi_dot(eta, f.t);
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
  }
  Matrix values;
  try {
    values = matrix_from_csv(read_file(f.path));
  } catch (const std::exception& e) {
    throw ConfigError(std::string("functional csv: ") + e.what());
  }
  if (values.cols() != 1 || values.rows() != static_cast<Eigen::Index>(eta.size()))
    throw ConfigError("functional csv must be a single column with one value per grid point");
  Direction d{values.col(0), false};
  // Gradients in a mean-zero tangent space are defined up to constants.
  if (model.components.tangent == TangentKind::L2Zero) d = center(d, eta);
  return d;
}

int run_influence(const RunConfig& cfg) {
  const ZooModel model = build_configured_model(cfg);
  if (model.components.p != 0) throw ConfigError("influence needs a model without a finite-dimensional theta");
  if (!model.exact) throw ConfigError("influence needs a model with enumerable outcomes");
  const Direction chi = configured_functional(cfg, model);
  const ExpectationEngine engine = configured_engine(cfg, model);

  json r = header(cfg);
  r["model"] = to_string(model.id);
  r["engine"] = engine_json(cfg);
  r["functional"] = {{"kind", cfg.functional.kind}, {"t", cfg.functional.t}};
  r["chi_dot"] = vector_to_json(chi.values);
  std::filesystem::create_directories(cfg.output_dir);

  std::optional<InfluenceResult> res;
  try {
    res.emplace(stage("influence solve", [&] {
      try {
        return nonparametric_efficient_influence(engine, model.components, model.state.eta, chi, cfg.info);
      } catch (const IllPosed& e) {
        throw IllPosedSolve(e.what());
      }
    }));
  } catch (const IllPosedSolve& e) {
    // Without a ridge ladder a singular operator leaves no solution at all.
    r["regular"] = false;
    r["non_regular"] = true;
    r["ill_posed"] = true;
    r["message"] = e.what();
    write_report(cfg.output_dir, r);
    std::cout << "non-regular: " << e.what() << "\n";
    return 0;
  }
  const auto& outcomes = model.exact->outcomes;
  Matrix table(static_cast<Eigen::Index>(outcomes.size()), 2);
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    table(static_cast<Eigen::Index>(i), 0) = static_cast<double>(outcomes[i].id);
    table(static_cast<Eigen::Index>(i), 1) = stage("influence evaluation", [&] { return res->influence(outcomes[i]); });
  }
  r["regular"] = res->regular;
  r["non_regular"] = !res->regular;
  r["ill_posed"] = false;
  r["ridge"] = res->ridge;
  r["residual"] = number(res->residual);
  r["relative_residual"] = number(res->relative_residual);
  r["ridge_ladder"] = ladder_json(res->ladder);
  r["lfd"] = vector_to_json(res->lfd.values);
  r["influence"] = vector_to_json(table.col(1));
  if (model.id == ModelId::KaplanMeier && cfg.functional.kind == "survival_at") {
    KaplanMeierParams p;
    p.hazard = cfg.params.value("hazard", p.hazard);
    p.grid = model.state.eta.grid().points();
    p.censor_probs = cfg.params.value("censor_probs", p.censor_probs);
    double gap = 0.0;
    for (std::size_t i = 0; i < outcomes.size(); ++i)
      gap = std::max(gap, std::abs(table(static_cast<Eigen::Index>(i), 1) -
                                   km_influence_closed_form(p, model.state.eta, cfg.functional.t, outcomes[i])));
    r["closed_form_max_gap"] = gap;
  }
  write_csv(cfg.output_dir, "influence.csv", table);
  write_csv(cfg.output_dir, "lfd.csv", res->lfd.values);
  write_report(cfg.output_dir, r);
  std::cout << (res->regular ? "regular" : "non-regular") << ", relative residual "
            << format_number(res->relative_residual) << "\n";
  return 0;
}

int run_paramcheck(const RunConfig& cfg) {
  Matrix full;
  try {
    full = matrix_from_csv(read_file(cfg.matrix.path));
  } catch (const std::exception& e) {
    throw ConfigError(std::string("matrix csv: ") + e.what());
  }
  if (full.rows() != full.cols() || cfg.matrix.p > full.rows())
    throw ConfigError("matrix must be square with p no larger than its size");
  const double scale = std::max(1.0, full.cwiseAbs().maxCoeff());
  if ((full - full.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw StageFailure("input check", "matrix is not symmetric");
  const double min_eig = min_eigen_sym(full);
  if (!(min_eig > -1e-12 * scale)) throw StageFailure("input check", "matrix is not positive semidefinite");

  const BlockInformation b = BlockInformation::split(full, cfg.matrix.p);
  const Matrix eff = stage("efficient information", [&] { return efficient_info_parametric(b); });
  const double gap = stage("partitioned inverse identity", [&] { return block_inverse_identity_check(b); });
  const BlockInformation swapped{b.i_pp, b.i_tp.transpose(), b.i_tt};
  const Matrix eff_nuisance = stage("nuisance efficient information", [&] { return efficient_info_parametric(swapped); });
  const double rc_theta = reciprocal_condition(eff);
  const double rc_nuisance = reciprocal_condition(eff_nuisance);
  const double threshold = 1e-12;

  json r = header(cfg);
  r["p"] = cfg.matrix.p;
  r["q"] = full.rows() - cfg.matrix.p;
  r["min_eigen_input"] = min_eig;
  r["efficient_information"] = matrix_to_json(eff);
  r["identity_discrepancy"] = gap;
  r["min_eigen_ordering"] = min_eigen_sym(b.i_tt - eff);
  r["reciprocal_condition_theta"] = rc_theta;
  r["reciprocal_condition_nuisance"] = rc_nuisance;
  r["invertibility_equivalent"] = (rc_theta > threshold) == (rc_nuisance > threshold);
  std::filesystem::create_directories(cfg.output_dir);
  write_csv(cfg.output_dir, "efficient_information.csv", eff);
  write_report(cfg.output_dir, r);
  std::cout << "identity discrepancy " << format_number(gap) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semiparametric information operators"};
  std::string config_path, out_dir, command;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "configuration JSON")->required();
  app.add_option("--out", out_dir, "output directory (overrides config)");
  app.add_option("--seed", seed, "RNG seed (overrides config)");
  app.add_option("--command", command, "analyze | validate | influence | paramcheck (overrides config)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    json j;
    try {
      j = json::parse(read_file(config_path));
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("malformed JSON: ") + e.what());
    }
    if (!command.empty() && j.is_object()) j["command"] = command;
    RunConfig cfg = parse_config(j, std::filesystem::path(config_path).parent_path());
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (seed) cfg.seed = *seed;
    switch (cfg.command) {
      case Command::Analyze: return run_analyze(cfg);
      case Command::Validate: return run_validate(cfg);
      case Command::Influence: return run_influence(cfg);
      case Command::Paramcheck: return run_paramcheck(cfg);
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const StageFailure& e) {
    std::cerr << "numerical failure in " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
