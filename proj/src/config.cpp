#include "semiinfo/config.hpp"

#include "semiinfo/io.hpp"

namespace semiinfo {

const char* to_string(Command c) {
  switch (c) {
    case Command::Analyze: return "analyze";
    case Command::Validate: return "validate";
    case Command::Influence: return "influence";
    case Command::Paramcheck: return "paramcheck";
  }
  return "?";
}

Command parse_command(const std::string& s) {
  if (s == "analyze") return Command::Analyze;
  if (s == "validate") return Command::Validate;
  if (s == "influence") return Command::Influence;
  if (s == "paramcheck") return Command::Paramcheck;
  throw ConfigError("unknown command '" + s + "'");
}

namespace {

using nlohmann::json;

template <class T>
T field(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("field '") + key + "' has the wrong type");
  }
}

double positive(const json& j, const char* key, double fallback) {
  const double v = field<double>(j, key, fallback);
  if (!(v > 0.0)) throw ConfigError(std::string("tolerance '") + key + "' must be positive");
  return v;
}

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Vector parse_theta(const json& j, const char* what) {
  if (!j.is_array()) throw ConfigError(std::string(what) + " must be an array of numbers");
  std::vector<double> v;
  for (const auto& x : j) {
    if (!x.is_number()) throw ConfigError(std::string(what) + " must be an array of numbers");
    v.push_back(x.get<double>());
  }
  return to_vector(v);
}

std::vector<double> grid_points(const json& g) {
  if (g.contains("points")) return field<std::vector<double>>(g, "points", {});
  const int count = field<int>(g, "count", 0);
  const double tau = field<double>(g, "tau", 0.0);
  if (count < 1 || !(tau > 0.0)) throw ConfigError("grid needs 'points' or a positive 'count' and 'tau'");
  std::vector<double> pts(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) pts[static_cast<std::size_t>(i)] = tau * (i + 1) / count;
  return pts;
}

void apply_grid(const json& grid, std::vector<double>& target, const std::vector<double>& hazard,
                bool hazard_given) {
  if (grid.is_null()) return;
  target = grid_points(grid);
  if (!hazard_given && hazard.size() != target.size())
    throw ConfigError("grid override needs a matching 'hazard' in model params");
}

ZooModel build_from_params(ModelId id, const json& pr, const json& grid, const std::optional<double>& theta0) {
  switch (id) {
    case ModelId::CoxRC: {
      CoxRCParams p;
      p.hazard = field(pr, "hazard", p.hazard);
      apply_grid(grid, p.grid, p.hazard, pr.contains("hazard"));
      p.grid = field(pr, "grid", p.grid);
      p.z_values = field(pr, "z_values", p.z_values);
      p.z_probs = field(pr, "z_probs", p.z_probs);
      p.censor_probs = field(pr, "censor_probs", p.censor_probs);
      p.k_max = field(pr, "k_max", p.k_max);
      if (theta0) p.theta = *theta0;
      return build_cox_rc(p);
    }
    case ModelId::KaplanMeier: {
      KaplanMeierParams p;
      p.hazard = field(pr, "hazard", p.hazard);
      apply_grid(grid, p.grid, p.hazard, pr.contains("hazard"));
      p.grid = field(pr, "grid", p.grid);
      p.censor_probs = field(pr, "censor_probs", p.censor_probs);
      p.k_max = field(pr, "k_max", p.k_max);
      return build_kaplan_meier(p);
    }
    case ModelId::CoxCS: {
      CoxCSParams p;
      const int refine = field(pr, "refine", 0);
      if (refine > 0) p = cox_cs_refined(static_cast<std::size_t>(refine));
      if (refine > 0 && !grid.is_null()) throw ConfigError("'refine' and a grid override are exclusive");
      p.hazard = field(pr, "hazard", p.hazard);
      apply_grid(grid, p.grid, p.hazard, pr.contains("hazard"));
      p.grid = field(pr, "grid", p.grid);
      p.z_values = field(pr, "z_values", p.z_values);
      p.z_probs = field(pr, "z_probs", p.z_probs);
      p.u_probs = field(pr, "u_probs", p.u_probs);
      p.duplicate_covariate = field(pr, "duplicate_covariate", p.duplicate_covariate);
      if (theta0) p.theta = *theta0;
      return build_cox_cs(p);
    }
    case ModelId::Mixture: {
      MixtureParams p;
      if (!grid.is_null()) throw ConfigError("mixture support is set by 'masses', not a grid");
      p.masses = field(pr, "masses", p.masses);
      p.trials = field(pr, "trials", p.trials);
      p.constant_kernel = field(pr, "constant_kernel", p.constant_kernel);
      return build_mixture(p);
    }
    case ModelId::MissingCov: {
      MissingCovParams p;
      if (!grid.is_null()) throw ConfigError("covariate support is set by 'z_values', not a grid");
      p.z_values = field(pr, "z_values", p.z_values);
      p.masses = field(pr, "masses", p.masses);
      p.intercept = field(pr, "intercept", p.intercept);
      p.select = field(pr, "select", p.select);
      if (theta0) p.theta = *theta0;
      return build_missing_cov(p);
    }
    case ModelId::RecurrentTransform: {
      RecurrentParams p;
      p.hazard = field(pr, "hazard", p.hazard);
      apply_grid(grid, p.grid, p.hazard, pr.contains("hazard"));
      p.grid = field(pr, "grid", p.grid);
      p.z_paths = field(pr, "z_paths", p.z_paths);
      p.z_probs = field(pr, "z_probs", p.z_probs);
      p.censor_probs = field(pr, "censor_probs", p.censor_probs);
      p.nodes = field(pr, "nodes", p.nodes);
      p.transform = parse_transformation(field<std::string>(pr, "transform", "identity"));
      if (theta0) p.theta = *theta0;
      return build_recurrent(p);
    }
  }
  throw ConfigError("unknown model");
}

}  // namespace

ZooModel build_configured_model(const RunConfig& cfg, ModelId id, const json& params,
                                const std::optional<Vector>& theta) {
  if (!params.is_object()) throw ConfigError("model params must be an object");
  std::optional<double> theta0;
  if (theta && theta->size() > 0) theta0 = (*theta)[0];
  ZooModel model;
  try {
    model = build_from_params(id, params, cfg.grid, theta0);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("model '") + to_string(id) + "': " + e.what());
  }
  if (theta) {
    if (theta->size() != model.components.p)
      throw ConfigError("theta has " + std::to_string(theta->size()) + " entries, model '" + to_string(id) +
                        "' needs " + std::to_string(model.components.p));
    model.state.theta = *theta;
  }
  return model;
}

ZooModel build_configured_model(const RunConfig& cfg) {
  return build_configured_model(cfg, cfg.model, cfg.params, cfg.theta);
}

RunConfig parse_config(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  RunConfig c;
  if (!j.contains("schema_version")) throw ConfigError("missing 'schema_version'");
  c.schema_version = field<int>(j, "schema_version", 0);
  if (c.schema_version != kSchemaVersion)
    throw ConfigError("unsupported schema_version " + std::to_string(c.schema_version));
  c.command = parse_command(field<std::string>(j, "command", "analyze"));
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
  };

  if (c.command != Command::Paramcheck) {
    if (!j.contains("model") || !j.at("model").is_object()) throw ConfigError("missing 'model' object");
    const json& m = j.at("model");
    const std::string id = field<std::string>(m, "id", "");
    if (id == "all" && c.command == Command::Validate) {
      c.all_models = true;
    } else {
      c.model = parse_model_id(id);
    }
    c.params = m.contains("params") ? m.at("params") : json::object();
    if (!c.params.is_object()) throw ConfigError("'model.params' must be an object");
    if (j.contains("theta")) {
      c.theta = parse_theta(j.at("theta"), "theta");
    } else if (!c.all_models) {
      throw ConfigError("missing 'theta'");
    }
  }
  if (j.contains("grid")) {
    c.grid = j.at("grid");
    if (!c.grid.is_object()) throw ConfigError("'grid' must be an object");
  }

  if (j.contains("engine")) {
    const json& e = j.at("engine");
    c.engine = parse_engine_kind(field<std::string>(e, "kind", "exact"));
    c.engine_n = field<std::size_t>(e, "n", 0);
    c.seed = field<std::uint64_t>(e, "seed", c.seed);
    if (c.engine == EngineKind::MonteCarlo && c.engine_n < 2)
      throw ConfigError("monte_carlo engine needs n >= 2");
  }

  c.info.ridges.clear();
  if (j.contains("ridge_ladder")) {
    c.info.ridges = field<std::vector<double>>(j, "ridge_ladder", {});
    for (double r : c.info.ridges)
      if (!(r > 0.0)) throw ConfigError("ridge ladder entries must be positive");
  }
  const json tol = j.contains("tolerances") ? j.at("tolerances") : json::object();
  if (!tol.is_object()) throw ConfigError("'tolerances' must be an object");
  c.info.tol_zero = positive(tol, "zero", c.info.tol_zero);
  c.info.bound_M = positive(tol, "bound_M", c.info.bound_M);
  c.info.mc_sigma = positive(tol, "mc_sigma", c.info.mc_sigma);
  c.info.regular_threshold = positive(tol, "regular_threshold", c.info.regular_threshold);
  c.fd.h = positive(tol, "fd_h", c.fd.h);
  c.fd.constant = positive(tol, "fd_constant", c.fd.constant);
  c.fd.exact_tol = positive(tol, "exact", c.fd.exact_tol);

  c.output_dir = resolve(field<std::string>(j, "output_dir", "out"));

  if (j.contains("functional")) {
    const json& f = j.at("functional");
    c.functional.kind = field<std::string>(f, "kind", "zero");
    c.functional.t = field<double>(f, "t", 0.0);
    if (f.contains("path")) c.functional.path = resolve(field<std::string>(f, "path", ""));
    static const char* kinds[] = {"zero", "survival_at", "cdf_at", "point_at", "csv"};
    if (std::find(std::begin(kinds), std::end(kinds), c.functional.kind) == std::end(kinds))
      throw ConfigError("unknown functional kind '" + c.functional.kind + "'");
    if (c.functional.kind == "csv" && c.functional.path.empty()) throw ConfigError("csv functional needs 'path'");
  }
  if (c.command == Command::Paramcheck) {
    if (!j.contains("matrix")) throw ConfigError("paramcheck needs a 'matrix' object");
    const json& mm = j.at("matrix");
    c.matrix.path = resolve(field<std::string>(mm, "path", ""));
    c.matrix.p = field<int>(mm, "p", 0);
    if (c.matrix.path.empty()) throw ConfigError("'matrix.path' is required");
    if (c.matrix.p < 1) throw ConfigError("'matrix.p' must be at least 1");
  }
  if (j.contains("validate")) {
    const json& v = j.at("validate");
    if (v.contains("thetas")) {
      if (!v.at("thetas").is_array()) throw ConfigError("'validate.thetas' must be an array");
      for (const auto& t : v.at("thetas")) c.validate.thetas.push_back(parse_theta(t, "validate.thetas entry"));
    }
    c.validate.seeds = field<std::vector<std::uint64_t>>(v, "seeds", {});
    c.validate.mc_n = field<std::size_t>(v, "mc_n", 0);
    c.validate.n_directions = field<int>(v, "n_directions", 20);
    c.validate.mutate_kappa = field<bool>(v, "mutate_kappa", false);
    if (c.validate.n_directions < 1) throw ConfigError("'validate.n_directions' must be positive");
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("cannot read config: ") + e.what());
  }
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  return parse_config(j, path.parent_path());
}

}  // namespace semiinfo
