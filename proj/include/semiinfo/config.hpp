#pragma once

#include "semiinfo/validation.hpp"
#include "semiinfo/zoo.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace semiinfo {

inline constexpr int kSchemaVersion = 1;

enum class Command { Analyze, Validate, Influence, Paramcheck };
const char* to_string(Command c);
Command parse_command(const std::string& s);

struct FunctionalSpec {
  std::string kind = "zero";  // zero | survival_at | cdf_at | point_at | csv
  double t = 0.0;
  std::filesystem::path path;
};

struct MatrixSpec {
  std::filesystem::path path;
  int p = 0;
};

struct ValidateSpec {
  std::vector<Vector> thetas;       // empty: the run theta
  std::vector<std::uint64_t> seeds;  // empty: 20 consecutive seeds from the run seed
  std::size_t mc_n = 0;
  int n_directions = 20;
  bool mutate_kappa = false;
};

struct RunConfig {
  int schema_version = kSchemaVersion;
  Command command = Command::Analyze;
  bool all_models = false;  // validate only: every zoo model at its defaults
  ModelId model = ModelId::CoxRC;
  nlohmann::json params = nlohmann::json::object();
  std::optional<Vector> theta;
  nlohmann::json grid;  // null, {"points": [...]} or {"count": n, "tau": t}
  EngineKind engine = EngineKind::Exact;
  std::size_t engine_n = 0;
  std::uint64_t seed = 1;
  InfoOptions info;  // ridges empty unless "ridge_ladder" is given
  FdOptions fd;
  std::filesystem::path output_dir = "out";
  FunctionalSpec functional;
  MatrixSpec matrix;
  ValidateSpec validate;
};

/// Throws ConfigError naming the offending field. Relative paths resolve
/// against `base_dir`.
RunConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

/// The configured zoo model with state theta set to `theta` (or the config theta).
ZooModel build_configured_model(const RunConfig& cfg, ModelId id, const nlohmann::json& params,
                                const std::optional<Vector>& theta);
ZooModel build_configured_model(const RunConfig& cfg);

}  // namespace semiinfo
