#pragma once

// Shared discrete-time Poisson-hit construction behind CoxRC and KaplanMeier.

#include "semiinfo/zoo.hpp"

namespace semiinfo::detail {

struct HitModelSpec {
  std::vector<double> grid;
  std::vector<double> hazard;
  std::vector<double> z_values;
  std::vector<double> z_probs;
  std::vector<double> censor_probs;
  double theta = 0.0;
  int k_max = 20;
  bool has_theta = true;
};

ZooModel build_hit_model(const HitModelSpec& spec);

/// Cumulative hazard strictly before each grid point.
Vector cumulative_before(const Vector& w);

/// Probability vector validation shared by the zoo builders.
void check_probabilities(const std::vector<double>& p, const char* what);

}  // namespace semiinfo::detail
