#pragma once

#include "semiinfo/info.hpp"
#include "semiinfo/zoo.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace semiinfo {

/// passed == (max_discrepancy <= tolerance). Checks that combine several
/// criteria report a normalized discrepancy (worst ratio to its own
/// tolerance) against tolerance 1 and list the raw numbers in `details`.
struct PropertyResult {
  std::string name;
  double max_discrepancy = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string context;
  std::vector<std::pair<std::string, double>> details;
};

PropertyResult make_result(std::string name, double discrepancy, double tolerance,
                           std::string context = {});

struct FdOptions {
  double h = 1e-2;
  double order_lo = 3.5;
  double order_hi = 4.5;
  double exact_tol = 1e-10;
  double constant = 100.0;   // FD tolerance is constant * max(1, |exact|) * h^2
  double vacuous = 1e-11;    // below this FD error (relative) the order check is vacuous
};

/// Scalar score whose adjoint is checked: a theta-score coordinate or B a.
struct ScoreChoice {
  int theta_component = -1;
  Vector direction;  // used when theta_component < 0

  static ScoreChoice theta(int j) { return {j, Vector()}; }
  static ScoreChoice operator_in(const Vector& a) { return {-1, a}; }
};

/// <B* g, b>_eta = E[g B b] = -E[d/dt g at eta_t] with d eta_t = (1 + t b) d eta.
/// `sf` supplies B* (adjoint columns, or gamma/kappa for B a).
PropertyResult check_adjoint_identity(const ExpectationEngine& e, const ModelComponents& mc,
                                      const ModelState& s, const StructuralFunctions& sf,
                                      const ScoreChoice& which, const Direction& b,
                                      const FdOptions& fd = {});

/// |B a(o) - d/dt log p(o) at eta_t| with central differences and an order probe.
PropertyResult check_score_fd(const ModelComponents& mc, const ModelState& s, const Observation& o,
                              const Direction& a, const FdOptions& fd = {});

/// Under L2Zero: at eta_t = (1 + t a) eta, the recentered a_t = a - eta_t a is
/// admissible and the centered B*B formula reproduces the derivative of
/// B a_t along further perturbations, for `n_b` random b.
PropertyResult check_centering_construction(const ExpectationEngine& e, const ModelComponents& mc,
                                            const ModelState& s, const Direction& a, double t,
                                            std::uint64_t seed = 7, int n_b = 10,
                                            const FdOptions& fd = {});

/// Entries uniform on [-1, 1], eta-centered when `centered`.
Direction random_direction(std::mt19937_64& rng, const DiscreteMeasure& eta, bool centered);

struct SuiteConfig {
  FdOptions fd;
  InfoOptions info;
  int n_directions = 20;
  int n_operator_directions = 5;
  std::size_t mc_n = 0;        // 0 disables the Monte Carlo coverage check
  double mc_sigma = 4.0;
  double mc_coverage = 0.99;
  bool mutate_kappa = false;   // flips the sign of kappa's upper triangle
};

struct SuiteCase {
  ZooModel model;
  std::vector<ModelState> states;
};

/// Deterministic, ordered property results for every case and state. Seeds
/// only drive Monte Carlo checks; exact checks use fixed direction streams.
std::vector<PropertyResult> run_suite(const std::vector<SuiteCase>& cases,
                                      const std::vector<std::uint64_t>& seeds,
                                      const SuiteConfig& config = {});

}  // namespace semiinfo
