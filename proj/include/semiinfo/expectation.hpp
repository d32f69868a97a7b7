#pragma once

#include "semiinfo/model.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace semiinfo {

using ProbabilityFn = std::function<double(const ModelState&, const Observation&)>;
using Sampler = std::function<Observation(const ModelState&, std::mt19937_64&)>;

/// Finite outcome space with a probability evaluator. Probabilities must sum
/// to one (within `normalization_tol`) at every queried state.
struct ExactEnumeration {
  std::vector<Observation> outcomes;
  ProbabilityFn probability;
  double normalization_tol = 1e-10;
};

/// Independent draws from `sampler`, split into a fixed number of seeded
/// blocks so results do not depend on the thread count.
struct MonteCarlo {
  Sampler sampler;
  std::size_t n = 0;
  std::uint64_t seed = 0;
};

struct StructuralFunctions;

/// Dispatch into a model's analytic formulas.
struct ClosedForm {
  std::string model;
  std::function<StructuralFunctions(const ModelState&)> structural;
};

using ExpectationEngine = std::variant<ExactEnumeration, MonteCarlo, ClosedForm>;

const char* engine_kind(const ExpectationEngine& e);
bool is_exact(const ExpectationEngine& e);

inline constexpr int kMonteCarloBlocks = 32;

/// Probabilities of every outcome at state s; throws DomainError if they do
/// not sum to one.
Vector outcome_probabilities(const ExactEnumeration& e, const ModelState& s);

struct Expectation {
  Vector value;
  Vector se;
};

using Functional = std::function<Vector(const Observation&)>;

/// E[functional(O)] with its standard error (zero for exact engines).
Expectation expect(const ExpectationEngine& e, const ModelState& s, const Functional& fn);

/// Structural functions of the score and information operators.
///   alpha  m x p       -E[f_dot g_dot(u)]
///   beta   p of m x m  -E[f_ddot g(u) g_dot(v)], integrated over v
///   gamma  m           multiplier of B*B
///   kappa  m x m       -E[f_ddot g(u) g(v)]
/// Under L2Zero, g(u) and g_dot(u) enter centered at their eta-integrals and
/// gamma includes E[L(1)], so that B*B a = gamma a - <gamma, a> + kappa a.
struct StructuralFunctions {
  Matrix alpha;
  std::vector<Matrix> beta;
  Vector gamma;
  Matrix kappa;
  Matrix alpha_se;
  std::vector<Matrix> beta_se;
  Vector gamma_se;
  Matrix kappa_se;

  double max_se() const;
};

/// Parallel assembly (OpenMP over grid rows / Monte Carlo blocks).
StructuralFunctions structural_functions(const ExpectationEngine& e, const ModelComponents& mc,
                                         const ModelState& s);

/// Straight loop over outcomes; kept as the reference for the parallel path.
StructuralFunctions structural_functions_serial(const ExpectationEngine& e,
                                                const ModelComponents& mc, const ModelState& s);

struct ProbeRow {
  std::size_t n = 0;
  double max_deviation = 0.0;  // from the largest-n run
  double max_se = 0.0;
};

std::vector<ProbeRow> mc_convergence_probe(const ExpectationEngine& e,
                                           const ModelComponents& mc, const ModelState& s,
                                           const std::vector<std::size_t>& n_ladder);

}  // namespace semiinfo
