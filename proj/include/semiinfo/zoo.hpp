#pragma once

#include "semiinfo/expectation.hpp"
#include "semiinfo/info.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace semiinfo {

enum class ModelId { CoxRC, CoxCS, RecurrentTransform, KaplanMeier, Mixture, MissingCov };

const char* to_string(ModelId id);
/// Accepts cox_rc, cox_cs, recurrent, kaplan_meier, mixture, missing_cov.
ModelId parse_model_id(const std::string& s);
const std::vector<ModelId>& all_models();

/// Closed-form pieces a model can supply; empty members are not available.
struct References {
  std::function<Vector(const ModelState&)> gamma;
  std::function<Matrix(const ModelState&)> kappa;
  std::function<Matrix(const ModelState&)> alpha;
  std::function<std::vector<Matrix>(const ModelState&)> beta;
  std::function<Matrix(const ModelState&)> adjoint;
  std::function<Matrix(const ModelState&)> lfd;
};

struct ZooModel {
  ModelId id = ModelId::CoxRC;
  ModelComponents components;
  ModelState state;
  std::optional<ExactEnumeration> exact;
  Sampler sampler;
  References refs;
  Category expected_category = Category::Indeterminate;
  /// False for deliberately degenerate configurations (joint scores collinear).
  bool expected_identifiable = true;
};

enum class EngineKind { Exact, MonteCarlo, ClosedForm };
EngineKind parse_engine_kind(const std::string& s);

ExpectationEngine make_engine(const ZooModel& model, EngineKind kind, std::size_t n = 0,
                              std::uint64_t seed = 0);

Vector reference_gamma(const ZooModel& model, const ModelState& s);
Matrix reference_kappa(const ZooModel& model, const ModelState& s);
Matrix reference_alpha(const ZooModel& model, const ModelState& s);
std::vector<Matrix> reference_beta(const ZooModel& model, const ModelState& s);
Matrix reference_adjoint(const ZooModel& model, const ModelState& s);
Matrix reference_lfd(const ZooModel& model, const ModelState& s);

// ---------------------------------------------------------------------------
// Right-censored Cox model, discrete time. At each grid point the subject
// receives Poisson(exp(theta z) w_i) hits; X is the first hit or the censoring
// time, whichever comes first (ties count as events), K the hits at X.

struct CoxRCParams {
  std::vector<double> grid{1.0, 2.0, 3.0};
  std::vector<double> hazard{0.2, 0.3, 0.4};
  std::vector<double> z_values{0.0, 1.0};
  std::vector<double> z_probs{0.5, 0.5};
  std::vector<double> censor_probs{0.2, 0.3, 0.5};  // P(C = u_i)
  double theta = 0.0;
  int k_max = 20;
};

ZooModel build_cox_rc(const CoxRCParams& p);

/// P(C >= u_i) for i = 1..m.
Vector censoring_survival(const std::vector<double>& censor_probs);

// ---------------------------------------------------------------------------
// Kaplan-Meier: the same construction without covariates, no theta.

struct KaplanMeierParams {
  std::vector<double> grid{1.0, 2.0, 3.0, 4.0};
  std::vector<double> hazard{0.1, 0.2, 0.3, 0.4};
  std::vector<double> censor_probs{0.1, 0.2, 0.3, 0.4};
  int k_max = 20;
};

ZooModel build_kaplan_meier(const KaplanMeierParams& p);

/// pr(X >= u_i).
Vector km_at_risk(const KaplanMeierParams& p, const DiscreteMeasure& eta);
/// exp(-Lambda(t)).
double km_survival(const DiscreteMeasure& eta, double t);
/// Pathwise derivative of S(t): -S(t) I(. <= t).
Direction km_chi_dot(const DiscreteMeasure& eta, double t);
/// -S(t) [delta K I(X <= t) / pi(X) - sum_{u_i <= min(X, t)} w_i / pi(u_i)].
double km_influence_closed_form(const KaplanMeierParams& p, const DiscreteMeasure& eta, double t,
                                const Observation& o);

// ---------------------------------------------------------------------------
// Current-status Cox model: delta = I(T <= U) observed with U and Z.

struct CoxCSParams {
  std::vector<double> grid{1.0, 2.0, 3.0};
  std::vector<double> hazard{0.2, 0.3, 0.4};
  std::vector<double> z_values{0.0, 1.0};
  std::vector<double> z_probs{0.5, 0.5};
  std::vector<double> u_probs;  // empty = uniform over the grid
  double theta = 0.0;
  bool duplicate_covariate = false;  // theta in R^2 with covariate (Z, Z)
};

/// Grid refined to `count` points on (0, 3] under Lambda(t) = 0.15 t + 0.05 t^2,
/// which passes through the coarse toy's cumulative hazard at t = 1, 2, 3.
CoxCSParams cox_cs_refined(std::size_t count, double theta = 0.0);

ZooModel build_cox_cs(const CoxCSParams& p);

struct CurrentStatusProfile {
  Vector lambda_cum;  // Lambda(u_i)
  Vector s0;
  Vector s1;
  Vector zeta;        // s1 / s0
};

CurrentStatusProfile cs_profile(const CoxCSParams& p, const ModelState& s);
/// a(t) = zeta(t) + Lambda(t) zeta'(t) / lambda(t), derivatives by central
/// difference quotients (one-sided at the ends), lambda(u_i) ~ w_i / du_i.
Vector cs_reference_lfd(const CoxCSParams& p, const ModelState& s);
/// Richardson estimate of the truncation error of the zeta difference
/// quotients, scaled by Lambda: max_i Lambda_i |D_h zeta - D_2h zeta| / 3.
double cs_truncation_bound(const CoxCSParams& p, const ModelState& s);
/// f_dot exp(theta Z) Lambda(U) (Z - zeta(U)).
double cs_efficient_score_formula(const CoxCSParams& p, const ModelState& s, const Observation& o);

// ---------------------------------------------------------------------------
// Binomial mixture: X | z ~ Binomial(trials, (z + 0.5) / support), z ~ eta.

struct MixtureParams {
  std::vector<double> masses{0.1, 0.15, 0.2, 0.25, 0.2, 0.1};
  int trials = 5;  // identifiable only when trials + 1 >= support size
  bool constant_kernel = false;  // p(x | z) independent of z
};

ZooModel build_mixture(const MixtureParams& p);

/// Pathwise derivative of eta((-inf, z0]): I(. <= z0) - F(z0).
Direction mixture_cdf_chi_dot(const DiscreteMeasure& eta, double z0);
/// Pathwise derivative of eta({z0}): I(. = z0) - eta({z0}).
Direction mixture_point_chi_dot(const DiscreteMeasure& eta, double z0);

// ---------------------------------------------------------------------------
// Logistic regression with a coarsened covariate missing at random.

struct MissingCovParams {
  std::vector<double> z_values{-1.5, -1.0, -0.5, 0.5, 1.0, 1.5};
  std::vector<double> masses{0.1, 0.2, 0.2, 0.15, 0.2, 0.15};
  double intercept = 0.3;
  double theta = 0.5;
  /// Selection probability pi(y, x); rows y = 0, 1, columns x = G(z) in {0, 1}.
  std::vector<std::vector<double>> select{{0.5, 0.6}, {0.4, 0.7}};
};

ZooModel build_missing_cov(const MissingCovParams& p);

/// Coarsening G(z): 0 for z < 0, 1 otherwise.
int missing_cov_cell(double z);

struct Prop3Result {
  bool passed = false;
  std::string failing;  // "(a)", "(b)", "efficient information", or empty
  double min_selection = 0.0;
  double min_conditional_info = 0.0;
  double gamma_min = 0.0;
  double gamma_max = 0.0;
  double min_eig_eff = 0.0;
};

/// Checks (a) pi >= floor, (b) positive conditional full-data information at
/// every support point, then the sign of the efficient information.
Prop3Result prop3_check(const MissingCovParams& p, const ZooModel& model, const ModelState& s,
                        double floor = 1e-8);

// ---------------------------------------------------------------------------
// Transformation model for recurrent events. Cells (u_{i-1}, u_i] carry
// uniform hazard; follow-up ends at the second event or at C.

struct Transformation {
  std::string name;
  std::function<double(double)> G, G1, G2, G3;  // G and its derivatives
};

Transformation transformation_identity();
Transformation transformation_log1p();
Transformation parse_transformation(const std::string& name);

struct RecurrentParams {
  std::vector<double> grid{1.0, 2.0};
  std::vector<double> hazard{0.3, 0.4};
  std::vector<std::vector<double>> z_paths{{0.0, 0.0}, {1.0, 0.5}};
  std::vector<double> z_probs{0.5, 0.5};
  std::vector<double> censor_probs{0.3, 0.7};  // P(C = u_i)
  double theta = 0.5;
  Transformation transform = transformation_identity();
  int nodes = 24;  // Gauss-Legendre nodes per cell
};

ZooModel build_recurrent(const RecurrentParams& p);

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w);

}  // namespace semiinfo
