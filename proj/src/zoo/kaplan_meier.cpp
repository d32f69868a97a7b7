#include "hit_model.hpp"

#include <cmath>

namespace semiinfo {

ZooModel build_kaplan_meier(const KaplanMeierParams& p) {
  detail::HitModelSpec spec;
  spec.grid = p.grid;
  spec.hazard = p.hazard;
  spec.z_values = {0.0};
  spec.z_probs = {1.0};
  spec.censor_probs = p.censor_probs;
  spec.k_max = p.k_max;
  spec.has_theta = false;
  return detail::build_hit_model(spec);
}

Vector km_at_risk(const KaplanMeierParams& p, const DiscreteMeasure& eta) {
  const Vector before = detail::cumulative_before(eta.masses());
  return ((-before.array()).exp() * censoring_survival(p.censor_probs).array()).matrix();
}

double km_survival(const DiscreteMeasure& eta, double t) {
  return std::exp(-cumulative(Direction::ones(eta.size()), eta, t));
}

Direction km_chi_dot(const DiscreteMeasure& eta, double t) {
  const double s = km_survival(eta, t);
  Direction out = Direction::zeros(eta.size());
  const long last = eta.grid().last_at_or_below(t);
  for (long i = 0; i <= last; ++i) out.values[i] = -s;
  return out;
}

double km_influence_closed_form(const KaplanMeierParams& p, const DiscreteMeasure& eta, double t,
                                const Observation& o) {
  const Vector pi = km_at_risk(p, eta);
  const Vector& w = eta.masses();
  const double s = km_survival(eta, t);
  const long last = eta.grid().last_at_or_below(t);
  double jump = 0.0;
  if (o.delta && o.index <= last) jump = o.count / pi[o.index];
  double compensator = 0.0;
  for (long i = 0; i <= std::min(last, o.index); ++i) compensator += w[i] / pi[i];
  return -s * (jump - compensator);
}

}  // namespace semiinfo
