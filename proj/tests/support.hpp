#pragma once

// Test-side oracles: plain loops over enumerated outcomes, independent of the
// library's expectation engines and structural assembly.

#include "semiinfo/zoo.hpp"

#include <random>

namespace oracle {

using semiinfo::Matrix;
using semiinfo::ModelState;
using semiinfo::Observation;
using semiinfo::Vector;
using semiinfo::ZooModel;

template <class F>
double expect(const ZooModel& m, const ModelState& s, F&& fn) {
  double total = 0.0;
  for (const Observation& o : m.exact->outcomes) total += m.exact->probability(s, o) * fn(o);
  return total;
}

// pr(X >= u_i, weighted by h(Z)) for hit-type models (index = position of X).
template <class H>
Vector at_risk(const ZooModel& m, const ModelState& s, H&& h) {
  const auto n = static_cast<Eigen::Index>(s.eta.size());
  Vector out = Vector::Zero(n);
  for (const Observation& o : m.exact->outcomes) {
    const double p = m.exact->probability(s, o) * h(o);
    for (Eigen::Index i = 0; i <= o.index; ++i) out[i] += p;
  }
  return out;
}

// Symmetric positive definite n x n with eigenvalues in [lo, hi].
inline Matrix random_spd(std::mt19937_64& rng, Eigen::Index n, double lo = 0.5, double hi = 4.0) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(lo, hi);
  Matrix a(n, n);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = normal(rng);
  const Eigen::HouseholderQR<Matrix> qr(a);
  const Matrix q = qr.householderQ();
  Vector ev(n);
  for (Eigen::Index i = 0; i < n; ++i) ev[i] = unif(rng);
  return q * ev.asDiagonal() * q.transpose();
}

inline ZooModel default_model(semiinfo::ModelId id) {
  using semiinfo::ModelId;
  switch (id) {
    case ModelId::CoxRC: return semiinfo::build_cox_rc({});
    case ModelId::CoxCS: return semiinfo::build_cox_cs({});
    case ModelId::RecurrentTransform: return semiinfo::build_recurrent({});
    case ModelId::KaplanMeier: return semiinfo::build_kaplan_meier({});
    case ModelId::Mixture: return semiinfo::build_mixture({});
    case ModelId::MissingCov: return semiinfo::build_missing_cov({});
  }
  throw std::logic_error("unknown model");
}

inline double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace oracle
