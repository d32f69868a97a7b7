#include "semiinfo/model.hpp"

#include <cmath>
#include <sstream>

namespace semiinfo {

std::string describe(const Observation& o) {
  std::ostringstream s;
  s << "observation " << o.id << " (delta=" << o.delta << ", count=" << o.count
    << ", label=" << o.label << ", index=" << o.index << ", x=" << o.x << ")";
  return s.str();
}

void check_state(const ModelComponents& mc, const ModelState& s) {
  if (s.theta.size() != mc.p)
    throw DimensionError("theta has " + std::to_string(s.theta.size()) +
                         " entries, model expects " + std::to_string(mc.p));
  const bool prob = s.eta.kind() == MeasureKind::Probability;
  if (mc.tangent == TangentKind::L2Zero && !prob)
    throw DomainError("L2Zero tangent requires a probability measure");
  if (mc.tangent == TangentKind::L2 && prob)
    throw DomainError("L2 tangent requires a positive finite (non-probability) measure");
}

namespace {

void check_finite(double v, const Observation& o, const char* what) {
  if (!std::isfinite(v))
    throw EvaluationError(std::string(what) + " is not finite at " + describe(o));
}

void check_finite(const Eigen::Ref<const Matrix>& v, const Observation& o, const char* what) {
  if (!v.allFinite())
    throw EvaluationError(std::string(what) + " is not finite at " + describe(o));
}

}  // namespace

ObservationTerms evaluate_terms(const ModelComponents& mc, const ModelState& s,
                                const Observation& o) {
  ObservationTerms t;
  const auto m = static_cast<Eigen::Index>(s.eta.size());
  const Vector& w = s.eta.masses();
  t.g = mc.g(s.theta, o);
  if (t.g.rows() != m) throw DimensionError("g rows do not match the grid at " + describe(o));
  const auto d = t.g.cols();
  t.g_dot = mc.g_dot(s.theta, o);
  if (static_cast<int>(t.g_dot.size()) != mc.p)
    throw DimensionError("g_dot must return p matrices");
  t.g_int = t.g.transpose() * w;
  t.g_dot_int.resize(d, mc.p);
  for (int j = 0; j < mc.p; ++j) {
    const Matrix& gd = t.g_dot[static_cast<std::size_t>(j)];
    if (gd.rows() != m || gd.cols() != d)
      throw DimensionError("g_dot shape does not match g at " + describe(o));
    t.g_dot_int.col(j) = gd.transpose() * w;
  }
  t.f_dot = mc.f_dot(t.g_int, o);
  t.f_ddot = mc.f_ddot(t.g_int, o);
  t.r_dot = mc.r_dot(s.theta, o);
  if (t.f_dot.size() != d || t.f_ddot.rows() != d || t.f_ddot.cols() != d)
    throw DimensionError("f derivatives do not match the columns of g at " + describe(o));
  check_finite(t.f_dot, o, "f_dot");
  check_finite(t.f_ddot, o, "f_ddot");
  return t;
}

double log_density(const ModelComponents& mc, const ModelState& s, const Observation& o) {
  check_state(mc, s);
  const Vector& w = s.eta.masses();
  const Matrix g = mc.g(s.theta, o);
  const Vector g_int = g.transpose() * w;
  double out = mc.r(s.theta, o) + mc.f(g_int, o);
  if (!mc.L_is_zero) out += mc.L(w.array().log().matrix(), o);
  check_finite(out, o, "log density");
  return out;
}

Vector score_theta(const ObservationTerms& t) {
  return t.r_dot + t.g_dot_int.transpose() * t.f_dot;
}

Vector score_theta(const ModelComponents& mc, const ModelState& s, const Observation& o) {
  check_state(mc, s);
  return score_theta(evaluate_terms(mc, s, o));
}

double score_operator(const ModelComponents& mc, const ModelState& s, const Observation& o,
                      const ObservationTerms& t, const Vector& a) {
  const Vector wa = (a.array() * s.eta.masses().array()).matrix();
  double out = t.f_dot.dot(t.g.transpose() * wa);
  if (!mc.L_is_zero) out += mc.L(a, o);
  return out;
}

double score_operator(const ModelComponents& mc, const ModelState& s, const Observation& o,
                      const Direction& a) {
  check_state(mc, s);
  if (a.size() != s.eta.size()) throw DimensionError("direction does not match grid");
  if (mc.tangent == TangentKind::L2Zero && !is_centered(a, s.eta))
    throw DomainError("L2Zero score operator requires an eta-centered direction");
  return score_operator(mc, s, o, evaluate_terms(mc, s, o), a.values);
}

}  // namespace semiinfo
