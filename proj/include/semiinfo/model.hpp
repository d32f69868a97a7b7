#pragma once

#include "semiinfo/measure.hpp"

#include <functional>
#include <string>
#include <vector>

namespace semiinfo {

/// One observed data record. Models use the fields they need:
///   delta   event / response / selection indicator
///   count   tie multiplicity or number of recorded events
///   label   categorical outcome (e.g. X in a mixture, Y in a regression)
///   index   grid index of the observed time or covariate, -1 when absent
///   x       observed time or coarsened value
///   z       covariate vector (or covariate path, one entry per grid cell)
///   times   event times for counting-process data
struct Observation {
  std::size_t id = 0;
  int delta = 0;
  int count = 0;
  int label = 0;
  long index = -1;
  double x = 0.0;
  Vector z;
  std::vector<double> times;
};

std::string describe(const Observation& o);

/// log p = r(theta) + f(int g dEta) + L(log dEta), with g an m x d matrix
/// (d columns for vector-valued g) and f acting on the d-vector of integrals.
struct ModelComponents {
  int p = 1;
  TangentKind tangent = TangentKind::L2;

  std::function<double(const Vector& theta, const Observation&)> r;
  std::function<Vector(const Vector& theta, const Observation&)> r_dot;
  /// m x d values g(u_i; theta), column k is the k-th component.
  std::function<Matrix(const Vector& theta, const Observation&)> g;
  /// p matrices, each m x d: derivative of g in theta_j.
  std::function<std::vector<Matrix>(const Vector& theta, const Observation&)> g_dot;
  std::function<double(const Vector& x, const Observation&)> f;
  std::function<Vector(const Vector& x, const Observation&)> f_dot;
  std::function<Matrix(const Vector& x, const Observation&)> f_ddot;
  /// Linear functional of a direction given on the grid.
  std::function<double(const Vector& a, const Observation&)> L;
  bool L_is_zero = false;
};

struct ModelState {
  Vector theta;
  DiscreteMeasure eta;
};

/// Throws DomainError if the measure kind does not match the tangent kind
/// (Probability for L2Zero, PositiveFinite for L2) or theta has the wrong size.
void check_state(const ModelComponents& mc, const ModelState& s);

/// Everything a single observation contributes, evaluated once.
struct ObservationTerms {
  Matrix g;                  // m x d
  std::vector<Matrix> g_dot; // p x (m x d)
  Vector g_int;              // d, int g dEta
  Matrix g_dot_int;          // d x p, int g_dot dEta
  Vector f_dot;              // d
  Matrix f_ddot;             // d x d
  Vector r_dot;              // p
};

ObservationTerms evaluate_terms(const ModelComponents& mc, const ModelState& s,
                                const Observation& o);

double log_density(const ModelComponents& mc, const ModelState& s, const Observation& o);
Vector score_theta(const ModelComponents& mc, const ModelState& s, const Observation& o);
Vector score_theta(const ObservationTerms& t);

/// B a at one observation. Under L2Zero `a` must be eta-centered.
double score_operator(const ModelComponents& mc, const ModelState& s, const Observation& o,
                      const Direction& a);
double score_operator(const ModelComponents& mc, const ModelState& s, const Observation& o,
                      const ObservationTerms& t, const Vector& a);

}  // namespace semiinfo
