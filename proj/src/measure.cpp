#include "semiinfo/measure.hpp"

#include "semiinfo/io.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace semiinfo {

namespace {

void require_same_grid(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    std::ostringstream msg;
    msg << what << ": dimension mismatch (" << a << " vs " << b << ")";
    throw DimensionError(msg.str());
  }
}

}  // namespace

Grid::Grid(std::vector<double> points, double tau)
    : points_(std::move(points)), tau_(tau) {
  if (points_.empty()) throw DomainError("grid must contain at least one point");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!(points_[i] >= 0.0 && points_[i] <= tau_))
      throw DomainError("grid point outside [0, tau]");
    if (i > 0 && !(points_[i] > points_[i - 1]))
      throw DomainError("grid points must be strictly increasing");
  }
}

Grid Grid::uniform(std::size_t count, double tau) {
  if (count == 0) throw DomainError("grid must contain at least one point");
  std::vector<double> pts(count);
  for (std::size_t i = 0; i < count; ++i)
    pts[i] = tau * static_cast<double>(i + 1) / static_cast<double>(count);
  pts.back() = tau;
  return Grid(std::move(pts), tau);
}

long Grid::last_at_or_below(double t) const {
  auto it = std::upper_bound(points_.begin(), points_.end(), t);
  return static_cast<long>(it - points_.begin()) - 1;
}

DiscreteMeasure::DiscreteMeasure()
    : DiscreteMeasure(Grid({0.0}, 0.0), Vector::Ones(1), MeasureKind::Probability) {}

DiscreteMeasure::DiscreteMeasure(Grid grid, Vector masses, MeasureKind kind,
                                 const MeasureTolerances& tol)
    : grid_(std::move(grid)), masses_(std::move(masses)), kind_(kind) {
  require_same_grid(grid_.size(), masses_.size(), "DiscreteMeasure");
  for (Eigen::Index i = 0; i < masses_.size(); ++i) {
    if (!(masses_[i] >= 0.0) || !std::isfinite(masses_[i]))
      throw DomainError("measure masses must be finite and nonnegative");
  }
  if (kind_ == MeasureKind::Probability &&
      std::abs(masses_.sum() - 1.0) > tol.probability_mass)
    throw DomainError("probability measure masses must sum to one");
}

double inner_product(const Direction& a, const Direction& b,
                     const DiscreteMeasure& eta) {
  require_same_grid(a.size(), eta.size(), "inner_product");
  require_same_grid(b.size(), eta.size(), "inner_product");
  return (a.values.array() * b.values.array() * eta.masses().array()).sum();
}

Direction center(const Direction& a, const DiscreteMeasure& eta) {
  require_same_grid(a.size(), eta.size(), "center");
  if (eta.kind() != MeasureKind::Probability)
    throw DomainError("center requires a probability measure");
  const double mean = a.values.dot(eta.masses());
  return {(a.values.array() - mean).matrix(), true};
}

bool is_centered(const Direction& a, const DiscreteMeasure& eta,
                 const MeasureTolerances& tol) {
  require_same_grid(a.size(), eta.size(), "is_centered");
  return std::abs(a.values.dot(eta.masses())) <= tol.centered;
}

double cumulative(const Direction& a, const DiscreteMeasure& eta, double t) {
  require_same_grid(a.size(), eta.size(), "cumulative");
  if (t < 0.0 || t > eta.grid().tau())
    throw DomainError("cumulative: t outside [0, tau]");
  const long last = eta.grid().last_at_or_below(t);
  double sum = 0.0;
  for (long i = 0; i <= last; ++i) sum += a.values[i] * eta.masses()[i];
  return sum;
}

Perturbed perturb_measure(const DiscreteMeasure& eta, const Direction& a,
                          double t, const MeasureTolerances& tol) {
  require_same_grid(a.size(), eta.size(), "perturb_measure");
  const double sup = a.values.size() ? a.values.cwiseAbs().maxCoeff() : 0.0;
  if (!(std::abs(t) * sup < 1.0))
    throw DomainError("perturb_measure: |t| max|a| must be < 1");
  Vector w = (eta.masses().array() * (1.0 + t * a.values.array())).matrix();
  MeasureKind kind = eta.kind();
  PerturbWarning warning = PerturbWarning::None;
  if (kind == MeasureKind::Probability && t != 0.0 && !is_centered(a, eta, tol)) {
    kind = MeasureKind::PositiveFinite;
    warning = PerturbWarning::DemotedToPositiveFinite;
  }
  if (kind == MeasureKind::Probability) {
    // Exact arithmetic keeps the total at one; renormalize away roundoff only.
    w /= w.sum();
  }
  return {DiscreteMeasure(eta.grid(), std::move(w), kind, tol), warning};
}

std::string measure_to_csv(const DiscreteMeasure& eta) {
  std::string out = "point,mass\n";
  for (std::size_t i = 0; i < eta.size(); ++i) {
    out += format_number(eta.grid()[i]);
    out += ',';
    out += format_number(eta.masses()[static_cast<Eigen::Index>(i)]);
    out += '\n';
  }
  return out;
}

}  // namespace semiinfo
