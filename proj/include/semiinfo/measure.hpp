#pragma once

#include "semiinfo/types.hpp"

#include <string>
#include <vector>

namespace semiinfo {

/// Numerical tolerances of the measure layer. Overridable per run.
struct MeasureTolerances {
  double probability_mass = 1e-12;  // |sum w - 1| for Probability measures
  double centered = 1e-10;          // |sum a w| for centered directions
};

/// Ordered support points u_1 < ... < u_m inside [0, tau].
class Grid {
 public:
  Grid(std::vector<double> points, double tau);

  /// m equally spaced points tau/m, 2 tau/m, ..., tau.
  static Grid uniform(std::size_t count, double tau);

  std::size_t size() const { return points_.size(); }
  double tau() const { return tau_; }
  double operator[](std::size_t i) const { return points_[i]; }
  const std::vector<double>& points() const { return points_; }

  /// Largest index i with u_i <= t, or -1 when t < u_1.
  long last_at_or_below(double t) const;

  bool operator==(const Grid& other) const {
    return tau_ == other.tau_ && points_ == other.points_;
  }

 private:
  std::vector<double> points_;
  double tau_;
};

enum class MeasureKind { Probability, PositiveFinite };

/// Point masses on a grid; stands in for the nuisance measure.
class DiscreteMeasure {
 public:
  /// Unit point mass at 0.
  DiscreteMeasure();
  DiscreteMeasure(Grid grid, Vector masses, MeasureKind kind,
                  const MeasureTolerances& tol = {});

  const Grid& grid() const { return grid_; }
  const Vector& masses() const { return masses_; }
  MeasureKind kind() const { return kind_; }
  std::size_t size() const { return grid_.size(); }
  double total_mass() const { return masses_.sum(); }
  bool strictly_positive() const { return (masses_.array() > 0.0).all(); }

 private:
  Grid grid_;
  Vector masses_;
  MeasureKind kind_;
};

/// Values of a nuisance direction a(u_i) on the grid.
struct Direction {
  Vector values;
  bool centered = false;

  static Direction zeros(std::size_t m) { return {Vector::Zero(m), false}; }
  static Direction ones(std::size_t m) { return {Vector::Ones(m), false}; }
  static Direction unit(std::size_t m, std::size_t i) {
    Direction d{Vector::Zero(m), false};
    d.values[i] = 1.0;
    return d;
  }
  std::size_t size() const { return values.size(); }
};

double inner_product(const Direction& a, const Direction& b,
                     const DiscreteMeasure& eta);

/// Subtracts the eta-mean; requires a probability measure.
Direction center(const Direction& a, const DiscreteMeasure& eta);

bool is_centered(const Direction& a, const DiscreteMeasure& eta,
                 const MeasureTolerances& tol = {});

/// Sum of a_i w_i over u_i <= t.
double cumulative(const Direction& a, const DiscreteMeasure& eta, double t);

/// Warning codes attached to perturbations.
enum class PerturbWarning { None, DemotedToPositiveFinite };

struct Perturbed {
  DiscreteMeasure measure;
  PerturbWarning warning = PerturbWarning::None;
};

/// Masses w_i (1 + t a_i). Probability kind is kept only for centered a.
Perturbed perturb_measure(const DiscreteMeasure& eta, const Direction& a,
                          double t, const MeasureTolerances& tol = {});

/// CSV with header "point,mass".
std::string measure_to_csv(const DiscreteMeasure& eta);

}  // namespace semiinfo
