#pragma once

#include <Eigen/Core>

#include <iosfwd>
#include <vector>

#include "toricq/polytope.hpp"

namespace toricq {

using MultiIndex = std::vector<int>;

/// nu_k: atoms at lambda / k, each of mass 1 / N_k.
struct SpectralMeasure {
  int level = 1;
  Eigen::MatrixXd atoms;  // dim x N_k

  int size() const { return static_cast<int>(atoms.cols()); }
  double atom_mass() const { return 1.0 / static_cast<double>(atoms.cols()); }
};

SpectralMeasure spectral_measure(const WeightSet& W);

/// Normalized Lebesgue measure on P realized as a fan triangulation with a
/// collapsed Gauss-Legendre rule on every simplex. Polynomials of degree
/// <= 2 * order - dim integrate exactly.
class DHMeasure {
 public:
  DHMeasure() = default;
  DHMeasure(const ReflexivePolytope& P, int order);

  int dim() const { return static_cast<int>(points_.rows()); }
  int order() const { return order_; }
  double polytope_volume() const { return volume_; }
  /// dim x Q nodes and their probability weights (sum to 1).
  const Eigen::MatrixXd& points() const { return points_; }
  const Eigen::VectorXd& weights() const { return weights_; }

  template <class F>
  double integrate(F&& f) const {
    double s = 0.0;
    for (int q = 0; q < points_.cols(); ++q) s += weights_[q] * f(points_.col(q));
    return s;
  }

 private:
  int order_ = 0;
  double volume_ = 0.0;
  Eigen::MatrixXd points_;
  Eigen::VectorXd weights_;
};

/// Default rule: exact for every moment of degree <= 4 used in reports.
DHMeasure dh_measure(const ReflexivePolytope& P, int order = 8);

/// x^a at a point.
double monomial(const Eigen::Ref<const Eigen::VectorXd>& x, const MultiIndex& a);

double moment(const SpectralMeasure& nu, const MultiIndex& a);
double moment(const DHMeasure& nu, const MultiIndex& a);

Eigen::VectorXd barycenter(const SpectralMeasure& nu);
Eigen::VectorXd barycenter(const DHMeasure& nu);

/// All multi-indices with 1 <= |a| <= max_degree, graded then lexicographic.
std::vector<MultiIndex> multi_indices(int dim, int max_degree);

struct MomentRow {
  int k = 0;
  MultiIndex index;
  double spectral = 0.0;
  double dh = 0.0;
  double error = 0.0;
};

struct ConvergenceReport {
  std::vector<MomentRow> rows;
  /// max over rows of k * error.
  double fitted_C = 0.0;
  /// Every multi-index has a non-increasing error sequence over k
  /// (strictly decreasing wherever the error is not numerically zero).
  bool monotone = true;
};

/// Errors below this are treated as exact zeros in monotonicity checks.
inline constexpr double kMomentZero = 1e-14;

ConvergenceReport convergence_report(const ReflexivePolytope& P, const std::vector<int>& k_list, int max_degree);

/// Columns: k, multi_index, spectral_moment, dh_moment, abs_error.
void write_convergence_csv(std::ostream& os, const ConvergenceReport& report);

}  // namespace toricq
