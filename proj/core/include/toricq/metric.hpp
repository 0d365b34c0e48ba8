#pragma once

#include <Eigen/Core>

#include <iosfwd>
#include <map>
#include <string>
#include <memory>
#include <vector>

#include "toricq/measures.hpp"
#include "toricq/polytope.hpp"
#include "toricq/quadrature.hpp"
#include "toricq/vectorfield.hpp"

namespace toricq {

/// Torus-invariant metric on -K_X as a convex potential on R^n:
///   phi(t) = (1/m) log( sum_alpha c_alpha e^{<alpha, t>} ) + constant,
/// alpha ranging over a lattice support in mP. Coefficients are stored as
/// logarithms with their maximum folded into the constant, so that rescaling
/// all coefficients changes nothing but the constant.
class TorusMetric {
 public:
  TorusMetric() = default;
  TorusMetric(int level, IntMatrix support, Eigen::VectorXd log_coefficients, double constant = 0.0);

  int level() const { return level_; }
  int dim() const { return static_cast<int>(support_.rows()); }
  const IntMatrix& support() const { return support_; }
  const Eigen::VectorXd& log_coefficients() const { return log_coeffs_; }
  Eigen::VectorXd coefficients() const { return log_coeffs_.array().exp(); }
  double constant() const { return constant_; }

  double value(const Eigen::Ref<const Eigen::VectorXd>& t) const;
  Eigen::VectorXd gradient(const Eigen::Ref<const Eigen::VectorXd>& t) const;
  /// Closed form (1/m) Cov_p(alpha), p the softmax weights at t.
  Eigen::MatrixXd hessian(const Eigen::Ref<const Eigen::VectorXd>& t) const;

  /// phi + c
  TorusMetric shifted(double c) const;
  /// t -> phi(A^T t) for a lattice symmetry x -> A x of P.
  TorusMetric pulled_back(const IntMatrix& A) const;
  /// t -> phi(t + v)
  TorusMetric translated(const Eigen::VectorXd& v) const;
  /// Same potential with the constant set to zero.
  TorusMetric without_constant() const { return shifted(-constant_); }

 private:
  int level_ = 1;
  IntMatrix support_;
  Eigen::VectorXd log_coeffs_;
  double constant_ = 0.0;
};

/// Values (and optionally derivatives) of a metric on every node of a grid.
struct MetricField {
  Eigen::VectorXd value;  // Q
  Eigen::MatrixXd grad;   // dim x Q (empty unless requested)
  Eigen::MatrixXd hess;   // dim*dim x Q, column-major per node (empty unless requested)

  double det_hessian(int q, int dim) const;
};

/// derivatives: 0 = values only, 1 = + gradient, 2 = + Hessian.
MetricField evaluate_on_grid(const TorusMetric& phi, const QuadGrid& grid, int derivatives);

/// Level-1 log-sum-exp over the lattice points of P with unit coefficients,
/// constant chosen so that L(phi_0) = 0.
TorusMetric reference_metric(const ReflexivePolytope& P, const QuadratureEngine& quad);

/// Bundles what every continuous and quantized functional needs: the polytope,
/// the Duistermaat-Heckman rule, the R^n quadrature and the reference metric.
/// Caches weight sets per level; not safe for concurrent mutation.
class Setting {
 public:
  explicit Setting(ReflexivePolytope P, QuadratureSpec spec = {});

  const ReflexivePolytope& polytope() const { return P_; }
  int dim() const { return P_.dim(); }
  const DHMeasure& dh() const { return dh_; }
  const QuadratureEngine& quad() const { return *quad_; }
  const TorusMetric& phi0() const { return phi0_; }
  const WeightSet& weights(int k) const;
  /// det D^2 phi_0 / vol(P) on the nodes of a grid (the density of mu_0 = MA(phi_0)).
  const Eigen::VectorXd& mu0_density(const QuadGrid& grid) const;
  const MetricField& phi0_field(const QuadGrid& grid) const;

 private:
  ReflexivePolytope P_;
  DHMeasure dh_;
  std::unique_ptr<QuadratureEngine> quad_;
  TorusMetric phi0_;
  mutable std::map<int, WeightSet> weights_;
  mutable std::map<int, MetricField> phi0_fields_;
  mutable std::map<int, Eigen::VectorXd> mu0_;
};

/// A number together with its refinement error estimate.
struct Estimate {
  double value = 0.0;
  double error = 0.0;
};

/// int det D^2 phi dt / vol(P) (should be 1).
Estimate ma_mass(const Setting& S, const TorusMetric& phi);
/// int g(grad phi) det D^2 phi dt / vol(P), continuous g normalization (should be 1).
Estimate ma_g_mass(const Setting& S, const TorusMetric& phi, const GWeight& g);
/// Barycenter of the pushforward of MA(phi) under grad phi.
Eigen::VectorXd ma_pushforward_barycenter(const Setting& S, const TorusMetric& phi);

/// int e^{-phi} dt
Estimate mu_mass(const Setting& S, const TorusMetric& phi);
/// L(phi) = -log int e^{-phi} dt. Throws DivergentIntegral when not finite.
Estimate L_functional(const Setting& S, const TorusMetric& phi);
/// L_{mu_0}(phi) = int (phi - phi_0) dmu_0.
Estimate L_mu0(const Setting& S, const TorusMetric& phi);
/// |int grad phi e^{-phi} dt| / int e^{-phi} dt.
Estimate mu_barycenter_residual(const Setting& S, const TorusMetric& phi);

struct EnergyOptions {
  int path_nodes = 16;  // Gauss nodes in s, doubled until stable
  int max_doublings = 3;
};

/// E_g(to) - E_g(from): int_0^1 int (to - from) MA_g(s to + (1-s) from) ds along
/// the straight segment, MA_g normalized to unit mass on the grid.
Estimate energy_increment(const Setting& S, const TorusMetric& from, const TorusMetric& to, const GWeight& g,
                          const EnergyOptions& opts = {});
/// E_g(phi), normalized by E_g(phi_0) = 0.
Estimate energy_g(const Setting& S, const TorusMetric& phi, const GWeight& g, const EnergyOptions& opts = {});
/// J_g = -E_g + L_{mu_0}
Estimate J_g(const Setting& S, const TorusMetric& phi, const GWeight& g, const EnergyOptions& opts = {});
/// D_g = -E_g + L
Estimate D_g(const Setting& S, const TorusMetric& phi, const GWeight& g, const EnergyOptions& opts = {});

/// Uniform sample grid [lo, hi]^n with npts per axis, as columns (last axis fastest).
Eigen::MatrixXd sample_grid(int dim, double lo, double hi, int npts);

/// Potential export over sample_grid: header t1..tn,phi,dphi_1..dphi_n.
void write_metric_grid_csv(std::ostream& os, const TorusMetric& phi, const Eigen::MatrixXd& points);

/// Import: { "level": m, "coefficients": [c per lattice point of mP, lexicographic], "constant": optional };
/// "log_coefficients" may replace "coefficients". Export writes level, support, log_coefficients, constant.
TorusMetric metric_from_json(const std::string& text, const ReflexivePolytope& P);
std::string metric_to_json(const TorusMetric& phi);

}  // namespace toricq
