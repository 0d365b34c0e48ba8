#pragma once

#include <Eigen/Core>

#include <iosfwd>

#include "toricq/metric.hpp"
#include "toricq/polytope.hpp"
#include "toricq/vectorfield.hpp"

namespace toricq {

/// Torus-invariant hermitian inner product on H^0(X, -kK_X): the monomial
/// sections s_alpha are orthogonal, so the product is one positive number
/// per lattice point of kP. Entries are stored as logarithms.
struct DiagonalInnerProduct {
  int level = 1;
  IntMatrix points;            // lattice points of kP, lexicographic
  Eigen::VectorXd log_entries;

  int size() const { return static_cast<int>(log_entries.size()); }
  Eigen::VectorXd entries() const { return log_entries.array().exp(); }
  /// c * H
  DiagonalInnerProduct scaled(double c) const;
  /// H_alpha -> e^{-t <xi, alpha>} H_alpha (the action of exp(t W) on sections).
  DiagonalInnerProduct acted(const Eigen::VectorXd& xi, double t) const;

  static DiagonalInnerProduct from_entries(const WeightSet& W, const Eigen::VectorXd& entries);
};

/// The measure inside Hilb: MA(phi_0) of the reference metric, mu_phi of the
/// metric being quantized, or mu_psi of a fixed metric psi.
struct HilbMeasure {
  enum class Kind { Reference, Own, Fixed };
  Kind kind = Kind::Reference;
  TorusMetric psi;

  static HilbMeasure reference() { return {Kind::Reference, {}}; }
  static HilbMeasure own() { return {Kind::Own, {}}; }
  static HilbMeasure fixed(TorusMetric psi) { return {Kind::Fixed, std::move(psi)}; }
};

/// H_alpha = g(alpha/k)^{-1} int e^{<alpha,t> - k phi(t)} rho(t) dt, rho the
/// density of the chosen measure. `error` receives the refinement estimate,
/// `level` the grid level whose result was accepted.
DiagonalInnerProduct hilb(const Setting& S, const TorusMetric& phi, const HilbMeasure& measure, const GWeight& g, int k,
                          double* error = nullptr, int* level = nullptr);
/// Same integral on one fixed grid level (no refinement check).
DiagonalInnerProduct hilb_on_grid(const Setting& S, const TorusMetric& phi, const HilbMeasure& measure, const GWeight& g,
                                  int k, int grid_level);

/// Hilb_{k, mu_phi, g}(phi) and L(phi) from the same grid nodes.
struct HilbOwn {
  DiagonalInnerProduct H;
  double L = 0.0;
};
HilbOwn hilb_own_on_grid(const Setting& S, const TorusMetric& phi, const GWeight& g, int k, int grid_level);

/// FS_k(H) = (1/k) log( (1/N_k) sum_alpha H_alpha^{-1} e^{<alpha, t>} ).
TorusMetric fs(const DiagonalInnerProduct& H);

/// rho(t) = sum_alpha g(alpha/k) e^{<alpha,t> - k phi(t)} / H_alpha with
/// H = Hilb_{k, mu, g = 1}(phi).
class BergmanFunction {
 public:
  BergmanFunction(const Setting& S, TorusMetric phi, HilbMeasure measure, const GWeight& g, int k);

  int level() const { return k_; }
  const DiagonalInnerProduct& inner_product() const { return H_; }
  double value(const Eigen::Ref<const Eigen::VectorXd>& t) const;
  double log_value(const Eigen::Ref<const Eigen::VectorXd>& t) const;
  /// int (1/N_k) rho dmu (should be 1).
  Estimate mass() const;
  /// sup over points of |(1/N_k) rho (dmu/dt) / MA_g(phi)-density - 1|.
  double sup_ratio_deviation(const Eigen::MatrixXd& points) const;

 private:
  const Setting* S_;
  TorusMetric phi_;
  HilbMeasure measure_;
  GWeight g_;
  int k_;
  DiagonalInnerProduct H_;
  Eigen::VectorXd log_g_;  // log g(alpha/k), quantized normalization
};

/// Density of the measure at t (MA(phi_0)/vol, e^{-phi} or e^{-psi}).
double measure_density(const Setting& S, const TorusMetric& phi, const HilbMeasure& measure,
                       const Eigen::Ref<const Eigen::VectorXd>& t);

/// sup over points of |FS_k(Hilb_{k,mu,g}(phi)) - phi - (1/k) log(rho/N_k)|,
/// with rho built from an independently computed Hilb_{k,mu,1}(phi).
double bergman_identity_residual(const Setting& S, const TorusMetric& phi, const HilbMeasure& measure, const GWeight& g, int k,
                            const Eigen::MatrixXd& points);

/// sup over points of |a - b|, optionally modulo an additive constant
/// (then the midrange of a - b is removed).
double sup_difference(const TorusMetric& a, const TorusMetric& b, const Eigen::MatrixXd& points, bool modulo_constant);

/// Columns: x1..xn, H, logH.
void write_inner_product_csv(std::ostream& os, const DiagonalInnerProduct& H);

}  // namespace toricq
