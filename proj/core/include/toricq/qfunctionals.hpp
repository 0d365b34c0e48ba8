#pragma once

#include <Eigen/Core>

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "toricq/metric.hpp"
#include "toricq/quantization.hpp"

namespace toricq {

/// H_0 = Hilb_{k, mu_0}(phi_0) per level, computed on first use.
class ReferenceProducts {
 public:
  explicit ReferenceProducts(const Setting& S) : S_(&S) {}
  const DiagonalInnerProduct& at(int k) const;
  const Setting& setting() const { return *S_; }

 private:
  const Setting* S_;
  mutable std::map<int, DiagonalInnerProduct> cache_;
};

/// H_t = e^{-mu t} H_0 entrywise with mu = -log(H_1 / H_0).
struct Geodesic {
  DiagonalInnerProduct start;
  Eigen::VectorXd exponents;

  Geodesic(const DiagonalInnerProduct& H0, const DiagonalInnerProduct& H1);
  DiagonalInnerProduct at(double t) const;
};

/// E^{(k)}_g(H) = sum_alpha g(alpha/k) (-1/(k N_k)) log(H_alpha / H0_alpha).
/// Throws LevelMismatch unless g, H and H0 share the level.
double energy_g_k(const DiagonalInnerProduct& H, const DiagonalInnerProduct& H0, const GWeight& g);
/// d/dt E^{(k)}_g(H_t) along a geodesic: (1/(k N_k)) sum g(alpha/k) mu_alpha.
double energy_g_k_slope(const Geodesic& geo, const GWeight& g);

/// J^{(k)}_g = -E^{(k)}_g + L_{mu_0}(FS_k(H))
Estimate J_g_k(const ReferenceProducts& R, const DiagonalInnerProduct& H, const GWeight& g);
/// D^{(k)}_g = -E^{(k)}_g + L(FS_k(H))
Estimate D_g_k(const ReferenceProducts& R, const DiagonalInnerProduct& H, const GWeight& g);

/// Central-difference slope of t -> D^{(k)}_{g_V}(exp(tW)^* H_0) at t = 0
/// against Fut_{V,k}(W) / (k N_k).
struct DingSlope {
  double slope = 0.0;         // Richardson-combined central difference
  double slope_h = 0.0;       // plain central difference at h
  double futaki_scaled = 0.0;  // Fut_{V,k}(W) / (k N_k)
  double normalizer = 1.0;    // Z_k = sum_alpha e^{<V, alpha/k>} / N_k
  double difference = 0.0;    // |slope - futaki_scaled / Z_k|
};

/// Sign of the pairing slope = kDingFutakiSign * Fut / (k N_k Z_k), fixed by the Bl1P2 probe.
inline constexpr double kDingFutakiSign = 1.0;

DingSlope ding_slope_vs_futaki(const ReferenceProducts& R, int k, const Eigen::VectorXd& xi_V, const Eigen::VectorXd& xi_W,
                               double h = 1e-5);

struct FunctionalConvergenceRow {
  int k = 0;
  std::string functional;  // "E", "J" or "D"
  double quantized = 0.0;
  double continuous = 0.0;
  double error = 0.0;
};

struct FunctionalConvergenceTable {
  std::vector<FunctionalConvergenceRow> rows;
  /// Per functional, errors are non-increasing over the listed levels
  /// (errors below 1e-12 count as zero).
  bool decreasing = true;
};

/// Quantized functionals at Hilb_{k, mu_0}(phi) against their continuous
/// counterparts, g = g_xi normalized per level.
FunctionalConvergenceTable functional_convergence(const ReferenceProducts& R, const TorusMetric& phi, const Eigen::VectorXd& xi,
                               const std::vector<int>& k_list);

/// Columns: k, functional, quantized, continuous, error.
void write_functional_convergence_csv(std::ostream& os, const FunctionalConvergenceTable& table);

}  // namespace toricq
