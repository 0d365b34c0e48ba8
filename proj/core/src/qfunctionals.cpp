#include "toricq/qfunctionals.hpp"

#include <cmath>
#include <tuple>
#include <ostream>

#include "toricq/format.hpp"

namespace toricq {

const DiagonalInnerProduct& ReferenceProducts::at(int k) const {
  auto it = cache_.find(k);
  if (it == cache_.end()) {
    it = cache_.emplace(k, hilb(*S_, S_->phi0(), HilbMeasure::reference(), GWeight::unit(S_->dim(), k), k)).first;
  }
  return it->second;
}

Geodesic::Geodesic(const DiagonalInnerProduct& H0, const DiagonalInnerProduct& H1) : start(H0) {
  if (H0.level != H1.level || H0.size() != H1.size()) {
    throw Error(ErrorCode::LevelMismatch, "geodesic endpoints must share the level");
  }
  exponents = -(H1.log_entries - H0.log_entries);
}

DiagonalInnerProduct Geodesic::at(double t) const {
  DiagonalInnerProduct out = start;
  out.log_entries -= t * exponents;
  return out;
}

namespace {

Eigen::VectorXd g_on(const DiagonalInnerProduct& H, const GWeight& g) {
  if (g.level != H.level) {
    throw Error(ErrorCode::LevelMismatch,
                "g normalized at level " + std::to_string(g.level) + ", inner product at level " + std::to_string(H.level));
  }
  const Eigen::MatrixXd Y = H.points.cast<double>() / static_cast<double>(H.level);
  Eigen::VectorXd out(H.size());
  for (int a = 0; a < H.size(); ++a) out[a] = g.quantized(Y.col(a));
  return out;
}

}  // namespace

double energy_g_k(const DiagonalInnerProduct& H, const DiagonalInnerProduct& H0, const GWeight& g) {
  if (H.level != H0.level || H.size() != H0.size()) throw Error(ErrorCode::LevelMismatch, "H and H0 differ in level");
  const Eigen::VectorXd gv = g_on(H, g);
  const double kN = static_cast<double>(H.level) * H.size();
  return -gv.dot(H.log_entries - H0.log_entries) / kN;
}

double energy_g_k_slope(const Geodesic& geo, const GWeight& g) {
  const Eigen::VectorXd gv = g_on(geo.start, g);
  const double kN = static_cast<double>(geo.start.level) * geo.start.size();
  return gv.dot(geo.exponents) / kN;
}

Estimate J_g_k(const ReferenceProducts& R, const DiagonalInnerProduct& H, const GWeight& g) {
  const double E = energy_g_k(H, R.at(H.level), g);
  const Estimate L = L_mu0(R.setting(), fs(H));
  return Estimate{-E + L.value, L.error};
}

Estimate D_g_k(const ReferenceProducts& R, const DiagonalInnerProduct& H, const GWeight& g) {
  const double E = energy_g_k(H, R.at(H.level), g);
  const Estimate L = L_functional(R.setting(), fs(H));
  return Estimate{-E + L.value, L.error};
}

DingSlope ding_slope_vs_futaki(const ReferenceProducts& R, int k, const Eigen::VectorXd& xi_V, const Eigen::VectorXd& xi_W,
                               double h) {
  const Setting& S = R.setting();
  const WeightSet& W = S.weights(k);
  const GWeight g = GWeight::make(xi_V, W, S.dh());
  const DiagonalInnerProduct& H0 = R.at(k);
  auto D = [&](double t) { return D_g_k(R, H0.acted(xi_W, t), g).value; };
  DingSlope out;
  out.slope_h = (D(h) - D(-h)) / (2.0 * h);
  const double half = (D(0.5 * h) - D(-0.5 * h)) / h;
  out.slope = (4.0 * half - out.slope_h) / 3.0;
  const double kN = static_cast<double>(k) * W.size();
  out.futaki_scaled = futaki_quantized(W, xi_V, xi_W) / kN;
  out.normalizer = g.normalizer_quantized;
  out.difference = std::abs(out.slope - kDingFutakiSign * out.futaki_scaled / out.normalizer);
  return out;
}

FunctionalConvergenceTable functional_convergence(const ReferenceProducts& R, const TorusMetric& phi, const Eigen::VectorXd& xi,
                               const std::vector<int>& k_list) {
  const Setting& S = R.setting();
  FunctionalConvergenceTable table;
  const GWeight g_cont = GWeight::make(xi, S.weights(1), S.dh());
  const double E = energy_g(S, phi, g_cont).value;
  const double J = J_g(S, phi, g_cont).value;
  const double D = D_g(S, phi, g_cont).value;
  std::map<std::string, double> last;
  for (int k : k_list) {
    const GWeight g = GWeight::make(xi, S.weights(k), S.dh());
    const DiagonalInnerProduct H = hilb(S, phi, HilbMeasure::reference(), GWeight::unit(S.dim(), k), k);
    const double Ek = energy_g_k(H, R.at(k), g);
    const double Jk = J_g_k(R, H, g).value;
    const double Dk = D_g_k(R, H, g).value;
    for (auto [name, q, c] : {std::tuple{"E", Ek, E}, std::tuple{"J", Jk, J}, std::tuple{"D", Dk, D}}) {
      const double err = std::abs(q - c);
      if (auto it = last.find(name); it != last.end() && err > 1e-12 && err > it->second) table.decreasing = false;
      last[name] = err;
      table.rows.push_back(FunctionalConvergenceRow{k, name, q, c, err});
    }
  }
  return table;
}

void write_functional_convergence_csv(std::ostream& os, const FunctionalConvergenceTable& table) {
  os << "k,functional,quantized,continuous,error\n";
  for (const auto& r : table.rows) {
    os << r.k << "," << r.functional << "," << fmt_double(r.quantized) << "," << fmt_double(r.continuous) << ","
       << fmt_double(r.error) << "\n";
  }
}

}  // namespace toricq
