// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include "oracles.hpp"
#include "toricq/balance.hpp"

using namespace toricq;

namespace {

const std::vector<std::string> kCatalog = {"p1", "p1xp1", "p2", "dp6", "dp1"};

struct Env {
  std::unique_ptr<Setting> S;
  std::unique_ptr<ReferenceProducts> R;
};

Env& env(const std::string& name) {
  static std::map<std::string, Env> cache;
  auto& e = cache[name];
  if (!e.S) {
    e.S = std::make_unique<Setting>(load_polytope(oracle::catalog(name)));
    e.R = std::make_unique<ReferenceProducts>(*e.S);
  }
  return e;
}

/// Collects failed requirements; the first few are reported.
class Check {
 public:
  void require(bool ok, const std::string& what) {
    ++count_;
    if (!ok) failures_.push_back(what);
  }
  void note(const std::string& s) { notes_ += (notes_.empty() ? "" : "; ") + s; }
  bool ok() const { return failures_.empty(); }
  std::string summary() const {
    std::ostringstream os;
    if (ok()) {
      os << count_ << " checks";
    } else {
      os << failures_.size() << "/" << count_ << " failed:";
      for (std::size_t i = 0; i < std::min<std::size_t>(failures_.size(), 4); ++i) os << " [" << failures_[i] << "]";
    }
    if (!notes_.empty()) os << "; " << notes_;
    return os.str();
  }

 private:
  int count_ = 0;
  std::vector<std::string> failures_;
  std::string notes_;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

GWeight g_of(const Setting& S, int k) {
  const auto& W = S.weights(k);
  return GWeight::make(minimize_Fk(W).V.xi, W, S.dh());
}

TorusMetric phi_fs() {
  IntMatrix s(1, 3);
  s << -1, 0, 1;
  return TorusMetric(1, s, Eigen::Vector3d(0.0, std::log(2.0), 0.0));
}

void criterion1(Check& c) {
  for (const auto& name : kCatalog) {
    const auto& P = env(name).S->polytope();
    for (int k = 1; k <= 10; ++k) {
      const long n = lattice_points(P, k).size();
      c.require(n == oracle::brute_count(oracle::normals_of(name), k), name + " k=" + std::to_string(k));
    }
  }
  c.require(lattice_points(env("p2").S->polytope(), 1).size() == 10, "P2 N_1 = 10");
  c.require(lattice_points(env("dp1").S->polytope(), 1).size() == 9, "Bl1P2 N_1 = 9");
}

void criterion2(Check& c) {
  const auto& P1 = env("p1").S->polytope();
  for (int k = 1; k <= 64; k *= 2) {
    const double m = moment(spectral_measure(lattice_points(P1, k)), {2});
    c.require(std::abs(m - (k + 1.0) / (3.0 * k)) <= 1e-12, "P1 second moment k=" + std::to_string(k));
  }
  double worst_ratio = 0.0;
  for (const auto& name : kCatalog) {
    const auto& normals = oracle::normals_of(name);
    const int n = env(name).S->dim();
    Eigen::VectorXd bary(n);
    if (n == 1) {
      bary[0] = oracle::average(normals, [](double x, double) { return x; });
    } else {
      const auto v = oracle::polygon(normals);
      const auto cen = oracle::shoelace_centroid(v);
      bary << cen[0], cen[1];
    }
    // C is the smallest constant valid over the whole range; the rate itself
    // is checked by requiring each doubling of k to (at least) roughly halve the error.
    std::vector<double> errs;
    for (int k : {2, 4, 8, 16})
      errs.push_back((barycenter(spectral_measure(lattice_points(env(name).S->polytope(), k))) - bary).norm());
    double C = 0.0;
    for (std::size_t i = 0; i < errs.size(); ++i) C = std::max(C, (2 << i) * errs[i]);
    for (std::size_t i = 0; i < errs.size(); ++i) {
      c.require(errs[i] <= C / (2 << i), name + " first moment bound");
      if (i == 0) continue;
      if (errs[i - 1] > kMomentZero) {
        const double ratio = errs[i] / errs[i - 1];
        worst_ratio = std::max(worst_ratio, ratio);
        c.require(ratio <= 0.6, name + fmt(" first moment halving k=%g ratio=%.3f", 2 << i, ratio));
      } else {
        c.require(errs[i] <= kMomentZero, name + " first moment stays zero");
      }
    }
    if (C > kMomentZero) c.note(name + fmt(" C=%.4f", C));
  }
  c.note(fmt("worst err(2k)/err(k) = %.3f", worst_ratio));
}

void criterion3(Check& c) {
  for (const auto& name : kCatalog) {
    const auto& S = *env(name).S;
    for (int k : {1, 2, 4, 8, 16}) {
      const auto& W = S.weights(k);
      const auto r = minimize_Fk(W);
      if (name != "dp1") c.require(r.V.xi.norm() <= 1e-10, name + " |V_k| k=" + std::to_string(k));
      c.require(futaki_residual(W, r.V.xi) <= 1e-10 * k * W.size(), name + " Futaki residual k=" + std::to_string(k));
    }
  }
}

void criterion4(Check& c) {
  const auto& S = *env("dp1").S;
  const auto table = vk_convergence(S.polytope(), {1, 2, 4, 8, 16});
  double prev = 1e300;
  for (const auto& row : table.rows) {
    c.require(std::abs(row.V_k[0] - row.V_k[1]) <= 1e-12, "equal components k=" + std::to_string(row.k));
    if (row.k >= 2) {
      c.require(row.distance < prev, fmt("distance decreasing at k=%g (%.3e)", row.k, row.distance));
      prev = row.distance;
    }
  }
  c.require(table.barycenter_residual <= 1e-10, fmt("barycenter residual %.3e", table.barycenter_residual));
  // V_KS = (s, s) with int (x + y) e^{s(x + y)} = 0
  const auto& normals = oracle::normals_of("dp1");
  const double s = oracle::bisection(
      [&](double s) { return oracle::average(normals, [s](double x, double y) { return (x + y) * std::exp(s * (x + y)); }); },
      -3.0, 0.0);
  const double d = (table.V_KS - Eigen::Vector2d(s, s)).cwiseAbs().maxCoeff();
  c.require(d <= 1e-8, fmt("bisection oracle diff %.3e", d));
  c.note(fmt("V_KS = (%.10f, %.10f), |V_16 - V_KS| = %.3e", table.V_KS[0], table.V_KS[1], prev));
}

void criterion5(Check& c) {
  for (const auto& name : kCatalog) {
    const auto& S = *env(name).S;
    const int n = S.dim();
    const auto& normals = oracle::normals_of(name);
    const Eigen::VectorXd vks = minimize_F(S.dh()).V.xi;
    Eigen::VectorXd e1 = Eigen::VectorXd::Zero(n);
    e1[0] = 1.0;
    for (const Eigen::VectorXd& xi : {vks, Eigen::VectorXd(Eigen::VectorXd::Zero(n)), e1}) {
      const double a = xi[0], b = n > 1 ? xi[1] : 0.0;
      const double F = oracle::average(normals, [&](double x, double y) { return std::exp(a * x + b * y); });
      double prev = 1e300;
      for (int k : {1, 2, 4, 8, 16}) {
        const auto& W = S.weights(k);
        const double err = std::abs(evaluate_Fk(W, xi).value / (k * W.size()) - F);
        if (err > 1e-13) c.require(err < prev, name + fmt(" xi=(%g,%g) k=%g", a, b, k));
        prev = err;
      }
    }
  }
  const auto& W = env("p1").S->weights(16);
  const double q = evaluate_Fk(W, Eigen::VectorXd::Ones(1)).value / (16.0 * W.size());
  c.require(std::abs(q - std::sinh(1.0)) <= 2e-2, "P1 sinh(1)");
  c.note(fmt("P1 k=16: %.12f vs sinh(1) = %.12f", q, std::sinh(1.0)));
}

void criterion6(Check& c) {
  double worst311 = 0.0, worst_mass = 0.0;
  for (const auto& name : kCatalog) {
    const auto& S = *env(name).S;
    const double tol = S.quad().spec().tolerance;
    const Eigen::MatrixXd pts = sample_grid(S.dim(), -3.0, 3.0, S.dim() == 1 ? 25 : 9);
    const TorusMetric phi = fs(hilb(S, S.phi0(), HilbMeasure::reference(), GWeight::unit(S.dim(), 2), 2));
    for (int k = 1; k <= 4; ++k) {
      const auto g = g_of(S, k);
      for (const auto& measure : {HilbMeasure::reference(), HilbMeasure::own()}) {
        for (const auto& metric : {S.phi0(), phi}) {
          const double r = bergman_identity_residual(S, metric, measure, g, k, pts);
          worst311 = std::max(worst311, r);
          c.require(r <= 10.0 * tol, name + fmt(" Bergman identity k=%g r=%.3e", k, r));
        }
        const double m = std::abs(BergmanFunction(S, phi, measure, g, k).mass().value - 1.0);
        worst_mass = std::max(worst_mass, m);
        c.require(m <= 1e-10, name + " Bergman mass");
      }
    }
  }
  for (const std::string name : {"p1", "dp1"}) {
    const auto& S = *env(name).S;
    const int n = S.dim(), k = 2;
    const auto g = g_of(S, k);
    const TorusMetric phi = S.phi0().translated(Eigen::VectorXd::LinSpaced(n, 0.2, -0.4));
    const double s = 0.37;
    const auto own = hilb(S, phi, HilbMeasure::own(), g, k);
    const auto own_s = hilb(S, phi.shifted(s), HilbMeasure::own(), g, k);
    c.require(((own_s.log_entries - own.log_entries).array() + s * (k + 1)).abs().maxCoeff() <= 1e-12, name + " Hilb own shift");
    const auto ref = hilb(S, phi, HilbMeasure::reference(), g, k);
    const auto ref_s = hilb(S, phi.shifted(s), HilbMeasure::reference(), g, k);
    c.require(((ref_s.log_entries - ref.log_entries).array() + s * k).abs().maxCoeff() <= 1e-12, name + " Hilb reference shift");
    const Eigen::MatrixXd pts = sample_grid(n, -3.0, 3.0, 7);
    const auto a = fs(own), b = fs(own.scaled(5.5));
    double d = 0.0;
    for (int i = 0; i < pts.cols(); ++i) d = std::max(d, std::abs(b.value(pts.col(i)) - a.value(pts.col(i)) + std::log(5.5) / k));
    c.require(d <= 1e-12, name + " FS scaling");
    const auto gc = GWeight::make(Eigen::VectorXd::Constant(n, -0.3), S.weights(1), S.dh());
    c.require(std::abs(energy_g(S, phi.shifted(s), gc).value - energy_g(S, phi, gc).value - s) <= 1e-12, name + " E_g shift");
    c.require(std::abs(J_g(S, phi.shifted(s), gc).value - J_g(S, phi, gc).value) <= 1e-12, name + " J_g shift");
    c.require(std::abs(D_g(S, phi.shifted(s), gc).value - D_g(S, phi, gc).value) <= 1e-12, name + " D_g shift");
  }
  c.note(fmt("max Bergman-identity residual %.2e, max |mass - 1| %.2e", worst311, worst_mass));
}

void criterion7(Check& c) {
  const auto& S = *env("p1").S;
  const auto H = hilb(S, phi_fs(), HilbMeasure::own(), GWeight::unit(1, 1), 1);
  const double dH = (H.entries() - Eigen::Vector3d(1.0 / 3.0, 1.0 / 6.0, 1.0 / 3.0)).cwiseAbs().maxCoeff();
  c.require(dH <= 1e-9, fmt("Hilb entries diff %.3e", dH));
  const BergmanFunction rho(S, phi_fs(), HilbMeasure::fixed(phi_fs()), GWeight::unit(1, 1), 1);
  double drho = 0.0, dfs = 0.0;
  const TorusMetric back = fs(H);
  for (int i = 0; i <= 160; ++i) {
    const double t = -8.0 + 0.1 * i;
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, t);
    drho = std::max(drho, std::abs(rho.value(x) - 3.0));
    dfs = std::max(dfs, std::abs(back.value(x) - oracle::phi_fs(t)));
  }
  c.require(drho <= 1e-8, fmt("rho - 3 = %.3e", drho));
  c.require(dfs <= 1e-9, fmt("FS(Hilb(phi_FS)) - phi_FS = %.3e", dfs));
  c.note(fmt("|H - (1/3,1/6,1/3)| = %.1e, |rho - 3| = %.1e, |FS Hilb phi - phi| = %.1e", dH, drho, dfs));
}

void criterion8(Check& c) {
  for (const auto& name : kCatalog) {
    auto& e = env(name);
    for (int k : {1, 2, 4, 8}) {
      const auto r = balanced_metric(*e.R, k);
      c.require(r.converged && r.final_residual <= 1e-8, name + fmt(" k=%g residual %.3e", k, r.final_residual));
    }
  }
  // P^1: phi_k = phi_FS modulo constants and translations
  auto& p1 = env("p1");
  double worst = 0.0;
  for (int k : {1, 2, 4, 8}) {
    const auto r = balanced_metric(*p1.R, k);
    const auto sup_at = [&](double s) {
      double lo = 1e300, hi = -1e300;
      for (int i = 0; i <= 400; ++i) {
        const double t = -10.0 + 0.05 * i;
        const double d = r.potential.value(Eigen::VectorXd::Constant(1, t)) - oracle::phi_fs(t + s);
        lo = std::min(lo, d);
        hi = std::max(hi, d);
      }
      return 0.5 * (hi - lo);
    };
    const double d = sup_at(oracle::golden_section(sup_at, -2.0, 2.0, 1e-10));
    worst = std::max(worst, d);
    c.require(d <= 1e-6, fmt("P1 k=%g distance to phi_FS %.3e", k, d));
  }
  auto& dp1 = env("dp1");
  const auto study = soliton_convergence_study(*dp1.R, {2, 4, 8, 16}, sample_grid(2, -4.0, 4.0, 33));
  std::ostringstream cauchy, ding;
  for (const auto& row : study.rows) {
    c.require(row.converged, "Bl1P2 k=" + std::to_string(row.k) + " converged");
    cauchy << (row.k == 2 ? "" : " ") << fmt("%.3e", row.cauchy);
    ding << (row.k == 2 ? "" : " ") << fmt("%.6e", row.ding_VKS);
  }
  c.require(study.cauchy_decreasing, "Bl1P2 Cauchy differences strictly decreasing: " + cauchy.str());
  c.require(study.ding_nonincreasing, "Bl1P2 D_{g_VKS}(phi_k) non-increasing: " + ding.str());
  c.note(fmt("P1 max distance %.1e", worst) + "; Bl1P2 Cauchy " + cauchy.str() + "; Ding " + ding.str());
}

void criterion9(Check& c) {
  const double h = 1e-5;
  const auto fd_ok = [](double fd, double exact) { return std::abs(fd - exact) <= 1e-6 * std::max(1.0, std::abs(exact)); };
  for (const auto& name : kCatalog) {
    const auto& S = *env(name).S;
    const int n = S.dim();
    const Eigen::VectorXd xi = Eigen::VectorXd::LinSpaced(n, 0.3, -0.7);
    // F_k and F
    const auto& W = S.weights(4);
    const auto Fk = evaluate_Fk(W, xi);
    const auto F = evaluate_F(S.dh(), xi);
    for (int i = 0; i < n; ++i) {
      c.require(fd_ok(oracle::central_diff([&](const Eigen::VectorXd& x) { return evaluate_Fk(W, x).value; }, xi, i, h),
                      Fk.gradient[i]),
                name + " grad F_k");
      c.require(fd_ok(oracle::central_diff([&](const Eigen::VectorXd& x) { return evaluate_F(S.dh(), x).value; }, xi, i, h),
                      F.gradient[i]),
                name + " grad F");
      for (int j = 0; j < n; ++j) {
        c.require(fd_ok(oracle::central_diff([&](const Eigen::VectorXd& x) { return evaluate_Fk(W, x).gradient[j]; }, xi, i, h),
                        Fk.hessian(i, j)),
                  name + " hess F_k");
        c.require(fd_ok(oracle::central_diff([&](const Eigen::VectorXd& x) { return evaluate_F(S.dh(), x).gradient[j]; }, xi, i, h),
                        F.hessian(i, j)),
                  name + " hess F");
      }
    }
    // potentials
    const TorusMetric phi = fs(hilb(S, S.phi0(), HilbMeasure::reference(), GWeight::unit(n, 2), 2));
    for (const auto& m : {S.phi0(), phi}) {
      for (const Eigen::VectorXd& t : {Eigen::VectorXd(xi), Eigen::VectorXd(-3.0 * xi)}) {
        const auto grad = m.gradient(t);
        const auto hess = m.hessian(t);
        for (int i = 0; i < n; ++i) {
          c.require(fd_ok(oracle::central_diff([&](const Eigen::VectorXd& x) { return m.value(x); }, t, i, h), grad[i]),
                    name + " grad phi");
          for (int j = 0; j < n; ++j)
            c.require(fd_ok(oracle::central_diff([&](const Eigen::VectorXd& x) { return m.gradient(x)[j]; }, t, i, h),
                            hess(i, j)),
                      name + " hess phi");
        }
      }
      const double tol = S.quad().spec().tolerance;
      c.require(mu_barycenter_residual(S, m).value <= 10.0 * tol, name + " mu_phi barycenter");
      const Estimate mass = ma_mass(S, m);
      c.require(mass.error <= tol && std::abs(mass.value - 1.0) <= 1e-10, name + " MA mass stable under refinement");
      c.require(mu_mass(S, m).error <= tol, name + " mu mass stable under refinement");
    }
    for (int k : {1, 4}) {
      double err = 1.0;
      hilb(S, S.phi0(), HilbMeasure::own(), g_of(S, k), k, &err);
      c.require(err <= S.quad().spec().tolerance, name + " Hilb stable under refinement");
    }
  }
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void(Check&)>>> criteria = {
      {"lattice point counts", criterion1},       {"spectral moments", criterion2},
      {"V_k and Futaki residual", criterion3},    {"Bl1P2 soliton vector", criterion4},
      {"F_k / (k N_k) -> F", criterion5},          {"Bergman identity, mass and scaling", criterion6},
      {"P1 Fubini-Study", criterion7},             {"balanced metrics", criterion8},
      {"derivatives, Legendre identity, refinement", criterion9},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[i].second(c);
    } catch (const std::exception& e) {
      c.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %zu (%s): %s  %s  [%.1fs]\n", i + 1, criteria[i].first, c.ok() ? "PASS" : "FAIL",
                c.summary().c_str(), secs);
    std::fflush(stdout);
    failed += !c.ok();
  }
  return failed == 0 ? 0 : 1;
}
