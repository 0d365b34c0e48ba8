#include "toricq/metric.hpp"

#include <Eigen/LU>
#include <nlohmann/json.hpp>

#include <cmath>
#include <ostream>

#include "toricq/format.hpp"
#include "toricq/simplices.hpp"

namespace toricq {

TorusMetric::TorusMetric(int level, IntMatrix support, Eigen::VectorXd log_coefficients, double constant)
    : level_(level), support_(std::move(support)), log_coeffs_(std::move(log_coefficients)), constant_(constant) {
  if (level_ < 1 || support_.cols() != log_coeffs_.size() || support_.cols() == 0) {
    throw Error(ErrorCode::MalformedInput, "metric needs level >= 1 and one coefficient per support point");
  }
  if (!log_coeffs_.allFinite()) throw Error(ErrorCode::MalformedInput, "metric coefficients must be positive and finite");
  const double top = log_coeffs_.maxCoeff();
  log_coeffs_.array() -= top;
  constant_ += top / level_;
}

namespace {

// Softmax weights p_alpha at t and log of the partition sum.
double softmax(const TorusMetric& phi, const Eigen::Ref<const Eigen::VectorXd>& t, Eigen::VectorXd& p) {
  p = phi.support().cast<double>().transpose() * t + phi.log_coefficients();
  const double top = p.maxCoeff();
  p = (p.array() - top).exp();
  const double s = p.sum();
  p /= s;
  return top + std::log(s);
}

}  // namespace

double TorusMetric::value(const Eigen::Ref<const Eigen::VectorXd>& t) const {
  Eigen::VectorXd p;
  return softmax(*this, t, p) / level_ + constant_;
}

Eigen::VectorXd TorusMetric::gradient(const Eigen::Ref<const Eigen::VectorXd>& t) const {
  Eigen::VectorXd p;
  softmax(*this, t, p);
  return support_.cast<double>() * p / level_;
}

Eigen::MatrixXd TorusMetric::hessian(const Eigen::Ref<const Eigen::VectorXd>& t) const {
  Eigen::VectorXd p;
  softmax(*this, t, p);
  const Eigen::MatrixXd A = support_.cast<double>();
  const Eigen::VectorXd mean = A * p;
  const Eigen::MatrixXd centered = A.colwise() - mean;
  return centered * p.asDiagonal() * centered.transpose() / level_;
}

TorusMetric TorusMetric::shifted(double c) const {
  TorusMetric out = *this;
  out.constant_ += c;
  return out;
}

TorusMetric TorusMetric::pulled_back(const IntMatrix& A) const {
  return TorusMetric(level_, A * support_, log_coeffs_, constant_);
}

TorusMetric TorusMetric::translated(const Eigen::VectorXd& v) const {
  return TorusMetric(level_, support_, log_coeffs_ + support_.cast<double>().transpose() * v, constant_);
}

double MetricField::det_hessian(int q, int dim) const {
  const double* h = hess.col(q).data();
  switch (dim) {
    case 1:
      return h[0];
    case 2:
      return h[0] * h[3] - h[1] * h[2];
    default:
      return Eigen::Map<const Eigen::MatrixXd>(h, dim, dim).determinant();
  }
}

MetricField evaluate_on_grid(const TorusMetric& phi, const QuadGrid& grid, int derivatives) {
  const int n = grid.dim;
  const int Q = grid.size();
  const ExpBasis basis(grid, phi.support());
  const int M = static_cast<int>(phi.support().cols());
  const double m = phi.level();

  // Coefficient tensors on the box: c, c * alpha_i, c * alpha_i * alpha_j.
  auto tensor = [&](auto&& factor) {
    LongVector c(M, 0.0L);
    for (int a = 0; a < M; ++a) {
      const IntVector alpha = phi.support().col(a);
      c[a] = std::exp(static_cast<long double>(phi.log_coefficients()[a])) * factor(alpha);
    }
    return basis.synthesize(c);
  };
  const LongVector S = tensor([](const IntVector&) { return 1.0L; });

  MetricField f;
  f.value.resize(Q);
  for (int q = 0; q < Q; ++q) f.value[q] = static_cast<double>(std::log(S[q])) / m + phi.constant();
  if (derivatives < 1) return f;

  std::vector<LongVector> G(n);
  for (int i = 0; i < n; ++i) G[i] = tensor([i](const IntVector& a) { return static_cast<long double>(a[i]); });
  f.grad.resize(n, Q);
  for (int q = 0; q < Q; ++q) {
    for (int i = 0; i < n; ++i) f.grad(i, q) = static_cast<double>(G[i][q] / S[q]) / m;
  }
  if (derivatives < 2) return f;

  f.hess.resize(n * n, Q);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const LongVector Hij =
          tensor([i, j](const IntVector& a) { return static_cast<long double>(a[i]) * static_cast<long double>(a[j]); });
      for (int q = 0; q < Q; ++q) {
        const long double mi = G[i][q] / S[q];
        const long double mj = G[j][q] / S[q];
        const double v = static_cast<double>(Hij[q] / S[q] - mi * mj) / m;
        f.hess(i * n + j, q) = v;
        f.hess(j * n + i, q) = v;
      }
    }
  }
  return f;
}

namespace {

double mass_e_minus_phi(const MetricField& f, const QuadGrid& grid) {
  double s = 0.0;
  for (int q = 0; q < grid.size(); ++q) {
    if (grid.w[q] != 0.0) s += grid.w[q] * std::exp(-f.value[q]);
  }
  return s;
}

}  // namespace

TorusMetric reference_metric(const ReflexivePolytope& P, const QuadratureEngine& quad) {
  const WeightSet W = lattice_points(P, 1);
  const TorusMetric bare(1, W.points, Eigen::VectorXd::Zero(W.size()), 0.0);
  const Refined r = quad.refine([&](const QuadGrid& g) {
    return Eigen::VectorXd::Constant(1, mass_e_minus_phi(evaluate_on_grid(bare.without_constant(), g, 0), g));
  });
  // int e^{-(phi + c)} = e^{-c} * mass, so c = log(mass) - constant folded in by the constructor.
  return bare.without_constant().shifted(std::log(r.values[0]));
}

Setting::Setting(ReflexivePolytope P, QuadratureSpec spec)
    : P_(std::move(P)), dh_(continuous_rule(P_)), quad_(std::make_unique<QuadratureEngine>(P_, spec)) {
  phi0_ = reference_metric(P_, *quad_);
}

const WeightSet& Setting::weights(int k) const {
  auto it = weights_.find(k);
  if (it == weights_.end()) it = weights_.emplace(k, lattice_points(P_, k)).first;
  return it->second;
}

const MetricField& Setting::phi0_field(const QuadGrid& grid) const {
  auto it = phi0_fields_.find(grid.level);
  if (it == phi0_fields_.end()) it = phi0_fields_.emplace(grid.level, evaluate_on_grid(phi0_, grid, 2)).first;
  return it->second;
}

const Eigen::VectorXd& Setting::mu0_density(const QuadGrid& grid) const {
  auto it = mu0_.find(grid.level);
  if (it == mu0_.end()) {
    const MetricField& f = phi0_field(grid);
    Eigen::VectorXd d(grid.size());
    for (int q = 0; q < grid.size(); ++q) d[q] = f.det_hessian(q, grid.dim) / P_.volume();
    it = mu0_.emplace(grid.level, std::move(d)).first;
  }
  return it->second;
}

namespace {

Estimate scalar(const Refined& r) { return Estimate{r.values[0], r.error}; }

}  // namespace

Estimate ma_mass(const Setting& S, const TorusMetric& phi) {
  return scalar(S.quad().refine([&](const QuadGrid& g) {
    const MetricField f = evaluate_on_grid(phi, g, 2);
    double s = 0.0;
    for (int q = 0; q < g.size(); ++q) s += g.w[q] * f.det_hessian(q, g.dim);
    return Eigen::VectorXd::Constant(1, s / S.polytope().volume());
  }, 1.0));
}

Estimate ma_g_mass(const Setting& S, const TorusMetric& phi, const GWeight& gw) {
  return scalar(S.quad().refine([&](const QuadGrid& g) {
    const MetricField f = evaluate_on_grid(phi, g, 2);
    double s = 0.0;
    for (int q = 0; q < g.size(); ++q) {
      if (g.w[q] != 0.0) s += g.w[q] * gw.continuous(f.grad.col(q)) * f.det_hessian(q, g.dim);
    }
    return Eigen::VectorXd::Constant(1, s / S.polytope().volume());
  }, 1.0));
}

Eigen::VectorXd ma_pushforward_barycenter(const Setting& S, const TorusMetric& phi) {
  const int n = S.dim();
  return S.quad()
      .refine([&](const QuadGrid& g) {
        const MetricField f = evaluate_on_grid(phi, g, 2);
        Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
        double mass = 0.0;
        for (int q = 0; q < g.size(); ++q) {
          const double d = g.w[q] * f.det_hessian(q, g.dim);
          b += d * f.grad.col(q);
          mass += d;
        }
        return Eigen::VectorXd(b / mass);
      }, 1.0)
      .values;
}

Estimate mu_mass(const Setting& S, const TorusMetric& phi) {
  // The constant is factored out exactly: int e^{-phi} = e^{-c} int e^{-(phi - c)}.
  const TorusMetric bare = phi.without_constant();
  const Refined r = S.quad().refine([&](const QuadGrid& g) {
    return Eigen::VectorXd::Constant(1, mass_e_minus_phi(evaluate_on_grid(bare, g, 0), g));
  });
  return Estimate{r.values[0] * std::exp(-phi.constant()), r.error};
}

Estimate L_functional(const Setting& S, const TorusMetric& phi) {
  const TorusMetric bare = phi.without_constant();
  const Refined r = S.quad().refine([&](const QuadGrid& g) {
    return Eigen::VectorXd::Constant(1, mass_e_minus_phi(evaluate_on_grid(bare, g, 0), g));
  });
  if (!(r.values[0] > 0.0) || !std::isfinite(r.values[0])) {
    throw Error(ErrorCode::DivergentIntegral, "int e^{-phi} is not a finite positive number");
  }
  return Estimate{-std::log(r.values[0]) + phi.constant(), r.error};
}

Estimate L_mu0(const Setting& S, const TorusMetric& phi) {
  const TorusMetric bare = phi.without_constant();
  const Refined r = S.quad().refine([&](const QuadGrid& g) {
    const MetricField f = evaluate_on_grid(bare, g, 0);
    const MetricField& f0 = S.phi0_field(g);
    const Eigen::VectorXd& mu = S.mu0_density(g);
    double s = 0.0;
    double mass = 0.0;
    for (int q = 0; q < g.size(); ++q) {
      if (g.w[q] == 0.0) continue;
      const double d = g.w[q] * mu[q];
      s += d * (f.value[q] - f0.value[q]);
      mass += d;
    }
    return Eigen::VectorXd::Constant(1, s / mass);
  }, 1.0);
  return Estimate{r.values[0] + phi.constant(), r.error};
}

Estimate mu_barycenter_residual(const Setting& S, const TorusMetric& phi) {
  const int n = S.dim();
  const TorusMetric bare = phi.without_constant();
  const Refined r = S.quad().refine([&](const QuadGrid& g) {
    const MetricField f = evaluate_on_grid(bare, g, 1);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    double mass = 0.0;
    for (int q = 0; q < g.size(); ++q) {
      if (g.w[q] == 0.0) continue;
      const double e = g.w[q] * std::exp(-f.value[q]);
      v += e * f.grad.col(q);
      mass += e;
    }
    return Eigen::VectorXd(v / mass);
  }, 1.0);
  return Estimate{r.values.norm(), r.error};
}

namespace {

// Path integral on one grid, doubling the number of s-nodes until stable.
// Along phi_s = s b + (1 - s) a the gradient is affine in s and det D^2 phi_s
// is a polynomial of degree n in s; for n <= 2 its coefficients are
// precomputed per node, so each s-node costs one pass without matrix work.
double path_integral(const QuadGrid& g, const MetricField& a, const MetricField& b, const GWeight& gw,
                     const EnergyOptions& opts, double tol) {
  const int n = g.dim;
  std::vector<int> live;
  for (int q = 0; q < g.size(); ++q) {
    if (g.w[q] != 0.0) live.push_back(q);
  }
  const std::size_t L = live.size();
  std::vector<double> w(L), diff(L), xa(L), xb(L), c0(L), c1(L), c2(L);
  const bool weighted = gw.xi.size() > 0 && gw.xi.squaredNorm() > 0.0;
  for (std::size_t i = 0; i < L; ++i) {
    const int q = live[i];
    w[i] = g.w[q];
    diff[i] = b.value[q] - a.value[q];
    xa[i] = weighted ? gw.xi.dot(a.grad.col(q)) : 0.0;
    xb[i] = weighted ? gw.xi.dot(b.grad.col(q)) : 0.0;
    if (n == 1) {
      c0[i] = a.hess(0, q);
      c1[i] = b.hess(0, q) - a.hess(0, q);
      c2[i] = 0.0;
    } else if (n == 2) {
      // det(A + s D) = det A + s (a00 d11 + a11 d00 - a01 d10 - a10 d01) + s^2 det D
      const double* A = a.hess.col(q).data();
      const double* B = b.hess.col(q).data();
      const double D[4] = {B[0] - A[0], B[1] - A[1], B[2] - A[2], B[3] - A[3]};
      c0[i] = A[0] * A[3] - A[1] * A[2];
      c1[i] = A[0] * D[3] + A[3] * D[0] - A[1] * D[2] - A[2] * D[1];
      c2[i] = D[0] * D[3] - D[1] * D[2];
    }
  }
  Eigen::MatrixXd hess(n, n);
  auto det_at = [&](std::size_t i, double s) {
    if (n <= 2) return c0[i] + s * (c1[i] + s * c2[i]);
    const int q = live[i];
    hess = Eigen::Map<const Eigen::MatrixXd>(b.hess.col(q).data(), n, n) * s +
           Eigen::Map<const Eigen::MatrixXd>(a.hess.col(q).data(), n, n) * (1.0 - s);
    return hess.determinant();
  };
  auto run = [&](int M) {
    std::vector<double> s;
    std::vector<double> ws;
    gauss_rule(M, 0.0, 1.0, s, ws);
    double total = 0.0;
    for (int j = 0; j < M; ++j) {
      double num = 0.0;
      double mass = 0.0;
      for (std::size_t i = 0; i < L; ++i) {
        double d = w[i] * det_at(i, s[j]);
        if (weighted) d *= std::exp(s[j] * xb[i] + (1.0 - s[j]) * xa[i]);
        num += d * diff[i];
        mass += d;
      }
      // The g-normalizer cancels in the self-normalized ratio.
      total += ws[j] * num / mass;
    }
    return total;
  };
  int M = opts.path_nodes;
  double coarse = run(M);
  for (int d = 0; d < opts.max_doublings; ++d) {
    M *= 2;
    const double fine = run(M);
    if (std::abs(fine - coarse) <= tol * std::max(1.0, std::abs(fine))) return fine;
    coarse = fine;
  }
  throw Error(ErrorCode::QuadratureNotConverged, "energy path integral not stable in s");
}

}  // namespace

Estimate energy_increment(const Setting& S, const TorusMetric& from, const TorusMetric& to, const GWeight& g,
                          const EnergyOptions& opts) {
  // E_g(phi + c) = E_g(phi) + c: constants are carried exactly.
  const TorusMetric a = from.without_constant();
  const TorusMetric b = to.without_constant();
  const double tol = S.quad().spec().tolerance;
  const Refined r = S.quad().refine([&](const QuadGrid& grid) {
    const MetricField fa = evaluate_on_grid(a, grid, 2);
    const MetricField fb = evaluate_on_grid(b, grid, 2);
    return Eigen::VectorXd::Constant(1, path_integral(grid, fa, fb, g, opts, tol));
  }, 1.0);
  return Estimate{r.values[0] + to.constant() - from.constant(), r.error};
}

Estimate energy_g(const Setting& S, const TorusMetric& phi, const GWeight& g, const EnergyOptions& opts) {
  return energy_increment(S, S.phi0(), phi, g, opts);
}

Estimate J_g(const Setting& S, const TorusMetric& phi, const GWeight& g, const EnergyOptions& opts) {
  // Evaluated on the constant-free potential: J_g is exactly invariant under phi -> phi + c.
  const TorusMetric bare = phi.without_constant();
  const Estimate E = energy_g(S, bare, g, opts);
  const Estimate L = L_mu0(S, bare);
  return Estimate{-E.value + L.value, std::max(E.error, L.error)};
}

Estimate D_g(const Setting& S, const TorusMetric& phi, const GWeight& g, const EnergyOptions& opts) {
  const TorusMetric bare = phi.without_constant();
  const Estimate E = energy_g(S, bare, g, opts);
  const Estimate L = L_functional(S, bare);
  return Estimate{-E.value + L.value, std::max(E.error, L.error)};
}

Eigen::MatrixXd sample_grid(int dim, double lo, double hi, int npts) {
  if (npts < 1) throw Error(ErrorCode::MalformedInput, "grid needs at least one point per axis");
  int total = 1;
  for (int i = 0; i < dim; ++i) total *= npts;
  Eigen::MatrixXd pts(dim, total);
  const double h = npts > 1 ? (hi - lo) / (npts - 1) : 0.0;
  for (int q = 0; q < total; ++q) {
    int r = q;
    for (int i = dim - 1; i >= 0; --i) {
      pts(i, q) = lo + h * (r % npts);
      r /= npts;
    }
  }
  return pts;
}

void write_metric_grid_csv(std::ostream& os, const TorusMetric& phi, const Eigen::MatrixXd& points) {
  const int n = static_cast<int>(points.rows());
  for (int i = 0; i < n; ++i) os << "t" << (i + 1) << ",";
  os << "phi";
  for (int i = 0; i < n; ++i) os << ",dphi_" << (i + 1);
  os << "\n";
  for (int q = 0; q < points.cols(); ++q) {
    for (int i = 0; i < n; ++i) os << fmt_double(points(i, q)) << ",";
    os << fmt_double(phi.value(points.col(q)));
    const Eigen::VectorXd g = phi.gradient(points.col(q));
    for (int i = 0; i < n; ++i) os << "," << fmt_double(g[i]);
    os << "\n";
  }
}

TorusMetric metric_from_json(const std::string& text, const ReflexivePolytope& P) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedInput, std::string("metric JSON: ") + e.what());
  }
  if (!j.contains("level") || !(j.contains("coefficients") || j.contains("log_coefficients"))) {
    throw Error(ErrorCode::MalformedInput, "metric JSON needs \"level\" and \"coefficients\"");
  }
  const int m = j.at("level").get<int>();
  if (m < 1) throw Error(ErrorCode::MalformedInput, "metric level must be >= 1");
  const WeightSet W = lattice_points(P, m);
  const bool logs = j.contains("log_coefficients");
  const auto coeffs = j.at(logs ? "log_coefficients" : "coefficients").get<std::vector<double>>();
  if (static_cast<int>(coeffs.size()) != W.size()) {
    throw Error(ErrorCode::MalformedInput, "expected " + std::to_string(W.size()) + " coefficients at level " +
                                               std::to_string(m));
  }
  Eigen::VectorXd logc(W.size());
  for (int i = 0; i < W.size(); ++i) {
    if (logs) {
      logc[i] = coeffs[i];
    } else {
      if (!(coeffs[i] > 0.0) || !std::isfinite(coeffs[i])) throw Error(ErrorCode::MalformedInput, "coefficients must be positive");
      logc[i] = std::log(coeffs[i]);
    }
  }
  return TorusMetric(m, W.points, logc, j.value("constant", 0.0));
}

std::string metric_to_json(const TorusMetric& phi) {
  nlohmann::ordered_json j;
  j["level"] = phi.level();
  std::vector<std::vector<int>> support;
  for (int a = 0; a < phi.support().cols(); ++a) {
    support.emplace_back(phi.support().col(a).data(), phi.support().col(a).data() + phi.dim());
  }
  j["support"] = support;
  j["log_coefficients"] = std::vector<double>(phi.log_coefficients().data(),
                                              phi.log_coefficients().data() + phi.log_coefficients().size());
  j["constant"] = phi.constant();
  return j.dump(2);
}

}  // namespace toricq
