#pragma once

// Reference computations used to check the library. Nothing here calls into
// toricq numerics: inputs are plain facet normals, outputs plain numbers.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

using Normals = std::vector<std::vector<int>>;
using Point2 = std::array<double, 2>;

inline std::string catalog(const std::string& name) { return std::string(TORICQ_CATALOG_DIR) + "/" + name + ".json"; }

inline const Normals& normals_of(const std::string& name) {
  static const Normals p1{{1}, {-1}};
  static const Normals p1xp1{{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  static const Normals p2{{1, 0}, {0, 1}, {-1, -1}};
  static const Normals dp6{{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {-1, -1}};
  static const Normals dp1{{1, 0}, {0, 1}, {-1, -1}, {1, 1}};
  if (name == "p1") return p1;
  if (name == "p1xp1") return p1xp1;
  if (name == "p2") return p2;
  if (name == "dp6") return dp6;
  return dp1;
}

/// Counts x in Z^n with <x, nu> >= -k for all normals over the box [-4k, 4k]^n
/// (the catalog polytopes fit in [-2, 2]^n).
inline long brute_count(const Normals& normals, int k) {
  const int n = static_cast<int>(normals.front().size());
  const int R = 4 * k;
  std::vector<int> x(n, -R);
  long count = 0;
  while (true) {
    bool inside = true;
    for (const auto& nu : normals) {
      long s = 0;
      for (int i = 0; i < n; ++i) s += static_cast<long>(nu[i]) * x[i];
      if (s < -k) inside = false;
    }
    count += inside;
    int i = n - 1;
    while (i >= 0 && x[i] == R) x[i--] = -R;
    if (i < 0) break;
    ++x[i];
  }
  return count;
}

/// Vertices of a polygon given by normals (offset -1), counter-clockwise.
inline std::vector<Point2> polygon(const Normals& normals) {
  std::vector<Point2> v;
  for (std::size_t a = 0; a < normals.size(); ++a) {
    for (std::size_t b = a + 1; b < normals.size(); ++b) {
      const double a1 = normals[a][0], a2 = normals[a][1], b1 = normals[b][0], b2 = normals[b][1];
      const double det = a1 * b2 - a2 * b1;
      if (std::abs(det) < 1e-12) continue;
      const Point2 p{(-b2 + a2) / det, (-a1 + b1) / det};
      bool ok = true;
      for (const auto& nu : normals) ok = ok && nu[0] * p[0] + nu[1] * p[1] >= -1.0 - 1e-9;
      bool dup = false;
      for (const auto& q : v) dup = dup || (std::abs(q[0] - p[0]) < 1e-9 && std::abs(q[1] - p[1]) < 1e-9);
      if (ok && !dup) v.push_back(p);
    }
  }
  std::sort(v.begin(), v.end(), [](const Point2& p, const Point2& q) {
    return std::atan2(p[1], p[0]) < std::atan2(q[1], q[0]);
  });
  return v;
}

inline double shoelace_area(const std::vector<Point2>& v) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto& p = v[i];
    const auto& q = v[(i + 1) % v.size()];
    s += p[0] * q[1] - q[0] * p[1];
  }
  return 0.5 * s;
}

inline Point2 shoelace_centroid(const std::vector<Point2>& v) {
  double cx = 0.0, cy = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto& p = v[i];
    const auto& q = v[(i + 1) % v.size()];
    const double c = p[0] * q[1] - q[0] * p[1];
    cx += (p[0] + q[0]) * c;
    cy += (p[1] + q[1]) * c;
  }
  const double A = shoelace_area(v);
  return {cx / (6.0 * A), cy / (6.0 * A)};
}

/// Gauss-Legendre nodes/weights on [-1, 1] by Newton on P_n.
inline void gauss(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

/// int_a^b f with `panels` Gauss panels of `order` points.
inline double integrate1d(const std::function<double(double)>& f, double a, double b, int panels = 8, int order = 20) {
  std::vector<double> x, w;
  gauss(order, x, w);
  double s = 0.0;
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    for (int i = 0; i < order; ++i) s += 0.5 * h * w[i] * f(lo + 0.5 * h * (x[i] + 1.0));
  }
  return s;
}

/// Normalized integral over the polytope (length or area), by slabs between
/// vertex x1-coordinates (polygon) or directly (interval).
inline double average(const Normals& normals, const std::function<double(double, double)>& f) {
  if (normals.front().size() == 1) {
    double lo = -1e300, hi = 1e300;
    for (const auto& nu : normals) {
      if (nu[0] > 0) lo = std::max(lo, -1.0 / nu[0]);
      else hi = std::min(hi, -1.0 / nu[0]);
    }
    return integrate1d([&](double x) { return f(x, 0.0); }, lo, hi) / (hi - lo);
  }
  const auto v = polygon(normals);
  std::vector<double> xs;
  for (const auto& p : v) xs.push_back(p[0]);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }), xs.end());
  auto yrange = [&](double x) {
    double lo = -1e300, hi = 1e300;
    for (const auto& nu : normals) {
      if (nu[1] == 0) continue;
      const double bound = (-1.0 - nu[0] * x) / nu[1];
      if (nu[1] > 0) lo = std::max(lo, bound);
      else hi = std::min(hi, bound);
    }
    return std::pair{lo, hi};
  };
  double total = 0.0;
  for (std::size_t s = 0; s + 1 < xs.size(); ++s) {
    total += integrate1d(
        [&](double x) {
          const auto [lo, hi] = yrange(x);
          return integrate1d([&](double y) { return f(x, y); }, lo, hi, 2, 20);
        },
        xs[s], xs[s + 1], 2, 20);
  }
  return total / shoelace_area(v);
}

inline double golden_section(const std::function<double(double)>& f, double a, double b, double tol = 1e-12) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

/// Root of a sign-changing f on [a, b].
inline double bisection(const std::function<double(double)>& f, double a, double b, double tol = 1e-14) {
  double fa = f(a);
  while (b - a > tol) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if ((fm < 0) == (fa < 0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

/// Central difference of a scalar function along coordinate i.
template <class F, class V>
double central_diff(F&& f, V x, int i, double h = 1e-5) {
  V xp = x, xm = x;
  xp[i] += h;
  xm[i] -= h;
  return (f(xp) - f(xm)) / (2.0 * h);
}

/// Fubini-Study potential on P^1: 2 log(2 cosh(t/2)).
inline double phi_fs(double t) { return 2.0 * std::log(2.0 * std::cosh(0.5 * t)); }

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b))); }

}  // namespace oracle
