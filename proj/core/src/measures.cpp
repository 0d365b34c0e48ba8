#include "toricq/measures.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <ostream>

#include "toricq/format.hpp"
#include "toricq/simplices.hpp"

namespace toricq {

SpectralMeasure spectral_measure(const WeightSet& W) {
  SpectralMeasure nu;
  nu.level = W.level;
  nu.atoms = W.scaled();
  return nu;
}

DHMeasure::DHMeasure(const ReflexivePolytope& P, int order) : order_(order), volume_(P.volume()) {
  const int n = P.dim();
  std::vector<SimplexRule> rules;
  long total = 0;
  for (const auto& s : fan_triangulation(P)) {
    rules.push_back(simplex_rule(s.cast<double>(), order));
    total += rules.back().weights.size();
  }
  points_.resize(n, total);
  weights_.resize(total);
  long q = 0;
  for (const auto& r : rules) {
    points_.middleCols(q, r.weights.size()) = r.points;
    weights_.segment(q, r.weights.size()) = r.weights / volume_;
    q += r.weights.size();
  }
}

DHMeasure dh_measure(const ReflexivePolytope& P, int order) { return DHMeasure(P, order); }

double monomial(const Eigen::Ref<const Eigen::VectorXd>& x, const MultiIndex& a) {
  double v = 1.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    for (int e = 0; e < a[j]; ++e) v *= x[static_cast<int>(j)];
  }
  return v;
}

double moment(const SpectralMeasure& nu, const MultiIndex& a) {
  double s = 0.0;
  for (int i = 0; i < nu.size(); ++i) s += monomial(nu.atoms.col(i), a);
  return s * nu.atom_mass();
}

double moment(const DHMeasure& nu, const MultiIndex& a) {
  return nu.integrate([&](const auto& x) { return monomial(x, a); });
}

Eigen::VectorXd barycenter(const SpectralMeasure& nu) { return nu.atoms.rowwise().mean(); }

Eigen::VectorXd barycenter(const DHMeasure& nu) { return nu.points() * nu.weights(); }

std::vector<MultiIndex> multi_indices(int dim, int max_degree) {
  std::vector<MultiIndex> out;
  for (int deg = 1; deg <= max_degree; ++deg) {
    MultiIndex a(dim, 0);
    // Enumerate compositions of deg into dim parts, lexicographically descending.
    std::vector<MultiIndex> level;
    std::function<void(int, int)> rec = [&](int j, int left) {
      if (j == dim - 1) {
        a[j] = left;
        level.push_back(a);
        return;
      }
      for (int e = left; e >= 0; --e) {
        a[j] = e;
        rec(j + 1, left - e);
      }
    };
    rec(0, deg);
    out.insert(out.end(), level.begin(), level.end());
  }
  return out;
}

ConvergenceReport convergence_report(const ReflexivePolytope& P, const std::vector<int>& k_list, int max_degree) {
  ConvergenceReport rep;
  const DHMeasure dh = dh_measure(P);
  const auto indices = multi_indices(P.dim(), max_degree);
  std::map<MultiIndex, double> dh_moments;
  for (const auto& a : indices) dh_moments[a] = moment(dh, a);

  std::map<MultiIndex, double> last;
  for (int k : k_list) {
    const SpectralMeasure nu = spectral_measure(lattice_points(P, k));
    for (const auto& a : indices) {
      MomentRow row{k, a, moment(nu, a), dh_moments[a], 0.0};
      row.error = std::abs(row.spectral - row.dh);
      rep.fitted_C = std::max(rep.fitted_C, k * row.error);
      if (auto it = last.find(a); it != last.end()) {
        const bool both_zero = it->second <= kMomentZero && row.error <= kMomentZero;
        if (!both_zero && !(row.error < it->second)) rep.monotone = false;
      }
      last[a] = row.error;
      rep.rows.push_back(std::move(row));
    }
  }
  return rep;
}

void write_convergence_csv(std::ostream& os, const ConvergenceReport& report) {
  os << "k,multi_index,spectral_moment,dh_moment,abs_error\n";
  for (const auto& r : report.rows) {
    os << r.k << ",";
    for (std::size_t j = 0; j < r.index.size(); ++j) os << (j ? ":" : "") << r.index[j];
    os << "," << fmt_double(r.spectral) << "," << fmt_double(r.dh) << "," << fmt_double(r.error) << "\n";
  }
}

}  // namespace toricq
