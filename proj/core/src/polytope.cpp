#include "toricq/polytope.hpp"

#include <Eigen/LU>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "toricq/simplices.hpp"

namespace toricq {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPrimitiveNormal: return "NonPrimitiveNormal";
    case ErrorCode::OriginNotInterior: return "OriginNotInterior";
    case ErrorCode::NonIntegralVertex: return "NonIntegralVertex";
    case ErrorCode::Unbounded: return "Unbounded";
    case ErrorCode::MalformedInput: return "MalformedInput";
    case ErrorCode::SingularHessian: return "SingularHessian";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::IllConditionedFit: return "IllConditionedFit";
    case ErrorCode::QuadratureNotConverged: return "QuadratureNotConverged";
    case ErrorCode::DivergentIntegral: return "DivergentIntegral";
    case ErrorCode::LevelMismatch: return "LevelMismatch";
  }
  return "Unknown";
}

bool is_validation_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPrimitiveNormal:
    case ErrorCode::OriginNotInterior:
    case ErrorCode::NonIntegralVertex:
    case ErrorCode::Unbounded:
    case ErrorCode::MalformedInput:
      return true;
    default:
      return false;
  }
}

namespace {

using Int = std::int64_t;

// Fraction-free Gaussian elimination; exact for the small matrices used here.
Int bareiss_det(std::vector<std::vector<Int>> a) {
  const int n = static_cast<int>(a.size());
  if (n == 0) return 1;
  Int sign = 1;
  Int prev = 1;
  for (int k = 0; k < n - 1; ++k) {
    if (a[k][k] == 0) {
      int swap = -1;
      for (int i = k + 1; i < n; ++i) {
        if (a[i][k] != 0) {
          swap = i;
          break;
        }
      }
      if (swap < 0) return 0;
      std::swap(a[k], a[swap]);
      sign = -sign;
    }
    for (int i = k + 1; i < n; ++i) {
      for (int j = k + 1; j < n; ++j) {
        a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
      }
    }
    prev = a[k][k];
  }
  return sign * a[n - 1][n - 1];
}

Int gcd_of(const IntVector& v) {
  Int g = 0;
  for (int i = 0; i < v.size(); ++i) g = std::gcd(g, static_cast<Int>(std::abs(v[i])));
  return g;
}

bool lex_less(const IntVector& a, const IntVector& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

// Visits all r-subsets of {0..m-1} in lexicographic order.
template <class F>
void for_each_subset(int m, int r, F&& visit) {
  if (r > m) return;
  std::vector<int> idx(r);
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    visit(idx);
    int i = r - 1;
    while (i >= 0 && idx[i] == m - r + i) --i;
    if (i < 0) return;
    ++idx[i];
    for (int j = i + 1; j < r; ++j) idx[j] = idx[j - 1] + 1;
  }
}

// Generalized cross product: a vector orthogonal to the rows (r = n - 1 rows).
std::vector<Int> orthogonal_vector(const std::vector<IntVector>& rows, int n) {
  std::vector<Int> d(n);
  for (int col = 0; col < n; ++col) {
    std::vector<std::vector<Int>> minor;
    for (const auto& row : rows) {
      std::vector<Int> r;
      for (int j = 0; j < n; ++j) {
        if (j != col) r.push_back(row[j]);
      }
      minor.push_back(std::move(r));
    }
    d[col] = ((col % 2 == 0) ? 1 : -1) * bareiss_det(minor);
  }
  return d;
}

int affine_rank(const std::vector<IntVector>& pts) {
  if (pts.size() <= 1) return 0;
  const int n = static_cast<int>(pts[0].size());
  Eigen::MatrixXd diff(n, static_cast<int>(pts.size()) - 1);
  for (std::size_t i = 1; i < pts.size(); ++i) diff.col(static_cast<int>(i) - 1) = (pts[i] - pts[0]).cast<double>();
  Eigen::FullPivLU<Eigen::MatrixXd> lu(diff);
  lu.setThreshold(1e-9);
  return static_cast<int>(lu.rank());
}

}  // namespace

ReflexivePolytope validate(const std::vector<IntVector>& normals, int dim, std::string name) {
  if (dim < 1) throw Error(ErrorCode::MalformedInput, "dimension must be >= 1");
  if (static_cast<int>(normals.size()) < dim + 1) {
    throw Error(ErrorCode::MalformedInput, "need at least dim+1 facet normals, got " + std::to_string(normals.size()));
  }
  for (const auto& nu : normals) {
    if (nu.size() != dim) throw Error(ErrorCode::MalformedInput, "facet normal has wrong length");
  }
  for (std::size_t f = 0; f < normals.size(); ++f) {
    const Int g = gcd_of(normals[f]);
    if (g != 1) {
      std::ostringstream msg;
      msg << "facet normal #" << f << " (" << normals[f].transpose() << ") has gcd " << g;
      throw Error(ErrorCode::NonPrimitiveNormal, msg.str());
    }
    for (std::size_t h = 0; h < f; ++h) {
      if (normals[h] == normals[f]) throw Error(ErrorCode::MalformedInput, "duplicate facet normal #" + std::to_string(f));
    }
  }
  // With the fixed offset -1 the origin satisfies every inequality strictly;
  // a full-dimensional P therefore always has the origin in its interior.
  // Boundedness: the recession cone {d : <d, nu> >= 0 for all nu} must be {0}.
  {
    Eigen::MatrixXd N(dim, static_cast<int>(normals.size()));
    for (std::size_t f = 0; f < normals.size(); ++f) N.col(static_cast<int>(f)) = normals[f].cast<double>();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(N);
    if (lu.rank() < dim) throw Error(ErrorCode::Unbounded, "facet normals do not span R^n");
    bool unbounded = false;
    for_each_subset(static_cast<int>(normals.size()), dim - 1, [&](const std::vector<int>& idx) {
      if (unbounded) return;
      std::vector<IntVector> rows;
      for (int i : idx) rows.push_back(normals[i]);
      const auto d = orthogonal_vector(rows, dim);
      if (std::all_of(d.begin(), d.end(), [](Int x) { return x == 0; })) return;
      for (int sgn : {1, -1}) {
        bool ok = true;
        for (const auto& nu : normals) {
          Int s = 0;
          for (int j = 0; j < dim; ++j) s += d[j] * nu[j];
          if (sgn * s < 0) {
            ok = false;
            break;
          }
        }
        if (ok) unbounded = true;
      }
    });
    if (unbounded) throw Error(ErrorCode::Unbounded, "facet inequalities admit a recession direction");
  }

  // Vertices: feasible solutions of n tight inequalities (Cramer's rule, exact).
  std::vector<IntVector> verts;
  std::set<std::vector<int>> seen;
  for_each_subset(static_cast<int>(normals.size()), dim, [&](const std::vector<int>& idx) {
    std::vector<std::vector<Int>> A(dim, std::vector<Int>(dim));
    for (int r = 0; r < dim; ++r) {
      for (int c = 0; c < dim; ++c) A[r][c] = normals[idx[r]][c];
    }
    const Int det = bareiss_det(A);
    if (det == 0) return;
    std::vector<Int> num(dim);
    for (int c = 0; c < dim; ++c) {
      auto Ac = A;
      for (int r = 0; r < dim; ++r) Ac[r][c] = -1;
      num[c] = bareiss_det(Ac);
    }
    // Feasibility: <num, nu> / det >= -1 for every facet.
    for (const auto& nu : normals) {
      Int s = 0;
      for (int j = 0; j < dim; ++j) s += num[j] * nu[j];
      if (det > 0 ? s < -det : s > -det) return;
    }
    for (int c = 0; c < dim; ++c) {
      if (num[c] % det != 0) {
        std::ostringstream msg;
        msg << "vertex (";
        for (int j = 0; j < dim; ++j) msg << (j ? ", " : "") << num[j] << "/" << det;
        msg << ") is not integral";
        throw Error(ErrorCode::NonIntegralVertex, msg.str());
      }
    }
    std::vector<int> v(dim);
    for (int c = 0; c < dim; ++c) v[c] = static_cast<int>(num[c] / det);
    seen.insert(v);
  });
  for (const auto& v : seen) verts.push_back(Eigen::Map<const IntVector>(v.data(), dim));
  std::sort(verts.begin(), verts.end(), lex_less);

  ReflexivePolytope P;
  P.name_ = std::move(name);
  P.normals_.resize(dim, static_cast<int>(normals.size()));
  for (std::size_t f = 0; f < normals.size(); ++f) P.normals_.col(static_cast<int>(f)) = normals[f];
  P.vertices_.resize(dim, static_cast<int>(verts.size()));
  for (std::size_t v = 0; v < verts.size(); ++v) P.vertices_.col(static_cast<int>(v)) = verts[v];

  P.facet_vertices_.resize(normals.size());
  for (std::size_t f = 0; f < normals.size(); ++f) {
    std::vector<IntVector> on;
    for (std::size_t v = 0; v < verts.size(); ++v) {
      if (verts[v].dot(normals[f]) == -1) {
        P.facet_vertices_[f].push_back(static_cast<int>(v));
        on.push_back(verts[v]);
      }
    }
    if (affine_rank(on) != dim - 1) {
      throw Error(ErrorCode::MalformedInput, "normal #" + std::to_string(f) + " does not define a facet (redundant inequality)");
    }
  }

  double normalized = 0.0;
  for (const auto& s : fan_triangulation(P)) normalized += std::abs(static_cast<double>(simplex_normalized_volume(s)));
  double fact = 1.0;
  for (int i = 2; i <= dim; ++i) fact *= i;
  P.volume_ = normalized / fact;
  return P;
}

double ReflexivePolytope::facet_margin(std::span<const double> x) const {
  double m = std::numeric_limits<double>::infinity();
  for (int f = 0; f < num_facets(); ++f) {
    double s = 1.0;
    for (int j = 0; j < dim(); ++j) s += x[j] * normals_(j, f);
    m = std::min(m, s);
  }
  return m;
}

bool ReflexivePolytope::contains_scaled(const IntVector& alpha, int k) const {
  for (int f = 0; f < num_facets(); ++f) {
    if (alpha.dot(normals_.col(f)) < -k) return false;
  }
  return true;
}

double ReflexivePolytope::support_function(std::span<const double> t) const {
  double h = -std::numeric_limits<double>::infinity();
  for (int v = 0; v < num_vertices(); ++v) {
    double s = 0.0;
    for (int j = 0; j < dim(); ++j) s += vertices_(j, v) * t[j];
    h = std::max(h, s);
  }
  return h;
}

double ReflexivePolytope::inradius() const {
  double r = std::numeric_limits<double>::infinity();
  for (int f = 0; f < num_facets(); ++f) r = std::min(r, 1.0 / normals_.col(f).cast<double>().norm());
  return r;
}

int WeightSet::index_of(const IntVector& alpha) const {
  // Columns are lexicographically sorted.
  int lo = 0;
  int hi = size();
  while (lo < hi) {
    const int mid = (lo + hi) / 2;
    const IntVector c = points.col(mid);
    if (lex_less(c, alpha)) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  if (lo < size() && points.col(lo) == alpha) return lo;
  return -1;
}

WeightSet lattice_points(const ReflexivePolytope& P, int k) {
  if (k < 1) throw Error(ErrorCode::MalformedInput, "level must be >= 1");
  const int n = P.dim();
  const IntVector lo = P.box_lo() * k;
  const IntVector hi = P.box_hi() * k;
  std::vector<IntVector> pts;
  IntVector x = lo;
  // Odometer over the bounding box, last coordinate fastest: lexicographic order.
  while (true) {
    if (P.contains_scaled(x, k)) pts.push_back(x);
    int j = n - 1;
    while (j >= 0 && x[j] == hi[j]) {
      x[j] = lo[j];
      --j;
    }
    if (j < 0) break;
    ++x[j];
  }
  WeightSet W;
  W.level = k;
  W.points.resize(n, static_cast<int>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) W.points.col(static_cast<int>(i)) = pts[i];
  return W;
}

std::vector<IntMatrix> lattice_symmetries(const ReflexivePolytope& P) {
  const int n = P.dim();
  const IntMatrix& N = P.facet_normals();
  // Pick n linearly independent normals as a basis B; a symmetry's transpose
  // maps B onto an ordered n-tuple of normals.
  std::vector<int> basis;
  for_each_subset(P.num_facets(), n, [&](const std::vector<int>& idx) {
    if (!basis.empty()) return;
    Eigen::MatrixXd B(n, n);
    for (int i = 0; i < n; ++i) B.col(i) = N.col(idx[i]).cast<double>();
    if (std::abs(B.determinant()) > 0.5) basis = idx;
  });
  Eigen::MatrixXd B(n, n);
  for (int i = 0; i < n; ++i) B.col(i) = N.col(basis[i]).cast<double>();
  const Eigen::MatrixXd Binv = B.inverse();

  std::set<std::vector<int>> normal_set;
  for (int f = 0; f < P.num_facets(); ++f) normal_set.insert(std::vector<int>(N.col(f).data(), N.col(f).data() + n));

  std::vector<IntMatrix> out;
  std::vector<int> images(n, 0);
  // Enumerate ordered n-tuples of normals.
  std::function<void(int)> rec = [&](int depth) {
    if (depth == n) {
      Eigen::MatrixXd M(n, n);
      for (int i = 0; i < n; ++i) M.col(i) = N.col(images[i]).cast<double>();
      const Eigen::MatrixXd At = M * Binv;  // A^T maps basis normals to images
      IntMatrix Ai(n, n);
      for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
          const double v = At(c, r);
          if (std::abs(v - std::round(v)) > 1e-9) return;
          Ai(r, c) = static_cast<int>(std::lround(v));
        }
      }
      const double det = Ai.cast<double>().determinant();
      if (std::abs(std::abs(det) - 1.0) > 1e-9) return;
      const IntMatrix AiT = Ai.transpose();
      for (int f = 0; f < P.num_facets(); ++f) {
        const IntVector img = AiT * N.col(f);
        if (!normal_set.count(std::vector<int>(img.data(), img.data() + n))) return;
      }
      out.push_back(Ai);
      return;
    }
    for (int f = 0; f < P.num_facets(); ++f) {
      images[depth] = f;
      rec(depth + 1);
    }
  };
  rec(0);
  const IntMatrix I = IntMatrix::Identity(n, n);
  std::stable_partition(out.begin(), out.end(), [&](const IntMatrix& A) { return A == I; });
  return out;
}

std::vector<int> induced_permutation(const WeightSet& W, const IntMatrix& A) {
  std::vector<int> perm(W.size());
  for (int i = 0; i < W.size(); ++i) {
    const IntVector img = A * W.points.col(i);
    perm[i] = W.index_of(img);
    if (perm[i] < 0) throw Error(ErrorCode::MalformedInput, "matrix is not a symmetry of the weight set");
  }
  return perm;
}

bool is_centrally_symmetric(const ReflexivePolytope& P) {
  const IntMatrix minus = -IntMatrix::Identity(P.dim(), P.dim());
  for (const auto& A : lattice_symmetries(P)) {
    if (A == minus) return true;
  }
  return false;
}

ReflexivePolytope polytope_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedInput, std::string("invalid JSON: ") + e.what());
  }
  if (!j.contains("dim") || !j.contains("facet_normals")) {
    throw Error(ErrorCode::MalformedInput, "polytope JSON needs \"dim\" and \"facet_normals\"");
  }
  const int dim = j.at("dim").get<int>();
  std::vector<IntVector> normals;
  for (const auto& row : j.at("facet_normals")) {
    const auto v = row.get<std::vector<int>>();
    normals.push_back(Eigen::Map<const IntVector>(v.data(), static_cast<int>(v.size())));
  }
  return validate(normals, dim, j.value("name", std::string()));
}

ReflexivePolytope load_polytope(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MalformedInput, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return polytope_from_json(buf.str());
}

std::string polytope_to_json(const ReflexivePolytope& P) {
  nlohmann::json j;
  j["name"] = P.name();
  j["dim"] = P.dim();
  auto rows = nlohmann::json::array();
  for (int f = 0; f < P.num_facets(); ++f) {
    const IntVector c = P.facet_normals().col(f);
    rows.push_back(std::vector<int>(c.data(), c.data() + c.size()));
  }
  j["facet_normals"] = rows;
  return j.dump();
}

void write_weights_csv(std::ostream& os, const WeightSet& W) {
  for (int j = 0; j < W.dim(); ++j) os << (j ? "," : "") << "x" << (j + 1);
  os << "\n";
  for (int i = 0; i < W.size(); ++i) {
    for (int j = 0; j < W.dim(); ++j) os << (j ? "," : "") << W.points(j, i);
    os << "\n";
  }
}

}  // namespace toricq
