#include "toricq/quadrature.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "toricq/simplices.hpp"

namespace toricq {

namespace {

// Panel breakpoints on [0, bound]: uniform core, geometric tail; every panel
// split into 2^level equal pieces.
std::vector<double> breakpoints(double bound, const QuadratureSpec& spec, int level) {
  std::vector<double> bp{0.0};
  const int pieces = 1 << level;
  double x = 0.0;
  double tail = spec.core_width;
  while (x < bound - 1e-12) {
    double width = spec.core_width;
    if (x >= spec.core_extent - 1e-12) {
      tail = std::min(tail * spec.growth, spec.max_width);
      width = tail;
    }
    const double next = std::min(x + width, bound);
    for (int p = 1; p <= pieces; ++p) bp.push_back(x + (next - x) * p / pieces);
    x = next;
  }
  return bp;
}

}  // namespace

void gauss_rule(int order, double a, double b, std::vector<double>& x, std::vector<double>& w) {
  std::vector<double> gx;
  std::vector<double> gw;
  gauss_legendre(order, gx, gw);
  x.resize(order);
  w.resize(order);
  const double c = 0.5 * (a + b);
  const double r = 0.5 * (b - a);
  for (int i = 0; i < order; ++i) {
    x[i] = c + r * gx[i];
    w[i] = r * gw[i];
  }
}

double truncation_level(double tolerance, int dim, int refinement) {
  const double base = std::log(1.0 / tolerance) + 6.0;
  return base + (dim - 1) * std::log(base) + 3.0 * refinement;
}

Eigen::VectorXd QuadGrid::node(int q) const {
  const GridPatch* p = &patches.front();
  for (const auto& patch : patches) {
    if (q >= patch.offset && q < patch.offset + patch.size) p = &patch;
  }
  int r = q - p->offset;
  Eigen::VectorXd a(dim);
  for (int i = dim - 1; i >= 0; --i) {
    a[i] = p->axis_nodes[i][r % p->shape[i]];
    r /= p->shape[i];
  }
  return p->generators.cast<double>() * a;
}

Eigen::MatrixXd QuadGrid::nodes() const {
  Eigen::MatrixXd out(dim, size());
  for (int q = 0; q < size(); ++q) out.col(q) = node(q);
  return out;
}

int ExponentBox::size() const {
  int s = 1;
  for (int i = 0; i < dim(); ++i) s *= extent(i);
  return s;
}

int ExponentBox::index(const IntVector& beta) const {
  int idx = 0;
  for (int i = 0; i < dim(); ++i) idx = idx * extent(i) + (beta[i] - lo[i]);
  return idx;
}

ExponentBox ExponentBox::of(const IntMatrix& points) {
  ExponentBox b;
  for (int i = 0; i < points.rows(); ++i) {
    b.lo.push_back(points.row(i).minCoeff());
    b.hi.push_back(points.row(i).maxCoeff());
  }
  return b;
}

namespace {

// Contracts axis `axis` of a row-major tensor: out[.., o, ..] = sum_j coef(o, j) in[.., j, ..].
template <class Coef>
LongVector contract(const LongVector& in, std::vector<int>& shape, int axis, int out_extent, Coef&& coef) {
  std::size_t outer = 1;
  std::size_t inner = 1;
  for (int i = 0; i < axis; ++i) outer *= shape[i];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) inner *= shape[i];
  const int in_extent = shape[axis];
  LongVector out(outer * out_extent * inner, 0.0L);
  for (std::size_t o = 0; o < outer; ++o) {
    const long double* src = in.data() + o * in_extent * inner;
    long double* dst = out.data() + o * out_extent * inner;
    for (int a = 0; a < out_extent; ++a) {
      long double* row = dst + a * inner;
      for (int j = 0; j < in_extent; ++j) {
        const long double c = coef(a, j);
        const long double* s = src + j * inner;
        for (std::size_t r = 0; r < inner; ++r) row[r] += c * s[r];
      }
    }
  }
  shape[axis] = out_extent;
  return out;
}

}  // namespace

ExpBasis::ExpBasis(const QuadGrid& grid, const IntMatrix& support)
    : grid_(&grid), support_size_(static_cast<int>(support.cols())) {
  for (const auto& patch : grid.patches) {
    PatchBasis pb;
    const IntMatrix beta = patch.generators.transpose() * support;
    pb.box = ExponentBox::of(beta);
    pb.slot.resize(support_size_);
    for (int a = 0; a < support_size_; ++a) pb.slot[a] = pb.box.index(beta.col(a));
    pb.tables.resize(grid.dim);
    for (int i = 0; i < grid.dim; ++i) {
      const auto& xs = patch.axis_nodes[i];
      const int e = pb.box.extent(i);
      auto& tab = pb.tables[i];
      tab.resize(xs.size() * e);
      for (std::size_t n = 0; n < xs.size(); ++n) {
        for (int j = 0; j < e; ++j) {
          tab[n * e + j] = std::exp(static_cast<long double>(pb.box.lo[i] + j) * static_cast<long double>(xs[n]));
        }
      }
    }
    patches_.push_back(std::move(pb));
  }
}

LongVector ExpBasis::synthesize(const LongVector& coeffs) const {
  LongVector out(grid_->size(), 0.0L);
  for (std::size_t p = 0; p < patches_.size(); ++p) {
    const PatchBasis& pb = patches_[p];
    const GridPatch& patch = grid_->patches[p];
    LongVector cur(pb.box.size(), 0.0L);
    for (int a = 0; a < support_size_; ++a) cur[pb.slot[a]] += coeffs[a];
    std::vector<int> shape(pb.box.dim());
    for (int i = 0; i < pb.box.dim(); ++i) shape[i] = pb.box.extent(i);
    for (int i = 0; i < pb.box.dim(); ++i) {
      const int e = pb.box.extent(i);
      const auto& tab = pb.tables[i];
      cur = contract(cur, shape, i, patch.shape[i], [&](int n, int j) { return tab[static_cast<std::size_t>(n) * e + j]; });
    }
    std::copy(cur.begin(), cur.end(), out.begin() + patch.offset);
  }
  return out;
}

LongVector ExpBasis::analyze(const LongVector& values) const {
  LongVector out(support_size_, 0.0L);
  for (std::size_t p = 0; p < patches_.size(); ++p) {
    const PatchBasis& pb = patches_[p];
    const GridPatch& patch = grid_->patches[p];
    std::vector<int> shape = patch.shape;
    LongVector cur(values.begin() + patch.offset, values.begin() + patch.offset + patch.size);
    for (int i = 0; i < pb.box.dim(); ++i) {
      const int e = pb.box.extent(i);
      const auto& tab = pb.tables[i];
      cur = contract(cur, shape, i, e, [&](int j, int n) { return tab[static_cast<std::size_t>(n) * e + j]; });
    }
    for (int a = 0; a < support_size_; ++a) out[a] += cur[pb.slot[a]];
  }
  return out;
}

QuadratureEngine::QuadratureEngine(const ReflexivePolytope& P, QuadratureSpec spec) : spec_(spec), dim_(P.dim()) {
  // conv(nu_F) is reflexive with facet normals the (primitive) vertices of P;
  // its fan triangulation gives the cones.
  std::vector<IntVector> polar_normals;
  for (int v = 0; v < P.num_vertices(); ++v) polar_normals.push_back(P.vertices().col(v));
  const ReflexivePolytope polar = validate(polar_normals, dim_, "polar");
  for (const auto& s : fan_triangulation(polar)) cones_.push_back(-s.rightCols(dim_));
}

const QuadGrid& QuadratureEngine::grid(int level) const {
  if (auto it = cache_.find(level); it != cache_.end()) return *it->second;
  auto g = std::make_unique<QuadGrid>();
  g->level = level;
  g->dim = dim_;
  g->truncation = truncation_level(spec_.tolerance, dim_, level);
  const double H = g->truncation;
  std::vector<double> nodes;
  std::vector<double> weights;
  const auto bp = breakpoints(H, spec_, level);
  std::vector<double> x;
  std::vector<double> w;
  for (std::size_t p = 0; p + 1 < bp.size(); ++p) {
    gauss_rule(spec_.order, bp[p], bp[p + 1], x, w);
    nodes.insert(nodes.end(), x.begin(), x.end());
    weights.insert(weights.end(), w.begin(), w.end());
  }
  std::vector<double> ww;
  for (const IntMatrix& G : cones_) {
    GridPatch patch;
    patch.generators = G;
    patch.axis_nodes.assign(dim_, nodes);
    patch.axis_weights.assign(dim_, weights);
    patch.shape.assign(dim_, static_cast<int>(nodes.size()));
    patch.offset = static_cast<int>(ww.size());
    std::size_t total = 1;
    for (int i = 0; i < dim_; ++i) total *= patch.shape[i];
    patch.size = static_cast<int>(total);
    const double jac = std::abs(G.cast<double>().determinant());
    // h_P(t) = sum a_i on the cone: keep the simplex sum a_i <= H.
    std::vector<int> idx(dim_, 0);
    for (std::size_t q = 0; q < total; ++q) {
      double wq = jac;
      double h = 0.0;
      for (int i = 0; i < dim_; ++i) {
        wq *= weights[idx[i]];
        h += nodes[idx[i]];
      }
      ww.push_back(h <= H ? wq : 0.0);
      for (int i = dim_ - 1; i >= 0; --i) {
        if (++idx[i] < patch.shape[i]) break;
        idx[i] = 0;
      }
    }
    g->patches.push_back(std::move(patch));
  }
  g->w = Eigen::Map<Eigen::VectorXd>(ww.data(), static_cast<Eigen::Index>(ww.size()));
  auto& ref = *g;
  cache_.emplace(level, std::move(g));
  return ref;
}

}  // namespace toricq
