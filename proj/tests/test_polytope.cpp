#include <gtest/gtest.h>

#include <set>

#include "oracles.hpp"
#include "toricq/error.hpp"
#include "toricq/polytope.hpp"

using namespace toricq;

namespace {

const char* kCatalog[] = {"p1", "p1xp1", "p2", "dp6", "dp1"};

ReflexivePolytope from(const oracle::Normals& normals) {
  std::vector<IntVector> v;
  for (const auto& nu : normals) v.push_back(Eigen::Map<const IntVector>(nu.data(), static_cast<Eigen::Index>(nu.size())));
  return validate(v, static_cast<int>(normals.front().size()));
}

ErrorCode code_of(const oracle::Normals& normals) {
  try {
    from(normals);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected a validation error";
  return ErrorCode::MalformedInput;
}

}  // namespace

TEST(Validate, IntervalVertices) {
  const auto P = from({{1}, {-1}});
  ASSERT_EQ(P.num_vertices(), 2);
  EXPECT_EQ(P.vertices()(0, 0), -1);
  EXPECT_EQ(P.vertices()(0, 1), 1);
}

TEST(Validate, ProjectivePlaneVertices) {
  const auto P = from({{1, 0}, {0, 1}, {-1, -1}});
  std::set<std::pair<int, int>> got;
  for (int v = 0; v < P.num_vertices(); ++v) got.insert({P.vertices()(0, v), P.vertices()(1, v)});
  EXPECT_EQ(got, (std::set<std::pair<int, int>>{{-1, -1}, {2, -1}, {-1, 2}}));
  EXPECT_DOUBLE_EQ(P.volume(), 4.5);
}

TEST(Validate, RejectsBadInput) {
  EXPECT_EQ(code_of({{2, 0}, {0, 1}, {-1, -1}}), ErrorCode::NonPrimitiveNormal);
  EXPECT_EQ(code_of({{1, 0}, {0, 1}, {-1, -1}, {1, -2}}), ErrorCode::NonIntegralVertex);
  EXPECT_EQ(code_of({{1, 0}, {0, 1}, {1, 1}}), ErrorCode::Unbounded);
  EXPECT_TRUE(is_validation_error(code_of({{1, 0}, {0, 1}})));
}

TEST(Validate, VerticesMatchIndependentEnumeration) {
  for (const char* name : {"p1xp1", "p2", "dp6", "dp1"}) {
    const auto P = load_polytope(oracle::catalog(name));
    const auto expect = oracle::polygon(oracle::normals_of(name));
    ASSERT_EQ(P.num_vertices(), static_cast<int>(expect.size())) << name;
    for (const auto& p : expect) {
      bool found = false;
      for (int v = 0; v < P.num_vertices(); ++v) {
        found = found || (P.vertices()(0, v) == std::lround(p[0]) && P.vertices()(1, v) == std::lround(p[1]));
      }
      EXPECT_TRUE(found) << name;
    }
    EXPECT_NEAR(P.volume(), oracle::shoelace_area(expect), 1e-12) << name;
  }
}

TEST(LatticePoints, SmallExamples) {
  const auto p1 = load_polytope(oracle::catalog("p1"));
  const auto W = lattice_points(p1, 2);
  ASSERT_EQ(W.size(), 5);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(W.points(0, i), i - 2);
  EXPECT_EQ(lattice_points(load_polytope(oracle::catalog("p2")), 1).size(), 10);
  EXPECT_EQ(lattice_points(load_polytope(oracle::catalog("dp1")), 1).size(), 9);
}

TEST(LatticePoints, BruteForceAndEhrhart) {
  for (const char* name : kCatalog) {
    const auto P = load_polytope(oracle::catalog(name));
    std::vector<long> N;
    for (int k = 1; k <= 10; ++k) {
      N.push_back(lattice_points(P, k).size());
      EXPECT_EQ(N.back(), oracle::brute_count(oracle::normals_of(name), k)) << name << " k=" << k;
    }
    // Degree-n polynomial through (0, 1), k = 1..n predicts the rest (N_0 = 1).
    const int n = P.dim();
    std::vector<double> ks{0.0}, ns{1.0};
    for (int k = 1; k <= n; ++k) {
      ks.push_back(k);
      ns.push_back(static_cast<double>(N[k - 1]));
    }
    for (int k = n + 1; k <= 10; ++k) {
      double value = 0.0;
      for (std::size_t i = 0; i < ks.size(); ++i) {
        double l = 1.0;
        for (std::size_t j = 0; j < ks.size(); ++j) {
          if (j != i) l *= (k - ks[j]) / (ks[i] - ks[j]);
        }
        value += ns[i] * l;
      }
      EXPECT_EQ(std::lround(value), N[k - 1]) << name << " k=" << k;
      EXPECT_NEAR(value, static_cast<double>(N[k - 1]), 1e-9);
    }
  }
}

TEST(LatticePoints, SortedDistinctAndClosedUnderSymmetries) {
  for (const char* name : kCatalog) {
    const auto P = load_polytope(oracle::catalog(name));
    for (int k : {1, 3}) {
      const auto W = lattice_points(P, k);
      for (int i = 1; i < W.size(); ++i) {
        const IntVector a = W.points.col(i - 1), b = W.points.col(i);
        EXPECT_TRUE(std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size()));
      }
      const auto syms = lattice_symmetries(P);
      EXPECT_GE(syms.size(), 2u) << name;
      for (const auto& A : syms) {
        const auto perm = induced_permutation(W, A);
        std::set<int> image(perm.begin(), perm.end());
        EXPECT_EQ(static_cast<int>(image.size()), W.size());
        EXPECT_EQ(*image.begin(), 0);
      }
    }
  }
}

TEST(FacetMargin, Examples) {
  const auto p1 = load_polytope(oracle::catalog("p1"));
  EXPECT_DOUBLE_EQ(p1.facet_margin(Eigen::VectorXd::Zero(1)), 1.0);
  EXPECT_DOUBLE_EQ(p1.facet_margin(Eigen::VectorXd::Ones(1)), 0.0);
  const auto p2 = load_polytope(oracle::catalog("p2"));
  EXPECT_DOUBLE_EQ(p2.facet_margin(Eigen::VectorXd::Zero(2)), 1.0);
}

TEST(CentralSymmetry, Catalog) {
  EXPECT_TRUE(is_centrally_symmetric(load_polytope(oracle::catalog("p1"))));
  EXPECT_TRUE(is_centrally_symmetric(load_polytope(oracle::catalog("p1xp1"))));
  EXPECT_TRUE(is_centrally_symmetric(load_polytope(oracle::catalog("dp6"))));
  EXPECT_FALSE(is_centrally_symmetric(load_polytope(oracle::catalog("p2"))));
  EXPECT_FALSE(is_centrally_symmetric(load_polytope(oracle::catalog("dp1"))));
}

TEST(Json, RoundTrip) {
  const auto P = load_polytope(oracle::catalog("dp1"));
  const auto Q = polytope_from_json(polytope_to_json(P));
  EXPECT_EQ(Q.name(), P.name());
  EXPECT_EQ(Q.facet_normals(), P.facet_normals());
  EXPECT_THROW(polytope_from_json("{\"dim\": 2}"), Error);
}
