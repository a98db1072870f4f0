#include <gtest/gtest.h>

#include <numeric>
#include <sstream>

#include "twoopt/reduction.hpp"

using namespace twoopt;

namespace {

// Oracle: every vertex ordering cut into l consecutive segments; a cover with
// q non-singleton paths arises from exactly l! * 2^q (ordering, cut) pairs.
std::vector<Rational> path_covers_by_cutting(const BaseGraph& g) {
  const std::size_t nv = g.vertex_count();
  std::vector<Rational> weighted(nv, Rational(0));
  std::vector<Vertex> perm(nv);
  std::iota(perm.begin(), perm.end(), 0);
  do {
    for (std::uint32_t cuts = 0; cuts < (1u << (nv - 1)); ++cuts) {
      bool ok = true;
      std::size_t segments = 1, non_singleton = 0, seg_len = 1;
      for (std::size_t i = 0; i + 1 < nv; ++i) {
        if ((cuts >> i) & 1u) {
          non_singleton += seg_len >= 2;
          ++segments;
          seg_len = 1;
        } else {
          if (!g.has_edge(perm[i], perm[i + 1])) ok = false;
          ++seg_len;
        }
      }
      non_singleton += seg_len >= 2;
      if (!ok) continue;
      weighted[segments - 1] += Rational(1) / (Rational(factorial(static_cast<unsigned>(segments))) *
                                               Rational(BigInt(1) << non_singleton));
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return weighted;
}

std::vector<Rational> as_rationals(const std::vector<std::uint64_t>& v) {
  std::vector<Rational> r;
  for (const auto x : v) r.emplace_back(x);
  return r;
}

}  // namespace

TEST(Exact, DeterminantAndSolve) {
  BigMatrix a(3, 3);
  const int vals[3][3] = {{2, -1, 0}, {-1, 2, -1}, {0, -1, 2}};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) a(r, c) = vals[r][c];
  EXPECT_EQ(determinant(a), 4);
  EXPECT_EQ(rank(a), 3u);
  const auto x = solve_exact(a, {1, 0, 1});
  EXPECT_EQ(x, (std::vector<Rational>{1, 1, 1}));
  BigMatrix s(2, 2);
  s(0, 0) = 1;
  s(0, 1) = 2;
  s(1, 0) = 2;
  s(1, 1) = 4;
  EXPECT_EQ(determinant(s), 0);
  EXPECT_THROW(solve_exact(s, {1, 2}), RankError);
  EXPECT_THROW(solve_exact(s, {1}), DimensionError);
  BigMatrix swap(2, 2);
  swap(0, 1) = 1;
  swap(1, 0) = 1;
  EXPECT_EQ(determinant(swap), -1);
}

TEST(BaseGraph, Validation) {
  EXPECT_THROW(BaseGraph(1, {}), InvalidSize);
  EXPECT_THROW(BaseGraph(3, {{0, 0}}), ParameterError);
  EXPECT_THROW(BaseGraph(3, {{0, 3}}), ParameterError);
  EXPECT_THROW(BaseGraph(3, {{0, 1}, {1, 0}}), ParameterError);
  EXPECT_TRUE(BaseGraph::complete(4).is_complete());
  EXPECT_TRUE(BaseGraph::cycle(4).has_edge(3, 0));
}

TEST(BaseGraph, ParsesEdgeLists) {
  std::istringstream in("# path\n0 1\n\n1 2\n");
  const auto g = parse_edge_list(in);
  EXPECT_EQ(g.vertex_count(), 3u);
  EXPECT_EQ(g.edges().size(), 2u);
  std::istringstream iso("0 1\n");
  EXPECT_EQ(parse_edge_list(iso, 4).vertex_count(), 4u);
  std::istringstream bad("0 x\n");
  EXPECT_THROW(parse_edge_list(bad), FormatError);
}

TEST(Gm, WeightsFollowTheConstruction) {
  const auto g = BaseGraph::path(3);
  const auto p = ReductionParams::defaults(3, 4);
  EXPECT_EQ(p.M, (3 + 4) * 2 + 1);
  const auto inst = build_gm(g, p);
  EXPECT_EQ(inst.size(), 7u);
  EXPECT_EQ(inst.weight(0, 1), 0);       // edge of G
  EXPECT_EQ(inst.weight(0, 2), p.M);     // non-edge of G
  EXPECT_EQ(inst.weight(3, 4), p.N);     // S-S
  EXPECT_EQ(inst.weight(1, 5), p.L);     // V-S
  EXPECT_THROW(build_gm(g, ReductionParams::defaults(3, 3)), ParameterError);
  EXPECT_THROW(build_gm(g, ReductionParams::defaults(3, 7)), ParameterError);
}

TEST(Characterization, NoNonEdgeToursAreExactlyTheTwoOptimalOnes) {
  for (const auto& g : {BaseGraph::complete(2), BaseGraph::path(3), BaseGraph::complete(3)})
    for (std::size_t m = g.vertex_count() + 1; m <= 2 * g.vertex_count(); ++m) {
      const auto c = verify_no_nonedge_characterization(g, ReductionParams::defaults(g.vertex_count(), m));
      EXPECT_TRUE(c.holds) << "nV=" << g.vertex_count() << " m=" << m;
      EXPECT_EQ(c.two_optimal, c.without_non_edges);
      EXPECT_GT(c.two_optimal, 0u);
    }
}

TEST(PathCovers, KnownCounts) {
  EXPECT_EQ(count_path_covers_bruteforce(BaseGraph::complete(2)).a, (std::vector<std::uint64_t>{1, 1}));
  EXPECT_EQ(count_path_covers_bruteforce(BaseGraph::path(3)).a, (std::vector<std::uint64_t>{1, 2, 1}));
  EXPECT_EQ(count_path_covers_bruteforce(BaseGraph::complete(3)).a, (std::vector<std::uint64_t>{3, 3, 1}));
  EXPECT_EQ(count_path_covers_bruteforce(BaseGraph::path(4)).a, (std::vector<std::uint64_t>{1, 3, 3, 1}));
  EXPECT_EQ(count_path_covers_bruteforce(BaseGraph::edgeless(4)).a, (std::vector<std::uint64_t>{0, 0, 0, 1}));
  EXPECT_EQ(hamiltonian_path_count(BaseGraph::complete(5)), 60u);
  EXPECT_EQ(hamiltonian_path_count(BaseGraph::cycle(6)), 6u);
}

TEST(PathCovers, MatchCuttingOracle) {
  const std::vector<BaseGraph> graphs{BaseGraph::cycle(5), BaseGraph::complete(5), BaseGraph::path(6),
                                      BaseGraph(6, {{0, 1}, {0, 2}, {0, 3}, {3, 4}, {4, 5}, {1, 5}, {2, 4}})};
  for (const auto& g : graphs) EXPECT_EQ(as_rationals(count_path_covers_bruteforce(g).a), path_covers_by_cutting(g));
}

TEST(PathCovers, StrataSumToTotals) {
  const auto c = count_path_covers_bruteforce(BaseGraph::complete(5));
  for (std::size_t l = 1; l <= 5; ++l) {
    std::uint64_t s = 0;
    for (const auto x : c.by_stratum[l - 1]) s += x;
    EXPECT_EQ(s, c.of_size(l));
  }
}

TEST(Coefficients, OriginalAndCorrected) {
  EXPECT_EQ(coefficient(1, 3), BigInt(6));    // 3! 2! / 2!
  EXPECT_EQ(coefficient(2, 3), BigInt(24));   // 2 * 3! 2! / 1!
  EXPECT_THROW(coefficient(0, 3), DomainError);
  EXPECT_THROW(coefficient(4, 3), DomainError);
  EXPECT_EQ(corrected_coefficient(2, 0, 3), BigInt(6));
  EXPECT_EQ(corrected_coefficient(2, 2, 3), coefficient(2, 3));
  const auto c = build_matrix_C(3);
  EXPECT_EQ(c.rows(), 3u);
  EXPECT_EQ(c(0, 0), coefficient(1, 4));
  EXPECT_EQ(c(2, 2), coefficient(3, 6));
}

TEST(Coefficients, MatrixIsNonSingular) {
  for (std::size_t nv = 1; nv <= 8; ++nv) EXPECT_NE(determinant(build_matrix_C(nv)), 0) << nv;
}

TEST(Recovery, RoundTrip) {
  Stream rng(1, Purpose::test, 0);
  for (std::size_t nv = 1; nv <= 6; ++nv)
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<BigInt> a(nv);
      for (auto& x : a) x = static_cast<long>(rng.below(1000));
      const auto b = multiply(build_matrix_C(nv).transposed(), a);
      const auto back = recover_path_cover_counts(b, nv);
      for (std::size_t i = 0; i < nv; ++i) EXPECT_EQ(back[i], Rational(a[i]));
    }
  EXPECT_THROW(recover_path_cover_counts({1, 2}, 3), DimensionError);
}

TEST(Recovery, FrozenCensusValues) {
  const auto k2 = run_reduction(BaseGraph::complete(2));
  EXPECT_EQ(k2.b, (std::vector<BigInt>{12, 60}));
  const auto p3 = run_reduction(BaseGraph::path(3));
  EXPECT_EQ(p3.b, (std::vector<BigInt>{240, 1800, 15120}));
  const auto k3 = run_reduction(BaseGraph::complete(3));
  EXPECT_EQ(k3.b, (std::vector<BigInt>{360, 2520, 20160}));
  for (const auto* r : {&p3, &k3}) {
    EXPECT_TRUE(r->corrected.full_rank);
    EXPECT_TRUE(r->corrected_consistent());
    EXPECT_TRUE(r->corrected.integral);
  }
  // The original model fails on P3, whose covers include singletons.
  EXPECT_NE(p3.original.a, as_rationals(p3.brute_force.a));
}

TEST(Recovery, CorrectedRankDeficientBeyondThree) {
  const auto b = std::vector<BigInt>(4, 1);
  const auto r = recover_corrected_model(b, 4);
  EXPECT_FALSE(r.full_rank);
  EXPECT_GT(r.unknowns, 4u);
  EXPECT_FALSE(r.diagnostic.empty());
}

TEST(ToursPerCover, CorrectedCoefficient) {
  const auto g = BaseGraph::path(3);
  const auto p = ReductionParams::defaults(3, 4);
  EXPECT_EQ(tours_per_cover_empirical(g, p, PathCover({{0, 1, 2}})), 24u);
  EXPECT_EQ(tours_per_cover_empirical(g, p, PathCover({{0, 1}, {2}})), 72u);
  EXPECT_EQ(tours_per_cover_empirical(g, p, PathCover({{0}, {1}, {2}})), 72u);
  EXPECT_THROW(tours_per_cover_empirical(g, p, PathCover({{0, 2}, {1}})), ParameterError);

  const auto census = cover_census(g, p);
  for (const auto& [cover, count] : census)
    EXPECT_EQ(BigInt(count), corrected_coefficient(cover.size(), cover.non_singleton_paths(), p.m));
}

TEST(ToursPerCover, SingletonCounterexample) {
  const auto g = BaseGraph::complete(2);
  const auto p = ReductionParams::defaults(2, 3);
  EXPECT_EQ(tours_per_cover_empirical(g, p, PathCover({{0}, {1}})), 6u);
  EXPECT_EQ(coefficient(2, 3), BigInt(24));
}

TEST(Reduction, JsonReport) {
  const auto j = to_json(run_reduction(BaseGraph::path(3)));
  EXPECT_EQ(j.at("brute_force_a"), nlohmann::json({1, 2, 1}));
  EXPECT_EQ(j.at("recoveries").size(), 2u);
  EXPECT_EQ(j.at("recoveries")[1].at("a"), nlohmann::json({1, 2, 1}));
  EXPECT_TRUE(j.at("corrected_matches_brute_force").get<bool>());
}
