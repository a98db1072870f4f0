#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <sstream>

#include "twoopt/census.hpp"

using namespace twoopt;

namespace {

// Independent oracle: every ordering with vertex 0 first, 2-optimality by
// explicit reversal and full length recomputation; each tour appears twice.
template <WeightType W>
std::uint64_t naive_two_opt_count(const Instance<W>& inst) {
  const std::size_t n = inst.size();
  std::vector<Vertex> t(n);
  std::iota(t.begin(), t.end(), 0);
  auto length = [&](const std::vector<Vertex>& v) {
    W s{0};
    for (std::size_t i = 0; i < n; ++i) s += inst.weight(v[i], v[(i + 1) % n]);
    return s;
  };
  std::uint64_t twice = 0;
  do {
    const W base = length(t);
    bool local = true;
    for (std::size_t i = 0; i < n && local; ++i)
      for (std::size_t j = i + 2; j < n && local; ++j) {
        if (i == 0 && j == n - 1) continue;
        auto u = t;
        std::reverse(u.begin() + static_cast<long>(i) + 1, u.begin() + static_cast<long>(j) + 1);
        if (length(u) < base) local = false;
      }
    twice += local;
  } while (std::next_permutation(t.begin() + 1, t.end()));
  return twice / 2;
}

}  // namespace

TEST(Census, EqualWeightsAllOptimal) {
  for (std::size_t n = 4; n <= 8; ++n) {
    const auto inst = ExactInstance::constant(n, 1);
    EXPECT_EQ(count_two_optimal_exact(inst), canonical_tour_count(n));
  }
  EXPECT_EQ(count_two_optimal_exact(ExactInstance::constant(5, 1)), 12u);
}

TEST(Census, MatchesNaiveOracle) {
  for (std::size_t n = 5; n <= 8; ++n)
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      const auto inst = random_instance(n, seed);
      EXPECT_EQ(count_two_optimal_exact(inst), naive_two_opt_count(inst)) << "n=" << n << " seed=" << seed;
    }
}

TEST(Census, IntegerTiesAreNotImprovements) {
  // Two weight classes produce many ties; the oracle uses strict improvement too.
  std::vector<std::int64_t> w(pair_count(7));
  for (std::size_t k = 0; k < w.size(); ++k) w[k] = static_cast<std::int64_t>(k % 3 == 0 ? 2 : 1);
  const ExactInstance inst(7, w);
  EXPECT_EQ(count_two_optimal_exact(inst), naive_two_opt_count(inst));
}

TEST(Census, WorkerCountDoesNotMatter) {
  const auto inst = random_instance(9, 42);
  EXPECT_EQ(count_two_optimal_exact(inst, {1, false}), count_two_optimal_exact(inst, {3, false}));
}

TEST(Census, NeverZeroForRandomInstances) {
  // The shortest tour is always 2-optimal.
  for (std::uint64_t seed = 0; seed < 10; ++seed) EXPECT_GE(count_two_optimal_exact(random_instance(7, seed)), 1u);
}

TEST(Census, CapsRefuse) {
  EXPECT_THROW(count_two_optimal_exact(random_instance(11, 0)), CapExceeded);
  try {
    count_two_optimal_exact(random_instance(11, 0));
  } catch (const CapExceeded& e) {
    EXPECT_NE(std::string(e.what()).find("--i-know-this-is-huge"), std::string::npos);
  }
}

TEST(TransitionGraph, SinksAreTheTwoOptimalTours) {
  for (std::size_t n = 5; n <= 7; ++n)
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto inst = random_instance(n, seed);
      const auto g = build_transition_graph(inst);
      ASSERT_EQ(g.nodes.size(), canonical_tour_count(n));
      const auto st = transition_stats(g.graph, {200, seed, 1});
      EXPECT_EQ(st.sinks, count_two_optimal_exact(inst));
      const auto deg = g.graph.out_degrees();
      for (std::size_t v = 0; v < deg.size(); ++v) EXPECT_EQ(deg[v] == 0, is_two_optimal(inst, g.nodes[v]));
    }
}

TEST(TransitionGraph, ArcsStrictlyImprove) {
  const auto inst = random_instance(7, 9);
  const auto g = build_transition_graph(inst);
  EXPECT_TRUE(std::is_sorted(g.graph.arcs.begin(), g.graph.arcs.end()));
  for (const auto& a : g.graph.arcs) {
    EXPECT_LT(g.lengths[a.to], g.lengths[a.from]);
    EXPECT_NE(a.from, a.to);
  }
  EXPECT_TRUE(is_acyclic(g.graph));
}

TEST(TransitionGraph, EqualWeightsHaveNoArcs) {
  const auto g = build_transition_graph(ExactInstance::constant(6, 3));
  EXPECT_TRUE(g.graph.arcs.empty());
  const auto st = transition_stats(g.graph, {50, 0, 1});
  EXPECT_EQ(st.sinks, 60u);
  EXPECT_EQ(st.longest_path, 0u);
  EXPECT_EQ(st.walk_lengths, (std::vector<std::uint64_t>{50}));
}

TEST(TransitionGraph, WalksAreBoundedByLongestPath) {
  const auto inst = random_instance(8, 1);
  const auto g = build_transition_graph(inst);
  const auto a = transition_stats(g.graph, {500, 7, 1});
  const auto b = transition_stats(g.graph, {500, 7, 4});
  EXPECT_EQ(a.walk_lengths, b.walk_lengths);
  EXPECT_LE(a.longest_walk(), a.longest_path);
  std::uint64_t total = 0;
  for (const auto c : a.walk_lengths) total += c;
  EXPECT_EQ(total, 500u);
}

TEST(TransitionGraph, CycleIsADomainError) {
  ArcGraph g{3, {{0, 1}, {1, 2}, {2, 0}}};
  EXPECT_FALSE(is_acyclic(g));
  EXPECT_THROW(transition_stats(g), DomainError);
}

TEST(TransitionGraph, LongestPathOnSmallDag) {
  ArcGraph g{5, {{0, 1}, {1, 2}, {0, 2}, {2, 3}, {4, 3}}};
  const auto st = transition_stats(g, {10, 0, 1});
  EXPECT_EQ(st.longest_path, 3u);
  EXPECT_EQ(st.sinks, 1u);
  std::ostringstream csv;
  write_arcs_csv(csv, g);
  EXPECT_EQ(csv.str().substr(0, 8), "from,to\n");
}

TEST(TransitionGraph, CapIsNine) {
  EXPECT_THROW(build_transition_graph(random_instance(10, 0)), CapExceeded);
}
