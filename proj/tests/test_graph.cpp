#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "twoopt/graph.hpp"
#include "twoopt/graph_io.hpp"
#include "twoopt/monte_carlo.hpp"

using namespace twoopt;

TEST(EdgeIndex, LexicographicAndInvertible) {
  EXPECT_EQ(edge_index(5, 0, 1), 0u);
  EXPECT_EQ(edge_index(5, 0, 4), 3u);
  EXPECT_EQ(edge_index(5, 1, 2), 4u);
  EXPECT_EQ(edge_index(5, 3, 4), 9u);
  EXPECT_EQ(edge_index(5, 4, 3), 9u);
  for (std::size_t n = 2; n <= 12; ++n) {
    std::size_t k = 0;
    for (Vertex i = 0; i < n; ++i)
      for (Vertex j = i + 1; j < n; ++j, ++k) {
        EXPECT_EQ(edge_index(n, i, j), k);
        EXPECT_EQ(edge_endpoints(n, k), std::make_pair(i, j));
      }
    EXPECT_EQ(k, pair_count(n));
  }
}

TEST(Instance, ValidatesInput) {
  EXPECT_THROW(FloatInstance(3, std::vector<double>(3, 1.0)), InvalidSize);
  EXPECT_THROW(FloatInstance(5, std::vector<double>(9, 1.0)), DimensionError);
  EXPECT_THROW(FloatInstance(4, {1, 1, 1, 1, 1, -0.5}), ParameterError);
  EXPECT_THROW(FloatInstance(4, {1, 1, 1, 1, 1, std::nan("")}), ParameterError);
  const auto c = ExactInstance::constant(6, 7);
  EXPECT_EQ(c.size(), 6u);
  EXPECT_EQ(c.weight(2, 5), 7);
}

TEST(Instance, RandomIsSeededAndUniform) {
  const auto a = random_instance(8, 11), b = random_instance(8, 11), c = random_instance(8, 12);
  EXPECT_TRUE(std::equal(a.weights().begin(), a.weights().end(), b.weights().begin()));
  EXPECT_FALSE(std::equal(a.weights().begin(), a.weights().end(), c.weights().begin()));
  for (const double w : a.weights()) {
    EXPECT_GE(w, 0.0);
    EXPECT_LT(w, 1.0);
  }
}

TEST(Tour, CanonicalForm) {
  EXPECT_THROW(Tour({0, 1}), InvalidSize);
  EXPECT_THROW(Tour({0, 1, 1, 2}), std::invalid_argument);
  const Tour t = Tour::canonical({2, 4, 0, 3, 1});
  // Rotate to start at 0 -> (0,3,1,2,4); 3 > 4 is false so direction already canonical.
  EXPECT_EQ(std::vector<Vertex>(t.order().begin(), t.order().end()), (std::vector<Vertex>{0, 3, 1, 2, 4}));
  const Tour r = Tour::canonical({0, 4, 2, 1, 3});
  EXPECT_EQ(std::vector<Vertex>(r.order().begin(), r.order().end()), (std::vector<Vertex>{0, 3, 1, 2, 4}));
  EXPECT_TRUE(t.is_canonical());
  EXPECT_TRUE(Tour::identity(6).is_canonical());
}

TEST(TwoChange, Validity) {
  EXPECT_TRUE(TwoChange::valid(0, 2, 5));
  EXPECT_FALSE(TwoChange::valid(0, 1, 5));
  EXPECT_FALSE(TwoChange::valid(0, 4, 5));
  EXPECT_TRUE(TwoChange::valid(1, 4, 5));
  EXPECT_THROW(TwoChange::make(2, 3, 6), InvalidMove);
  for (std::size_t n = 4; n <= 12; ++n) EXPECT_EQ(enumerate_two_changes(n).size(), n * (n - 3) / 2);
}

TEST(TwoChange, GeometryOnIdentity) {
  const Tour t = Tour::identity(6);
  const auto rem = removed_edges(t.order(), {1, 4});
  const auto add = added_edges(t.order(), {1, 4});
  EXPECT_EQ(rem[0], (Edge{1, 2}));
  EXPECT_EQ(rem[1], (Edge{4, 5}));
  EXPECT_EQ(add[0], (Edge{1, 4}));
  EXPECT_EQ(add[1], (Edge{2, 5}));
}

// Oracle: length of the explicitly reversed tour.
TEST(TwoChange, DeltaMatchesLengthDifference) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto inst = random_instance(9, seed);
    const Tour t = Tour::canonical({0, 5, 3, 8, 1, 7, 2, 6, 4});
    for (const auto s : enumerate_two_changes(9)) {
      const Tour next = apply_two_change(t, s);
      EXPECT_TRUE(next.is_canonical());
      EXPECT_NEAR(two_change_delta(inst, t, s), tour_length(inst, t) - tour_length(inst, next), 1e-12);
    }
  }
}

TEST(TwoChange, ApplyIsInvolutionUpToCanonicalForm) {
  const Tour t = Tour::identity(7);
  for (const auto s : enumerate_two_changes(7)) {
    std::vector<Vertex> o(t.order().begin(), t.order().end());
    std::reverse(o.begin() + static_cast<long>(s.first) + 1, o.begin() + static_cast<long>(s.second) + 1);
    std::reverse(o.begin() + static_cast<long>(s.first) + 1, o.begin() + static_cast<long>(s.second) + 1);
    EXPECT_EQ(Tour::canonical(o), t);
    EXPECT_NE(apply_two_change(t, s), t);
  }
}

TEST(Enumeration, CountsAndUniqueness) {
  EXPECT_EQ(canonical_tour_count(4), 3u);
  EXPECT_EQ(canonical_tour_count(5), 12u);
  EXPECT_EQ(canonical_tour_count(10), 181440u);
  for (std::size_t n = 4; n <= 8; ++n) {
    const auto tours = enumerate_canonical_tours(n);
    EXPECT_EQ(tours.size(), canonical_tour_count(n));
    EXPECT_TRUE(std::is_sorted(tours.begin(), tours.end()));
    EXPECT_EQ(std::set<Tour>(tours.begin(), tours.end()).size(), tours.size());
    for (const auto& t : tours) EXPECT_TRUE(t.is_canonical());
  }
  EXPECT_THROW(enumerate_canonical_tours(11), CapExceeded);
}

TEST(Rng, StreamsAreKeyed) {
  Stream a(1, Purpose::test, 0), b(1, Purpose::test, 0), c(1, Purpose::test, 1), d(2, Purpose::test, 0);
  const auto x = a();
  EXPECT_EQ(x, b());
  EXPECT_NE(x, c());
  EXPECT_NE(x, d());
  Stream u(3, Purpose::test, 0);
  Accumulator acc, norm, half;
  for (int i = 0; i < 200000; ++i) {
    acc.add(u.uniform());
    norm.add(u.normal());
    half.add(u.half_normal());
  }
  EXPECT_NEAR(acc.mean(), 0.5, 0.005);
  EXPECT_NEAR(norm.mean(), 0.0, 0.01);
  EXPECT_NEAR(norm.variance(), 1.0, 0.02);
  EXPECT_NEAR(half.mean(), std::sqrt(2.0 / std::numbers::pi), 0.01);
  for (int i = 0; i < 1000; ++i) EXPECT_LT(u.below(7), 7u);
}

TEST(MonteCarlo, BlockedIsWorkerIndependent) {
  auto body = [](Stream& rng, std::uint64_t count) {
    Accumulator a;
    for (std::uint64_t i = 0; i < count; ++i) a.add(rng.uniform());
    return a;
  };
  const auto one = blocked_monte_carlo<Accumulator>(50'001, 5, Purpose::test, 1, body);
  const auto four = blocked_monte_carlo<Accumulator>(50'001, 5, Purpose::test, 4, body);
  EXPECT_EQ(one.count, 50'001u);
  EXPECT_EQ(one.sum, four.sum);
  EXPECT_EQ(one.sum_sq, four.sum_sq);
}

TEST(MonteCarlo, ProportionAndAgreement) {
  const auto p = proportion(25, 100);
  EXPECT_DOUBLE_EQ(p.value, 0.25);
  EXPECT_DOUBLE_EQ(p.std_error, std::sqrt(0.25 * 0.75 / 100));
  EXPECT_TRUE(proportion(0, 10).flagged);
  EXPECT_TRUE(agrees_within(Estimate{1.0, 0.1, 1, false}, Estimate{1.2, 0.1, 1, false}, 3));
  EXPECT_FALSE(agrees_within(Estimate{1.0, 0.01, 1, false}, 1.5, 3));
}

TEST(GraphIo, RoundTrip) {
  const auto inst = random_instance(6, 3);
  std::stringstream s;
  s << to_json(inst).dump();
  const auto back = read_instance(s);
  ASSERT_TRUE(std::holds_alternative<FloatInstance>(back));
  const auto& f = std::get<FloatInstance>(back);
  EXPECT_TRUE(std::equal(f.weights().begin(), f.weights().end(), inst.weights().begin()));

  const ExactInstance e(4, {1, 2, 3, 4, 5, 6}, "x");
  const auto j = to_json(e);
  EXPECT_EQ(j.at("mode"), "exact");
  const auto eback = instance_from_json(j);
  EXPECT_TRUE(std::holds_alternative<ExactInstance>(eback));
}

TEST(GraphIo, RejectsBadInput) {
  std::stringstream garbage("{not json");
  EXPECT_THROW(read_instance(garbage), FormatError);
  EXPECT_THROW(instance_from_json({{"n", 4}, {"mode", "exact"}, {"weights", {1, 2, 3, 4, 5, 6.5}}}), ModeError);
  EXPECT_THROW(instance_from_json({{"n", 4}, {"mode", "weird"}, {"weights", {1, 2, 3, 4, 5, 6}}}), ModeError);
  EXPECT_THROW(instance_from_json({{"mode", "exact"}}), FormatError);
}
