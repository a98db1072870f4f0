#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <concepts>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "twoopt/errors.hpp"
#include "twoopt/rng.hpp"

namespace twoopt {

using Vertex = std::uint32_t;

inline constexpr std::size_t kDefaultEnumerationCap = 10;

// Exact mode carries integer weights (reduction instances, where ties are
// load-bearing); float mode carries doubles (random instances).
template <class W>
concept WeightType = std::same_as<W, std::int64_t> || std::same_as<W, double>;

enum class WeightMode { exact, floating };

constexpr std::size_t pair_count(std::size_t n) noexcept { return n * (n - 1) / 2; }

// Lexicographic index of the unordered pair {i, j}: (0,1), (0,2), ..., (n-2,n-1).
constexpr std::size_t edge_index(std::size_t n, std::size_t i, std::size_t j) noexcept {
  if (i > j) std::swap(i, j);
  return i * n - i * (i + 1) / 2 + (j - i - 1);
}

// Inverse of edge_index.
constexpr std::pair<Vertex, Vertex> edge_endpoints(std::size_t n, std::size_t index) noexcept {
  std::size_t i = 0;
  while (index >= n - 1 - i) {
    index -= n - 1 - i;
    ++i;
  }
  return {static_cast<Vertex>(i), static_cast<Vertex>(i + 1 + index)};
}

template <WeightType W>
class Instance {
 public:
  using weight_type = W;
  static constexpr WeightMode mode = std::same_as<W, double> ? WeightMode::floating : WeightMode::exact;

  Instance(std::size_t n, std::vector<W> weights, std::string label = {})
      : n_(n), weights_(std::move(weights)), label_(std::move(label)) {
    if (n_ < 4) throw InvalidSize("instance needs at least 4 vertices, got " + std::to_string(n_));
    if (weights_.size() != pair_count(n_))
      throw DimensionError("instance on " + std::to_string(n_) + " vertices needs " +
                           std::to_string(pair_count(n_)) + " weights, got " +
                           std::to_string(weights_.size()));
    for (const W w : weights_) {
      if constexpr (std::same_as<W, double>) {
        if (!std::isfinite(w)) throw ParameterError("weights must be finite");
      }
      if (w < W{0}) throw ParameterError("weights must be non-negative");
    }
  }

  static Instance constant(std::size_t n, W value, std::string label = {}) {
    return Instance(n, std::vector<W>(n >= 2 ? pair_count(n) : 0, value), std::move(label));
  }

  std::size_t size() const noexcept { return n_; }
  const std::string& label() const noexcept { return label_; }
  std::span<const W> weights() const noexcept { return weights_; }

  W weight(Vertex i, Vertex j) const noexcept { return weights_[edge_index(n_, i, j)]; }

  friend bool operator==(const Instance&, const Instance&) = default;

 private:
  std::size_t n_;
  std::vector<W> weights_;
  std::string label_;
};

using ExactInstance = Instance<std::int64_t>;
using FloatInstance = Instance<double>;
using AnyInstance = std::variant<ExactInstance, FloatInstance>;

inline FloatInstance random_instance(std::size_t n, std::uint64_t seed) {
  if (n < 4) throw InvalidSize("random_instance needs n >= 4, got " + std::to_string(n));
  Stream rng(seed, Purpose::instance, 0);
  std::vector<double> w(pair_count(n));
  for (auto& x : w) x = rng.uniform();
  return FloatInstance(n, std::move(w), "uniform n=" + std::to_string(n) + " seed=" + std::to_string(seed));
}

namespace detail {

inline bool is_permutation_of_iota(std::span<const Vertex> order) {
  std::vector<bool> seen(order.size(), false);
  for (const Vertex v : order) {
    if (v >= order.size() || seen[v]) return false;
    seen[v] = true;
  }
  return true;
}

// Rotates vertex 0 to the front and reflects so that order[1] < order[n-1].
inline void canonicalize(std::vector<Vertex>& order) {
  const auto zero = std::find(order.begin(), order.end(), Vertex{0});
  std::rotate(order.begin(), zero, order.end());
  if (order.size() > 2 && order[1] > order.back()) std::reverse(order.begin() + 1, order.end());
}

}  // namespace detail

class Tour {
 public:
  explicit Tour(std::vector<Vertex> order) : order_(std::move(order)) {
    if (order_.size() < 3) throw InvalidSize("a tour needs at least 3 vertices");
    if (!detail::is_permutation_of_iota(order_))
      throw ParameterError("tour order must be a permutation of 0..n-1");
  }

  static Tour canonical(std::vector<Vertex> order) {
    Tour t(std::move(order));
    detail::canonicalize(t.order_);
    return t;
  }

  static Tour identity(std::size_t n) {
    std::vector<Vertex> order(n);
    std::iota(order.begin(), order.end(), Vertex{0});
    return Tour(std::move(order));
  }

  Tour canonicalized() const { return canonical(order_); }

  bool is_canonical() const noexcept { return order_[0] == 0 && order_[1] < order_.back(); }

  std::size_t size() const noexcept { return order_.size(); }
  Vertex operator[](std::size_t i) const noexcept { return order_[i]; }
  std::span<const Vertex> order() const noexcept { return order_; }

  auto operator<=>(const Tour&) const = default;

 private:
  std::vector<Vertex> order_;
};

// A 2-change is identified by the positions of its two removed tour-edges:
// position p is the edge (t[p], t[p+1 mod n]).
struct TwoChange {
  std::size_t first = 0;
  std::size_t second = 0;

  static bool valid(std::size_t i, std::size_t j, std::size_t n) noexcept {
    if (i > j) std::swap(i, j);
    return j < n && j - i >= 2 && !(i == 0 && j == n - 1);
  }

  static TwoChange make(std::size_t i, std::size_t j, std::size_t n) {
    if (i > j) std::swap(i, j);
    if (!valid(i, j, n))
      throw InvalidMove("positions " + std::to_string(i) + "," + std::to_string(j) +
                        " are not a valid non-adjacent pair on a tour of size " + std::to_string(n));
    return {i, j};
  }

  auto operator<=>(const TwoChange&) const = default;
};

using Edge = std::pair<Vertex, Vertex>;

inline Edge normalized(Vertex a, Vertex b) noexcept { return a < b ? Edge{a, b} : Edge{b, a}; }

inline std::array<Edge, 2> removed_edges(std::span<const Vertex> t, TwoChange s) noexcept {
  const std::size_t n = t.size();
  return {normalized(t[s.first], t[s.first + 1]), normalized(t[s.second], t[(s.second + 1) % n])};
}

inline std::array<Edge, 2> added_edges(std::span<const Vertex> t, TwoChange s) noexcept {
  const std::size_t n = t.size();
  return {normalized(t[s.first], t[s.second]), normalized(t[s.first + 1], t[(s.second + 1) % n])};
}

inline std::size_t two_change_count(std::size_t n) noexcept { return n * (n - 3) / 2; }

inline std::vector<TwoChange> enumerate_two_changes(std::size_t n) {
  if (n < 4) throw InvalidSize("2-changes need n >= 4, got " + std::to_string(n));
  std::vector<TwoChange> moves;
  moves.reserve(two_change_count(n));
  for (std::size_t i = 0; i + 2 < n; ++i)
    for (std::size_t j = i + 2; j < n; ++j)
      if (!(i == 0 && j == n - 1)) moves.push_back({i, j});
  return moves;
}

namespace detail {

template <WeightType W>
W tour_length(const Instance<W>& inst, std::span<const Vertex> t) noexcept {
  const std::size_t n = t.size();
  W total{0};
  for (std::size_t p = 0; p < n; ++p) total += inst.weight(t[p], t[(p + 1) % n]);
  return total;
}

template <WeightType W>
W two_change_delta(const Instance<W>& inst, std::span<const Vertex> t, TwoChange s) noexcept {
  const std::size_t n = t.size();
  const Vertex a = t[s.first], b = t[s.first + 1], c = t[s.second], d = t[(s.second + 1) % n];
  return (inst.weight(a, b) + inst.weight(c, d)) - (inst.weight(a, c) + inst.weight(b, d));
}

inline void check_move(std::size_t n, TwoChange s) {
  if (!TwoChange::valid(s.first, s.second, n) || s.first > s.second)
    throw InvalidMove("invalid 2-change (" + std::to_string(s.first) + "," +
                      std::to_string(s.second) + ") on a tour of size " + std::to_string(n));
}

}  // namespace detail

template <WeightType W>
W tour_length(const Instance<W>& inst, const Tour& t) {
  if (t.size() != inst.size())
    throw DimensionError("tour has " + std::to_string(t.size()) + " vertices, instance has " +
                         std::to_string(inst.size()));
  return detail::tour_length(inst, t.order());
}

// Improvement w(e1) + w(e2) - w(f1) - w(f2); positive means strictly improving.
template <WeightType W>
W two_change_delta(const Instance<W>& inst, const Tour& t, TwoChange s) {
  if (t.size() != inst.size()) throw DimensionError("tour/instance size mismatch");
  detail::check_move(t.size(), s);
  return detail::two_change_delta(inst, t.order(), s);
}

inline Tour apply_two_change(const Tour& t, TwoChange s) {
  detail::check_move(t.size(), s);
  std::vector<Vertex> order(t.order().begin(), t.order().end());
  std::reverse(order.begin() + static_cast<std::ptrdiff_t>(s.first) + 1,
               order.begin() + static_cast<std::ptrdiff_t>(s.second) + 1);
  return Tour::canonical(std::move(order));
}

inline std::uint64_t canonical_tour_count(std::size_t n) noexcept {
  std::uint64_t f = 1;
  for (std::size_t k = 2; k < n; ++k) f *= k;
  return n < 3 ? 0 : f / 2;
}

inline void check_enumeration_cap(const char* what, std::size_t n, std::size_t cap) {
  if (n > cap) throw CapExceeded(cap_message(what, n, cap));
}

// Visits, in lexicographic order, every canonical tour whose second vertex is
// `second`. The visitor receives the order as a span valid only for the call.
template <class Visitor>
void for_each_canonical_tour_with_second(std::size_t n, Vertex second, Visitor&& visit) {
  std::vector<Vertex> order(n);
  order[0] = 0;
  order[1] = second;
  std::vector<Vertex> rest;
  rest.reserve(n - 2);
  for (Vertex v = 1; v < n; ++v)
    if (v != second) rest.push_back(v);
  do {
    if (rest.back() > second) {
      std::copy(rest.begin(), rest.end(), order.begin() + 2);
      visit(std::span<const Vertex>(order));
    }
  } while (std::next_permutation(rest.begin(), rest.end()));
}

// Visits each of the (n-1)!/2 canonical tours exactly once, in lexicographic order.
template <class Visitor>
void for_each_canonical_tour(std::size_t n, Visitor&& visit, std::size_t cap = kDefaultEnumerationCap) {
  if (n < 4) throw InvalidSize("tour enumeration needs n >= 4, got " + std::to_string(n));
  check_enumeration_cap("tour enumeration", n, cap);
  for (Vertex s = 1; s + 1 < n; ++s) for_each_canonical_tour_with_second(n, s, visit);
}

inline std::vector<Tour> enumerate_canonical_tours(std::size_t n, std::size_t cap = kDefaultEnumerationCap) {
  std::vector<Tour> tours;
  tours.reserve(static_cast<std::size_t>(canonical_tour_count(n)));
  for_each_canonical_tour(
      n, [&](std::span<const Vertex> t) { tours.emplace_back(std::vector<Vertex>(t.begin(), t.end())); },
      cap);
  return tours;
}

}  // namespace twoopt
