#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <ostream>
#include <span>
#include <vector>

#include <json.hpp>

#include "twoopt/exact.hpp"
#include "twoopt/graph.hpp"

namespace twoopt {

// A set of 2-changes on the reference tour (0, 1, ..., n-1). Tour-edge
// position p (1-based, as used throughout this module) is the edge
// (p-1, p mod n); position n is the closing edge (n-1, 0).
struct ChordDisjointSet {
  std::size_t n = 0;
  std::vector<TwoChange> moves;        // 0-based positions, first < second
  std::vector<std::size_t> k_by_edge;  // k_by_edge[p-1] = moves using edge position p
  std::vector<std::size_t> stage_of_move;

  static ChordDisjointSet from_moves(std::size_t n, std::vector<TwoChange> moves,
                                     std::vector<std::size_t> stages = {}) {
    ChordDisjointSet s;
    s.n = n;
    s.k_by_edge.assign(n, 0);
    for (const auto& mv : moves) {
      detail::check_move(n, mv);
      ++s.k_by_edge[mv.first];
      ++s.k_by_edge[mv.second];
    }
    if (stages.empty()) stages.assign(moves.size(), 0);
    s.moves = std::move(moves);
    s.stage_of_move = std::move(stages);
    return s;
  }

  std::size_t k(std::size_t position) const { return k_by_edge.at(position - 1); }
};

inline bool is_power_of_two_plus_one(std::size_t n) noexcept { return n >= 3 && std::has_single_bit(n - 1); }

inline void check_construction_size(std::size_t n) {
  if (!is_power_of_two_plus_one(n) || n < 5)
    throw DomainError("construction needs n = 2^k + 1 with k >= 2, got " + std::to_string(n));
}

// Stage t = 1..log2(n-1)-1 splits edges e_1..e_{n-1} into 2^t equal segments;
// red edges of each odd segment (1-based) pair with the even-position edges
// of the following blue segment. e_n is never used.
inline ChordDisjointSet construct_S(std::size_t n) {
  check_construction_size(n);
  const std::size_t edges = n - 1;
  const int levels = std::countr_zero(edges);
  std::vector<TwoChange> moves;
  std::vector<std::size_t> stages;
  for (int t = 1; t < levels; ++t) {
    const std::size_t seg = edges >> t;
    for (std::size_t i = 0; i < (std::size_t{1} << t); i += 2) {
      for (std::size_t red = i * seg + 1; red <= (i + 1) * seg; ++red) {
        for (std::size_t blue = (i + 1) * seg + 2; blue <= (i + 2) * seg; blue += 2) {
          moves.push_back({red - 1, blue - 1});
          stages.push_back(static_cast<std::size_t>(t));
        }
      }
    }
  }
  return ChordDisjointSet::from_moves(n, std::move(moves), std::move(stages));
}

inline std::array<Edge, 2> chords_on_reference_tour(std::size_t n, TwoChange s) {
  const Tour ref = Tour::identity(n);
  return added_edges(ref.order(), s);
}

// Exhaustive pairwise comparison of the added chord-edges.
inline bool verify_chord_disjoint(const ChordDisjointSet& s) {
  const Tour ref = Tour::identity(s.n);
  std::vector<std::array<Edge, 2>> chords;
  chords.reserve(s.moves.size());
  for (const auto& mv : s.moves) chords.push_back(added_edges(ref.order(), mv));
  for (std::size_t a = 0; a < chords.size(); ++a)
    for (std::size_t b = a + 1; b < chords.size(); ++b)
      for (const auto& x : chords[a])
        for (const auto& y : chords[b])
          if (x == y) return false;
  return true;
}

struct Spectrum {
  std::vector<std::size_t> values;  // sorted k_e over all n edges
  BigInt positive_product = 1;
  double log_positive_product = 0.0;

  std::size_t zeros() const { return static_cast<std::size_t>(std::count(values.begin(), values.end(), 0)); }
  std::size_t max() const { return values.empty() ? 0 : values.back(); }
};

inline Spectrum participation_spectrum(const ChordDisjointSet& s) {
  Spectrum sp;
  sp.values = s.k_by_edge;
  std::sort(sp.values.begin(), sp.values.end());
  for (const auto k : sp.values) {
    if (k == 0) continue;
    sp.positive_product *= k;
    sp.log_positive_product += std::log(static_cast<double>(k));
  }
  return sp;
}

// Predicted k_e from the binary label of edge position p: bit t is 1 iff the
// edge is red at stage t. Odd positions read the label as a binary number b;
// even positions give (n-3) - b. Position n (the closing edge) is 0.
inline std::size_t participation_formula(std::size_t n, std::size_t position) {
  check_construction_size(n);
  if (position < 1 || position > n) throw DomainError("edge position out of range");
  if (position == n) return 0;
  const std::size_t edges = n - 1;
  const int levels = std::countr_zero(edges);
  std::size_t label = 0;
  for (int t = 1; t < levels; ++t) {
    const std::size_t segment = (position - 1) / (edges >> t);
    label = (label << 1) | (segment % 2 == 0 ? 1u : 0u);
  }
  return position % 2 == 1 ? label : (n - 3) - label;
}

// ln of prod_{k_e > 0} sqrt(pi / (2 k_e)).
inline double log_product_bound(const ChordDisjointSet& s) {
  double acc = 0.0;
  for (const auto k : s.k_by_edge)
    if (k > 0) acc += 0.5 * (std::log(std::numbers::pi) - std::log(2.0) - std::log(static_cast<double>(k)));
  return acc;
}

inline nlohmann::json to_json(const ChordDisjointSet& s) {
  nlohmann::json moves = nlohmann::json::array();
  for (const auto& mv : s.moves) moves.push_back({mv.first, mv.second});
  return {{"n", s.n}, {"moves", moves}, {"k", s.k_by_edge}, {"stages", s.stage_of_move}};
}

inline void write_spectrum_csv(std::ostream& out, const ChordDisjointSet& s) {
  out << "position,k,formula_k\n";
  for (std::size_t p = 1; p <= s.n; ++p) out << p << ',' << s.k(p) << ',' << participation_formula(s.n, p) << '\n';
}

}  // namespace twoopt
