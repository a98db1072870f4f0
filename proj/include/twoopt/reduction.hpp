#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "twoopt/census.hpp"
#include "twoopt/exact.hpp"
#include "twoopt/graph.hpp"

namespace twoopt {

// Simple undirected graph on {0, ..., nV-1}: the #HamPath input of the reduction.
class BaseGraph {
 public:
  BaseGraph(std::size_t vertex_count, std::vector<Edge> edges) : nv_(vertex_count) {
    if (nv_ < 2) throw InvalidSize("base graph needs at least 2 vertices");
    if (nv_ > 32) throw InvalidSize("base graph is limited to 32 vertices");
    for (auto [u, v] : edges) {
      if (u == v) throw ParameterError("self-loop on vertex " + std::to_string(u));
      if (u >= nv_ || v >= nv_) throw ParameterError("edge endpoint out of range");
      edges_.push_back(normalized(u, v));
    }
    std::sort(edges_.begin(), edges_.end());
    if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end())
      throw ParameterError("duplicate edge in base graph");
    adjacency_.assign(nv_, 0);
    for (auto [u, v] : edges_) {
      adjacency_[u] |= 1u << v;
      adjacency_[v] |= 1u << u;
    }
  }

  static BaseGraph path(std::size_t n) {
    std::vector<Edge> e;
    for (Vertex v = 0; v + 1 < n; ++v) e.emplace_back(v, v + 1);
    return {n, e};
  }
  static BaseGraph cycle(std::size_t n) {
    auto e = path(n).edges_;
    e.emplace_back(0, static_cast<Vertex>(n - 1));
    return {n, e};
  }
  static BaseGraph complete(std::size_t n) {
    std::vector<Edge> e;
    for (Vertex u = 0; u < n; ++u)
      for (Vertex v = u + 1; v < n; ++v) e.emplace_back(u, v);
    return {n, e};
  }
  static BaseGraph edgeless(std::size_t n) { return {n, {}}; }

  std::size_t vertex_count() const noexcept { return nv_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  bool has_edge(Vertex u, Vertex v) const noexcept { return (adjacency_[u] >> v) & 1u; }
  std::uint32_t neighbours(Vertex v) const noexcept { return adjacency_[v]; }
  bool is_complete() const noexcept { return edges_.size() == pair_count(nv_); }

 private:
  std::size_t nv_;
  std::vector<Edge> edges_;
  std::vector<std::uint32_t> adjacency_;
};

// One "u v" pair per line, 0-indexed; blank lines and '#' comments ignored.
// The vertex count is one more than the largest label unless given.
inline BaseGraph parse_edge_list(std::istream& in, std::optional<std::size_t> vertex_count = std::nullopt) {
  std::vector<Edge> edges;
  std::size_t max_label = 0, line_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    long long u = 0, v = 0;
    if (!(ls >> u)) continue;
    std::string extra;
    if (!(ls >> v) || (ls >> extra) || u < 0 || v < 0)
      throw FormatError("edge list line " + std::to_string(line_no) + ": expected two non-negative integers");
    edges.emplace_back(static_cast<Vertex>(u), static_cast<Vertex>(v));
    max_label = std::max<std::size_t>(max_label, static_cast<std::size_t>(std::max(u, v)));
  }
  const std::size_t nv = vertex_count.value_or(edges.empty() ? 0 : max_label + 1);
  return {nv, std::move(edges)};
}

// Weights of G_m: 0 on edges of G, M on non-edges inside V, N inside S, L between V and S.
struct ReductionParams {
  std::size_t m = 0;
  std::int64_t L = 1;
  std::int64_t N = 2;
  std::int64_t M = 0;

  // L = 1, N = 2, M = (nV + m) N + 1: M exceeds the weight of any tour that avoids non-edges.
  static ReductionParams defaults(std::size_t nv, std::size_t m) {
    return {m, 1, 2, static_cast<std::int64_t>((nv + m) * 2 + 1)};
  }

  void validate(std::size_t nv) const {
    if (m < nv + 1 || m > 2 * nv)
      throw ParameterError("m = " + std::to_string(m) + " outside [" + std::to_string(nv + 1) + ", " +
                           std::to_string(2 * nv) + "]");
    if (L <= 0) throw ParameterError("L must be positive");
    if (N != 2 * L) throw ParameterError("reduction requires N = 2L");
    if (M <= static_cast<std::int64_t>(nv + m) * N)
      throw ParameterError("reduction requires M > (nV + m) N");
  }
};

inline ExactInstance build_gm(const BaseGraph& g, const ReductionParams& p) {
  const std::size_t nv = g.vertex_count();
  p.validate(nv);
  const std::size_t n = nv + p.m;
  std::vector<std::int64_t> w(pair_count(n));
  for (Vertex i = 0; i < n; ++i) {
    for (Vertex j = i + 1; j < n; ++j) {
      std::int64_t x;
      if (j < nv) x = g.has_edge(i, j) ? 0 : p.M;
      else if (i >= nv) x = p.N;
      else x = p.L;
      w[edge_index(n, i, j)] = x;
    }
  }
  return ExactInstance(n, std::move(w), "G_m nV=" + std::to_string(nv) + " m=" + std::to_string(p.m));
}

inline bool contains_non_edge(const BaseGraph& g, std::span<const Vertex> t) noexcept {
  const std::size_t nv = g.vertex_count(), n = t.size();
  for (std::size_t p = 0; p < n; ++p) {
    const Vertex a = t[p], b = t[(p + 1) % n];
    if (a < nv && b < nv && !g.has_edge(a, b)) return true;
  }
  return false;
}

struct ReductionEnumeration {
  unsigned workers = 1;
  bool allow_huge = false;
  std::size_t cap() const noexcept { return allow_huge ? kGraphHugeCap : kGraphCap; }
};

struct CharacterizationCheck {
  bool holds = true;
  std::uint64_t tours = 0;
  std::uint64_t two_optimal = 0;
  std::uint64_t without_non_edges = 0;
  std::uint64_t mismatches = 0;
};

// Exhaustively compares {2-optimal tours of G_m} with {tours without non-edges}.
inline CharacterizationCheck verify_no_nonedge_characterization(const BaseGraph& g, const ReductionParams& p,
                                                                const ReductionEnumeration& opts = {}) {
  const auto inst = build_gm(g, p);
  check_enumeration_cap("verify_no_nonedge_characterization", inst.size(), opts.cap());
  CharacterizationCheck check;
  for_each_canonical_tour(
      inst.size(),
      [&](std::span<const Vertex> t) {
        const bool opt = detail::is_two_optimal(inst, t);
        const bool clean = !contains_non_edge(g, t);
        ++check.tours;
        check.two_optimal += opt;
        check.without_non_edges += clean;
        check.mismatches += opt != clean;
      },
      opts.cap());
  check.holds = check.mismatches == 0;
  return check;
}

// A path cover in canonical form: each path oriented with front <= back,
// paths sorted lexicographically.
class PathCover {
 public:
  PathCover() = default;
  explicit PathCover(std::vector<std::vector<Vertex>> paths) : paths_(std::move(paths)) {
    for (auto& p : paths_) {
      if (p.empty()) throw ParameterError("empty path in cover");
      if (p.front() > p.back()) std::reverse(p.begin(), p.end());
    }
    std::sort(paths_.begin(), paths_.end());
  }

  std::size_t size() const noexcept { return paths_.size(); }
  std::size_t non_singleton_paths() const noexcept {
    return static_cast<std::size_t>(std::count_if(paths_.begin(), paths_.end(), [](const auto& p) { return p.size() >= 2; }));
  }
  const std::vector<std::vector<Vertex>>& paths() const noexcept { return paths_; }

  bool is_cover_of(const BaseGraph& g) const {
    std::vector<bool> seen(g.vertex_count(), false);
    for (const auto& p : paths_) {
      for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] >= g.vertex_count() || seen[p[i]]) return false;
        seen[p[i]] = true;
        if (i > 0 && !g.has_edge(p[i - 1], p[i])) return false;
      }
    }
    return std::all_of(seen.begin(), seen.end(), [](bool s) { return s; });
  }

  auto operator<=>(const PathCover&) const = default;

 private:
  std::vector<std::vector<Vertex>> paths_;
};

// The cover left after deleting every tour-edge incident to S (labels >= nV).
inline PathCover cover_of_tour(std::span<const Vertex> t, std::size_t nv) {
  const std::size_t n = t.size();
  std::size_t start = 0;
  while (start < n && t[start] < nv) ++start;
  if (start == n) return PathCover({std::vector<Vertex>(t.begin(), t.end())});
  std::vector<std::vector<Vertex>> paths;
  std::vector<Vertex> current;
  for (std::size_t k = 1; k <= n; ++k) {
    const Vertex v = t[(start + k) % n];
    if (v < nv) {
      current.push_back(v);
    } else if (!current.empty()) {
      paths.push_back(std::move(current));
      current.clear();
    }
  }
  return PathCover(std::move(paths));
}

using CoverCensus = std::map<PathCover, std::uint64_t>;

// Number of 2-optimal tours of G_m per corresponding path cover.
inline CoverCensus cover_census(const BaseGraph& g, const ReductionParams& p, const ReductionEnumeration& opts = {}) {
  const auto inst = build_gm(g, p);
  check_enumeration_cap("cover_census", inst.size(), opts.cap());
  CoverCensus census;
  for_each_canonical_tour(
      inst.size(),
      [&](std::span<const Vertex> t) {
        if (detail::is_two_optimal(inst, t)) ++census[cover_of_tour(t, g.vertex_count())];
      },
      opts.cap());
  return census;
}

inline std::uint64_t tours_per_cover_empirical(const BaseGraph& g, const ReductionParams& p, const PathCover& cover,
                                               const ReductionEnumeration& opts = {}) {
  if (!cover.is_cover_of(g)) throw ParameterError("not a path cover of the base graph");
  const auto census = cover_census(g, p, opts);
  const auto it = census.find(cover);
  return it == census.end() ? 0 : it->second;
}

inline constexpr std::size_t kPathCoverCap = 10;

struct PathCoverCounts {
  // a[l-1] = number of path covers of size l.
  std::vector<std::uint64_t> a;
  // by_stratum[l-1][q] = covers of size l with exactly q paths of >= 2 vertices.
  std::vector<std::vector<std::uint64_t>> by_stratum;

  std::uint64_t of_size(std::size_t l) const { return a.at(l - 1); }
};

namespace detail {

class CoverEnumerator {
 public:
  explicit CoverEnumerator(const BaseGraph& g) : g_(g), counts_{} {
    const std::size_t nv = g.vertex_count();
    counts_.a.assign(nv, 0);
    counts_.by_stratum.assign(nv, std::vector<std::uint64_t>(nv + 1, 0));
  }

  PathCoverCounts run() {
    const std::uint32_t all = g_.vertex_count() == 32 ? ~0u : (1u << g_.vertex_count()) - 1;
    extend(all, 0, 0);
    for (std::size_t l = 0; l < counts_.a.size(); ++l)
      for (const auto c : counts_.by_stratum[l]) counts_.a[l] += c;
    return std::move(counts_);
  }

 private:
  // The lowest uncovered vertex v is the smallest vertex of its path. The path
  // is rev(left) v right; requiring end(left) < end(right) when both arms are
  // non-empty, and forbidding a lone left arm, counts each path once.
  void extend(std::uint32_t uncovered, std::size_t paths, std::size_t non_singletons) {
    if (uncovered == 0) {
      ++counts_.by_stratum[paths - 1][non_singletons];
      return;
    }
    const Vertex v = static_cast<Vertex>(std::countr_zero(uncovered));
    grow_right(uncovered, v, v, 1u << v, false, paths, non_singletons);
  }

  void grow_right(std::uint32_t uncovered, Vertex v, Vertex right_end, std::uint32_t used, bool right_nonempty,
                  std::size_t paths, std::size_t ns) {
    if (!right_nonempty) {
      extend(uncovered & ~used, paths + 1, ns);
    } else {
      grow_left(uncovered, v, right_end, v, used, paths, ns);
    }
    for (std::uint32_t next = g_.neighbours(right_end) & uncovered & ~used; next; next &= next - 1) {
      const Vertex u = static_cast<Vertex>(std::countr_zero(next));
      grow_right(uncovered, v, u, used | (1u << u), true, paths, ns);
    }
  }

  void grow_left(std::uint32_t uncovered, Vertex left_end, Vertex right_end, Vertex v, std::uint32_t used,
                 std::size_t paths, std::size_t ns) {
    if (left_end == v || left_end < right_end) extend(uncovered & ~used, paths + 1, ns + 1);
    for (std::uint32_t next = g_.neighbours(left_end) & uncovered & ~used; next; next &= next - 1) {
      const Vertex u = static_cast<Vertex>(std::countr_zero(next));
      grow_left(uncovered, u, right_end, v, used | (1u << u), paths, ns);
    }
  }

  const BaseGraph& g_;
  PathCoverCounts counts_;
};

}  // namespace detail

inline PathCoverCounts count_path_covers_bruteforce(const BaseGraph& g, std::size_t cap = kPathCoverCap) {
  check_enumeration_cap("count_path_covers_bruteforce", g.vertex_count(), cap);
  return detail::CoverEnumerator(g).run();
}

inline std::uint64_t hamiltonian_path_count(const BaseGraph& g, std::size_t cap = kPathCoverCap) {
  return count_path_covers_bruteforce(g, cap).of_size(1);
}

// Tours per path cover of size l under the orientation-counting model
// 2^{l-1} m! (m-1)! / (m-l)!.
inline BigInt coefficient(std::size_t l, std::size_t m) {
  if (l < 1 || l > m) throw DomainError("coefficient(l, m) needs 1 <= l <= m");
  const auto m_ = static_cast<unsigned>(m);
  return (BigInt(1) << (l - 1)) * factorial(m_) * factorial(m_ - 1) / factorial(static_cast<unsigned>(m - l));
}

// Same count when only the q non-singleton paths have two orientations:
// 2^{q-1} m! (m-1)! / (m-l)!.
inline BigInt corrected_coefficient(std::size_t l, std::size_t q, std::size_t m) {
  if (l < 1 || l > m) throw DomainError("corrected_coefficient needs 1 <= l <= m");
  if (q > l) throw DomainError("corrected_coefficient needs q <= l");
  const auto m_ = static_cast<unsigned>(m);
  const BigInt base = factorial(m_) * factorial(m_ - 1) / factorial(static_cast<unsigned>(m - l));
  return q == 0 ? BigInt(base / 2) : BigInt((BigInt(1) << (q - 1)) * base);
}

// Rows l = 1..nV, columns m = nV+1..2nV.
inline BigMatrix build_matrix_C(std::size_t nv) {
  if (nv < 1) throw InvalidSize("build_matrix_C needs nV >= 1");
  BigMatrix c(nv, nv);
  for (std::size_t l = 1; l <= nv; ++l)
    for (std::size_t j = 1; j <= nv; ++j) c(l - 1, j - 1) = coefficient(l, nv + j);
  return c;
}

// (l, q) pairs a cover of nV vertices can realise: all singletons (l = nV, q = 0),
// otherwise 1 <= q <= min(l, nV - l).
inline std::vector<std::pair<std::size_t, std::size_t>> feasible_strata(std::size_t nv) {
  std::vector<std::pair<std::size_t, std::size_t>> s;
  for (std::size_t l = 1; l < nv; ++l)
    for (std::size_t q = 1; q <= std::min(l, nv - l); ++q) s.emplace_back(l, q);
  s.emplace_back(nv, 0);
  return s;
}

enum class CoefficientModel { original, corrected };

inline const char* model_name(CoefficientModel m) noexcept {
  return m == CoefficientModel::original ? "original" : "corrected";
}

struct Recovery {
  CoefficientModel model = CoefficientModel::original;
  std::vector<BigInt> b;
  std::vector<Rational> a;  // a[l-1]; empty when the system is rank deficient
  bool full_rank = false;
  bool integral = false;
  bool nonnegative = false;
  std::size_t rank = 0;
  std::size_t unknowns = 0;
  // Corrected model only: solved stratum counts keyed by (l, q).
  std::vector<std::pair<std::pair<std::size_t, std::size_t>, Rational>> strata;
  std::string diagnostic;
};

namespace detail {

inline void classify(Recovery& r) {
  r.integral = std::all_of(r.a.begin(), r.a.end(), [](const Rational& x) { return is_integer(x); });
  r.nonnegative = std::all_of(r.a.begin(), r.a.end(), [](const Rational& x) { return x >= 0; });
}

}  // namespace detail

// Solves C^T a = b exactly; throws RankError if C is singular.
inline std::vector<Rational> recover_path_cover_counts(const std::vector<BigInt>& b, std::size_t nv) {
  if (b.size() != nv) throw DimensionError("b must have length nV");
  return solve_exact(build_matrix_C(nv).transposed(), b);
}

inline Recovery recover_original_model(const std::vector<BigInt>& b, std::size_t nv) {
  Recovery r;
  r.model = CoefficientModel::original;
  r.b = b;
  r.unknowns = nv;
  r.rank = rank(build_matrix_C(nv));
  try {
    r.a = recover_path_cover_counts(b, nv);
    r.full_rank = true;
    detail::classify(r);
  } catch (const RankError& e) {
    r.diagnostic = e.what();
  }
  return r;
}

// Unknowns are the stratum counts a_{l,q}; equation m reads
// b_m = sum_{l,q} corrected_coefficient(l, q, m) a_{l,q}. Columns sharing l are
// proportional, so the system is square and non-singular only when every l has
// a single feasible q.
inline Recovery recover_corrected_model(const std::vector<BigInt>& b, std::size_t nv) {
  if (b.size() != nv) throw DimensionError("b must have length nV");
  Recovery r;
  r.model = CoefficientModel::corrected;
  r.b = b;
  const auto strata = feasible_strata(nv);
  r.unknowns = strata.size();
  BigMatrix A(nv, strata.size());
  for (std::size_t row = 0; row < nv; ++row)
    for (std::size_t col = 0; col < strata.size(); ++col)
      A(row, col) = corrected_coefficient(strata[col].first, strata[col].second, nv + 1 + row);
  r.rank = rank(A);
  if (r.rank < strata.size() || strata.size() != nv) {
    r.diagnostic = "corrected system has rank " + std::to_string(r.rank) + " with " +
                   std::to_string(strata.size()) + " unknowns and " + std::to_string(nv) + " equations";
    return r;
  }
  const auto x = solve_exact(A, b);
  r.full_rank = true;
  r.a.assign(nv, Rational(0));
  for (std::size_t col = 0; col < strata.size(); ++col) {
    r.a[strata[col].first - 1] += x[col];
    r.strata.push_back({strata[col], x[col]});
  }
  detail::classify(r);
  return r;
}

struct ReductionReport {
  std::size_t vertex_count = 0;
  std::vector<std::size_t> m_values;
  std::vector<BigInt> b;
  PathCoverCounts brute_force;
  Recovery original;
  Recovery corrected;

  // The corrected model must reproduce the oracle wherever it is solvable.
  bool corrected_consistent() const {
    if (!corrected.full_rank) return true;
    for (std::size_t l = 0; l < brute_force.a.size(); ++l)
      if (corrected.a[l] != Rational(brute_force.a[l])) return false;
    return true;
  }
};

struct ReductionOptions {
  unsigned workers = 1;
  bool allow_huge = false;
};

// f_2opt(G_m) for m = nV+1..2nV, then both recoveries next to the brute-force oracle.
inline ReductionReport run_reduction(const BaseGraph& g, const ReductionOptions& opts = {}) {
  const std::size_t nv = g.vertex_count();
  const CensusOptions census{opts.workers, opts.allow_huge};
  check_enumeration_cap("reduction pipeline (largest G_m)", 3 * nv, census.cap());
  ReductionReport rep;
  rep.vertex_count = nv;
  for (std::size_t m = nv + 1; m <= 2 * nv; ++m) {
    rep.m_values.push_back(m);
    rep.b.emplace_back(count_two_optimal_exact(build_gm(g, ReductionParams::defaults(nv, m)), census));
  }
  rep.brute_force = count_path_covers_bruteforce(g);
  rep.original = recover_original_model(rep.b, nv);
  rep.corrected = recover_corrected_model(rep.b, nv);
  return rep;
}

inline nlohmann::json exact_to_json(const Rational& q) {
  if (is_integer(q)) {
    const BigInt& num = boost::multiprecision::numerator(q);
    if (num >= std::numeric_limits<std::int64_t>::min() && num <= std::numeric_limits<std::int64_t>::max())
      return static_cast<std::int64_t>(num);
  }
  return to_string(q);
}

inline nlohmann::json exact_to_json(const BigInt& x) { return exact_to_json(Rational(x)); }

inline nlohmann::json to_json(const Recovery& r) {
  nlohmann::json j{{"model", model_name(r.model)}, {"full_rank", r.full_rank}, {"integral", r.integral},
                   {"nonnegative", r.nonnegative}, {"rank", r.rank}, {"unknowns", r.unknowns}};
  j["b"] = nlohmann::json::array();
  for (const auto& x : r.b) j["b"].push_back(exact_to_json(x));
  j["a"] = nlohmann::json::array();
  for (const auto& x : r.a) j["a"].push_back(exact_to_json(x));
  if (!r.strata.empty()) {
    j["strata"] = nlohmann::json::array();
    for (const auto& [key, value] : r.strata)
      j["strata"].push_back({{"size", key.first}, {"non_singleton_paths", key.second}, {"count", exact_to_json(value)}});
  }
  if (!r.diagnostic.empty()) j["diagnostic"] = r.diagnostic;
  return j;
}

inline nlohmann::json to_json(const ReductionReport& rep) {
  nlohmann::json j{{"vertex_count", rep.vertex_count}, {"m", rep.m_values}, {"brute_force_a", rep.brute_force.a},
                   {"hamiltonian_paths", rep.brute_force.a.empty() ? 0 : rep.brute_force.a[0]},
                   {"corrected_matches_brute_force", rep.corrected_consistent()}};
  j["b"] = nlohmann::json::array();
  for (const auto& x : rep.b) j["b"].push_back(exact_to_json(x));
  j["recoveries"] = {to_json(rep.original), to_json(rep.corrected)};
  return j;
}

}  // namespace twoopt
