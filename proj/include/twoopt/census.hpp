#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include <json.hpp>

#include "twoopt/graph.hpp"
#include "twoopt/monte_carlo.hpp"

namespace twoopt {

namespace detail {

template <WeightType W>
bool is_two_optimal(const Instance<W>& inst, std::span<const Vertex> t) noexcept {
  const std::size_t n = t.size();
  for (std::size_t i = 0; i + 2 < n; ++i) {
    const W wi = inst.weight(t[i], t[i + 1]);
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      const Vertex c = t[j], d = t[(j + 1) % n];
      if ((wi + inst.weight(c, d)) - (inst.weight(t[i], c) + inst.weight(t[i + 1], d)) > W{0})
        return false;
    }
  }
  return true;
}

}  // namespace detail

// True iff no 2-change strictly shortens the tour.
template <WeightType W>
bool is_two_optimal(const Instance<W>& inst, const Tour& t) {
  if (t.size() != inst.size()) throw DimensionError("tour/instance size mismatch");
  return detail::is_two_optimal(inst, t.order());
}

inline constexpr std::size_t kCensusHugeCap = 12;
inline constexpr std::size_t kGraphCap = 9;
inline constexpr std::size_t kGraphHugeCap = 10;

struct CensusOptions {
  unsigned workers = 1;
  bool allow_huge = false;  // raises the cap from 10 to 12

  std::size_t cap() const noexcept { return allow_huge ? kCensusHugeCap : kDefaultEnumerationCap; }
};

// Exact number of 2-optimal canonical tours. Work is split by the second
// vertex of the canonical order; partial counts are summed, so the result does
// not depend on the worker count.
template <WeightType W>
std::uint64_t count_two_optimal_exact(const Instance<W>& inst, const CensusOptions& opts = {}) {
  const std::size_t n = inst.size();
  check_enumeration_cap("count_two_optimal_exact", n, opts.cap());
  const std::size_t tasks = n - 2;  // second vertex ranges over 1..n-2
  std::vector<std::uint64_t> partial(tasks, 0);
  const unsigned workers = std::clamp<unsigned>(opts.workers, 1, static_cast<unsigned>(tasks));
  for_each_worker(workers, [&](unsigned w) {
    for (std::size_t task = w; task < tasks; task += workers) {
      std::uint64_t count = 0;
      for_each_canonical_tour_with_second(n, static_cast<Vertex>(task + 1), [&](std::span<const Vertex> t) {
        if (detail::is_two_optimal(inst, t)) ++count;
      });
      partial[task] = count;
    }
  });
  std::uint64_t total = 0;
  for (const auto c : partial) total += c;
  return total;
}

struct Arc {
  std::uint32_t from = 0;
  std::uint32_t to = 0;
  auto operator<=>(const Arc&) const = default;
};

// Plain directed graph on node indices 0..node_count-1.
struct ArcGraph {
  std::size_t node_count = 0;
  std::vector<Arc> arcs;

  std::vector<std::size_t> out_degrees() const {
    std::vector<std::size_t> deg(node_count, 0);
    for (const auto& a : arcs) ++deg[a.from];
    return deg;
  }
};

// Compressed adjacency (targets of node v live in targets[offsets[v], offsets[v+1])).
struct Adjacency {
  std::vector<std::size_t> offsets;
  std::vector<std::uint32_t> targets;

  explicit Adjacency(const ArcGraph& g) : offsets(g.node_count + 1, 0), targets(g.arcs.size()) {
    for (const auto& a : g.arcs) ++offsets[a.from + 1];
    for (std::size_t v = 0; v < g.node_count; ++v) offsets[v + 1] += offsets[v];
    std::vector<std::size_t> fill(offsets.begin(), offsets.end() - 1);
    for (const auto& a : g.arcs) targets[fill[a.from]++] = a.to;
  }

  std::span<const std::uint32_t> out(std::size_t v) const noexcept {
    return {targets.data() + offsets[v], offsets[v + 1] - offsets[v]};
  }
};

// Kahn's algorithm; nullopt when the graph has a cycle.
inline std::optional<std::vector<std::uint32_t>> topological_order(const ArcGraph& g) {
  std::vector<std::size_t> indeg(g.node_count, 0);
  for (const auto& a : g.arcs) ++indeg[a.to];
  const Adjacency adj(g);
  std::vector<std::uint32_t> order;
  order.reserve(g.node_count);
  for (std::uint32_t v = 0; v < g.node_count; ++v)
    if (indeg[v] == 0) order.push_back(v);
  for (std::size_t head = 0; head < order.size(); ++head)
    for (const auto u : adj.out(order[head]))
      if (--indeg[u] == 0) order.push_back(u);
  if (order.size() != g.node_count) return std::nullopt;
  return order;
}

inline bool is_acyclic(const ArcGraph& g) { return topological_order(g).has_value(); }

template <WeightType W>
struct TransitionGraph {
  std::vector<Tour> nodes;  // canonical tours, lexicographically sorted
  std::vector<W> lengths;
  ArcGraph graph;           // arcs sorted lexicographically by (from, to)
};

struct GraphOptions {
  unsigned workers = 1;
  bool allow_huge = false;

  std::size_t cap() const noexcept { return allow_huge ? kGraphHugeCap : kGraphCap; }
};

template <WeightType W>
TransitionGraph<W> build_transition_graph(const Instance<W>& inst, const GraphOptions& opts = {}) {
  const std::size_t n = inst.size();
  check_enumeration_cap("build_transition_graph", n, opts.cap());
  TransitionGraph<W> g;
  g.nodes = enumerate_canonical_tours(n, opts.cap());
  g.lengths.reserve(g.nodes.size());
  for (const auto& t : g.nodes) g.lengths.push_back(detail::tour_length(inst, t.order()));
  g.graph.node_count = g.nodes.size();

  const auto moves = enumerate_two_changes(n);
  const unsigned workers = std::clamp<unsigned>(opts.workers, 1, static_cast<unsigned>(g.nodes.size()));
  std::vector<std::vector<Arc>> partial(workers);
  for_each_worker(workers, [&](unsigned w) {
    const std::size_t lo = g.nodes.size() * w / workers, hi = g.nodes.size() * (w + 1) / workers;
    for (std::size_t v = lo; v < hi; ++v) {
      for (const auto s : moves) {
        if (detail::two_change_delta(inst, g.nodes[v].order(), s) <= W{0}) continue;
        const Tour next = apply_two_change(g.nodes[v], s);
        const auto it = std::lower_bound(g.nodes.begin(), g.nodes.end(), next);
        partial[w].push_back({static_cast<std::uint32_t>(v), static_cast<std::uint32_t>(it - g.nodes.begin())});
      }
    }
  });
  for (auto& p : partial) g.graph.arcs.insert(g.graph.arcs.end(), p.begin(), p.end());
  std::sort(g.graph.arcs.begin(), g.graph.arcs.end());
  return g;
}

struct StatsOptions {
  std::size_t walks = 1000;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

struct TransitionStats {
  std::size_t nodes = 0;
  std::size_t arcs = 0;
  std::size_t sinks = 0;
  std::size_t longest_path = 0;
  std::size_t walks = 0;
  // walk_lengths[k] = number of sampled walks that took exactly k steps.
  std::vector<std::uint64_t> walk_lengths;

  std::size_t longest_walk() const noexcept { return walk_lengths.empty() ? 0 : walk_lengths.size() - 1; }
};

// Walk k starts at a uniformly random node and follows uniformly random
// out-arcs until a sink; its stream is keyed by k.
inline TransitionStats transition_stats(const ArcGraph& g, const StatsOptions& opts = {}) {
  const auto topo = topological_order(g);
  if (!topo) throw DomainError("transition graph has a cycle");
  const Adjacency adj(g);

  TransitionStats st;
  st.nodes = g.node_count;
  st.arcs = g.arcs.size();
  std::vector<std::size_t> longest(g.node_count, 0);
  for (auto it = topo->rbegin(); it != topo->rend(); ++it) {
    const auto out = adj.out(*it);
    if (out.empty()) ++st.sinks;
    for (const auto u : out) longest[*it] = std::max(longest[*it], longest[u] + 1);
    st.longest_path = std::max(st.longest_path, longest[*it]);
  }

  st.walks = g.node_count == 0 ? 0 : opts.walks;
  std::vector<std::size_t> lengths(st.walks, 0);
  const unsigned workers = std::max(1u, opts.workers);
  for_each_worker(workers, [&](unsigned w) {
    for (std::size_t k = w; k < st.walks; k += workers) {
      Stream rng(opts.seed, Purpose::walk, k);
      std::size_t v = rng.below(g.node_count), steps = 0;
      for (auto out = adj.out(v); !out.empty(); out = adj.out(v), ++steps) v = out[rng.below(out.size())];
      lengths[k] = steps;
    }
  });
  for (const auto len : lengths) {
    if (len >= st.walk_lengths.size()) st.walk_lengths.resize(len + 1, 0);
    ++st.walk_lengths[len];
  }
  return st;
}

inline nlohmann::json to_json(const TransitionStats& st) {
  return {{"sinks", st.sinks},       {"longest_path", st.longest_path}, {"walk_lengths", st.walk_lengths},
          {"walks", st.walks},       {"nodes", st.nodes},               {"arcs", st.arcs}};
}

inline void write_arcs_csv(std::ostream& out, const ArcGraph& g) {
  out << "from,to\n";
  for (const auto& a : g.arcs) out << a.from << ',' << a.to << '\n';
}

}  // namespace twoopt
