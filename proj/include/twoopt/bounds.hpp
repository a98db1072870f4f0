#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include <json.hpp>

#include "twoopt/chord_disjoint.hpp"
#include "twoopt/gaussian.hpp"
#include "twoopt/monte_carlo.hpp"

namespace twoopt {

// Exponent terms of g_S: one product x_e x_f / sqrt(k_e k_f) per move, over
// the compact index of edges with k_e > 0.
struct GTerms {
  std::size_t variables = 0;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<double> weights;

  static GTerms of(const ChordDisjointSet& s) {
    GTerms t;
    std::vector<std::size_t> compact(s.n, 0);
    for (std::size_t e = 0; e < s.n; ++e)
      if (s.k_by_edge[e] > 0) compact[e] = t.variables++;
    for (const auto& mv : s.moves) {
      t.pairs.emplace_back(compact[mv.first], compact[mv.second]);
      t.weights.push_back(1.0 / std::sqrt(static_cast<double>(s.k_by_edge[mv.first] * s.k_by_edge[mv.second])));
    }
    return t;
  }

  double exponent(const std::vector<double>& x) const noexcept {
    double acc = 0.0;
    for (std::size_t k = 0; k < pairs.size(); ++k) acc += weights[k] * x[pairs[k].first] * x[pairs[k].second];
    return acc;
  }

  double g(const std::vector<double>& x) const noexcept { return std::exp(-exponent(x)); }
};

// Mean of g_S over i.i.d. half-normal vectors.
inline Estimate estimate_G(const ChordDisjointSet& s, std::uint64_t samples, const MonteCarloOptions& opts = {}) {
  if (samples < 1) throw ParameterError("estimate_G needs samples >= 1");
  const GTerms terms = GTerms::of(s);
  if (terms.pairs.empty()) return {1.0, 0.0, samples, false};
  const auto acc = blocked_monte_carlo<Accumulator>(
      samples, opts.seed, Purpose::g_estimate, opts.workers, [&](Stream& rng, std::uint64_t count) {
        Accumulator a;
        std::vector<double> x(terms.variables);
        for (std::uint64_t k = 0; k < count; ++k) {
          for (auto& v : x) v = rng.half_normal();
          a.add(terms.g(x));
        }
        return a;
      });
  return acc.estimate();
}

inline double bound_constant_c() { return std::sqrt(std::numbers::pi / 2) * std::exp(-1.0 / (9 * std::numbers::pi)); }
inline constexpr double kBoundConstantRounded = 1.2098;

inline double log_factorial(std::size_t k) { return std::lgamma(static_cast<double>(k) + 1.0); }

struct LogEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

inline LogEstimate log_of(const Estimate& e) {
  if (e.value <= 0.0) return {-std::numeric_limits<double>::infinity(), 0.0};
  return {std::log(e.value), e.std_error / e.value};
}

struct BoundOptions {
  std::uint64_t samples = 1'000'000;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  std::optional<Estimate> measured_probability;  // P(T is 2-optimal) from the volume experiment
};

// Every value in natural-log space.
struct BoundReport {
  std::size_t n = 0;
  double log_c = 0.0;
  double log_bound_a = 0.0;          // c^n / sqrt((n-2)!)
  double log_bound_b = 0.0;          // 1.2098^n sqrt(n!)
  LogEstimate log_G;
  double log_product = 0.0;          // sum over k_e > 0 of ln sqrt(pi / (2 k_e))
  LogEstimate log_bound_c;           // G * prod sqrt(pi / (2 k_e))
  double log_bound_c_trivial = 0.0;  // same with G replaced by 1
  double log_ref_sqrt_factorial = 0.0;  // sqrt(n!)
  std::optional<double> log_G_orthant_chain;  // 2^d sqrt(det) * reduced orthant bound, d = (n-3)/2
  std::optional<LogEstimate> log_measured;

  bool c_within_trivial() const noexcept { return log_bound_c.value <= log_bound_c_trivial; }
  std::optional<bool> c_bounds_measured() const {
    if (!log_measured) return std::nullopt;
    return log_bound_c.value >= log_measured->value;
  }
};

inline BoundReport counting_bounds(std::size_t n, const BoundOptions& opts = {}) {
  const ChordDisjointSet s = construct_S(n);
  const double x = static_cast<double>(n);
  BoundReport r;
  r.n = n;
  r.log_c = std::log(bound_constant_c());
  r.log_bound_a = x * r.log_c - 0.5 * log_factorial(n - 2);
  r.log_bound_b = x * std::log(kBoundConstantRounded) + 0.5 * log_factorial(n);
  r.log_G = log_of(estimate_G(s, opts.samples, {opts.seed, opts.workers}));
  r.log_product = log_product_bound(s);
  r.log_bound_c = {r.log_G.value + r.log_product, r.log_G.std_error};
  r.log_bound_c_trivial = r.log_product;
  r.log_ref_sqrt_factorial = 0.5 * log_factorial(n);
  const std::size_t d = (n - 3) / 2;
  if (d >= 2)
    r.log_G_orthant_chain = static_cast<double>(d) * std::numbers::ln2 - 0.5 * equicorrelated_log_det_precision(d) +
                            reduced_orthant_bound(d).log_bound;
  if (opts.measured_probability) r.log_measured = log_of(*opts.measured_probability);
  return r;
}

inline nlohmann::json to_json(const LogEstimate& e) { return {{"value", e.value}, {"std_error", e.std_error}}; }

inline nlohmann::json to_json(const BoundReport& r) {
  nlohmann::json j = {{"n", r.n},
                      {"log_c", r.log_c},
                      {"log_bound_a", r.log_bound_a},
                      {"log_bound_b", r.log_bound_b},
                      {"log_G", to_json(r.log_G)},
                      {"log_product", r.log_product},
                      {"log_bound_c", to_json(r.log_bound_c)},
                      {"log_bound_c_trivial", r.log_bound_c_trivial},
                      {"log_ref_sqrt_factorial", r.log_ref_sqrt_factorial},
                      {"c_within_trivial", r.c_within_trivial()}};
  j["log_G_orthant_chain"] = r.log_G_orthant_chain ? nlohmann::json(*r.log_G_orthant_chain) : nlohmann::json();
  if (r.log_measured) {
    j["log_measured"] = to_json(*r.log_measured);
    j["c_bounds_measured"] = *r.c_bounds_measured();
  }
  return j;
}

}  // namespace twoopt
