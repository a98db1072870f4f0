#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "twoopt/census.hpp"
#include "twoopt/graph.hpp"
#include "twoopt/monte_carlo.hpp"

namespace twoopt {

// Sparse row encoding sum_k coef[k] * w[cols[k]] <= rhs.
struct Row {
  std::vector<std::uint32_t> cols;
  std::vector<double> coefs;
  double rhs = 0.0;

  double dot(std::span<const double> x) const noexcept {
    double s = 0.0;
    for (std::size_t k = 0; k < cols.size(); ++k) s += coefs[k] * x[cols[k]];
    return s;
  }
  bool satisfied(std::span<const double> x) const noexcept { return dot(x) <= rhs; }
};

// Intersection of [0,1]^dim with the rows.
struct Polytope {
  std::size_t dim = 0;
  std::vector<Row> rows;

  bool contains(std::span<const double> x) const noexcept {
    for (const double v : x)
      if (v < 0.0 || v > 1.0) return false;
    for (const auto& r : rows)
      if (!r.satisfied(x)) return false;
    return true;
  }
};

// Weights of K_n indexed by edge_index; one row per 2-change on (0,1,...,n-1).
inline Polytope build_two_opt_polytope(std::size_t n) {
  if (n < 4) throw InvalidSize("2-opt polytope needs n >= 4, got " + std::to_string(n));
  Polytope p;
  p.dim = pair_count(n);
  const Tour ref = Tour::identity(n);
  for (const auto s : enumerate_two_changes(n)) {
    Row r;
    for (const auto& [a, b] : removed_edges(ref.order(), s)) {
      r.cols.push_back(static_cast<std::uint32_t>(edge_index(n, a, b)));
      r.coefs.push_back(1.0);
    }
    for (const auto& [a, b] : added_edges(ref.order(), s)) {
      r.cols.push_back(static_cast<std::uint32_t>(edge_index(n, a, b)));
      r.coefs.push_back(-1.0);
    }
    p.rows.push_back(std::move(r));
  }
  return p;
}

// {x in [0,1]^dim : x_1 + ... + x_dim <= 1}, volume 1/dim!.
inline Polytope simplex_polytope(std::size_t dim) {
  if (dim == 0) throw DimensionError("simplex needs dim >= 1");
  Polytope p;
  p.dim = dim;
  Row r;
  for (std::uint32_t k = 0; k < dim; ++k) {
    r.cols.push_back(k);
    r.coefs.push_back(1.0);
  }
  r.rhs = 1.0;
  p.rows.push_back(std::move(r));
  return p;
}

struct VolumeOptions {
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

// Fraction of uniform cube points satisfying every row. Zero acceptances give
// a flagged estimate of 0.
inline Estimate estimate_volume_rejection(const Polytope& p, std::uint64_t samples, const VolumeOptions& opts = {}) {
  if (samples < 1) throw ParameterError("estimate_volume_rejection needs samples >= 1");
  if (p.rows.empty()) return {1.0, 0.0, samples, false};
  const auto counts = blocked_monte_carlo<HitCounter>(
      samples, opts.seed, Purpose::volume_rejection, opts.workers, [&](Stream& rng, std::uint64_t count) {
        HitCounter h;
        std::vector<double> x(p.dim);
        for (std::uint64_t s = 0; s < count; ++s) {
          for (auto& v : x) v = rng.uniform();
          bool ok = true;
          for (const auto& r : p.rows)
            if (!r.satisfied(x)) {
              ok = false;
              break;
            }
          h.hits += ok;
          ++h.total;
        }
        return h;
      });
  return proportion(counts.hits, counts.total);
}

// Fixed tour (0,1,...,n-1), fresh U[0,1] instance per trial.
inline Estimate estimate_prob_two_optimal(std::size_t n, std::uint64_t trials, const VolumeOptions& opts = {}) {
  if (trials < 1) throw ParameterError("estimate_prob_two_optimal needs trials >= 1");
  if (n < 4) throw InvalidSize("estimate_prob_two_optimal needs n >= 4, got " + std::to_string(n));
  const Tour ref = Tour::identity(n);
  const auto counts = blocked_monte_carlo<HitCounter>(
      trials, opts.seed, Purpose::prob_two_optimal, opts.workers, [&](Stream& rng, std::uint64_t count) {
        HitCounter h;
        std::vector<double> w(pair_count(n));
        for (std::uint64_t s = 0; s < count; ++s) {
          for (auto& v : w) v = rng.uniform();
          const FloatInstance inst(n, w);
          h.hits += detail::is_two_optimal(inst, ref.order());
          ++h.total;
        }
        return h;
      });
  return proportion(counts.hits, counts.total);
}

struct TelescopingOptions {
  std::uint64_t seed = 0;
  unsigned workers = 1;
  std::size_t chains = 8;
  std::size_t steps_between_samples = 50;
  std::size_t burn_in_samples = 10;  // recorded-sample intervals discarded per phase
  std::size_t batches_per_chain = 4;
  std::uint64_t pilot_samples = 20000;
};

struct TelescopingResult {
  Estimate volume;
  double log_volume = 0.0;
  double log_std_error = 0.0;       // standard error of log_volume
  std::vector<std::size_t> row_order;  // original row indices in insertion order
  std::vector<Estimate> phase_ratios;  // completed phases only
  bool degenerate = false;
  std::size_t failed_phase = 0;  // meaningful when degenerate
};

namespace detail {

// Rows ordered by decreasing single-row acceptance on the cube, so the
// factors that remove least volume are inserted first. Ties keep row order.
inline std::vector<std::size_t> pilot_row_order(const Polytope& p, const TelescopingOptions& opts) {
  std::vector<std::size_t> order(p.rows.size());
  std::iota(order.begin(), order.end(), 0);
  if (p.rows.size() < 2 || opts.pilot_samples == 0) return order;
  std::vector<std::uint64_t> hits(p.rows.size(), 0);
  Stream rng(opts.seed, Purpose::pilot, 0);
  std::vector<double> x(p.dim);
  for (std::uint64_t s = 0; s < opts.pilot_samples; ++s) {
    for (auto& v : x) v = rng.uniform();
    for (std::size_t r = 0; r < p.rows.size(); ++r) hits[r] += p.rows[r].satisfied(x);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return hits[a] > hits[b]; });
  return order;
}

// One hit-and-run move inside the box and the given active rows.
inline void hit_and_run_step(const Polytope& p, std::span<const std::size_t> active, std::vector<double>& x,
                             std::vector<double>& dir, Stream& rng) {
  double norm = 0.0;
  for (auto& u : dir) {
    u = rng.normal();
    norm += u * u;
  }
  norm = std::sqrt(norm);
  if (norm == 0.0) return;
  for (auto& u : dir) u /= norm;

  double lo = -std::numeric_limits<double>::infinity(), hi = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < p.dim; ++k) {
    if (dir[k] > 0.0) {
      lo = std::max(lo, -x[k] / dir[k]);
      hi = std::min(hi, (1.0 - x[k]) / dir[k]);
    } else if (dir[k] < 0.0) {
      lo = std::max(lo, (1.0 - x[k]) / dir[k]);
      hi = std::min(hi, -x[k] / dir[k]);
    }
  }
  for (const auto idx : active) {
    const Row& r = p.rows[idx];
    const double slope = r.dot(dir);
    const double slack = std::max(0.0, r.rhs - r.dot(x));
    if (slope > 0.0)
      hi = std::min(hi, slack / slope);
    else if (slope < 0.0)
      lo = std::max(lo, slack / slope);
  }
  if (!(hi > lo)) return;
  const double t = lo + (hi - lo) * rng.uniform();
  for (std::size_t k = 0; k < p.dim; ++k) x[k] = std::clamp(x[k] + t * dir[k], 0.0, 1.0);
}

}  // namespace detail

// vol(P) = prod_k Pr(row_k | rows_1..k-1), each factor estimated by
// hit-and-run chains inside the partial polytope. Chains are keyed by
// (phase, chain) so the result does not depend on the worker count. The
// standard error combines per-phase batch-means errors by the delta method.
inline TelescopingResult estimate_volume_telescoping(const Polytope& p, std::uint64_t samples_per_phase,
                                                     const TelescopingOptions& opts = {}) {
  if (samples_per_phase < 100) throw ParameterError("estimate_volume_telescoping needs samples_per_phase >= 100");
  if (opts.chains == 0 || opts.batches_per_chain == 0 || opts.steps_between_samples == 0)
    throw ParameterError("telescoping chains, batches and steps must be positive");

  TelescopingResult res;
  res.row_order = detail::pilot_row_order(p, opts);
  if (p.rows.empty()) {
    res.volume = {1.0, 0.0, 0, false};
    return res;
  }

  const std::size_t chains = opts.chains;
  const std::uint64_t per_chain = (samples_per_phase + chains - 1) / chains;
  const std::size_t batches = std::min<std::size_t>(opts.batches_per_chain, per_chain);

  // Box centre is feasible for every phase-1 chain (no rows active yet).
  std::vector<std::vector<double>> state(chains, std::vector<double>(p.dim, 0.5));
  std::vector<std::size_t> active;
  double log_vol = 0.0, rel_var = 0.0;

  for (std::size_t phase = 0; phase < res.row_order.size(); ++phase) {
    const Row& row = p.rows[res.row_order[phase]];
    std::vector<std::vector<std::uint64_t>> batch_hits(chains, std::vector<std::uint64_t>(batches, 0));
    std::vector<std::vector<std::uint64_t>> batch_total(chains, std::vector<std::uint64_t>(batches, 0));
    std::vector<std::vector<double>> accepted(chains);

    const unsigned workers = static_cast<unsigned>(std::clamp<std::size_t>(opts.workers, 1, chains));
    for_each_worker(workers, [&](unsigned w) {
      std::vector<double> dir(p.dim);
      for (std::size_t c = w; c < chains; c += workers) {
        Stream rng(opts.seed, Purpose::hit_and_run, phase * chains + c);
        auto& x = state[c];
        for (std::size_t s = 0; s < opts.burn_in_samples * opts.steps_between_samples; ++s)
          detail::hit_and_run_step(p, active, x, dir, rng);
        for (std::uint64_t s = 0; s < per_chain; ++s) {
          for (std::size_t k = 0; k < opts.steps_between_samples; ++k) detail::hit_and_run_step(p, active, x, dir, rng);
          const std::size_t b = static_cast<std::size_t>(s * batches / per_chain);
          ++batch_total[c][b];
          if (row.satisfied(x)) {
            ++batch_hits[c][b];
            accepted[c] = x;
          }
        }
      }
    });

    std::uint64_t hits = 0, total = 0;
    Accumulator batch_ratio;
    for (std::size_t c = 0; c < chains; ++c)
      for (std::size_t b = 0; b < batches; ++b) {
        hits += batch_hits[c][b];
        total += batch_total[c][b];
        if (batch_total[c][b] > 0)
          batch_ratio.add(static_cast<double>(batch_hits[c][b]) / static_cast<double>(batch_total[c][b]));
      }
    if (hits == 0) {
      res.degenerate = true;
      res.failed_phase = phase;
      res.volume = {0.0, 0.0, total, true};
      res.log_volume = -std::numeric_limits<double>::infinity();
      return res;
    }
    const double ratio = static_cast<double>(hits) / static_cast<double>(total);
    const double se = batch_ratio.estimate().std_error;
    res.phase_ratios.push_back({ratio, se, total, false});
    log_vol += std::log(ratio);
    rel_var += (se / ratio) * (se / ratio);

    // Chains continue from their last point inside the new partial polytope;
    // a chain that never landed there borrows from the first chain that did.
    const auto donor = std::find_if(accepted.begin(), accepted.end(), [](const auto& v) { return !v.empty(); });
    for (std::size_t c = 0; c < chains; ++c) state[c] = accepted[c].empty() ? *donor : accepted[c];
    active.push_back(res.row_order[phase]);
  }

  res.log_volume = log_vol;
  res.log_std_error = std::sqrt(rel_var);
  const double vol = std::exp(log_vol);
  res.volume = {vol, vol * res.log_std_error, samples_per_phase * res.row_order.size(), false};
  return res;
}

}  // namespace twoopt
