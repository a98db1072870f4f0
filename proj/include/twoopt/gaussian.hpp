#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "twoopt/errors.hpp"
#include "twoopt/monte_carlo.hpp"

namespace twoopt {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Zero-mean multivariate normal described by its precision matrix.
class CovarianceSpec {
 public:
  static CovarianceSpec from_precision(const Matrix& precision) {
    check_square_symmetric(precision, "precision");
    CovarianceSpec s;
    s.precision_ = precision;
    const Eigen::LLT<Matrix> llt(precision);
    if (llt.info() != Eigen::Success) throw NotPositiveDefinite("precision matrix is not positive definite");
    s.covariance_ = llt.solve(Matrix::Identity(precision.rows(), precision.cols()));
    s.covariance_ = 0.5 * (s.covariance_ + s.covariance_.transpose());
    s.finish();
    return s;
  }

  static CovarianceSpec from_covariance(const Matrix& covariance) {
    check_square_symmetric(covariance, "covariance");
    const Eigen::LLT<Matrix> llt(covariance);
    if (llt.info() != Eigen::Success) throw NotPositiveDefinite("covariance matrix is not positive definite");
    Matrix precision = llt.solve(Matrix::Identity(covariance.rows(), covariance.cols()));
    precision = 0.5 * (precision + precision.transpose());
    CovarianceSpec s;
    s.precision_ = precision;
    s.covariance_ = covariance;
    s.finish();
    return s;
  }

  static CovarianceSpec identity(std::size_t d) {
    const auto n = static_cast<Eigen::Index>(d);
    return from_precision(Matrix::Identity(n, n));
  }

  std::size_t dim() const noexcept { return static_cast<std::size_t>(precision_.rows()); }
  const Matrix& precision() const noexcept { return precision_; }
  const Matrix& covariance() const noexcept { return covariance_; }
  // Lower-triangular L with L L^T = covariance.
  const Matrix& factor() const noexcept { return factor_; }
  double log_det_covariance() const noexcept { return log_det_covariance_; }
  double det_covariance() const noexcept { return std::exp(log_det_covariance_); }

  // Draws one N(0, covariance) vector.
  void sample(Stream& rng, Vector& z, Vector& x) const {
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
    x.noalias() = factor_.triangularView<Eigen::Lower>() * z;
  }

 private:
  static void check_square_symmetric(const Matrix& m, const char* what) {
    if (m.rows() != m.cols() || m.rows() == 0) throw DimensionError(std::string(what) + " matrix must be square and non-empty");
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
      throw NotPositiveDefinite(std::string(what) + " matrix is not symmetric");
  }

  void finish() {
    const auto d = precision_.rows();
    // Leading principal minors of the precision must all be positive.
    for (Eigen::Index k = 1; k <= d; ++k) {
      const Eigen::LLT<Matrix> lead(precision_.topLeftCorner(k, k));
      if (lead.info() != Eigen::Success) throw NotPositiveDefinite("precision has a non-positive leading minor");
    }
    const Matrix residual = covariance_ * precision_ - Matrix::Identity(d, d);
    if (residual.cwiseAbs().maxCoeff() > 1e-10)
      throw NotPositiveDefinite("covariance * precision deviates from identity beyond 1e-10");
    const Eigen::LLT<Matrix> llt(covariance_);
    if (llt.info() != Eigen::Success) throw NotPositiveDefinite("covariance matrix is not positive definite");
    factor_ = llt.matrixL();
    log_det_covariance_ = 2.0 * factor_.diagonal().array().log().sum();
  }

  Matrix precision_;
  Matrix covariance_;
  Matrix factor_;
  double log_det_covariance_ = 0.0;
};

// Unit-diagonal precision with every off-diagonal entry 1/(2d), plus the
// Sherman-Morrison closed forms of its determinant and inverse.
struct EquicorrelatedSpec {
  std::size_t d = 0;
  CovarianceSpec spec;
  double det_precision = 0.0;
  double sigma_diag = 0.0;
  double sigma_off = 0.0;
};

inline void check_equicorrelated_dim(std::size_t d) {
  if (d < 2) throw DomainError("equicorrelated family needs d >= 2, got " + std::to_string(d));
}

inline double equicorrelated_det_precision(std::size_t d) {
  check_equicorrelated_dim(d);
  const double x = static_cast<double>(d);
  return (3 * x - 1) / (2 * x - 1) * std::pow((2 * x - 1) / (2 * x), x);
}

inline double equicorrelated_log_det_precision(std::size_t d) {
  check_equicorrelated_dim(d);
  const double x = static_cast<double>(d);
  return std::log((3 * x - 1) / (2 * x - 1)) + x * std::log1p(-1.0 / (2 * x));
}

inline EquicorrelatedSpec equicorrelated_spec(std::size_t d) {
  check_equicorrelated_dim(d);
  const auto n = static_cast<Eigen::Index>(d);
  const double x = static_cast<double>(d);
  Matrix p = Matrix::Constant(n, n, 1.0 / (2 * x));
  p.diagonal().setOnes();
  const double a = 2 * x / (2 * x - 1);
  return {d, CovarianceSpec::from_precision(p), equicorrelated_det_precision(d), a * (1 - 1 / (3 * x - 1)),
          -a / (3 * x - 1)};
}

// Bivariate positive-quadrant probability for correlation rho.
inline double bivariate_orthant(double rho) { return 0.25 + std::asin(rho) / (2 * std::numbers::pi); }

namespace detail {

inline double correlation(const Matrix& s, Eigen::Index i, Eigen::Index j) {
  return s(i, j) / std::sqrt(s(i, i) * s(j, j));
}

}  // namespace detail

// Exact orthant probability for d <= 3; negative when no closed form applies.
inline double orthant_prob_closed_form(const Matrix& covariance) {
  const auto d = covariance.rows();
  if (d == 0) return 1.0;
  if (d == 1) return 0.5;
  if (d == 2) return bivariate_orthant(detail::correlation(covariance, 0, 1));
  if (d == 3)
    return 0.125 + (std::asin(detail::correlation(covariance, 0, 1)) + std::asin(detail::correlation(covariance, 0, 2)) +
                    std::asin(detail::correlation(covariance, 1, 2))) /
                       (4 * std::numbers::pi);
  return -1.0;
}

struct MonteCarloOptions {
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

inline Estimate orthant_prob_mc(const CovarianceSpec& spec, std::uint64_t samples, const MonteCarloOptions& opts = {}) {
  if (samples < 1) throw ParameterError("orthant_prob_mc needs samples >= 1");
  const auto d = static_cast<Eigen::Index>(spec.dim());
  const auto counts = blocked_monte_carlo<HitCounter>(
      samples, opts.seed, Purpose::orthant, opts.workers, [&](Stream& rng, std::uint64_t count) {
        HitCounter h;
        Vector z(d), x(d);
        for (std::uint64_t s = 0; s < count; ++s) {
          spec.sample(rng, z, x);
          h.hits += (x.array() > 0.0).all();
          ++h.total;
        }
        return h;
      });
  return proportion(counts.hits, counts.total);
}

// Orthant probability, closed form when available.
inline Estimate orthant_prob(const CovarianceSpec& spec, std::uint64_t samples, const MonteCarloOptions& opts = {}) {
  const double exact = orthant_prob_closed_form(spec.covariance());
  if (exact >= 0.0) return {exact, 0.0, 0, false};
  return orthant_prob_mc(spec, samples, opts);
}

namespace detail {

// Standard normal truncated to [a, inf): plain rejection for a <= 0.5,
// otherwise exponential proposals with the optimal rate.
inline double truncated_standard_normal(double a, Stream& rng) {
  if (a <= 0.5) {
    for (;;) {
      const double z = rng.normal();
      if (z >= a) return z;
    }
  }
  const double lambda = 0.5 * (a + std::sqrt(a * a + 4.0));
  for (;;) {
    const double z = a + rng.exponential() / lambda;
    if (std::log(rng.uniform_open()) <= -0.5 * (z - lambda) * (z - lambda)) return z;
  }
}

}  // namespace detail

enum class TruncatedSampler { automatic, rejection, gibbs };

inline const char* sampler_name(TruncatedSampler s) {
  switch (s) {
    case TruncatedSampler::rejection: return "rejection";
    case TruncatedSampler::gibbs: return "gibbs";
    default: return "automatic";
  }
}

struct TruncatedOptions {
  std::uint64_t seed = 0;
  unsigned workers = 1;
  TruncatedSampler sampler = TruncatedSampler::automatic;
  std::size_t rejection_max_dim = 8;
  double min_acceptance = 1e-4;
  std::size_t chains = 8;
  std::size_t burn_in_sweeps = 1000;
  std::size_t thinning = 10;
  std::size_t batches_per_chain = 10;
};

struct TruncatedMoments {
  Matrix second;     // E[Z_i Z_j] under the orthant-conditioned law
  Matrix std_error;
  std::uint64_t samples = 0;
  TruncatedSampler used = TruncatedSampler::rejection;
  bool switched = false;     // rejection abandoned for low acceptance
  double acceptance = 1.0;   // rejection acceptance rate (1 for the chain sampler)
};

namespace detail {

struct MomentSums {
  Matrix sum, sum_sq;
  std::uint64_t count = 0;

  explicit MomentSums(Eigen::Index d = 0) : sum(Matrix::Zero(d, d)), sum_sq(Matrix::Zero(d, d)) {}
  void add(const Vector& x) {
    const Matrix outer = x * x.transpose();
    sum += outer;
    sum_sq += outer.cwiseProduct(outer);
    ++count;
  }
  void merge(const MomentSums& o) {
    if (o.count == 0) return;
    if (count == 0) {
      *this = o;
      return;
    }
    sum += o.sum;
    sum_sq += o.sum_sq;
    count += o.count;
  }
  Matrix mean() const { return sum / static_cast<double>(count); }
};

inline TruncatedMoments gibbs_moments(const CovarianceSpec& spec, std::uint64_t accepted, const TruncatedOptions& opts) {
  const auto d = static_cast<Eigen::Index>(spec.dim());
  const Matrix& p = spec.precision();
  const std::size_t chains = std::max<std::size_t>(1, opts.chains);
  const std::uint64_t per_chain = (accepted + chains - 1) / chains;
  const std::size_t batches = std::max<std::size_t>(1, std::min<std::size_t>(opts.batches_per_chain, per_chain));
  std::vector<std::vector<MomentSums>> sums(chains, std::vector<MomentSums>(batches, MomentSums(d)));

  const unsigned workers = static_cast<unsigned>(std::clamp<std::size_t>(opts.workers, 1, chains));
  for_each_worker(workers, [&](unsigned w) {
    for (std::size_t c = w; c < chains; c += workers) {
      Stream rng(opts.seed, Purpose::truncated, (std::uint64_t{1} << 32) + c);
      Vector x = Vector::Ones(d);
      auto sweep = [&] {
        for (Eigen::Index i = 0; i < d; ++i) {
          const double sd = 1.0 / std::sqrt(p(i, i));
          const double mu = -(p.row(i).dot(x) - p(i, i) * x[i]) / p(i, i);
          x[i] = mu + sd * detail::truncated_standard_normal(-mu / sd, rng);
        }
      };
      for (std::size_t s = 0; s < opts.burn_in_sweeps; ++s) sweep();
      for (std::uint64_t s = 0; s < per_chain; ++s) {
        for (std::size_t t = 0; t < opts.thinning; ++t) sweep();
        sums[c][static_cast<std::size_t>(s * batches / per_chain)].add(x);
      }
    }
  });

  MomentSums all(d);
  std::vector<Matrix> batch_means;
  for (const auto& chain : sums)
    for (const auto& b : chain) {
      all.merge(b);
      if (b.count) batch_means.push_back(b.mean());
    }
  TruncatedMoments out;
  out.second = all.mean();
  out.std_error = Matrix::Zero(d, d);
  const double nb = static_cast<double>(batch_means.size());
  if (batch_means.size() > 1) {
    for (const auto& m : batch_means) out.std_error += (m - out.second).cwiseProduct(m - out.second);
    out.std_error = (out.std_error / (nb - 1) / nb).cwiseSqrt();
  }
  out.samples = all.count;
  out.used = TruncatedSampler::gibbs;
  return out;
}

}  // namespace detail

// Second moments of N(0, covariance) conditioned on the positive orthant.
// Rejection is used for small d; it hands over to the coordinate-wise chain
// sampler when the acceptance rate falls below opts.min_acceptance.
inline TruncatedMoments truncated_moments_mc(const CovarianceSpec& spec, std::uint64_t accepted,
                                             const TruncatedOptions& opts = {}) {
  if (accepted < 2) throw ParameterError("truncated_moments_mc needs at least 2 accepted samples");
  const auto d = static_cast<Eigen::Index>(spec.dim());
  const bool try_rejection = opts.sampler == TruncatedSampler::rejection ||
                             (opts.sampler == TruncatedSampler::automatic && spec.dim() <= opts.rejection_max_dim);
  if (!try_rejection) return detail::gibbs_moments(spec, accepted, opts);

  // Blocks of proposals are processed in fixed-size waves and their accepted
  // samples kept in block order, so the output is worker-independent.
  constexpr std::uint64_t wave = 64;
  std::vector<Vector> kept;
  kept.reserve(accepted);
  std::uint64_t proposals = 0, hits = 0;
  for (std::uint64_t first = 0; kept.size() < accepted; first += wave) {
    std::vector<std::vector<Vector>> found(wave);
    const unsigned workers = static_cast<unsigned>(std::clamp<std::uint64_t>(opts.workers, 1, wave));
    for_each_worker(workers, [&](unsigned w) {
      Vector z(d), x(d);
      for (std::uint64_t b = w; b < wave; b += workers) {
        Stream rng(opts.seed, Purpose::truncated, first + b);
        for (std::uint64_t s = 0; s < kBlockSize; ++s) {
          spec.sample(rng, z, x);
          if ((x.array() > 0.0).all()) found[b].push_back(x);
        }
      }
    });
    for (auto& f : found) {
      hits += f.size();
      for (auto& x : f)
        if (kept.size() < accepted) kept.push_back(std::move(x));
    }
    proposals += wave * kBlockSize;
    const double rate = static_cast<double>(hits) / static_cast<double>(proposals);
    if (rate < opts.min_acceptance && opts.sampler == TruncatedSampler::automatic) {
      auto out = detail::gibbs_moments(spec, accepted, opts);
      out.switched = true;
      out.acceptance = rate;
      return out;
    }
  }

  detail::MomentSums sums(d);
  for (const auto& x : kept) sums.add(x);
  TruncatedMoments out;
  out.second = sums.mean();
  const double n = static_cast<double>(sums.count);
  const Matrix var = (sums.sum_sq / n - out.second.cwiseProduct(out.second)) * (n / (n - 1));
  out.std_error = (var.cwiseMax(0.0) / n).cwiseSqrt();
  out.samples = sums.count;
  out.used = TruncatedSampler::rejection;
  out.acceptance = static_cast<double>(hits) / static_cast<double>(proposals);
  return out;
}

// sum_j precision_ij * E[Z_i Z_j], which equals 1 for every i.
inline Vector amemiya_residuals(const CovarianceSpec& spec, const Matrix& second) {
  return (spec.precision().cwiseProduct(second)).rowwise().sum();
}

// Standard error of the Amemiya sums, treating entries as independent.
inline Vector amemiya_std_errors(const CovarianceSpec& spec, const Matrix& std_error) {
  return (spec.precision().cwiseProduct(std_error).cwiseAbs2()).rowwise().sum().cwiseSqrt();
}

enum class FkqMode { mc, two_over_pi };

struct SecondMoments {
  std::vector<double> values;  // E[X_i^2 | orthant]
  Matrix f;                    // F_kq(0,0) used (diagonal unused)
};

// g_kq term for coordinate i: sigma_ik (sigma_iq - sigma_kq sigma_ik / sigma_kk).
inline double mw_coefficient(const Matrix& s, Eigen::Index i, Eigen::Index k, Eigen::Index q) {
  return s(i, k) * (s(i, q) - s(k, q) * s(i, k) / s(k, k));
}

// Density of the orthant-conditioned pair (X_k, X_q) at the origin:
// phi_2(0,0) times the conditional orthant probability of the other
// coordinates given X_k = X_q = 0, divided by the full orthant probability.
inline double fkq_at_origin(const CovarianceSpec& spec, Eigen::Index k, Eigen::Index q, double full_orthant,
                            std::uint64_t samples, const MonteCarloOptions& opts) {
  const auto d = static_cast<Eigen::Index>(spec.dim());
  const Matrix& s = spec.covariance();
  const double det2 = s(k, k) * s(q, q) - s(k, q) * s(k, q);
  const double phi = 1.0 / (2 * std::numbers::pi * std::sqrt(det2));
  double rest = 1.0;
  if (d > 2) {
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < d; ++i)
      if (i != k && i != q) keep.push_back(i);
    const auto m = static_cast<Eigen::Index>(keep.size());
    Matrix p(m, m);
    for (Eigen::Index a = 0; a < m; ++a)
      for (Eigen::Index b = 0; b < m; ++b) p(a, b) = spec.precision()(keep[a], keep[b]);
    const auto cond = CovarianceSpec::from_precision(p);
    MonteCarloOptions sub = opts;
    sub.seed = opts.seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(k * d + q + 1));
    rest = orthant_prob(cond, samples, sub).value;
  }
  return phi * rest / full_orthant;
}

// Manjunath-Wilhelm evaluation of E[X_i^2 | X > 0] for lower truncation at 0.
inline SecondMoments second_moment_formula(const CovarianceSpec& spec, FkqMode mode, std::uint64_t samples = 1'000'000,
                                           const MonteCarloOptions& opts = {}) {
  const auto d = static_cast<Eigen::Index>(spec.dim());
  const Matrix& s = spec.covariance();
  SecondMoments out;
  out.f = Matrix::Zero(d, d);
  if (mode == FkqMode::two_over_pi) {
    out.f.setConstant(2.0 / std::numbers::pi);
  } else if (d >= 2) {
    const double full = orthant_prob(spec, samples, opts).value;
    for (Eigen::Index k = 0; k < d; ++k)
      for (Eigen::Index q = k + 1; q < d; ++q) out.f(k, q) = out.f(q, k) = fkq_at_origin(spec, k, q, full, samples, opts);
  }
  out.f.diagonal().setZero();
  for (Eigen::Index i = 0; i < d; ++i) {
    double e = s(i, i);
    for (Eigen::Index k = 0; k < d; ++k)
      for (Eigen::Index q = 0; q < d; ++q)
        if (q != k) e += mw_coefficient(s, i, k, q) * out.f(k, q);
    out.values.push_back(e);
  }
  return out;
}

// log of exp(1/2 sum_i precision_ii m_i) / (2^{d-1} e^{d/2}).
inline double orthant_moment_bound(const CovarianceSpec& spec, const std::vector<double>& moments) {
  const auto d = static_cast<Eigen::Index>(spec.dim());
  if (static_cast<Eigen::Index>(moments.size()) != d) throw DimensionError("moment vector has the wrong length");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) acc += spec.precision()(i, i) * moments[static_cast<std::size_t>(i)];
  const double x = static_cast<double>(d);
  return 0.5 * acc - (x - 1) * std::numbers::ln2 - 0.5 * x;
}

// Exact sum over k, q != k of the g_kq terms for the equicorrelated family
// (identical for every coordinate i). Pairs with k = i vanish.
inline double equicorrelated_g_sum(std::size_t d) {
  check_equicorrelated_dim(d);
  const double x = static_cast<double>(d);
  const double a = 2 * x / (2 * x - 1);
  const double r = 3 * x - 1;
  const double neither = a * a / (r * r) * (1 + 1 / (r - 1));
  const double q_is_i = -a * a / r * (1 - 1 / r - 1 / (r * (r - 1)));
  return (x - 1) * (x - 2) * neither + (x - 1) * q_is_i;
}

struct ReducedBound {
  std::size_t d = 0;
  double second_moment = 0.0;  // E[X_i^2] with F_kq(0,0) replaced by 2/pi
  double g_sum = 0.0;
  double log_bound = 0.0;
  double log_trivial = 0.0;    // -(d-1) ln 2
};

inline ReducedBound reduced_orthant_bound(std::size_t d) {
  check_equicorrelated_dim(d);
  const double x = static_cast<double>(d);
  const double a = 2 * x / (2 * x - 1);
  ReducedBound b;
  b.d = d;
  b.g_sum = equicorrelated_g_sum(d);
  b.second_moment = a * (1 - 1 / (3 * x - 1)) + 2.0 / std::numbers::pi * b.g_sum;
  b.log_bound = 0.5 * x * b.second_moment - (x - 1) * std::numbers::ln2 - 0.5 * x;
  b.log_trivial = -(x - 1) * std::numbers::ln2;
  return b;
}

}  // namespace twoopt
