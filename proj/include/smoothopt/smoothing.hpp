#ifndef SMOOTHOPT_SMOOTHING_HPP
#define SMOOTHOPT_SMOOTHING_HPP

#include <smoothopt/core.hpp>
#include <smoothopt/objectives.hpp>

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

namespace smoothopt {

struct SmoothingParams {
    double t = 1.0;      // kernel variance
    double lambda = 1.0; // temperature
    std::size_t n_samples = 1000;

    void validate() const
    {
        require(t > 0.0 && std::isfinite(t), "SmoothingParams: t must be positive");
        require(lambda > 0.0, "SmoothingParams: lambda must be positive");
        require(n_samples >= 2, "SmoothingParams: n_samples must be >= 2");
    }
};

struct SmoothedEval {
    double value = 0.0; // estimate of g(x; t)
    Vector gradient;    // (lambda/t) (x - sum_i wbar_i y_i)
    double ess = 0.0;
    double raw_weight_logsum = 0.0; // log sum_i exp(-f(y_i)/lambda)
    Vector weighted_mean;           // sum_i wbar_i y_i
};

/// A sampled batch with its self-normalized Gibbs weights.
struct WeightedBatch {
    Matrix samples;
    std::vector<double> costs;
    std::vector<double> weights; // normalized
    double ess = 0.0;
    double log_sum = 0.0;
};

/// Gibbs weights that tolerate non-finite costs (they get weight zero).
inline WeightedBatch weigh_batch(Matrix samples, std::vector<double> costs, double lambda)
{
    WeightedBatch b;
    b.samples = std::move(samples);
    b.costs = std::move(costs);
    const std::size_t n = b.costs.size();
    double cmin = std::numeric_limits<double>::infinity();
    for (double c : b.costs)
        if (std::isfinite(c))
            cmin = std::min(cmin, c);
    if (!std::isfinite(cmin))
        throw EstimationError("every sampled cost is non-finite");
    b.weights.assign(n, 0.0);
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(b.costs[i]))
            continue;
        const double u = std::exp(-(b.costs[i] - cmin) / lambda);
        b.weights[i] = u;
        sum += u;
        sum_sq += u * u;
    }
    for (double& w : b.weights)
        w /= sum;
    b.ess = sum * sum / sum_sq;
    b.log_sum = -cmin / lambda + std::log(sum);
    return b;
}

inline WeightedBatch draw_weighted_batch(const Objective& f, const VectorRef& x, const SmoothingParams& p, const RngStream& rng)
{
    p.validate();
    require(x.allFinite(), "smoothing estimator: x must be finite");
    require(x.size() == f.dim, "smoothing estimator: dimension mismatch");
    Matrix y = sample_gaussian(x, p.t, p.n_samples, rng);
    auto costs = evaluate_batch(f, y);
    return weigh_batch(std::move(y), std::move(costs), p.lambda);
}

/// Zeroth-order estimate of g(x;t) and its gradient from one batch y_i ~ N(x, tI).
inline SmoothedEval estimate_smoothed(const Objective& f, const VectorRef& x, const SmoothingParams& p, const RngStream& rng)
{
    const WeightedBatch b = draw_weighted_batch(f, x, p, rng);
    SmoothedEval out;
    out.weighted_mean = weighted_mean(b.samples, b.weights);
    out.gradient = (p.lambda / p.t) * (x - out.weighted_mean);
    out.ess = b.ess;
    out.raw_weight_logsum = b.log_sum;
    out.value = -p.lambda * (b.log_sum - std::log(static_cast<double>(p.n_samples)));
    return out;
}

/// (lambda/t^2) (t I - C) with C the weighted covariance of a batch.
inline Matrix tweedie_hessian(const WeightedBatch& b, double t, double lambda)
{
    const auto d = b.samples.rows();
    const Vector mean = weighted_mean(b.samples, b.weights);
    Matrix cov = Matrix::Zero(d, d);
    for (Eigen::Index i = 0; i < b.samples.cols(); ++i) {
        const double w = b.weights[static_cast<std::size_t>(i)];
        if (w == 0.0)
            continue;
        const Vector c = b.samples.col(i) - mean;
        cov.selfadjointView<Eigen::Lower>().rankUpdate(c, w);
    }
    Matrix sym = cov.selfadjointView<Eigen::Lower>();
    Matrix h = (lambda / (t * t)) * (t * Matrix::Identity(d, d) - sym);
    // exact symmetry
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < i; ++j)
            h(j, i) = h(i, j);
    return h;
}

inline Matrix estimate_smoothed_hessian(const Objective& f, const VectorRef& x, const SmoothingParams& p, const RngStream& rng)
{
    return tweedie_hessian(draw_weighted_batch(f, x, p, rng), p.t, p.lambda);
}

// ---------------------------------------------------------------------------
// Closed-form oracle for Gaussian-mixture potentials

struct GmmSmoothOracle {
    GmmSpec spec;

    explicit GmmSmoothOracle(GmmSpec s) : spec(std::move(s)) { spec.validate(); }
};

struct SmoothedExact {
    double value = 0.0;
    Vector gradient;
    Matrix hessian;
};

/// g(x;t) = -lambda log sum_i w_i N(x; mu_i, (sigma_i^2 + t) I) and its first two derivatives.
inline SmoothedExact gmm_smoothed_exact(const GmmSmoothOracle& oracle, const VectorRef& x, double t)
{
    require(t >= 0.0, "gmm_smoothed_exact: t must be nonnegative");
    const GmmSpec& spec = oracle.spec;
    require(x.size() == spec.dim(), "gmm_smoothed_exact: dimension mismatch");
    const auto d = x.size();
    std::vector<double> logs;
    gmm_component_logs(spec, x, t, logs);
    const double lse = log_sum_exp(logs);

    Vector ubar = Vector::Zero(d);
    Matrix h = Matrix::Zero(d, d);
    for (std::size_t i = 0; i < logs.size(); ++i) {
        const double r = std::exp(logs[i] - lse);
        const double s = spec.variances[i] + t;
        const Vector u = (x - spec.means[i]) / s;
        ubar += r * u;
        h.diagonal().array() += r / s;
        h.noalias() -= r * u * u.transpose();
    }
    h.noalias() += ubar * ubar.transpose();

    SmoothedExact out;
    out.value = -spec.lambda * lse;
    out.gradient = spec.lambda * ubar;
    out.hessian = spec.lambda * h;
    return out;
}

// ---------------------------------------------------------------------------
// 1-d quadrature oracle for arbitrary potentials

struct Smoothed1d {
    double value = 0.0;
    double gradient = 0.0;
    double hessian = 0.0;
};

/// g(x;t) = -lambda log int exp(-h(y)/lambda) k(x - y; t) dy on [lo, hi] by composite
/// Simpson with `intervals` (even) subintervals. Derivatives come from the posterior
/// mean and variance of y, so they are exact for the integrand the rule sees.
inline Smoothed1d quadrature_smoothed_1d(const std::function<double(double)>& h, double x, double t, double lambda, double lo, double hi,
                                         int intervals = 20000)
{
    require(t > 0.0 && lambda > 0.0, "quadrature_smoothed_1d: t and lambda must be positive");
    require(hi > lo && intervals >= 2 && intervals % 2 == 0, "quadrature_smoothed_1d: bad grid");
    const double step = (hi - lo) / intervals;
    std::vector<double> logf(static_cast<std::size_t>(intervals) + 1);
    double m = -std::numeric_limits<double>::infinity();
    for (int k = 0; k <= intervals; ++k) {
        const double y = lo + k * step;
        const double v = -h(y) / lambda - (x - y) * (x - y) / (2.0 * t);
        logf[static_cast<std::size_t>(k)] = v;
        m = std::max(m, v);
    }
    double z = 0.0, m1 = 0.0, m2 = 0.0;
    for (int k = 0; k <= intervals; ++k) {
        const double y = lo + k * step;
        const double c = (k == 0 || k == intervals) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
        const double f = c * std::exp(logf[static_cast<std::size_t>(k)] - m);
        z += f;
        m1 += f * (y - x);
        m2 += f * (y - x) * (y - x);
    }
    const double mean_off = m1 / z;
    const double var = m2 / z - mean_off * mean_off;
    const double log_p = m + std::log(z * step / 3.0) - 0.5 * std::log(2.0 * std::numbers::pi * t);
    return {-lambda * log_p, -(lambda / t) * mean_off, (lambda / (t * t)) * (t - var)};
}

/// Smoothed checkerboard. exp(-f/lambda) and the kernel both factor over coordinates,
/// so g is a sum of 1-d smoothed terms and the Hessian is diagonal. Each term is
/// integrated on a window of +-window_sd standard deviations around x_i.
inline SmoothedExact checkerboard_smoothed_exact(const CheckerboardSpec& spec, double lambda, const VectorRef& x, double t,
                                                 int intervals = 4000, double window_sd = 12.0)
{
    spec.validate();
    require(x.size() == spec.dim, "checkerboard_smoothed_exact: dimension mismatch");
    const auto d = x.size();
    const double half = window_sd * std::sqrt(t);
    const auto term = [&spec](double y) { return spec.term(y); };
    SmoothedExact out;
    out.gradient = Vector::Zero(d);
    out.hessian = Matrix::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        const Smoothed1d s = quadrature_smoothed_1d(term, x[i], t, lambda, x[i] - half, x[i] + half, intervals);
        out.value += s.value;
        out.gradient[i] = s.gradient;
        out.hessian(i, i) = s.hessian;
    }
    return out;
}

} // namespace smoothopt

#endif
