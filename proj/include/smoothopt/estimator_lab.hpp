#ifndef SMOOTHOPT_ESTIMATOR_LAB_HPP
#define SMOOTHOPT_ESTIMATOR_LAB_HPP

#include <smoothopt/core.hpp>
#include <smoothopt/objectives.hpp>
#include <smoothopt/smoothing.hpp>

#include <cmath>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

namespace smoothopt {

/// Reference gradient of g(.; t) at temperature lambda.
using ReferenceGradient = std::function<Vector(const VectorRef& x, double t, double lambda)>;

struct MomentSweepConfig {
    std::string objective_id = "gmm1d:canonical";
    std::vector<Vector> x_points;
    std::vector<std::size_t> n_grid;
    std::vector<double> t_grid;
    std::vector<double> lambda_grid;
    int replications = 200;
    std::uint64_t base_seed = 0;
    bool antithetic = false;
    int jobs = 1;

    void validate() const
    {
        if (x_points.empty() || n_grid.empty() || t_grid.empty() || lambda_grid.empty())
            throw ConfigError("moment sweep: every grid must be nonempty");
        if (replications < 30)
            throw ConfigError("moment sweep: replications must be >= 30");
        for (auto n : n_grid)
            if (n < 2 || (antithetic && n % 2 != 0))
                throw ConfigError("moment sweep: N must be >= 2 (and even when antithetic)");
        for (double t : t_grid)
            if (!(t > 0.0))
                throw ConfigError("moment sweep: t must be positive");
        for (double l : lambda_grid)
            if (!(l > 0.0))
                throw ConfigError("moment sweep: lambda must be positive");
    }
};

struct MomentCell {
    std::size_t x_index = 0;
    std::size_t n = 0;
    double t = 0.0;
    double lambda = 0.0;
    double bias_nom = 0.0; // ||mean estimate - reference||
    double bias_mon = 0.0; // mean ||estimate - reference||
    double variance = 0.0; // mean ||estimate - mean estimate||^2
    double se_bias = 0.0;
    double se_variance = 0.0;
    Vector reference;
};

struct MomentSweepResult {
    std::vector<MomentCell> cells; // x-major, then t, lambda, N
};

/// Gradient estimate (lambda/t)(x - sum wbar_i y_i). The antithetic variant draws N/2
/// perturbations and uses both x + e and x - e.
inline Vector estimate_gradient(const Objective& f, const VectorRef& x, const SmoothingParams& p, const RngStream& rng, bool antithetic)
{
    if (!antithetic)
        return estimate_smoothed(f, x, p, rng).gradient;
    p.validate();
    require(p.n_samples % 2 == 0, "antithetic estimator needs even N");
    const auto half = static_cast<Eigen::Index>(p.n_samples / 2);
    Matrix y(x.size(), 2 * half);
    y.leftCols(half) = sample_gaussian(x, p.t, static_cast<std::size_t>(half), rng);
    y.rightCols(half) = (2.0 * x).replicate(1, half) - y.leftCols(half);
    auto costs = evaluate_batch(f, y);
    const WeightedBatch b = weigh_batch(std::move(y), std::move(costs), p.lambda);
    return (p.lambda / p.t) * (x - weighted_mean(b.samples, b.weights));
}

/// Reference gradients for the objectives that have one: gmm1d (closed form at the
/// mixture's own lambda, 1-d quadrature of the tempered target otherwise) and constant.
inline ReferenceGradient reference_gradient_for(const std::string& objective_id)
{
    if (objective_id.rfind("constant:", 0) == 0) {
        (void)make_objective(objective_id); // validates the id
        return [](const VectorRef& x, double, double) { return Vector(Vector::Zero(x.size())); };
    }
    if (objective_id == "gmm1d:canonical") {
        const GmmSpec spec = GmmSpec::canonical_1d();
        const GmmSmoothOracle oracle(spec);
        const Objective f = make_objective(objective_id);
        return [spec, oracle, f](const VectorRef& x, double t, double lambda) -> Vector {
            if (lambda == spec.lambda)
                return gmm_smoothed_exact(oracle, x, t).gradient;
            // exp(-f/lambda) is the mixture raised to lambda0/lambda: widen the window accordingly.
            double lo = x[0] - 12.0 * std::sqrt(t), hi = x[0] + 12.0 * std::sqrt(t);
            const double scale = std::sqrt(lambda / spec.lambda);
            for (std::size_t i = 0; i < spec.weights.size(); ++i) {
                const double sd = std::sqrt(spec.variances[i]) * scale;
                lo = std::min(lo, spec.means[i][0] - 12.0 * sd);
                hi = std::max(hi, spec.means[i][0] + 12.0 * sd);
            }
            auto h = [&f](double y) { return f(Vector::Constant(1, y)); };
            return Vector::Constant(1, quadrature_smoothed_1d(h, x[0], t, lambda, lo, hi, 40000).gradient);
        };
    }
    throw ConfigError("no reference gradient for objective '" + objective_id + "'");
}

/// Bias, variance and their standard errors from replicated estimates against a reference.
inline MomentCell summarize_estimates(const std::vector<Vector>& est, const VectorRef& reference)
{
    require(est.size() >= 2, "summarize_estimates: need at least two estimates");
    const auto r = static_cast<double>(est.size());
    const auto d = reference.size();
    Vector mean = Vector::Zero(d);
    for (const auto& e : est)
        mean += e / r;
    MomentCell c;
    c.reference = reference;
    const Vector diff = mean - reference;
    c.bias_nom = diff.norm();
    Matrix cov = Matrix::Zero(d, d);
    std::vector<double> q(est.size());
    for (std::size_t k = 0; k < est.size(); ++k) {
        const Vector dev = est[k] - mean;
        cov += dev * dev.transpose() / (r - 1.0);
        q[k] = dev.squaredNorm();
        c.bias_mon += (est[k] - reference).norm() / r;
    }
    double qm = 0.0;
    for (double v : q)
        qm += v / r;
    c.variance = qm;
    double qs = 0.0;
    for (double v : q)
        qs += (v - qm) * (v - qm) / (r - 1.0);
    c.se_variance = std::sqrt(qs / r);
    // Delta method along the bias direction; the isotropic spread when the bias is zero.
    if (c.bias_nom > 0.0) {
        const Vector u = diff / c.bias_nom;
        c.se_bias = std::sqrt(std::max(0.0, u.dot(cov * u)) / r);
    }
    else {
        c.se_bias = std::sqrt(cov.trace() / r);
    }
    return c;
}

/// Every (x, t, lambda, N) cell gets `replications` independent estimates; cell k draws
/// from RngStream{base_seed, k}.substream(rep), so results do not depend on jobs.
inline MomentSweepResult measure_moments(const MomentSweepConfig& cfg, const Objective& f, const ReferenceGradient& reference)
{
    cfg.validate();
    struct Key {
        std::size_t xi, ti, li, ni;
    };
    std::vector<Key> keys;
    for (std::size_t xi = 0; xi < cfg.x_points.size(); ++xi) {
        if (cfg.x_points[xi].size() != f.dim)
            throw ConfigError("moment sweep: x point dimension does not match the objective");
        for (std::size_t ti = 0; ti < cfg.t_grid.size(); ++ti)
            for (std::size_t li = 0; li < cfg.lambda_grid.size(); ++li)
                for (std::size_t ni = 0; ni < cfg.n_grid.size(); ++ni)
                    keys.push_back({xi, ti, li, ni});
    }
    MomentSweepResult res;
    res.cells.resize(keys.size());
    parallel_for(keys.size(), cfg.jobs, [&](std::size_t k) {
        const Key& key = keys[k];
        const Vector& x = cfg.x_points[key.xi];
        const double t = cfg.t_grid[key.ti], lambda = cfg.lambda_grid[key.li];
        const SmoothingParams p{t, lambda, cfg.n_grid[key.ni]};
        const RngStream cell_rng{cfg.base_seed, static_cast<std::uint64_t>(k)};
        std::vector<Vector> est;
        est.reserve(static_cast<std::size_t>(cfg.replications));
        for (int rep = 0; rep < cfg.replications; ++rep)
            est.push_back(estimate_gradient(f, x, p, cell_rng.substream(static_cast<std::uint64_t>(rep)), cfg.antithetic));
        MomentCell c = summarize_estimates(est, reference(x, t, lambda));
        c.x_index = key.xi;
        c.n = p.n_samples;
        c.t = t;
        c.lambda = lambda;
        res.cells[k] = std::move(c);
    });
    return res;
}

/// Least-squares slope of log(variance) against log(N) over the cells matching (x, t, lambda).
inline double variance_slope(const MomentSweepResult& r, std::size_t x_index, double t, double lambda)
{
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const auto& c : r.cells) {
        if (c.x_index != x_index || c.t != t || c.lambda != lambda)
            continue;
        const double lx = std::log(static_cast<double>(c.n)), ly = std::log(c.variance);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    require(n >= 2, "variance_slope: need at least two N values");
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline void write_moments_csv(std::ostream& os, const MomentSweepResult& r)
{
    os << "x_index,N,t,lambda,bias_nom,bias_mon,variance,se_bias,se_var\n";
    for (const auto& c : r.cells)
        os << c.x_index << "," << c.n << "," << format_real(c.t) << "," << format_real(c.lambda) << ","
           << format_real(c.bias_nom) << "," << format_real(c.bias_mon) << "," << format_real(c.variance) << ","
           << format_real(c.se_bias) << "," << format_real(c.se_variance) << "\n";
}

// ---------------------------------------------------------------------------
// Temperature sweep

inline std::vector<double> logspace(double lo, double hi, int n)
{
    require(lo > 0.0 && hi > lo && n >= 2, "logspace: need 0 < lo < hi and n >= 2");
    std::vector<double> out(static_cast<std::size_t>(n));
    const double a = std::log10(lo), b = std::log10(hi);
    for (int i = 0; i < n; ++i)
        out[static_cast<std::size_t>(i)] = std::pow(10.0, a + (b - a) * i / (n - 1));
    return out;
}

/// Upper curvature max f'' of a 1-d objective over [x - 3 sqrt t, x + 3 sqrt t], by
/// central second differences on a 601-point grid.
inline double curvature_scale(const Objective& f, double x, double t)
{
    require(f.dim == 1, "curvature_scale: 1-d objectives only");
    const double half = 3.0 * std::sqrt(t), h = 1e-4;
    auto v = [&f](double y) { return f(Vector::Constant(1, y)); };
    double best = -INFINITY;
    for (int i = 0; i <= 600; ++i) {
        const double y = x - half + 2.0 * half * i / 600.0;
        best = std::max(best, (v(y + h) - 2.0 * v(y) + v(y - h)) / (h * h));
    }
    return best;
}

struct LambdaSweepRow {
    double lambda = 0.0;
    double proxy = 0.0; // variance + bias_nom^2
    double variance = 0.0;
    double bias_nom = 0.0;
};

struct LambdaSweepResult {
    std::vector<LambdaSweepRow> rows;
    std::size_t argmin = 0;

    double argmin_lambda() const { return rows.at(argmin).lambda; }

    /// Strictly larger proxy at both grid ends than at the argmin.
    bool u_shaped() const
    {
        return rows.size() >= 3 && argmin > 0 && argmin + 1 < rows.size() && rows.front().proxy > rows[argmin].proxy &&
               rows.back().proxy > rows[argmin].proxy;
    }
};

inline LambdaSweepResult lambda_sweep(const Objective& f, const ReferenceGradient& reference, const Vector& x, double t,
                                      const std::vector<double>& lambda_grid, std::size_t n, int replications, std::uint64_t seed,
                                      int jobs = 1)
{
    MomentSweepConfig cfg;
    cfg.x_points = {x};
    cfg.n_grid = {n};
    cfg.t_grid = {t};
    cfg.lambda_grid = lambda_grid;
    cfg.replications = replications;
    cfg.base_seed = seed;
    cfg.jobs = jobs;
    const auto m = measure_moments(cfg, f, reference);
    LambdaSweepResult out;
    for (const auto& c : m.cells)
        out.rows.push_back({c.lambda, c.variance + c.bias_nom * c.bias_nom, c.variance, c.bias_nom});
    for (std::size_t i = 1; i < out.rows.size(); ++i)
        if (out.rows[i].proxy < out.rows[out.argmin].proxy)
            out.argmin = i;
    return out;
}

inline void write_lambda_sweep_csv(std::ostream& os, const LambdaSweepResult& r)
{
    os << "lambda,proxy,variance,bias_nom\n";
    for (const auto& row : r.rows)
        os << format_real(row.lambda) << "," << format_real(row.proxy) << "," << format_real(row.variance) << ","
           << format_real(row.bias_nom) << "\n";
}

} // namespace smoothopt

#endif
