#ifndef SMOOTHOPT_LANDSCAPE_HPP
#define SMOOTHOPT_LANDSCAPE_HPP

#include <smoothopt/core.hpp>
#include <smoothopt/objectives.hpp>
#include <smoothopt/smoothing.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace smoothopt {

/// Constants of the global sub-Gaussian and local convexity assumptions.
struct LandscapeAssumptions {
    double alpha = 1.0;
    double beta = 1.0;
    double d_tau = 1.0;
    double tau = 1.0;
    double p_out = 0.5;
    double c_alpha = 0.5;
    double c_e = 0.1;
    double lambda = 1.0;
    int dim = 1;

    double kappa0() const { return beta / alpha; }

    void validate() const
    {
        require(alpha > 0.0 && beta >= alpha, "LandscapeAssumptions: need 0 < alpha <= beta");
        require(d_tau > 0.0 && tau >= 0.0 && lambda > 0.0 && c_e >= 0.0, "LandscapeAssumptions: nonpositive constant");
        require(c_alpha > 0.0 && c_alpha < 1.0, "LandscapeAssumptions: c_alpha must be in (0,1)");
        require(p_out > 0.0 && p_out < 1.0, "LandscapeAssumptions: p_out must be in (0,1)");
        require(dim >= 1, "LandscapeAssumptions: dim must be >= 1");
    }
};

struct ConvexityBound {
    double radius = 0.0;
    double modulus = 0.0; // guaranteed strong-convexity modulus inside the radius
};

/// C_E min(sqrt((t + lambda/beta)/(lambda/beta)), sqrt((t + tau^2)/tau^2)) D_tau and
/// the modulus C_alpha lambda / (t + lambda/alpha).
inline ConvexityBound theory_convexity(const LandscapeAssumptions& a, double t)
{
    a.validate();
    require(t > 0.0, "theory_radius: t must be positive");
    const double lb = a.lambda / a.beta;
    double m = std::sqrt((t + lb) / lb);
    if (a.tau > 0.0)
        m = std::min(m, std::sqrt((t + a.tau * a.tau) / (a.tau * a.tau)));
    return {a.c_e * m * a.d_tau, a.c_alpha * a.lambda / (t + a.lambda / a.alpha)};
}

inline double theory_radius(const LandscapeAssumptions& a, double t) { return theory_convexity(a, t).radius; }

/// min{(1 - C_a) t / (4 C_a D_tau), (D_tau + tau)(t + lambda/alpha)/(C_a t)}
///   + (kappa0 - 1)/(2 C_a) sqrt(1 / (2 pi (1/t + alpha/lambda)))
inline double theory_gap(const LandscapeAssumptions& a, double t)
{
    a.validate();
    require(t > 0.0, "theory_gap: t must be positive");
    const double ca = a.c_alpha;
    const double first = std::min((1.0 - ca) * t / (4.0 * ca * a.d_tau), (a.d_tau + a.tau) * (t + a.lambda / a.alpha) / (ca * t));
    const double asym = (a.kappa0() - 1.0) / (2.0 * ca) * std::sqrt(1.0 / (2.0 * std::numbers::pi * (1.0 / t + a.alpha / a.lambda)));
    return first + asym;
}

// ---------------------------------------------------------------------------
// Evaluators of the smoothed landscape

/// Exact (closed form or quadrature) evaluator of g(.;t) with its derivatives.
/// [lo, hi] is the per-coordinate box searched for the smoothed minimizer.
struct OracleEvaluator {
    int dim = 1;
    std::function<SmoothedExact(const VectorRef&, double)> eval;
    double lo = -10.0, hi = 10.0;
};

inline OracleEvaluator gmm_oracle(const GmmSpec& spec)
{
    GmmSmoothOracle o(spec);
    OracleEvaluator e;
    e.dim = spec.dim();
    e.eval = [o](const VectorRef& x, double t) { return gmm_smoothed_exact(o, x, t); };
    // The mode of a Gaussian mixture lies in the hull of its means.
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& m : spec.means) {
        lo = std::min(lo, m.minCoeff());
        hi = std::max(hi, m.maxCoeff());
    }
    e.lo = lo - 1.0;
    e.hi = hi + 1.0;
    return e;
}

inline OracleEvaluator checkerboard_oracle(const CheckerboardSpec& spec, double lambda = 1.0)
{
    OracleEvaluator e;
    e.dim = spec.dim;
    e.eval = [spec, lambda](const VectorRef& x, double t) { return checkerboard_smoothed_exact(spec, lambda, x, t); };
    e.lo = -5.0;
    e.hi = 5.0;
    return e;
}

/// Monte-Carlo evaluator: Hessians from the weighted-covariance estimator averaged
/// over replications, widened from `replications` up to `max_replications` when the
/// sign of the minimum eigenvalue is not resolved.
struct MonteCarloEvaluator {
    Objective objective;
    double lambda = 1.0;
    std::size_t n_samples = 20000;
    int replications = 8;
    int max_replications = 128;
    RngStream rng{0, 0};
};

struct EigenEstimate {
    double value = 0.0;
    double se = 0.0;
    bool conclusive = true;
};

/// Minimum eigenvalue of a symmetric matrix.
inline double min_eigenvalue(const Matrix& h)
{
    if (h.rows() == 1)
        return h(0, 0);
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues()[0];
}

/// MC estimate of lambda_min of the smoothed Hessian at x; `tag` picks the random
/// substream so that every scanned point owns independent draws.
inline EigenEstimate mc_min_eigenvalue(const MonteCarloEvaluator& ev, const VectorRef& x, double t, double threshold, std::uint64_t tag)
{
    const RngStream base = ev.rng.substream(tag);
    const SmoothingParams p{t, ev.lambda, ev.n_samples};
    std::vector<Matrix> hs;
    int target = std::max(2, ev.replications);
    EigenEstimate out;
    while (true) {
        while (static_cast<int>(hs.size()) < target)
            hs.push_back(estimate_smoothed_hessian(ev.objective, x, p, base.substream(hs.size())));
        const auto r = static_cast<double>(hs.size());
        Matrix mean = Matrix::Zero(x.size(), x.size());
        for (const auto& h : hs)
            mean += h / r;
        Vector u;
        if (x.size() == 1) {
            out.value = mean(0, 0);
            u = Vector::Ones(1);
        }
        else {
            Eigen::SelfAdjointEigenSolver<Matrix> es(mean);
            out.value = es.eigenvalues()[0];
            u = es.eigenvectors().col(0);
        }
        // First-order perturbation: lambda_min fluctuates like u^T H u.
        double ss = 0.0;
        for (const auto& h : hs) {
            const double q = u.dot(h * u) - out.value;
            ss += q * q;
        }
        out.se = std::sqrt(ss / (r - 1.0) / r);
        out.conclusive = std::abs(out.value - threshold) >= 2.0 * out.se;
        if (out.conclusive || target >= ev.max_replications)
            return out;
        target = std::min(2 * target, ev.max_replications);
    }
}

/// Unit directions for radius scans: +-1 in 1-d, evenly spaced angles in 2-d,
/// +-coordinate axes in higher dimensions.
inline std::vector<Vector> scan_directions(int dim, int directions)
{
    require(dim >= 1 && directions >= 1, "scan_directions: need dim >= 1 and directions >= 1");
    std::vector<Vector> out;
    if (dim == 1) {
        out.push_back(Vector::Constant(1, 1.0));
        if (directions >= 2)
            out.push_back(Vector::Constant(1, -1.0));
    }
    else if (dim == 2) {
        for (int k = 0; k < directions; ++k) {
            const double a = 2.0 * std::numbers::pi * k / directions;
            Vector u(2);
            u << std::cos(a), std::sin(a);
            out.push_back(u);
        }
    }
    else {
        for (int k = 0; k < directions; ++k) {
            Vector u = Vector::Zero(dim);
            u[(k / 2) % dim] = (k % 2 == 0) ? 1.0 : -1.0;
            out.push_back(u);
        }
    }
    return out;
}

struct RadiusCurvePoint {
    double r = 0.0;
    double min_eig = 0.0;
};

struct ScanResult {
    double radius = 0.0;
    bool inconclusive = false;
    std::vector<RadiusCurvePoint> curve; // minimum over directions at each scanned radius
};

namespace detail {

    inline void check_grid(const std::vector<double>& grid)
    {
        require(!grid.empty(), "scan_convex_radius: empty radius grid");
        for (std::size_t i = 0; i < grid.size(); ++i) {
            require(grid[i] >= 0.0, "scan_convex_radius: radii must be nonnegative");
            require(i == 0 || grid[i] > grid[i - 1], "scan_convex_radius: radius grid must be increasing");
        }
    }

} // namespace detail

/// Largest grid radius r such that lambda_min(Hess g(x* + s u; t)) >= threshold for
/// every scanned s <= r and direction u. With full_curve the oracle keeps scanning
/// past the first failure so the whole eigenvalue curve is exported.
inline ScanResult scan_convex_radius(const OracleEvaluator& ev, const VectorRef& x_star, double t, const std::vector<double>& radius_grid,
                                     int directions, double threshold = 0.0, bool full_curve = false)
{
    detail::check_grid(radius_grid);
    require(x_star.size() == ev.dim, "scan_convex_radius: dimension mismatch");
    const auto dirs = scan_directions(ev.dim, directions);
    ScanResult res;
    bool failed = false;
    for (double r : radius_grid) {
        double mn = INFINITY;
        for (const auto& u : dirs) {
            const Vector p = x_star + r * u;
            mn = std::min(mn, min_eigenvalue(ev.eval(p, t).hessian));
        }
        res.curve.push_back({r, mn});
        if (!failed) {
            if (mn >= threshold)
                res.radius = r;
            else
                failed = true;
        }
        if (failed && !full_curve)
            break;
    }
    return res;
}

/// Monte-Carlo counterpart; stops at the first failing or inconclusive radius.
inline ScanResult scan_convex_radius(const MonteCarloEvaluator& ev, const VectorRef& x_star, double t, const std::vector<double>& radius_grid,
                                     int directions, double threshold = 0.0)
{
    detail::check_grid(radius_grid);
    require(x_star.size() == ev.objective.dim, "scan_convex_radius: dimension mismatch");
    const auto dirs = scan_directions(ev.objective.dim, directions);
    ScanResult res;
    std::uint64_t tag = 0;
    for (double r : radius_grid) {
        double mn = INFINITY;
        bool ok = true;
        for (const auto& u : dirs) {
            const Vector p = x_star + r * u;
            const EigenEstimate e = mc_min_eigenvalue(ev, p, t, threshold, tag++);
            mn = std::min(mn, e.value);
            if (!e.conclusive) {
                res.inconclusive = true;
                ok = false;
                break;
            }
            if (e.value < threshold) {
                ok = false;
                break;
            }
        }
        res.curve.push_back({r, mn});
        if (!ok)
            break;
        res.radius = r;
    }
    return res;
}

// ---------------------------------------------------------------------------
// Smoothed minimizer x_t* and the optimality gap

struct MinimizerResult {
    Vector x;
    double gap = 0.0;
    bool converged = true;
    int iterations = 0;
    std::string message;
};

namespace detail {

    inline MinimizerResult minimize_1d(const OracleEvaluator& ev, double t, int grid_points)
    {
        auto val = [&](double x) { return ev.eval(Vector::Constant(1, x), t).value; };
        auto grad = [&](double x) { return ev.eval(Vector::Constant(1, x), t).gradient[0]; };
        const double h = (ev.hi - ev.lo) / (grid_points - 1);
        int best = 0;
        double bv = INFINITY;
        for (int i = 0; i < grid_points; ++i) {
            const double v = val(ev.lo + i * h);
            if (v < bv) {
                bv = v;
                best = i;
            }
        }
        double lo = ev.lo + std::max(0, best - 1) * h, hi = ev.lo + std::min(grid_points - 1, best + 1) * h;
        MinimizerResult res;
        if (!(grad(lo) <= 0.0 && grad(hi) >= 0.0)) {
            res.x = Vector::Constant(1, ev.lo + best * h);
            res.converged = false;
            res.message = "no derivative sign change around the grid minimum";
            return res;
        }
        int it = 0;
        for (; it < 200 && hi - lo > 0.0; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi)
                break;
            const double g = grad(mid);
            if (g == 0.0) {
                lo = hi = mid;
                break;
            }
            (g < 0.0 ? lo : hi) = mid;
        }
        const double x = std::abs(grad(lo)) <= std::abs(grad(hi)) ? lo : hi;
        res.x = Vector::Constant(1, x);
        res.iterations = it;
        return res;
    }

    inline MinimizerResult damped_newton(const OracleEvaluator& ev, double t, const VectorRef& x_init, int max_iter)
    {
        MinimizerResult res;
        Vector x = x_init;
        SmoothedExact cur = ev.eval(x, t);
        for (int it = 1; it <= max_iter; ++it) {
            if (cur.gradient.norm() < 1e-11) {
                res.x = x;
                res.iterations = it - 1;
                return res;
            }
            Eigen::LLT<Matrix> llt(cur.hessian);
            Vector dir = (llt.info() == Eigen::Success) ? Vector(-llt.solve(cur.gradient)) : Vector(-cur.gradient);
            double slope = cur.gradient.dot(dir);
            if (!(slope < 0.0)) {
                dir = -cur.gradient;
                slope = -cur.gradient.squaredNorm();
            }
            double step = 1.0;
            SmoothedExact next;
            Vector xn;
            for (int k = 0; k < 60; ++k, step *= 0.5) {
                xn = x + step * dir;
                next = ev.eval(xn, t);
                if (next.value <= cur.value + 1e-4 * step * slope)
                    break;
            }
            if ((xn - x).norm() == 0.0) {
                res.x = x;
                res.iterations = it;
                res.converged = cur.gradient.norm() < 1e-8;
                if (!res.converged)
                    res.message = "line search stalled";
                return res;
            }
            x = xn;
            cur = next;
        }
        res.x = x;
        res.iterations = max_iter;
        res.converged = cur.gradient.norm() < 1e-11;
        if (!res.converged)
            res.message = "Newton did not converge";
        return res;
    }

} // namespace detail

/// x_t* = argmin g(.;t): grid scan plus derivative bisection in 1-d, damped Newton
/// with backtracking from x_init otherwise. gap = ||x_t* - x*||.
inline MinimizerResult find_smoothed_minimizer(const OracleEvaluator& ev, double t, const VectorRef& x_init, const VectorRef& x_star,
                                               int grid_points = 20001, int max_newton = 1000)
{
    require(t >= 0.0, "find_smoothed_minimizer: t must be nonnegative");
    require(x_init.size() == ev.dim && x_star.size() == ev.dim, "find_smoothed_minimizer: dimension mismatch");
    MinimizerResult res = ev.dim == 1 ? detail::minimize_1d(ev, t, grid_points) : detail::damped_newton(ev, t, x_init, max_newton);
    res.gap = (res.x - x_star).norm();
    return res;
}

/// Monte-Carlo minimizer: x <- x - eta_k (t/lambda) grad g^(0) with eta_k = 1/(1 + k/10)
/// and the average of the second half of the iterates as the estimate.
inline MinimizerResult find_smoothed_minimizer(const MonteCarloEvaluator& ev, double t, const VectorRef& x_init, const VectorRef& x_star,
                                               int steps = 400)
{
    require(t > 0.0 && steps >= 2, "find_smoothed_minimizer: need t > 0 and steps >= 2");
    Vector x = x_init, avg = Vector::Zero(x.size());
    const RngStream base = ev.rng.substream(0x6D696EULL);
    int counted = 0;
    for (int k = 0; k < steps; ++k) {
        const auto e = estimate_smoothed(ev.objective, x, {t, ev.lambda, ev.n_samples}, base.substream(static_cast<std::uint64_t>(k)));
        const double eta = 1.0 / (1.0 + k / 10.0);
        x -= eta * (t / ev.lambda) * e.gradient;
        if (k >= steps / 2) {
            avg += x;
            ++counted;
        }
    }
    MinimizerResult res;
    res.x = avg / counted;
    res.iterations = steps;
    res.gap = (res.x - x_star).norm();
    return res;
}

// ---------------------------------------------------------------------------
// Fitting the assumption constants to a 1-d mixture

struct AssumptionFit {
    LandscapeAssumptions assumptions;
    double convex_radius_f = 0.0; // where f'' first turns negative around x*
};

/// alpha, beta = min/max of f'' on the D_tau ball, where D_tau is half the convex
/// radius of f around x*; tau = sup_{a >= D_tau} a / sqrt(-2 log P0(|x - x*| >= a));
/// P_out = P0(|x - x*| >= D_tau); C_alpha = 0.5; C_E^2 = min(1/9, beta/(16 lambda D_tau^2) log d).
inline AssumptionFit fit_assumptions(const GmmSpec& spec, double x_star, double grid_step = 1e-3)
{
    spec.validate();
    if (spec.dim() != 1)
        throw ConfigError("fit_assumptions: only 1-d mixtures are supported");
    auto fpp = [&](double x) { return detail::gmm_potential_1d(spec, x)[2]; };
    AssumptionFit fit;
    double r = 0.0;
    const double rmax = 50.0;
    while (r < rmax && fpp(x_star + r + grid_step) > 0.0 && fpp(x_star - r - grid_step) > 0.0)
        r += grid_step;
    fit.convex_radius_f = r;
    auto& a = fit.assumptions;
    a.d_tau = std::max(0.5 * r, grid_step);
    a.alpha = INFINITY;
    a.beta = 0.0;
    for (double s = -a.d_tau; s <= a.d_tau + 0.5 * grid_step; s += grid_step) {
        const double c = fpp(x_star + s);
        a.alpha = std::min(a.alpha, c);
        a.beta = std::max(a.beta, c);
    }
    auto tail = [&](double dist) {
        // P0(|X - x*| >= dist) for the mixture, via complementary normal CDFs.
        double p = 0.0;
        for (std::size_t i = 0; i < spec.weights.size(); ++i) {
            const double sd = std::sqrt(spec.variances[i]), m = spec.means[i][0];
            p += spec.weights[i] * 0.5 * (std::erfc((x_star + dist - m) / (sd * std::numbers::sqrt2)) + std::erfc((m - x_star + dist) / (sd * std::numbers::sqrt2)));
        }
        return p;
    };
    a.p_out = std::clamp(tail(a.d_tau), 1e-300, 1.0 - 1e-16);
    double tau = 0.0, vmax = 0.0, span = 0.0;
    for (std::size_t i = 0; i < spec.weights.size(); ++i) {
        vmax = std::max(vmax, spec.variances[i]);
        span = std::max(span, std::abs(spec.means[i][0] - x_star));
    }
    const double amax = a.d_tau + span + 30.0 * std::sqrt(vmax);
    for (double dist = a.d_tau; dist <= amax; dist += grid_step) {
        const double p = tail(dist);
        if (!(p > 0.0) || p >= 1.0)
            continue;
        tau = std::max(tau, dist / std::sqrt(-2.0 * std::log(p)));
    }
    a.tau = tau;
    a.c_alpha = 0.5;
    a.lambda = spec.lambda;
    a.dim = 1;
    a.c_e = std::sqrt(std::min(1.0 / 9.0, a.beta / (16.0 * a.lambda * a.d_tau * a.d_tau) * std::log(static_cast<double>(a.dim))));
    return fit;
}

// ---------------------------------------------------------------------------
// Reports

struct LandscapeOptions {
    std::vector<double> radius_grid; // empty: 0..6 step 1e-3
    int directions = 0;              // 0: 2 in 1-d, 16 otherwise
    double threshold = 0.0;
    int jobs = 1;
};

struct LandscapeReport {
    std::vector<double> t_grid;
    std::vector<double> empirical_radius;
    std::vector<double> theory_radius;
    std::vector<double> empirical_gap;
    std::vector<double> theory_gap;
    std::vector<std::string> status;
    std::vector<std::vector<RadiusCurvePoint>> min_eigenvalue_curves;
    std::vector<Vector> minimizers;
    bool has_theory = false;
    // Advisory check: scanned points inside the theory radius with a negative
    // oracle eigenvalue.
    int soundness_violations = 0;
};

inline std::vector<double> default_radius_grid(double max_r = 6.0, double step = 1e-3)
{
    std::vector<double> g;
    const int n = static_cast<int>(std::llround(max_r / step));
    for (int i = 0; i <= n; ++i)
        g.push_back(i * step);
    return g;
}

/// Radius scan and smoothed minimizer per t, plus theory curves when assumptions are
/// given. A failure at one t is recorded in status and does not stop the grid.
inline LandscapeReport build_landscape_report(const OracleEvaluator& ev, const VectorRef& x_star, const std::vector<double>& t_grid,
                                              const std::optional<LandscapeAssumptions>& assumptions, const LandscapeOptions& opt = {})
{
    require(!t_grid.empty(), "build_landscape_report: empty t grid");
    for (std::size_t i = 0; i < t_grid.size(); ++i)
        require(t_grid[i] > 0.0 && (i == 0 || t_grid[i] > t_grid[i - 1]), "build_landscape_report: t grid must be positive and increasing");
    const auto grid = opt.radius_grid.empty() ? default_radius_grid() : opt.radius_grid;
    const int dirs = opt.directions > 0 ? opt.directions : (ev.dim == 1 ? 2 : 16);
    const std::size_t n = t_grid.size();
    LandscapeReport rep;
    rep.t_grid = t_grid;
    rep.has_theory = assumptions.has_value();
    rep.empirical_radius.assign(n, NAN);
    rep.empirical_gap.assign(n, NAN);
    rep.theory_radius.assign(n, NAN);
    rep.theory_gap.assign(n, NAN);
    rep.status.assign(n, "ok");
    rep.min_eigenvalue_curves.resize(n);
    rep.minimizers.resize(n);
    std::vector<int> violations(n, 0);
    parallel_for(n, opt.jobs, [&](std::size_t i) {
        const double t = t_grid[i];
        try {
            const ScanResult s = scan_convex_radius(ev, x_star, t, grid, dirs, opt.threshold, true);
            rep.empirical_radius[i] = s.radius;
            rep.min_eigenvalue_curves[i] = s.curve;
            const MinimizerResult m = find_smoothed_minimizer(ev, t, x_star, x_star);
            rep.minimizers[i] = m.x;
            rep.empirical_gap[i] = m.gap;
            if (!m.converged)
                rep.status[i] = "minimizer_failed: " + m.message;
            if (assumptions) {
                rep.theory_radius[i] = theory_radius(*assumptions, t);
                rep.theory_gap[i] = theory_gap(*assumptions, t);
                for (const auto& p : s.curve)
                    if (p.r <= rep.theory_radius[i] && p.min_eig < 0.0)
                        ++violations[i];
            }
        }
        catch (const std::exception& e) {
            rep.status[i] = std::string("error: ") + e.what();
        }
    });
    for (int v : violations)
        rep.soundness_violations += v;
    return rep;
}

namespace detail {

    inline std::string fmt_real(double v) { return std::isnan(v) ? std::string() : format_real(v); }

} // namespace detail

/// Long-format CSV: t, quantity in {emp_radius, thr_radius, emp_gap, thr_gap}, value, status.
inline void write_landscape_csv(std::ostream& os, const LandscapeReport& rep)
{
    os << "t,quantity,value,status\n";
    for (std::size_t i = 0; i < rep.t_grid.size(); ++i) {
        const std::string t = detail::fmt_real(rep.t_grid[i]);
        const std::string st = rep.status[i];
        const std::string thr = rep.has_theory ? st : "no_assumptions";
        os << t << ",emp_radius," << detail::fmt_real(rep.empirical_radius[i]) << "," << st << "\n";
        os << t << ",thr_radius," << detail::fmt_real(rep.theory_radius[i]) << "," << thr << "\n";
        os << t << ",emp_gap," << detail::fmt_real(rep.empirical_gap[i]) << "," << st << "\n";
        os << t << ",thr_gap," << detail::fmt_real(rep.theory_gap[i]) << "," << thr << "\n";
    }
}

/// Long-format CSV of the eigenvalue curves: t, r, min_eig.
inline void write_eigen_curves_csv(std::ostream& os, const LandscapeReport& rep)
{
    os << "t,r,min_eig\n";
    for (std::size_t i = 0; i < rep.t_grid.size(); ++i)
        for (const auto& p : rep.min_eigenvalue_curves[i])
            os << detail::fmt_real(rep.t_grid[i]) << "," << detail::fmt_real(p.r) << "," << detail::fmt_real(p.min_eig) << "\n";
}

} // namespace smoothopt

#endif
