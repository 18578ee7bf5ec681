#ifndef SMOOTHOPT_OBJECTIVES_HPP
#define SMOOTHOPT_OBJECTIVES_HPP

#include <smoothopt/core.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace smoothopt {

struct KnownOptimum {
    Vector point;
    double value = 0.0;
};

/// Pure cost function R^dim -> R plus metadata used by schedules and benchmarks.
struct Objective {
    using Fn = std::function<double(const VectorRef&)>;

    std::string name;
    int dim = 0;
    Fn fn;
    std::optional<KnownOptimum> optimum;
    std::optional<double> lipschitz_hint;
    // Search box [center - half_width, center + half_width]^dim used for random initialization.
    double domain_center = 0.0;
    double domain_half_width = 1.0;

    double operator()(const VectorRef& x) const { return fn(x); }
    double eval(const VectorRef& x) const { return fn(x); }
};

/// Costs of every column of `samples`, in column order.
inline std::vector<double> evaluate_batch(const Objective& f, const Matrix& samples)
{
    std::vector<double> out(static_cast<std::size_t>(samples.cols()));
    for (Eigen::Index i = 0; i < samples.cols(); ++i)
        out[static_cast<std::size_t>(i)] = f(samples.col(i));
    return out;
}

// ---------------------------------------------------------------------------
// Blackbox test functions

namespace detail {

    inline double ackley(const VectorRef& x)
    {
        constexpr double a = 20.0, b = 0.2, c = 2.0 * std::numbers::pi;
        const double n = static_cast<double>(x.size());
        double sq = 0.0, cs = 0.0;
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            sq += x[i] * x[i];
            cs += std::cos(c * x[i]);
        }
        return -a * std::exp(-b * std::sqrt(sq / n)) - std::exp(cs / n) + a + std::numbers::e;
    }

    inline double levy(const VectorRef& x)
    {
        const auto n = x.size();
        auto w = [&](Eigen::Index i) { return 1.0 + (x[i] - 1.0) / 4.0; };
        const double pi = std::numbers::pi;
        const double w0 = w(0);
        double s = std::pow(std::sin(pi * w0), 2);
        for (Eigen::Index i = 0; i + 1 < n; ++i) {
            const double wi = w(i);
            s += (wi - 1.0) * (wi - 1.0) * (1.0 + 10.0 * std::pow(std::sin(pi * wi + 1.0), 2));
        }
        const double wn = w(n - 1);
        s += (wn - 1.0) * (wn - 1.0) * (1.0 + std::pow(std::sin(2.0 * pi * wn), 2));
        return s;
    }

    inline double rastrigin(const VectorRef& x)
    {
        constexpr double A = 10.0;
        double s = A * static_cast<double>(x.size());
        for (Eigen::Index i = 0; i < x.size(); ++i)
            s += x[i] * x[i] - A * std::cos(2.0 * std::numbers::pi * x[i]);
        return s;
    }

    inline double sphere(const VectorRef& x) { return x.squaredNorm(); }

} // namespace detail

/// Standard Ackley (a=20, b=0.2, c=2pi), Levy, Rastrigin (A=10) or sphere.
inline Objective make_blackbox(const std::string& name, int dim)
{
    if (dim < 1)
        throw ContractViolation("make_blackbox: dim must be >= 1");
    Objective obj;
    obj.name = name + ":" + std::to_string(dim);
    obj.dim = dim;
    if (name == "ackley") {
        obj.fn = detail::ackley;
        obj.optimum = KnownOptimum{Vector::Zero(dim), 0.0};
        obj.domain_half_width = 32.768;
    }
    else if (name == "levy") {
        obj.fn = detail::levy;
        obj.optimum = KnownOptimum{Vector::Ones(dim), 0.0};
        obj.domain_half_width = 10.0;
    }
    else if (name == "rastrigin") {
        obj.fn = detail::rastrigin;
        obj.optimum = KnownOptimum{Vector::Zero(dim), 0.0};
        obj.domain_half_width = 5.12;
    }
    else if (name == "sphere") {
        obj.fn = detail::sphere;
        obj.optimum = KnownOptimum{Vector::Zero(dim), 0.0};
        obj.domain_half_width = 5.12;
        obj.lipschitz_hint = 2.0;
    }
    else {
        throw ConfigError("unknown blackbox function '" + name + "'");
    }
    return obj;
}

/// f(x) = value everywhere. Useful as a null landscape for estimator checks.
inline Objective make_constant(int dim, double value = 0.0)
{
    require(dim >= 1, "make_constant: dim must be >= 1");
    Objective obj;
    obj.name = "constant:" + std::to_string(dim);
    obj.dim = dim;
    obj.fn = [value](const VectorRef&) { return value; };
    obj.domain_half_width = 5.0;
    return obj;
}

// ---------------------------------------------------------------------------
// Gaussian mixture potential

/// Isotropic Gaussian mixture p0 together with the temperature that turns it into
/// the potential f = -lambda log p0.
struct GmmSpec {
    std::vector<double> weights;
    std::vector<Vector> means;
    std::vector<double> variances;
    double lambda = 1.0;

    int dim() const { return means.empty() ? 0 : static_cast<int>(means.front().size()); }

    void validate() const
    {
        require(!weights.empty(), "GmmSpec: at least one component required");
        require(weights.size() == means.size() && weights.size() == variances.size(), "GmmSpec: component arrays differ in length");
        double s = 0.0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            require(weights[i] > 0.0, "GmmSpec: weights must be positive");
            require(variances[i] > 0.0, "GmmSpec: variances must be positive");
            require(means[i].size() == means.front().size() && means[i].size() > 0, "GmmSpec: inconsistent mean dimensions");
            s += weights[i];
        }
        require(std::abs(s - 1.0) <= 1e-12, "GmmSpec: weights must sum to 1");
        require(lambda > 0.0, "GmmSpec: lambda must be positive");
    }

    static GmmSpec one_d(std::vector<double> w, const std::vector<double>& mu, std::vector<double> var, double lambda = 1.0)
    {
        GmmSpec s;
        s.weights = std::move(w);
        for (double m : mu)
            s.means.push_back(Vector::Constant(1, m));
        s.variances = std::move(var);
        s.lambda = lambda;
        return s;
    }

    /// w=(0.7,0.3), mu=(-1,2), sigma^2=(0.25,0.25), lambda=1.
    static GmmSpec canonical_1d() { return one_d({0.7, 0.3}, {-1.0, 2.0}, {0.25, 0.25}, 1.0); }
};

/// Per-component log densities log(w_i N(x; mu_i, s_i I)) with s_i = sigma_i^2 + t.
inline void gmm_component_logs(const GmmSpec& spec, const VectorRef& x, double t, std::vector<double>& out)
{
    const double d = static_cast<double>(x.size());
    out.resize(spec.weights.size());
    for (std::size_t i = 0; i < spec.weights.size(); ++i) {
        const double s = spec.variances[i] + t;
        out[i] = std::log(spec.weights[i]) - 0.5 * d * std::log(2.0 * std::numbers::pi * s) - (x - spec.means[i]).squaredNorm() / (2.0 * s);
    }
}

/// log p(x; t) of the mixture smoothed by N(0, tI); t = 0 gives log p0.
inline double gmm_log_density(const GmmSpec& spec, const VectorRef& x, double t = 0.0)
{
    const double d = static_cast<double>(x.size());
    double m = -std::numeric_limits<double>::infinity(), acc = 0.0;
    for (std::size_t i = 0; i < spec.weights.size(); ++i) {
        const double s = spec.variances[i] + t;
        const double l = std::log(spec.weights[i]) - 0.5 * d * std::log(2.0 * std::numbers::pi * s) - (x - spec.means[i]).squaredNorm() / (2.0 * s);
        if (l > m) {
            acc = acc * std::exp(m - l) + 1.0;
            m = l;
        }
        else {
            acc += std::exp(l - m);
        }
    }
    return m + std::log(acc);
}

namespace detail {

    // g(x) = -lambda log p0(x), derivatives in 1-d (used for mode finding).
    inline std::array<double, 3> gmm_potential_1d(const GmmSpec& spec, double x)
    {
        std::vector<double> logs;
        Vector xv = Vector::Constant(1, x);
        gmm_component_logs(spec, xv, 0.0, logs);
        const double lse = log_sum_exp(logs);
        double gbar = 0.0, h = 0.0, u2 = 0.0;
        for (std::size_t i = 0; i < logs.size(); ++i) {
            const double r = std::exp(logs[i] - lse);
            const double s = spec.variances[i];
            const double u = (x - spec.means[i][0]) / s;
            gbar += r * u;
            u2 += r * u * u;
            h += r / s;
        }
        return {-spec.lambda * lse, spec.lambda * gbar, spec.lambda * (h - u2 + gbar * gbar)};
    }

    inline double bisect_root(const std::function<double(double)>& fn, double lo, double hi, int iters = 200)
    {
        double flo = fn(lo);
        for (int k = 0; k < iters && hi - lo > 0.0; ++k) {
            const double mid = 0.5 * (lo + hi);
            if (mid == lo || mid == hi)
                break;
            const double fm = fn(mid);
            if ((fm < 0.0) == (flo < 0.0)) {
                lo = mid;
                flo = fm;
            }
            else {
                hi = mid;
            }
        }
        return 0.5 * (lo + hi);
    }

    inline Vector gmm_mode(const GmmSpec& spec)
    {
        const int d = spec.dim();
        double lo = std::numeric_limits<double>::infinity(), hi = -lo, smax = 0.0;
        for (std::size_t i = 0; i < spec.means.size(); ++i) {
            lo = std::min(lo, spec.means[i].minCoeff());
            hi = std::max(hi, spec.means[i].maxCoeff());
            smax = std::max(smax, std::sqrt(spec.variances[i]));
        }
        lo -= 5.0 * smax;
        hi += 5.0 * smax;
        if (d == 1) {
            constexpr int n = 100001;
            const double h = (hi - lo) / (n - 1);
            int best = 0;
            double fbest = std::numeric_limits<double>::infinity();
            for (int k = 0; k < n; ++k) {
                const double v = -gmm_log_density(spec, Vector::Constant(1, lo + k * h));
                if (v < fbest) {
                    fbest = v;
                    best = k;
                }
            }
            const double a = lo + std::max(best - 1, 0) * h, b = lo + std::min(best + 1, n - 1) * h;
            auto deriv = [&](double x) { return gmm_potential_1d(spec, x)[1]; };
            if (deriv(a) < 0.0 && deriv(b) > 0.0)
                return Vector::Constant(1, bisect_root(deriv, a, b));
            return Vector::Constant(1, lo + best * h);
        }
        // 2-d: grid then Newton on -log p0.
        constexpr int n = 401;
        const double h = (hi - lo) / (n - 1);
        Vector best(2);
        double fbest = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                Vector x(2);
                x << lo + i * h, lo + j * h;
                const double v = -gmm_log_density(spec, x);
                if (v < fbest) {
                    fbest = v;
                    best = x;
                }
            }
        Vector x = best;
        std::vector<double> logs;
        for (int it = 0; it < 100; ++it) {
            gmm_component_logs(spec, x, 0.0, logs);
            const double lse = log_sum_exp(logs);
            Vector gbar = Vector::Zero(2);
            Eigen::Matrix2d H = Eigen::Matrix2d::Zero();
            for (std::size_t i = 0; i < logs.size(); ++i) {
                const double r = std::exp(logs[i] - lse);
                const double s = spec.variances[i];
                const Vector u = (x - spec.means[i]) / s;
                gbar += r * u;
                H += r * (Eigen::Matrix2d::Identity() / s - u * u.transpose());
            }
            H += gbar * gbar.transpose();
            const Vector step = H.ldlt().solve(gbar);
            if (!step.allFinite())
                break;
            x -= step;
            if (step.norm() < 1e-15 * (1.0 + x.norm()))
                break;
        }
        return x;
    }

} // namespace detail

/// f(x) = -lambda log sum_i w_i N(x; mu_i, sigma_i^2 I). Mode finding for the
/// optimum metadata runs only in 1-d and 2-d; pass find_mode=false for d > 2.
inline Objective make_gmm_potential(const GmmSpec& spec, bool find_mode = true, std::string name = "gmm")
{
    spec.validate();
    if (spec.dim() > 2 && find_mode)
        throw ConfigError("make_gmm_potential: mode finding is only available for dim <= 2");
    Objective obj;
    obj.name = std::move(name);
    obj.dim = spec.dim();
    obj.fn = [spec](const VectorRef& x) { return -spec.lambda * gmm_log_density(spec, x); };
    if (find_mode) {
        Vector mode = detail::gmm_mode(spec);
        obj.optimum = KnownOptimum{mode, obj.fn(mode)};
    }
    double lo = std::numeric_limits<double>::infinity(), hi = -lo, vmin = lo;
    for (std::size_t i = 0; i < spec.means.size(); ++i) {
        lo = std::min(lo, spec.means[i].minCoeff());
        hi = std::max(hi, spec.means[i].maxCoeff());
        vmin = std::min(vmin, spec.variances[i]);
    }
    obj.domain_center = 0.5 * (lo + hi);
    obj.domain_half_width = 0.5 * (hi - lo) + 3.0;
    obj.lipschitz_hint = spec.lambda / vmin;
    return obj;
}

// ---------------------------------------------------------------------------
// Checkerboard: quadratic bowl plus egg-crate ripples

struct CheckerboardSpec {
    double base = 0.05;
    double amplitude = 1.0;
    double period = 1.0;
    int dim = 2;

    void validate() const
    {
        require(base > 0.0 && amplitude > 0.0 && period > 0.0 && dim >= 1, "CheckerboardSpec: parameters must be positive");
    }

    static CheckerboardSpec canonical_2d() { return {0.05, 1.0, 1.0, 2}; }

    /// One coordinate's contribution; the full function is the sum over coordinates.
    double term(double xi) const
    {
        return base * xi * xi + amplitude * 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * xi / period));
    }
};

inline Objective make_checkerboard(const CheckerboardSpec& spec, std::string name = "checker")
{
    spec.validate();
    Objective obj;
    obj.name = std::move(name);
    obj.dim = spec.dim;
    obj.fn = [spec](const VectorRef& x) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < x.size(); ++i)
            s += spec.term(x[i]);
        return s;
    };
    obj.optimum = KnownOptimum{Vector::Zero(spec.dim), 0.0};
    obj.domain_half_width = 5.0;
    const double w = 2.0 * std::numbers::pi / spec.period;
    obj.lipschitz_hint = 2.0 * spec.base + 0.5 * spec.amplitude * w * w;
    return obj;
}

// ---------------------------------------------------------------------------
// Pendulum swing-up over a torque sequence

struct PendulumParams {
    int horizon = 50;
    double dt = 0.1;
    double torque_limit = 2.0;
    double theta0 = std::numbers::pi;
    double angle_weight = 1.0;
    double velocity_weight = 0.1;
    double control_weight = 0.001;
};

/// Rolls out theta'' = sin(theta) + u with explicit Euler from the hanging state
/// and returns the accumulated quadratic cost.
inline double pendulum_rollout_cost(const PendulumParams& p, const VectorRef& u)
{
    double theta = p.theta0, omega = 0.0, cost = 0.0;
    for (int k = 0; k < p.horizon; ++k) {
        const double uk = std::clamp(u[k], -p.torque_limit, p.torque_limit);
        const double theta_next = theta + p.dt * omega;
        const double omega_next = omega + p.dt * (std::sin(theta) + uk);
        theta = theta_next;
        omega = omega_next;
        const double err = std::remainder(theta, 2.0 * std::numbers::pi);
        cost += (p.angle_weight * err * err + p.velocity_weight * omega * omega + p.control_weight * uk * uk) * p.dt;
    }
    return cost;
}

inline Objective make_pendulum_swingup(int horizon, double dt)
{
    require(horizon >= 1, "make_pendulum_swingup: horizon must be >= 1");
    require(dt > 0.0, "make_pendulum_swingup: dt must be positive");
    PendulumParams p;
    p.horizon = horizon;
    p.dt = dt;
    Objective obj;
    obj.name = "pendulum:" + std::to_string(horizon);
    obj.dim = horizon;
    obj.fn = [p](const VectorRef& u) { return pendulum_rollout_cost(p, u); };
    obj.domain_half_width = p.torque_limit;
    return obj;
}

// ---------------------------------------------------------------------------
// String ids used by experiment configs: "ackley:200", "gmm1d:canonical",
// "checker2d:canonical", "pendulum:50:0.1", "sphere:10", "constant:3".

namespace detail {

    inline std::vector<std::string> split(const std::string& s, char sep)
    {
        std::vector<std::string> parts;
        std::size_t start = 0;
        while (true) {
            const auto pos = s.find(sep, start);
            parts.push_back(s.substr(start, pos - start));
            if (pos == std::string::npos)
                break;
            start = pos + 1;
        }
        return parts;
    }

    inline long parse_int(const std::string& s, const std::string& id)
    {
        std::size_t used = 0;
        long v = 0;
        try {
            v = std::stol(s, &used);
        }
        catch (const std::exception&) {
            used = 0;
        }
        if (used != s.size() || s.empty())
            throw ConfigError("bad integer '" + s + "' in objective id '" + id + "'");
        return v;
    }

    inline double parse_real(const std::string& s, const std::string& id)
    {
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(s, &used);
        }
        catch (const std::exception&) {
            used = 0;
        }
        if (used != s.size() || s.empty())
            throw ConfigError("bad number '" + s + "' in objective id '" + id + "'");
        return v;
    }

} // namespace detail

inline Objective make_objective(const std::string& id)
{
    const auto parts = detail::split(id, ':');
    const std::string& kind = parts[0];
    Objective obj;
    if (kind == "ackley" || kind == "levy" || kind == "rastrigin" || kind == "sphere") {
        if (parts.size() != 2)
            throw ConfigError("objective id '" + id + "' must be <name>:<dim>");
        const long d = detail::parse_int(parts[1], id);
        if (d < 1)
            throw ConfigError("objective id '" + id + "' needs dim >= 1");
        obj = make_blackbox(kind, static_cast<int>(d));
    }
    else if (kind == "constant") {
        if (parts.size() < 2 || parts.size() > 3)
            throw ConfigError("objective id '" + id + "' must be constant:<dim>[:<value>]");
        const long d = detail::parse_int(parts[1], id);
        if (d < 1)
            throw ConfigError("objective id '" + id + "' needs dim >= 1");
        obj = make_constant(static_cast<int>(d), parts.size() == 3 ? detail::parse_real(parts[2], id) : 0.0);
    }
    else if (kind == "gmm1d" && parts.size() == 2 && parts[1] == "canonical") {
        obj = make_gmm_potential(GmmSpec::canonical_1d());
    }
    else if (kind == "checker2d" && parts.size() == 2 && parts[1] == "canonical") {
        obj = make_checkerboard(CheckerboardSpec::canonical_2d());
    }
    else if (kind == "pendulum") {
        if (parts.size() != 3)
            throw ConfigError("objective id '" + id + "' must be pendulum:<horizon>:<dt>");
        const long h = detail::parse_int(parts[1], id);
        const double dt = detail::parse_real(parts[2], id);
        if (h < 1 || !(dt > 0.0))
            throw ConfigError("objective id '" + id + "' needs horizon >= 1 and dt > 0");
        obj = make_pendulum_swingup(static_cast<int>(h), dt);
    }
    else {
        throw ConfigError("unknown objective id '" + id + "'");
    }
    obj.name = id;
    return obj;
}

} // namespace smoothopt

#endif
