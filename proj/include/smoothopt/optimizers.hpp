#ifndef SMOOTHOPT_OPTIMIZERS_HPP
#define SMOOTHOPT_OPTIMIZERS_HPP

#include <smoothopt/core.hpp>
#include <smoothopt/objectives.hpp>
#include <smoothopt/smoothing.hpp>

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace smoothopt {

enum class ScheduleKind { fixed, geometric, geometric_floor, adaptive_variance };

inline const char* to_string(ScheduleKind k)
{
    switch (k) {
    case ScheduleKind::fixed: return "fixed";
    case ScheduleKind::geometric: return "geometric";
    case ScheduleKind::geometric_floor: return "geometric_floor";
    case ScheduleKind::adaptive_variance: return "adaptive_variance";
    }
    return "?";
}

/// Value of a parameter at iteration m = 1, 2, ...
///   fixed            value
///   geometric        t0 * gamma^m
///   geometric_floor  max(t0 * gamma^m, t_floor)
///   adaptive_variance  decided per batch by the caller (sqrt of cost variance)
struct Schedule {
    ScheduleKind kind = ScheduleKind::fixed;
    double t0 = 1.0;
    double gamma = 1.0;
    double t_floor = 0.0;
    double value = 1.0;

    static Schedule fixed(double v) { return {ScheduleKind::fixed, v, 1.0, 0.0, v}; }
    static Schedule geometric(double t0, double gamma) { return {ScheduleKind::geometric, t0, gamma, 0.0, t0}; }
    static Schedule geometric_floor(double t0, double gamma, double floor) { return {ScheduleKind::geometric_floor, t0, gamma, floor, t0}; }
    static Schedule adaptive() { return {ScheduleKind::adaptive_variance, 1.0, 1.0, 0.0, 1.0}; }

    void validate() const
    {
        switch (kind) {
        case ScheduleKind::fixed: require(value > 0.0 && std::isfinite(value), "Schedule: fixed value must be positive"); break;
        case ScheduleKind::geometric:
            // gamma = 1 is allowed so that schedules can degenerate to constants.
            require(t0 > 0.0 && gamma > 0.0 && gamma <= 1.0, "Schedule: geometric needs t0 > 0 and gamma in (0,1]");
            break;
        case ScheduleKind::geometric_floor:
            require(t0 > 0.0 && gamma > 0.0 && gamma <= 1.0, "Schedule: geometric_floor needs t0 > 0 and gamma in (0,1]");
            require(t_floor > 0.0 && t_floor < t0, "Schedule: geometric_floor needs 0 < t_floor < t0");
            break;
        case ScheduleKind::adaptive_variance: break;
        }
    }

    double at(int m) const
    {
        switch (kind) {
        case ScheduleKind::fixed: return value;
        case ScheduleKind::geometric: return t0 * std::pow(gamma, m);
        case ScheduleKind::geometric_floor: return std::max(t0 * std::pow(gamma, m), t_floor);
        case ScheduleKind::adaptive_variance: break;
        }
        throw ContractViolation("Schedule::at: adaptive schedules have no closed form");
    }

    /// Same schedule with its base (t0 or value) replaced.
    Schedule rebased(double base) const
    {
        Schedule s = *this;
        s.t0 = base;
        s.value = base;
        if (s.kind == ScheduleKind::geometric_floor)
            s.t_floor = std::min(s.t_floor, 0.5 * base);
        return s;
    }
};

enum class UpdateRule { softmax, topk };

enum class StepKind { full_softmax, scaled, gradient };

/// full_softmax: x <- sum_i wbar_i y_i
/// scaled(c):    x <- x - c (t/lambda) grad = x + c (ybar - x); scaled(1) is full_softmax
/// gradient(c):  x <- x - c t grad (literal, unit-dependent form)
struct StepRule {
    StepKind kind = StepKind::full_softmax;
    double c = 1.0;

    static StepRule full_softmax() { return {StepKind::full_softmax, 1.0}; }
    static StepRule scaled(double c) { return {StepKind::scaled, c}; }
    static StepRule gradient(double c) { return {StepKind::gradient, c}; }
};

inline std::string to_string(const StepRule& s)
{
    switch (s.kind) {
    case StepKind::full_softmax: return "full_softmax";
    case StepKind::scaled: return "scaled";
    case StepKind::gradient: return "gradient";
    }
    return "?";
}

struct SboConfig {
    Schedule t_schedule = Schedule::fixed(1.0);
    Schedule lambda_schedule = Schedule::fixed(1.0);
    std::size_t n_samples = 1024;
    int iterations = 300;
    UpdateRule update_rule = UpdateRule::softmax;
    double elite_fraction = 0.1;
    StepRule step_rule = StepRule::full_softmax();
    // Replace the lambda schedule's base by the cost std of a probe batch of
    // n_samples draws at x0 with variance t_schedule.at(1).
    bool lambda_from_probe = false;
    // CEM only: keep the initial variance instead of refitting it to the elites.
    bool freeze_variance = false;
    double ess_flag_threshold = 5.0;
    bool record_wall_time = false;

    std::size_t elite_count() const
    {
        return static_cast<std::size_t>(std::ceil(elite_fraction * static_cast<double>(n_samples) - 1e-9));
    }

    void validate() const
    {
        t_schedule.validate();
        lambda_schedule.validate();
        require(t_schedule.kind != ScheduleKind::adaptive_variance, "SboConfig: t schedule cannot be adaptive_variance");
        require(n_samples >= 2, "SboConfig: n_samples must be >= 2");
        require(iterations >= 1, "SboConfig: iterations must be >= 1");
        require(elite_fraction > 0.0 && elite_fraction <= 1.0, "SboConfig: elite_fraction must be in (0,1]");
        require(elite_count() >= 1, "SboConfig: elite_fraction * N must be >= 1");
        require(step_rule.c > 0.0, "SboConfig: step constant must be positive");
    }
};

struct IterRecord {
    int iter = 0;
    double t = 0.0;
    double lambda = 0.0;
    double cost_at_iterate = 0.0;
    double best_cost_so_far = 0.0;
    double ess = 0.0;
    bool low_ess = false;
};

struct RunRecord {
    std::string algorithm;
    std::string objective;
    std::uint64_t seed = 0;
    std::vector<IterRecord> per_iter;
    Vector x0;
    Vector final_x;
    double initial_cost = 0.0;
    long long total_evals = 0;
    double wall_time_s = 0.0;

    double final_best() const { return per_iter.empty() ? initial_cost : per_iter.back().best_cost_so_far; }
};

struct StepDiagnostics {
    Vector gradient; // implied (lambda/t)(x - target)
    Vector target;   // softmax-weighted mean or elite mean
    double ess = 0.0;
    double lambda = 0.0;
    double batch_min = 0.0;
    std::vector<double> weights;
    Matrix samples;
};

/// sqrt of the n-1 sample variance of the finite costs, with the flat-batch fallback.
inline double adaptive_lambda(std::span<const double> costs)
{
    double n = 0, mean = 0;
    for (double c : costs)
        if (std::isfinite(c)) {
            n += 1;
            mean += c;
        }
    if (n < 1)
        throw EstimationError("every sampled cost is non-finite");
    mean /= n;
    double ss = 0;
    for (double c : costs)
        if (std::isfinite(c))
            ss += (c - mean) * (c - mean);
    const double var = n > 1 ? ss / (n - 1) : 0.0;
    return var > 0.0 ? std::sqrt(var) : 1e-12 * (1.0 + std::abs(mean));
}

/// Weighting of an evaluated batch under the given rule. lambda < 0 selects the
/// adaptive temperature. Returns the update target in diag.target.
inline StepDiagnostics weigh_and_target(const Matrix& y, const std::vector<double>& costs, const VectorRef& x, double t, double lambda,
                                        UpdateRule rule, std::size_t elite_count)
{
    StepDiagnostics diag;
    diag.lambda = lambda < 0.0 ? adaptive_lambda(costs) : lambda;
    diag.batch_min = std::numeric_limits<double>::infinity();
    for (double c : costs)
        if (std::isfinite(c))
            diag.batch_min = std::min(diag.batch_min, c);
    if (rule == UpdateRule::softmax) {
        WeightedBatch b = weigh_batch(Matrix(), costs, diag.lambda);
        diag.weights = std::move(b.weights);
        diag.ess = b.ess;
    }
    else {
        std::vector<double> safe = costs;
        for (double& c : safe)
            if (!std::isfinite(c))
                c = std::numeric_limits<double>::infinity();
        const auto idx = k_smallest(safe, elite_count);
        diag.weights.assign(costs.size(), 0.0);
        for (std::size_t i : idx)
            diag.weights[i] = 1.0 / static_cast<double>(elite_count);
        diag.ess = static_cast<double>(elite_count);
    }
    diag.target = weighted_mean(y, diag.weights);
    diag.gradient = (diag.lambda / t) * (x - diag.target);
    return diag;
}

inline Vector apply_step(const VectorRef& x, const StepDiagnostics& d, double t, const StepRule& rule)
{
    switch (rule.kind) {
    case StepKind::full_softmax: return d.target;
    case StepKind::scaled:
        if (rule.c == 1.0)
            return d.target;
        return x + rule.c * (d.target - x);
    case StepKind::gradient: return x - (rule.c * t) * d.gradient;
    }
    return d.target;
}

/// One iteration of the generic sampling-based optimizer: draw N candidates from
/// N(x, tI), weight them, and move to the update target. lambda < 0 means adaptive.
inline std::pair<Vector, StepDiagnostics> sbo_step(const VectorRef& x, const Objective& f, double t, double lambda, std::size_t n,
                                                   UpdateRule rule, const RngStream& rng, double elite_fraction = 1.0,
                                                   const StepRule& step = StepRule::full_softmax())
{
    require(t > 0.0, "sbo_step: t must be positive");
    require(lambda != 0.0, "sbo_step: lambda must be positive (or negative for adaptive)");
    Matrix y = sample_gaussian(x, t, n, rng);
    const auto costs = evaluate_batch(f, y);
    const auto k = static_cast<std::size_t>(std::ceil(elite_fraction * static_cast<double>(n) - 1e-9));
    StepDiagnostics d = weigh_and_target(y, costs, x, t, lambda, rule, std::max<std::size_t>(k, 1));
    Vector next = apply_step(x, d, t, step);
    d.samples = std::move(y);
    return {std::move(next), std::move(d)};
}

namespace detail {

    // Substream tags; iteration m uses tag m.
    inline constexpr std::uint64_t kInitTag = 0xA11CE000ULL;
    inline constexpr std::uint64_t kProbeTag = 0xA11CE001ULL;

    inline double elapsed_s(std::chrono::steady_clock::time_point start)
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }

    inline double probe_std(const Objective& f, const VectorRef& x0, double t, std::size_t n, const RngStream& rng)
    {
        Matrix y = sample_gaussian(x0, t, n, rng.substream(kProbeTag));
        const auto costs = evaluate_batch(f, y);
        return adaptive_lambda(costs);
    }

} // namespace detail

/// Uniform draw in the objective's search box, one per seed.
inline Vector uniform_initial_point(const Objective& f, std::uint64_t seed)
{
    const RngStream rng = RngStream{seed, 0}.substream(detail::kInitTag);
    Vector x(f.dim);
    for (int j = 0; j < f.dim; ++j)
        x[j] = f.domain_center + f.domain_half_width * (2.0 * rng.uniform(static_cast<std::uint64_t>(j)) - 1.0);
    return x;
}

/// Generic schedule-driven SBO loop behind DIDA, MBD, MPPI and SA.
inline RunRecord run_sbo(const std::string& algorithm, const Objective& f, const SboConfig& cfg, const VectorRef& x0, std::uint64_t seed)
{
    cfg.validate();
    require(x0.size() == f.dim && x0.allFinite(), "run: x0 must be finite with the objective's dimension");
    const auto start = std::chrono::steady_clock::now();
    const RngStream root{seed, 0};

    RunRecord rec;
    rec.algorithm = algorithm;
    rec.objective = f.name;
    rec.seed = seed;
    rec.x0 = x0;

    Schedule lam = cfg.lambda_schedule;
    const bool adaptive = lam.kind == ScheduleKind::adaptive_variance;
    if (cfg.lambda_from_probe && !adaptive) {
        lam = lam.rebased(detail::probe_std(f, x0, cfg.t_schedule.at(1), cfg.n_samples, root));
        rec.total_evals += static_cast<long long>(cfg.n_samples);
    }

    Vector x = x0;
    rec.initial_cost = f(x);
    rec.total_evals += 1;
    double best = rec.initial_cost;
    rec.per_iter.reserve(static_cast<std::size_t>(cfg.iterations));
    const std::size_t k = cfg.elite_count();
    for (int m = 1; m <= cfg.iterations; ++m) {
        const double t = cfg.t_schedule.at(m);
        const double lambda = adaptive ? -1.0 : lam.at(m);
        Matrix y = sample_gaussian(x, t, cfg.n_samples, root.substream(static_cast<std::uint64_t>(m)));
        const auto costs = evaluate_batch(f, y);
        const StepDiagnostics d = weigh_and_target(y, costs, x, t, lambda, cfg.update_rule, k);
        x = apply_step(x, d, t, cfg.step_rule);
        const double cost = f(x);
        rec.total_evals += static_cast<long long>(cfg.n_samples) + 1;
        best = std::min({best, d.batch_min, cost});
        rec.per_iter.push_back({m, t, d.lambda, cost, best, d.ess, d.ess < cfg.ess_flag_threshold});
    }
    rec.final_x = x;
    if (cfg.record_wall_time)
        rec.wall_time_s = detail::elapsed_s(start);
    return rec;
}

inline RunRecord run_dida(const Objective& f, const SboConfig& cfg, const VectorRef& x0, std::uint64_t seed)
{
    require(cfg.update_rule == UpdateRule::softmax, "run_dida: update rule must be softmax");
    return run_sbo("dida", f, cfg, x0, seed);
}

inline RunRecord run_mbd(const Objective& f, const SboConfig& cfg, const VectorRef& x0, std::uint64_t seed)
{
    return run_sbo("mbd", f, cfg, x0, seed);
}

inline RunRecord run_mppi(const Objective& f, const SboConfig& cfg, const VectorRef& x0, std::uint64_t seed)
{
    return run_sbo("mppi", f, cfg, x0, seed);
}

inline RunRecord run_sa(const Objective& f, const SboConfig& cfg, const VectorRef& x0, std::uint64_t seed)
{
    return run_sbo("sa", f, cfg, x0, seed);
}

/// Cross-entropy method over a diagonal Gaussian. The initial variance is
/// t_schedule.at(1); each iteration refits mean and variance to the elite set
/// (variance floored at 1e-12) unless freeze_variance is set.
inline RunRecord run_cem(const Objective& f, const SboConfig& cfg, const VectorRef& x0, std::uint64_t seed)
{
    cfg.validate();
    require(x0.size() == f.dim && x0.allFinite(), "run_cem: x0 must be finite with the objective's dimension");
    const auto start = std::chrono::steady_clock::now();
    const RngStream root{seed, 0};
    RunRecord rec;
    rec.algorithm = "cem";
    rec.objective = f.name;
    rec.seed = seed;
    rec.x0 = x0;

    Vector mean = x0;
    Vector var = Vector::Constant(f.dim, cfg.t_schedule.at(1));
    rec.initial_cost = f(mean);
    rec.total_evals = 1;
    double best = rec.initial_cost;
    const std::size_t k = cfg.elite_count();
    const double kd = static_cast<double>(k);
    for (int m = 1; m <= cfg.iterations; ++m) {
        const double t_rec = var.mean();
        Matrix y = sample_gaussian_diag(mean, var.cwiseSqrt(), cfg.n_samples, root.substream(static_cast<std::uint64_t>(m)));
        const auto costs = evaluate_batch(f, y);
        const StepDiagnostics d = weigh_and_target(y, costs, mean, t_rec, 1.0, UpdateRule::topk, k);
        if (!cfg.freeze_variance) {
            Vector v = Vector::Zero(f.dim);
            for (Eigen::Index i = 0; i < y.cols(); ++i)
                if (d.weights[static_cast<std::size_t>(i)] != 0.0)
                    v.array() += (y.col(i) - d.target).array().square();
            var = (v / kd).cwiseMax(1e-12);
        }
        mean = d.target;
        const double cost = f(mean);
        rec.total_evals += static_cast<long long>(cfg.n_samples) + 1;
        best = std::min({best, d.batch_min, cost});
        rec.per_iter.push_back({m, t_rec, 0.0, cost, best, d.ess, d.ess < cfg.ess_flag_threshold});
    }
    rec.final_x = mean;
    if (cfg.record_wall_time)
        rec.wall_time_s = detail::elapsed_s(start);
    return rec;
}

/// Strategy parameters of the rank-mu CMA-ES.
struct CmaesParams {
    int n = 0;
    std::size_t lambda_pop = 0;
    std::size_t mu = 0;
    std::vector<double> weights;
    double mu_eff = 0, c_sigma = 0, d_sigma = 0, c_mu = 0, chi_n = 0;

    CmaesParams(int dim, std::size_t pop)
    {
        require(pop >= 2, "CMA-ES: population must be >= 2");
        n = dim;
        lambda_pop = pop;
        mu = pop / 2;
        double s = 0, s2 = 0;
        for (std::size_t i = 0; i < mu; ++i) {
            weights.push_back(std::log(static_cast<double>(mu) + 0.5) - std::log(static_cast<double>(i) + 1.0));
            s += weights.back();
        }
        for (double& w : weights) {
            w /= s;
            s2 += w * w;
        }
        mu_eff = 1.0 / s2;
        const double nd = n;
        c_sigma = (mu_eff + 2.0) / (nd + mu_eff + 5.0);
        d_sigma = 1.0 + 2.0 * std::max(0.0, std::sqrt((mu_eff - 1.0) / (nd + 1.0)) - 1.0) + c_sigma;
        c_mu = std::min(1.0, 2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((nd + 2.0) * (nd + 2.0) + mu_eff));
        chi_n = std::sqrt(nd) * (1.0 - 1.0 / (4.0 * nd) + 1.0 / (21.0 * nd * nd));
    }
};

/// Recombination: sum_i w_i y_(i) over the mu best samples, in cost order.
inline Vector cmaes_recombine(const Matrix& y, std::span<const double> costs, std::span<const double> weights)
{
    std::vector<double> safe(costs.begin(), costs.end());
    for (double& c : safe)
        if (!std::isfinite(c))
            c = std::numeric_limits<double>::infinity();
    const auto idx = k_smallest(safe, weights.size());
    std::vector<double> w(costs.size(), 0.0);
    for (std::size_t r = 0; r < idx.size(); ++r)
        w[idx[r]] = weights[r];
    return weighted_mean(y, w);
}

/// (mu/mu_w, lambda)-CMA-ES with the rank-mu covariance update and cumulative
/// step-size adaptation. Population N = n_samples, sigma0 = half-width / 3.
inline RunRecord run_cmaes(const Objective& f, const SboConfig& cfg, const VectorRef& x0, std::uint64_t seed, double sigma0 = -1.0)
{
    cfg.validate();
    require(x0.size() == f.dim && x0.allFinite(), "run_cmaes: x0 must be finite with the objective's dimension");
    const auto start = std::chrono::steady_clock::now();
    const RngStream root{seed, 0};
    const CmaesParams p(f.dim, cfg.n_samples);
    const auto n = f.dim;

    RunRecord rec;
    rec.algorithm = "cmaes";
    rec.objective = f.name;
    rec.seed = seed;
    rec.x0 = x0;

    Vector mean = x0;
    double sigma = sigma0 > 0.0 ? sigma0 : f.domain_half_width / 3.0;
    Matrix C = Matrix::Identity(n, n);
    Matrix B = Matrix::Identity(n, n);
    Vector D = Vector::Ones(n);
    Vector ps = Vector::Zero(n);
    rec.initial_cost = f(mean);
    rec.total_evals = 1;
    double best = rec.initial_cost;
    Eigen::SelfAdjointEigenSolver<Matrix> eig;
    const auto pop = static_cast<Eigen::Index>(cfg.n_samples);

    for (int m = 1; m <= cfg.iterations; ++m) {
        Matrix z(n, pop);
        root.substream(static_cast<std::uint64_t>(m)).fill_normal(std::span<double>(z.data(), static_cast<std::size_t>(z.size())));
        const Matrix Y = B * (D.asDiagonal() * z); // ~ N(0, C)
        Matrix X = (sigma * Y).colwise() + mean;
        const auto costs = evaluate_batch(f, X);

        std::vector<double> safe = costs;
        for (double& c : safe)
            if (!std::isfinite(c))
                c = std::numeric_limits<double>::infinity();
        const auto idx = k_smallest(safe, p.mu);
        Vector ybar = Vector::Zero(n), zbar = Vector::Zero(n);
        Matrix Ysel(n, static_cast<Eigen::Index>(p.mu));
        for (std::size_t r = 0; r < p.mu; ++r) {
            const auto i = static_cast<Eigen::Index>(idx[r]);
            ybar.noalias() += p.weights[r] * Y.col(i);
            zbar.noalias() += p.weights[r] * z.col(i);
            Ysel.col(static_cast<Eigen::Index>(r)) = std::sqrt(p.weights[r]) * Y.col(i);
        }
        mean += sigma * ybar;
        // C^{-1/2} ybar = B z_w
        ps = (1.0 - p.c_sigma) * ps + std::sqrt(p.c_sigma * (2.0 - p.c_sigma) * p.mu_eff) * (B * zbar);
        sigma *= std::exp((p.c_sigma / p.d_sigma) * (ps.norm() / p.chi_n - 1.0));
        C *= (1.0 - p.c_mu);
        C.noalias() += p.c_mu * Ysel * Ysel.transpose();
        C = 0.5 * (C + C.transpose()).eval();

        eig.compute(C);
        Vector ev = eig.eigenvalues();
        if (eig.info() != Eigen::Success || !ev.allFinite())
            throw EstimationError("CMA-ES: covariance eigendecomposition failed");
        if (ev.minCoeff() < 1e-12) {
            ev = ev.cwiseMax(1e-12);
            C = eig.eigenvectors() * ev.asDiagonal() * eig.eigenvectors().transpose();
        }
        B = eig.eigenvectors();
        D = ev.cwiseSqrt();

        const double cost = f(mean);
        rec.total_evals += static_cast<long long>(cfg.n_samples) + 1;
        double bmin = std::numeric_limits<double>::infinity();
        for (double c : costs)
            if (std::isfinite(c))
                bmin = std::min(bmin, c);
        best = std::min({best, bmin, cost});
        rec.per_iter.push_back({m, sigma * sigma, 0.0, cost, best, p.mu_eff, p.mu_eff < cfg.ess_flag_threshold});
    }
    rec.final_x = mean;
    if (cfg.record_wall_time)
        rec.wall_time_s = detail::elapsed_s(start);
    return rec;
}

// ---------------------------------------------------------------------------
// Algorithm ids and harness defaults

inline const std::vector<std::string>& algorithm_ids()
{
    static const std::vector<std::string> ids{"dida", "cem", "cmaes", "mbd", "mppi", "sa"};
    return ids;
}

inline bool is_algorithm_id(const std::string& id)
{
    for (const auto& a : algorithm_ids())
        if (a == id)
            return true;
    return false;
}

/// Default configuration of each algorithm for an objective (N=1024, M=300,
/// t0 = half-width^2 annealed to 1e-4 t0 at 0.8 M for the annealing methods,
/// (half-width/3)^2 for the fixed-t ones).
inline SboConfig default_config(const std::string& algorithm, const Objective& f, std::size_t n_samples = 1024, int iterations = 300)
{
    SboConfig c;
    c.n_samples = n_samples;
    c.iterations = iterations;
    const double hw = f.domain_half_width;
    const double t0 = hw * hw;
    const double gamma = std::pow(1e-4, 1.0 / (0.8 * iterations));
    const double t_fixed = (hw / 3.0) * (hw / 3.0);
    if (algorithm == "dida") {
        c.t_schedule = Schedule::geometric_floor(t0, gamma, 1e-4 * t0);
        c.lambda_schedule = Schedule::adaptive();
        c.step_rule = StepRule::scaled(0.25);
    }
    else if (algorithm == "mbd") {
        c.t_schedule = Schedule::geometric(t0, gamma);
        c.lambda_schedule = Schedule::fixed(1.0);
        c.lambda_from_probe = true;
    }
    else if (algorithm == "mppi") {
        c.t_schedule = Schedule::fixed(t_fixed);
        c.lambda_schedule = Schedule::fixed(1.0);
        c.lambda_from_probe = true;
    }
    else if (algorithm == "sa") {
        c.t_schedule = Schedule::fixed(t_fixed);
        c.lambda_schedule = Schedule::geometric(1.0, 0.97);
        c.lambda_from_probe = true;
    }
    else if (algorithm == "cem") {
        c.t_schedule = Schedule::fixed(t_fixed);
        c.update_rule = UpdateRule::topk;
        c.elite_fraction = 0.1;
    }
    else if (algorithm == "cmaes") {
        c.t_schedule = Schedule::fixed(t_fixed);
    }
    else {
        throw ConfigError("unknown algorithm id '" + algorithm + "'");
    }
    return c;
}

inline RunRecord run_algorithm(const std::string& algorithm, const Objective& f, const SboConfig& cfg, const VectorRef& x0, std::uint64_t seed)
{
    if (algorithm == "dida")
        return run_dida(f, cfg, x0, seed);
    if (algorithm == "mbd")
        return run_mbd(f, cfg, x0, seed);
    if (algorithm == "mppi")
        return run_mppi(f, cfg, x0, seed);
    if (algorithm == "sa")
        return run_sa(f, cfg, x0, seed);
    if (algorithm == "cem")
        return run_cem(f, cfg, x0, seed);
    if (algorithm == "cmaes")
        return run_cmaes(f, cfg, x0, seed, std::sqrt(cfg.t_schedule.at(1)));
    throw ConfigError("unknown algorithm id '" + algorithm + "'");
}

} // namespace smoothopt

#endif
