#include <smoothopt/landscape.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace smoothopt;

namespace {

Vector scalar(double v) { return Vector::Constant(1, v); }

// Independent 1-d mixture oracle: g(x;t) = -lambda log sum_i w_i N(x; mu_i, s_i + t)
// differentiated by hand.
struct Mix1d {
    std::vector<double> w, mu, s;
    double lambda = 1.0;

    std::array<double, 3> g(double x, double t) const
    {
        double p = 0, p1 = 0, p2 = 0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double v = s[i] + t, d = x - mu[i];
            const double pi = w[i] * std::exp(-d * d / (2 * v)) / std::sqrt(2 * std::numbers::pi * v);
            p += pi;
            p1 += pi * (-d / v);
            p2 += pi * (d * d / (v * v) - 1 / v);
        }
        return {-lambda * std::log(p), -lambda * p1 / p, -lambda * (p2 / p - (p1 / p) * (p1 / p))};
    }

    double curvature(double x, double t) const { return g(x, t)[2]; }

    // Dense grid then bisection on the analytic derivative.
    double argmin(double t) const
    {
        const double lo = -6, hi = 8;
        const int n = 140000;
        double best = lo, bv = INFINITY;
        for (int i = 0; i <= n; ++i) {
            const double x = lo + (hi - lo) * i / n;
            const double v = g(x, t)[0];
            if (v < bv) {
                bv = v;
                best = x;
            }
        }
        double a = best - 1e-4, b = best + 1e-4;
        for (int k = 0; k < 100; ++k) {
            const double m = 0.5 * (a + b);
            (g(m, t)[1] < 0 ? a : b) = m;
        }
        return 0.5 * (a + b);
    }

    // Largest r on the step grid with nonnegative curvature at every x* +- s, s <= r.
    double radius(double xs, double t, double step = 1e-3, double rmax = 6.0) const
    {
        const int n = static_cast<int>(std::llround(rmax / step));
        double r = 0;
        for (int i = 0; i <= n; ++i) {
            const double s = i * step;
            if (curvature(xs + s, t) < 0 || curvature(xs - s, t) < 0)
                break;
            r = s;
        }
        return r;
    }
};

Mix1d canonical_mix() { return {{0.7, 0.3}, {-1.0, 2.0}, {0.25, 0.25}, 1.0}; }

const std::vector<double> kTGrid{1e-4, 1e-3, 0.01, 0.05, 0.1, 0.2, 0.3, 0.5, 0.75, 1.0, 1.5, 2.0};

LandscapeAssumptions unit_assumptions()
{
    LandscapeAssumptions a;
    a.alpha = 1;
    a.beta = 1;
    a.d_tau = 1;
    a.tau = 1;
    a.c_e = 0.1;
    a.c_alpha = 0.5;
    a.lambda = 1;
    return a;
}

// Brute-force 2-d Simpson quadrature of the tempered posterior for the smoothed
// Hessian: lambda/t I - lambda/t^2 Cov.
Matrix checker_hessian_2d(const CheckerboardSpec& c, double lambda, const Vector& x, double t, int n = 240)
{
    const double sd = std::sqrt(t), half = 8 * sd, h = 2 * half / n;
    auto f1 = [&](double y) { return c.base * y * y + c.amplitude * 0.5 * (1 - std::cos(2 * std::numbers::pi * y / c.period)); };
    double z = 0, m0 = 0, m1 = 0, s00 = 0, s01 = 0, s11 = 0;
    for (int i = 0; i <= n; ++i) {
        const double wi = (i == 0 || i == n) ? 1 : (i % 2 ? 4 : 2);
        const double y0 = x[0] - half + i * h;
        for (int j = 0; j <= n; ++j) {
            const double wj = (j == 0 || j == n) ? 1 : (j % 2 ? 4 : 2);
            const double y1 = x[1] - half + j * h;
            const double d0 = y0 - x[0], d1 = y1 - x[1];
            const double k = wi * wj * std::exp(-(f1(y0) + f1(y1)) / lambda - (d0 * d0 + d1 * d1) / (2 * t));
            z += k;
            m0 += k * d0;
            m1 += k * d1;
            s00 += k * d0 * d0;
            s01 += k * d0 * d1;
            s11 += k * d1 * d1;
        }
    }
    m0 /= z;
    m1 /= z;
    Matrix cov(2, 2);
    cov << s00 / z - m0 * m0, s01 / z - m0 * m1, s01 / z - m0 * m1, s11 / z - m1 * m1;
    return lambda / t * Matrix::Identity(2, 2) - lambda / (t * t) * cov;
}

} // namespace

TEST(TheoryRadius, ArithmeticExamples)
{
    auto a = unit_assumptions();
    EXPECT_NEAR(theory_radius(a, 3.0), 0.2, 1e-12);
    a.beta = 0.25; // lambda / beta = 4
    a.alpha = 0.25;
    EXPECT_NEAR(theory_radius(a, 3.0), 0.1 * std::sqrt(1.75), 1e-12);
    EXPECT_NEAR(theory_radius(a, 1e-12), 0.1, 1e-9);
    const auto cb = theory_convexity(unit_assumptions(), 1.0);
    EXPECT_NEAR(cb.modulus, 0.25, 1e-15);
}

TEST(TheoryRadius, NondecreasingInT)
{
    auto a = unit_assumptions();
    a.alpha = 0.3;
    a.beta = 2.0;
    a.tau = 0.7;
    double prev = 0;
    for (int i = 0; i < 100; ++i) {
        const double t = std::pow(10.0, -4 + 8.0 * i / 99);
        const double r = theory_radius(a, t);
        EXPECT_GE(r, prev);
        prev = r;
    }
}

TEST(TheoryGap, ArithmeticAndLimits)
{
    auto a = unit_assumptions();
    a.tau = 0;
    EXPECT_NEAR(theory_gap(a, 1.0), 0.25, 1e-12);
    EXPECT_LT(theory_gap(unit_assumptions(), 1e-10), 1e-9);

    auto b = unit_assumptions();
    b.alpha = 0.5;
    b.beta = 2.0; // kappa0 = 4
    const double limit = 3.0 / (2 * 0.5) * std::sqrt(b.lambda / (2 * std::numbers::pi * b.alpha));
    const double big = theory_gap(b, 1e6);
    EXPECT_TRUE(std::isfinite(big));
    // The first term tends to (D + tau)/(C_a), the asymmetry term to its limit.
    EXPECT_NEAR(big, (b.d_tau + b.tau) / b.c_alpha + limit, 1e-3);
}

TEST(TheoryRadius, InvalidAssumptions)
{
    auto a = unit_assumptions();
    a.beta = 0.5;
    EXPECT_THROW(theory_radius(a, 1.0), ContractViolation);
    a = unit_assumptions();
    a.c_alpha = 1.0;
    EXPECT_THROW(theory_gap(a, 1.0), ContractViolation);
    EXPECT_THROW(theory_radius(unit_assumptions(), 0.0), ContractViolation);
}

TEST(ScanRadius, SingleGaussianSaturates)
{
    const double var = 0.5, lambda = 2.0;
    auto ev = gmm_oracle(GmmSpec::one_d({1.0}, {0.3}, {var}, lambda));
    const auto grid = default_radius_grid(6.0, 0.01);
    for (double t : {0.01, 0.5, 2.0}) {
        const double thr = lambda / (var + t);
        EXPECT_DOUBLE_EQ(scan_convex_radius(ev, scalar(0.3), t, grid, 2, thr * (1 - 1e-9)).radius, 6.0);
        EXPECT_DOUBLE_EQ(scan_convex_radius(ev, scalar(0.3), t, grid, 2, 0.0).radius, 6.0);
        EXPECT_DOUBLE_EQ(scan_convex_radius(ev, scalar(0.3), t, grid, 2, thr * 1.01).radius, 0.0);
    }
}

TEST(ScanRadius, CanonicalGmmMatchesDenseOracle)
{
    const Mix1d mix = canonical_mix();
    const double xs = mix.argmin(0.0);
    auto ev = gmm_oracle(GmmSpec::canonical_1d());
    const auto grid = default_radius_grid();
    // Frozen from the hand-differentiated oracle on the same grid.
    const std::vector<std::pair<double, double>> pinned{{0.01, 1.271}, {0.1, 1.229}, {0.5, 1.138}, {1.0, 1.182}, {2.0, 6.0}};
    for (auto [t, expected] : pinned) {
        const double oracle = mix.radius(xs, t);
        const double got = scan_convex_radius(ev, scalar(xs), t, grid, 2).radius;
        EXPECT_NEAR(got, oracle, 1.001e-3) << "t=" << t;
        EXPECT_NEAR(got, expected, 1.5e-3) << "t=" << t;
    }
}

TEST(ScanRadius, TranslationInvariant)
{
    auto spec = GmmSpec::canonical_1d();
    auto moved = spec;
    for (auto& m : moved.means)
        m.array() += 3.7;
    const double xs = make_gmm_potential(spec).optimum->point[0];
    const auto grid = default_radius_grid();
    for (double t : {0.05, 0.5, 1.5}) {
        const double a = scan_convex_radius(gmm_oracle(spec), scalar(xs), t, grid, 2).radius;
        const double b = scan_convex_radius(gmm_oracle(moved), scalar(xs + 3.7), t, grid, 2).radius;
        EXPECT_NEAR(a, b, 1.001e-3);
    }
}

TEST(ScanRadius, GridValidation)
{
    auto ev = gmm_oracle(GmmSpec::canonical_1d());
    EXPECT_THROW(scan_convex_radius(ev, scalar(-1), 0.1, {0.0, 0.2, 0.1}, 2), ContractViolation);
    EXPECT_THROW(scan_convex_radius(ev, scalar(-1), 0.1, {}, 2), ContractViolation);
    EXPECT_THROW(scan_convex_radius(ev, scalar(-1), 0.1, {0.0, 0.1}, 0), ContractViolation);
}

TEST(ScanRadius, DirectionSets)
{
    EXPECT_EQ(scan_directions(1, 2).size(), 2u);
    EXPECT_EQ(scan_directions(1, 1).size(), 1u);
    const auto d = scan_directions(2, 16);
    ASSERT_EQ(d.size(), 16u);
    for (const auto& u : d)
        EXPECT_NEAR(u.norm(), 1.0, 1e-15);
    EXPECT_NEAR(d[4][0], 0.0, 1e-15);
    EXPECT_NEAR(d[4][1], 1.0, 1e-15);
}

TEST(ScanRadius, CheckerboardOracleAgreesWithBruteQuadrature)
{
    const auto spec = CheckerboardSpec::canonical_2d();
    auto ev = checkerboard_oracle(spec);
    for (double t : {0.1, 1.0}) {
        for (const auto& u : scan_directions(2, 8)) {
            for (double r : {0.0, 0.3, 1.1, 2.5}) {
                const Vector x = r * u;
                const Matrix ref = checker_hessian_2d(spec, 1.0, x, t);
                const Matrix got = ev.eval(x, t).hessian;
                EXPECT_NEAR((got - ref).cwiseAbs().maxCoeff(), 0.0, 1e-6) << "t=" << t << " r=" << r;
            }
        }
    }
}

TEST(ScanRadius, CheckerboardMonteCarloMatchesQuadrature)
{
    const auto spec = CheckerboardSpec::canonical_2d();
    const double t = 1.0;
    std::vector<double> grid;
    for (int i = 0; i <= 12; ++i)
        grid.push_back(0.25 * i);
    // Oracle radius from the brute quadrature at the same 8 directions.
    double oracle = 0;
    for (double r : grid) {
        bool ok = true;
        for (const auto& u : scan_directions(2, 8)) {
            Eigen::SelfAdjointEigenSolver<Matrix> es(checker_hessian_2d(spec, 1.0, r * u, t, 120));
            ok = ok && es.eigenvalues()[0] >= 0;
        }
        if (!ok)
            break;
        oracle = r;
    }
    MonteCarloEvaluator mc{make_checkerboard(spec), 1.0, 20000, 4, 64, RngStream{17, 3}};
    const ScanResult s = scan_convex_radius(mc, Vector::Zero(2), t, grid, 8);
    EXPECT_FALSE(s.inconclusive);
    EXPECT_LE(std::abs(s.radius - oracle), 0.25 + 1e-12);
}

TEST(ScanRadius, MonteCarloInconclusiveStops)
{
    // Exactly flat smoothed curvature at threshold = true value can never be resolved.
    auto f = make_gmm_potential(GmmSpec::one_d({1.0}, {0.0}, {1.0}, 1.0));
    MonteCarloEvaluator mc{f, 1.0, 200, 2, 4, RngStream{3, 0}};
    const ScanResult s = scan_convex_radius(mc, scalar(0.0), 1.0, {0.0, 0.5, 1.0}, 2, 0.5);
    EXPECT_TRUE(s.inconclusive);
    EXPECT_LT(s.curve.size(), 4u);
}

TEST(Minimizer, SymmetricMixtureGapZero)
{
    // Variance above 1 keeps the mixture unimodal at every t, so the midpoint is x*.
    auto spec = GmmSpec::one_d({0.5, 0.5}, {-1.0, 1.0}, {1.2, 1.2}, 1.0);
    auto ev = gmm_oracle(spec);
    for (double t : {1e-3, 0.5, 1.0, 3.0}) {
        const auto m = find_smoothed_minimizer(ev, t, scalar(0.0), scalar(0.0));
        EXPECT_TRUE(m.converged) << m.message;
        EXPECT_LT(m.gap, 1e-9) << "t=" << t;
    }
}

TEST(Minimizer, CanonicalGapCurveMatchesOracle)
{
    const Mix1d mix = canonical_mix();
    const double xs = mix.argmin(0.0);
    auto ev = gmm_oracle(GmmSpec::canonical_1d());
    double prev = -1;
    for (double t : kTGrid) {
        const auto m = find_smoothed_minimizer(ev, t, scalar(xs), scalar(xs));
        ASSERT_TRUE(m.converged) << m.message;
        EXPECT_NEAR(m.x[0], mix.argmin(t), 1e-9) << "t=" << t;
        EXPECT_LT(std::abs(mix.g(m.x[0], t)[1]), 1e-8);
        EXPECT_GE(m.gap, prev - 1e-12);
        prev = m.gap;
    }
    EXPECT_LT(find_smoothed_minimizer(ev, 1e-4, scalar(xs), scalar(xs)).gap, 1e-3);
    // Frozen values of the oracle gap at t = 0.5, 1, 2.
    EXPECT_NEAR(std::abs(mix.argmin(0.5) - xs), 3.2e-3, 1e-4);
    EXPECT_NEAR(std::abs(mix.argmin(1.0) - xs), 0.038, 1e-3);
    EXPECT_NEAR(std::abs(mix.argmin(2.0) - xs), 0.215, 1e-3);
}

TEST(Minimizer, NewtonIn2d)
{
    auto spec = CheckerboardSpec::canonical_2d();
    auto ev = checkerboard_oracle(spec);
    Vector x0(2);
    x0 << 0.8, -1.3;
    const auto m = find_smoothed_minimizer(ev, 1.0, x0, Vector::Zero(2));
    EXPECT_TRUE(m.converged) << m.message;
    EXPECT_LT(m.gap, 1e-8);

    // Two-dimensional mixture: the minimizer is a stationary point of the oracle.
    GmmSpec g;
    g.weights = {0.6, 0.4};
    g.means = {Vector::Zero(2), Vector::Constant(2, 2.0)};
    g.variances = {0.5, 0.5};
    auto gev = gmm_oracle(g);
    const auto gm = find_smoothed_minimizer(gev, 0.4, Vector::Constant(2, 0.2), Vector::Zero(2));
    EXPECT_TRUE(gm.converged);
    EXPECT_LT(gev.eval(gm.x, 0.4).gradient.norm(), 1e-8);
}

TEST(Minimizer, NewtonBudgetReportsFailure)
{
    // A 5-iteration budget on a badly scaled 2-d problem.
    GmmSpec g;
    g.weights = {1.0};
    g.means = {Vector::Constant(2, 3.0)};
    g.variances = {1.0};
    auto gev = gmm_oracle(g);
    gev.eval = [inner = gev.eval](const VectorRef& x, double t) {
        auto e = inner(x, t);
        e.hessian *= 1e6; // tiny steps
        return e;
    };
    const auto m = find_smoothed_minimizer(gev, 0.5, Vector::Zero(2), Vector::Constant(2, 3.0), 20001, 5);
    EXPECT_FALSE(m.converged);
    EXPECT_FALSE(m.message.empty());
    EXPECT_EQ(m.iterations, 5);
}

TEST(Minimizer, MonteCarloSingleGaussian)
{
    auto f = make_gmm_potential(GmmSpec::one_d({1.0}, {1.5}, {0.5}, 1.0));
    MonteCarloEvaluator mc{f, 1.0, 4000, 1, 1, RngStream{9, 0}};
    const auto m = find_smoothed_minimizer(mc, 0.5, scalar(-1.0), scalar(1.5), 300);
    EXPECT_LT(m.gap, 0.02);
}

TEST(Fit, CanonicalMixture)
{
    const Mix1d mix = canonical_mix();
    const double xs = mix.argmin(0.0);
    const auto fit = fit_assumptions(GmmSpec::canonical_1d(), xs);
    const auto& a = fit.assumptions;
    // Convex radius of f itself from the oracle at t = 0.
    EXPECT_NEAR(fit.convex_radius_f, mix.radius(xs, 0.0, 1e-3, 10.0), 2e-3);
    EXPECT_NEAR(a.d_tau, 0.5 * fit.convex_radius_f, 1e-12);
    EXPECT_LE(a.alpha, mix.curvature(xs, 0.0));
    EXPECT_GE(a.beta, mix.curvature(xs, 0.0));
    EXPECT_GT(a.alpha, 0);
    EXPECT_GT(a.tau, 0);
    EXPECT_GT(a.p_out, 0);
    EXPECT_LT(a.p_out, 1);
    // log d vanishes at d = 1.
    EXPECT_EQ(a.c_e, 0.0);
    EXPECT_NO_THROW(a.validate());

    GmmSpec two;
    two.weights = {1.0};
    two.means = {Vector::Zero(2)};
    two.variances = {1.0};
    EXPECT_THROW(fit_assumptions(two, 0.0), ConfigError);
}

TEST(Report, SingleGaussian)
{
    auto spec = GmmSpec::one_d({1.0}, {0.0}, {1.0}, 1.0);
    LandscapeOptions opt;
    opt.radius_grid = default_radius_grid(6.0, 0.05);
    const auto rep = build_landscape_report(gmm_oracle(spec), scalar(0.0), {0.1, 1.0, 5.0}, std::nullopt, opt);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(rep.status[i], "ok");
        EXPECT_NEAR(rep.empirical_gap[i], 0.0, 1e-9);
        EXPECT_DOUBLE_EQ(rep.empirical_radius[i], 6.0);
        EXPECT_TRUE(std::isnan(rep.theory_radius[i]));
    }
}

TEST(Report, CanonicalGmmWithFittedAssumptions)
{
    const auto spec = GmmSpec::canonical_1d();
    const double xs = make_gmm_potential(spec).optimum->point[0];
    const auto fit = fit_assumptions(spec, xs);
    LandscapeOptions opt;
    opt.jobs = 2;
    const auto rep = build_landscape_report(gmm_oracle(spec), scalar(xs), kTGrid, fit.assumptions, opt);
    ASSERT_EQ(rep.t_grid.size(), kTGrid.size());
    const Mix1d mix = canonical_mix();
    for (std::size_t i = 0; i < kTGrid.size(); ++i) {
        EXPECT_EQ(rep.status[i], "ok");
        EXPECT_LE(rep.theory_radius[i], rep.empirical_radius[i]);
        EXPECT_NEAR(rep.empirical_radius[i], mix.radius(mix.argmin(0.0), kTGrid[i]), 1.001e-3);
        EXPECT_LT(std::abs(mix.g(rep.minimizers[i][0], kTGrid[i])[1]), 1e-8);
        if (i > 0) {
            EXPECT_GE(rep.empirical_gap[i], rep.empirical_gap[i - 1] - 1e-12);
        }
    }
    EXPECT_EQ(rep.soundness_violations, 0);
}

TEST(Report, PerTFailureDoesNotAbort)
{
    auto ev = gmm_oracle(GmmSpec::canonical_1d());
    auto inner = ev.eval;
    ev.eval = [inner](const VectorRef& x, double t) {
        if (t > 0.9 && t < 1.1)
            throw EstimationError("boom");
        return inner(x, t);
    };
    LandscapeOptions opt;
    opt.radius_grid = default_radius_grid(2.0, 0.01);
    const auto rep = build_landscape_report(ev, scalar(-1.0), {0.5, 1.0, 1.5}, std::nullopt, opt);
    EXPECT_EQ(rep.status[0], "ok");
    EXPECT_NE(rep.status[1].find("boom"), std::string::npos);
    EXPECT_EQ(rep.status[2], "ok");
    EXPECT_THROW(build_landscape_report(ev, scalar(-1.0), {1.0, 0.5}, std::nullopt), ContractViolation);
}

TEST(Report, CsvShape)
{
    const auto spec = GmmSpec::canonical_1d();
    const double xs = make_gmm_potential(spec).optimum->point[0];
    LandscapeOptions opt;
    opt.radius_grid = default_radius_grid(6.0, 0.01);
    const auto rep = build_landscape_report(gmm_oracle(spec), scalar(xs), kTGrid, fit_assumptions(spec, xs).assumptions, opt);
    std::ostringstream os, eig;
    write_landscape_csv(os, rep);
    write_eigen_curves_csv(eig, rep);
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "t,quantity,value,status");
    int rows = 0;
    while (std::getline(in, line))
        ++rows;
    EXPECT_EQ(rows, 48);
    std::istringstream ein(eig.str());
    std::getline(ein, line);
    EXPECT_EQ(line, "t,r,min_eig");
    int erows = 0;
    while (std::getline(ein, line))
        ++erows;
    EXPECT_EQ(erows, 12 * 601);
}
