#include <smoothopt/objectives.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace smoothopt;

namespace {

Vector vec(std::initializer_list<double> v)
{
    Vector x(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double a : v)
        x[i++] = a;
    return x;
}

// Independent two-component mixture potential used as the mode oracle.
double mix_potential(double x)
{
    auto n = [](double x, double mu, double v) { return std::exp(-(x - mu) * (x - mu) / (2 * v)) / std::sqrt(2 * std::numbers::pi * v); };
    return -std::log(0.7 * n(x, -1.0, 0.25) + 0.3 * n(x, 2.0, 0.25));
}

double oracle_rollout(double dt, int horizon, const std::vector<double>& u)
{
    double th = std::numbers::pi, om = 0.0, c = 0.0;
    for (int k = 0; k < horizon; ++k) {
        const double uk = std::max(-2.0, std::min(2.0, u[k]));
        const double th2 = th + dt * om;
        const double om2 = om + dt * (std::sin(th) + uk);
        th = th2;
        om = om2;
        double e = std::fmod(th + std::numbers::pi, 2 * std::numbers::pi);
        if (e < 0)
            e += 2 * std::numbers::pi;
        e -= std::numbers::pi;
        c += (e * e + 0.1 * om * om + 0.001 * uk * uk) * dt;
    }
    return c;
}

} // namespace

TEST(Blackbox, KnownValues)
{
    auto ack = make_blackbox("ackley", 200);
    EXPECT_NEAR(ack(Vector::Zero(200)), 0.0, 1e-12);
    auto ras = make_blackbox("rastrigin", 2);
    EXPECT_NEAR(ras(vec({0, 0})), 0.0, 1e-12);
    EXPECT_NEAR(ras(vec({1, 1})), 2.0, 1e-12);
    auto levy = make_blackbox("levy", 3);
    EXPECT_NEAR(levy(Vector::Ones(3)), 0.0, 1e-12);
    auto sph = make_blackbox("sphere", 4);
    EXPECT_EQ(sph(vec({1, 2, 0, -1})), 6.0);
}

TEST(Blackbox, Errors)
{
    EXPECT_THROW(make_blackbox("rosenbrock", 2), ConfigError);
    EXPECT_THROW(make_blackbox("ackley", 0), ContractViolation);
    EXPECT_THROW(make_objective("ackley:x"), ConfigError);
    EXPECT_THROW(make_objective("nope:3"), ConfigError);
    EXPECT_THROW(make_objective("gmm1d:other"), ConfigError);
}

TEST(Blackbox, Domains)
{
    EXPECT_DOUBLE_EQ(make_blackbox("ackley", 2).domain_half_width, 32.768);
    EXPECT_DOUBLE_EQ(make_blackbox("levy", 2).domain_half_width, 10.0);
    EXPECT_DOUBLE_EQ(make_blackbox("rastrigin", 2).domain_half_width, 5.12);
}

TEST(Objectives, OptimumMetadataAndLocalMinimality)
{
    std::vector<Objective> objs{make_objective("ackley:50"), make_objective("levy:50"), make_objective("rastrigin:50"),
                                make_objective("sphere:50"), make_objective("gmm1d:canonical"), make_objective("checker2d:canonical")};
    RngStream rng{5, 0};
    for (const auto& f : objs) {
        ASSERT_TRUE(f.optimum.has_value()) << f.name;
        const auto& opt = *f.optimum;
        EXPECT_NEAR(f(opt.point), opt.value, 1e-12) << f.name;
        for (int k = 0; k < 100; ++k) {
            const auto j = static_cast<Eigen::Index>(rng.uniform(k) * f.dim);
            for (double delta : {1e-3, -1e-3}) {
                Vector x = opt.point;
                x[j] += delta;
                EXPECT_GE(f(x), opt.value - 1e-9) << f.name;
            }
        }
    }
}

TEST(Objectives, Purity)
{
    auto f = make_objective("levy:20");
    Vector x = sample_gaussian(Vector::Zero(20), 4.0, 1, RngStream{1, 1}).col(0);
    const double v = f(x);
    for (int i = 0; i < 1000; ++i)
        ASSERT_EQ(f(x), v);
}

TEST(Gmm, SingleComponent)
{
    auto spec = GmmSpec::one_d({1.0}, {0.0}, {1.0}, 1.0);
    auto f = make_gmm_potential(spec);
    const double c = 0.5 * std::log(2 * std::numbers::pi);
    EXPECT_NEAR(f(vec({0.0})), c, 1e-14);
    EXPECT_NEAR(f(vec({2.0})), c + 2.0, 1e-14);
    EXPECT_NEAR(f.optimum->point[0], 0.0, 1e-9);
}

TEST(Gmm, ModeMatchesGridBisectionOracle)
{
    // 1e6-point scan of [-4, 5] then bisection on a central-difference derivative.
    const int n = 1000000;
    double best = 0, bv = INFINITY;
    for (int i = 0; i <= n; ++i) {
        const double x = -4.0 + 9.0 * i / n;
        const double v = mix_potential(x);
        if (v < bv) {
            bv = v;
            best = x;
        }
    }
    auto deriv = [](double x) { return (mix_potential(x + 1e-6) - mix_potential(x - 1e-6)) / 2e-6; };
    double lo = best - 9.0 / n, hi = best + 9.0 / n;
    for (int k = 0; k < 60; ++k) {
        const double mid = 0.5 * (lo + hi);
        (deriv(mid) < 0 ? lo : hi) = mid;
    }
    const double mode = 0.5 * (lo + hi);
    auto f = make_objective("gmm1d:canonical");
    EXPECT_NEAR(f.optimum->point[0], mode, 1e-7);
    EXPECT_NEAR(f.optimum->value, mix_potential(mode), 1e-10);
}

TEST(Gmm, DensityIntegratesToOne)
{
    auto f = make_objective("gmm1d:canonical");
    const int n = 200000;
    const double lo = -10, hi = 12, h = (hi - lo) / n;
    double s = 0;
    for (int i = 0; i <= n; ++i) {
        const double w = (i == 0 || i == n) ? 0.5 : 1.0;
        s += w * std::exp(-f(vec({lo + i * h})));
    }
    EXPECT_NEAR(s * h, 1.0, 1e-3);
}

TEST(Gmm, HighDimNeedsOptOut)
{
    GmmSpec s;
    s.weights = {1.0};
    s.means = {Vector::Zero(3)};
    s.variances = {1.0};
    EXPECT_THROW(make_gmm_potential(s), ConfigError);
    auto f = make_gmm_potential(s, false);
    EXPECT_FALSE(f.optimum.has_value());
    EXPECT_NEAR(f(Vector::Zero(3)), 1.5 * std::log(2 * std::numbers::pi), 1e-13);
}

TEST(Gmm, TwoDimensionalMode)
{
    GmmSpec s;
    s.weights = {0.6, 0.4};
    s.means = {vec({0.0, 0.0}), vec({3.0, 1.0})};
    s.variances = {0.5, 0.5};
    auto f = make_gmm_potential(s);
    // Central-difference gradient vanishes at the reported mode.
    const Vector m = f.optimum->point;
    for (int j = 0; j < 2; ++j) {
        Vector a = m, b = m;
        a[j] += 1e-6;
        b[j] -= 1e-6;
        EXPECT_NEAR((f(a) - f(b)) / 2e-6, 0.0, 1e-6);
    }
    EXPECT_LT(m.norm(), 0.1);
}

TEST(Gmm, InvalidSpec)
{
    EXPECT_THROW(GmmSpec::one_d({0.5, 0.4}, {0, 1}, {1, 1}).validate(), ContractViolation);
    EXPECT_THROW(GmmSpec::one_d({0.5, 0.5}, {0, 1}, {1, 0}).validate(), ContractViolation);
}

TEST(Checkerboard, Values)
{
    CheckerboardSpec s{0.05, 1.0, 1.0, 1};
    auto f = make_checkerboard(s);
    EXPECT_EQ(f(vec({0.0})), 0.0);
    EXPECT_NEAR(f(vec({0.5})), 1.0125, 1e-14);
    auto g = make_objective("checker2d:canonical");
    EXPECT_EQ(g(vec({0.0, 0.0})), 0.0);
}

TEST(Checkerboard, LocalMinimaGrid)
{
    // Dense scan oracle: local minima of the 1-d instance on [-5, 5] sit just inside
    // each integer (the bowl pulls them toward 0), one per integer.
    CheckerboardSpec s{0.05, 1.0, 1.0, 1};
    auto f = make_checkerboard(s);
    const int n = 100000;
    std::vector<double> xs(n + 1), vs(n + 1);
    for (int i = 0; i <= n; ++i) {
        xs[i] = -5.0 + 10.0 * i / n;
        vs[i] = 0.05 * xs[i] * xs[i] + 0.5 * (1 - std::cos(2 * std::numbers::pi * xs[i]));
        EXPECT_NEAR(f(vec({xs[i]})), vs[i], 1e-13);
    }
    std::vector<double> minima;
    for (int i = 1; i < n; ++i)
        if (vs[i] < vs[i - 1] && vs[i] <= vs[i + 1])
            minima.push_back(xs[i]);
    ASSERT_EQ(minima.size(), 11u); // one per integer -5..5
    for (double m : minima) {
        const double k = std::round(m);
        // Stationarity of 0.05 x^2 + (1 - cos 2 pi x)/2 near k: x ~ k / (1 + 0.1 / (2 pi^2)).
        EXPECT_NEAR(m, k / (1 + 0.1 / (2 * std::numbers::pi * std::numbers::pi)), 2e-4);
    }
}

TEST(Pendulum, ZeroTorqueMatchesRollout)
{
    auto f = make_objective("pendulum:50:0.1");
    std::vector<double> u(50, 0.0);
    EXPECT_NEAR(f(Vector::Zero(50)), oracle_rollout(0.1, 50, u), 1e-12);
}

TEST(Pendulum, OneStepClosedForm)
{
    const double dt = 0.1;
    auto f = make_pendulum_swingup(1, dt);
    // One step: theta stays pi, omega = dt (sin pi + u); cost quadratic in u.
    const double s = std::sin(std::numbers::pi);
    const double ustar = std::clamp(-0.1 * dt * dt * s / (0.1 * dt * dt + 0.001), -2.0, 2.0);
    const double at = f(vec({ustar}));
    for (double u = -3.0; u <= 3.0; u += 0.01)
        EXPECT_GE(f(vec({u})), at - 1e-15);
    // Clamp: torques beyond the limit cost the same as the limit.
    EXPECT_EQ(f(vec({5.0})), f(vec({2.0})));
}

TEST(Pendulum, ResolutionChange)
{
    std::vector<double> u40(40, 0.0), u20(20, 0.0);
    auto fine = make_objective("pendulum:40:0.05");
    auto coarse = make_objective("pendulum:20:0.1");
    EXPECT_NEAR(fine(Vector::Zero(40)), oracle_rollout(0.05, 40, u40), 1e-12);
    EXPECT_NEAR(coarse(Vector::Zero(20)), oracle_rollout(0.1, 20, u20), 1e-12);
    Vector u = Vector::Constant(20, 0.7);
    std::vector<double> uv(20, 0.7);
    EXPECT_NEAR(coarse(u), oracle_rollout(0.1, 20, uv), 1e-12);
}

TEST(MakeObjective, NamesAndDims)
{
    auto f = make_objective("ackley:200");
    EXPECT_EQ(f.dim, 200);
    EXPECT_EQ(f.name, "ackley:200");
    auto c = make_objective("constant:3:2.5");
    EXPECT_EQ(c(Vector::Zero(3)), 2.5);
}
