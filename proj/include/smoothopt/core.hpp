#ifndef SMOOTHOPT_CORE_HPP
#define SMOOTHOPT_CORE_HPP

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace smoothopt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using VectorRef = Eigen::Ref<const Eigen::VectorXd>;

/// Precondition of an operation was not met by the caller.
struct ContractViolation : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Unknown identifier or malformed experiment configuration.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A Monte-Carlo estimate could not be formed (e.g. every sample cost was non-finite).
struct EstimationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, const char* what)
{
    if (!cond)
        throw ContractViolation(what);
}

inline bool all_finite(const VectorRef& v) { return v.allFinite(); }

namespace detail {

    inline std::uint64_t splitmix64(std::uint64_t z)
    {
        z += 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    inline void mulhilo32(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo)
    {
        const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
        hi = static_cast<std::uint32_t>(p >> 32);
        lo = static_cast<std::uint32_t>(p);
    }

    // Philox4x32 with 10 rounds (Salmon et al., Random123).
    inline std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key)
    {
        constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
        constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += W0;
                key[1] += W1;
            }
            std::uint32_t hi0, lo0, hi1, lo1;
            mulhilo32(M0, ctr[0], hi0, lo0);
            mulhilo32(M1, ctr[2], hi1, lo1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        }
        return ctr;
    }

    inline double to_unit_closed_open(std::uint64_t bits) // [0, 1)
    {
        return static_cast<double>(bits >> 11) * 0x1.0p-53;
    }

    inline double to_unit_open_open(std::uint64_t bits) // (0, 1)
    {
        return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
    }

    // Wichura's AS241 (PPND16): inverse standard normal CDF, relative accuracy ~1e-16.
    inline double inverse_normal_cdf(double p)
    {
        const double q = p - 0.5;
        if (std::abs(q) <= 0.425) {
            const double r = 0.180625 - q * q;
            return q * (((((((2509.0809287301226727 * r + 33430.575583588128105) * r + 67265.770927008700853) * r + 45921.953931549871457) * r +
                           13731.693765509461125) * r + 1971.5909503065514427) * r + 133.14166789178437745) * r + 3.387132872796366608) /
                   (((((((5226.495278852545925 * r + 28729.085735721942674) * r + 39307.89580009271061) * r + 21213.794301586595867) * r +
                      5394.1960214247511077) * r + 687.1870074920579083) * r + 42.313330701600911252) * r + 1.0);
        }
        double r = q < 0 ? p : 1.0 - p;
        r = std::sqrt(-std::log(r));
        double val;
        if (r <= 5.0) {
            r -= 1.6;
            val = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r + 0.24178072517745061177) * r + 1.27045825245236838258) * r +
                      3.64784832476320460504) * r + 5.7694972214606914055) * r + 4.6303378461565452959) * r + 1.42343711074968357734) /
                  (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r + 0.0151986665636164571966) * r + 0.14810397642748007459) * r +
                     0.68976733498510000455) * r + 1.6763848301838038494) * r + 2.05319162663775882187) * r + 1.0);
        }
        else {
            r -= 5.0;
            val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r + 0.0012426609473880784386) * r + 0.026532189526576123093) * r +
                      0.29656057182850489123) * r + 1.7848265399172913358) * r + 5.4637849111641143699) * r + 6.6579046435011037772) /
                  (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r + 1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r +
                     0.0148753612908506148525) * r + 0.13692988092273580531) * r + 0.59983220655588793769) * r + 1.0);
        }
        return q < 0 ? -val : val;
    }

} // namespace detail

/// Counter-based random stream. The pair (seed, stream_id) fully determines every
/// draw, and any draw can be computed independently of the others, so batches can
/// be filled in any order (or in parallel) with identical results.
struct RngStream {
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;

    std::array<std::uint32_t, 4> block(std::uint64_t counter) const
    {
        return detail::philox4x32_10(
            {static_cast<std::uint32_t>(counter), static_cast<std::uint32_t>(counter >> 32),
             static_cast<std::uint32_t>(stream_id), static_cast<std::uint32_t>(stream_id >> 32)},
            {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)});
    }

    /// Two 64-bit words for a given counter value.
    std::array<std::uint64_t, 2> words(std::uint64_t counter) const
    {
        const auto b = block(counter);
        return {(static_cast<std::uint64_t>(b[0]) << 32) | b[1], (static_cast<std::uint64_t>(b[2]) << 32) | b[3]};
    }

    /// Uniform draw in [0, 1) at position `index` of this stream.
    double uniform(std::uint64_t index) const
    {
        const auto w = words(index >> 1);
        return detail::to_unit_closed_open(w[index & 1]);
    }

    /// Standard normal draws for positions [offset, offset + out.size()). Position k
    /// is the inverse normal CDF of 64-bit word k, so draws are random-access.
    void fill_normal(std::span<double> out, std::uint64_t offset = 0) const
    {
        std::size_t i = 0;
        std::uint64_t pos = offset;
        if ((pos & 1) == 1 && i < out.size()) {
            out[i++] = detail::inverse_normal_cdf(detail::to_unit_open_open(words(pos >> 1)[1]));
            ++pos;
        }
        for (; i + 1 < out.size(); i += 2, pos += 2) {
            const auto w = words(pos >> 1);
            out[i] = detail::inverse_normal_cdf(detail::to_unit_open_open(w[0]));
            out[i + 1] = detail::inverse_normal_cdf(detail::to_unit_open_open(w[1]));
        }
        if (i < out.size())
            out[i] = detail::inverse_normal_cdf(detail::to_unit_open_open(words(pos >> 1)[0]));
    }

    double normal(std::uint64_t index) const
    {
        double z;
        fill_normal(std::span<double>(&z, 1), index);
        return z;
    }

    /// Child stream, e.g. one per iteration or per worker. Distinct tags give
    /// distinct stream ids (up to 64-bit hash collisions).
    RngStream substream(std::uint64_t tag) const
    {
        return {seed, detail::splitmix64(stream_id ^ detail::splitmix64(tag + 0x632BE59BD9B4E019ULL))};
    }
};

/// log(sum(exp(v))) with max-subtraction.
inline double log_sum_exp(std::span<const double> v)
{
    require(!v.empty(), "log_sum_exp: empty input");
    double m = -std::numeric_limits<double>::infinity();
    for (double x : v)
        m = std::max(m, x);
    if (!std::isfinite(m))
        return m;
    double s = 0.0;
    for (double x : v)
        s += std::exp(x - m);
    return m + std::log(s);
}

struct SoftmaxResult {
    std::vector<double> weights; // normalized
    double ess = 0.0;            // (sum u)^2 / sum u^2 over unnormalized u
    double log_sum = 0.0;        // log sum_i exp(-c_i / lambda)
};

/// Normalized Gibbs weights exp(-c_i/lambda) / sum_j exp(-c_j/lambda), computed after
/// subtracting the minimum cost. lambda may be +inf (uniform weights).
inline SoftmaxResult softmax_weights_full(std::span<const double> costs, double lambda)
{
    require(!costs.empty(), "softmax_weights: empty cost array");
    require(lambda > 0.0, "softmax_weights: lambda must be positive");
    double cmin = std::numeric_limits<double>::infinity();
    for (double c : costs) {
        require(std::isfinite(c), "softmax_weights: non-finite cost");
        cmin = std::min(cmin, c);
    }
    SoftmaxResult out;
    out.weights.resize(costs.size());
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t i = 0; i < costs.size(); ++i) {
        const double u = std::exp(-(costs[i] - cmin) / lambda);
        out.weights[i] = u;
        sum += u;
        sum_sq += u * u;
    }
    for (double& w : out.weights)
        w /= sum;
    out.ess = sum * sum / sum_sq;
    out.log_sum = -cmin / lambda + std::log(sum);
    return out;
}

inline std::vector<double> softmax_weights(std::span<const double> costs, double lambda)
{
    return softmax_weights_full(costs, lambda).weights;
}

/// Effective sample size (sum w)^2 / sum w^2.
inline double effective_sample_size(std::span<const double> w)
{
    double s = 0.0, s2 = 0.0;
    for (double x : w) {
        s += x;
        s2 += x * x;
    }
    return s2 > 0.0 ? s * s / s2 : 0.0;
}

/// n i.i.d. draws from N(mean, diag(stddev^2)), one per column.
inline Matrix sample_gaussian_diag(const VectorRef& mean, const VectorRef& stddev, std::size_t n, const RngStream& rng)
{
    require(mean.size() == stddev.size(), "sample_gaussian: dimension mismatch");
    require(n > 0, "sample_gaussian: n must be positive");
    const auto d = mean.size();
    Matrix out(d, static_cast<Eigen::Index>(n));
    rng.fill_normal(std::span<double>(out.data(), static_cast<std::size_t>(out.size())));
    for (Eigen::Index i = 0; i < out.cols(); ++i)
        out.col(i) = mean + stddev.cwiseProduct(out.col(i));
    return out;
}

/// n i.i.d. draws from N(mean, t I), one per column.
inline Matrix sample_gaussian(const VectorRef& mean, double variance_t, std::size_t n, const RngStream& rng)
{
    require(variance_t > 0.0 && std::isfinite(variance_t), "sample_gaussian: variance must be positive");
    return sample_gaussian_diag(mean, Vector::Constant(mean.size(), std::sqrt(variance_t)), n, rng);
}

/// Sum_i w_i * samples.col(i), accumulated in index order. Shared by every
/// weighted-mean update so that degenerate parameterizations coincide exactly.
inline Vector weighted_mean(const Matrix& samples, std::span<const double> w)
{
    Vector acc = Vector::Zero(samples.rows());
    for (Eigen::Index i = 0; i < samples.cols(); ++i)
        if (w[static_cast<std::size_t>(i)] != 0.0)
            acc.noalias() += w[static_cast<std::size_t>(i)] * samples.col(i);
    return acc;
}

/// Indices of the k smallest costs; ties broken by lowest index.
inline std::vector<std::size_t> k_smallest(std::span<const double> costs, std::size_t k)
{
    require(k >= 1 && k <= costs.size(), "k_smallest: k out of range");
    std::vector<std::size_t> idx(costs.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return costs[a] < costs[b]; });
    idx.resize(k);
    return idx;
}

/// Runs fn(0..n-1) on up to `jobs` threads. Tasks must write to disjoint outputs;
/// the first exception is rethrown after all workers finish.
/// Shortest round-trip decimal form; locale independent.
inline std::string format_real(double v)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

inline void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn)
{
    const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    auto work = [&] {
        for (std::size_t i = next++; i < n && !failed; i = next++) {
            try {
                fn(i);
            }
            catch (...) {
                if (!failed.exchange(true))
                    error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back(work);
    for (auto& th : pool)
        th.join();
    if (error)
        std::rethrow_exception(error);
}

} // namespace smoothopt

#endif
