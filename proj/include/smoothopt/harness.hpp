#ifndef SMOOTHOPT_HARNESS_HPP
#define SMOOTHOPT_HARNESS_HPP

#include <smoothopt/core.hpp>
#include <smoothopt/estimator_lab.hpp>
#include <smoothopt/landscape.hpp>
#include <smoothopt/objectives.hpp>
#include <smoothopt/optimizers.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace smoothopt {

using json = nlohmann::json;
namespace fs = std::filesystem;

enum ExitCode : int { exit_ok = 0, exit_partial = 1, exit_config = 2 };

/// --jobs value after the SMOOTHOPT_JOBS override; <= 0 means one per hardware thread.
inline int resolve_jobs(int cli_jobs)
{
    int jobs = cli_jobs;
    if (const char* env = std::getenv("SMOOTHOPT_JOBS")) {
        const std::string s(env);
        int v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size() || v < 1)
            throw ConfigError("SMOOTHOPT_JOBS must be a positive integer, got '" + s + "'");
        jobs = v;
    }
    if (jobs <= 0)
        jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    return jobs;
}

// ---------------------------------------------------------------------------
// Hyperparameter overrides

namespace detail {

    inline json vector_json(const Vector& v)
    {
        json a = json::array();
        for (Eigen::Index i = 0; i < v.size(); ++i)
            a.push_back(v[i]);
        return a;
    }

    inline Vector json_vector(const json& j, const std::string& what)
    {
        if (j.is_number())
            return Vector::Constant(1, j.get<double>());
        if (!j.is_array() || j.empty())
            throw ConfigError(what + ": expected a number or a nonempty array of numbers");
        Vector v(static_cast<Eigen::Index>(j.size()));
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (!j[i].is_number())
                throw ConfigError(what + ": expected numbers");
            v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
        }
        return v;
    }

    template <class T>
    T get_as(const json& v, const std::string& key)
    {
        try {
            return v.get<T>();
        }
        catch (const json::exception&) {
            throw ConfigError("override '" + key + "' has the wrong type: " + v.dump());
        }
    }

    inline double get_real(const json& v, const std::string& key)
    {
        if (!v.is_number())
            throw ConfigError("'" + key + "' must be a number, got " + v.dump());
        return v.get<double>();
    }

    inline ScheduleKind schedule_kind(const std::string& s)
    {
        for (auto k : {ScheduleKind::fixed, ScheduleKind::geometric, ScheduleKind::geometric_floor, ScheduleKind::adaptive_variance})
            if (s == to_string(k))
                return k;
        throw ConfigError("unknown schedule kind '" + s + "'");
    }

    inline void apply_schedule_field(Schedule& s, const std::string& field, const json& v, const std::string& key)
    {
        if (field == "kind")
            s.kind = schedule_kind(get_as<std::string>(v, key));
        else if (field == "t0")
            s.t0 = get_real(v, key);
        else if (field == "gamma")
            s.gamma = get_real(v, key);
        else if (field == "t_floor")
            s.t_floor = get_real(v, key);
        else if (field == "value")
            s.value = get_real(v, key);
        else
            throw ConfigError("unknown override key '" + key + "'");
    }

    inline json schedule_json(const Schedule& s)
    {
        return {{"kind", to_string(s.kind)}, {"t0", s.t0}, {"gamma", s.gamma}, {"t_floor", s.t_floor}, {"value", s.value}};
    }

} // namespace detail

/// Apply one override. Schedules take either an object or dotted keys such as
/// "t_schedule.gamma"; n_samples and iterations are consumed before defaults are built.
inline void apply_override(SboConfig& c, const std::string& key, const json& v)
{
    const auto dot = key.find('.');
    const std::string head = key.substr(0, dot);
    if (head == "t_schedule" || head == "lambda_schedule") {
        Schedule& s = head == "t_schedule" ? c.t_schedule : c.lambda_schedule;
        if (dot != std::string::npos)
            detail::apply_schedule_field(s, key.substr(dot + 1), v, key);
        else if (v.is_object())
            for (const auto& [f, fv] : v.items())
                detail::apply_schedule_field(s, f, fv, key + "." + f);
        else
            throw ConfigError("override '" + key + "' must be an object");
        return;
    }
    if (dot != std::string::npos)
        throw ConfigError("unknown override key '" + key + "'");
    if (key == "n_samples")
        c.n_samples = detail::get_as<std::size_t>(v, key);
    else if (key == "iterations")
        c.iterations = detail::get_as<int>(v, key);
    else if (key == "update_rule") {
        const auto s = detail::get_as<std::string>(v, key);
        if (s == "softmax")
            c.update_rule = UpdateRule::softmax;
        else if (s == "topk")
            c.update_rule = UpdateRule::topk;
        else
            throw ConfigError("unknown update rule '" + s + "'");
    }
    else if (key == "elite_fraction")
        c.elite_fraction = detail::get_real(v, key);
    else if (key == "step_rule") {
        const auto s = detail::get_as<std::string>(v, key);
        if (s == "full_softmax")
            c.step_rule = StepRule::full_softmax();
        else if (s == "scaled")
            c.step_rule.kind = StepKind::scaled;
        else if (s == "gradient")
            c.step_rule.kind = StepKind::gradient;
        else
            throw ConfigError("unknown step rule '" + s + "'");
    }
    else if (key == "step_c")
        c.step_rule.c = detail::get_real(v, key);
    else if (key == "lambda_from_probe")
        c.lambda_from_probe = detail::get_as<bool>(v, key);
    else if (key == "freeze_variance")
        c.freeze_variance = detail::get_as<bool>(v, key);
    else if (key == "ess_flag_threshold")
        c.ess_flag_threshold = detail::get_real(v, key);
    else if (key == "record_wall_time")
        c.record_wall_time = detail::get_as<bool>(v, key);
    else
        throw ConfigError("unknown override key '" + key + "'");
}

inline json sbo_config_json(const SboConfig& c)
{
    return {{"t_schedule", detail::schedule_json(c.t_schedule)},
            {"lambda_schedule", detail::schedule_json(c.lambda_schedule)},
            {"n_samples", c.n_samples},
            {"iterations", c.iterations},
            {"update_rule", c.update_rule == UpdateRule::softmax ? "softmax" : "topk"},
            {"elite_fraction", c.elite_fraction},
            {"step_rule", to_string(c.step_rule)},
            {"step_c", c.step_rule.c},
            {"lambda_from_probe", c.lambda_from_probe},
            {"freeze_variance", c.freeze_variance},
            {"ess_flag_threshold", c.ess_flag_threshold},
            {"record_wall_time", c.record_wall_time}};
}

/// Defaults for (algorithm, objective) with overrides applied: top-level keys first,
/// then the object under the algorithm's id.
inline SboConfig resolve_sbo_config(const std::string& algorithm, const Objective& f, const json& overrides)
{
    if (!overrides.is_null() && !overrides.is_object())
        throw ConfigError("overrides must be an object");
    json flat = json::object();
    if (overrides.is_object()) {
        for (const auto& [k, v] : overrides.items())
            if (!is_algorithm_id(k))
                flat[k] = v;
        if (overrides.contains(algorithm)) {
            const json& a = overrides.at(algorithm);
            if (!a.is_object())
                throw ConfigError("overrides." + algorithm + " must be an object");
            for (const auto& [k, v] : a.items())
                flat[k] = v;
        }
    }
    std::size_t n = 1024;
    int m = 300;
    if (flat.contains("n_samples"))
        n = detail::get_as<std::size_t>(flat.at("n_samples"), "n_samples");
    if (flat.contains("iterations"))
        m = detail::get_as<int>(flat.at("iterations"), "iterations");
    if (n < 2 || m < 1)
        throw ConfigError("n_samples must be >= 2 and iterations >= 1");
    SboConfig c = default_config(algorithm, f, n, m);
    for (const auto& [k, v] : flat.items())
        if (k != "n_samples" && k != "iterations")
            apply_override(c, k, v);
    try {
        c.validate();
    }
    catch (const ContractViolation& e) {
        throw ConfigError(std::string("invalid hyperparameters for ") + algorithm + ": " + e.what());
    }
    return c;
}

/// "key=value" from the command line; the value is read as JSON when it parses, else as a string.
inline std::pair<std::string, json> parse_set(const std::string& kv)
{
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("--set expects key=value, got '" + kv + "'");
    const std::string key = kv.substr(0, eq), raw = kv.substr(eq + 1);
    json v = json::parse(raw, nullptr, false);
    if (v.is_discarded())
        v = raw;
    return {key, v};
}

// ---------------------------------------------------------------------------
// Run records

inline json run_record_json(const RunRecord& r, const SboConfig& cfg)
{
    json it = json::array();
    for (const auto& p : r.per_iter)
        it.push_back({{"iter", p.iter},
                      {"t", p.t},
                      {"lambda", p.lambda},
                      {"cost_at_iterate", p.cost_at_iterate},
                      {"best_cost_so_far", p.best_cost_so_far},
                      {"ess", p.ess},
                      {"low_ess", p.low_ess}});
    return {{"algorithm", r.algorithm},
            {"objective", r.objective},
            {"seed", r.seed},
            {"config", sbo_config_json(cfg)},
            {"initial_cost", r.initial_cost},
            {"final_best_cost", r.final_best()},
            {"total_evals", r.total_evals},
            {"wall_time_s", r.wall_time_s},
            {"x0", detail::vector_json(r.x0)},
            {"final_x", detail::vector_json(r.final_x)},
            {"per_iter", it}};
}

inline std::string run_record_text(const RunRecord& r, const SboConfig& cfg) { return run_record_json(r, cfg).dump(1) + "\n"; }

inline std::string run_file_name(const std::string& objective, const std::string& algorithm, std::uint64_t seed)
{
    std::string o = objective;
    for (char& ch : o)
        if (ch == ':' || ch == '/' || ch == '\\')
            ch = '_';
    return o + "__" + algorithm + "__seed" + std::to_string(seed) + ".json";
}

inline void write_text(const fs::path& p, const std::string& text)
{
    std::ofstream os(p, std::ios::binary | std::ios::trunc);
    if (!os)
        throw ConfigError("cannot write '" + p.string() + "'");
    os << text;
    if (!os)
        throw ConfigError("write failed for '" + p.string() + "'");
}

inline std::string read_text(const fs::path& p)
{
    std::ifstream is(p, std::ios::binary);
    if (!is)
        throw ConfigError("cannot read '" + p.string() + "'");
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------------------
// Summary table

struct RecordDigest {
    std::string objective;
    std::string algorithm;
    std::uint64_t seed = 0;
    double final_cost = 0.0;
    double evals = 0.0;
    double wall_time_s = 0.0;
};

struct SummaryRow {
    std::string objective;
    std::string algorithm;
    double mean_final_cost = 0.0;
    std::optional<double> std_final_cost; // needs two seeds
    double mean_evals = 0.0;
    double mean_wall_time_s = 0.0;
    int n_seeds = 0;
};

struct SummaryTable {
    std::vector<SummaryRow> rows;
    std::vector<std::pair<std::string, std::string>> skipped; // file, reason
};

namespace detail {

    inline int algorithm_rank(const std::string& a)
    {
        const auto& ids = algorithm_ids();
        const auto it = std::find(ids.begin(), ids.end(), a);
        return it == ids.end() ? static_cast<int>(ids.size()) : static_cast<int>(it - ids.begin());
    }

    // Sums in sorted order so the result does not depend on record order.
    inline double stable_mean(std::vector<double> v)
    {
        std::sort(v.begin(), v.end());
        double s = 0.0;
        for (double x : v)
            s += x;
        return s / static_cast<double>(v.size());
    }

} // namespace detail

inline RecordDigest digest_record(const json& j)
{
    RecordDigest d;
    try {
        d.objective = j.at("objective").get<std::string>();
        d.algorithm = j.at("algorithm").get<std::string>();
        d.seed = j.at("seed").get<std::uint64_t>();
        const json& fc = j.at("final_best_cost");
        d.final_cost = fc.is_null() ? NAN : fc.get<double>();
        d.evals = j.at("total_evals").get<double>();
        d.wall_time_s = j.at("wall_time_s").get<double>();
    }
    catch (const json::exception& e) {
        throw ConfigError(std::string("not a run record: ") + e.what());
    }
    return d;
}

/// Mean and n-1 standard deviation of the final best cost per (objective, algorithm);
/// rows sorted by objective then by the declared algorithm order.
inline SummaryTable summarize_records(const std::vector<RecordDigest>& recs)
{
    std::map<std::pair<std::string, std::string>, std::vector<const RecordDigest*>> groups;
    for (const auto& r : recs)
        groups[{r.objective, r.algorithm}].push_back(&r);
    SummaryTable t;
    for (const auto& [key, g] : groups) {
        SummaryRow row;
        row.objective = key.first;
        row.algorithm = key.second;
        row.n_seeds = static_cast<int>(g.size());
        std::vector<double> cost, evals, wall;
        for (const auto* r : g) {
            cost.push_back(r->final_cost);
            evals.push_back(r->evals);
            wall.push_back(r->wall_time_s);
        }
        row.mean_final_cost = detail::stable_mean(cost);
        row.mean_evals = detail::stable_mean(evals);
        row.mean_wall_time_s = detail::stable_mean(wall);
        if (g.size() >= 2) {
            std::vector<double> sq;
            for (double c : cost)
                sq.push_back((c - row.mean_final_cost) * (c - row.mean_final_cost));
            row.std_final_cost = std::sqrt(detail::stable_mean(sq) * static_cast<double>(g.size()) / static_cast<double>(g.size() - 1));
        }
        t.rows.push_back(row);
    }
    std::stable_sort(t.rows.begin(), t.rows.end(), [](const SummaryRow& a, const SummaryRow& b) {
        if (a.objective != b.objective)
            return a.objective < b.objective;
        const int ra = detail::algorithm_rank(a.algorithm), rb = detail::algorithm_rank(b.algorithm);
        return ra != rb ? ra < rb : a.algorithm < b.algorithm;
    });
    return t;
}

inline std::string summary_csv(const SummaryTable& t)
{
    std::string s = "objective,algorithm,mean_final_cost,std_final_cost,mean_evals,mean_wall_time_s,n_seeds\n";
    for (const auto& r : t.rows)
        s += r.objective + "," + r.algorithm + "," + format_real(r.mean_final_cost) + "," + (r.std_final_cost ? format_real(*r.std_final_cost) : "") +
             "," + format_real(r.mean_evals) + "," + format_real(r.mean_wall_time_s) + "," + std::to_string(r.n_seeds) + "\n";
    return s;
}

/// Reads every *.json directly in `dir` and in `dir`/runs; files that are not run
/// records are skipped and listed. Manifests are ignored silently.
inline SummaryTable summarize(const fs::path& dir)
{
    if (!fs::is_directory(dir))
        throw ConfigError("'" + dir.string() + "' is not a directory");
    std::vector<fs::path> files;
    for (const fs::path& d : {dir, dir / "runs"}) {
        if (!fs::is_directory(d))
            continue;
        for (const auto& e : fs::directory_iterator(d))
            if (e.is_regular_file() && e.path().extension() == ".json" && e.path().filename() != "manifest.json")
                files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<RecordDigest> recs;
    std::vector<std::pair<std::string, std::string>> skipped;
    for (const auto& p : files) {
        try {
            const json j = json::parse(read_text(p));
            recs.push_back(digest_record(j));
        }
        catch (const std::exception& e) {
            skipped.emplace_back(p.string(), e.what());
        }
    }
    if (recs.empty())
        throw ConfigError("no run records found in '" + dir.string() + "'");
    SummaryTable t = summarize_records(recs);
    t.skipped = std::move(skipped);
    return t;
}

// ---------------------------------------------------------------------------
// Sample-size calculator

struct SampleSizeParams {
    double beta = 1.0;  // smoothness
    double beta1 = 1.0; // descent constant
    double m = 100.0;   // iterations
    double d = 1.0;
    double e0 = 1.0;
    double d_tau = 1.0;
    double delta = 0.1;
    double v_m1 = 1.0, v_0 = 1.0, v_1 = 1.0;
    // Fixed-temperature pair; optional.
    std::optional<double> lambda0, t0, lambda_c, t_c;
};

struct SampleSize {
    double n_adaptive = 0.0;
    std::optional<double> n_t0, n_tc, n_fixed;
};

/// Adaptive lambda = beta sqrt(t): N = 3 beta^2 M d / (2 E0 D_tau beta1^2 delta) (V-1 + V0 + V1).
/// Fixed lambda: N(t) = 3 lambda^2 M d / (2 E0 D_tau beta1^2 delta) (V-1/t + V0 (beta/lambda)^2 + V1 (beta/lambda)^4 t)
/// at (lambda0, t0) and (lambda_c, t_c), and their max.
inline SampleSize calc_sample_size(const SampleSizeParams& p)
{
    for (double v : {p.beta, p.beta1, p.m, p.d, p.e0, p.d_tau, p.delta, p.v_m1, p.v_0, p.v_1})
        require(v > 0.0 && std::isfinite(v), "calc_sample_size: every input must be positive");
    const double base = 3.0 * p.m * p.d / (2.0 * p.e0 * p.d_tau * p.beta1 * p.beta1 * p.delta);
    SampleSize s;
    s.n_adaptive = base * p.beta * p.beta * (p.v_m1 + p.v_0 + p.v_1);
    auto fixed = [&](double lam, double t) {
        require(lam > 0.0 && t > 0.0, "calc_sample_size: lambda and t must be positive");
        const double r = p.beta / lam;
        return base * lam * lam * (p.v_m1 / t + p.v_0 * r * r + p.v_1 * r * r * r * r * t);
    };
    const bool any = p.lambda0 || p.t0 || p.lambda_c || p.t_c;
    if (any) {
        require(p.lambda0 && p.t0 && p.lambda_c && p.t_c, "calc_sample_size: the fixed pair needs lambda0, t0, lambda_c and t_c");
        s.n_t0 = fixed(*p.lambda0, *p.t0);
        s.n_tc = fixed(*p.lambda_c, *p.t_c);
        s.n_fixed = std::max(*s.n_t0, *s.n_tc);
    }
    return s;
}

inline SampleSizeParams sample_size_params(const json& j)
{
    if (!j.is_object())
        throw ConfigError("calc-n parameters must be an object");
    SampleSizeParams p;
    for (const auto& [k, v] : j.items()) {
        const double x = detail::get_real(v, k);
        if (k == "beta")
            p.beta = x;
        else if (k == "beta1")
            p.beta1 = x;
        else if (k == "M")
            p.m = x;
        else if (k == "d")
            p.d = x;
        else if (k == "E0")
            p.e0 = x;
        else if (k == "D_tau")
            p.d_tau = x;
        else if (k == "delta")
            p.delta = x;
        else if (k == "V_m1")
            p.v_m1 = x;
        else if (k == "V_0")
            p.v_0 = x;
        else if (k == "V_1")
            p.v_1 = x;
        else if (k == "lambda0")
            p.lambda0 = x;
        else if (k == "t0")
            p.t0 = x;
        else if (k == "lambda_c")
            p.lambda_c = x;
        else if (k == "t_c")
            p.t_c = x;
        else
            throw ConfigError("unknown calc-n parameter '" + k + "'");
    }
    return p;
}

inline json sample_size_json(const SampleSize& s)
{
    json j = {{"n_adaptive", s.n_adaptive}};
    if (s.n_fixed) {
        j["n_t0"] = *s.n_t0;
        j["n_tc"] = *s.n_tc;
        j["n_fixed"] = *s.n_fixed;
    }
    return j;
}

// ---------------------------------------------------------------------------
// Experiments

struct ExperimentOutcome {
    int exit_code = exit_ok;
    std::vector<std::string> failures;
    std::vector<fs::path> written;
    SummaryTable summary; // bench and single_run
};

namespace detail {

    inline void check_keys(const json& cfg, std::initializer_list<const char*> allowed)
    {
        for (const auto& [k, v] : cfg.items())
            if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; }) == allowed.end())
                throw ConfigError("unknown config key '" + k + "'");
    }

    inline std::vector<std::string> string_list(const json& cfg, const char* key)
    {
        if (!cfg.contains(key))
            return {};
        const json& a = cfg.at(key);
        if (!a.is_array())
            throw ConfigError(std::string("'") + key + "' must be an array of strings");
        std::vector<std::string> out;
        for (const auto& v : a) {
            if (!v.is_string())
                throw ConfigError(std::string("'") + key + "' must be an array of strings");
            out.push_back(v.get<std::string>());
        }
        return out;
    }

    inline std::vector<double> real_list(const json& cfg, const char* key, std::vector<double> fallback)
    {
        if (!cfg.contains(key))
            return fallback;
        const json& a = cfg.at(key);
        if (!a.is_array() || a.empty())
            throw ConfigError(std::string("'") + key + "' must be a nonempty array of numbers");
        std::vector<double> out;
        for (const auto& v : a)
            out.push_back(get_real(v, key));
        return out;
    }

    inline fs::path prepare_output(const json& cfg, const char* fallback)
    {
        const fs::path out = cfg.value("output_dir", std::string(fallback));
        std::error_code ec;
        fs::create_directories(out, ec);
        if (ec || !fs::is_directory(out))
            throw ConfigError("output_dir '" + out.string() + "' is not writable");
        return out;
    }

    inline std::string manifest_text(const json& m) { return m.dump(2) + "\n"; }

} // namespace detail

/// Cross product objective x algorithm x seed. Records go to output_dir/runs, the summary
/// to summary.csv and the resolved configuration to manifest.json.
inline ExperimentOutcome run_bench(json cfg, int jobs)
{
    detail::check_keys(cfg, {"kind", "objectives", "algorithms", "seeds", "overrides", "output_dir"});
    const auto objectives = detail::string_list(cfg, "objectives");
    auto algorithms = detail::string_list(cfg, "algorithms");
    if (objectives.empty())
        throw ConfigError("bench needs a nonempty 'objectives' list");
    if (algorithms.empty())
        algorithms = algorithm_ids();
    for (const auto& a : algorithms)
        if (!is_algorithm_id(a))
            throw ConfigError("unknown algorithm id '" + a + "'");
    std::vector<std::uint64_t> seeds;
    if (!cfg.contains("seeds") || !cfg.at("seeds").is_array() || cfg.at("seeds").empty())
        throw ConfigError("bench needs a nonempty 'seeds' array");
    for (const auto& s : cfg.at("seeds")) {
        if (!s.is_number_integer() || s.get<long long>() < 0)
            throw ConfigError("seeds must be nonnegative integers, got " + s.dump());
        seeds.push_back(s.get<std::uint64_t>());
    }
    const json overrides = cfg.value("overrides", json::object());
    if (overrides.is_object())
        for (const auto& [k, v] : overrides.items())
            if (v.is_object() && !is_algorithm_id(k) && k != "t_schedule" && k != "lambda_schedule")
                throw ConfigError("unknown algorithm id '" + k + "' in overrides");

    std::vector<Objective> objs;
    json resolved = json::object();
    std::map<std::pair<std::size_t, std::size_t>, SboConfig> configs;
    for (std::size_t oi = 0; oi < objectives.size(); ++oi) {
        objs.push_back(make_objective(objectives[oi]));
        for (std::size_t ai = 0; ai < algorithms.size(); ++ai) {
            configs[{oi, ai}] = resolve_sbo_config(algorithms[ai], objs.back(), overrides);
            resolved[objectives[oi]][algorithms[ai]] = sbo_config_json(configs[{oi, ai}]);
        }
    }
    const fs::path out = detail::prepare_output(cfg, "out/bench");
    fs::create_directories(out / "runs");

    struct Cell {
        std::size_t oi, ai;
        std::uint64_t seed;
    };
    std::vector<Cell> cells;
    for (std::size_t oi = 0; oi < objs.size(); ++oi)
        for (std::size_t ai = 0; ai < algorithms.size(); ++ai)
            for (auto s : seeds)
                cells.push_back({oi, ai, s});
    std::vector<std::optional<RecordDigest>> digests(cells.size());
    std::vector<std::string> errors(cells.size());
    parallel_for(cells.size(), jobs, [&](std::size_t i) {
        const Cell& c = cells[i];
        const SboConfig& sc = configs.at({c.oi, c.ai});
        try {
            const Objective& f = objs[c.oi];
            const RunRecord r = run_algorithm(algorithms[c.ai], f, sc, uniform_initial_point(f, c.seed), c.seed);
            write_text(out / "runs" / run_file_name(objectives[c.oi], algorithms[c.ai], c.seed), run_record_text(r, sc));
            digests[i] = RecordDigest{r.objective, r.algorithm, r.seed, r.final_best(), static_cast<double>(r.total_evals), r.wall_time_s};
        }
        catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });

    ExperimentOutcome res;
    json runs = json::array(), failures = json::array();
    std::vector<RecordDigest> ok;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const Cell& c = cells[i];
        const std::string file = "runs/" + run_file_name(objectives[c.oi], algorithms[c.ai], c.seed);
        json entry = {{"objective", objectives[c.oi]}, {"algorithm", algorithms[c.ai]}, {"seed", c.seed}};
        if (digests[i]) {
            ok.push_back(*digests[i]);
            entry["file"] = file;
            entry["status"] = "ok";
            res.written.push_back(out / file);
        }
        else {
            entry["status"] = "failed";
            entry["error"] = errors[i];
            failures.push_back(entry);
            res.failures.push_back(objectives[c.oi] + " " + algorithms[c.ai] + " seed " + std::to_string(c.seed) + ": " + errors[i]);
        }
        runs.push_back(entry);
    }
    if (!ok.empty()) {
        res.summary = summarize_records(ok);
        write_text(out / "summary.csv", summary_csv(res.summary));
        res.written.push_back(out / "summary.csv");
    }
    json resolved_top = {{"kind", cfg.value("kind", "bench")}, {"objectives", objectives}, {"algorithms", algorithms},
                         {"seeds", seeds},                     {"overrides", overrides},   {"output_dir", out.generic_string()}};
    json manifest = {{"config", resolved_top}, {"resolved", resolved}, {"runs", runs}, {"failures", failures}, {"summary", ok.empty() ? json() : json("summary.csv")}};
    write_text(out / "manifest.json", detail::manifest_text(manifest));
    res.written.push_back(out / "manifest.json");
    res.exit_code = res.failures.empty() ? exit_ok : exit_partial;
    return res;
}

namespace detail {

    inline LandscapeAssumptions assumptions_from_json(const json& j)
    {
        check_keys(j, {"alpha", "beta", "d_tau", "tau", "p_out", "c_alpha", "c_e", "lambda", "dim"});
        LandscapeAssumptions a;
        a.alpha = get_real(j.at("alpha"), "alpha");
        a.beta = get_real(j.at("beta"), "beta");
        a.d_tau = get_real(j.at("d_tau"), "d_tau");
        a.tau = get_real(j.at("tau"), "tau");
        a.p_out = get_real(j.at("p_out"), "p_out");
        a.c_alpha = get_real(j.at("c_alpha"), "c_alpha");
        a.c_e = get_real(j.at("c_e"), "c_e");
        a.lambda = get_real(j.at("lambda"), "lambda");
        a.dim = j.value("dim", 1);
        try {
            a.validate();
        }
        catch (const ContractViolation& e) {
            throw ConfigError(e.what());
        }
        return a;
    }

    inline json assumptions_json(const LandscapeAssumptions& a)
    {
        return {{"alpha", a.alpha}, {"beta", a.beta}, {"d_tau", a.d_tau}, {"tau", a.tau},       {"p_out", a.p_out},
                {"c_alpha", a.c_alpha}, {"c_e", a.c_e}, {"lambda", a.lambda}, {"dim", a.dim}};
    }

} // namespace detail

/// Oracle landscape pipeline on gmm1d:canonical or checker2d:canonical: landscape.csv
/// (t, quantity, value, status), eigen_curves.csv and manifest.json.
inline ExperimentOutcome run_landscape(json cfg, int jobs)
{
    detail::check_keys(cfg, {"kind", "objective", "t_grid", "radius_max", "radius_step", "directions", "threshold", "assumptions", "output_dir"});
    const std::string id = cfg.value("objective", std::string("gmm1d:canonical"));
    const std::vector<double> kDefaultT{1e-4, 1e-3, 0.01, 0.05, 0.1, 0.2, 0.3, 0.5, 0.75, 1.0, 1.5, 2.0};
    const auto t_grid = detail::real_list(cfg, "t_grid", kDefaultT);
    for (std::size_t i = 0; i < t_grid.size(); ++i)
        if (!(t_grid[i] > 0.0) || (i > 0 && t_grid[i] <= t_grid[i - 1]))
            throw ConfigError("t_grid must be positive and increasing");
    const double rmax = cfg.contains("radius_max") ? detail::get_real(cfg.at("radius_max"), "radius_max") : 6.0;
    const double rstep = cfg.contains("radius_step") ? detail::get_real(cfg.at("radius_step"), "radius_step") : 1e-3;
    if (!(rmax > 0.0 && rstep > 0.0 && rstep <= rmax))
        throw ConfigError("need 0 < radius_step <= radius_max");

    OracleEvaluator ev;
    Vector x_star;
    std::optional<GmmSpec> gmm;
    if (id == "gmm1d:canonical") {
        gmm = GmmSpec::canonical_1d();
        ev = gmm_oracle(*gmm);
        x_star = make_gmm_potential(*gmm).optimum->point;
    }
    else if (id == "checker2d:canonical") {
        ev = checkerboard_oracle(CheckerboardSpec::canonical_2d());
        x_star = Vector::Zero(2);
    }
    else {
        (void)make_objective(id);
        throw ConfigError("objective '" + id + "' has no landscape oracle (use gmm1d:canonical or checker2d:canonical)");
    }

    LandscapeOptions opt;
    opt.radius_grid = default_radius_grid(rmax, rstep);
    opt.directions = cfg.value("directions", 0);
    opt.threshold = cfg.contains("threshold") ? detail::get_real(cfg.at("threshold"), "threshold") : 0.0;
    opt.jobs = jobs;
    if (opt.directions < 0 || opt.threshold < 0.0)
        throw ConfigError("directions and threshold must be nonnegative");

    std::optional<LandscapeAssumptions> assumptions;
    json assumptions_out;
    const json aj = cfg.value("assumptions", json("fit"));
    if (aj.is_string() && aj.get<std::string>() == "fit") {
        if (!gmm)
            throw ConfigError("assumptions = \"fit\" needs a 1-d mixture objective");
        const auto fit = fit_assumptions(*gmm, x_star[0]);
        assumptions = fit.assumptions;
        assumptions_out = detail::assumptions_json(*assumptions);
        assumptions_out["source"] = "fit";
    }
    else if (aj.is_object()) {
        assumptions = detail::assumptions_from_json(aj);
        assumptions_out = detail::assumptions_json(*assumptions);
        assumptions_out["source"] = "config";
    }
    else if (!aj.is_null()) {
        throw ConfigError("assumptions must be \"fit\", an object, or null");
    }

    const fs::path out = detail::prepare_output(cfg, "out/landscape");
    const LandscapeReport rep = build_landscape_report(ev, x_star, t_grid, assumptions, opt);
    std::ostringstream a, b;
    write_landscape_csv(a, rep);
    write_eigen_curves_csv(b, rep);
    ExperimentOutcome res;
    write_text(out / "landscape.csv", a.str());
    write_text(out / "eigen_curves.csv", b.str());
    res.written = {out / "landscape.csv", out / "eigen_curves.csv", out / "manifest.json"};
    json failures = json::array();
    for (std::size_t i = 0; i < rep.t_grid.size(); ++i)
        if (rep.status[i] != "ok") {
            failures.push_back({{"t", rep.t_grid[i]}, {"status", rep.status[i]}});
            res.failures.push_back("t=" + format_real(rep.t_grid[i]) + ": " + rep.status[i]);
        }
    json resolved = {{"kind", "landscape"},
                     {"objective", id},
                     {"t_grid", t_grid},
                     {"radius_max", rmax},
                     {"radius_step", rstep},
                     {"directions", opt.directions > 0 ? opt.directions : (ev.dim == 1 ? 2 : 16)},
                     {"threshold", opt.threshold},
                     {"assumptions", assumptions_out},
                     {"output_dir", out.generic_string()}};
    json manifest = {{"config", resolved},
                     {"x_star", detail::vector_json(x_star)},
                     {"files", {"landscape.csv", "eigen_curves.csv"}},
                     {"soundness_violations", rep.soundness_violations},
                     {"failures", failures}};
    write_text(out / "manifest.json", detail::manifest_text(manifest));
    res.exit_code = res.failures.empty() ? exit_ok : exit_partial;
    return res;
}

/// Bias/variance sweep plus an optional temperature sweep: moments.csv, lambda_sweep.csv
/// and manifest.json.
inline ExperimentOutcome run_estimator(json cfg, int jobs)
{
    detail::check_keys(cfg, {"kind", "objective", "x_points", "n_grid", "t_grid", "lambda_grid", "replications", "base_seed", "antithetic",
                             "lambda_sweep", "output_dir"});
    MomentSweepConfig mc;
    mc.objective_id = cfg.value("objective", std::string("gmm1d:canonical"));
    const Objective f = make_objective(mc.objective_id);
    const ReferenceGradient ref = reference_gradient_for(mc.objective_id);
    if (cfg.contains("x_points")) {
        if (!cfg.at("x_points").is_array() || cfg.at("x_points").empty())
            throw ConfigError("x_points must be a nonempty array");
        for (const auto& x : cfg.at("x_points"))
            mc.x_points.push_back(detail::json_vector(x, "x_points"));
    }
    else {
        mc.x_points = {Vector::Constant(f.dim, 0.5)};
    }
    for (double n : detail::real_list(cfg, "n_grid", {100, 1000, 10000})) {
        if (!(n >= 2) || n != std::floor(n))
            throw ConfigError("n_grid entries must be integers >= 2");
        mc.n_grid.push_back(static_cast<std::size_t>(n));
    }
    mc.t_grid = detail::real_list(cfg, "t_grid", {0.5});
    mc.lambda_grid = detail::real_list(cfg, "lambda_grid", {1.0});
    mc.replications = cfg.value("replications", 200);
    mc.base_seed = cfg.value("base_seed", std::uint64_t{0});
    mc.antithetic = cfg.value("antithetic", false);
    mc.jobs = jobs;
    mc.validate();

    json sweep_cfg;
    if (cfg.contains("lambda_sweep") && !cfg.at("lambda_sweep").is_null()) {
        const json& s = cfg.at("lambda_sweep");
        if (!s.is_object())
            throw ConfigError("lambda_sweep must be an object");
        detail::check_keys(s, {"x", "t", "n", "replications", "points", "decades", "seed"});
        if (!s.contains("x") || !s.contains("t"))
            throw ConfigError("lambda_sweep needs x and t");
        sweep_cfg = {{"x", s.at("x")},
                     {"t", detail::get_real(s.at("t"), "lambda_sweep.t")},
                     {"n", s.value("n", 1000)},
                     {"replications", s.value("replications", 200)},
                     {"points", s.value("points", 25)},
                     {"decades", s.contains("decades") ? detail::get_real(s.at("decades"), "decades") : 2.0},
                     {"seed", s.value("seed", std::uint64_t{1})}};
    }

    const fs::path out = detail::prepare_output(cfg, "out/estimator");
    ExperimentOutcome res;
    const MomentSweepResult m = measure_moments(mc, f, ref);
    std::ostringstream os;
    write_moments_csv(os, m);
    write_text(out / "moments.csv", os.str());
    res.written.push_back(out / "moments.csv");

    json xs = json::array();
    for (const auto& x : mc.x_points)
        xs.push_back(detail::vector_json(x));
    json resolved = {{"kind", "estimator"},         {"objective", mc.objective_id}, {"x_points", xs},
                     {"n_grid", mc.n_grid},         {"t_grid", mc.t_grid},          {"lambda_grid", mc.lambda_grid},
                     {"replications", mc.replications}, {"base_seed", mc.base_seed}, {"antithetic", mc.antithetic},
                     {"lambda_sweep", sweep_cfg},   {"output_dir", out.generic_string()}};
    json manifest = {{"config", resolved}, {"files", {"moments.csv"}}};

    if (!sweep_cfg.is_null()) {
        const Vector x = detail::json_vector(sweep_cfg.at("x"), "lambda_sweep.x");
        if (x.size() != f.dim)
            throw ConfigError("lambda_sweep.x dimension does not match the objective");
        const double t = sweep_cfg.at("t").get<double>();
        if (!(t > 0.0))
            throw ConfigError("lambda_sweep.t must be positive");
        if (f.dim != 1)
            throw ConfigError("lambda_sweep needs a 1-d objective for its curvature scale");
        const double scale = std::max(curvature_scale(f, x[0], t), 1e-12) * std::sqrt(t);
        const double dec = std::pow(10.0, sweep_cfg.at("decades").get<double>());
        const int points = sweep_cfg.at("points").get<int>();
        if (points < 3 || !(dec > 1.0))
            throw ConfigError("lambda_sweep needs points >= 3 and decades > 0");
        const auto sw = lambda_sweep(f, ref, x, t, logspace(scale / dec, scale * dec, points), sweep_cfg.at("n").get<std::size_t>(),
                                     sweep_cfg.at("replications").get<int>(), sweep_cfg.at("seed").get<std::uint64_t>(), jobs);
        std::ostringstream ls;
        write_lambda_sweep_csv(ls, sw);
        write_text(out / "lambda_sweep.csv", ls.str());
        res.written.push_back(out / "lambda_sweep.csv");
        manifest["files"].push_back("lambda_sweep.csv");
        manifest["lambda_sweep"] = {{"beta_sqrt_t", scale}, {"argmin_lambda", sw.argmin_lambda()}, {"u_shaped", sw.u_shaped()}};
    }
    write_text(out / "manifest.json", detail::manifest_text(manifest));
    res.written.push_back(out / "manifest.json");
    return res;
}

inline json load_config(const fs::path& p)
{
    const json j = json::parse(read_text(p), nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw ConfigError("'" + p.string() + "' is not a JSON object");
    return j;
}

/// Dispatch on cfg.kind (or `expected_kind` when the file leaves it out). single_run
/// takes one objective, one algorithm and one seed and is otherwise a bench.
inline ExperimentOutcome run_experiment(json cfg, int jobs, const std::string& expected_kind = "")
{
    std::string kind = cfg.value("kind", expected_kind);
    if (!expected_kind.empty() && kind != expected_kind && !(expected_kind == "bench" && kind == "single_run"))
        throw ConfigError("config kind '" + kind + "' does not match command '" + expected_kind + "'");
    if (kind == "bench")
        return run_bench(std::move(cfg), jobs);
    if (kind == "single_run") {
        for (const char* k : {"objectives", "algorithms", "seeds"})
            if (!cfg.contains(k) || !cfg.at(k).is_array() || cfg.at(k).size() != 1)
                throw ConfigError(std::string("single_run needs exactly one entry in '") + k + "'");
        return run_bench(std::move(cfg), jobs);
    }
    if (kind == "landscape")
        return run_landscape(std::move(cfg), jobs);
    if (kind == "estimator")
        return run_estimator(std::move(cfg), jobs);
    throw ConfigError("unknown experiment kind '" + kind + "'");
}

} // namespace smoothopt

#endif
