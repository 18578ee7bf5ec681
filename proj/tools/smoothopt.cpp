// smoothopt command line: experiment runner, single runs, summaries and the
// sample-size calculator. Exit codes: 0 ok, 1 partial failure, 2 config error.

#include <smoothopt/harness.hpp>

#include <CLI11.hpp>

#include <iostream>

using namespace smoothopt;

namespace {

int report(const ExperimentOutcome& res)
{
    for (const auto& f : res.failures)
        std::cerr << "failed: " << f << "\n";
    for (const auto& p : res.written)
        std::cout << p.generic_string() << "\n";
    return res.exit_code;
}

int run_config_command(const std::string& kind, const std::string& path, int jobs)
{
    return report(run_experiment(load_config(path), resolve_jobs(jobs), kind));
}

json calc_n_input(const std::vector<std::string>& args)
{
    if (args.size() == 1) {
        const std::string& a = args[0];
        if (!a.empty() && a.front() == '{') {
            const json j = json::parse(a, nullptr, false);
            if (j.is_discarded())
                throw ConfigError("calc-n: inline parameters are not valid JSON");
            return j;
        }
        if (a.find('=') == std::string::npos)
            return load_config(a);
    }
    json j = json::object();
    for (const auto& kv : args) {
        auto [k, v] = parse_set(kv);
        j[k] = v;
    }
    return j;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Sampling-based optimization as smoothed zeroth-order descent"};
    app.require_subcommand(1);
    int jobs = 0;

    std::string bench_cfg, land_cfg, est_cfg;
    auto* bench = app.add_subcommand("bench", "Run objective x algorithm x seed from a JSON config");
    bench->add_option("config", bench_cfg, "Config file")->required();
    bench->add_option("--jobs", jobs, "Worker threads (SMOOTHOPT_JOBS overrides)");
    auto* land = app.add_subcommand("landscape", "Convex radius and optimality gap over a t grid");
    land->add_option("config", land_cfg, "Config file")->required();
    land->add_option("--jobs", jobs, "Worker threads (SMOOTHOPT_JOBS overrides)");
    auto* est = app.add_subcommand("estimator", "Bias/variance sweep of the gradient estimator");
    est->add_option("config", est_cfg, "Config file")->required();
    est->add_option("--jobs", jobs, "Worker threads (SMOOTHOPT_JOBS overrides)");

    std::string alg, obj, out_dir = "out/run";
    std::uint64_t seed = 0;
    std::vector<std::string> sets;
    auto* run = app.add_subcommand("run", "Single run with optional hyperparameter overrides");
    run->add_option("--alg", alg, "Algorithm id")->required();
    run->add_option("--obj", obj, "Objective id, e.g. ackley:200")->required();
    run->add_option("--seed", seed, "Seed");
    run->add_option("--set", sets, "Override key=value (repeatable)");
    run->add_option("--out", out_dir, "Output directory");
    run->add_option("--jobs", jobs, "Worker threads (SMOOTHOPT_JOBS overrides)");

    std::string sum_dir;
    auto* sum = app.add_subcommand("summarize", "Summary table of the run records in a directory");
    sum->add_option("dir", sum_dir, "Directory with run records")->required();

    std::vector<std::string> calc_args;
    auto* calc = app.add_subcommand("calc-n", "Sample-size formulas (JSON file, inline JSON, or key=value list)");
    calc->add_option("params", calc_args, "Parameters")->required();

    try {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_config;
    }

    try {
        if (*bench)
            return run_config_command("bench", bench_cfg, jobs);
        if (*land)
            return run_config_command("landscape", land_cfg, jobs);
        if (*est)
            return run_config_command("estimator", est_cfg, jobs);
        if (*run) {
            json overrides = json::object();
            for (const auto& kv : sets) {
                auto [k, v] = parse_set(kv);
                overrides[k] = v;
            }
            const json cfg = {{"kind", "single_run"}, {"objectives", {obj}},       {"algorithms", {alg}},
                              {"seeds", {seed}},      {"overrides", overrides}, {"output_dir", out_dir}};
            const auto res = run_experiment(cfg, resolve_jobs(jobs), "bench");
            if (!res.summary.rows.empty()) {
                const auto& r = res.summary.rows.front();
                std::cout << "final_best_cost " << format_real(r.mean_final_cost) << "\nevals " << format_real(r.mean_evals) << "\n";
            }
            return report(res);
        }
        if (*sum) {
            const SummaryTable t = summarize(sum_dir);
            const std::string csv = summary_csv(t);
            write_text(fs::path(sum_dir) / "summary.csv", csv);
            std::cout << csv;
            for (const auto& [file, why] : t.skipped)
                std::cerr << "skipped " << file << ": " << why << "\n";
            return t.skipped.empty() ? exit_ok : exit_partial;
        }
        if (*calc) {
            std::cout << sample_size_json(calc_sample_size(sample_size_params(calc_n_input(calc_args)))).dump(2) << "\n";
            return exit_ok;
        }
    }
    catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    }
    catch (const ContractViolation& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return exit_config;
    }
    catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_partial;
    }
    return exit_config;
}
