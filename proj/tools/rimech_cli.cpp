// Command line front end: run one scenario, a directory suite, or summarize
// previously written result files.
//
//   rimech run <config.json>   [--out DIR] [--tol-scale S] [--threads N] [--seed K]
//   rimech suite <dir>         [--out DIR] [--tol-scale S] [--threads N] [--seed K]
//   rimech report <results-dir>
//
// The RI_MECH_OUT environment variable overrides --out when set.  Exit code
// 0 means everything passed, 1 means a scenario or criterion failed, 2 means
// the configuration itself was rejected.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rimech/errors.hpp"
#include "rimech/scenario.hpp"

namespace fs = std::filesystem;
using rimech::Error;
using rimech::ErrorKind;
using rimech::RunContext;
using rimech::RunResult;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFailed = 1;
constexpr int kExitConfig = 2;

bool is_config_error(ErrorKind k) {
    return k == ErrorKind::parse_error || k == ErrorKind::schema_error;
}

void print_result(const RunResult& r) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name;
    if (!r.message.empty()) std::cout << "  (" << r.message << ")";
    std::cout << "\n";
    for (const auto& [key, value] : r.metrics)
        std::cout << "    " << key << " = " << value << "\n";
    for (const auto& file : r.csv_files) std::cout << "    wrote " << file << "\n";
    if (!r.criteria.empty()) {
        const rimech::InvariantReport rep = rimech::invariant_report({r});
        std::cout << rep.table;
    }
}

RunContext make_context(const std::string& out, double tol_scale, int threads,
                        std::uint64_t seed) {
    RunContext ctx;
    ctx.out_dir = out;
    if (const char* env = std::getenv("RI_MECH_OUT"); env && *env) ctx.out_dir = env;
    ctx.tol_scale = tol_scale;
    ctx.threads = threads;
    ctx.seed = seed;
    return ctx;
}

int cmd_run(const std::string& path, const RunContext& ctx) {
    const rimech::ScenarioConfig cfg = rimech::load_scenario(path);
    const RunResult result = rimech::run_scenario(cfg, ctx);
    print_result(result);
    return result.passed ? kExitPass : kExitFailed;
}

int cmd_suite(const std::string& dir, const RunContext& ctx) {
    std::vector<fs::path> files;
    if (!fs::is_directory(dir)) {
        std::cerr << "error: '" << dir << "' is not a directory\n";
        return kExitConfig;
    }
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".json")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) {
        std::cerr << "error: no .json scenario files in '" << dir << "'\n";
        return kExitConfig;
    }

    // Each worker owns one scenario at a time; a scenario never shares its
    // output files with another, so the pool needs no locking beyond the
    // work index and the shared flags.
    std::vector<RunResult> results(files.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> config_trouble{false};
    std::mutex io;

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= files.size()) return;
            RunResult r;
            try {
                const rimech::ScenarioConfig cfg = rimech::load_scenario(files[i].string());
                r = rimech::run_scenario(cfg, ctx);
            } catch (const Error& e) {
                if (is_config_error(e.kind())) config_trouble = true;
                r.name = files[i].stem().string();
                r.passed = false;
                r.message = e.what();
            } catch (const std::exception& e) {
                r.name = files[i].stem().string();
                r.passed = false;
                r.message = e.what();
            }
            {
                std::lock_guard<std::mutex> lock(io);
                print_result(r);
            }
            results[i] = std::move(r);
        }
    };

    const int n_threads = std::max(1, ctx.threads);
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    const rimech::InvariantReport report = rimech::invariant_report(results);
    if (!report.table.empty()) std::cout << report.table;
    std::cout << (report.all_passed ? "suite: all scenarios passed\n" : "suite: FAILURES\n");
    if (config_trouble) return kExitConfig;
    return report.all_passed ? kExitPass : kExitFailed;
}

int cmd_report(const std::string& dir) {
    std::vector<fs::path> files;
    if (!fs::is_directory(dir)) {
        std::cerr << "error: '" << dir << "' is not a directory\n";
        return kExitConfig;
    }
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (entry.is_regular_file() && name.size() > 12 &&
            name.substr(name.size() - 12) == ".result.json")
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());

    std::vector<RunResult> results;
    for (const auto& path : files) {
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            std::cerr << "error: cannot open '" << path.string() << "'\n";
            return kExitConfig;
        }
        try {
            results.push_back(rimech::result_from_json(nlohmann::json::parse(in)));
        } catch (const nlohmann::json::exception& e) {
            std::cerr << "error: '" << path.string() << "': " << e.what() << "\n";
            return kExitConfig;
        }
    }

    const rimech::InvariantReport report = rimech::invariant_report(results);
    std::cout << "results read: " << results.size() << "\n";
    if (!report.table.empty()) std::cout << report.table;
    std::cout << (report.all_passed ? "report: all passed\n" : "report: FAILURES\n");
    return report.all_passed ? kExitPass : kExitFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"reparametrization-invariant mechanics scenario runner"};
    app.require_subcommand(1);

    std::string out_dir = ".";
    double tol_scale = 1.0;
    int threads = 1;
    std::uint64_t seed = 0;

    std::string run_path;
    CLI::App* run = app.add_subcommand("run", "run a single scenario config");
    run->add_option("config", run_path, "path to a scenario .json file")->required();

    std::string suite_dir;
    CLI::App* suite = app.add_subcommand("suite", "run every scenario .json in a directory");
    suite->add_option("dir", suite_dir, "directory of scenario configs")->required();

    std::string report_dir;
    CLI::App* report = app.add_subcommand("report", "summarize *.result.json files");
    report->add_option("dir", report_dir, "directory of result files")->required();

    for (CLI::App* sub : {run, suite}) {
        sub->add_option("--out", out_dir, "output directory (RI_MECH_OUT overrides)");
        sub->add_option("--tol-scale", tol_scale, "scale factor on every tolerance")
            ->check(CLI::PositiveNumber);
        sub->add_option("--threads", threads, "scenario worker count")
            ->check(CLI::Range(1, 64));
        sub->add_option("--seed", seed, "seed for randomized probe states");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? kExitPass : kExitConfig;
    }

    try {
        if (run->parsed()) return cmd_run(run_path, make_context(out_dir, tol_scale, threads, seed));
        if (suite->parsed())
            return cmd_suite(suite_dir, make_context(out_dir, tol_scale, threads, seed));
        return cmd_report(report_dir);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return is_config_error(e.kind()) ? kExitConfig : kExitFailed;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailed;
    }
}
