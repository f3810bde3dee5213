#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "chords/baselines.hpp"
#include "chords/bench.hpp"
#include "chords/config.hpp"
#include "chords/engine.hpp"
#include "chords/rng.hpp"
#include "chords/schedule.hpp"
#include "chords/stepper.hpp"
#include "chords/vec.hpp"

namespace fs = std::filesystem;
using namespace chords;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

std::string resolve_out_dir(const std::string& flag_value, const std::string& config_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("CHORDS_OUT_DIR"); env && *env) return env;
    return config_value;
}

void apply_worker_override(RunConfig& config, int workers_flag) {
    if (workers_flag >= 0) config.workers = workers_flag;
}

std::ofstream open_output(const fs::path& dir, const std::string& name) {
    fs::create_directories(dir);
    std::ofstream out(dir / name);
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    return out;
}

std::vector<double> parse_comma_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t pos = 0;
        double v = std::stod(item, &pos);
        while (pos < item.size() && std::isspace(static_cast<unsigned char>(item[pos]))) ++pos;
        if (pos != item.size()) throw std::invalid_argument("malformed number: " + item);
        out.push_back(v);
    }
    if (out.empty()) throw std::invalid_argument("empty sequence");
    return out;
}

int cmd_run(const std::string& config_path, const std::string& out_flag, int workers_flag) {
    RunConfig config = load_run_config(config_path);
    apply_worker_override(config, workers_flag);
    std::string out_dir = resolve_out_dir(out_flag, config.out_dir);

    std::vector<RunRecord> records = run_experiment(config);

    auto runs = open_output(out_dir, "runs.csv");
    write_runs_csv(runs, records);

    auto rows = summarize({records});
    auto summary = open_output(out_dir, "summary.json");
    summary << "{\n";
    if (!rows.empty()) {
        const SummaryRow& r = rows.front();
        char buf[256];
        std::snprintf(buf, sizeof(buf),
                      "  \"method\": \"%s\",\n  \"K\": %d,\n  \"N\": %d,\n"
                      "  \"seeds\": %zu,\n  \"mean_speedup\": %.17g,\n"
                      "  \"sd_speedup\": %.17g,\n  \"mean_rmse\": %.17g,\n"
                      "  \"sd_rmse\": %.17g\n",
                      r.method.c_str(), r.K, r.N, records.size(), r.mean_speedup, r.sd_speedup,
                      r.mean_rmse, r.sd_rmse);
        summary << buf;
    }
    summary << "}\n";

    std::size_t total_rows = 0;
    for (const auto& rec : records) total_rows += rec.rows.size();
    std::cout << "wrote " << total_rows << " rows over " << records.size() << " seed(s) to "
              << (fs::path(out_dir) / "runs.csv").string() << "\n";
    return kExitOk;
}

int cmd_sweep(const std::string& config_path, const std::string& out_flag, int workers_flag) {
    std::vector<RunConfig> configs = load_sweep_config(config_path);
    std::string out_dir = resolve_out_dir(out_flag, configs.front().out_dir);

    std::vector<RunRecord> all_records;
    std::vector<std::vector<RunRecord>> per_config;
    for (RunConfig& config : configs) {
        apply_worker_override(config, workers_flag);
        per_config.push_back(run_experiment(config));
        for (const auto& rec : per_config.back()) all_records.push_back(rec);
    }

    auto runs = open_output(out_dir, "runs.csv");
    write_runs_csv(runs, all_records);
    auto summary = open_output(out_dir, "summary.csv");
    write_summary_csv(summary, summarize(per_config));

    std::cout << "swept " << configs.size() << " configs into "
              << (fs::path(out_dir) / "summary.csv").string() << "\n";
    return kExitOk;
}

int cmd_curve(const std::string& config_path, const std::string& out_flag, int workers_flag) {
    RunConfig config = load_run_config(config_path);
    apply_worker_override(config, workers_flag);
    std::string out_dir = resolve_out_dir(out_flag, config.out_dir);

    auto curves = convergence_curve(config);
    auto out = open_output(out_dir, "curve.csv");
    std::string id = config.id.empty() ? "0" : config.id;
    write_curve_csv(out, id, config.seeds, curves);
    std::cout << "wrote " << curves.size() << " curve(s) to "
              << (fs::path(out_dir) / "curve.csv").string() << "\n";
    return kExitOk;
}

int cmd_optimal_seq(double speedup, int cores, int steps) {
    ContinuousInitSequence cont = optimal_continuous_sequence(speedup, cores);
    std::cout << "continuous:";
    for (double t : cont.starts) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), " %.12g", t);
        std::cout << buf;
    }
    std::cout << "\n";
    if (steps > 0) {
        InitSequence seq = discretize_sequence(cont, uniform_grid(steps));
        std::cout << "indices (N=" << steps << "):";
        for (int i : seq.indices) std::cout << ' ' << i;
        std::cout << "\n";
    }
    return kExitOk;
}

int cmd_reward(const std::string& sequence_text, bool single_jump) {
    std::vector<double> starts = parse_comma_list(sequence_text);
    ContinuousInitSequence seq(starts);
    InitStyle style = single_jump ? InitStyle::single_jump : InitStyle::chained_jumps;
    RewardTrace trace = reward(seq, style);
    char buf[128];
    std::snprintf(buf, sizeof(buf), "R = %.12g\nS = %.12g\n", trace.reward,
                  continuous_speedup(seq));
    std::cout << buf;
    return kExitOk;
}

// ---------------------------------------------------------------------------
// verify: fast self-checks, one named line each
// ---------------------------------------------------------------------------

struct Check {
    std::string name;
    bool ok = true;
    std::string detail;
};

Check check_communicate_schedule() {
    Check c{"communicate-schedule"};
    struct Case {
        int N;
        std::vector<int> idx;
    };
    for (const Case& tc : {Case{50, {0, 8}}, Case{50, {0, 8, 16, 32}},
                           Case{50, {0, 2, 4, 8, 16, 24, 32, 40}}, Case{30, {0, 3, 9, 21}}}) {
        InitSequence seq(tc.idx);
        int K = seq.cores();
        for (int k = 2; k <= K && c.ok; ++k) {
            int g = seq.at(k) - seq.at(k - 1);
            int finish = tc.N - seq.at(k) + k - 1;
            for (int step = 1; step <= finish && c.ok; ++step) {
                // expected: init steps, then the steps where the upstream
                // core sits g, 2g, ... past its own start
                bool expected = step <= k - 1;
                if (!expected && step >= k) {
                    auto [cur, next] = scheduler(tc.N, step, k - 1, seq);
                    (void)next;
                    int off = cur - seq.at(k - 1);
                    expected = off > 0 && off % g == 0;
                }
                if (communicate(step, k, seq) != expected) {
                    c.ok = false;
                    c.detail = "mismatch at N=" + std::to_string(tc.N) + " k=" +
                               std::to_string(k) + " step=" + std::to_string(step);
                }
            }
        }
    }
    return c;
}

Check check_exactness() {
    Check c{"exactness"};
    std::vector<DriftField> fields;
    fields.push_back(linear_field(1.0, 3));
    fields.push_back(mlp_field(7, 8, 16, 2));
    fields.push_back(gmm_flow_field(ring_mixture()));
    for (const DriftField& field : fields) {
        TimeGrid grid = uniform_grid(50);
        for (int K : {4, 8}) {
            InitSequence seq = default_sequence(K, 50);
            SplitMix64 rng(91 + static_cast<std::uint64_t>(K));
            Latent x0(static_cast<std::size_t>(field.dim()));
            for (double& v : x0) v = rng.next_normal();
            BaselineResult ref = run_sequential(field, grid, x0);
            ChordsResult res = run_chords(field, grid, seq, x0,
                                          TerminationCriterion::fixed_core_mode(1),
                                          Executor::reference);
            if (res.outputs.back().latent != ref.latent) {
                c.ok = false;
                c.detail = "core-1 mismatch on " + field.label();
            }
        }
    }
    return c;
}

Check check_order_of_accuracy() {
    Check c{"order-of-accuracy"};
    DriftField f = mlp_field(2024, 8, 24, 2);
    SplitMix64 rng(5);
    Latent x(8), u(8);
    for (double& v : x) v = rng.next_normal();
    for (double& v : u) v = rng.next_normal();
    double nu = norm2(u);
    for (double& v : u) v /= nu;
    double t = 0.3, eps = 1e-2;
    Latent xp = x;
    add_scaled(xp, eps, u);

    auto rk4 = [&](Latent y, double t0, double t1) {
        int m = 128;
        double h = (t1 - t0) / m;
        Latent k1(8), k2(8), k3(8), k4(8), tmp(8);
        for (int i = 0; i < m; ++i) {
            double ti = t0 + i * h;
            f.eval_into(y, ti, k1);
            for (int d = 0; d < 8; ++d) tmp[d] = y[d] + 0.5 * h * k1[d];
            f.eval_into(tmp, ti + 0.5 * h, k2);
            for (int d = 0; d < 8; ++d) tmp[d] = y[d] + 0.5 * h * k2[d];
            f.eval_into(tmp, ti + 0.5 * h, k3);
            for (int d = 0; d < 8; ++d) tmp[d] = y[d] + h * k3[d];
            f.eval_into(tmp, ti + h, k4);
            for (int d = 0; d < 8; ++d) y[d] += h / 6.0 * (k1[d] + 2 * k2[d] + 2 * k3[d] + k4[d]);
        }
        return y;
    };
    std::vector<double> ld, lr;
    for (double delta : {1e-1, 1e-2, 1e-3}) {
        Latent acc = rk4(x, t, t + delta);
        Latent per = rk4(xp, t, t + delta);
        Latent corr = rectify(x, xp, f(x, t), f(xp, t), delta);
        Latent fixed = per;
        add_scaled(fixed, 1.0, corr);
        double unrect = rms_diff(per, acc);
        double rect_err = rms_diff(fixed, acc);
        if (!(rect_err < unrect)) {
            c.ok = false;
            c.detail = "rectified error not smaller at delta=" + std::to_string(delta);
        }
        ld.push_back(std::log(delta));
        lr.push_back(std::log(rect_err));
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < ld.size(); ++i) {
        mx += ld[i];
        my += lr[i];
    }
    mx /= static_cast<double>(ld.size());
    my /= static_cast<double>(ld.size());
    double num = 0, den = 0;
    for (std::size_t i = 0; i < ld.size(); ++i) {
        num += (ld[i] - mx) * (lr[i] - my);
        den += (ld[i] - mx) * (ld[i] - mx);
    }
    if (!(num / den >= 1.9)) {
        c.ok = false;
        c.detail = "slope " + std::to_string(num / den) + " below 1.9";
    }
    return c;
}

Check check_optimum_oracle() {
    Check c{"optimum-oracle"};
    for (double s : {2.0, 2.5, 3.0, 4.0}) {
        double t_last = (s - 1.0) / s;
        double closed = (s <= 3.0) ? t_last / 2.0 : 2.0 * t_last - 1.0;
        double bf = brute_force_optimal_mid(s, 600);
        if (std::abs(bf - closed) > t_last / 601.0 + 1e-12) {
            c.ok = false;
            c.detail = "argmax mismatch at s=" + std::to_string(s);
        }
    }
    return c;
}

Check check_reward_closed_form() {
    Check c{"reward-closed-form"};
    if (reward(ContinuousInitSequence({0.0})).reward != 1.0) {
        c.ok = false;
        c.detail = "single-core reward is not exactly 1";
        return c;
    }
    double t = 0.2;
    RewardTrace tr = reward(ContinuousInitSequence({0.0, t}));
    const auto& pts = tr.per_core_trajectories[1];
    for (int k = 1; k <= 5; ++k) {
        double want = std::exp(k * t) - std::pow(std::exp(t) - t - 1.0, k);
        bool found = false;
        for (const auto& [tm, v] : pts) {
            if (std::abs(tm - k * t) < 1e-9 && std::abs(v - want) <= 1e-12 * want) found = true;
        }
        if (!found) {
            c.ok = false;
            c.detail = "two-core value off at k=" + std::to_string(k);
        }
    }
    return c;
}

int cmd_verify() {
    using Clock = std::chrono::steady_clock;
    int failures = 0;
    const std::pair<const char*, Check (*)()> checks[] = {
        {"communicate-schedule", check_communicate_schedule},
        {"exactness", check_exactness},
        {"order-of-accuracy", check_order_of_accuracy},
        {"optimum-oracle", check_optimum_oracle},
        {"reward-closed-form", check_reward_closed_form},
    };
    for (const auto& [name, fn] : checks) {
        auto t0 = Clock::now();
        Check c;
        try {
            c = fn();
        } catch (const std::exception& e) {
            c.name = name;
            c.ok = false;
            c.detail = e.what();
        }
        double secs = std::chrono::duration<double>(Clock::now() - t0).count();
        char buf[64];
        std::snprintf(buf, sizeof(buf), " (%.2fs)", secs);
        std::cout << (c.ok ? "[PASS] " : "[FAIL] ") << c.name << buf;
        if (!c.ok) std::cout << " - " << c.detail;
        std::cout << "\n";
        if (!c.ok) ++failures;
    }
    return failures == 0 ? kExitOk : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
    if (const char* fault = std::getenv("CHORDS_FAULT"); fault &&
        std::string(fault) == "communicate-off-by-one") {
        hooks::communicate_off_by_one = true;
    }

    CLI::App app{"parallel-in-time ODE solver laboratory"};
    app.require_subcommand(1);

    std::string config_path, out_dir, sequence_text;
    int workers = -1;
    double speedup = 1.0;
    int cores = 1;
    int steps = 0;
    bool single_jump = false;

    auto* run = app.add_subcommand("run", "execute one configured experiment");
    run->add_option("--config", config_path, "JSON run config")->required();
    run->add_option("--out", out_dir, "output directory (overrides config and env)");
    run->add_option("--workers", workers, "worker count; 1 forces the reference executor");

    auto* sweep = app.add_subcommand("sweep", "execute a list of configs and summarize");
    sweep->add_option("--config", config_path, "JSON array of run configs")->required();
    sweep->add_option("--out", out_dir, "output directory");
    sweep->add_option("--workers", workers, "worker count override");

    auto* curve = app.add_subcommand("curve", "emit streamed convergence curves");
    curve->add_option("--config", config_path, "JSON run config (fixed-core 1)")->required();
    curve->add_option("--out", out_dir, "output directory");
    curve->add_option("--workers", workers, "worker count override");

    auto* opt = app.add_subcommand("optimal-seq", "print the reward-optimal start times");
    opt->add_option("--speedup", speedup, "target speedup ratio")->required();
    opt->add_option("--cores", cores, "number of cores")->required();
    opt->add_option("--steps", steps, "also print the discretization for this N");

    auto* rew = app.add_subcommand("reward", "evaluate the surrogate reward of a sequence");
    rew->add_option("--sequence", sequence_text, "comma-separated start times, first 0")
        ->required();
    rew->add_flag("--single-jump-init", single_jump,
                  "initialize cores with one jump from t = 0 instead of chained jumps");

    auto* ver = app.add_subcommand("verify", "run the fast self-check suite");
    (void)ver;

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (run->parsed()) return cmd_run(config_path, out_dir, workers);
        if (sweep->parsed()) return cmd_sweep(config_path, out_dir, workers);
        if (curve->parsed()) return cmd_curve(config_path, out_dir, workers);
        if (opt->parsed()) return cmd_optimal_seq(speedup, cores, steps);
        if (rew->parsed()) return cmd_reward(sequence_text, single_jump);
        if (ver->parsed()) return cmd_verify();
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid argument: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitConfig;
}
