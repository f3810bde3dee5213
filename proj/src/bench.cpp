#include "chords/bench.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <ostream>
#include <stdexcept>

#include "chords/baselines.hpp"
#include "chords/engine.hpp"
#include "chords/grid.hpp"
#include "chords/schedule.hpp"

namespace chords {

double latent_rmse(std::span<const double> a, std::span<const double> b) {
    check_same_dim(a, b, "latent_rmse");
    return rms_diff(a, b);
}

double mixture_nll(const std::vector<Latent>& samples, const GaussianMixture& mix) {
    if (samples.empty()) {
        throw std::invalid_argument("mixture_nll: need at least one sample");
    }
    double acc = 0.0;
    for (const Latent& s : samples) acc -= mix.log_density(s);
    return acc / static_cast<double>(samples.size());
}

namespace {

std::string digest(std::span<const double> v) {
    std::uint64_t h = 0xCBF29CE484222325ull;  // FNV-1a over the raw bytes
    for (double d : v) {
        unsigned char bytes[sizeof(double)];
        std::memcpy(bytes, &d, sizeof(double));
        for (unsigned char b : bytes) {
            h ^= b;
            h *= 0x100000001B3ull;
        }
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
    return std::string(buf);
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
}

int method_cores(const RunConfig& config) {
    if (config.method == "chords") return config.cores;
    if (config.method == "picard") {
        return config.picard_window > 0 ? config.picard_window : config.cores;
    }
    if (config.method == "parareal") {
        return config.parareal_coarse > 0
                   ? config.parareal_coarse
                   : static_cast<int>(std::floor(std::sqrt(static_cast<double>(config.N))));
    }
    return 1;
}

}  // namespace

std::vector<RunRecord> run_experiment(const RunConfig& config) {
    DriftField field = build_field(config.field);
    TimeGrid grid = build_grid(config);
    const int N = grid.N;

    InitSequence seq;
    TerminationCriterion term;
    if (config.method == "chords") {
        seq = build_sequence(config, grid);
        term = build_termination(config, seq.cores());
    }

    std::vector<RunRecord> records;
    records.reserve(config.seeds.size());
    for (std::uint64_t seed : config.seeds) {
        Latent x0 = draw_x0(config, field.dim(), seed);
        BaselineResult reference = run_sequential(field, grid, x0);

        RunRecord rec;
        rec.config_id = config.id;
        rec.method = config.method;
        rec.field_label = field.label();
        rec.N = N;
        rec.K = method_cores(config);
        rec.seed = seed;
        rec.reference_digest = digest(reference.latent);

        if (config.method == "sequential") {
            RunRow row;
            row.core = 0;
            row.sequential_passes = reference.sequential_passes;
            row.total_evals = reference.total_evals;
            row.wall_ms = reference.wall_ms;
            row.rmse_vs_reference = 0.0;
            row.nominal_speedup = 1.0;
            rec.rows.push_back(row);
        } else if (config.method == "picard") {
            int P = config.picard_window > 0 ? config.picard_window : config.cores;
            BaselineResult r = run_picard_window(field, grid, x0, P, config.picard_tol);
            RunRow row;
            row.core = 0;
            row.sequential_passes = r.sequential_passes;
            row.total_evals = r.total_evals;
            row.wall_ms = r.wall_ms;
            row.rmse_vs_reference = latent_rmse(r.latent, reference.latent);
            row.nominal_speedup =
                static_cast<double>(N) / static_cast<double>(r.sequential_passes);
            rec.rows.push_back(row);
        } else if (config.method == "parareal") {
            int M = rec.K;
            int J = config.parareal_iters > 0 ? config.parareal_iters : M;
            BaselineResult r = run_parareal(field, grid, x0, M, J);
            RunRow row;
            row.core = 0;
            row.sequential_passes = r.sequential_passes;
            row.total_evals = r.total_evals;
            row.wall_ms = r.wall_ms;
            row.rmse_vs_reference = latent_rmse(r.latent, reference.latent);
            row.nominal_speedup =
                static_cast<double>(N) / static_cast<double>(r.sequential_passes);
            rec.rows.push_back(row);
        } else {
            ChordsResult r = run_chords(field, grid, seq, x0, term, select_executor(config));
            for (const StreamedOutput& out : r.outputs) {
                RunRow row;
                row.core = out.core;
                row.sequential_passes = out.sequential_passes;
                long long evals = 0;  // cumulative across cores at the emission step
                for (int k = 1; k <= seq.cores(); ++k) {
                    int fs = N - seq.at(k) + k - 1;
                    evals += std::min(out.global_step, fs);
                }
                row.total_evals = evals;
                row.wall_ms = out.wall_ms;
                row.rmse_vs_reference = latent_rmse(out.latent, reference.latent);
                row.nominal_speedup = nominal_speedup(grid, seq, out.core);
                rec.rows.push_back(row);
            }
        }
        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<std::vector<CurvePoint>> convergence_curve(const RunConfig& config) {
    if (config.method != "chords") {
        throw ConfigError("$.method", "convergence curves are defined for the chords method");
    }
    if (config.term_mode != TerminationCriterion::Mode::fixed_core ||
        (config.target_core != 0 && config.target_core != 1)) {
        throw ConfigError("$.termination",
                          "convergence curves need fixed-core termination at core 1");
    }
    DriftField field = build_field(config.field);
    TimeGrid grid = build_grid(config);
    InitSequence seq = build_sequence(config, grid);
    TerminationCriterion term = TerminationCriterion::fixed_core_mode(1);

    std::vector<std::vector<CurvePoint>> curves;
    curves.reserve(config.seeds.size());
    for (std::uint64_t seed : config.seeds) {
        Latent x0 = draw_x0(config, field.dim(), seed);
        ChordsResult r = run_chords(field, grid, seq, x0, term, select_executor(config));
        const Latent& final_latent = r.outputs.back().latent;
        std::vector<CurvePoint> curve;
        curve.reserve(r.outputs.size());
        for (const StreamedOutput& out : r.outputs) {
            curve.push_back({out.sequential_passes, mean_abs_diff(out.latent, final_latent)});
        }
        curves.push_back(std::move(curve));
    }
    return curves;
}

double curve_area(const std::vector<CurvePoint>& curve) {
    double area = 0.0;
    for (std::size_t i = 1; i < curve.size(); ++i) {
        double w = static_cast<double>(curve[i].sequential_passes -
                                       curve[i - 1].sequential_passes);
        area += 0.5 * w * (curve[i].l1_to_final + curve[i - 1].l1_to_final);
    }
    return area;
}

std::vector<SummaryRow> summarize(const std::vector<std::vector<RunRecord>>& per_config) {
    std::vector<SummaryRow> out;
    for (const auto& records : per_config) {
        if (records.empty()) continue;
        SummaryRow row;
        row.config_id = records.front().config_id;
        row.method = records.front().method;
        row.K = records.front().K;
        row.N = records.front().N;
        std::vector<double> speedups;
        std::vector<double> rmses;
        for (const RunRecord& rec : records) {
            if (rec.rows.empty()) continue;
            const RunRow& last = rec.rows.back();  // the terminating output
            speedups.push_back(static_cast<double>(rec.N) /
                               static_cast<double>(last.sequential_passes));
            rmses.push_back(last.rmse_vs_reference);
        }
        auto mean_sd = [](const std::vector<double>& v) {
            double m = 0.0;
            for (double x : v) m += x;
            m /= static_cast<double>(v.size());
            double s2 = 0.0;
            for (double x : v) s2 += (x - m) * (x - m);
            double sd = v.size() > 1 ? std::sqrt(s2 / static_cast<double>(v.size() - 1)) : 0.0;
            return std::pair<double, double>(m, sd);
        };
        auto [ms, ss] = mean_sd(speedups);
        auto [mr, sr] = mean_sd(rmses);
        row.mean_speedup = ms;
        row.sd_speedup = ss;
        row.mean_rmse = mr;
        row.sd_rmse = sr;
        out.push_back(std::move(row));
    }
    return out;
}

void write_runs_csv(std::ostream& os, const std::vector<RunRecord>& records) {
    os << "method,field,N,K,seed,core,sequential_passes,total_evals,wall_ms,rmse,"
          "nominal_speedup\n";
    for (const RunRecord& rec : records) {
        for (const RunRow& row : rec.rows) {
            char wall[32];
            std::snprintf(wall, sizeof(wall), "%.3f", row.wall_ms);
            os << rec.method << ',' << rec.field_label << ',' << rec.N << ',' << rec.K << ','
               << rec.seed << ',' << row.core << ',' << row.sequential_passes << ','
               << row.total_evals << ',' << wall << ',' << format_double(row.rmse_vs_reference)
               << ',' << format_double(row.nominal_speedup) << '\n';
        }
    }
}

void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
    os << "config_id,method,K,N,mean_speedup,sd_speedup,mean_rmse,sd_rmse\n";
    for (const SummaryRow& row : rows) {
        os << row.config_id << ',' << row.method << ',' << row.K << ',' << row.N << ','
           << format_double(row.mean_speedup) << ',' << format_double(row.sd_speedup) << ','
           << format_double(row.mean_rmse) << ',' << format_double(row.sd_rmse) << '\n';
    }
}

void write_curve_csv(std::ostream& os, const std::string& config_id,
                     const std::vector<std::uint64_t>& seeds,
                     const std::vector<std::vector<CurvePoint>>& curves) {
    os << "config_id,seed,sequential_passes,l1_to_final\n";
    for (std::size_t i = 0; i < curves.size(); ++i) {
        for (const CurvePoint& p : curves[i]) {
            os << config_id << ',' << seeds[i] << ',' << p.sequential_passes << ','
               << format_double(p.l1_to_final) << '\n';
        }
    }
}

}  // namespace chords
