#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "chords/config.hpp"
#include "chords/drift.hpp"
#include "chords/vec.hpp"

namespace chords {

// sqrt(mean of squared elementwise differences)
double latent_rmse(std::span<const double> a, std::span<const double> b);

// mean negative log-density of the samples under the mixture
double mixture_nll(const std::vector<Latent>& samples, const GaussianMixture& mix);

struct RunRow {
    int core = 0;  // 0 for single-output methods
    int sequential_passes = 0;
    long long total_evals = 0;
    double wall_ms = 0.0;
    double rmse_vs_reference = 0.0;
    double nominal_speedup = 1.0;
};

/**
 * Everything recorded about one seeded run: method identity, one row per
 * streamed output (a single row for single-output methods), and a digest
 * of the sequential reference latent the errors were measured against.
 */
struct RunRecord {
    std::string config_id;
    std::string method;
    std::string field_label;
    int N = 0;
    int K = 0;
    std::uint64_t seed = 0;
    std::vector<RunRow> rows;
    std::string reference_digest;
};

// Runs the configured method once per seed against the sequential
// reference. Deterministic: identical config and seed give identical
// records except for wall_ms.
std::vector<RunRecord> run_experiment(const RunConfig& config);

struct CurvePoint {
    int sequential_passes = 0;
    double l1_to_final = 0.0;
};

// One convergence curve per seed: for every streamed output, the mean
// absolute distance to core 1's final latent. Requires a chords config
// with fixed-core termination at core 1; the last point is (N, 0).
std::vector<std::vector<CurvePoint>> convergence_curve(const RunConfig& config);

// trapezoid area of a curve over sequential passes
double curve_area(const std::vector<CurvePoint>& curve);

struct SummaryRow {
    std::string config_id;
    std::string method;
    int K = 0;
    int N = 0;
    double mean_speedup = 0.0;
    double sd_speedup = 0.0;
    double mean_rmse = 0.0;
    double sd_rmse = 0.0;
};

// One summary row per config: mean and standard deviation over seeds of
// the terminating output's speedup (N / sequential_passes) and rmse.
std::vector<SummaryRow> summarize(const std::vector<std::vector<RunRecord>>& per_config);

void write_runs_csv(std::ostream& os, const std::vector<RunRecord>& records);
void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows);
void write_curve_csv(std::ostream& os, const std::string& config_id,
                     const std::vector<std::uint64_t>& seeds,
                     const std::vector<std::vector<CurvePoint>>& curves);

}  // namespace chords
