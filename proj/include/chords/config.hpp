#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "chords/drift.hpp"
#include "chords/engine.hpp"
#include "chords/grid.hpp"
#include "chords/vec.hpp"

namespace chords {

// Configuration problem, carrying the JSON path of the offending node.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string path, const std::string& message)
        : std::runtime_error(path + ": " + message), path_(std::move(path)) {}

    const std::string& path() const { return path_; }

private:
    std::string path_;
};

struct CoefSpec {
    std::string kind = "const";  // const | linear (a + b * t)
    double value = 0.0;
    double a = 0.0;
    double b = 0.0;
};

struct FieldSpec {
    std::string kind = "linear";  // linear | mlp | gmm_flow | pf_ode
    // linear
    double lambda = 1.0;
    int dim = 1;
    // mlp
    std::uint64_t seed = 0;
    int width = 32;
    int depth = 2;
    // gmm_flow
    std::optional<GaussianMixture> mixture;  // defaults to the ring preset
    // pf_ode
    CoefSpec f_coef;
    CoefSpec g_coef;
    std::shared_ptr<FieldSpec> eps;
};

struct SequenceSpec {
    std::string kind = "paper_default";  // paper_default | optimal | uniform | explicit
    double speedup = 0.0;
    std::vector<int> indices;
};

/**
 * One experiment description: field, grid, method with its parameters,
 * initialization sequence, termination rule, seeds, and output options.
 * Parsed strictly: unknown keys are rejected with their JSON path.
 */
struct RunConfig {
    std::string id;
    std::string method = "sequential";  // sequential | picard | parareal | chords
    FieldSpec field;
    int N = 50;
    std::optional<std::vector<double>> times;  // explicit non-uniform grid
    SequenceSpec sequence;
    int cores = 4;
    int picard_window = 0;  // 0: defaults to cores
    double picard_tol = 1e-3;
    int parareal_coarse = 0;  // 0: defaults to floor(sqrt(N))
    int parareal_iters = 0;   // 0: defaults to coarse_points
    TerminationCriterion::Mode term_mode = TerminationCriterion::Mode::fixed_core;
    int target_core = 0;  // 0: defaults to K
    double tau = 1e-3;
    std::vector<std::uint64_t> seeds{0};
    std::string x0_kind = "gauss";  // gauss | ones | explicit
    Latent x0_values;
    std::string out_dir = "out";
    int workers = 0;  // 0: one worker per core; 1: reference executor
    bool verify_executors = false;
};

// Strict parsers; both throw ConfigError with the offending path.
RunConfig parse_run_config(const std::string& json_text);
std::vector<RunConfig> parse_sweep_config(const std::string& json_text);

RunConfig load_run_config(const std::string& path);
std::vector<RunConfig> load_sweep_config(const std::string& path);

// Builders from validated specs.
DriftField build_field(const FieldSpec& spec);
TimeGrid build_grid(const RunConfig& config);
InitSequence build_sequence(const RunConfig& config, const TimeGrid& grid);
TerminationCriterion build_termination(const RunConfig& config, int K);
Latent draw_x0(const RunConfig& config, int dim, std::uint64_t seed);
Executor select_executor(const RunConfig& config);

}  // namespace chords
