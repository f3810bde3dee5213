#pragma once

#include <span>
#include <utility>
#include <vector>

#include "chords/drift.hpp"
#include "chords/grid.hpp"
#include "chords/vec.hpp"

namespace chords {

/**
 * Per-core solver state. x is the working latent; x_prev the latent this
 * core held at the grid index where the next rectification will anchor,
 * anchor_drift the drift evaluated there (cached from the core's own
 * following step, so rectification never costs an extra evaluation).
 */
struct CoreState {
    int k = 0;
    Latent x;
    Latent x_prev;
    Latent anchor_drift;
    int anchor_index = 0;
    bool anchor_drift_pending = true;
    bool finished = false;
};

// One early-exit sample, streamed when a core reaches t = 1.
struct StreamedOutput {
    int core = 0;
    int global_step = 0;
    int sequential_passes = 0;  // N - i_k + k - 1
    Latent latent;
    double wall_ms = 0.0;
    bool is_final = false;  // core 1, the exact output
};

struct TerminationCriterion {
    enum class Mode { fixed_core, residual };
    Mode mode = Mode::fixed_core;
    int target_core = 1;  // fixed_core: stop once this core has emitted
    double tau = 1e-3;    // residual: stop once consecutive emissions agree to this relative RMS

    static TerminationCriterion fixed_core_mode(int core) {
        return {Mode::fixed_core, core, 0.0};
    }
    static TerminationCriterion residual_mode(double tau) {
        return {Mode::residual, 1, tau};
    }
};

enum class Executor {
    reference,  // single worker, cores iterated within each step
    parallel,   // one worker per core, barrier per step
    verify,     // run both and require bit-identical streams
};

// Grid indices (cur, next) that core k integrates across at the given
// global step: the init-phase jump (i_step, i_{step+1}) while step < k,
// then (i_k + step - k, i_k + step - k + 1).
std::pair<int, int> scheduler(int N, int step, int k, const InitSequence& seq);

// Whether core k receives a rectification at this global step: always
// during its init phase (both rectify inputs coincide there, keeping the
// anchor advancing at zero cost), afterwards every i_k - i_{k-1} steps,
// when core k-1 reaches the fast core's previous anchor.
bool communicate(int step, int k, const InitSequence& seq);

struct ChordsResult {
    std::vector<StreamedOutput> outputs;  // ordered by emission step
    EvalCounter evals;
    int steps_executed = 0;
};

/**
 * The multi-core hierarchical rectification sampler. Every active core
 * advances one solver step per global step (exactly one drift evaluation
 * each, published for the next core's rectification the same step);
 * outputs stream as cores hit t = 1, most aggressive first, and core 1's
 * output is bit-identical to the plain sequential solve.
 */
ChordsResult run_chords(const DriftField& field, const TimeGrid& grid, const InitSequence& seq,
                        std::span<const double> x0, const TerminationCriterion& term,
                        Executor executor = Executor::reference);

namespace hooks {
// Fault-injection switch used by the self-check command's negative
// control; shifts the communication schedule by one step.
extern bool communicate_off_by_one;
}  // namespace hooks

}  // namespace chords
