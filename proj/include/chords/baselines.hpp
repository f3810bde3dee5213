#pragma once

#include <optional>
#include <span>
#include <vector>

#include "chords/drift.hpp"
#include "chords/grid.hpp"
#include "chords/vec.hpp"

namespace chords {

struct BaselineResult {
    Latent latent;
    int sequential_passes = 0;  // parallel-iteration depth
    long long total_evals = 0;
    double wall_ms = 0.0;
    std::optional<std::vector<Latent>> per_iteration_latents;  // parareal only
};

// Plain N-step first-order solve; the accuracy oracle for everything else.
BaselineResult run_sequential(const DriftField& field, const TimeGrid& grid,
                              std::span<const double> x0);

/**
 * Sliding-window fixed-point iteration over P consecutive grid points.
 * Each parallel iteration re-evaluates the drift at every window point
 * (one sequential pass, P evaluations) and slides past leading points
 * whose update changed by relative RMS <= tol.
 */
BaselineResult run_picard_window(const DriftField& field, const TimeGrid& grid,
                                 std::span<const double> x0, int window, double tol);

/**
 * Two-level parareal over M coarse intervals: one-step coarse propagator,
 * sequential fine propagator per interval, pipelined so an iteration
 * starts as soon as its dependencies exist. After M iterations the result
 * equals the sequential solve. sequential_passes reports the pipelined
 * critical path in drift evaluations.
 */
BaselineResult run_parareal(const DriftField& field, const TimeGrid& grid,
                            std::span<const double> x0, int coarse_points, int max_iters);

}  // namespace chords
