#pragma once

#include <span>

#include "chords/drift.hpp"
#include "chords/vec.hpp"

namespace chords {

// One solver step: the latent increment plus the drift evaluation it
// consumed, retained so downstream cores can reuse the value.
struct StepDelta {
    Latent delta;
    Latent drift_value;
};

// First-order (Euler / DDIM-form) step: delta = (t_next - t) * f(x, t).
// Costs exactly one field evaluation.
StepDelta euler_step(const DriftField& field, std::span<const double> x, double t, double t_next);

/**
 * Rectification increment
 *
 *   delta_t * (f_acc - f_coarse) + (x_acc - x_coarse)
 *
 * applied to a fast core's latent using a slower core's accurate latent
 * at a shared past time. Drift values are caller-supplied precomputed,
 * so rectification consumes no field evaluations.
 */
Latent rectify(std::span<const double> x_acc, std::span<const double> x_coarse,
               std::span<const double> f_acc, std::span<const double> f_coarse,
               double delta_t);

}  // namespace chords
