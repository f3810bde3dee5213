#pragma once

#include <utility>
#include <vector>

#include "chords/grid.hpp"

namespace chords {

/**
 * Result of the exact reward evaluation for f(x, t) = x, x_0 = 1.
 *
 * final_value is the fastest core's value at t = 1 and reward its natural
 * log. per_core_trajectories holds, for each core, the (time, value)
 * event points of its piecewise-exponential trajectory: the start point,
 * every post-rectification value, and the value at t = 1.
 */
struct RewardTrace {
    double final_value = 0.0;
    double reward = 0.0;
    std::vector<std::vector<std::pair<double, double>>> per_core_trajectories;
};

// How a core obtains its start value in the reward evaluation: chained
// first-order jumps through every earlier start time (the default), or a
// single jump from t = 0.
enum class InitStyle { chained_jumps, single_jump };

/**
 * Fast-to-slow recursion for the start times at a target speedup s:
 * t^(K) = (s-1)/s, then for k = K-1 .. 2 (with t^(K+1) taken as 1)
 *
 *   t^(k) = 2 t^(k+1) - t^(k+2)   if t^(k+1) > (2/3) t^(k+2)
 *   t^(k) = t^(k+1) / 2           otherwise
 *
 * and t^(1) = 0.
 */
ContinuousInitSequence optimal_continuous_sequence(double s, int K);

// Nearest grid index per start time (ties toward the smaller index),
// repaired to strict increase; i_1 is forced to 0. Requires N >= K.
InitSequence discretize_sequence(const ContinuousInitSequence& cont, const TimeGrid& grid);

// Exact event-driven evaluation of the surrogate reward; no numerical
// integration is involved, every segment is a closed-form exponential.
RewardTrace reward(const ContinuousInitSequence& seq,
                   InitStyle init = InitStyle::chained_jumps);

// Scan t^(2) over `resolution` evenly spaced interior points of
// (0, (s-1)/s) for the three-core sequence [0, t^(2), (s-1)/s]; returns
// (argmax t^(2), max reward) with lowest-index tie-break. Requires s > 1.
std::pair<double, double> brute_force_scan_mid(double s, int resolution);

// argmax only, the oracle form used by the verification suite (s >= 2)
double brute_force_optimal_mid(double s, int resolution);

// Built-in default sequences for N = 50, K in {4, 6, 8}.
InitSequence default_sequence(int K, int N);

// Equal spacing i_k = (k-1) * floor(6 N / 50).
InitSequence uniform_sequence(int K, int N);

// Rescale start indices from one grid size to another (nearest index,
// repaired to strict increase below the new N).
InitSequence scale_sequence(const InitSequence& seq, int from_N, int to_N);

}  // namespace chords
