#pragma once

#include <vector>

namespace chords {

/**
 * Discretization of the solve interval [0, 1] into N steps.
 *
 * times has N + 1 entries, strictly increasing, with times[0] = 0 and
 * times[N] = 1 exactly. Immutable after construction and safe to share
 * across workers.
 */
struct TimeGrid {
    int N = 0;
    std::vector<double> times;

    TimeGrid() = default;
    explicit TimeGrid(std::vector<double> t);

    double t(int i) const { return times[static_cast<std::size_t>(i)]; }
};

// Start indices i_1 < i_2 < ... < i_K of the core hierarchy, i_1 = 0.
struct InitSequence {
    std::vector<int> indices;

    InitSequence() = default;
    explicit InitSequence(std::vector<int> idx);

    int cores() const { return static_cast<int>(indices.size()); }
    int at(int k) const { return indices[static_cast<std::size_t>(k - 1)]; }  // 1-based core index
};

// Continuous start times t^(1) < ... < t^(K) in [0, 1), t^(1) = 0.
struct ContinuousInitSequence {
    std::vector<double> starts;

    ContinuousInitSequence() = default;
    explicit ContinuousInitSequence(std::vector<double> s);

    int cores() const { return static_cast<int>(starts.size()); }
    double at(int k) const { return starts[static_cast<std::size_t>(k - 1)]; }
};

// times[i] = i / N
TimeGrid uniform_grid(int N);

// 1 / (1 - t(i_k) + (k - 1) / N): reciprocal fraction of the sequential
// drift-evaluation depth needed for core k's output.
double nominal_speedup(const TimeGrid& grid, const InitSequence& seq, int k);

// 1 / (1 - t^(K))
double continuous_speedup(const ContinuousInitSequence& seq);

}  // namespace chords
