#include "chords/grid.hpp"

#include <stdexcept>
#include <string>

namespace chords {

TimeGrid::TimeGrid(std::vector<double> t) : times(std::move(t)) {
    if (times.size() < 2) {
        throw std::invalid_argument("TimeGrid: need at least two time points");
    }
    N = static_cast<int>(times.size()) - 1;
    if (times.front() != 0.0 || times.back() != 1.0) {
        throw std::invalid_argument("TimeGrid: times must start at 0 and end at 1");
    }
    for (std::size_t i = 0; i + 1 < times.size(); ++i) {
        if (!(times[i] < times[i + 1])) {
            throw std::invalid_argument("TimeGrid: times must be strictly increasing");
        }
    }
}

InitSequence::InitSequence(std::vector<int> idx) : indices(std::move(idx)) {
    if (indices.empty()) {
        throw std::invalid_argument("InitSequence: need at least one core");
    }
    if (indices.front() != 0) {
        throw std::invalid_argument("InitSequence: i_1 must be 0");
    }
    for (std::size_t i = 0; i + 1 < indices.size(); ++i) {
        if (!(indices[i] < indices[i + 1])) {
            throw std::invalid_argument("InitSequence: indices must be strictly increasing");
        }
    }
}

ContinuousInitSequence::ContinuousInitSequence(std::vector<double> s) : starts(std::move(s)) {
    if (starts.empty()) {
        throw std::invalid_argument("ContinuousInitSequence: need at least one core");
    }
    if (starts.front() != 0.0) {
        throw std::invalid_argument("ContinuousInitSequence: t^(1) must be 0");
    }
    for (std::size_t i = 0; i + 1 < starts.size(); ++i) {
        if (!(starts[i] < starts[i + 1])) {
            throw std::invalid_argument("ContinuousInitSequence: starts must be strictly increasing");
        }
    }
    if (starts.back() >= 1.0) {
        throw std::invalid_argument("ContinuousInitSequence: t^(K) must be < 1");
    }
}

TimeGrid uniform_grid(int N) {
    if (N < 1) {
        throw std::invalid_argument("uniform_grid: N must be >= 1");
    }
    std::vector<double> t(static_cast<std::size_t>(N) + 1);
    for (int i = 0; i <= N; ++i) {
        t[static_cast<std::size_t>(i)] = static_cast<double>(i) / static_cast<double>(N);
    }
    t.front() = 0.0;
    t.back() = 1.0;
    return TimeGrid(std::move(t));
}

double nominal_speedup(const TimeGrid& grid, const InitSequence& seq, int k) {
    if (k < 1 || k > seq.cores()) {
        throw std::invalid_argument("nominal_speedup: core index out of range");
    }
    int ik = seq.at(k);
    if (ik < 0 || ik >= grid.N) {
        throw std::invalid_argument("nominal_speedup: start index " + std::to_string(ik) +
                                    " not addressable on a grid with N=" + std::to_string(grid.N));
    }
    return 1.0 / (1.0 - grid.t(ik) + static_cast<double>(k - 1) / static_cast<double>(grid.N));
}

double continuous_speedup(const ContinuousInitSequence& seq) {
    return 1.0 / (1.0 - seq.at(seq.cores()));
}

}  // namespace chords
