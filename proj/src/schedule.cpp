#include "chords/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace chords {

namespace {

// Event times are multiples of exact start-time differences; comparisons
// tolerate a fixed absolute slack well below any realistic spacing.
constexpr double kTimeEps = 1e-12;

/**
 * One core's trajectory under f(x, t) = x: exponential growth between
 * rectification events, a jump at each event. Values are queryable at any
 * time at or after the start; a query landing exactly on an event time
 * returns the post-jump value (the jump lands at the shared time itself,
 * so a simultaneous reader one level down sees the updated latent).
 */
struct CoreTrajectory {
    double start_time = 0.0;
    double init_value = 1.0;
    std::vector<double> event_times;   // rectification target times
    std::vector<double> post_values;   // value at the matching event time

    double value_at(double tau) const {
        auto it = std::upper_bound(event_times.begin(), event_times.end(), tau + kTimeEps);
        if (it == event_times.begin()) {
            return init_value * std::exp(tau - start_time);
        }
        std::size_t n = static_cast<std::size_t>(it - event_times.begin()) - 1;
        return post_values[n] * std::exp(tau - event_times[n]);
    }
};

}  // namespace

ContinuousInitSequence optimal_continuous_sequence(double s, int K) {
    if (!(s >= 1.0)) {
        throw std::invalid_argument("optimal_continuous_sequence: speedup must be >= 1");
    }
    if (K < 1) {
        throw std::invalid_argument("optimal_continuous_sequence: need at least one core");
    }
    if (K == 1) {
        if (s != 1.0) {
            throw std::invalid_argument(
                "optimal_continuous_sequence: one core cannot provide speedup > 1");
        }
        return ContinuousInitSequence({0.0});
    }
    if (s == 1.0) {
        throw std::invalid_argument(
            "optimal_continuous_sequence: speedup 1 admits only the single-core sequence [0]");
    }
    // t[j] holds t^(j+1); t[K] is the closing convention t^(K+1) = 1
    std::vector<double> t(static_cast<std::size_t>(K) + 1);
    t[static_cast<std::size_t>(K)] = 1.0;
    t[static_cast<std::size_t>(K - 1)] = (s - 1.0) / s;
    for (int j = K - 2; j >= 1; --j) {
        double succ = t[static_cast<std::size_t>(j + 1)];
        double succ2 = t[static_cast<std::size_t>(j + 2)];
        double v = (succ > (2.0 / 3.0) * succ2) ? 2.0 * succ - succ2 : 0.5 * succ;
        if (v <= 0.0) v = 0.5 * succ;  // unreachable for s > 1; halving keeps monotonicity
        t[static_cast<std::size_t>(j)] = v;
    }
    t[0] = 0.0;
    t.pop_back();
    return ContinuousInitSequence(std::move(t));
}

namespace {

int nearest_index(const TimeGrid& grid, double t) {
    const auto& ts = grid.times;
    auto it = std::lower_bound(ts.begin(), ts.end(), t);
    if (it == ts.begin()) return 0;
    if (it == ts.end()) return grid.N;
    int hi = static_cast<int>(it - ts.begin());
    int lo = hi - 1;
    double d_hi = ts[static_cast<std::size_t>(hi)] - t;
    double d_lo = t - ts[static_cast<std::size_t>(lo)];
    return (d_lo <= d_hi) ? lo : hi;
}

}  // namespace

InitSequence discretize_sequence(const ContinuousInitSequence& cont, const TimeGrid& grid) {
    int K = cont.cores();
    if (grid.N < K) {
        throw std::invalid_argument("discretize_sequence: grid with N=" + std::to_string(grid.N) +
                                    " cannot host " + std::to_string(K) + " distinct start indices");
    }
    std::vector<int> idx(static_cast<std::size_t>(K));
    idx[0] = 0;
    for (int k = 2; k <= K; ++k) {
        int raw = nearest_index(grid, cont.at(k));
        idx[static_cast<std::size_t>(k - 1)] =
            std::max(raw, idx[static_cast<std::size_t>(k - 2)] + 1);
    }
    if (idx.back() >= grid.N) {
        idx.back() = grid.N - 1;
        for (int k = K - 1; k >= 2; --k) {
            idx[static_cast<std::size_t>(k - 1)] =
                std::min(idx[static_cast<std::size_t>(k - 1)], idx[static_cast<std::size_t>(k)] - 1);
        }
    }
    return InitSequence(std::move(idx));
}

RewardTrace reward(const ContinuousInitSequence& seq, InitStyle init) {
    const int K = seq.cores();
    std::vector<CoreTrajectory> traj(static_cast<std::size_t>(K));

    for (int k = 1; k <= K; ++k) {
        CoreTrajectory& c = traj[static_cast<std::size_t>(k - 1)];
        c.start_time = seq.at(k);
        if (init == InitStyle::single_jump) {
            c.init_value = 1.0 + seq.at(k);
        } else {
            double v = 1.0;
            for (int j = 1; j < k; ++j) v *= 1.0 + (seq.at(j + 1) - seq.at(j));
            c.init_value = v;
        }
        if (k == 1) continue;

        const CoreTrajectory& up = traj[static_cast<std::size_t>(k - 2)];
        double dt = seq.at(k) - seq.at(k - 1);
        double anchor = c.init_value;
        double growth = std::exp(dt);
        for (int n = 1;; ++n) {
            double target = seq.at(k) + static_cast<double>(n) * dt;
            if (target > 1.0 + kTimeEps) break;
            double pre = anchor * growth;
            double accurate = up.value_at(target - dt);
            double post = pre + (1.0 + dt) * (accurate - anchor);
            c.event_times.push_back(target);
            c.post_values.push_back(post);
            anchor = post;
        }
    }

    RewardTrace out;
    out.final_value = traj.back().value_at(1.0);
    out.reward = std::log(out.final_value);
    out.per_core_trajectories.resize(static_cast<std::size_t>(K));
    for (int k = 1; k <= K; ++k) {
        const CoreTrajectory& c = traj[static_cast<std::size_t>(k - 1)];
        auto& pts = out.per_core_trajectories[static_cast<std::size_t>(k - 1)];
        pts.emplace_back(c.start_time, c.init_value);
        for (std::size_t n = 0; n < c.event_times.size(); ++n) {
            pts.emplace_back(c.event_times[n], c.post_values[n]);
        }
        if (pts.back().first < 1.0 - kTimeEps) {
            pts.emplace_back(1.0, c.value_at(1.0));
        }
    }
    return out;
}

std::pair<double, double> brute_force_scan_mid(double s, int resolution) {
    if (!(s > 1.0)) {
        throw std::invalid_argument("brute_force_scan_mid: speedup must exceed 1");
    }
    if (resolution < 100) {
        throw std::invalid_argument("brute_force_scan_mid: resolution must be >= 100");
    }
    double t_last = (s - 1.0) / s;
    double best_t2 = 0.0;
    double best_r = -std::numeric_limits<double>::infinity();
    for (int j = 1; j <= resolution; ++j) {
        double t2 = t_last * static_cast<double>(j) / static_cast<double>(resolution + 1);
        double r = reward(ContinuousInitSequence({0.0, t2, t_last})).reward;
        if (r > best_r) {  // strict: lowest-index tie-break
            best_r = r;
            best_t2 = t2;
        }
    }
    return {best_t2, best_r};
}

double brute_force_optimal_mid(double s, int resolution) {
    if (!(s >= 2.0)) {
        throw std::invalid_argument("brute_force_optimal_mid: speedup must be >= 2");
    }
    return brute_force_scan_mid(s, resolution).first;
}

InitSequence default_sequence(int K, int N) {
    if (N == 50) {
        if (K == 4) return InitSequence({0, 8, 16, 32});
        if (K == 6) return InitSequence({0, 3, 6, 12, 24, 36});
        if (K == 8) return InitSequence({0, 2, 4, 8, 16, 24, 32, 40});
    }
    throw std::invalid_argument(
        "default_sequence: no built-in sequence for K=" + std::to_string(K) + ", N=" +
        std::to_string(N) +
        "; derive one with optimal_continuous_sequence + discretize_sequence");
}

InitSequence uniform_sequence(int K, int N) {
    if (K < 1 || N < 1 || K > N) {
        throw std::invalid_argument("uniform_sequence: need 1 <= K <= N");
    }
    if (K == 1) return InitSequence({0});
    int g = (6 * N) / 50;
    if (g == 0) {
        throw std::invalid_argument("uniform_sequence: spacing of 0 (N too small)");
    }
    std::vector<int> idx(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) idx[static_cast<std::size_t>(k)] = k * g;
    if (idx.back() >= N) {
        throw std::invalid_argument("uniform_sequence: spacing overflows the grid for K=" +
                                    std::to_string(K) + ", N=" + std::to_string(N));
    }
    return InitSequence(std::move(idx));
}

InitSequence scale_sequence(const InitSequence& seq, int from_N, int to_N) {
    if (from_N < 1 || to_N < seq.cores()) {
        throw std::invalid_argument("scale_sequence: target grid cannot host the sequence");
    }
    std::vector<int> idx;
    idx.reserve(seq.indices.size());
    for (int i : seq.indices) {
        long long num = 2LL * i * to_N + from_N;  // round(i * to_N / from_N)
        idx.push_back(static_cast<int>(num / (2LL * from_N)));
    }
    for (std::size_t k = 1; k < idx.size(); ++k) {
        idx[k] = std::max(idx[k], idx[k - 1] + 1);
    }
    if (idx.back() >= to_N) {
        idx.back() = to_N - 1;
        for (std::size_t k = idx.size() - 1; k >= 2; --k) {
            idx[k - 1] = std::min(idx[k - 1], idx[k] - 1);
        }
    }
    return InitSequence(std::move(idx));
}

}  // namespace chords
