#include "chords/baselines.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

namespace chords {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

}  // namespace

BaselineResult run_sequential(const DriftField& field, const TimeGrid& grid,
                              std::span<const double> x0) {
    if (static_cast<int>(x0.size()) != field.dim()) {
        throw std::invalid_argument("run_sequential: x0 dimension does not match the field");
    }
    auto t0 = Clock::now();
    Latent x(x0.begin(), x0.end());
    Latent f(x.size());
    for (int i = 0; i < grid.N; ++i) {
        field.eval_into(x, grid.t(i), f);
        double h = grid.t(i + 1) - grid.t(i);
        for (std::size_t d = 0; d < x.size(); ++d) x[d] += h * f[d];
    }
    BaselineResult out;
    out.latent = std::move(x);
    out.sequential_passes = grid.N;
    out.total_evals = grid.N;
    out.wall_ms = elapsed_ms(t0);
    return out;
}

BaselineResult run_picard_window(const DriftField& field, const TimeGrid& grid,
                                 std::span<const double> x0, int window, double tol) {
    const int N = grid.N;
    if (window < 1 || window > N) {
        throw std::invalid_argument("run_picard_window: window must be in [1, N]");
    }
    if (tol < 0.0 || std::isnan(tol)) {
        throw std::invalid_argument("run_picard_window: tol must be nonnegative");
    }
    if (static_cast<int>(x0.size()) != field.dim()) {
        throw std::invalid_argument("run_picard_window: x0 dimension does not match the field");
    }
    auto t0 = Clock::now();
    const std::size_t D = x0.size();

    std::vector<Latent> x(static_cast<std::size_t>(N) + 1);
    x[0].assign(x0.begin(), x0.end());
    int filled = 0;  // highest index holding a value
    int w = 0;       // trajectory is converged up to and including w

    auto fill_through = [&](int m) {
        for (int i = filled + 1; i <= m; ++i) {
            x[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i - 1)];
        }
        filled = std::max(filled, m);
    };

    long long evals = 0;
    int passes = 0;
    std::vector<Latent> drifts;
    std::vector<double> change;
    const int pass_cap = 200 * N + 200;

    while (w < N) {
        int e = std::min(w + window - 1, N - 1);
        fill_through(e + 1);

        drifts.assign(static_cast<std::size_t>(e - w + 1), Latent(D));
        for (int j = w; j <= e; ++j) {
            field.eval_into(x[static_cast<std::size_t>(j)], grid.t(j),
                            drifts[static_cast<std::size_t>(j - w)]);
        }
        evals += e - w + 1;
        ++passes;

        // prefix accumulation; at the fixed point this reproduces the
        // sequential recurrence term for term
        const int w_start = w;
        Latent acc = x[static_cast<std::size_t>(w)];
        change.assign(static_cast<std::size_t>(e - w + 1), 0.0);
        for (int j = w; j <= e; ++j) {
            double h = grid.t(j + 1) - grid.t(j);
            const Latent& f = drifts[static_cast<std::size_t>(j - w)];
            for (std::size_t d = 0; d < D; ++d) acc[d] += h * f[d];
            Latent& target = x[static_cast<std::size_t>(j + 1)];
            change[static_cast<std::size_t>(j - w)] = relative_rms(acc, target);
            target = acc;
        }

        // slide past leading points whose update settled
        while (w < N && w + 1 <= e + 1 &&
               change[static_cast<std::size_t>(w - w_start)] <= tol) {
            ++w;
        }

        if (passes > pass_cap) {
            throw std::runtime_error("run_picard_window: no convergence after " +
                                     std::to_string(passes) + " passes");
        }
    }

    BaselineResult out;
    out.latent = x[static_cast<std::size_t>(N)];
    out.sequential_passes = passes;
    out.total_evals = evals;
    out.wall_ms = elapsed_ms(t0);
    return out;
}

BaselineResult run_parareal(const DriftField& field, const TimeGrid& grid,
                            std::span<const double> x0, int coarse_points, int max_iters) {
    const int N = grid.N;
    const int M = coarse_points;
    if (M < 1 || M > N) {
        throw std::invalid_argument("run_parareal: coarse_points must be in [1, N]");
    }
    if (max_iters < 1) {
        throw std::invalid_argument("run_parareal: max_iters must be >= 1");
    }
    if (static_cast<int>(x0.size()) != field.dim()) {
        throw std::invalid_argument("run_parareal: x0 dimension does not match the field");
    }
    auto t0 = Clock::now();
    const std::size_t D = x0.size();

    // nearest partition of the fine grid into M intervals
    std::vector<int> cut(static_cast<std::size_t>(M) + 1);
    for (int m = 0; m <= M; ++m) {
        cut[static_cast<std::size_t>(m)] =
            static_cast<int>((2LL * m * N + M) / (2LL * M));
    }
    cut[0] = 0;
    cut[static_cast<std::size_t>(M)] = N;
    std::vector<int> len(static_cast<std::size_t>(M));
    for (int m = 0; m < M; ++m) {
        len[static_cast<std::size_t>(m)] =
            cut[static_cast<std::size_t>(m) + 1] - cut[static_cast<std::size_t>(m)];
        if (len[static_cast<std::size_t>(m)] < 1) {
            throw std::invalid_argument("run_parareal: empty coarse interval");
        }
    }

    long long evals = 0;

    auto coarse = [&](const Latent& u, int m) {
        Latent f(D);
        int a = cut[static_cast<std::size_t>(m)];
        int b = cut[static_cast<std::size_t>(m) + 1];
        field.eval_into(u, grid.t(a), f);
        ++evals;
        Latent out = u;
        double h = grid.t(b) - grid.t(a);
        for (std::size_t d = 0; d < D; ++d) out[d] += h * f[d];
        return out;
    };
    auto fine = [&](const Latent& u, int m) {
        Latent out = u;
        Latent f(D);
        for (int i = cut[static_cast<std::size_t>(m)]; i < cut[static_cast<std::size_t>(m) + 1];
             ++i) {
            field.eval_into(out, grid.t(i), f);
            ++evals;
            double h = grid.t(i + 1) - grid.t(i);
            for (std::size_t d = 0; d < D; ++d) out[d] += h * f[d];
        }
        return out;
    };

    // iteration 0: coarse sweep
    std::vector<Latent> U(static_cast<std::size_t>(M) + 1);
    std::vector<Latent> c_cache(static_cast<std::size_t>(M));
    U[0].assign(x0.begin(), x0.end());
    std::vector<long long> avail(static_cast<std::size_t>(M) + 1, 0);
    for (int m = 0; m < M; ++m) {
        c_cache[static_cast<std::size_t>(m)] = coarse(U[static_cast<std::size_t>(m)], m);
        U[static_cast<std::size_t>(m) + 1] = c_cache[static_cast<std::size_t>(m)];
        avail[static_cast<std::size_t>(m) + 1] = avail[static_cast<std::size_t>(m)] + 1;
    }

    std::vector<Latent> fine_vals(static_cast<std::size_t>(M));
    std::vector<Latent> history;
    const int iters = std::min(max_iters, M);
    for (int j = 1; j <= iters; ++j) {
        for (int n = j - 1; n < M; ++n) {
            fine_vals[static_cast<std::size_t>(n)] = fine(U[static_cast<std::size_t>(n)], n);
        }
        std::vector<long long> next_avail = avail;
        next_avail[static_cast<std::size_t>(j)] =
            avail[static_cast<std::size_t>(j) - 1] + len[static_cast<std::size_t>(j) - 1];
        U[static_cast<std::size_t>(j)] = fine_vals[static_cast<std::size_t>(j) - 1];
        for (int n = j; n < M; ++n) {
            Latent c_new = coarse(U[static_cast<std::size_t>(n)], n);
            Latent& target = U[static_cast<std::size_t>(n) + 1];
            const Latent& fv = fine_vals[static_cast<std::size_t>(n)];
            const Latent& cc = c_cache[static_cast<std::size_t>(n)];
            target.resize(D);
            for (std::size_t d = 0; d < D; ++d) {
                target[d] = c_new[d] + (fv[d] - cc[d]);
            }
            c_cache[static_cast<std::size_t>(n)] = std::move(c_new);
            next_avail[static_cast<std::size_t>(n) + 1] =
                std::max(next_avail[static_cast<std::size_t>(n)] + 1,
                         avail[static_cast<std::size_t>(n)] +
                             len[static_cast<std::size_t>(n)]);
        }
        avail = std::move(next_avail);
        history.push_back(U[static_cast<std::size_t>(M)]);
    }

    BaselineResult out;
    out.latent = U[static_cast<std::size_t>(M)];
    out.sequential_passes = static_cast<int>(avail[static_cast<std::size_t>(M)]);
    out.total_evals = evals;
    out.wall_ms = elapsed_ms(t0);
    out.per_iteration_latents = std::move(history);
    return out;
}

}  // namespace chords
