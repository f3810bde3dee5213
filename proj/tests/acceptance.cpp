// Acceptance suite: one pass/fail line per criterion, nonzero exit when
// any criterion fails. Each check pins, in code, the tolerances and
// thresholds the project commits to.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "chords/baselines.hpp"
#include "chords/bench.hpp"
#include "chords/engine.hpp"
#include "chords/grid.hpp"
#include "chords/rng.hpp"
#include "chords/schedule.hpp"
#include "chords/stepper.hpp"
#include "test_support.hpp"

using namespace chords;
using namespace chords::test;

namespace {

struct Criterion {
    bool ok = true;
    std::string detail;

    void fail(const std::string& why) {
        if (ok) detail = why;
        ok = false;
    }
};

std::vector<DriftField> builtin_fields() {
    std::vector<DriftField> fields;
    fields.push_back(linear_field(1.0, 3));
    fields.push_back(mlp_field(7, 16, 32, 2));
    fields.push_back(gmm_flow_field(ring_mixture()));
    fields.push_back(pf_ode_field([](double t) { return 0.1 + 0.3 * t; },
                                  [](double) { return 1.0; }, mlp_field(3, 16, 32, 2)));
    return fields;
}

InitSequence pick_sequence(int K, int N) {
    if (N == 50 && (K == 4 || K == 8)) return default_sequence(K, N);
    double s = K == 2 ? 1.8 : (K == 4 ? 2.5 : 3.2);
    return discretize_sequence(optimal_continuous_sequence(s, K), uniform_grid(N));
}

// 1. Core-1 output bit-identical to the sequential solve across builtin
//    fields, N in {10, 50, 100}, K in {2, 4, 8}.
Criterion criterion_exactness() {
    Criterion c;
    std::uint64_t salt = 0;
    for (const DriftField& field : builtin_fields()) {
        for (int N : {10, 50, 100}) {
            for (int K : {2, 4, 8}) {
                TimeGrid grid = uniform_grid(N);
                InitSequence seq = pick_sequence(K, N);
                Latent x0 = gaussian_vector(1000 + salt++, field.dim());
                BaselineResult ref = run_sequential(field, grid, x0);
                ChordsResult res = run_chords(field, grid, seq, x0,
                                              TerminationCriterion::fixed_core_mode(1),
                                              Executor::reference);
                if (res.outputs.back().core != 1 ||
                    res.outputs.back().latent != ref.latent) {
                    c.fail(field.label() + " N=" + std::to_string(N) + " K=" +
                           std::to_string(K) + ": core-1 not bit-identical");
                }
            }
        }
    }
    return c;
}

// 2. Pass accounting: core K emits after exactly N - i_K + K - 1 passes;
//    the N = 50 default sequences give speedups 50/21, 50/19, 50/17, and
//    the 8-core value sits within 0.05 of 2.9.
Criterion criterion_speedup_audit() {
    Criterion c;
    DriftField field = linear_field(1.0, 1);
    TimeGrid grid = uniform_grid(50);
    Latent x0{1.0};
    const std::pair<int, double> expected[] = {
        {4, 50.0 / 21.0}, {6, 50.0 / 19.0}, {8, 50.0 / 17.0}};
    for (const auto& [K, want] : expected) {
        InitSequence seq = default_sequence(K, 50);
        ChordsResult res = run_chords(field, grid, seq, x0,
                                      TerminationCriterion::fixed_core_mode(K),
                                      Executor::reference);
        int passes = res.outputs.back().sequential_passes;
        int formula = 50 - seq.at(K) + K - 1;
        if (passes != formula) {
            c.fail("K=" + std::to_string(K) + ": measured passes " + std::to_string(passes));
        }
        double speedup = 50.0 / static_cast<double>(passes);
        if (speedup != want) {
            c.fail("K=" + std::to_string(K) + ": speedup not exact");
        }
        if (K == 8 && std::abs(speedup - 2.9) >= 0.05) {
            c.fail("8-core speedup " + std::to_string(speedup) + " not within 0.05 of 2.9");
        }
    }
    return c;
}

// 3. Rectification order: on a fixed-seed network field (D = 16),
//    perturbation 1e-2, the rectified-error slope over
//    delta in {1e-1 .. 1e-3} is >= 1.9 and rectified < unrectified
//    everywhere.
Criterion criterion_rectification_order() {
    Criterion c;
    DriftField f = mlp_field(2024, 16, 32, 2);
    Latent x = gaussian_vector(5, 16);
    Latent u = gaussian_vector(6, 16);
    double nu = norm2(u);
    for (double& v : u) v /= nu;
    double t = 0.3, eps = 1e-2;
    Latent xp = x;
    add_scaled(xp, eps, u);
    std::vector<double> ld, lr;
    for (double delta : {1e-1, 3e-2, 1e-2, 3e-3, 1e-3}) {
        Latent acc = rk4_integrate(f, x, t, t + delta, 256);
        Latent per = rk4_integrate(f, xp, t, t + delta, 256);
        Latent corr = rectify(x, xp, f(x, t), f(xp, t), delta);
        Latent fixed = per;
        add_scaled(fixed, 1.0, corr);
        double unrect = rms_diff(per, acc);
        double rect_err = rms_diff(fixed, acc);
        if (!(rect_err < unrect)) {
            c.fail("rectified error not below unrectified at delta=" + std::to_string(delta));
        }
        ld.push_back(std::log(delta));
        lr.push_back(std::log(rect_err));
    }
    double slope = fit_slope(ld, lr);
    if (!(slope >= 1.9)) c.fail("log-log slope " + std::to_string(slope) + " below 1.9");
    return c;
}

// 4. Brute-force optimum vs the closed-form two-branch rule at
//    resolution 2000, agreement within one grid cell (5e-4 of the span).
//
//    Known red at s = 6: the closed-form rule places the middle start at
//    2*t3 - 1, whose only rectification lands exactly on the horizon. With
//    chained-jump initialization, the rectification-free balanced split at
//    t3/2 carries a better start value than that single late correction,
//    and the scan finds it (reward 0.8633 vs 0.8440, confirmed by an
//    independent event simulation). The two-branch rule only matches the
//    scan under start values that ignore interior placement, which in turn
//    breaks the s = 2.5 case, so no initialization convention satisfies
//    all five speedups. The check is kept as stated rather than weakened.
Criterion criterion_optimum_oracle() {
    Criterion c;
    for (double s : {2.0, 2.5, 3.0, 4.0, 6.0}) {
        double span = (s - 1.0) / s;
        double closed = (s <= 3.0) ? span / 2.0 : 2.0 * span - 1.0;
        double bf = brute_force_optimal_mid(s, 2000);
        if (std::abs(bf - closed) > 5e-4 * span) {
            char buf[128];
            std::snprintf(buf, sizeof(buf), "s=%g: brute force %.6f vs closed form %.6f", s,
                          bf, closed);
            c.fail(buf);
        }
    }
    return c;
}

// 5. Reward evaluator: exact two-core values, unit reward for the
//    single-core sequence, insertion/prefix monotonicity on 100 seeded
//    random sequences, reward trade-off across speedups.
Criterion criterion_reward_evaluator() {
    Criterion c;
    for (double t : {0.1, 0.2}) {
        RewardTrace tr = reward(ContinuousInitSequence({0.0, t}));
        const auto& pts = tr.per_core_trajectories[1];
        for (int k = 1; k <= 5; ++k) {
            if (k * t > 1.0 + 1e-12) break;
            double want = std::exp(k * t) - std::pow(std::exp(t) - t - 1.0, k);
            bool found = false;
            for (const auto& [tm, v] : pts) {
                if (std::abs(tm - k * t) < 1e-9 && std::abs(v - want) <= 1e-12 * want) {
                    found = true;
                }
            }
            if (!found) {
                c.fail("two-core closed form violated at t=" + std::to_string(t) + " k=" +
                       std::to_string(k));
            }
        }
    }
    if (reward(ContinuousInitSequence({0.0})).reward != 1.0) {
        c.fail("single-core reward is not exactly 1");
    }

    SplitMix64 rng(42);
    int insert_bad = 0, prefix_bad = 0, checked = 0;
    std::string first_violation;
    while (checked < 100) {
        int K = 2 + static_cast<int>(rng.next_u64() % 3);
        std::vector<double> ts{0.0};
        double last = 0.3 + 0.65 * rng.next_uniform();
        for (int k = 1; k < K - 1; ++k) ts.push_back(last * rng.next_uniform());
        ts.push_back(last);
        std::sort(ts.begin(), ts.end());
        bool valid = true;
        for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
            if (ts[i + 1] - ts[i] < 1e-6) valid = false;
        }
        double inserted = last * rng.next_uniform();
        if (inserted < 1e-6) valid = false;
        for (double v : ts) {
            if (std::abs(v - inserted) < 1e-6) valid = false;
        }
        if (!valid) continue;
        ++checked;
        double base = reward(ContinuousInitSequence(ts)).reward;
        std::vector<double> grown = ts;
        grown.push_back(inserted);
        std::sort(grown.begin(), grown.end());
        double with_insert = reward(ContinuousInitSequence(grown)).reward;
        if (with_insert < base - 1e-12) {
            ++insert_bad;
            if (first_violation.empty()) {
                char buf[160];
                std::snprintf(buf, sizeof(buf),
                              "insertion lowered reward %.6f -> %.6f (K=%d, inserted %.4f)",
                              base, with_insert, K, inserted);
                first_violation = buf;
            }
        }
        std::vector<double> prefix(ts.begin(), ts.end() - 1);
        if (reward(ContinuousInitSequence(prefix)).reward < base - 1e-12) ++prefix_bad;
    }
    if (insert_bad > 0) {
        c.fail(std::to_string(insert_bad) + "/100 insertion violations; first: " +
               first_violation);
    }
    if (prefix_bad > 0) c.fail(std::to_string(prefix_bad) + "/100 prefix violations");

    double prev = 2.0;
    for (double s : {1.5, 2.0, 3.0, 4.0}) {
        double best = brute_force_scan_mid(s, 400).second;
        if (!(best < prev)) c.fail("trade-off violated at s=" + std::to_string(s));
        prev = best;
    }
    return c;
}

// 6. Equal budget: on the stock two-dimensional mixture, the 8-core
//    stream's first output must beat a 17-step sequential solve against
//    the 50-step reference on at least 95 of 100 seeds.
Criterion criterion_equal_budget() {
    Criterion c;
    DriftField field = gmm_flow_field(ring_mixture());
    TimeGrid grid50 = uniform_grid(50);
    TimeGrid grid17 = uniform_grid(17);
    InitSequence seq = default_sequence(8, 50);
    int wins = 0;
    for (int i = 0; i < 100; ++i) {
        Latent x0 = gaussian_vector(split_seed(42, static_cast<std::uint64_t>(i)), 2);
        BaselineResult ref = run_sequential(field, grid50, x0);
        ChordsResult res = run_chords(field, grid50, seq, x0,
                                      TerminationCriterion::fixed_core_mode(8),
                                      Executor::reference);
        double rmse_fast = latent_rmse(res.outputs.front().latent, ref.latent);
        double rmse_17 = latent_rmse(run_sequential(field, grid17, x0).latent, ref.latent);
        if (rmse_fast < rmse_17) ++wins;
    }
    if (wins < 95) c.fail("fast core beat the 17-step solve on only " +
                          std::to_string(wins) + "/100 seeds");
    return c;
}

// 7. Ablation direction: stream-convergence area of the default sequence
//    below the uniform sequence on at least 80 of 100 seeds, and speedup
//    strictly increasing in N at fixed K = 8.
//
//    The area comparison is a known red on smooth two-dimensional flows:
//    both streams collapse onto the final output right after their first
//    emission, so the area reduces to (first gap) x (first error). The
//    equal-spacing sequence emits earlier (15 vs 17 passes), has the
//    narrower first gap (5 vs 7), and its denser fast-end spacing (6 vs 8)
//    rectifies the first output harder, so it wins the area on virtually
//    every seed; the same held across every mixture shape tried (ring and
//    randomized anisotropic, 15 parameter settings). The direction
//    asserted here only emerges when early errors amplify downstream,
//    which these analytic mixtures do not exhibit. Kept as stated.
Criterion criterion_ablation_direction() {
    Criterion c;
    DriftField field = gmm_flow_field(ring_mixture());
    TimeGrid grid = uniform_grid(50);
    InitSequence seq_default = default_sequence(8, 50);
    InitSequence seq_uniform = uniform_sequence(8, 50);
    auto area_of = [&](const InitSequence& seq, const Latent& x0) {
        ChordsResult r = run_chords(field, grid, seq, x0,
                                    TerminationCriterion::fixed_core_mode(1),
                                    Executor::reference);
        std::vector<CurvePoint> curve;
        for (const StreamedOutput& o : r.outputs) {
            curve.push_back({o.sequential_passes,
                             mean_abs_diff(o.latent, r.outputs.back().latent)});
        }
        return curve_area(curve);
    };
    int wins = 0;
    for (int i = 0; i < 100; ++i) {
        Latent x0 = gaussian_vector(split_seed(42, static_cast<std::uint64_t>(i)), 2);
        if (area_of(seq_default, x0) < area_of(seq_uniform, x0)) ++wins;
    }
    if (wins < 80) {
        c.fail("default sequence had the smaller curve area on only " +
               std::to_string(wins) + "/100 seeds");
    }

    double prev = 0.0;
    for (int N : {50, 75, 100}) {
        InitSequence seq = scale_sequence(default_sequence(8, 50), 50, N);
        int passes = N - seq.at(8) + 7;
        double speedup = static_cast<double>(N) / passes;
        if (!(speedup > prev)) c.fail("speedup not increasing at N=" + std::to_string(N));
        prev = speedup;
    }
    return c;
}

// 8. Executor determinism: parallel output bit-identical to the reference
//    executor on 20 seeded configurations; single-output methods must
//    reproduce themselves exactly run to run.
Criterion criterion_executor_determinism() {
    Criterion c;
    std::vector<DriftField> fields = builtin_fields();
    int config_index = 0;
    for (const DriftField& field : fields) {
        TimeGrid grid = uniform_grid(50);
        Latent x0 = gaussian_vector(split_seed(99, static_cast<std::uint64_t>(config_index)),
                                    field.dim());
        // two chords configurations per field
        for (int K : {4, 8}) {
            InitSequence seq = default_sequence(K, 50);
            TerminationCriterion term = K == 4 ? TerminationCriterion::fixed_core_mode(1)
                                               : TerminationCriterion::residual_mode(1e-3);
            ChordsResult a = run_chords(field, grid, seq, x0, term, Executor::reference);
            ChordsResult b = run_chords(field, grid, seq, x0, term, Executor::parallel);
            bool same = a.outputs.size() == b.outputs.size();
            for (std::size_t i = 0; same && i < a.outputs.size(); ++i) {
                same = a.outputs[i].core == b.outputs[i].core &&
                       a.outputs[i].latent == b.outputs[i].latent;
            }
            if (!same) {
                c.fail(field.label() + " K=" + std::to_string(K) +
                       ": executors disagree");
            }
            ++config_index;
        }
        // sequential, picard, parareal determinism
        BaselineResult s1 = run_sequential(field, grid, x0);
        BaselineResult s2 = run_sequential(field, grid, x0);
        if (s1.latent != s2.latent) c.fail(field.label() + ": sequential not reproducible");
        BaselineResult p1 = run_picard_window(field, grid, x0, 8, 1e-3);
        BaselineResult p2 = run_picard_window(field, grid, x0, 8, 1e-3);
        if (p1.latent != p2.latent || p1.sequential_passes != p2.sequential_passes) {
            c.fail(field.label() + ": picard not reproducible");
        }
        BaselineResult q1 = run_parareal(field, grid, x0, 7, 4);
        BaselineResult q2 = run_parareal(field, grid, x0, 7, 4);
        if (q1.latent != q2.latent) c.fail(field.label() + ": parareal not reproducible");
        config_index += 3;
    }
    return c;
}

// 9. Baseline sanity: exact-limit agreement with the sequential solve and
//    a monotone rmse-vs-tolerance profile for the window iteration.
Criterion criterion_baseline_sanity() {
    Criterion c;
    std::vector<DriftField> fields;
    fields.push_back(gmm_flow_field(ring_mixture()));
    fields.push_back(mlp_field(31, 8, 24, 2));
    for (const DriftField& field : fields) {
        TimeGrid grid = uniform_grid(50);
        Latent x0 = gaussian_vector(777, field.dim());
        BaselineResult ref = run_sequential(field, grid, x0);
        BaselineResult pic = run_picard_window(field, grid, x0, 8, 0.0);
        if (!(relative_rms(pic.latent, ref.latent) <= 1e-8)) {
            c.fail(field.label() + ": exact-tolerance window iteration missed the oracle");
        }
        BaselineResult par = run_parareal(field, grid, x0, 7, 7);
        if (!(relative_rms(par.latent, ref.latent) <= 1e-8)) {
            c.fail(field.label() + ": full parareal missed the oracle");
        }
    }
    DriftField field = gmm_flow_field(ring_mixture());
    TimeGrid grid = uniform_grid(50);
    Latent x0 = gaussian_vector(778, 2);
    BaselineResult ref = run_sequential(field, grid, x0);
    double prev = -1.0;
    for (double tol : {1e-5, 1e-4, 1e-3, 1e-2}) {
        BaselineResult r = run_picard_window(field, grid, x0, 8, tol);
        double rmse = rms_diff(r.latent, ref.latent);
        if (rmse + 1e-15 < prev) c.fail("window rmse not monotone in tolerance");
        prev = rmse;
    }
    return c;
}

}  // namespace

int main() {
    using Clock = std::chrono::steady_clock;
    struct Entry {
        const char* name;
        Criterion (*fn)();
        double budget_secs;  // 0: no stated budget
    };
    const Entry entries[] = {
        {"1 exactness of the slow core", criterion_exactness, 10.0},
        {"2 nominal speedup audit", criterion_speedup_audit, 0.0},
        {"3 rectification order", criterion_rectification_order, 20.0},
        {"4 brute-force optimum vs closed form", criterion_optimum_oracle, 30.0},
        {"5 reward evaluator properties", criterion_reward_evaluator, 0.0},
        {"6 equal-budget superiority", criterion_equal_budget, 60.0},
        {"7 ablation direction", criterion_ablation_direction, 0.0},
        {"8 executor determinism", criterion_executor_determinism, 0.0},
        {"9 baseline sanity", criterion_baseline_sanity, 0.0},
    };
    int failures = 0;
    for (const Entry& e : entries) {
        auto t0 = Clock::now();
        Criterion c = e.fn();
        double secs = std::chrono::duration<double>(Clock::now() - t0).count();
        if (e.budget_secs > 0.0 && secs >= e.budget_secs) {
            c.fail("runtime " + std::to_string(secs) + "s exceeds the " +
                   std::to_string(e.budget_secs) + "s budget");
        }
        std::printf("[%s] criterion %s (%.2fs)%s%s\n", c.ok ? "PASS" : "FAIL", e.name, secs,
                    c.ok ? "" : " - ", c.ok ? "" : c.detail.c_str());
        if (!c.ok) ++failures;
    }
    std::printf("%d/9 criteria passed\n", 9 - failures);
    return failures == 0 ? 0 : 1;
}
