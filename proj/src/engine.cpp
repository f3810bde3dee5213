#include "chords/engine.hpp"

#include <barrier>
#include <chrono>
#include <exception>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>

#include "chords/stepper.hpp"

namespace chords {

namespace hooks {
bool communicate_off_by_one = false;
}

std::pair<int, int> scheduler(int N, int step, int k, const InitSequence& seq) {
    if (step < 1) throw std::invalid_argument("scheduler: step must be >= 1");
    if (k < 1 || k > seq.cores()) throw std::invalid_argument("scheduler: core index out of range");
    int cur, next;
    if (step < k) {
        cur = seq.at(step);
        next = seq.at(step + 1);
    } else {
        cur = seq.at(k) + step - k;
        next = cur + 1;
    }
    if (next > N) {
        throw std::invalid_argument("scheduler: core " + std::to_string(k) +
                                    " is already finished at step " + std::to_string(step));
    }
    return {cur, next};
}

bool communicate(int step, int k, const InitSequence& seq) {
    if (k < 1) throw std::invalid_argument("communicate: core index must be >= 1");
    if (k == 1) return false;
    if (step <= k - 1) return true;  // init phase
    int g = seq.at(k) - seq.at(k - 1);
    int offset = step - (k - 1);
    if (hooks::communicate_off_by_one) offset += 1;
    return offset % g == 0;
}

namespace {

using Clock = std::chrono::steady_clock;

[[noreturn]] void internal_error(const std::string& what) {
    throw std::runtime_error("chords engine internal error: " + what);
}

struct EngineContext {
    const DriftField& field;
    const TimeGrid& grid;
    const InitSequence& seq;
    const TerminationCriterion& term;
    int K;
    int N;
    int dim;

    std::vector<int> finish_steps;  // N - i_k + k - 1, known from the schedule
    std::vector<CoreState> cores;
    std::vector<Latent> pub_latent;  // phase-1 snapshots, read-only in phase 2
    std::vector<Latent> pub_drift;
    std::vector<char> emitted_this_step;

    std::vector<StreamedOutput> outputs;
    EvalCounter evals;
    int step = 1;
    bool stop = false;
    Clock::time_point start_time;

    EngineContext(const DriftField& f, const TimeGrid& g, const InitSequence& s,
                  std::span<const double> x0, const TerminationCriterion& t)
        : field(f), grid(g), seq(s), term(t), K(s.cores()), N(g.N),
          dim(f.dim()), evals(s.cores()) {
        if (static_cast<int>(x0.size()) != dim) {
            throw std::invalid_argument("run_chords: x0 dimension does not match the field");
        }
        if (seq.at(K) >= N) {
            throw std::invalid_argument("run_chords: sequence indices must stay below N");
        }
        if (term.mode == TerminationCriterion::Mode::fixed_core &&
            (term.target_core < 1 || term.target_core > K)) {
            throw std::invalid_argument("run_chords: termination target core out of range");
        }
        if (term.mode == TerminationCriterion::Mode::residual && !(term.tau > 0.0)) {
            throw std::invalid_argument("run_chords: residual tau must be positive");
        }
        finish_steps.resize(static_cast<std::size_t>(K));
        cores.resize(static_cast<std::size_t>(K));
        pub_latent.assign(static_cast<std::size_t>(K), Latent(static_cast<std::size_t>(dim)));
        pub_drift.assign(static_cast<std::size_t>(K), Latent(static_cast<std::size_t>(dim)));
        emitted_this_step.assign(static_cast<std::size_t>(K), 0);
        for (int k = 1; k <= K; ++k) {
            auto& c = cores[static_cast<std::size_t>(k - 1)];
            c.k = k;
            c.x.assign(x0.begin(), x0.end());
            c.x_prev = c.x;
            c.anchor_index = seq.at(1);
            c.anchor_drift_pending = true;
            finish_steps[static_cast<std::size_t>(k - 1)] = N - seq.at(k) + k - 1;
        }
        start_time = Clock::now();
    }

    bool active(int k, int s) const { return s <= finish_steps[static_cast<std::size_t>(k - 1)]; }

    // Phase 1: snapshot the latent, evaluate the drift at cur, fill a
    // pending anchor drift. No cross-core reads.
    void phase1(int k) {
        auto& c = cores[static_cast<std::size_t>(k - 1)];
        auto [cur, next] = scheduler(N, step, k, seq);
        (void)next;
        pub_latent[static_cast<std::size_t>(k - 1)] = c.x;
        field.eval_into(c.x, grid.t(cur), pub_drift[static_cast<std::size_t>(k - 1)]);
        evals.add(k - 1);
        if (c.anchor_drift_pending && c.anchor_index == cur) {
            c.anchor_drift = pub_drift[static_cast<std::size_t>(k - 1)];
            c.anchor_drift_pending = false;
        }
    }

    // Phase 2: assemble the step increment (plus rectification when the
    // schedule fires), apply it, flag an emission when t = 1 is reached.
    // Reads only phase-1 publications of other cores.
    void phase2(int k) {
        auto& c = cores[static_cast<std::size_t>(k - 1)];
        auto [cur, next] = scheduler(N, step, k, seq);
        double h = grid.t(next) - grid.t(cur);
        const Latent& drift = pub_drift[static_cast<std::size_t>(k - 1)];
        Latent delta(static_cast<std::size_t>(dim));
        for (int i = 0; i < dim; ++i) {
            delta[static_cast<std::size_t>(i)] = h * drift[static_cast<std::size_t>(i)];
        }
        if (k > 1 && communicate(step, k, seq) && active(k - 1, step)) {
            auto [prev, prev_next] = scheduler(N, step, k - 1, seq);
            (void)prev_next;
            if (prev != c.anchor_index) {
                internal_error("anchor desync on core " + std::to_string(k) + " at step " +
                               std::to_string(step) + ": anchor index " +
                               std::to_string(c.anchor_index) + ", upstream cur " +
                               std::to_string(prev));
            }
            if (c.anchor_drift_pending) {
                internal_error("anchor drift unavailable on core " + std::to_string(k) +
                               " at step " + std::to_string(step));
            }
            Latent corr = rectify(pub_latent[static_cast<std::size_t>(k - 2)], c.x_prev,
                                  pub_drift[static_cast<std::size_t>(k - 2)], c.anchor_drift,
                                  grid.t(next) - grid.t(prev));
            for (int i = 0; i < dim; ++i) {
                delta[static_cast<std::size_t>(i)] += corr[static_cast<std::size_t>(i)];
            }
            c.x_prev.resize(static_cast<std::size_t>(dim));
            for (int i = 0; i < dim; ++i) {
                c.x_prev[static_cast<std::size_t>(i)] =
                    c.x[static_cast<std::size_t>(i)] + delta[static_cast<std::size_t>(i)];
            }
            c.anchor_index = next;
            c.anchor_drift_pending = true;
        }
        for (int i = 0; i < dim; ++i) {
            c.x[static_cast<std::size_t>(i)] += delta[static_cast<std::size_t>(i)];
        }
        if (next == N) {
            c.finished = true;
            emitted_this_step[static_cast<std::size_t>(k - 1)] = 1;
        }
    }

    // End of step: record emissions (most aggressive core first), apply
    // the termination criterion, advance the global step.
    void end_of_step() {
        double wall_ms =
            std::chrono::duration<double, std::milli>(Clock::now() - start_time).count();
        for (int k = K; k >= 1; --k) {
            if (!emitted_this_step[static_cast<std::size_t>(k - 1)]) continue;
            emitted_this_step[static_cast<std::size_t>(k - 1)] = 0;
            StreamedOutput rec;
            rec.core = k;
            rec.global_step = step;
            rec.sequential_passes = finish_steps[static_cast<std::size_t>(k - 1)];
            rec.latent = cores[static_cast<std::size_t>(k - 1)].x;
            rec.wall_ms = wall_ms;
            rec.is_final = (k == 1);
            outputs.push_back(std::move(rec));
            const StreamedOutput& just = outputs.back();
            if (term.mode == TerminationCriterion::Mode::fixed_core &&
                just.core == term.target_core) {
                stop = true;
            }
            if (term.mode == TerminationCriterion::Mode::residual && outputs.size() >= 2) {
                const StreamedOutput& before = outputs[outputs.size() - 2];
                if (relative_rms(just.latent, before.latent) <= term.tau) stop = true;
            }
            if (just.core == 1) stop = true;
        }
        if (step >= N) stop = true;
        ++step;
    }
};

void run_reference(EngineContext& ctx) {
    while (!ctx.stop) {
        for (int k = 1; k <= ctx.K; ++k) {
            if (ctx.active(k, ctx.step)) ctx.phase1(k);
        }
        for (int k = 1; k <= ctx.K; ++k) {
            if (ctx.active(k, ctx.step)) ctx.phase2(k);
        }
        ctx.end_of_step();
    }
}

void run_parallel(EngineContext& ctx) {
    std::mutex fail_mutex;
    std::exception_ptr failure;
    auto on_completion = [&ctx, &fail_mutex, &failure]() noexcept {
        {
            std::lock_guard<std::mutex> lock(fail_mutex);
            if (failure) {
                ctx.stop = true;
                return;
            }
        }
        ctx.end_of_step();
    };
    std::barrier phase_done(ctx.K);
    std::barrier step_done(ctx.K, on_completion);

    auto worker = [&](int k) {
        while (true) {
            int s = ctx.step;
            if (ctx.stop) break;
            bool act = ctx.active(k, s);
            try {
                if (act) ctx.phase1(k);
            } catch (...) {
                std::lock_guard<std::mutex> lock(fail_mutex);
                if (!failure) failure = std::current_exception();
                act = false;
            }
            phase_done.arrive_and_wait();
            try {
                if (act) ctx.phase2(k);
            } catch (...) {
                std::lock_guard<std::mutex> lock(fail_mutex);
                if (!failure) failure = std::current_exception();
            }
            step_done.arrive_and_wait();
        }
    };

    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(ctx.K));
    for (int k = 1; k <= ctx.K; ++k) workers.emplace_back(worker, k);
    for (auto& w : workers) w.join();
    if (failure) std::rethrow_exception(failure);
}

std::string describe_mismatch(const std::vector<StreamedOutput>& a,
                              const std::vector<StreamedOutput>& b) {
    std::ostringstream os;
    os << "executor divergence: reference produced " << a.size() << " outputs, parallel "
       << b.size();
    std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (a[i].core != b[i].core || a[i].global_step != b[i].global_step) {
            os << "; record " << i << " header differs (core " << a[i].core << "/" << b[i].core
               << ", step " << a[i].global_step << "/" << b[i].global_step << ")";
            return os.str();
        }
        for (std::size_t d = 0; d < a[i].latent.size(); ++d) {
            if (a[i].latent[d] != b[i].latent[d]) {
                os << "; record " << i << " (core " << a[i].core << ") component " << d
                   << " differs: " << a[i].latent[d] << " vs " << b[i].latent[d];
                return os.str();
            }
        }
    }
    return os.str();
}

}  // namespace

ChordsResult run_chords(const DriftField& field, const TimeGrid& grid, const InitSequence& seq,
                        std::span<const double> x0, const TerminationCriterion& term,
                        Executor executor) {
    if (executor == Executor::verify) {
        ChordsResult ref = run_chords(field, grid, seq, x0, term, Executor::reference);
        ChordsResult par = run_chords(field, grid, seq, x0, term, Executor::parallel);
        bool same = ref.outputs.size() == par.outputs.size();
        for (std::size_t i = 0; same && i < ref.outputs.size(); ++i) {
            same = ref.outputs[i].core == par.outputs[i].core &&
                   ref.outputs[i].global_step == par.outputs[i].global_step &&
                   ref.outputs[i].latent == par.outputs[i].latent;
        }
        if (!same) internal_error(describe_mismatch(ref.outputs, par.outputs));
        return ref;
    }

    EngineContext ctx(field, grid, seq, x0, term);
    if (executor == Executor::reference) {
        run_reference(ctx);
    } else {
        run_parallel(ctx);
    }
    ChordsResult out;
    out.outputs = std::move(ctx.outputs);
    out.evals = std::move(ctx.evals);
    out.steps_executed = ctx.step - 1;
    return out;
}

}  // namespace chords
