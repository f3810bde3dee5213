#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "chords/vec.hpp"

namespace chords {

/**
 * A pure vector field f(x, t) on [0, 1], the right-hand side of the
 * sampling ODE. Fields are deterministic (identical inputs give
 * bit-identical outputs), dimension-preserving, and hold no mutable
 * state, so one instance can be evaluated concurrently from any number
 * of workers. All solver cost is measured in evaluations of this type;
 * counting is done by callers, never inside the field.
 */
class DriftField {
public:
    using Fn = std::function<void(std::span<const double>, double, std::span<double>)>;

    DriftField() = default;
    DriftField(int dim, std::string label, Fn fn)
        : dim_(dim), label_(std::move(label)), fn_(std::move(fn)) {}

    int dim() const { return dim_; }
    const std::string& label() const { return label_; }

    void eval_into(std::span<const double> x, double t, std::span<double> out) const {
        fn_(x, t, out);
    }

    Latent operator()(std::span<const double> x, double t) const {
        Latent out(static_cast<std::size_t>(dim_));
        fn_(x, t, out);
        return out;
    }

private:
    int dim_ = 0;
    std::string label_;
    Fn fn_;
};

// Per-core field-evaluation tallies. Owned by whoever drives the solve;
// workers write only their own slot and totals are read after the run.
struct EvalCounter {
    std::vector<long long> per_core_evals;

    explicit EvalCounter(int cores = 1)
        : per_core_evals(static_cast<std::size_t>(cores), 0) {}

    void add(int core_index, long long n = 1) {
        per_core_evals[static_cast<std::size_t>(core_index)] += n;
    }

    long long total() const {
        long long s = 0;
        for (long long v : per_core_evals) s += v;
        return s;
    }
};

/**
 * Mixture of Gaussians used as the analytic target distribution.
 * Weights are positive and normalized to 1 within 1e-12; covariances are
 * symmetric positive-definite (checked at construction).
 */
struct GaussianMixture {
    int dim = 0;
    std::vector<double> weights;
    std::vector<Latent> means;                 // one D-vector per component
    std::vector<std::vector<double>> covs;     // row-major D*D per component

    GaussianMixture() = default;
    GaussianMixture(int D, std::vector<double> w, std::vector<Latent> mu,
                    std::vector<std::vector<double>> sigma);

    int components() const { return static_cast<int>(weights.size()); }

    // log density of the mixture at x (log-sum-exp over components)
    double log_density(std::span<const double> x) const;

    // draw one sample (component choice + Gaussian draw, 1 + D normals)
    Latent sample(struct SplitMix64& rng) const;
};

// Eight equally weighted components on a circle of the given radius,
// isotropic covariance sigma^2 I. The stock two-dimensional target for
// benchmarks.
GaussianMixture ring_mixture(int components = 8, double radius = 2.0, double sigma = 0.35);

// f(x, t) = lambda * x; exact solution x_0 * exp(lambda * t)
DriftField linear_field(double lambda, int dim);

/**
 * Fixed-weight tanh network standing in for a learned drift. The input is
 * x augmented with t; weights are drawn once from the SplitMix64 counter
 * stream (normal, variance 1/fan-in, row-major per layer, biases zero),
 * so a seed identifies the same field in any implementation.
 */
DriftField mlp_field(std::uint64_t seed, int dim, int width, int depth);

// Analytic flow-matching velocity transporting N(0, I) at t = 0 to the
// mixture at t = 1 along the linear noise-to-data path.
DriftField gmm_flow_field(const GaussianMixture& mix);

// f_coef(t) * x - 0.5 * g_coef(t)^2 * eps(x, t)
DriftField pf_ode_field(std::function<double(double)> f_coef,
                        std::function<double(double)> g_coef,
                        DriftField eps_predictor);

}  // namespace chords
