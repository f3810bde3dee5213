#include "chords/drift.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>

#include "chords/rng.hpp"

namespace chords {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd to_matrix(const std::vector<double>& flat, int D) {
    if (flat.size() != static_cast<std::size_t>(D) * static_cast<std::size_t>(D)) {
        throw std::invalid_argument("GaussianMixture: covariance must be D*D");
    }
    MatrixXd m(D, D);
    for (int r = 0; r < D; ++r)
        for (int c = 0; c < D; ++c) m(r, c) = flat[static_cast<std::size_t>(r * D + c)];
    return m;
}

constexpr double kLog2Pi = 1.8378770664093454836;  // ln(2*pi)

}  // namespace

GaussianMixture::GaussianMixture(int D, std::vector<double> w, std::vector<Latent> mu,
                                 std::vector<std::vector<double>> sigma)
    : dim(D), weights(std::move(w)), means(std::move(mu)), covs(std::move(sigma)) {
    if (dim < 1) throw std::invalid_argument("GaussianMixture: dim must be >= 1");
    if (weights.empty() || weights.size() != means.size() || weights.size() != covs.size()) {
        throw std::invalid_argument("GaussianMixture: weights/means/covs size mismatch");
    }
    double sum = 0.0;
    for (double v : weights) {
        if (!(v > 0.0)) throw std::invalid_argument("GaussianMixture: weights must be positive");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
        throw std::invalid_argument("GaussianMixture: weights must sum to 1 within 1e-12");
    }
    for (const auto& m : means) {
        if (m.size() != static_cast<std::size_t>(dim)) {
            throw std::invalid_argument("GaussianMixture: mean dimension mismatch");
        }
    }
    for (const auto& c : covs) {
        MatrixXd S = to_matrix(c, dim);
        if (!S.isApprox(S.transpose(), 1e-12)) {
            throw std::invalid_argument("GaussianMixture: covariance must be symmetric");
        }
        Eigen::LLT<MatrixXd> llt(S);
        if (llt.info() != Eigen::Success) {
            throw std::invalid_argument("GaussianMixture: covariance must be positive-definite");
        }
    }
}

double GaussianMixture::log_density(std::span<const double> x) const {
    if (x.size() != static_cast<std::size_t>(dim)) {
        throw std::invalid_argument("GaussianMixture::log_density: dimension mismatch");
    }
    Eigen::Map<const VectorXd> xv(x.data(), dim);
    double lse = -std::numeric_limits<double>::infinity();
    std::vector<double> logs(weights.size());
    for (std::size_t j = 0; j < weights.size(); ++j) {
        MatrixXd S = to_matrix(covs[j], dim);
        Eigen::Map<const VectorXd> muv(means[j].data(), dim);
        Eigen::LLT<MatrixXd> llt(S);
        VectorXd r = xv - muv;
        VectorXd z = llt.solve(r);
        double logdet = 0.0;
        for (int i = 0; i < dim; ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
        logs[j] = std::log(weights[j]) -
                  0.5 * (dim * kLog2Pi + logdet + r.dot(z));
        if (logs[j] > lse) lse = logs[j];
    }
    double acc = 0.0;
    for (double lj : logs) acc += std::exp(lj - lse);
    return lse + std::log(acc);
}

Latent GaussianMixture::sample(SplitMix64& rng) const {
    double u = rng.next_uniform();
    std::size_t j = 0;
    double cum = 0.0;
    for (; j < weights.size(); ++j) {
        cum += weights[j];
        if (u < cum) break;
    }
    if (j == weights.size()) j = weights.size() - 1;
    MatrixXd S = to_matrix(covs[j], dim);
    Eigen::LLT<MatrixXd> llt(S);
    VectorXd g(dim);
    for (int i = 0; i < dim; ++i) g(i) = rng.next_normal();
    VectorXd s = Eigen::Map<const VectorXd>(means[j].data(), dim) +
                 MatrixXd(llt.matrixL()) * g;
    return Latent(s.data(), s.data() + dim);
}

GaussianMixture ring_mixture(int components, double radius, double sigma) {
    if (components < 1) throw std::invalid_argument("ring_mixture: components must be >= 1");
    std::vector<double> w(static_cast<std::size_t>(components),
                          1.0 / static_cast<double>(components));
    // renormalize exactly so the 1e-12 weight invariant holds for any count
    double sum = 0.0;
    for (double v : w) sum += v;
    for (double& v : w) v /= sum;
    std::vector<Latent> mu;
    std::vector<std::vector<double>> covs;
    for (int j = 0; j < components; ++j) {
        double ang = 2.0 * std::numbers::pi * static_cast<double>(j) /
                     static_cast<double>(components);
        mu.push_back({radius * std::cos(ang), radius * std::sin(ang)});
        covs.push_back({sigma * sigma, 0.0, 0.0, sigma * sigma});
    }
    return GaussianMixture(2, std::move(w), std::move(mu), std::move(covs));
}

DriftField linear_field(double lambda, int dim) {
    if (dim < 1) throw std::invalid_argument("linear_field: dim must be >= 1");
    return DriftField(dim, "linear", [lambda](std::span<const double> x, double, std::span<double> out) {
        for (std::size_t i = 0; i < x.size(); ++i) out[i] = lambda * x[i];
    });
}

namespace {

struct MlpWeights {
    int dim = 0;
    int width = 0;
    int depth = 0;
    // layer l: W[out][in] row-major, no biases
    std::vector<std::vector<double>> layers;
    std::vector<int> in_sizes;
    std::vector<int> out_sizes;
};

std::shared_ptr<const MlpWeights> build_mlp(std::uint64_t seed, int dim, int width, int depth) {
    auto w = std::make_shared<MlpWeights>();
    w->dim = dim;
    w->width = width;
    w->depth = depth;
    SplitMix64 rng(seed);
    int in = dim + 1;  // x augmented with t
    for (int l = 0; l <= depth; ++l) {
        int out = (l == depth) ? dim : width;
        double scale = 1.0 / std::sqrt(static_cast<double>(in));
        std::vector<double> W(static_cast<std::size_t>(out) * static_cast<std::size_t>(in));
        for (double& v : W) v = scale * rng.next_normal();
        w->layers.push_back(std::move(W));
        w->in_sizes.push_back(in);
        w->out_sizes.push_back(out);
        in = out;
    }
    return w;
}

}  // namespace

DriftField mlp_field(std::uint64_t seed, int dim, int width, int depth) {
    if (dim < 1) throw std::invalid_argument("mlp_field: dim must be >= 1");
    if (width < 1 || depth < 1) {
        throw std::invalid_argument("mlp_field: width and depth must be >= 1");
    }
    auto weights = build_mlp(seed, dim, width, depth);
    std::string label = "mlp(seed=" + std::to_string(seed) + ")";
    return DriftField(dim, label,
                      [weights](std::span<const double> x, double t, std::span<double> out) {
        std::vector<double> a(x.begin(), x.end());
        a.push_back(t);
        std::vector<double> b;
        for (std::size_t l = 0; l < weights->layers.size(); ++l) {
            int in = weights->in_sizes[l];
            int on = weights->out_sizes[l];
            const auto& W = weights->layers[l];
            b.assign(static_cast<std::size_t>(on), 0.0);
            for (int r = 0; r < on; ++r) {
                double acc = 0.0;
                const double* row = W.data() + static_cast<std::size_t>(r) * in;
                for (int c = 0; c < in; ++c) acc += row[c] * a[static_cast<std::size_t>(c)];
                b[static_cast<std::size_t>(r)] =
                    (l + 1 == weights->layers.size()) ? acc : std::tanh(acc);
            }
            a.swap(b);
        }
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i];
    });
}

namespace {

struct GmmFlowPrep {
    int dim = 0;
    std::vector<double> weights;
    std::vector<VectorXd> means;
    std::vector<MatrixXd> sigmas;
};

}  // namespace

DriftField gmm_flow_field(const GaussianMixture& mix) {
    auto prep = std::make_shared<GmmFlowPrep>();
    prep->dim = mix.dim;
    prep->weights = mix.weights;
    for (std::size_t j = 0; j < mix.weights.size(); ++j) {
        prep->means.emplace_back(Eigen::Map<const VectorXd>(mix.means[j].data(), mix.dim));
        prep->sigmas.push_back(to_matrix(mix.covs[j], mix.dim));
    }
    std::string label = "gmm_flow(" + std::to_string(mix.components()) + "c)";
    return DriftField(mix.dim, label,
                      [prep](std::span<const double> x, double t, std::span<double> out) {
        const int D = prep->dim;
        const std::size_t J = prep->weights.size();
        Eigen::Map<const VectorXd> xv(x.data(), D);
        std::vector<double> log_resp(J);
        std::vector<VectorXd> vel(J);
        double one_mt = 1.0 - t;
        for (std::size_t j = 0; j < J; ++j) {
            const MatrixXd& S = prep->sigmas[j];
            MatrixXd A = (one_mt * one_mt) * MatrixXd::Identity(D, D) + (t * t) * S;
            Eigen::LLT<MatrixXd> llt(A);
            VectorXd r = xv - t * prep->means[j];
            VectorXd z = llt.solve(r);
            double logdet = 0.0;
            for (int i = 0; i < D; ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
            // responsibilities in log space; max-subtraction happens below
            log_resp[j] = std::log(prep->weights[j]) -
                          0.5 * (D * kLog2Pi + logdet + r.dot(z));
            vel[j] = prep->means[j] + t * (S * z) - one_mt * z;
        }
        double mx = log_resp[0];
        for (std::size_t j = 1; j < J; ++j) mx = std::max(mx, log_resp[j]);
        double norm = 0.0;
        for (std::size_t j = 0; j < J; ++j) norm += std::exp(log_resp[j] - mx);
        VectorXd v = VectorXd::Zero(D);
        for (std::size_t j = 0; j < J; ++j) {
            v += (std::exp(log_resp[j] - mx) / norm) * vel[j];
        }
        for (int i = 0; i < D; ++i) out[static_cast<std::size_t>(i)] = v(i);
    });
}

DriftField pf_ode_field(std::function<double(double)> f_coef,
                        std::function<double(double)> g_coef,
                        DriftField eps_predictor) {
    if (!f_coef || !g_coef) {
        throw std::invalid_argument("pf_ode_field: coefficient functions are required");
    }
    int dim = eps_predictor.dim();
    std::string label = "pf_ode(" + eps_predictor.label() + ")";
    return DriftField(dim, label,
                      [f_coef, g_coef, eps = std::move(eps_predictor)](
                          std::span<const double> x, double t, std::span<double> out) {
        eps.eval_into(x, t, out);
        double f = f_coef(t);
        double half_g2 = 0.5 * g_coef(t) * g_coef(t);
        for (std::size_t i = 0; i < x.size(); ++i) {
            out[i] = f * x[i] - half_g2 * out[i];
        }
    });
}

}  // namespace chords
