#include "chords/stepper.hpp"

#include <stdexcept>

namespace chords {

StepDelta euler_step(const DriftField& field, std::span<const double> x, double t, double t_next) {
    if (!(t_next > t)) {
        throw std::invalid_argument("euler_step: t_next must be greater than t");
    }
    StepDelta out;
    out.drift_value = field(x, t);
    out.delta.resize(x.size());
    double h = t_next - t;
    for (std::size_t i = 0; i < x.size(); ++i) {
        out.delta[i] = h * out.drift_value[i];
    }
    return out;
}

Latent rectify(std::span<const double> x_acc, std::span<const double> x_coarse,
               std::span<const double> f_acc, std::span<const double> f_coarse,
               double delta_t) {
    check_same_dim(x_acc, x_coarse, "rectify");
    check_same_dim(x_acc, f_acc, "rectify");
    check_same_dim(x_acc, f_coarse, "rectify");
    if (!(delta_t > 0.0)) {
        throw std::invalid_argument("rectify: delta_t must be positive");
    }
    Latent out(x_acc.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = delta_t * (f_acc[i] - f_coarse[i]) + (x_acc[i] - x_coarse[i]);
    }
    return out;
}

}  // namespace chords
