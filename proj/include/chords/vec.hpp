#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace chords {

using Latent = std::vector<double>;

inline void check_same_dim(std::span<const double> a, std::span<const double> b,
                           const char* what) {
    if (a.size() != b.size()) {
        throw std::invalid_argument(std::string(what) + ": dimension mismatch");
    }
}

// y += s * x
inline void add_scaled(Latent& y, double s, std::span<const double> x) {
    check_same_dim(y, x, "add_scaled");
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += s * x[i];
}

inline Latent sub(std::span<const double> a, std::span<const double> b) {
    check_same_dim(a, b, "sub");
    Latent out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

inline double rms(std::span<const double> a) {
    if (a.empty()) return 0.0;
    double acc = 0.0;
    for (double v : a) acc += v * v;
    return std::sqrt(acc / static_cast<double>(a.size()));
}

inline double rms_diff(std::span<const double> a, std::span<const double> b) {
    check_same_dim(a, b, "rms_diff");
    if (a.empty()) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(a.size()));
}

// ||a - b||_rms / ||b||_rms, guarded against a zero reference
inline double relative_rms(std::span<const double> a, std::span<const double> b) {
    double base = rms(b);
    return rms_diff(a, b) / (base > 0.0 ? base : 1e-300);
}

inline double mean_abs_diff(std::span<const double> a, std::span<const double> b) {
    check_same_dim(a, b, "mean_abs_diff");
    if (a.empty()) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
    return acc / static_cast<double>(a.size());
}

inline double norm2(std::span<const double> a) {
    double acc = 0.0;
    for (double v : a) acc += v * v;
    return std::sqrt(acc);
}

}  // namespace chords
