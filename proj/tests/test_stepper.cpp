#include <doctest.h>

#include <cmath>

#include "chords/stepper.hpp"
#include "test_support.hpp"

using namespace chords;
using namespace chords::test;

TEST_CASE("euler_step basic behavior") {
    DriftField lin = linear_field(1.0, 1);
    StepDelta d = euler_step(lin, Latent{1.0}, 0.0, 0.5);
    CHECK(d.delta == Latent{0.5});
    CHECK(d.drift_value == Latent{1.0});

    DriftField zero = linear_field(0.0, 2);
    StepDelta z = euler_step(zero, Latent{3.0, 4.0}, 0.2, 0.4);
    CHECK(z.delta == Latent{0.0, 0.0});

    CHECK_THROWS_AS(euler_step(lin, Latent{1.0}, 0.5, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(euler_step(lin, Latent{1.0}, 0.6, 0.5), std::invalid_argument);
}

TEST_CASE("two half steps differ from one full step at second order") {
    DriftField f = mlp_field(13, 8, 24, 2);
    Latent x = gaussian_vector(4, 8);
    double t = 0.2;
    std::vector<double> log_d, log_e;
    for (double delta : {1e-1, 1e-2, 1e-3}) {
        Latent one = x;
        add_scaled(one, 1.0, euler_step(f, x, t, t + delta).delta);
        Latent half = x;
        add_scaled(half, 1.0, euler_step(f, x, t, t + 0.5 * delta).delta);
        Latent two = half;
        add_scaled(two, 1.0, euler_step(f, half, t + 0.5 * delta, t + delta).delta);
        log_d.push_back(std::log(delta));
        log_e.push_back(std::log(rms_diff(one, two)));
    }
    CHECK(fit_slope(log_d, log_e) > 1.9);
}

TEST_CASE("rectify closed-form values") {
    // identical states cancel exactly
    Latent x{1.0, 2.0};
    Latent fx{0.3, -0.7};
    CHECK(rectify(x, x, fx, fx, 0.5) == Latent{0.0, 0.0});

    // f(x) = x substitution
    double eh = std::exp(0.5);
    Latent acc{eh}, coarse{1.5};
    Latent out = rectify(acc, coarse, acc, coarse, 0.5);
    CHECK(out[0] == doctest::Approx(1.5 * (eh - 1.5)).epsilon(1e-12));
    CHECK(out[0] == doctest::Approx(0.22308).epsilon(1e-4));

    CHECK_THROWS_AS(rectify(Latent{1.0}, Latent{1.0, 2.0}, Latent{0.0}, Latent{0.0}, 0.1),
                    std::invalid_argument);
    CHECK_THROWS_AS(rectify(x, x, fx, fx, 0.0), std::invalid_argument);
}

TEST_CASE("rectify reproduces the two-core propagation identity") {
    // slow core at value e^t, fast core anchored at 1 + t; after one
    // rectified step of duration t the fast value at 2t is
    // e^{2t} - (e^t - t - 1)^2 for f(x) = x
    for (double t : {0.1, 0.25, 0.5}) {
        double slow = std::exp(t);
        double anchor = 1.0 + t;
        double pre = anchor * std::exp(t);
        Latent corr = rectify(Latent{slow}, Latent{anchor}, Latent{slow}, Latent{anchor}, t);
        double post = pre + corr[0];
        double want = std::exp(2.0 * t) - std::pow(std::exp(t) - t - 1.0, 2);
        CHECK(post == doctest::Approx(want).epsilon(1e-13));
    }
}

TEST_CASE("rectify is antisymmetric and affine in the state differences") {
    SplitMix64 rng(9);
    for (int trial = 0; trial < 30; ++trial) {
        Latent a = gaussian_vector(100 + trial, 5);
        Latent b = gaussian_vector(200 + trial, 5);
        Latent fa = gaussian_vector(300 + trial, 5);
        Latent fb = gaussian_vector(400 + trial, 5);
        double dt = 0.1 + rng.next_uniform();
        Latent fwd = rectify(a, b, fa, fb, dt);
        Latent bwd = rectify(b, a, fb, fa, dt);
        for (std::size_t d = 0; d < fwd.size(); ++d) {
            CHECK(fwd[d] == doctest::Approx(-bwd[d]).epsilon(1e-12));
        }
        // scaling both differences scales the output
        Latent a2 = b, fa2 = fb;
        add_scaled(a2, 2.0, sub(a, b));
        add_scaled(fa2, 2.0, sub(fa, fb));
        Latent twice = rectify(a2, b, fa2, fb, dt);
        for (std::size_t d = 0; d < fwd.size(); ++d) {
            CHECK(twice[d] == doctest::Approx(2.0 * fwd[d]).epsilon(1e-10));
        }
    }
}

TEST_CASE("rectification error is second order in the horizon") {
    DriftField f = mlp_field(2024, 16, 32, 2);
    Latent x = gaussian_vector(5, 16);
    Latent u = gaussian_vector(6, 16);
    double nu = norm2(u);
    for (double& v : u) v /= nu;
    double eps = 1e-2, t = 0.3;
    Latent xp = x;
    add_scaled(xp, eps, u);

    std::vector<double> log_d, log_r;
    for (double delta : {1e-1, 3e-2, 1e-2, 3e-3, 1e-3}) {
        Latent acc_end = rk4_integrate(f, x, t, t + delta, 256);
        Latent per_end = rk4_integrate(f, xp, t, t + delta, 256);
        Latent corr = rectify(x, xp, f(x, t), f(xp, t), delta);
        Latent rectified = per_end;
        add_scaled(rectified, 1.0, corr);
        double unrect = rms_diff(per_end, acc_end);
        double rect_err = rms_diff(rectified, acc_end);
        CHECK(rect_err < unrect);
        log_d.push_back(std::log(delta));
        log_r.push_back(std::log(rect_err));
    }
    CHECK(fit_slope(log_d, log_r) >= 1.9);
}
