#include <catch2/catch_amalgamated.hpp>

#include "cra/schedule.hpp"

using namespace cra;

TEST_CASE("quintic schedule values") {
    CHECK(s_of_theta(0.0) == 0.0);
    CHECK(s_of_theta(1.0) == 1.0);
    CHECK(s_of_theta(0.5) == Catch::Approx(0.5).epsilon(1e-14));
    CHECK(s_of_theta(0.25) == Catch::Approx(0.103515625).epsilon(1e-14));
    CHECK_THROWS_AS(s_of_theta(-0.1), Error);
    CHECK_THROWS_AS(s_of_theta(1.1), Error);
}

TEST_CASE("schedule derivative") {
    CHECK(s_dot(0.0) == 0.0);
    CHECK(s_dot(1.0) == 0.0);
    CHECK(s_dot(0.5) == Catch::Approx(1.875).epsilon(1e-14));

    // central finite differences of s_of_theta at theta = 0.3
    const double h = 1e-5;
    const double fd = (s_of_theta(0.3 + h) - s_of_theta(0.3 - h)) / (2.0 * h);
    CHECK(std::abs(fd - s_dot(0.3)) < 1e-8);

    // second derivative vanishes at the boundaries
    CHECK(std::abs((s_dot(1e-7) - s_dot(0.0)) / 1e-7) < 1e-4);
    CHECK(std::abs((s_dot(1.0) - s_dot(1.0 - 1e-7)) / 1e-7) < 1e-4);
}

TEST_CASE("schedule is a monotone bijection of [0,1]") {
    double prev = -1.0;
    for (int i = 0; i <= 2000; ++i) {
        const double s = s_of_theta(i / 2000.0);
        CHECK(s >= 0.0);
        CHECK(s <= 1.0);
        CHECK(s > prev);
        prev = s;
        CHECK(s_dot(i / 2000.0) >= 0.0);
    }
}

TEST_CASE("path lambda = s^q") {
    for (int i = 0; i <= 100; ++i) {
        const double theta = i / 100.0;
        auto [lam, lam_dot] = lambda_and_dot(theta, 1.0);
        CHECK(lam == s_of_theta(theta));
        CHECK(lam_dot == s_dot(theta));
    }

    auto [l0, ld0] = lambda_and_dot(0.0, 0.5);
    CHECK(l0 == 0.0);
    CHECK(ld0 == 0.0); // analytic limit

    auto [l, ld] = lambda_and_dot(0.5, 0.5);
    CHECK(l == Catch::Approx(std::sqrt(0.5)).epsilon(1e-14));
    CHECK(ld == Catch::Approx(1.3258252147247767).epsilon(1e-12));

    for (const double q : {0.3, 0.5, 1.0, 2.0}) {
        CHECK(lambda_and_dot(0.0, q).first == 0.0);
        CHECK(lambda_and_dot(1.0, q).first == 1.0);
    }
    CHECK_THROWS_AS(lambda_and_dot(0.5, 0.0), Error);
}

TEST_CASE("effective tunnelling amplitude") {
    // q = 1 closed form: 25/231
    CHECK(effective_gamma(1.0, 1.0, 1.0) == Catch::Approx(25.0 / 231.0).margin(1e-10));
    // exactly linear in tau and Gamma
    CHECK(effective_gamma(2.0, 1.0, 1.0) ==
          Catch::Approx(2.0 * effective_gamma(1.0, 1.0, 1.0)).epsilon(1e-14));
    CHECK(effective_gamma(1.0, 0.5, 1.0) ==
          Catch::Approx(0.5 * effective_gamma(1.0, 1.0, 1.0)).epsilon(1e-14));

    // q = 1/2: independent composite-Simpson oracle at two resolutions
    auto simpson = [](int points) {
        const double h = 1.0 / (points - 1);
        double sum = 0.0;
        for (int i = 0; i < points; ++i) {
            const double s = s_of_theta(i * h);
            const double f = std::sqrt(s) * (1.0 - s);
            sum += f * ((i == 0 || i == points - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0));
        }
        return sum * h / 3.0;
    };
    const double coarse = simpson(20001);
    const double fine = simpson(40001);
    CHECK(std::abs(coarse - fine) < 1e-10);
    CHECK(effective_gamma(1.0, 1.0, 0.5) == Catch::Approx(fine).margin(1e-9));
    CHECK(effective_gamma(1.0, 1.0, 0.5) == Catch::Approx(0.18732681803532808).margin(1e-9));
}

TEST_CASE("perturbative fidelity estimate") {
    CHECK(perturbative_pgs(30, 1.0, 0.2) == 1.0);
    CHECK(perturbative_pgs(17, 1.0, 0.9) == 1.0);

    const double gt = 25.0 / 231.0;
    const double p = perturbative_pgs(30, 0.7, gt);
    CHECK(p == Catch::Approx(4.148628227992870e-18).epsilon(1e-12));
    CHECK(p > 1e-18);
    CHECK(p < 1e-17);

    CHECK(perturbative_exponent(0.7, gt) == Catch::Approx(1.9246).margin(5e-4));

    // monotone increasing in c, decreasing in N for GammaTilde < 1
    CHECK(perturbative_pgs(30, 0.8, gt) > perturbative_pgs(30, 0.7, gt));
    CHECK(perturbative_pgs(40, 0.7, gt) < perturbative_pgs(30, 0.7, gt));
}
