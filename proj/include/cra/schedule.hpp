#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "cra/errors.hpp"

namespace cra {

/// Quintic annealing schedule s(theta) = 6 theta^5 - 15 theta^4 + 10 theta^3.
/// First and second derivatives vanish at both endpoints.
inline double s_of_theta(double theta) {
    if (theta < 0.0 || theta > 1.0) throw Error("s_of_theta: theta outside [0, 1]");
    return ((6.0 * theta - 15.0) * theta + 10.0) * theta * theta * theta;
}

/// ds/dtheta = 30 theta^2 (1 - theta)^2.
inline double s_dot(double theta) {
    if (theta < 0.0 || theta > 1.0) throw Error("s_dot: theta outside [0, 1]");
    const double u = theta * (1.0 - theta);
    return 30.0 * u * u;
}

/// One evaluated point of the annealing path lambda = s(theta)^q.
struct ScheduleSample {
    double theta = 0.0;
    double s = 0.0;
    double s_dot = 0.0;
    double lambda = 0.0;
    double lambda_dot = 0.0;
    double q = 1.0;
};

/// lambda = s^q and dlambda/dtheta = q s^(q-1) sdot. For q < 1 the s -> 0
/// limit is taken analytically: sdot ~ theta^2 dominates s^(q-1) ~
/// theta^(3q-3), so the product vanishes at theta = 0 for every q > 1/3 and
/// in particular for q = 1/2.
inline std::pair<double, double> lambda_and_dot(double theta, double q) {
    if (q <= 0.0) throw Error("lambda_and_dot: q must be positive");
    const double s = s_of_theta(theta);
    const double sd = s_dot(theta);
    if (s == 0.0) return {0.0, 0.0};
    return {std::pow(s, q), q * std::pow(s, q - 1.0) * sd};
}

inline ScheduleSample schedule_sample(double theta, double q) {
    ScheduleSample smp;
    smp.theta = theta;
    smp.q = q;
    smp.s = s_of_theta(theta);
    smp.s_dot = s_dot(theta);
    auto [lam, lam_dot] = lambda_and_dot(theta, q);
    smp.lambda = lam;
    smp.lambda_dot = lam_dot;
    return smp;
}

/// Effective tunnelling amplitude: Gamma~ = tau Gamma int_0^1 lambda(theta)
/// [1 - s(theta)] dtheta, by adaptive Gauss-Kronrod quadrature (absolute
/// tolerance 1e-12). For q = 1 the integral is 25/231 in closed form.
inline double effective_gamma(double tau, double gamma, double q) {
    if (tau <= 0.0 || gamma <= 0.0) throw Error("effective_gamma: tau, gamma must be positive");
    auto integrand = [q](double theta) {
        const double s = s_of_theta(theta);
        return (s == 0.0 ? 0.0 : std::pow(s, q)) * (1.0 - s);
    };
    double error = 0.0;
    const double integral = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        integrand, 0.0, 1.0, /*max_depth=*/15, /*tol=*/1e-14, &error);
    if (error > 1e-12) throw Error("effective_gamma: quadrature did not reach 1e-12");
    return tau * gamma * integral;
}

/// Perturbative short-time fidelity estimate P_GS ~ GammaTilde^(2 N (1-c)).
inline double perturbative_pgs(int n, double c, double gamma_tilde) {
    return std::pow(gamma_tilde, 2.0 * n * (1.0 - c));
}

/// The exponent gamma_pred = 2 (1-c) |log2 GammaTilde| of the predicted
/// scaling law P_GS ~ 2^(-gamma N).
inline double perturbative_exponent(double c, double gamma_tilde) {
    return 2.0 * (1.0 - c) * std::abs(std::log2(gamma_tilde));
}

}  // namespace cra
