#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "cra/errors.hpp"

namespace cra {

/// Time to solution: expected total time of repeated runs of length tau to
/// reach the target state at least once with probability p_d.
/// tts = tau log(1 - p_d) / log(1 - P_GS); P_GS = 0 maps to +infinity and
/// P_GS within 1e-15 of 1 clamps to tau (a single run suffices).
inline double tts(double p_gs, double tau, double p_d = 0.99) {
    if (!(p_gs >= 0.0) || p_gs > 1.0) throw Error("tts: P_GS must be in [0, 1]");
    if (!(p_d > 0.0) || !(p_d < 1.0)) throw Error("tts: p_d must be in (0, 1)");
    if (p_gs == 0.0) return std::numeric_limits<double>::infinity();
    if (p_gs >= 1.0 - 1e-15) return tau;
    return tau * std::log1p(-p_d) / std::log1p(-p_gs);
}

struct FitPoint {
    double x = 0.0; // N
    double y = 0.0; // P_GS or cost
};

struct FitResult {
    double exponent = 0.0;     // gamma (P_GS ~ 2^(-gamma N)) or alpha (C ~ N^alpha)
    double intercept = 0.0;    // in the fit's log space
    double residual_rms = 0.0;
    int points_used = 0;
    int points_flagged = 0;    // excluded before the fit (precision floor etc.)
};

namespace detail {

inline FitResult least_squares(const std::vector<double>& xs, const std::vector<double>& ys) {
    const int n = static_cast<int>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw Error("fit: degenerate abscissae");
    FitResult fit;
    const double slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - slope * sx) / n;
    fit.exponent = slope;
    double ss = 0.0;
    for (int i = 0; i < n; ++i) {
        const double r = ys[i] - (slope * xs[i] + fit.intercept);
        ss += r * r;
    }
    fit.residual_rms = std::sqrt(ss / n);
    fit.points_used = n;
    return fit;
}

}  // namespace detail

/// Fits P_GS ~ 2^(-gamma N): unweighted least squares of log2 P_GS against
/// N. Points at or below the precision floor are excluded; fewer than three
/// surviving points raise InsufficientPoints.
inline FitResult fit_scaling_exponent(const std::vector<FitPoint>& points,
                                      double floor = 1e-25) {
    std::vector<double> xs, ys;
    int flagged = 0;
    for (const auto& pt : points) {
        if (!(pt.y > floor)) {
            ++flagged;
            continue;
        }
        xs.push_back(pt.x);
        ys.push_back(std::log2(pt.y));
    }
    if (xs.size() < 3)
        throw InsufficientPoints("fit_scaling_exponent: need >= 3 points above the floor");
    FitResult fit = detail::least_squares(xs, ys);
    fit.exponent = -fit.exponent; // gamma = -slope
    fit.points_flagged = flagged;
    return fit;
}

/// Fits C ~ N^alpha: least squares of ln C against ln N. C must be positive.
inline FitResult fit_power_law(const std::vector<FitPoint>& points) {
    std::vector<double> xs, ys;
    for (const auto& pt : points) {
        if (!(pt.y > 0.0)) continue;
        xs.push_back(std::log(pt.x));
        ys.push_back(std::log(pt.y));
    }
    if (xs.size() < 3) throw InsufficientPoints("fit_power_law: need >= 3 positive points");
    return detail::least_squares(xs, ys);
}

}  // namespace cra
