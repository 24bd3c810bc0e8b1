#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <vector>

#include "cra/csv.hpp"
#include "cra/operators.hpp"
#include "cra/schedule.hpp"

namespace cra {

struct EigResult {
    Vector values;  // ascending
    Matrix vectors; // orthonormal columns
};

/// Dense symmetric eigendecomposition, eigenvalues ascending.
inline EigResult eig_symmetric(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
    if (solver.info() != Eigen::Success) throw Error("eig_symmetric: solver failed");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

inline Vector eigenvalues_only(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw Error("eigenvalues_only: solver failed");
    return solver.eigenvalues();
}

/// Gap E1 - E0 of H_ARA(lambda, s).
inline double gap(const SpinSector& sec, double lambda, double s, const AnnealParams& params) {
    const Matrix h = ara_hamiltonian(sec, lambda, s, params.p, params.gamma, params.e0);
    const Vector ev = eigenvalues_only(h);
    return ev[1] - ev[0];
}

struct PathGap {
    double theta_star = 0.0;
    double gap_min = 0.0;
};

/// Location and value of the minimum gap along the path lambda = s(theta)^q,
/// from a uniform theta grid refined by golden-section search around the
/// grid minimum.
inline PathGap min_gap_along_path(const SpinSector& sec, const AnnealParams& params,
                                  int grid_points = 400) {
    if (grid_points < 2) throw Error("min_gap_along_path: grid too small");
    const OperatorBasis basis = sector_basis(sec, params);
    auto path_gap = [&](double theta) {
        const ScheduleSample smp = schedule_sample(theta, params.q);
        const Vector ev =
            eigenvalues_only(assemble_dense(basis, h_coeffs(params.protocol, smp.lambda, smp.s)));
        return ev[1] - ev[0];
    };

    int best = 0;
    double best_gap = std::numeric_limits<double>::infinity();
    std::vector<double> gaps(grid_points + 1);
    for (int i = 0; i <= grid_points; ++i) {
        gaps[i] = path_gap(static_cast<double>(i) / grid_points);
        if (gaps[i] < best_gap) {
            best_gap = gaps[i];
            best = i;
        }
    }
    double lo = std::max(0.0, (best - 1.0) / grid_points);
    double hi = std::min(1.0, (best + 1.0) / grid_points);

    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - invphi * (hi - lo), x2 = lo + invphi * (hi - lo);
    double f1 = path_gap(x1), f2 = path_gap(x2);
    for (int it = 0; it < 60 && hi - lo > 1e-10; ++it) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - invphi * (hi - lo);
            f1 = path_gap(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + invphi * (hi - lo);
            f2 = path_gap(x2);
        }
    }
    const double theta_star = 0.5 * (lo + hi);
    return {theta_star, path_gap(theta_star)};
}

/// Rescaled inverse-gap map over the (lambda, s) plane. values[i][j] =
/// (1/gap(lambda_i, s_j)) / max over the map, so the maximum is exactly 1.
struct GapMap {
    std::vector<double> lambda_grid;
    std::vector<double> s_grid;
    std::vector<std::vector<double>> values; // lambda outer, s inner
    double rescale_max = 0.0;                // the max 1/gap the map was divided by
    double raw_min_gap = 0.0;
    double argmin_lambda = 0.0;
    double argmin_s = 0.0;
};

inline GapMap gap_map(const SpinSector& sec, const AnnealParams& params, int n_lambda,
                      int n_s) {
    if (n_lambda < 2 || n_s < 2) throw Error("gap_map: grid too small");
    const OperatorBasis basis = sector_basis(sec, params);
    GapMap map;
    map.lambda_grid.resize(n_lambda);
    map.s_grid.resize(n_s);
    for (int i = 0; i < n_lambda; ++i) map.lambda_grid[i] = static_cast<double>(i) / (n_lambda - 1);
    for (int j = 0; j < n_s; ++j) map.s_grid[j] = static_cast<double>(j) / (n_s - 1);

    map.values.assign(n_lambda, std::vector<double>(n_s, 0.0));
    double max_inv = 0.0;
    map.raw_min_gap = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n_lambda; ++i) {
        for (int j = 0; j < n_s; ++j) {
            const Vector ev = eigenvalues_only(
                assemble_dense(basis, h_coeffs(params.protocol, map.lambda_grid[i], map.s_grid[j])));
            const double g = ev[1] - ev[0];
            map.values[i][j] = 1.0 / g;
            if (1.0 / g > max_inv) max_inv = 1.0 / g;
            if (g < map.raw_min_gap) {
                map.raw_min_gap = g;
                map.argmin_lambda = map.lambda_grid[i];
                map.argmin_s = map.s_grid[j];
            }
        }
    }
    for (auto& row : map.values)
        for (auto& v : row) v /= max_inv;
    map.rescale_max = max_inv;
    return map;
}

/// Smallest gap crossed by the path lambda = s^q inside a precomputed map's
/// parameter square, on a dense theta grid (no eigensolves: map lookups are
/// not used; this recomputes exactly).
inline double path_min_gap(const SpinSector& sec, const AnnealParams& params,
                           int grid_points = 400) {
    return min_gap_along_path(sec, params, grid_points).gap_min;
}

inline void write_gap_map_csv(const GapMap& map, const std::string& path) {
    CsvWriter csv(path);
    csv.row({"lambda", "s", "rescaled_inv_gap"});
    for (size_t i = 0; i < map.lambda_grid.size(); ++i)
        for (size_t j = 0; j < map.s_grid.size(); ++j)
            csv.row({format_double(map.lambda_grid[i]), format_double(map.s_grid[j]),
                     format_double(map.values[i][j])});
}

/// JSON sidecar: raw minimum gap, its location, and the two reference paths
/// lambda = s and lambda = sqrt(s) sampled on the s grid.
inline void write_gap_map_json(const GapMap& map, const std::string& path) {
    nlohmann::json j;
    j["raw_min_gap"] = map.raw_min_gap;
    j["argmin"] = {{"lambda", map.argmin_lambda}, {"s", map.argmin_s}};
    for (const double q : {1.0, 0.5}) {
        nlohmann::json pts = nlohmann::json::array();
        for (const double s : map.s_grid) pts.push_back({{"s", s}, {"lambda", std::pow(s, q)}});
        j["paths"][q == 1.0 ? "q1" : "q1_2"] = pts;
    }
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << j.dump(2) << '\n';
}

}  // namespace cra
