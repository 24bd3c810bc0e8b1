#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cra/csv.hpp"
#include "cra/dynamics.hpp"
#include "cra/fits.hpp"
#include "cra/parallel.hpp"
#include "cra/spectra.hpp"

namespace cra {

using nlohmann::json;

/// One sweep: the grid c x N x tau x K at fixed protocol, p, gamma, q.
struct ExperimentSpec {
    Protocol protocol = Protocol::ARA;
    int p = 3;
    double gamma = 1.0;
    double e0 = 1.0;
    double q = 1.0;
    std::vector<int> n_list;
    std::vector<double> c_list;
    std::vector<double> tau_list;
    std::vector<int> k_list;
    int theta_grid = 401; // CD-norm quadrature grid
    int gap_grid = 400;   // path min-gap grid
    int map_grid = 64;    // gap-map resolution per axis
    double p_d = 0.99;
    VariationalMode variational = VariationalMode::Path;

    AnnealParams params(double tau, int k) const {
        AnnealParams pr;
        pr.protocol = protocol;
        pr.p = p;
        pr.gamma = gamma;
        pr.e0 = e0;
        pr.q = q;
        pr.tau = tau;
        pr.cd_order = k;
        pr.variational = variational;
        return pr;
    }

    void validate() const {
        if (n_list.empty() || c_list.empty() || tau_list.empty() || k_list.empty())
            throw Error("experiment spec: N, c, tau and K lists must be nonempty");
        params(tau_list.front(), k_list.front()).validate();
        for (const double tau : tau_list)
            if (tau <= 0.0) throw Error("experiment spec: tau must be positive");
        for (const int k : k_list)
            if (k < 0 || k > 3) throw Error("experiment spec: K must be in 0..3");
        for (const double c : c_list) {
            for (const int n : n_list) build_sector(n, c); // throws NonIntegerFraction
            if (protocol == Protocol::QA && c != 1.0)
                throw Error("experiment spec: QA sweeps use c = 1");
        }
        if (theta_grid < 201) throw Error("experiment spec: theta_grid must be >= 201");
        if (gap_grid < 400) throw Error("experiment spec: gap_grid must be >= 400");
    }
};

inline void from_json_file(const std::string& path, ExperimentSpec& spec) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config " + path);
    json j = json::parse(in);
    for (const auto& [key, value] : j.items()) {
        if (key == "protocol") spec.protocol = protocol_from_name(value.get<std::string>());
        else if (key == "p") spec.p = value.get<int>();
        else if (key == "gamma") spec.gamma = value.get<double>();
        else if (key == "e0") spec.e0 = value.get<double>();
        else if (key == "q") spec.q = value.get<double>();
        else if (key == "N") spec.n_list = value.get<std::vector<int>>();
        else if (key == "c") spec.c_list = value.get<std::vector<double>>();
        else if (key == "tau") spec.tau_list = value.get<std::vector<double>>();
        else if (key == "K") spec.k_list = value.get<std::vector<int>>();
        else if (key == "theta_grid") spec.theta_grid = value.get<int>();
        else if (key == "gap_grid") spec.gap_grid = value.get<int>();
        else if (key == "map_grid") spec.map_grid = value.get<int>();
        else if (key == "pd") spec.p_d = value.get<double>();
        else if (key == "variational")
            spec.variational = value.get<std::string>() == "components"
                                   ? VariationalMode::Components
                                   : VariationalMode::Path;
        else throw Error("config: unknown key '" + key + "'");
    }
}

struct SweepRow {
    std::string protocol;
    int n = 0;
    double c = 1.0;
    double q = 1.0;
    double gamma = 1.0;
    int p = 3;
    double tau = 1.0;
    int k = 0;
    double p_gs = 0.0;
    double cost_frob = 0.0;
    double cost_trace = 0.0;
    double norm_peak = 0.0; // peak trace norm of the CD term along the path
    double theta_min_gap = 0.0;
    double min_gap = 0.0;
    long steps = 0;
    std::string flags;
    std::string error;
};

inline const std::vector<std::string>& sweep_columns() {
    static const std::vector<std::string> cols = {
        "protocol", "N",         "c",          "q",         "Gamma",
        "p",        "tau",       "K",          "P_GS",      "cost_frob",
        "cost_trace", "norm_peak", "theta_min_gap", "min_gap", "steps",
        "flags",    "error",     "schema"};
    return cols;
}

namespace detail {

constexpr const char* kSchemaVersion = "1";

struct NormGrid {
    double frob_integral = 0.0;  // int ||W(theta)||_F dtheta (tau-independent)
    double trace_integral = 0.0;
    double trace_peak = 0.0;     // max ||W(theta)||_tr
    StiffnessProfile profile;    // ||W||_F samples, reused by the integrator
};

/// Simpson integrals and peak of the CD generator norms over the theta grid.
inline NormGrid norm_grid(const SpinSector& sec, const AnnealParams& params, int grid_points) {
    if (grid_points % 2 == 0) ++grid_points;
    CDEvaluator eval(sector_basis(sec, params), params);
    NormGrid out;
    out.profile.thetas.resize(grid_points);
    out.profile.w_frob.resize(grid_points);
    const double h = 1.0 / (grid_points - 1);
    for (int i = 0; i < grid_points; ++i) {
        const Matrix& w = eval.generator(i * h);
        const double f = frobenius_norm(w);
        const double t = trace_norm(w);
        out.profile.thetas[i] = i * h;
        out.profile.w_frob[i] = f;
        const double weight = (i == 0 || i == grid_points - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        out.frob_integral += weight * f;
        out.trace_integral += weight * t;
        out.trace_peak = std::max(out.trace_peak, t);
    }
    out.frob_integral *= h / 3.0;
    out.trace_integral *= h / 3.0;
    return out;
}

inline std::string join_flags(const RunResult& res) {
    std::string flags;
    if (res.below_trust_floor) flags = "below_trust_floor";
    if (res.degenerate_cd) flags += (flags.empty() ? "" : ";") + std::string("degenerate_cd");
    return flags;
}

}  // namespace detail

/// Executes the sweep grid. Rows come back in deterministic grid order
/// (c, N, tau, K); a failing point fills its error column and never aborts
/// the sweep. Path min-gap and CD-norm grids are computed once per sector
/// (they do not depend on tau, and the norms scale as 1/tau).
inline std::vector<SweepRow> sweep_rows(const ExperimentSpec& spec, int threads = 1) {
    spec.validate();

    struct Point {
        double c;
        int n;
        double tau;
        int k;
    };
    std::vector<Point> grid;
    for (const double c : spec.c_list)
        for (const int n : spec.n_list)
            for (const double tau : spec.tau_list)
                for (const int k : spec.k_list) grid.push_back({c, n, tau, k});

    // Per-sector gap cache.
    std::vector<std::pair<double, int>> sectors;
    for (const double c : spec.c_list)
        for (const int n : spec.n_list) sectors.emplace_back(c, n);
    std::vector<PathGap> gap_of(sectors.size());
    std::vector<std::string> gap_err(sectors.size());
    parallel_for(static_cast<int>(sectors.size()), threads, [&](int i) {
        try {
            const SpinSector sec = build_sector(sectors[i].second, sectors[i].first);
            gap_of[i] =
                min_gap_along_path(sec, spec.params(spec.tau_list.front(), 0), spec.gap_grid);
        } catch (const std::exception& ex) {
            gap_err[i] = ex.what();
        }
    });
    auto sector_slot = [&](double c, int n) {
        for (size_t i = 0; i < sectors.size(); ++i)
            if (sectors[i].first == c && sectors[i].second == n) return static_cast<int>(i);
        return -1;
    };

    // Per-(sector, K>0) CD-norm cache.
    struct NormKey {
        double c;
        int n;
        int k;
    };
    std::vector<NormKey> norm_keys;
    for (const double c : spec.c_list)
        for (const int n : spec.n_list)
            for (const int k : spec.k_list)
                if (k > 0) norm_keys.push_back({c, n, k});
    std::vector<detail::NormGrid> norms(norm_keys.size());
    std::vector<std::string> norm_err(norm_keys.size());
    parallel_for(static_cast<int>(norm_keys.size()), threads, [&](int i) {
        try {
            const SpinSector sec = build_sector(norm_keys[i].n, norm_keys[i].c);
            norms[i] = detail::norm_grid(sec, spec.params(1.0, norm_keys[i].k), spec.theta_grid);
        } catch (const std::exception& ex) {
            norm_err[i] = ex.what();
        }
    });
    auto norm_slot = [&](double c, int n, int k) {
        for (size_t i = 0; i < norm_keys.size(); ++i)
            if (norm_keys[i].c == c && norm_keys[i].n == n && norm_keys[i].k == k)
                return static_cast<int>(i);
        return -1;
    };

    std::vector<SweepRow> rows(grid.size());
    parallel_for(static_cast<int>(grid.size()), threads, [&](int i) {
        const Point& pt = grid[i];
        SweepRow& row = rows[i];
        row.protocol = protocol_name(spec.protocol);
        row.n = pt.n;
        row.c = pt.c;
        row.q = spec.q;
        row.gamma = spec.gamma;
        row.p = spec.p;
        row.tau = pt.tau;
        row.k = pt.k;
        try {
            const SpinSector sec = build_sector(pt.n, pt.c);
            const AnnealParams params = spec.params(pt.tau, pt.k);
            EvolveOptions opts;
            if (pt.k > 0) {
                const int ns = norm_slot(pt.c, pt.n, pt.k);
                if (!norm_err[ns].empty()) throw Error(norm_err[ns]);
                row.cost_frob = norms[ns].frob_integral / pt.tau;
                row.cost_trace = norms[ns].trace_integral / pt.tau;
                row.norm_peak = norms[ns].trace_peak / pt.tau;
                opts.stiffness = &norms[ns].profile;
            }
            const RunResult res = evolve(sec, params, opts);
            row.p_gs = res.p_gs;
            row.steps = res.steps;
            row.flags = detail::join_flags(res);
            const int gs = sector_slot(pt.c, pt.n);
            if (!gap_err[gs].empty()) throw Error(gap_err[gs]);
            row.theta_min_gap = gap_of[gs].theta_star;
            row.min_gap = gap_of[gs].gap_min;
        } catch (const std::exception& ex) {
            row.error = ex.what();
        }
    });
    return rows;
}

inline void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path) {
    CsvWriter csv(path);
    csv.row(sweep_columns());
    for (const SweepRow& r : rows) {
        csv.row({r.protocol, std::to_string(r.n), format_double(r.c), format_double(r.q),
                 format_double(r.gamma), std::to_string(r.p), format_double(r.tau),
                 std::to_string(r.k), format_double(r.p_gs), format_double(r.cost_frob),
                 format_double(r.cost_trace), format_double(r.norm_peak),
                 format_double(r.theta_min_gap), format_double(r.min_gap),
                 std::to_string(r.steps), r.flags, r.error, detail::kSchemaVersion});
    }
}

/// Scaling-exponent fits of a sweep, grouped over N at fixed (c, tau, K),
/// with the perturbative cross-check for the K = 0 groups.
inline json sweep_summary(const ExperimentSpec& spec, const std::vector<SweepRow>& rows) {
    json out;
    out["schema"] = detail::kSchemaVersion;
    out["spec"] = {{"protocol", protocol_name(spec.protocol)},
                   {"p", spec.p},
                   {"gamma", spec.gamma},
                   {"e0", spec.e0},
                   {"q", spec.q},
                   {"theta_grid", spec.theta_grid},
                   {"gap_grid", spec.gap_grid},
                   {"pd", spec.p_d},
                   {"variational",
                    spec.variational == VariationalMode::Path ? "path" : "components"}};
    out["rows"] = rows.size();
    int failed = 0;
    for (const auto& r : rows)
        if (!r.error.empty()) ++failed;
    out["failed_rows"] = failed;

    json fits = json::array();
    for (const double c : spec.c_list) {
        for (const double tau : spec.tau_list) {
            for (const int k : spec.k_list) {
                std::vector<FitPoint> pgs_points, frob_points, trace_points;
                for (const SweepRow& r : rows) {
                    if (r.c != c || r.tau != tau || r.k != k || !r.error.empty()) continue;
                    pgs_points.push_back({static_cast<double>(r.n), r.p_gs});
                    frob_points.push_back({static_cast<double>(r.n), r.cost_frob});
                    trace_points.push_back({static_cast<double>(r.n), r.cost_trace});
                }
                if (pgs_points.empty()) continue;
                json entry = {{"c", c}, {"tau", tau}, {"K", k}};
                try {
                    const FitResult fit = fit_scaling_exponent(pgs_points);
                    entry["gamma"] = fit.exponent;
                    entry["intercept_log2"] = fit.intercept;
                    entry["residual_rms"] = fit.residual_rms;
                    entry["points_used"] = fit.points_used;
                    entry["points_flagged"] = fit.points_flagged;
                    if (k == 0) {
                        const double gt = effective_gamma(tau, spec.gamma, spec.q);
                        const double pred = perturbative_exponent(c, gt);
                        entry["gamma_tilde"] = gt;
                        entry["gamma_perturbative"] = pred;
                        entry["perturbative_reldev"] =
                            std::abs(fit.exponent - pred) / fit.exponent;
                    }
                } catch (const InsufficientPoints& ex) {
                    entry["gamma_error"] = ex.what();
                }
                if (k > 0) {
                    try {
                        entry["cost_alpha_frob"] = fit_power_law(frob_points).exponent;
                        entry["cost_alpha_trace"] = fit_power_law(trace_points).exponent;
                    } catch (const InsufficientPoints&) {
                    }
                }
                fits.push_back(entry);
            }
        }
    }
    out["fits"] = fits;
    return out;
}

struct SweepOutput {
    std::vector<SweepRow> rows;
    json summary;
    bool all_ok = true;
};

/// Runs the sweep and writes sweep.csv plus summary.json into out_dir.
/// Output is byte-stable for a fixed spec: rows are in grid order and no
/// wall-clock data is serialised.
inline SweepOutput run_sweep(const ExperimentSpec& spec, const std::string& out_dir,
                             int threads = 1) {
    std::filesystem::create_directories(out_dir);
    SweepOutput out;
    out.rows = sweep_rows(spec, threads);
    out.summary = sweep_summary(spec, out.rows);
    write_sweep_csv(out.rows, out_dir + "/sweep.csv");
    std::ofstream js(out_dir + "/summary.json");
    js << out.summary.dump(2) << '\n';
    for (const auto& r : out.rows)
        if (!r.error.empty()) out.all_ok = false;
    return out;
}

/// Reverse-vs-forward comparison at matched (N, tau, Gamma, p): per c and N,
/// the fidelities of ARA, CRA1, QA and QA1 (QA in the N+1 Dicke ladder).
struct CompareRow {
    double c = 0.0;
    int n = 0;
    double tau = 0.0;
    double p_ara = 0.0, p_cra1 = 0.0, p_qa = 0.0, p_qa1 = 0.0;
    std::string error;
};

inline std::vector<CompareRow> compare_ara_qa(const ExperimentSpec& spec, int threads = 1) {
    if (spec.protocol != Protocol::ARA)
        throw Error("compare_ara_qa: spec must describe the ARA side");
    spec.validate();
    std::vector<CompareRow> rows;
    for (const double c : spec.c_list)
        for (const int n : spec.n_list)
            for (const double tau : spec.tau_list) rows.push_back({c, n, tau});
    parallel_for(static_cast<int>(rows.size()), threads, [&](int i) {
        CompareRow& row = rows[i];
        try {
            const SpinSector sec = build_sector(row.n, row.c);
            const SpinSector ladder = build_sector(row.n, 1.0);
            AnnealParams pr = spec.params(row.tau, 0);
            row.p_ara = evolve(sec, pr).p_gs;
            pr.cd_order = 1;
            row.p_cra1 = evolve(sec, pr).p_gs;
            AnnealParams qa = pr;
            qa.protocol = Protocol::QA;
            qa.cd_order = 0;
            row.p_qa = evolve(ladder, qa).p_gs;
            qa.cd_order = 1;
            row.p_qa1 = evolve(ladder, qa).p_gs;
        } catch (const std::exception& ex) {
            row.error = ex.what();
        }
    });
    return rows;
}

inline void write_compare_csv(const std::vector<CompareRow>& rows, const std::string& path) {
    CsvWriter csv(path);
    csv.row({"c", "N", "tau", "P_ARA", "P_CRA1", "P_QA", "P_QA1", "error", "schema"});
    for (const CompareRow& r : rows)
        csv.row({format_double(r.c), std::to_string(r.n), format_double(r.tau),
                 format_double(r.p_ara), format_double(r.p_cra1), format_double(r.p_qa),
                 format_double(r.p_qa1), r.error, detail::kSchemaVersion});
}

/// P_GS over the N x tau grid for each requested K (the paper's heat map
/// uses K = 0 versus K = 3), plus a matrix file per K with the natural log
/// of P_GS linearly interpolated to integer N for presentation.
struct HeatmapResult {
    std::vector<SweepRow> rows;
    json summary;
    bool all_ok = true;
};

inline HeatmapResult pgs_heatmap(const ExperimentSpec& spec, const std::string& out_dir,
                                 int threads = 1) {
    spec.validate();
    if (spec.c_list.size() != 1) throw Error("pgs_heatmap: exactly one c per map");
    std::filesystem::create_directories(out_dir);
    HeatmapResult out;
    out.rows = sweep_rows(spec, threads);
    write_sweep_csv(out.rows, out_dir + "/heatmap.csv");

    auto row_of = [&](int n, double tau, int k) -> const SweepRow* {
        for (const auto& r : out.rows)
            if (r.n == n && r.tau == tau && r.k == k) return &r;
        return nullptr;
    };
    std::vector<int> ns = spec.n_list;
    std::sort(ns.begin(), ns.end());
    for (const int k : spec.k_list) {
        CsvWriter csv(out_dir + "/heatmap_ln_pgs_K" + std::to_string(k) + ".csv");
        std::vector<std::string> header = {"N"};
        for (const double tau : spec.tau_list) header.push_back("tau=" + format_double(tau));
        csv.row(header);
        for (int n = ns.front(); n <= ns.back(); ++n) {
            auto hi = std::lower_bound(ns.begin(), ns.end(), n);
            const int n1 = *hi;
            const int n0 = (hi == ns.begin() || *hi == n) ? n1 : *(hi - 1);
            const double t = (n1 == n0) ? 0.0 : static_cast<double>(n - n0) / (n1 - n0);
            std::vector<std::string> line = {std::to_string(n)};
            for (const double tau : spec.tau_list) {
                const SweepRow* r0 = row_of(n0, tau, k);
                const SweepRow* r1 = row_of(n1, tau, k);
                if (r0 == nullptr || r1 == nullptr || !r0->error.empty() || !r1->error.empty()) {
                    line.push_back("");
                    continue;
                }
                const double ln_p =
                    (1.0 - t) * std::log(r0->p_gs) + t * std::log(r1->p_gs);
                line.push_back(format_double(ln_p));
            }
            csv.row(line);
        }
    }

    // Summary: for each (N, K > 0), the interior tau where CRA fidelity has a
    // local minimum, and the pointwise dominance margin over K = 0.
    json summary;
    summary["schema"] = detail::kSchemaVersion;
    summary["c"] = spec.c_list.front();
    json per_n = json::array();
    for (const int n : ns) {
        json entry = {{"N", n}};
        for (const int k : spec.k_list) {
            if (k == 0) continue;
            std::vector<std::pair<double, double>> curve; // (tau, P)
            double min_ratio = std::numeric_limits<double>::infinity();
            for (const double tau : spec.tau_list) {
                const SweepRow* rk = row_of(n, tau, k);
                const SweepRow* r0 = row_of(n, tau, 0);
                if (rk == nullptr || r0 == nullptr) continue;
                curve.emplace_back(tau, rk->p_gs);
                if (r0->p_gs > 0.0) min_ratio = std::min(min_ratio, rk->p_gs / r0->p_gs);
            }
            std::optional<double> tau_local_min;
            for (size_t i = 1; i + 1 < curve.size(); ++i) {
                if (curve[i].second < curve[i - 1].second &&
                    curve[i].second < curve[i + 1].second) {
                    tau_local_min = curve[i].first;
                    break;
                }
            }
            json kj = {{"min_ratio_vs_K0", min_ratio}};
            if (tau_local_min) kj["tau_local_min"] = *tau_local_min;
            entry["K" + std::to_string(k)] = kj;
        }
        per_n.push_back(entry);
    }
    summary["per_N"] = per_n;
    out.summary = summary;
    std::ofstream js(out_dir + "/heatmap.json");
    js << summary.dump(2) << '\n';
    for (const auto& r : out.rows)
        if (!r.error.empty()) out.all_ok = false;
    return out;
}

}  // namespace cra
