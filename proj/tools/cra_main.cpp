// Command-line front end: paper-scale scans with CSV/JSON outputs.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include "cra/cra.hpp"

namespace {

using cra::ExperimentSpec;
using cra::format_double;
using json = nlohmann::json;

struct CommonArgs {
    std::string config;
    std::string out = "results";
    int threads = 0;

    int resolved_threads() const {
        if (threads > 0) return threads;
        const unsigned hw = std::thread::hardware_concurrency();
        return hw == 0 ? 1 : static_cast<int>(hw);
    }
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config, "JSON key-value config overriding the defaults");
    cmd->add_option("--out", args.out, "output directory");
    cmd->add_option("--threads", args.threads, "worker threads (default: hardware)");
}

ExperimentSpec load_spec(ExperimentSpec defaults, const CommonArgs& args) {
    if (!args.config.empty()) cra::from_json_file(args.config, defaults);
    defaults.validate();
    return defaults;
}

void write_json(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw cra::Error("cannot open " + path + " for writing");
    out << j.dump(2) << '\n';
}

int run_fidelity_scan(const CommonArgs& args) {
    ExperimentSpec spec;
    spec.c_list = {0.9};
    spec.n_list = {10, 20, 30, 40, 50};
    spec.tau_list = {1.0};
    spec.k_list = {0, 1, 2, 3};
    const ExperimentSpec resolved = load_spec(spec, args);
    const cra::SweepOutput out = cra::run_sweep(resolved, args.out, args.resolved_threads());
    for (const auto& fit : out.summary["fits"]) {
        if (!fit.contains("gamma")) continue;
        std::printf("c=%g tau=%g K=%d: gamma=%.4f\n", fit["c"].get<double>(),
                    fit["tau"].get<double>(), fit["K"].get<int>(), fit["gamma"].get<double>());
    }
    std::printf("wrote %s/sweep.csv (%zu rows)\n", args.out.c_str(), out.rows.size());
    return out.all_ok ? 0 : 1;
}

int run_tts_scan(const CommonArgs& args) {
    ExperimentSpec spec;
    spec.c_list = {0.7};
    spec.n_list = {10};
    spec.tau_list = {1, 2, 3, 5, 7, 10, 15, 20, 30, 50};
    spec.k_list = {0, 1, 2, 3};
    const ExperimentSpec resolved = load_spec(spec, args);
    std::filesystem::create_directories(args.out);
    const auto rows = cra::sweep_rows(resolved, args.resolved_threads());

    cra::CsvWriter csv(args.out + "/tts.csv");
    csv.row({"protocol", "N", "c", "q", "Gamma", "p", "tau", "K", "P_GS", "tts", "error",
             "schema"});
    bool all_ok = true;
    for (const auto& r : rows) {
        const double t = r.error.empty() ? cra::tts(r.p_gs, r.tau, resolved.p_d) : 0.0;
        if (!r.error.empty()) all_ok = false;
        csv.row({r.protocol, std::to_string(r.n), format_double(r.c), format_double(r.q),
                 format_double(r.gamma), std::to_string(r.p), format_double(r.tau),
                 std::to_string(r.k), format_double(r.p_gs), format_double(t), r.error, "1"});
    }

    json summary;
    summary["schema"] = "1";
    summary["pd"] = resolved.p_d;
    json groups = json::array();
    for (const double c : resolved.c_list) {
        for (const int n : resolved.n_list) {
            for (const int k : resolved.k_list) {
                double best = std::numeric_limits<double>::infinity(), best_tau = 0.0;
                for (const auto& r : rows) {
                    if (r.c != c || r.n != n || r.k != k || !r.error.empty()) continue;
                    const double t = cra::tts(r.p_gs, r.tau, resolved.p_d);
                    if (t < best) {
                        best = t;
                        best_tau = r.tau;
                    }
                }
                groups.push_back(
                    {{"c", c}, {"N", n}, {"K", k}, {"min_tts", best}, {"argmin_tau", best_tau}});
            }
        }
    }
    summary["groups"] = groups;
    write_json(summary, args.out + "/tts.json");
    std::printf("wrote %s/tts.csv (%zu rows)\n", args.out.c_str(), rows.size());
    return all_ok ? 0 : 1;
}

int run_cost_scan(const CommonArgs& args) {
    ExperimentSpec spec;
    spec.c_list = {0.7, 0.8, 0.9};
    spec.n_list = {10, 20, 30, 40, 50};
    spec.tau_list = {1.0};
    spec.k_list = {3};
    const ExperimentSpec resolved = load_spec(spec, args);
    std::filesystem::create_directories(args.out);

    struct CostPoint {
        double c;
        int n;
        int k;
        double frob = 0.0, trace = 0.0;
        std::string error;
    };
    std::vector<CostPoint> points;
    for (const double c : resolved.c_list)
        for (const int n : resolved.n_list)
            for (const int k : resolved.k_list)
                if (k > 0) points.push_back({c, n, k});
    cra::parallel_for(static_cast<int>(points.size()), args.resolved_threads(), [&](int i) {
        auto& pt = points[i];
        try {
            const cra::SpinSector sec = cra::build_sector(pt.n, pt.c);
            const cra::AnnealParams params = resolved.params(resolved.tau_list.front(), pt.k);
            pt.frob = cra::cd_cost(sec, params, cra::NormKind::Frobenius, resolved.theta_grid);
            pt.trace = cra::cd_cost(sec, params, cra::NormKind::Trace, resolved.theta_grid);
        } catch (const std::exception& ex) {
            pt.error = ex.what();
        }
    });

    cra::CsvWriter csv(args.out + "/cost.csv");
    csv.row({"c", "N", "K", "tau", "cost_frob", "cost_trace", "error", "schema"});
    bool all_ok = true;
    for (const auto& pt : points) {
        if (!pt.error.empty()) all_ok = false;
        csv.row({format_double(pt.c), std::to_string(pt.n), std::to_string(pt.k),
                 format_double(resolved.tau_list.front()), format_double(pt.frob),
                 format_double(pt.trace), pt.error, "1"});
    }

    json summary;
    summary["schema"] = "1";
    json fits = json::array();
    for (const double c : resolved.c_list) {
        for (const int k : resolved.k_list) {
            if (k == 0) continue;
            std::vector<cra::FitPoint> frob, trace;
            for (const auto& pt : points) {
                if (pt.c != c || pt.k != k || !pt.error.empty()) continue;
                frob.push_back({static_cast<double>(pt.n), pt.frob});
                trace.push_back({static_cast<double>(pt.n), pt.trace});
            }
            if (frob.size() < 3) continue;
            const cra::FitResult ff = cra::fit_power_law(frob);
            const cra::FitResult ft = cra::fit_power_law(trace);
            fits.push_back({{"c", c},
                            {"K", k},
                            {"alpha_frob", ff.exponent},
                            {"intercept_ln_frob", ff.intercept},
                            {"alpha_trace", ft.exponent},
                            {"intercept_ln_trace", ft.intercept}});
            std::printf("c=%g K=%d: alpha_frob=%.4f alpha_trace=%.4f\n", c, k, ff.exponent,
                        ft.exponent);
        }
    }
    summary["fits"] = fits;
    write_json(summary, args.out + "/cost.json");
    return all_ok ? 0 : 1;
}

int run_norm_trace(const CommonArgs& args) {
    ExperimentSpec spec;
    spec.c_list = {0.7, 0.9};
    spec.n_list = {50};
    spec.tau_list = {1.0};
    spec.k_list = {1, 2, 3};
    const ExperimentSpec resolved = load_spec(spec, args);
    std::filesystem::create_directories(args.out);

    cra::CsvWriter csv(args.out + "/norm_trace.csv");
    csv.row({"c", "N", "K", "tau", "theta", "frob_norm", "trace_norm", "schema"});
    json peaks = json::array();
    bool all_ok = true;
    for (const double c : resolved.c_list) {
        for (const int n : resolved.n_list) {
            const cra::SpinSector sec = cra::build_sector(n, c);
            const cra::PathGap pg = cra::min_gap_along_path(
                sec, resolved.params(resolved.tau_list.front(), 0), resolved.gap_grid);
            for (const int k : resolved.k_list) {
                if (k == 0) continue;
                try {
                    const cra::AnnealParams params =
                        resolved.params(resolved.tau_list.front(), k);
                    const auto trace = cra::norm_trace(sec, params, resolved.theta_grid);
                    double peak_trace = 0.0, peak_theta = 0.0, peak_frob = 0.0;
                    for (const auto& pt : trace) {
                        csv.row({format_double(c), std::to_string(n), std::to_string(k),
                                 format_double(params.tau), format_double(pt.theta),
                                 format_double(pt.frob), format_double(pt.trace), "1"});
                        if (pt.trace > peak_trace) {
                            peak_trace = pt.trace;
                            peak_theta = pt.theta;
                        }
                        peak_frob = std::max(peak_frob, pt.frob);
                    }
                    peaks.push_back({{"c", c},
                                     {"N", n},
                                     {"K", k},
                                     {"theta_peak", peak_theta},
                                     {"peak_trace_norm", peak_trace},
                                     {"peak_frob_norm", peak_frob},
                                     {"theta_min_gap", pg.theta_star},
                                     {"min_gap", pg.gap_min}});
                } catch (const std::exception& ex) {
                    all_ok = false;
                    peaks.push_back({{"c", c}, {"N", n}, {"K", k}, {"error", ex.what()}});
                }
            }
        }
    }
    json summary;
    summary["schema"] = "1";
    summary["peaks"] = peaks;
    write_json(summary, args.out + "/norm_trace.json");
    std::printf("wrote %s/norm_trace.csv\n", args.out.c_str());
    return all_ok ? 0 : 1;
}

int run_gap_map(const CommonArgs& args) {
    ExperimentSpec spec;
    spec.c_list = {0.8};
    spec.n_list = {10, 20, 30};
    spec.tau_list = {1.0};
    spec.k_list = {0};
    const ExperimentSpec resolved = load_spec(spec, args);
    std::filesystem::create_directories(args.out);
    bool all_ok = true;
    for (const double c : resolved.c_list) {
        for (const int n : resolved.n_list) {
            try {
                const cra::SpinSector sec = cra::build_sector(n, c);
                const cra::GapMap map =
                    cra::gap_map(sec, resolved.params(resolved.tau_list.front(), 0),
                                 resolved.map_grid, resolved.map_grid);
                char name[128];
                std::snprintf(name, sizeof(name), "%s/gap_map_N%d_c%g", args.out.c_str(), n, c);
                cra::write_gap_map_csv(map, std::string(name) + ".csv");
                cra::write_gap_map_json(map, std::string(name) + ".json");
            } catch (const std::exception& ex) {
                std::fprintf(stderr, "gap-map N=%d c=%g failed: %s\n", n, c, ex.what());
                all_ok = false;
            }
        }
    }
    std::printf("wrote gap maps to %s\n", args.out.c_str());
    return all_ok ? 0 : 1;
}

int run_compare_qa(const CommonArgs& args) {
    ExperimentSpec spec;
    spec.c_list = {0.7, 0.8, 0.9};
    spec.n_list = {10, 20, 30};
    spec.tau_list = {1.0};
    spec.k_list = {0, 1};
    const ExperimentSpec resolved = load_spec(spec, args);
    std::filesystem::create_directories(args.out);
    const auto rows = cra::compare_ara_qa(resolved, args.resolved_threads());
    cra::write_compare_csv(rows, args.out + "/compare_qa.csv");

    json summary;
    summary["schema"] = "1";
    json entries = json::array();
    bool all_ok = true;
    for (const auto& r : rows) {
        if (!r.error.empty()) {
            all_ok = false;
            continue;
        }
        entries.push_back({{"c", r.c},
                           {"N", r.n},
                           {"tau", r.tau},
                           {"qa_over_ara", r.p_qa / r.p_ara},
                           {"qa1_over_cra1", r.p_qa1 / r.p_cra1}});
    }
    summary["ratios"] = entries;
    write_json(summary, args.out + "/compare_qa.json");
    std::printf("wrote %s/compare_qa.csv (%zu rows)\n", args.out.c_str(), rows.size());
    return all_ok ? 0 : 1;
}

int run_heatmap(const CommonArgs& args) {
    ExperimentSpec spec;
    spec.c_list = {0.8};
    spec.n_list = {10, 15, 20, 25, 30};
    spec.tau_list = {1, 2, 4, 7, 10, 13, 16, 20, 25, 30, 36, 43, 50};
    spec.k_list = {0, 3};
    const ExperimentSpec resolved = load_spec(spec, args);
    const cra::HeatmapResult res =
        cra::pgs_heatmap(resolved, args.out, args.resolved_threads());
    std::printf("wrote %s/heatmap.csv (%zu rows)\n", args.out.c_str(), res.rows.size());
    return res.all_ok ? 0 : 1;
}

// --- fit subcommand: re-fit exponents from a previously written sweep.csv ---

std::vector<std::string> parse_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (ch == '"') {
                quoted = false;
            } else {
                cur += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    fields.push_back(cur);
    return fields;
}

int run_fit(const std::string& csv_path, const std::string& kind, const CommonArgs& args) {
    std::ifstream in(csv_path);
    if (!in) throw cra::Error("cannot open " + csv_path);
    std::string line;
    if (!std::getline(in, line)) throw cra::Error("empty csv");
    const auto header = parse_csv_line(line);
    std::map<std::string, int> col;
    for (size_t i = 0; i < header.size(); ++i) col[header[i]] = static_cast<int>(i);
    for (const char* need : {"protocol", "N", "c", "q", "Gamma", "p", "tau", "K"})
        if (!col.count(need)) throw cra::Error(std::string("csv missing column ") + need);
    const std::string ycol = kind == "gamma" ? "P_GS" : "cost_frob";
    if (!col.count(ycol)) throw cra::Error("csv missing column " + ycol);

    // group key: everything but N
    std::map<std::string, std::vector<cra::FitPoint>> groups;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = parse_csv_line(line);
        if (col.count("error") && !f[col["error"]].empty()) continue;
        std::string key = f[col["protocol"]] + " c=" + f[col["c"]] + " q=" + f[col["q"]] +
                          " Gamma=" + f[col["Gamma"]] + " p=" + f[col["p"]] +
                          " tau=" + f[col["tau"]] + " K=" + f[col["K"]];
        groups[key].push_back({std::stod(f[col["N"]]), std::stod(f[col[ycol]])});
    }

    json out;
    out["schema"] = "1";
    out["kind"] = kind;
    json fits = json::array();
    for (const auto& [key, points] : groups) {
        try {
            const cra::FitResult fit = kind == "gamma" ? cra::fit_scaling_exponent(points)
                                                       : cra::fit_power_law(points);
            fits.push_back({{"group", key},
                            {"exponent", fit.exponent},
                            {"intercept", fit.intercept},
                            {"residual_rms", fit.residual_rms},
                            {"points_used", fit.points_used}});
            std::printf("%s: %s=%.4f (%d points, rms %.3g)\n", key.c_str(),
                        kind == "gamma" ? "gamma" : "alpha", fit.exponent, fit.points_used,
                        fit.residual_rms);
        } catch (const cra::InsufficientPoints&) {
            fits.push_back({{"group", key}, {"error", "insufficient points"}});
        }
    }
    out["fits"] = fits;
    std::filesystem::create_directories(args.out);
    write_json(out, args.out + "/fits.json");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"counterdiabatic reverse annealing toolkit"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string fit_csv, fit_kind = "gamma";

    auto* fidelity = app.add_subcommand("fidelity-scan", "P_GS over the (c, N, tau, K) grid");
    add_common(fidelity, args);
    auto* tts = app.add_subcommand("tts-scan", "time to solution versus annealing time");
    add_common(tts, args);
    auto* cost = app.add_subcommand("cost-scan", "CD energetic cost versus N");
    add_common(cost, args);
    auto* norm = app.add_subcommand("norm-trace", "CD-term norms along the path");
    add_common(norm, args);
    auto* gapmap = app.add_subcommand("gap-map", "inverse-gap maps over the (lambda, s) plane");
    add_common(gapmap, args);
    auto* compare = app.add_subcommand("compare-qa", "reverse versus forward annealing");
    add_common(compare, args);
    auto* heatmap = app.add_subcommand("heatmap", "P_GS over the (N, tau) plane");
    add_common(heatmap, args);
    auto* fit = app.add_subcommand("fit", "re-fit exponents from a sweep csv");
    add_common(fit, args);
    fit->add_option("--csv", fit_csv, "input csv (sweep.csv or cost.csv)")->required();
    fit->add_option("--kind", fit_kind, "gamma (P_GS vs N) or alpha (cost vs N)")
        ->check(CLI::IsMember({"gamma", "alpha"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (fidelity->parsed()) return run_fidelity_scan(args);
        if (tts->parsed()) return run_tts_scan(args);
        if (cost->parsed()) return run_cost_scan(args);
        if (norm->parsed()) return run_norm_trace(args);
        if (gapmap->parsed()) return run_gap_map(args);
        if (compare->parsed()) return run_compare_qa(args);
        if (heatmap->parsed()) return run_heatmap(args);
        if (fit->parsed()) return run_fit(fit_csv, fit_kind, args);
    } catch (const std::exception& ex) {
        std::fprintf(stderr, "error: %s\n", ex.what());
        return 2;
    }
    return 0;
}
