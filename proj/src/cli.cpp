#include "siselab/cli.hpp"

#include "siselab/assumptions.hpp"
#include "siselab/errors.hpp"
#include "siselab/factorization.hpp"
#include "siselab/io.hpp"
#include "siselab/simulate.hpp"
#include "siselab/singular_kf.hpp"
#include "siselab/sise.hpp"
#include "siselab/stability.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

namespace siselab::cli {

namespace {

using nlohmann::json;

json complex_list_to_json(const std::vector<Complex>& zs) {
    json arr = json::array();
    for (const auto& z : zs) arr.push_back({z.real(), z.imag()});
    return arr;
}

json matrix_to_json(const Matrix& M) {
    json rows = json::array();
    for (int i = 0; i < M.rows(); ++i) {
        json row = json::array();
        for (int k = 0; k < M.cols(); ++k) row.push_back(M(i, k));
        rows.push_back(row);
    }
    return rows;
}

void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << j.dump(2) << "\n";
}

struct SimulateConfig {
    std::string system_path;
    std::string out_path;
    std::string d_file;
    std::string d_kind = "gauss";
    double d_scale = 1.0;
    int horizon = 100;
    std::uint64_t seed = 0;
    bool no_noise = false;
};

std::vector<Vector> make_disturbance(const SimulateConfig& cfg, const LinearSystem& sys) {
    std::vector<Vector> d(cfg.horizon + 1, Vector::Zero(sys.m));
    if (cfg.d_kind == "zero") return d;
    if (cfg.d_kind == "pulse") {
        d[0] = cfg.d_scale * Vector::Ones(sys.m);
        return d;
    }
    if (cfg.d_kind == "sine") {
        for (int t = 0; t <= cfg.horizon; ++t)
            d[t] = cfg.d_scale * std::sin(0.3 * t) * Vector::Ones(sys.m);
        return d;
    }
    if (cfg.d_kind == "gauss") {
        GaussianStream stream(cfg.seed + 0x9e3779b97f4a7c15ull);
        for (int t = 0; t <= cfg.horizon; ++t)
            d[t] = cfg.d_scale * stream.next_vector(sys.m);
        return d;
    }
    throw IoError("unknown disturbance kind \"" + cfg.d_kind + "\"");
}

int cmd_simulate(const SimulateConfig& cfg) {
    const LinearSystem sys = read_system_json(cfg.system_path);
    std::vector<Vector> d;
    if (!cfg.d_file.empty()) {
        const Trajectory src = read_trajectory_csv(cfg.d_file);
        d = src.disturbances;
        if (static_cast<int>(d.size()) < cfg.horizon)
            throw IoError(cfg.d_file + ": fewer disturbance rows than horizon");
    } else {
        d = make_disturbance(cfg, sys);
    }
    const Trajectory traj = simulate(sys, d, Vector::Zero(sys.n), cfg.horizon,
                                     cfg.seed, !cfg.no_noise);
    write_trajectory_csv(cfg.out_path, traj);
    return kExitOk;
}

struct AnalyzeConfig {
    std::string system_path;
    std::string out_path;
    double tol = 1e-12;
    int max_iter = 100000;
};

json stability_report_to_json(const StabilityReport& rep) {
    json j;
    j["variant"] = to_string(rep.variant);
    j["verdict"] = to_string(rep.verdict);
    j["sise_system_matrix"] = matrix_to_json(rep.sise_system_matrix);
    j["eigenvalues"] = complex_list_to_json(rep.eigenvalues);
    j["transmission_zeros"] = complex_list_to_json(rep.transmission_zeros);
    if (rep.detectability_applicable) {
        j["detectable"] = rep.detectability.detectable;
        j["undetectable_modes"] = complex_list_to_json(rep.detectability.failing_modes);
    }
    if (rep.stabilizability_applicable)
        j["stabilizable"] = rep.stabilizability.detectable;
    if (rep.rde_limit) {
        j["rde_limit"] = matrix_to_json(*rep.rde_limit);
        j["rde_iterations"] = rep.rde_iterations;
    }
    j["rde_diverged"] = rep.rde_diverged;
    if (rep.limiting_closed_loop) {
        j["limiting_closed_loop"] = matrix_to_json(*rep.limiting_closed_loop);
        j["closed_loop_eigenvalues"] =
            complex_list_to_json(rep.closed_loop_eigenvalues);
    }
    if (!rep.note.empty()) j["note"] = rep.note;
    return j;
}

int cmd_analyze(const AnalyzeConfig& cfg) {
    const LinearSystem sys = read_system_json(cfg.system_path);
    RdeOptions opts;
    opts.tol = cfg.tol;
    opts.max_iter = cfg.max_iter;
    const StabilityReport rep = verdict(sys, opts);
    if (!cfg.out_path.empty()) write_json_file(cfg.out_path, stability_report_to_json(rep));
    switch (rep.verdict) {
        case StabilityVerdict::Stable: return kExitOk;
        case StabilityVerdict::Unstable: return kExitUnstable;
        case StabilityVerdict::Marginal: return kExitMarginal;
    }
    return kExitError;
}

struct FilterConfig {
    std::string system_path;
    std::string measurements_path;
    std::string out_path;
    std::string summary_path;
    std::string gains_path;
    std::string engine = "sise";
    double pseudo_variance = 1e8;
    bool force = false;
};

int cmd_filter(const FilterConfig& cfg) {
    const LinearSystem sys = read_system_json(cfg.system_path);
    const std::vector<Vector> all_ys = read_measurements_csv(cfg.measurements_path, sys.p);
    if (all_ys.size() < 2) throw IoError("measurements file must contain at least two rows");
    // Row 0 seeds the initial time index; the filter consumes y_1..y_T.
    const std::vector<Vector> ys(all_ys.begin() + 1, all_ys.end());

    const FilterInit init = default_init(sys);
    const AssumptionReport as = validate(sys);

    Estimates est;
    std::string engine_note;
    if (cfg.engine == "sise") {
        const bool applicable =
            sys.has_feedthrough() ? as.assumption3 : as.assumption2;
        if (!applicable) {
            std::cerr << "filter: sise engine not applicable: "
                      << (sys.has_feedthrough()
                              ? "rank H < m (Assumption on the feedthrough fails)"
                              : "rank CG < m (Assumption on CG fails)")
                      << "\n";
            return kExitEngineMismatch;
        }
        const StabilityReport rep = verdict(sys);
        if (rep.verdict != StabilityVerdict::Stable && !cfg.force) {
            std::cerr << "filter: SISE predicted " << to_string(rep.verdict)
                      << " for this plant; rerun with --force or use the "
                         "outer-pipeline engine\n";
            return kExitEngineMismatch;
        }
        RunOptions opts;
        opts.record_gains = !cfg.gains_path.empty();
        est = run_filter(sys, ys, init, opts);
        if (rep.verdict != StabilityVerdict::Stable) engine_note = "forced run on a predicted-" +
            std::string(to_string(rep.verdict)) + " configuration";
    } else if (cfg.engine == "akf") {
        est = run_akf(sys, cfg.pseudo_variance, ys, init);
    } else if (cfg.engine == "outer-pipeline") {
        const OuterEstimates oe = estimate_via_outer(sys, ys, init);
        est = oe.estimates;
        const RecoverResult rec = recover_d(
            std::vector<Vector>(est.dhat.begin() + 1, est.dhat.end()),
            oe.factorization.inner);
        // Replace the auxiliary-disturbance column with the recovered d.
        for (std::size_t i = 0; i < rec.d.size(); ++i) est.dhat[i + 1] = rec.d[i];
        engine_note = "outer-pipeline: dhat columns hold the fixed-interval "
                      "recovered disturbance (edge effect " +
                      std::to_string(rec.edge_effect_len) + " samples)" +
                      (oe.used_akf_engine ? "; outer filter ran as augmented KF" : "");
    } else {
        std::cerr << "filter: unknown engine \"" << cfg.engine << "\"\n";
        return kExitError;
    }

    write_estimates_csv(cfg.out_path, est);
    if (!cfg.gains_path.empty()) write_gains_jsonl(cfg.gains_path, est);

    if (!cfg.summary_path.empty()) {
        double innov_sq = 0.0;
        std::size_t innov_count = 0;
        for (const auto& in : est.innovations) {
            innov_sq += in.squaredNorm();
            innov_count += in.size();
        }
        const double final_trP = est.trace_P.back();
        json summary;
        summary["engine"] = cfg.engine;
        summary["steps"] = ys.size();
        summary["final_trace_P"] = final_trP;
        summary["innovation_rms"] =
            innov_count ? std::sqrt(innov_sq / static_cast<double>(innov_count)) : 0.0;
        summary["diverged"] = !std::isfinite(final_trP) || final_trP > 1e12;
        if (!engine_note.empty()) summary["note"] = engine_note;
        write_json_file(cfg.summary_path, summary);
    }
    return kExitOk;
}

struct FactorizeConfig {
    std::string system_path;
    std::string out_prefix;
};

int cmd_factorize(const FactorizeConfig& cfg) {
    const LinearSystem sys = read_system_json(cfg.system_path);
    const Factorization fact = inner_outer(sys);
    write_system_json(cfg.out_prefix + "_outer.json", fact.outer);

    json inner;
    inner["A"] = matrix_to_json(fact.inner.A);
    inner["B"] = matrix_to_json(fact.inner.B);
    inner["C"] = matrix_to_json(fact.inner.C);
    inner["D"] = matrix_to_json(fact.inner.D);
    write_json_file(cfg.out_prefix + "_inner.json", inner);

    json diag;
    diag["allpass_deviation"] = fact.allpass_deviation;
    diag["product_mismatch"] = fact.product_mismatch;
    diag["are_iterations"] = fact.are_iterations;
    diag["outer_zeros"] = complex_list_to_json(fact.outer_zeros);
    diag["note"] = fact.note;
    write_json_file(cfg.out_prefix + "_diagnostics.json", diag);
    return kExitOk;
}

struct BenchConfig {
    std::string suite_path;
    std::string out_path;
};

struct BenchRow {
    int index = 0;
    std::string name;
    std::string verdict_str;
    int horizon = 0;
    double wall_ms = 0.0;
    double steps_per_sec = 0.0;
    double mc_cov_ratio = 0.0;
    std::string flag;
};

int bench_thread_cap() {
    if (const char* env = std::getenv("SISELAB_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

BenchRow bench_case(int index, const json& jcase, const std::string& suite_dir) {
    BenchRow row;
    row.index = index;
    row.name = jcase.value("name", "case" + std::to_string(index));
    std::string sys_path = jcase.at("system").get<std::string>();
    if (!sys_path.empty() && sys_path[0] != '/' && !suite_dir.empty())
        sys_path = suite_dir + "/" + sys_path;
    const LinearSystem sys = read_system_json(sys_path);
    row.horizon = jcase.value("horizon", 1000);
    const std::uint64_t seed = jcase.value("seed", 0ull);
    const int runs = jcase.value("runs", 16);

    const StabilityReport rep = verdict(sys);
    row.verdict_str = to_string(rep.verdict);
    if (rep.verdict != StabilityVerdict::Stable) {
        row.flag = "skipped-" + row.verdict_str;
        return row;
    }

    GaussianStream dstream(seed + 1);
    std::vector<Vector> d(row.horizon + 1);
    for (auto& v : d) v = dstream.next_vector(sys.m);

    const FilterInit init = default_init(sys);
    const auto t0 = std::chrono::steady_clock::now();
    Trajectory traj = simulate(sys, d, Vector::Zero(sys.n), row.horizon, seed, true);
    std::vector<Vector> ys(traj.measurements.begin() + 1, traj.measurements.end());
    Estimates est = run_filter(sys, ys, init);
    const auto t1 = std::chrono::steady_clock::now();
    row.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    row.steps_per_sec = row.horizon / std::max(row.wall_ms / 1000.0, 1e-12);

    // Monte-Carlo covariance ratio: empirical final-step error variance
    // (trace) against the filter's reported trace(P).
    double err_trace = 0.0;
    for (int r = 0; r < runs; ++r) {
        Trajectory tr = simulate(sys, d, Vector::Zero(sys.n), row.horizon,
                                 seed + 100 + r, true);
        std::vector<Vector> ys_r(tr.measurements.begin() + 1, tr.measurements.end());
        Estimates e = run_filter(sys, ys_r, init);
        err_trace += (tr.states.back() - e.xhat.back()).squaredNorm();
    }
    err_trace /= std::max(runs, 1);
    row.mc_cov_ratio = est.trace_P.back() > 0 ? err_trace / est.trace_P.back() : 0.0;
    return row;
}

int cmd_bench(const BenchConfig& cfg) {
    std::ifstream in(cfg.suite_path);
    if (!in) throw IoError("cannot open " + cfg.suite_path);
    json suite;
    try {
        suite = json::parse(in);
    } catch (const json::parse_error& e) {
        throw IoError(cfg.suite_path + ": malformed JSON: " + e.what());
    }
    const json cases = suite.value("cases", json::array());

    std::string suite_dir;
    const auto slash = cfg.suite_path.find_last_of('/');
    if (slash != std::string::npos) suite_dir = cfg.suite_path.substr(0, slash);

    std::vector<BenchRow> rows(cases.size());
    std::vector<std::string> errors(cases.size());
    const int workers =
        std::max(1, std::min<int>(bench_thread_cap(), static_cast<int>(cases.size())));
    std::mutex next_mutex;
    std::size_t next = 0;
    auto worker = [&]() {
        for (;;) {
            std::size_t i;
            {
                std::lock_guard<std::mutex> lock(next_mutex);
                if (next >= cases.size()) return;
                i = next++;
            }
            try {
                rows[i] = bench_case(static_cast<int>(i), cases[i], suite_dir);
            } catch (const std::exception& e) {
                rows[i].index = static_cast<int>(i);
                rows[i].name = cases[i].value("name", "case" + std::to_string(i));
                rows[i].flag = "error";
                errors[i] = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    std::ofstream out(cfg.out_path);
    if (!out) throw IoError("cannot write " + cfg.out_path);
    out << "index,name,verdict,horizon,wall_ms,steps_per_sec,mc_cov_ratio,flag\n";
    for (const auto& row : rows) {
        out << row.index << "," << row.name << "," << row.verdict_str << ","
            << row.horizon << "," << format_double(row.wall_ms) << ","
            << format_double(row.steps_per_sec) << ","
            << format_double(row.mc_cov_ratio) << "," << row.flag << "\n";
    }
    for (std::size_t i = 0; i < errors.size(); ++i)
        if (!errors[i].empty())
            std::cerr << "bench case " << i << ": " << errors[i] << "\n";
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"simultaneous input and state estimation toolkit"};
    app.require_subcommand(1);

    SimulateConfig sim;
    auto* sim_cmd = app.add_subcommand("simulate", "simulate a plant trajectory");
    sim_cmd->add_option("--system", sim.system_path, "system JSON")->required();
    sim_cmd->add_option("--out", sim.out_path, "output trajectory CSV")->required();
    sim_cmd->add_option("--horizon", sim.horizon, "number of steps");
    sim_cmd->add_option("--seed", sim.seed, "noise seed");
    sim_cmd->add_option("--d-file", sim.d_file, "trajectory CSV supplying d columns");
    sim_cmd->add_option("--d-kind", sim.d_kind, "gauss|zero|pulse|sine");
    sim_cmd->add_option("--d-scale", sim.d_scale, "disturbance scale");
    sim_cmd->add_flag("--no-noise", sim.no_noise, "disable process/measurement noise");

    AnalyzeConfig an;
    auto* an_cmd = app.add_subcommand("analyze", "a-priori stability verdict");
    an_cmd->add_option("--system", an.system_path, "system JSON")->required();
    an_cmd->add_option("--out", an.out_path, "report JSON path");
    an_cmd->add_option("--tol", an.tol, "RDE fixed-point tolerance");
    an_cmd->add_option("--max-iter", an.max_iter, "RDE iteration cap");

    FilterConfig fc;
    auto* fl_cmd = app.add_subcommand("filter", "run an estimator over measurements");
    fl_cmd->add_option("--system", fc.system_path, "system JSON")->required();
    fl_cmd->add_option("--measurements", fc.measurements_path, "trajectory/measurement CSV")
        ->required();
    fl_cmd->add_option("--out", fc.out_path, "estimates CSV")->required();
    fl_cmd->add_option("--summary", fc.summary_path, "summary JSON path");
    fl_cmd->add_option("--gains-out", fc.gains_path, "per-step gain dump (JSON lines)");
    fl_cmd->add_option("--engine", fc.engine, "sise|akf|outer-pipeline");
    fl_cmd->add_option("--pseudo-variance", fc.pseudo_variance, "D for the akf engine");
    fl_cmd->add_flag("--force", fc.force, "run even when predicted unstable");

    FactorizeConfig fz;
    auto* fz_cmd = app.add_subcommand("factorize", "inner-outer factorization of d->y");
    fz_cmd->add_option("--system", fz.system_path, "system JSON")->required();
    fz_cmd->add_option("--out", fz.out_prefix, "output prefix (_outer/_inner/_diagnostics)")
        ->required();

    BenchConfig bc;
    auto* be_cmd = app.add_subcommand("bench", "timing/accuracy table for a suite");
    be_cmd->add_option("--suite", bc.suite_path, "suite JSON")->required();
    be_cmd->add_option("--out", bc.out_path, "output CSV")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitError;
    }

    try {
        if (sim_cmd->parsed()) return cmd_simulate(sim);
        if (an_cmd->parsed()) return cmd_analyze(an);
        if (fl_cmd->parsed()) return cmd_filter(fc);
        if (fz_cmd->parsed()) return cmd_factorize(fz);
        if (be_cmd->parsed()) return cmd_bench(bc);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    } catch (const AssumptionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitEngineMismatch;
    } catch (const MarginalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitMarginal;
    } catch (const UnstableError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUnstable;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}

int run(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args);
}

}  // namespace siselab::cli
