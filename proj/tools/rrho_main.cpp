#include <chrono>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rrho/io.hpp"
#include "rrho/oracles.hpp"
#include "rrho/solver.hpp"
#include "rrho/validate.hpp"

namespace {

rrho::Overrides parse_overrides(const std::vector<std::string>& kvs) {
    rrho::Overrides out;
    for (const auto& kv : kvs) {
        auto pos = kv.find('=');
        if (pos == std::string::npos) {
            throw rrho::Error("override must look like key=value: '" + kv + "'");
        }
        out[kv.substr(0, pos)] = std::stod(kv.substr(pos + 1));
    }
    return out;
}

rrho::WeightedPointSet load_with_warning(const std::string& path, const std::string& label) {
    auto res = rrho::load_point_set(path);
    if (res.renormalized_warning) {
        std::cerr << "warning: " << label << " weights summed to " << res.raw_weight_sum
                  << "; renormalized\n";
    }
    return std::move(res.points);
}

void emit(const nlohmann::json& j, const std::string& out_path) {
    std::string text = j.dump(2);
    text.push_back('\n');
    if (out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(out_path);
        if (!out) throw rrho::Error("cannot write '" + out_path + "'");
        out << text;
    }
}

struct CommonOpts {
    std::string mu_path, nu_path, out_path;
    double rho = 1.5, eps = 0.1;
    std::string mode = "practical", engine = "exact";
    std::uint64_t seed = 0;
    long max_iters = -1;
    std::vector<std::string> override_kvs;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool needs_solver_flags) {
    cmd->add_option("--mu", o.mu_path, "CSV file for mu")->required();
    cmd->add_option("--nu", o.nu_path, "CSV file for nu")->required();
    cmd->add_option("--out", o.out_path, "write the JSON report here instead of stdout");
    if (needs_solver_flags) {
        cmd->add_option("--rho", o.rho, "objective exponent in (1, 2]");
        cmd->add_option("--eps", o.eps, "target additive accuracy (fraction of r)");
        cmd->add_option("--mode", o.mode, "paper|practical")
            ->check(CLI::IsMember({"paper", "practical"}));
        cmd->add_option("--engine", o.engine, "exact|sampling")
            ->check(CLI::IsMember({"exact", "sampling"}));
        cmd->add_option("--seed", o.seed, "random seed");
        cmd->add_option("--max-iters", o.max_iters, "iteration cap override");
        cmd->add_option("--override", o.override_kvs, "parameter override key=value")
            ->take_all();
    }
}

int run_dist(const CommonOpts& o) {
    auto mu = load_with_warning(o.mu_path, "mu");
    auto nu = load_with_warning(o.nu_path, "nu");
    auto overrides = parse_overrides(o.override_kvs);
    if (o.max_iters > 0) overrides["max_iters"] = static_cast<double>(o.max_iters);
    auto mode = o.mode == "paper" ? rrho::ParamMode::paper : rrho::ParamMode::practical;
    auto engine = o.engine == "exact" ? rrho::Engine::exact : rrho::Engine::sampling;

    auto run = rrho::run_solver(mu, nu, o.rho, o.eps, mode, engine, o.seed, overrides);
    if (run.inst.degenerate_radius) {
        std::cerr << "warning: all points coincide; r fixed to one length unit\n";
    }
    emit(rrho::report_to_json(run.report), o.out_path);
    return run.report.termination == rrho::Termination::converged ? 0 : 2;
}

int run_baseline(const CommonOpts& o, const std::string& algo, double eta) {
    auto mu = load_with_warning(o.mu_path, "mu");
    auto nu = load_with_warning(o.nu_path, "nu");
    auto inst = rrho::make_raw_instance(mu, nu);

    auto t0 = std::chrono::steady_clock::now();
    nlohmann::json j;
    j["algo"] = algo;
    j["n"] = inst.n();
    j["m"] = inst.m();
    j["r"] = inst.r;
    if (algo == "emd") {
        j["value"] = rrho::exact_emd(inst).value;
    } else {
        double e = eta > 0.0 ? eta : 1e-3 * inst.r;
        j["eta"] = e;
        j["value"] = rrho::sinkhorn(inst, e);
    }
    j["wall_time_ms"] =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    emit(j, o.out_path);
    return 0;
}

int run_validate(std::vector<std::string> suites, std::uint64_t seed) {
    if (suites.empty()) suites = rrho::validate::suite_names();
    bool all_ok = true;
    for (const auto& name : suites) {
        auto res = rrho::validate::run_suite(name, seed);
        std::cout << res.name << ": " << res.passed << "/" << res.total;
        if (!res.detail.empty()) std::cout << "  (" << res.detail << " = " << res.stat << ")";
        std::cout << (res.ok() ? "  ok" : "  FAIL") << "\n";
        all_ok = all_ok && res.ok();
    }
    return all_ok ? 0 : 1;
}

int run_bench(const std::vector<std::size_t>& sizes, const std::vector<double>& rhos, double eps,
              const std::string& engine_name, std::uint64_t seed, const std::string& out_path,
              const std::vector<std::string>& override_kvs) {
    auto engine = engine_name == "exact" ? rrho::Engine::exact : rrho::Engine::sampling;
    auto overrides = parse_overrides(override_kvs);
    std::ostringstream csv;
    csv << "n,m,d,rho,eps,engine,solve_ms,iterations,estimate,termination\n";
    for (std::size_t size : sizes) {
        for (double rho : rhos) {
            rrho::rng::Stream gen({seed, size, static_cast<std::uint64_t>(rho * 1000)});
            auto mu = rrho::validate::random_point_set(gen, size, 3);
            auto nu = rrho::validate::random_point_set(gen, size, 3);
            auto run = rrho::run_solver(mu, nu, rho, eps, rrho::ParamMode::practical, engine, seed,
                                        overrides);
            csv << size << ',' << size << ",3," << rho << ',' << eps << ',' << engine_name << ','
                << run.report.wall_time_ms << ',' << run.report.iterations << ','
                << run.report.estimate << ',' << rrho::to_string(run.report.termination) << "\n";
            std::cerr << "bench n=" << size << " rho=" << rho << " done in "
                      << run.report.wall_time_ms << " ms\n";
        }
    }
    if (out_path.empty()) {
        std::cout << csv.str();
    } else {
        std::ofstream out(out_path);
        if (!out) throw rrho::Error("cannot write '" + out_path + "'");
        out << csv.str();
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lp-relaxed optimal transport distances with KDE-accelerated dual ascent"};
    app.require_subcommand(1);

    CommonOpts dist_opts;
    auto* dist = app.add_subcommand("dist", "estimate R_rho(mu, nu)");
    add_common(dist, dist_opts, true);

    CommonOpts base_opts;
    std::string algo = "emd";
    double eta = 0.0;
    auto* baseline = app.add_subcommand("baseline", "exact EMD or Sinkhorn value");
    add_common(baseline, base_opts, false);
    baseline->add_option("--algo", algo, "emd|sinkhorn")->check(CLI::IsMember({"emd", "sinkhorn"}));
    baseline->add_option("--eta", eta, "Sinkhorn regularization (default 1e-3 * r)");

    std::vector<std::string> suites;
    std::uint64_t val_seed = 0;
    auto* validate = app.add_subcommand("validate", "run a validation suite");
    validate->add_option("--suite", suites, "suite name (repeatable; default: all)")->take_all();
    validate->add_option("--seed", val_seed, "random seed");

    std::vector<std::size_t> sizes{16, 32, 64};
    std::vector<double> rhos{1.25, 1.5, 2.0};
    double bench_eps = 0.25;
    std::string bench_engine = "exact", bench_out;
    std::uint64_t bench_seed = 0;
    std::vector<std::string> bench_overrides;
    auto* bench = app.add_subcommand("bench", "timing rows per (n, rho) as CSV");
    bench->add_option("--sizes", sizes, "support sizes")->take_all();
    bench->add_option("--rhos", rhos, "rho values")->take_all();
    bench->add_option("--eps", bench_eps, "accuracy");
    bench->add_option("--engine", bench_engine, "exact|sampling")
        ->check(CLI::IsMember({"exact", "sampling"}));
    bench->add_option("--seed", bench_seed, "random seed");
    bench->add_option("--out", bench_out, "CSV output path");
    bench->add_option("--override", bench_overrides, "parameter override key=value")->take_all();

    try {
        app.parse(argc, argv);
        if (dist->parsed()) return run_dist(dist_opts);
        if (baseline->parsed()) return run_baseline(base_opts, algo, eta);
        if (validate->parsed()) return run_validate(suites, val_seed);
        if (bench->parsed()) {
            return run_bench(sizes, rhos, bench_eps, bench_engine, bench_seed, bench_out,
                             bench_overrides);
        }
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
