// lfckit: design, verify and simulate decentralized observer-based
// load-frequency controllers for N-area power systems.

#include "lfc/analysis.hpp"
#include "lfc/errors.hpp"
#include "lfc/io.hpp"
#include "lfc/lmi.hpp"
#include "lfc/model.hpp"
#include "lfc/sim.hpp"
#include "lfc/synthesis.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace lfc;

namespace {

// Exit codes: 0 success, 2 infeasible design, 3 verification failure,
// 64 usage/config error, 65 incompatible artifacts, 70 internal failure.
constexpr int kExitOk = 0, kExitInfeasible = 2, kExitVerifyFail = 3, kExitUsage = 64,
              kExitIncompatible = 65, kExitSoftware = 70;

struct SolverCliOptions {
    lmi::SolveOptions opts;
    void attach(CLI::App* cmd) {
        cmd->add_option("--eps-feas", opts.eps_feas,
                        "absolute feasibility margin (0 = numerical noise floor)");
        cmd->add_option("--pd-floor-default", opts.delta,
                        "PD floor used when the problem carries none");
        cmd->add_option("--max-newton", opts.max_newton, "total Newton iteration budget");
        cmd->add_flag("--verbose-solver", opts.verbose, "print solver progress");
    }
};

int run_design(const std::string& config_path, const std::string& out_dir,
               const std::string& strategy, const std::string& strips_mode,
               const std::string& dump_path, const lmi::SolveOptions& solver) {
    const auto cfg = io::load_config(config_path);
    const auto sys = io::build_system(cfg);
    const auto out = io::output_selection(cfg, sys);

    synthesis::DesignSpec spec = cfg.design;
    if (strips_mode == "off")
        spec.strips.reset();
    else if (strips_mode == "on" && !spec.strips)
        throw ConfigError("--strips on requested but the config defines no strips");

    if (!dump_path.empty()) {
        const auto dec = synthesis::compute_decouplers(sys);
        auto problem   = synthesis::assemble_hinf_problem(sys, out, spec, dec);
        if (spec.strips)
            synthesis::append_strip_lmis(problem, sys, spec, dec);
        std::ofstream df(dump_path);
        if (!df)
            throw ConfigError("cannot write LMI dump: " + dump_path);
        lmi::dump_problem(problem, df);
        std::cout << "LMI problem dumped to " << dump_path << "\n";
    }

    fs::create_directories(out_dir);

    lmi::LmiSolution certificate;
    synthesis::GainSet gains;
    if (strategy == "integrated") {
        auto r      = synthesis::design_integrated(sys, out, spec, solver);
        certificate = std::move(r.certificate);
        gains       = std::move(r.gains);
    } else if (strategy == "separated") {
        auto r = synthesis::design_separated(sys, out, spec, solver);
        if (!r.feasible()) {
            for (std::size_t i = 0; i < r.certificates.size(); ++i)
                if (!r.certificates[i].feasible)
                    std::cerr << "area " << (i + 1) << ": infeasible at margin "
                              << r.certificates[i].margin << " (blocking "
                              << r.certificates[i].blocking << ")\n";
            return kExitInfeasible;
        }
        gains = std::move(r.gains);
        // Keep the worst per-area certificate as the run's summary.
        certificate = r.certificates[0];
        for (const auto& c : r.certificates)
            if (c.margin > certificate.margin)
                certificate = c;
    } else {
        throw ConfigError("unknown strategy: " + strategy);
    }

    if (!certificate.feasible) {
        std::cerr << "design infeasible: no point found at margin " << certificate.margin
                  << " (blocking LMI: " << certificate.blocking << ")\n";
        return kExitInfeasible;
    }

    const fs::path dir(out_dir);
    io::GainsFile gf{gains, spec, strategy, cfg.content_hash};
    io::save_gains((dir / "gains.json").string(), gf, &certificate);
    io::save_certificate((dir / "certificate.json").string(), certificate);
    io::manifest_update(out_dir, config_path, cfg.content_hash, strategy,
                        {{"gains", "gains.json"}, {"certificate", "certificate.json"}});

    std::cout << "design feasible: margin " << certificate.margin << " ("
              << certificate.newton_iterations << " Newton iterations)\n";
    std::cout << "gains written to " << (dir / "gains.json").string() << "\n";
    return kExitOk;
}

int run_verify(const std::string& gains_path, const std::string& config_path,
               const std::string& out_dir) {
    const auto gf  = io::load_gains(gains_path);
    const auto cfg = io::load_config(config_path);
    const auto sys = io::build_system(cfg);
    const auto out = io::output_selection(cfg, sys);

    if (gf.gains.n_areas() != sys.N)
        throw IncompatibilityError("gains file and config disagree on the area count");
    if (!gf.config_hash.empty() && gf.config_hash != cfg.content_hash)
        std::cerr << "note: gains were designed against a different config (hash "
                  << gf.config_hash << " vs " << cfg.content_hash << ")\n";

    bool identities_ok = true;
    std::string identities_msg;
    try {
        gf.gains.validate(sys);
    } catch (const IncompatibilityError& e) {
        identities_ok  = false;
        identities_msg = e.what();
    }

    // Checks run against the *config's* design spec.
    const auto rep = analysis::verify_design(sys, out, gf.gains, cfg.design);

    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    io::write_verification_json((dir / "verification.json").string(), rep, gains_path);
    io::write_spectra_csv((dir / "spectra.csv").string(), rep);
    io::manifest_update(out_dir, config_path, cfg.content_hash, gf.strategy,
                        {{"verification", "verification.json"}, {"spectra", "spectra.csv"}});

    auto flag = [](bool ok) { return ok ? "PASS" : "FAIL"; };
    std::cout << "gain identities:   " << flag(identities_ok);
    if (!identities_ok)
        std::cout << "  (" << identities_msg << ")";
    std::cout << "\n";
    std::cout << "hurwitz:           " << flag(rep.hurwitz) << "\n";
    std::cout << "hinf estimate:     " << rep.hinf.value << " < gamma=" << rep.gamma << "  "
              << flag(rep.hinf_ok) << "\n";
    std::cout << "analysis residual: " << rep.analysis_residual << "  "
              << flag(rep.analysis_ok) << "\n";
    if (rep.has_strips)
        std::cout << "strip containment: " << flag(rep.strips.pass) << "\n";

    const bool all = identities_ok && rep.pass();
    std::cout << "overall:           " << flag(all) << "\n";
    return all ? kExitOk : kExitVerifyFail;
}

sim::DisturbanceSchedule load_schedule_file(const std::string& path, int n_areas) {
    const auto cfg_text = io::slurp(path);
    auto j              = nlohmann::json::parse(cfg_text, nullptr, false);
    if (j.is_discarded() || !j.contains("events"))
        throw ConfigError(path + ": schedule file needs an 'events' array");
    sim::DisturbanceSchedule sched;
    for (const auto& je : j["events"]) {
        sim::DisturbanceEvent ev;
        ev.time = je.at("time").get<double>();
        ev.area = je.value("area", 1) - 1;
        ev.step = je.at("step").get<double>();
        sched.events.push_back(ev);
    }
    sched.validate(n_areas);
    return sched;
}

int run_simulate(const std::string& gains_path, const std::string& config_path,
                 const std::string& out_dir, const std::string& schedule_path,
                 const std::string& compare_path) {
    const auto gf  = io::load_gains(gains_path);
    const auto cfg = io::load_config(config_path);
    const auto sys = io::build_system(cfg);
    if (gf.gains.n_areas() != sys.N)
        throw IncompatibilityError("gains file and config disagree on the area count");

    sim::DisturbanceSchedule sched = cfg.schedule;
    if (!schedule_path.empty())
        sched = load_schedule_file(schedule_path, sys.N);

    fs::create_directories(out_dir);
    const fs::path dir(out_dir);

    const auto traj = sim::simulate(sys, gf.gains, sched, cfg.simc);
    for (const auto& w : traj.warnings)
        std::cerr << "warning: " << w << "\n";
    const auto m = sim::metrics(traj);

    io::write_trajectory_csv((dir / "trajectory.csv").string(), traj);
    io::write_metrics_json((dir / "metrics.json").string(), m, gf.strategy);
    io::write_plot_script((dir / "plot.gnuplot").string(), "trajectory.csv", sys.N);
    io::manifest_update(out_dir, config_path, cfg.content_hash, gf.strategy,
                        {{"trajectory", "trajectory.csv"},
                         {"metrics", "metrics.json"},
                         {"plot", "plot.gnuplot"}});

    std::cout << "simulated " << cfg.simc.t_end << " s; regulation band "
              << (sim::regulation_ok(traj, sched) ? "held" : "NOT held") << "\n";

    if (!compare_path.empty()) {
        const auto gf2 = io::load_gains(compare_path);
        if (gf2.gains.n_areas() != sys.N)
            throw IncompatibilityError("comparison gains disagree on the area count");
        const auto traj2 = sim::simulate(sys, gf2.gains, sched, cfg.simc);
        const auto m2    = sim::metrics(traj2);
        io::write_trajectory_csv((dir / "trajectory_compare.csv").string(), traj2);
        io::write_metrics_json((dir / "metrics_compare.json").string(), m2, gf2.strategy);
        const std::string table =
            io::metrics_table({{gf.strategy, m}, {gf2.strategy, m2}});
        std::ofstream tf(dir / "compare.txt");
        tf << table;
        std::cout << table;
        io::manifest_update(out_dir, config_path, cfg.content_hash, gf.strategy,
                            {{"metrics_compare", "metrics_compare.json"},
                             {"compare", "compare.txt"}});
    }
    return kExitOk;
}

int run_report(const std::string& dir_a, const std::string& dir_b) {
    if (dir_b.empty()) {
        const auto r = io::build_report(dir_a);
        std::cout << r.text;
        std::ofstream out(fs::path(dir_a) / "report.txt");
        out << r.text;
        return r.missing.empty() ? kExitOk : 1;
    }
    const auto text = io::build_comparison_report(dir_a, dir_b);
    std::cout << text;
    std::ofstream out(fs::path(dir_a) / "report_comparison.txt");
    out << text;
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"decentralized observer-based load-frequency control design toolkit"};
    app.require_subcommand(1);

    std::string config_path, gains_path, out_dir = "run", strategy = "integrated",
                strips_mode = "auto", dump_path, schedule_path, compare_path, dir_b;

    SolverCliOptions solver;

    auto* design = app.add_subcommand("design", "solve the design LMIs and write the gains");
    design->add_option("config", config_path, "run configuration (JSON)")->required();
    design->add_option("--out", out_dir, "output directory");
    design->add_option("--strategy", strategy, "integrated|separated")
        ->check(CLI::IsMember({"integrated", "separated"}));
    design->add_option("--strips", strips_mode, "auto|on|off: use strip LMIs")
        ->check(CLI::IsMember({"auto", "on", "off"}));
    design->add_option("--dump-problem", dump_path, "dump the assembled LMIs (sparse text)");
    solver.attach(design);

    auto* verify = app.add_subcommand("verify", "re-check a gain set against a config");
    verify->add_option("gains", gains_path, "gains file (JSON)")->required();
    verify->add_option("config", config_path, "run configuration (JSON)")->required();
    verify->add_option("--out", out_dir, "output directory");

    auto* simulate = app.add_subcommand("simulate", "time-domain simulation under the "
                                                    "configured load schedule");
    simulate->add_option("gains", gains_path, "gains file (JSON)")->required();
    simulate->add_option("config", config_path, "run configuration (JSON)")->required();
    simulate->add_option("--out", out_dir, "output directory");
    simulate->add_option("--schedule", schedule_path, "JSON schedule overriding the config");
    simulate->add_option("--compare", compare_path, "second gains file for a side-by-side run");

    auto* report = app.add_subcommand("report", "consolidate run artifacts into a report");
    report->add_option("run_dir", config_path, "run directory")->required();
    report->add_option("run_dir_b", dir_b, "second run directory (comparison)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (design->parsed())
            return run_design(config_path, out_dir, strategy, strips_mode, dump_path,
                              solver.opts);
        if (verify->parsed())
            return run_verify(gains_path, config_path, out_dir);
        if (simulate->parsed())
            return run_simulate(gains_path, config_path, out_dir, schedule_path, compare_path);
        if (report->parsed())
            return run_report(config_path, dir_b);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ParameterError& e) {
        std::cerr << "parameter error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const IncompatibilityError& e) {
        std::cerr << "incompatible artifacts: " << e.what() << "\n";
        return kExitIncompatible;
    } catch (const DivergenceError& e) {
        std::cerr << "simulation diverged: " << e.what() << "\n";
        return kExitSoftware;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSoftware;
    }
    return kExitUsage;
}
