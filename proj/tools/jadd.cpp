// Command-line front end: single-point simulation, sweeps, state evolution
// and SIC parameter sweeps.

#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "jadd/coding.hpp"
#include "jadd/config.hpp"
#include "jadd/errors.hpp"
#include "jadd/harness.hpp"
#include "jadd/state_evolution.hpp"

using namespace jadd;

namespace {

struct ScenarioFlags {
    std::string config;
    std::optional<int> K, Ka, M, T;
    std::optional<double> snr_db, noise_var;
    std::optional<std::string> modulation;
    std::optional<std::uint64_t> seed;

    void attach(CLI::App* app) {
        app->add_option("-c,--config", config, "Scenario file (key = value)");
        app->add_option("-K", K, "Total devices");
        app->add_option("--Ka", Ka, "Active devices per slot");
        app->add_option("-M", M, "Subcarriers / spreading length");
        app->add_option("-T", T, "Symbols per slot");
        app->add_option("--snr", snr_db, "SNR in dB");
        app->add_option("--noise-var", noise_var, "Noise variance override");
        app->add_option("--modulation", modulation, "qpsk, qam16, ...");
        app->add_option("--seed", seed, "Master seed");
    }

    Scenario build() const {
        Scenario sc = config.empty() ? Scenario{} : load_scenario(config);
        if (K) sc.K = *K;
        if (Ka) sc.Ka = *Ka;
        if (M) sc.M = *M;
        if (T) sc.T = *T;
        if (snr_db) sc.snr_db = *snr_db;
        if (noise_var) sc.noise_var = *noise_var;
        if (modulation) sc.constellation = parse_modulation(*modulation);
        if (seed) sc.master_seed = *seed;
        sc.validate();
        return sc;
    }
};

struct DetectorFlags {
    std::string detector = "ssl";
    int max_iters = 50;
    double tolerance = 1e-10;
    bool empirical_variance = false;
    std::optional<double> lambda0;

    void attach(CLI::App* app) {
        app->add_option("-d,--detector", detector, "ssl | asl | amp | gene | ls");
        app->add_option("--max-iters", max_iters, "Iteration cap");
        app->add_option("--tol", tolerance, "Convergence tolerance on mean-square change of mu");
        app->add_flag("--empirical-variance", empirical_variance, "Residual-based v before each LE step");
        app->add_option("--lambda0", lambda0, "Initial sparsity ratio (default: phase-transition rule)");
    }

    DetectorConfig config() const {
        DetectorConfig c;
        c.max_iters = max_iters;
        c.tolerance = tolerance;
        c.empirical_variance = empirical_variance;
        c.lambda0 = lambda0;
        return c;
    }
};

void print_row(const ResultRow& r) {
    std::cout << "axis,detector,adep,adep_ci,ber,ber_ci,mse,trials,failures\n"
              << r.axis << ',' << r.detector << ',' << (r.adep_below_resolution ? "<" : "") << r.adep << ','
              << r.adep_ci << ',' << r.ber << ',' << r.ber_ci << ',' << r.mse << ',' << r.trials << ','
              << r.failures << '\n';
}

void write_trace(const std::string& path, const Scenario& sc, const TrialOptions& opt) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << "iteration,t,tau,v,sigma2,mean_lambda,mean_score\n" << std::setprecision(10);
    DetectorConfig cfg = opt.config;
    cfg.observer = [&](const IterationRecord& rec, const CMatrix&) {
        for (Eigen::Index t = 0; t < rec.tau.size(); ++t)
            out << rec.iteration << ',' << t << ',' << rec.tau(t) << ',' << rec.v(t) << ',' << rec.sigma2 << ','
                << rec.mean_lambda << ',' << rec.mean_score << '\n';
    };
    TrialOptions traced = opt;
    traced.config = cfg;
    run_trial(sc, scenario_spreading(sc), 0, traced);
}

void write_rounds(const std::string& path, const Scenario& sc, const TrialOptions& opt) {
    const auto code = make_code(opt.code);
    const SpreadingMatrix S = scenario_spreading(sc);
    const SlotData slot = generate_slot(sc, S, 0, code.get());
    SICConfig cfg;
    cfg.n_sic = opt.n_sic;
    cfg.i_max = opt.i_max;
    cfg.inner = opt.detector;
    cfg.detector = opt.config;
    const SICResult res = sic_detect(slot.Y, S, sc.constellation, *code, cfg);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << "round,detected,cancelled,residual_energy\n" << std::setprecision(10);
    for (std::size_t r = 0; r < res.rounds.size(); ++r)
        out << r + 1 << ',' << res.rounds[r].detected << ',' << res.rounds[r].cancelled.size() << ','
            << res.rounds[r].residual_energy << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Joint activity and data detection simulator"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "One scenario, one detector");
    ScenarioFlags sim_sc;
    DetectorFlags sim_det;
    std::uint64_t sim_trials = 100;
    bool sim_sic = false;
    int sim_nsic = 10, sim_imax = 10;
    std::string sim_code, sim_out, sim_trace, sim_rounds;
    sim_sc.attach(sim);
    sim_det.attach(sim);
    sim->add_option("-n,--trials", sim_trials, "Monte-Carlo slots");
    sim->add_flag("--sic", sim_sic, "Wrap the detector in the SIC loop");
    sim->add_option("--nsic", sim_nsic, "Devices cancelled per SIC round");
    sim->add_option("--imax", sim_imax, "Maximum SIC rounds");
    sim->add_option("--code", sim_code, "none | conv13 (default: conv13 with --sic, else none)");
    sim->add_option("-o,--out", sim_out, "Results CSV (manifest written alongside)");
    sim->add_option("--trace", sim_trace, "Per-iteration trace CSV of trial 0");
    sim->add_option("--rounds", sim_rounds, "Per-round SIC diagnostics CSV of trial 0");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Run a JSON sweep spec");
    std::string sweep_spec;
    std::string sweep_out;
    sweep->add_option("spec", sweep_spec, "Sweep spec file")->required();
    sweep->add_option("-o,--out", sweep_out, "Overrides the spec's output path");

    // se
    auto* se = app.add_subcommand("se", "Monte-Carlo state evolution");
    ScenarioFlags se_sc;
    DetectorFlags se_det;
    int se_samples = 100;
    std::string se_out;
    se_sc.attach(se);
    se_det.attach(se);
    se->add_option("-N,--samples", se_samples, "Monte-Carlo samples");
    se->add_option("-o,--out", se_out, "CSV path (stdout when empty)");

    // sic-sweep
    auto* sics = app.add_subcommand("sic-sweep", "Sweep N_sic with N_sic * I_max held fixed");
    ScenarioFlags sics_sc;
    DetectorFlags sics_det;
    std::vector<int> sics_values{5, 10, 25};
    int sics_budget = 100;
    std::uint64_t sics_trials = 100;
    std::string sics_code = "conv13", sics_out;
    sics_sc.attach(sics);
    sics_det.attach(sics);
    sics->add_option("--values", sics_values, "N_sic values")->delimiter(',');
    sics->add_option("--budget", sics_budget, "N_sic * I_max");
    sics->add_option("-n,--trials", sics_trials, "Monte-Carlo slots per point");
    sics->add_option("--code", sics_code, "none | conv13");
    sics->add_option("-o,--out", sics_out, "Results CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*sim) {
            const Scenario sc = sim_sc.build();
            TrialOptions opt;
            opt.detector = parse_detector(sim_det.detector);
            opt.config = sim_det.config();
            if (sim_code.empty()) sim_code = sim_sic ? "conv13" : "none";
            opt.code = sim_code;
            opt.n_sic = sim_nsic;
            opt.i_max = sim_imax;
            make_code(sim_code);
            opt.mode = sim_sic ? RunMode::Sic : (sim_code == "none" ? RunMode::Uncoded : RunMode::Coded);

            const TrialRecord rec = run_trials(sc, opt, sim_trials);
            const ResultRow row = summarize("-", rec);
            print_row(row);
            std::cerr << "mean iterations " << rec.mean_iterations() << ", wall " << rec.wall_seconds << " s\n";
            if (rec.trials() == 0 && rec.failures() > 0)
                throw NumericalFailure("every trial diverged", 0);
            if (!sim_out.empty()) {
                nlohmann::json echo;
                echo["scenario"] = scenario_keys(sc);
                echo["detector"] = sim_det.detector;
                echo["trials"] = sim_trials;
                echo["mode"] = sim_sic ? "sic" : sim_code == "none" ? "uncoded" : "coded";
                echo["code"] = sim_code;
                echo["nsic"] = sim_nsic;
                echo["imax"] = sim_imax;
                emit_results({row}, sim_out, echo);
            }
            if (!sim_trace.empty()) write_trace(sim_trace, sc, opt);
            if (!sim_rounds.empty()) {
                if (opt.mode != RunMode::Sic) throw ConfigError("--rounds needs --sic");
                write_rounds(sim_rounds, sc, opt);
            }
        } else if (*sweep) {
            std::ifstream in(sweep_spec);
            if (!in) throw ConfigError("cannot open sweep spec '" + sweep_spec + "'");
            nlohmann::json j;
            try {
                in >> j;
            } catch (const nlohmann::json::exception& e) {
                throw ConfigError(std::string("sweep spec is not valid JSON: ") + e.what());
            }
            SweepSpec spec = parse_sweep_spec(j);
            if (!sweep_out.empty()) spec.output = sweep_out;
            if (spec.output.empty()) throw ConfigError("sweep needs an output path");
            emit_results(run_sweep(spec), spec.output, sweep_spec_to_json(spec));
            std::cerr << "wrote " << spec.output << '\n';
        } else if (*se) {
            const Scenario sc = se_sc.build();
            SEConfig c;
            c.K = sc.K;
            c.Ka = sc.Ka;
            c.M = sc.M;
            c.T = sc.T;
            c.constellation = sc.constellation;
            c.N = se_samples;
            c.max_iters = se_det.max_iters;
            c.sigma2 = sc.noise_variance();
            c.kind = parse_detector(se_det.detector);
            c.seed = sc.master_seed;
            c.lambda0 = se_det.lambda0;
            c.keep_samples = false;
            const SETrace tr = se_run(c);
            std::ofstream file;
            if (!se_out.empty()) {
                file.open(se_out);
                if (!file) throw std::runtime_error("cannot open '" + se_out + "' for writing");
            }
            std::ostream& out = se_out.empty() ? std::cout : file;
            out << "iteration,theta,predicted_ber\n" << std::setprecision(10);
            for (std::size_t i = 0; i < tr.theta.size(); ++i)
                out << i + 1 << ',' << tr.theta[i] << ',' << tr.ber_per_iter[i] << '\n';
        } else if (*sics) {
            SweepSpec spec;
            spec.axis = "nsic";
            for (int v : sics_values) spec.values.push_back(std::to_string(v));
            spec.trials = sics_trials;
            spec.detectors = {sics_det.detector};
            spec.scenario = sics_sc.build();
            spec.options.mode = RunMode::Sic;
            spec.options.code = sics_code;
            spec.options.n_sic = 1;
            spec.options.i_max = sics_budget;
            spec.options.config = sics_det.config();
            make_code(sics_code);
            const auto table = run_sweep(spec);
            if (sics_out.empty()) {
                for (const auto& r : table) print_row(r);
            } else {
                emit_results(table, sics_out, sweep_spec_to_json(spec));
            }
        }
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const NumericalFailure& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
