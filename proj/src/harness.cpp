#include "jadd/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "jadd/baselines.hpp"
#include "jadd/coding.hpp"
#include "jadd/config.hpp"
#include "jadd/errors.hpp"

#ifndef JADD_VERSION
#define JADD_VERSION "unknown"
#endif

namespace jadd {

namespace {

constexpr const char* kCsvHeader = "axis,detector,adep,adep_ci,ber,ber_ci,mse,trials,failures";

std::string format_double(double x) {
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

double parse_csv_double(const std::string& s) {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw ConfigError("malformed number in results file: '" + s + "'");
    return v;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(line);
    while (std::getline(is, cur, ',')) out.push_back(cur);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string now_iso8601() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

TrialOutcome score_uncoded(const SlotData& slot, const DetectionResult& det, const Constellation& cons) {
    TrialOutcome o;
    o.devices = static_cast<std::uint32_t>(det.indicators_hat.size());
    o.adep_errors = static_cast<std::uint32_t>(
        std::llround(compute_adep(det.indicators_hat, slot.activity.indicators) * det.indicators_hat.size()));
    o.bits = tally_uncoded(det.X_hat, slot.symbols, det.indicators_hat, cons);
    o.mse = compute_mse(det.X_hat, slot.X);
    o.iterations = det.iterations;
    return o;
}

}  // namespace

std::string build_version() { return JADD_VERSION; }

void TrialRecord::merge(const TrialRecord& other) {
    for (const auto& [idx, outcome] : other.outcomes) {
        if (!outcomes.emplace(idx, outcome).second)
            throw ContractViolation("merging records that share trial index " + std::to_string(idx));
    }
    wall_seconds += other.wall_seconds;
    if (detector.empty()) detector = other.detector;
}

std::uint64_t TrialRecord::trials() const {
    std::uint64_t n = 0;
    for (const auto& [i, o] : outcomes) n += !o.failed;
    return n;
}

std::uint64_t TrialRecord::failures() const { return outcomes.size() - trials(); }

std::uint64_t TrialRecord::adep_errors() const {
    std::uint64_t n = 0;
    for (const auto& [i, o] : outcomes)
        if (!o.failed) n += o.adep_errors;
    return n;
}

std::uint64_t TrialRecord::adep_decisions() const {
    std::uint64_t n = 0;
    for (const auto& [i, o] : outcomes)
        if (!o.failed) n += o.devices;
    return n;
}

BitTally TrialRecord::bits() const {
    BitTally b;
    for (const auto& [i, o] : outcomes)
        if (!o.failed) b += o.bits;
    return b;
}

double TrialRecord::adep() const {
    const auto d = adep_decisions();
    return d == 0 ? 0.0 : static_cast<double>(adep_errors()) / d;
}

double TrialRecord::ber() const { return bits().ber(); }

double TrialRecord::mse() const {
    double s = 0.0;
    std::uint64_t n = 0;
    for (const auto& [i, o] : outcomes)
        if (!o.failed) {
            s += o.mse;
            ++n;
        }
    return n == 0 ? 0.0 : s / n;
}

double TrialRecord::mean_iterations() const {
    double s = 0.0;
    std::uint64_t n = 0;
    for (const auto& [i, o] : outcomes)
        if (!o.failed) {
            s += o.iterations;
            ++n;
        }
    return n == 0 ? 0.0 : s / n;
}

TrialOutcome run_trial(const Scenario& scenario, const SpreadingMatrix& S, std::uint64_t trial_index,
                       const TrialOptions& opt) {
    const Constellation& cons = scenario.constellation;
    try {
        if (opt.mode == RunMode::Uncoded) {
            const SlotData slot = generate_slot(scenario, S, trial_index);
            switch (opt.detector) {
                case DetectorKind::OracleLS: {
                    DetectionResult det;
                    det.X_hat = oracle_ls(slot.Y, S, slot.activity.support);
                    det.indicators_hat = slot.activity.indicators;
                    return score_uncoded(slot, det, cons);
                }
                case DetectorKind::GeneAided:
                    return score_uncoded(
                        slot, gene_aided_oamp(slot.Y, S, cons, slot.activity.indicators, slot.noise_var, opt.config),
                        cons);
                default:
                    return score_uncoded(slot, run_blind_detector(opt.detector, slot.Y, S, cons, opt.config), cons);
            }
        }

        const auto code = make_code(opt.code);
        const SlotData slot = generate_slot(scenario, S, trial_index, code.get());
        SICResult res;
        if (opt.mode == RunMode::Coded) {
            res = coded_detect(slot.Y, S, cons, *code, opt.detector, opt.config);
        } else {
            SICConfig sc;
            sc.n_sic = opt.n_sic;
            sc.i_max = opt.i_max;
            sc.inner = opt.detector;
            sc.detector = opt.config;
            res = sic_detect(slot.Y, S, cons, *code, sc);
        }
        TrialOutcome o;
        o.devices = static_cast<std::uint32_t>(res.indicators.size());
        for (std::size_t k = 0; k < res.indicators.size(); ++k)
            o.adep_errors += (res.indicators[k] != 0) != (slot.activity.indicators[k] != 0);
        o.bits = tally_bits(res.decoded_bits, slot.info_bits);
        CMatrix X_hat = CMatrix::Zero(scenario.K, scenario.T);
        for (int k : res.kappa) {
            const auto row = reconstruct_device(res.decoded_bits[k], *code, cons, scenario.T);
            for (int t = 0; t < scenario.T; ++t) X_hat(k, t) = row[t];
        }
        o.mse = compute_mse(X_hat, slot.X);
        o.iterations = static_cast<int>(res.rounds.size());
        return o;
    } catch (const NumericalFailure&) {
        TrialOutcome o;
        o.failed = true;
        return o;
    }
}

int worker_count() {
    if (const char* env = std::getenv("JADD_WORKERS")) {
        char* end = nullptr;
        const long n = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || n < 1) throw ConfigError("JADD_WORKERS must be a positive integer");
        return static_cast<int>(n);
    }
    return 1;
}

TrialRecord run_trials(const Scenario& scenario, const TrialOptions& options, std::uint64_t n_trials,
                       std::uint64_t first_trial) {
    if (n_trials < 1) throw ConfigError("at least one trial is required");
    scenario.validate();
    const SpreadingMatrix S = scenario_spreading(scenario);

    TrialRecord rec;
    rec.scenario = scenario;
    rec.detector = to_string(options.detector);

    const auto start = std::chrono::steady_clock::now();
    const int workers = std::min<std::uint64_t>(worker_count(), n_trials);
    if (workers <= 1) {
        for (std::uint64_t i = 0; i < n_trials; ++i)
            rec.outcomes.emplace(first_trial + i, run_trial(scenario, S, first_trial + i, options));
    } else {
        std::atomic<std::uint64_t> next{0};
        std::mutex guard;
        std::exception_ptr error;
        auto work = [&] {
            try {
                for (std::uint64_t i = next++; i < n_trials; i = next++) {
                    TrialOutcome o = run_trial(scenario, S, first_trial + i, options);
                    const std::lock_guard lock(guard);
                    rec.outcomes.emplace(first_trial + i, o);
                }
            } catch (...) {
                const std::lock_guard lock(guard);
                if (!error) error = std::current_exception();
                next = n_trials;
            }
        };
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& th : pool) th.join();
        if (error) std::rethrow_exception(error);
    }
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

ResultRow summarize(const std::string& axis_value, const TrialRecord& record) {
    ResultRow row;
    row.axis = axis_value;
    row.detector = record.detector;
    row.trials = record.trials();
    row.failures = record.failures();

    const auto errors = record.adep_errors();
    const auto decisions = record.adep_decisions();
    if (decisions > 0) {
        const Interval ci = wilson_interval(errors, decisions);
        row.adep_ci = (ci.hi - ci.lo) / 2.0;
        if (errors == 0) {
            row.adep_below_resolution = true;
            row.adep = 1.0 / static_cast<double>(decisions);
        } else {
            row.adep = static_cast<double>(errors) / decisions;
        }
    }
    const BitTally bits = record.bits();
    if (bits.total > 0) {
        const Interval ci = wilson_interval(bits.total - bits.correct, bits.total);
        row.ber = bits.ber();
        row.ber_ci = (ci.hi - ci.lo) / 2.0;
    }
    row.mse = record.mse();
    return row;
}

SweepSpec parse_sweep_spec(const nlohmann::json& j) {
    SweepSpec spec;
    try {
        spec.axis = j.value("axis", spec.axis);
        if (spec.axis != "M" && spec.axis != "snr_db" && spec.axis != "T" && spec.axis != "lambda0" &&
            spec.axis != "nsic")
            throw ConfigError("unknown sweep axis '" + spec.axis + "'");
        if (!j.contains("values") || !j.at("values").is_array() || j.at("values").empty())
            throw ConfigError("sweep needs a non-empty 'values' array");
        for (const auto& v : j.at("values")) spec.values.push_back(v.is_string() ? v.get<std::string>() : v.dump());
        spec.trials = j.value("trials", spec.trials);
        if (spec.trials < 1) throw ConfigError("trials must be at least 1");
        if (j.contains("detectors")) spec.detectors = j.at("detectors").get<std::vector<std::string>>();
        if (spec.detectors.empty()) throw ConfigError("sweep needs at least one detector");
        for (const auto& d : spec.detectors) parse_detector(d);
        spec.output = j.value("output", spec.output);

        if (j.contains("scenario"))
            for (const auto& [key, value] : j.at("scenario").items())
                apply_scenario_key(spec.scenario, key, value.is_string() ? value.get<std::string>() : value.dump());
        spec.scenario.validate();

        TrialOptions& o = spec.options;
        const std::string mode = j.value("mode", std::string("uncoded"));
        if (mode == "uncoded")
            o.mode = RunMode::Uncoded;
        else if (mode == "coded")
            o.mode = RunMode::Coded;
        else if (mode == "sic")
            o.mode = RunMode::Sic;
        else
            throw ConfigError("unknown mode '" + mode + "'");
        o.code = j.value("code", o.code);
        make_code(o.code);
        o.n_sic = j.value("nsic", o.n_sic);
        o.i_max = j.value("imax", o.i_max);
        o.config.max_iters = j.value("max_iters", o.config.max_iters);
        o.config.tolerance = j.value("tolerance", o.config.tolerance);
        o.config.empirical_variance = j.value("empirical_variance", o.config.empirical_variance);
        if (j.contains("lambda0")) o.config.lambda0 = j.at("lambda0").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed sweep spec: ") + e.what());
    }
    return spec;
}

nlohmann::json sweep_spec_to_json(const SweepSpec& spec) {
    nlohmann::json j;
    j["axis"] = spec.axis;
    j["values"] = spec.values;
    j["trials"] = spec.trials;
    j["detectors"] = spec.detectors;
    j["output"] = spec.output;
    j["scenario"] = scenario_keys(spec.scenario);
    const TrialOptions& o = spec.options;
    j["mode"] = o.mode == RunMode::Uncoded ? "uncoded" : o.mode == RunMode::Coded ? "coded" : "sic";
    j["code"] = o.code;
    j["nsic"] = o.n_sic;
    j["imax"] = o.i_max;
    j["max_iters"] = o.config.max_iters;
    j["tolerance"] = o.config.tolerance;
    j["empirical_variance"] = o.config.empirical_variance;
    if (o.config.lambda0) j["lambda0"] = *o.config.lambda0;
    return j;
}

std::vector<ResultRow> run_sweep(const SweepSpec& spec) {
    std::vector<ResultRow> table;
    for (const std::string& value : spec.values) {
        Scenario sc = spec.scenario;
        TrialOptions opt = spec.options;
        if (spec.axis == "M") {
            apply_scenario_key(sc, "M", value);
        } else if (spec.axis == "snr_db") {
            apply_scenario_key(sc, "snr_db", value);
        } else if (spec.axis == "T") {
            apply_scenario_key(sc, "T", value);
        } else if (spec.axis == "lambda0") {
            if (value == "auto")
                opt.config.lambda0.reset();
            else
                opt.config.lambda0 = std::stod(value);
        } else if (spec.axis == "nsic") {
            opt.mode = RunMode::Sic;
            opt.n_sic = std::stoi(value);
            if (opt.n_sic < 1) throw ConfigError("nsic values must be positive");
            // Keep N_sic * I_max at the configured budget.
            opt.i_max = std::max(1, spec.options.n_sic * spec.options.i_max / opt.n_sic);
        }
        sc.validate();
        for (const std::string& d : spec.detectors) {
            opt.detector = parse_detector(d);
            table.push_back(summarize(value, run_trials(sc, opt, spec.trials)));
        }
    }
    return table;
}

void emit_results(const std::vector<ResultRow>& table, const std::string& path, const nlohmann::json& config_echo) {
    std::ofstream csv(path);
    if (!csv) throw std::runtime_error("cannot open '" + path + "' for writing");
    csv << kCsvHeader << '\n';
    for (const ResultRow& r : table) {
        csv << r.axis << ',' << r.detector << ',' << (r.adep_below_resolution ? "<" : "") << format_double(r.adep)
            << ',' << format_double(r.adep_ci) << ',' << format_double(r.ber) << ',' << format_double(r.ber_ci) << ','
            << format_double(r.mse) << ',' << r.trials << ',' << r.failures << '\n';
    }
    csv.close();
    if (!csv) throw std::runtime_error("write to '" + path + "' failed");

    nlohmann::json manifest;
    manifest["config"] = config_echo;
    manifest["version"] = build_version();
    manifest["written"] = now_iso8601();
    manifest["rows"] = table.size();
    std::ofstream js(path + ".json");
    if (!js) throw std::runtime_error("cannot open '" + path + ".json' for writing");
    js << manifest.dump(2) << '\n';
    if (!js) throw std::runtime_error("write to '" + path + ".json' failed");
}

std::vector<ResultRow> load_results(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) throw ConfigError("'" + path + "' is not a results table");
    std::vector<ResultRow> table;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != 9) throw ConfigError("results row has " + std::to_string(f.size()) + " fields");
        ResultRow r;
        r.axis = f[0];
        r.detector = f[1];
        r.adep_below_resolution = !f[2].empty() && f[2][0] == '<';
        r.adep = parse_csv_double(r.adep_below_resolution ? f[2].substr(1) : f[2]);
        r.adep_ci = parse_csv_double(f[3]);
        r.ber = parse_csv_double(f[4]);
        r.ber_ci = parse_csv_double(f[5]);
        r.mse = parse_csv_double(f[6]);
        r.trials = std::stoull(f[7]);
        r.failures = std::stoull(f[8]);
        table.push_back(std::move(r));
    }
    return table;
}

}  // namespace jadd
