#include "jadd/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>

#include "jadd/errors.hpp"

namespace jadd {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
    T out{};
    const char* first = value.data();
    const char* last = first + value.size();
    const auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc() || ptr != last) throw ConfigError("bad value for " + key + ": '" + value + "'");
    return out;
}

double parse_double(const std::string& key, const std::string& value) {
    // from_chars for double does not accept "inf" spelled with a sign on every libstdc++.
    std::string v = value;
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
    if (v == "inf" || v == "+inf") return std::numeric_limits<double>::infinity();
    return parse_number<double>(key, value);
}

}  // namespace

Constellation parse_modulation(const std::string& name) {
    std::string s = name;
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "qpsk") return make_constellation(4, "qpsk");
    if (s.rfind("qam", 0) == 0 && s.size() > 3) return make_constellation(parse_number<int>("modulation", s.substr(3)), "qam");
    throw ConfigError("unsupported modulation '" + name + "'");
}

void apply_scenario_key(Scenario& sc, const std::string& key, const std::string& value) {
    if (key == "K")
        sc.K = parse_number<int>(key, value);
    else if (key == "Ka")
        sc.Ka = parse_number<int>(key, value);
    else if (key == "M")
        sc.M = parse_number<int>(key, value);
    else if (key == "T")
        sc.T = parse_number<int>(key, value);
    else if (key == "snr_db")
        sc.snr_db = parse_double(key, value);
    else if (key == "modulation")
        sc.constellation = parse_modulation(value);
    else if (key == "seed")
        sc.master_seed = parse_number<std::uint64_t>(key, value);
    else if (key == "noise_var")
        sc.noise_var = parse_double(key, value);
    else
        throw ConfigError("unknown scenario key '" + key + "'");
}

Scenario parse_scenario(std::istream& in, Scenario base) {
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        apply_scenario_key(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    base.validate();
    return base;
}

Scenario load_scenario(const std::string& path, Scenario base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_scenario(in, std::move(base));
}

std::map<std::string, std::string> scenario_keys(const Scenario& sc) {
    std::map<std::string, std::string> out;
    out["K"] = std::to_string(sc.K);
    out["Ka"] = std::to_string(sc.Ka);
    out["M"] = std::to_string(sc.M);
    out["T"] = std::to_string(sc.T);
    std::ostringstream snr;
    snr.precision(17);
    snr << sc.snr_db;
    out["snr_db"] = snr.str();
    out["modulation"] = sc.constellation.name;
    out["seed"] = std::to_string(sc.master_seed);
    if (sc.noise_var) {
        std::ostringstream nv;
        nv.precision(17);
        nv << *sc.noise_var;
        out["noise_var"] = nv.str();
    }
    return out;
}

}  // namespace jadd
