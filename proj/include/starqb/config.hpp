#pragma once

#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

namespace starqb {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Physical parameters of one star-topology battery/charger system.
struct SystemConfig {
    int n_chargers = 1;
    double gamma = 1.0;            // relative gyromagnetic ratio, may be negative
    double epsilon = 1e-5;         // battery purity factor
    std::optional<double> coupling_j_hz;     // battery-charger J
    std::optional<double> coupling_j_bl_hz;  // battery-load J_BL
    std::optional<double> t1_battery_s;
    std::optional<double> t1_charger_s;

    void validate() const {
        if (n_chargers < 1) throw ConfigError("n_chargers must be >= 1");
        if (std::abs(epsilon) > 1.0) throw ConfigError("|epsilon| must be <= 1");
        if (std::abs(gamma * epsilon) > 1.0)
            throw ConfigError("|gamma*epsilon| must be <= 1 (charger purity factor)");
        if (coupling_j_hz && *coupling_j_hz <= 0) throw ConfigError("coupling_j_hz must be > 0");
        if (t1_battery_s && *t1_battery_s <= 0) throw ConfigError("t1_battery_s must be > 0");
        if (t1_charger_s && *t1_charger_s <= 0) throw ConfigError("t1_charger_s must be > 0");
    }
};

// Key-value config file: one "key = value" per line, '#' comments, optional
// "[section]" headers which prefix following keys as "section.key".
// Unknown keys are rejected so typos cannot silently change an experiment.
class ConfigFile {
  public:
    ConfigFile() = default;

    static ConfigFile parse_stream(std::istream& in) {
        ConfigFile cf;
        std::string line, section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            auto trim = [](std::string s) {
                const auto a = s.find_first_not_of(" \t\r");
                const auto b = s.find_last_not_of(" \t\r");
                return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
            };
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']')
                    throw ConfigError("config line " + std::to_string(lineno) + ": bad section header");
                section = trim(line.substr(1, line.size() - 2));
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
            std::string key = trim(line.substr(0, eq));
            std::string value = trim(line.substr(eq + 1));
            if (key.empty() || value.empty())
                throw ConfigError("config line " + std::to_string(lineno) + ": empty key or value");
            if (!section.empty()) key = section + "." + key;
            if (!cf.values_.emplace(key, value).second)
                throw ConfigError("config: duplicate key '" + key + "'");
        }
        return cf;
    }

    static ConfigFile parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file: " + path);
        return parse_stream(in);
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    double get_double(const std::string& key) const {
        const std::string& s = at(key);
        try {
            std::size_t pos = 0;
            const double v = std::stod(s, &pos);
            if (pos != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config key '" + key + "': not a number: " + s);
        }
    }

    int get_int(const std::string& key) const {
        const double v = get_double(key);
        const int i = static_cast<int>(std::lround(v));
        if (std::abs(v - i) > 1e-12) throw ConfigError("config key '" + key + "': not an integer");
        return i;
    }

    double get_double_or(const std::string& key, double fallback) const {
        return has(key) ? get_double(key) : fallback;
    }
    int get_int_or(const std::string& key, int fallback) const {
        return has(key) ? get_int(key) : fallback;
    }

    // Parses the system keys, rejecting anything outside the documented schema.
    SystemConfig system_config() const {
        static const char* known[] = {
            "n_chargers",     "gamma",         "epsilon",          "coupling_j_hz",
            "coupling_j_bl_hz", "t1_battery_s", "t1_charger_s",
            "protocol.grid",  "protocol.iterations", "protocol.delta_min_s",
            "protocol.delta_max_s", "protocol.delta_steps", "protocol.tau_s_max_s",
            "protocol.tau_s_steps", "protocol.tau_prime_max"};
        for (const auto& [k, v] : values_) {
            bool ok = false;
            for (const char* kn : known)
                if (k == kn) { ok = true; break; }
            if (!ok) throw ConfigError("config: unknown key '" + k + "'");
        }
        SystemConfig c;
        if (has("n_chargers")) c.n_chargers = get_int("n_chargers");
        c.gamma = get_double_or("gamma", c.gamma);
        c.epsilon = get_double_or("epsilon", c.epsilon);
        if (has("coupling_j_hz")) c.coupling_j_hz = get_double("coupling_j_hz");
        if (has("coupling_j_bl_hz")) c.coupling_j_bl_hz = get_double("coupling_j_bl_hz");
        if (has("t1_battery_s")) c.t1_battery_s = get_double("t1_battery_s");
        if (has("t1_charger_s")) c.t1_charger_s = get_double("t1_charger_s");
        c.validate();
        return c;
    }

  private:
    const std::string& at(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) throw ConfigError("config: missing key '" + key + "'");
        return it->second;
    }

    std::map<std::string, std::string> values_;
};

}  // namespace starqb
