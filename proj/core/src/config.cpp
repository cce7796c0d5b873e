#include "lambdasim/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace lambdasim {

std::vector<double> SweepConfig::grid() const {
    std::vector<double> out;
    if (!enabled) return out;
    out.reserve(points);
    if (points == 1) {
        out.push_back(min);
        return out;
    }
    for (int i = 0; i < points; ++i) {
        const double frac = static_cast<double>(i) / (points - 1);
        if (log_spacing) {
            out.push_back(min * std::pow(max / min, frac));
        } else {
            out.push_back(min + frac * (max - min));
        }
    }
    return out;
}

namespace {

std::string trim(std::string_view s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
}

std::string upper(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::toupper(c); });
    return s;
}

// section -> known keys
const std::map<std::string, std::vector<std::string>> kSchema = {
    {"model",
     {"mode", "h", "omega", "nu", "kappa", "gamma", "alpha", "omega_c", "temperature"}},
    {"sweep", {"parameter", "min", "max", "points", "spacing"}},
    {"integrator", {"rel_tol", "abs_tol", "max_step", "t_max", "termination"}},
    {"oracle", {"enabled", "trajectories", "seed"}},
    {"output", {"directory", "prefix"}},
    {"rates", {"targets", "gammas"}},
};

struct RawConfig {
    // (section, key) -> (value, line)
    std::map<std::pair<std::string, std::string>, std::pair<std::string, int>> values;
    std::string name;

    const std::string* find(const std::string& section, const std::string& key) const {
        auto it = values.find({section, key});
        return it == values.end() ? nullptr : &it->second.first;
    }
};

double parse_double(const RawConfig& raw, const std::string& section, const std::string& key,
                    const std::string& text, int line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(raw.name, line, "expected a number for " + section + "." + key +
                                              ", got '" + text + "'");
    }
}

bool parse_bool(const RawConfig& raw, const std::string& section, const std::string& key,
                const std::string& text, int line) {
    if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
    if (text == "false" || text == "0" || text == "no" || text == "off") return false;
    throw ConfigError(raw.name, line,
                      "expected true/false for " + section + "." + key + ", got '" + text + "'");
}

std::vector<double> parse_list(const RawConfig& raw, const std::string& section,
                               const std::string& key, const std::string& text, int line) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        out.push_back(parse_double(raw, section, key, item, line));
    }
    return out;
}

RawConfig tokenize(const std::string& text, const std::string& name) {
    RawConfig raw;
    raw.name = name;
    std::istringstream stream(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        const std::string stripped = trim(line.substr(0, line.find_first_of("#;")));
        if (stripped.empty()) continue;
        if (stripped.front() == '[') {
            if (stripped.back() != ']') {
                throw ConfigError(name, line_no, "malformed section header '" + stripped + "'");
            }
            section = trim(stripped.substr(1, stripped.size() - 2));
            if (!kSchema.contains(section)) {
                throw ConfigError(name, line_no, "unknown section [" + section + "]");
            }
            continue;
        }
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(name, line_no, "expected key = value, got '" + stripped + "'");
        }
        if (section.empty()) {
            throw ConfigError(name, line_no, "key outside of any [section]");
        }
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        const auto& keys = kSchema.at(section);
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
            throw ConfigError(name, line_no, "unknown key '" + key + "' in [" + section + "]");
        }
        raw.values[{section, key}] = {value, line_no};
    }
    return raw;
}

void apply_env_overrides(RawConfig& raw) {
    for (const auto& [section, keys] : kSchema) {
        for (const auto& key : keys) {
            const std::string var = "SIM_" + upper(section) + "_" + upper(key);
            if (const char* value = std::getenv(var.c_str())) {
                raw.values[{section, key}] = {trim(value), 0};
            }
        }
    }
}

}  // namespace

ExperimentConfig ExperimentConfig::parse_string(const std::string& text,
                                                const std::string& name) {
    RawConfig raw = tokenize(text, name);
    apply_env_overrides(raw);

    ExperimentConfig cfg;
    cfg.params = LambdaParams{};  // defaults: h=0.5, gamma=0.05, alpha=0.0027, ...

    auto get = [&raw](const std::string& section, const std::string& key)
        -> std::pair<const std::string*, int> {
        auto it = raw.values.find({section, key});
        if (it == raw.values.end()) return {nullptr, 0};
        return {&it->second.first, it->second.second};
    };
    auto number = [&](const std::string& section, const std::string& key, double& target) {
        if (auto [v, line] = get(section, key); v) {
            target = parse_double(raw, section, key, *v, line);
        }
    };

    if (auto [v, line] = get("model", "mode"); v) {
        if (*v == "raman") {
            cfg.params.mode = RunMode::Raman;
        } else if (*v == "pulse-relax") {
            cfg.params.mode = RunMode::PulseRelax;
        } else {
            throw ConfigError(raw.name, line, "mode must be raman or pulse-relax");
        }
    }
    number("model", "h", cfg.params.h);
    number("model", "omega", cfg.params.omega);
    number("model", "nu", cfg.params.nu);
    number("model", "gamma", cfg.params.gamma);
    number("model", "alpha", cfg.params.alpha);
    number("model", "omega_c", cfg.params.omega_c);
    number("model", "temperature", cfg.params.temperature);
    if (auto [v, line] = get("model", "kappa"); v) {
        cfg.params.kappa = parse_double(raw, "model", "kappa", *v, line);
    } else {
        cfg.params.kappa = 3.0 * cfg.params.h;
    }
    if (cfg.params.mode == RunMode::PulseRelax) {
        cfg.params.omega = 0.0;
        cfg.params.nu = 0.0;
    }

    if (auto [v, line] = get("sweep", "parameter"); v) {
        cfg.sweep.enabled = true;
        if (*v == "h") {
            cfg.sweep.parameter = SweepParameter::H;
        } else if (*v == "omega") {
            cfg.sweep.parameter = SweepParameter::Omega;
        } else if (*v == "nu") {
            cfg.sweep.parameter = SweepParameter::Nu;
        } else {
            throw ConfigError(raw.name, line, "sweep parameter must be h, omega or nu");
        }
    }
    number("sweep", "min", cfg.sweep.min);
    number("sweep", "max", cfg.sweep.max);
    if (auto [v, line] = get("sweep", "points"); v) {
        cfg.sweep.points = static_cast<int>(parse_double(raw, "sweep", "points", *v, line));
        if (cfg.sweep.points < 1) {
            throw ConfigError(raw.name, line, "sweep points must be >= 1");
        }
    }
    if (auto [v, line] = get("sweep", "spacing"); v) {
        if (*v == "linear") {
            cfg.sweep.log_spacing = false;
        } else if (*v == "log") {
            cfg.sweep.log_spacing = true;
        } else {
            throw ConfigError(raw.name, line, "spacing must be linear or log");
        }
    }
    if (cfg.sweep.enabled && cfg.sweep.points == 0) {
        throw ConfigError(raw.name, 0, "sweep requires points");
    }

    number("integrator", "rel_tol", cfg.integrator.rel_tol);
    number("integrator", "abs_tol", cfg.integrator.abs_tol);
    number("integrator", "max_step", cfg.integrator.max_step);
    number("integrator", "t_max", cfg.integrator.t_max);
    number("integrator", "termination", cfg.integrator.termination_threshold);

    if (auto [v, line] = get("oracle", "enabled"); v) {
        cfg.oracle.enabled = parse_bool(raw, "oracle", "enabled", *v, line);
    }
    if (auto [v, line] = get("oracle", "trajectories"); v) {
        cfg.oracle.trajectories =
            static_cast<long>(parse_double(raw, "oracle", "trajectories", *v, line));
        if (cfg.oracle.trajectories < 1) {
            throw ConfigError(raw.name, line, "oracle trajectories must be >= 1");
        }
    }
    if (auto [v, line] = get("oracle", "seed"); v) {
        cfg.oracle.seed =
            static_cast<std::uint64_t>(parse_double(raw, "oracle", "seed", *v, line));
    }

    if (auto [v, line] = get("output", "directory"); v) cfg.output.directory = *v;
    if (auto [v, line] = get("output", "prefix"); v) cfg.output.prefix = *v;

    if (auto [v, line] = get("rates", "targets"); v) {
        cfg.rates.targets = parse_list(raw, "rates", "targets", *v, line);
        for (double f : cfg.rates.targets) {
            if (!(f > 0.0 && f < 1.0)) {
                throw ConfigError(raw.name, line, "rates targets must lie in (0, 1)");
            }
        }
    }
    if (auto [v, line] = get("rates", "gammas"); v) {
        cfg.rates.gammas = parse_list(raw, "rates", "gammas", *v, line);
    }

    cfg.params.validate();
    cfg.integrator.validate();
    return cfg;
}

ExperimentConfig ExperimentConfig::parse_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_string(buffer.str(), path.string());
}

namespace {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::string ExperimentConfig::serialize() const {
    std::ostringstream out;
    out << "[model]\n";
    out << "mode = " << (params.mode == RunMode::Raman ? "raman" : "pulse-relax") << "\n";
    out << "h = " << format_double(params.h) << "\n";
    out << "omega = " << format_double(params.omega) << "\n";
    out << "nu = " << format_double(params.nu) << "\n";
    out << "kappa = " << format_double(params.kappa) << "\n";
    out << "gamma = " << format_double(params.gamma) << "\n";
    out << "alpha = " << format_double(params.alpha) << "\n";
    out << "omega_c = " << format_double(params.omega_c) << "\n";
    out << "temperature = " << format_double(params.temperature) << "\n";
    if (sweep.enabled) {
        out << "\n[sweep]\n";
        out << "parameter = "
            << (sweep.parameter == SweepParameter::H
                    ? "h"
                    : sweep.parameter == SweepParameter::Omega ? "omega" : "nu")
            << "\n";
        out << "min = " << format_double(sweep.min) << "\n";
        out << "max = " << format_double(sweep.max) << "\n";
        out << "points = " << sweep.points << "\n";
        out << "spacing = " << (sweep.log_spacing ? "log" : "linear") << "\n";
    }
    out << "\n[integrator]\n";
    out << "rel_tol = " << format_double(integrator.rel_tol) << "\n";
    out << "abs_tol = " << format_double(integrator.abs_tol) << "\n";
    out << "max_step = " << format_double(integrator.max_step) << "\n";
    out << "t_max = " << format_double(integrator.t_max) << "\n";
    out << "termination = " << format_double(integrator.termination_threshold) << "\n";
    out << "\n[oracle]\n";
    out << "enabled = " << (oracle.enabled ? "true" : "false") << "\n";
    out << "trajectories = " << oracle.trajectories << "\n";
    out << "seed = " << oracle.seed << "\n";
    out << "\n[output]\n";
    out << "directory = " << output.directory << "\n";
    out << "prefix = " << output.prefix << "\n";
    if (!rates.targets.empty() || !rates.gammas.empty()) {
        out << "\n[rates]\n";
        auto join = [](const std::vector<double>& values) {
            std::string s;
            for (std::size_t i = 0; i < values.size(); ++i) {
                if (i) s += ", ";
                s += format_double(values[i]);
            }
            return s;
        };
        if (!rates.targets.empty()) out << "targets = " << join(rates.targets) << "\n";
        if (!rates.gammas.empty()) out << "gammas = " << join(rates.gammas) << "\n";
    }
    return out.str();
}

}  // namespace lambdasim
