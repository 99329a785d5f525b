#include "bondpool/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace bondpool {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::string unquote(std::string v) {
    if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') ||
                          (v.front() == '\'' && v.back() == '\''))) {
        return v.substr(1, v.size() - 2);
    }
    return v;
}

bool parse_double(const std::string& v, double& out) {
    char* end = nullptr;
    out = std::strtod(v.c_str(), &end);
    return end && *end == '\0' && end != v.c_str();
}

bool parse_bool(const std::string& v, bool& out) {
    if (v == "true" || v == "1") out = true;
    else if (v == "false" || v == "0") out = false;
    else return false;
    return true;
}

bool parse_u64(const std::string& v, std::uint64_t& out) {
    char* end = nullptr;
    out = std::strtoull(v.c_str(), &end, 10);
    return end && *end == '\0' && end != v.c_str();
}

bool parse_int(const std::string& v, int& out) {
    char* end = nullptr;
    const long val = std::strtol(v.c_str(), &end, 10);
    if (!end || *end != '\0' || end == v.c_str()) return false;
    out = static_cast<int>(val);
    return true;
}

}  // namespace

bool parse_sim_config(const std::string& text, SimConfig& cfg, std::string& error) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            error = "line " + std::to_string(lineno) + ": expected key = value";
            return false;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = unquote(trim(line.substr(eq + 1)));
        bool ok = true;
        if (key == "y0") ok = parse_double(value, cfg.y0);
        else if (key == "r0") ok = parse_double(value, cfg.r0);
        else if (key == "kappa") ok = parse_double(value, cfg.kappa);
        else if (key == "cir.k") ok = parse_double(value, cfg.cir.k);
        else if (key == "cir.theta") ok = parse_double(value, cfg.cir.theta);
        else if (key == "cir.sigma") ok = parse_double(value, cfg.cir.sigma);
        else if (key == "cir.r_init") ok = parse_double(value, cfg.cir.r_init);
        else if (key == "horizon") ok = parse_double(value, cfg.horizon);
        else if (key == "n_steps") ok = parse_int(value, cfg.n_steps);
        else if (key == "trades_per_step") ok = parse_int(value, cfg.trades_per_step);
        else if (key == "maturity_rule") cfg.maturity_rule = value;
        else if (key == "maturity_param_is_variance")
            ok = parse_bool(value, cfg.maturity_param_is_variance);
        else if (key == "size_mean") ok = parse_double(value, cfg.size_mean);
        else if (key == "size_var") ok = parse_double(value, cfg.size_var);
        else if (key == "size_unit") cfg.size_unit = value;
        else if (key == "halt_threshold") ok = parse_double(value, cfg.halt_threshold);
        else if (key == "seed") ok = parse_u64(value, cfg.seed);
        else {
            error = "line " + std::to_string(lineno) + ": unknown key '" + key + "'";
            return false;
        }
        if (!ok) {
            error = "line " + std::to_string(lineno) + ": bad value for '" + key + "'";
            return false;
        }
    }
    return validate_config(cfg, error);
}

bool load_sim_config(const std::string& path, SimConfig& cfg, std::string& error) {
    std::ifstream in(path);
    if (!in) {
        error = "cannot open config file: " + path;
        return false;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_sim_config(buf.str(), cfg, error);
}

}  // namespace bondpool
