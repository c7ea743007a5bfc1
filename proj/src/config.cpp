#include "rhflow/config.hpp"

#include <cctype>
#include <sstream>
#include <stdexcept>

#include "rhflow/io.hpp"

namespace rhflow {

std::string kind_name(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::Flow: return "flow";
        case ExperimentKind::Kernel: return "kernel";
        case ExperimentKind::Entropy: return "entropy";
        case ExperimentKind::Sobolev: return "sobolev";
        case ExperimentKind::Gaussian: return "gaussian";
        case ExperimentKind::VerifyAll: return "verify-all";
    }
    return "?";
}

namespace {

std::string trim(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

[[noreturn]] void fail(int line, const std::string& msg) {
    throw std::runtime_error("config line " + std::to_string(line) + ": " + msg);
}

double parse_real(int line, const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) fail(line, "key '" + key + "': expected a number, got '" + v + "'");
        return x;
    } catch (const std::invalid_argument&) {
        fail(line, "key '" + key + "': expected a number, got '" + v + "'");
    } catch (const std::out_of_range&) {
        fail(line, "key '" + key + "': number out of range: '" + v + "'");
    }
}

long parse_int(int line, const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const long x = std::stol(v, &pos);
        if (pos != v.size()) fail(line, "key '" + key + "': expected an integer, got '" + v + "'");
        return x;
    } catch (const std::invalid_argument&) {
        fail(line, "key '" + key + "': expected an integer, got '" + v + "'");
    } catch (const std::out_of_range&) {
        fail(line, "key '" + key + "': integer out of range: '" + v + "'");
    }
}

bool parse_bool(int line, const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    fail(line, "key '" + key + "': expected true/false, got '" + v + "'");
}

std::vector<double> parse_list(int line, const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse_real(line, key, item));
    }
    if (out.empty()) fail(line, "key '" + key + "': empty list");
    return out;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream is(text);
    std::string raw;
    std::string section;
    int lineno = 0;
    while (std::getline(is, raw)) {
        ++lineno;
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail(lineno, "malformed section header: " + line);
            section = line.substr(1, line.size() - 2);
            if (section != "flow" && section != "heat" && section != "checks" &&
                section != "output")
                fail(lineno, "unknown section [" + section + "]");
            continue;
        }
        const size_t eq = line.find('=');
        if (eq == std::string::npos) fail(lineno, "expected `key = value`, got: " + line);
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty()) fail(lineno, "missing key before '='");

        if (section == "flow" || section.empty()) {
            if (key == "grid_n") cfg.flow.grid_n = static_cast<int>(parse_int(lineno, key, val));
            else if (key == "t_end") cfg.flow.t_end = parse_real(lineno, key, val);
            else if (key == "cfl") {
                cfg.flow.cfl = parse_real(lineno, key, val);
                if (cfg.flow.cfl > 0.25) fail(lineno, "cfl exceeds 0.25");
                if (!(cfg.flow.cfl > 0.0)) fail(lineno, "cfl must be positive");
            } else if (key == "dt") cfg.flow.dt = parse_real(lineno, key, val);
            else if (key == "snapshot_stride")
                cfg.flow.snapshot_stride = static_cast<int>(parse_int(lineno, key, val));
            else if (key == "family") cfg.flow.family.name = val;
            else if (key == "r0") cfg.flow.family.r0 = parse_real(lineno, key, val);
            else if (key == "phi0") cfg.flow.family.phi0 = parse_real(lineno, key, val);
            else if (key == "amp") cfg.flow.family.amp = parse_real(lineno, key, val);
            else if (key == "phi_amp") cfg.flow.family.phi_amp = parse_real(lineno, key, val);
            else fail(lineno, "unknown key '" + key + "' in section [flow]");
        } else if (section == "heat") {
            if (key == "T") cfg.T = parse_real(lineno, key, val);
            else if (key == "t_stop") cfg.t_stop = parse_real(lineno, key, val);
            else if (key == "delta_width") cfg.delta_width = parse_real(lineno, key, val);
            else if (key == "heat_dt") cfg.heat_dt = parse_real(lineno, key, val);
            else fail(lineno, "unknown key '" + key + "' in section [heat]");
        } else if (section == "checks") {
            if (key == "c1") cfg.c1 = parse_real(lineno, key, val);
            else if (key == "eps_list") cfg.eps_list = parse_list(lineno, key, val);
            else if (key == "delta_list") cfg.delta_list = parse_list(lineno, key, val);
            else if (key == "family_size")
                cfg.family_size = static_cast<int>(parse_int(lineno, key, val));
            else if (key == "seed")
                cfg.seed = static_cast<std::uint64_t>(parse_int(lineno, key, val));
            else if (key == "tau_offset") cfg.tau_offset = parse_real(lineno, key, val);
            else if (key == "s_override_zero") cfg.s_override_zero = parse_bool(lineno, key, val);
            else fail(lineno, "unknown key '" + key + "' in section [checks]");
        } else if (section == "output") {
            if (key == "dir") cfg.out_dir = val;
            else if (key == "quiet") cfg.quiet = parse_bool(lineno, key, val);
            else fail(lineno, "unknown key '" + key + "' in section [output]");
        }
    }
    if (cfg.flow.family.name != "round" && cfg.flow.family.name != "perturbed")
        throw std::runtime_error("config: unknown family '" + cfg.flow.family.name + "'");
    if (!(cfg.flow.t_end > 0.0)) throw std::runtime_error("config: t_end must be positive");
    if (!(cfg.T <= cfg.flow.t_end))
        throw std::runtime_error("config: heat T must lie within the flow window");
    if (!(cfg.t_stop < cfg.T)) throw std::runtime_error("config: t_stop must precede T");
    return cfg;
}

std::string dump_config(const ExperimentConfig& cfg) {
    std::ostringstream os;
    os << "[flow]\n";
    os << "grid_n = " << cfg.flow.grid_n << "\n";
    os << "t_end = " << format_double(cfg.flow.t_end) << "\n";
    os << "cfl = " << format_double(cfg.flow.cfl) << "\n";
    os << "dt = " << format_double(cfg.flow.dt) << "\n";
    os << "snapshot_stride = " << cfg.flow.snapshot_stride << "\n";
    os << "family = " << cfg.flow.family.name << "\n";
    os << "r0 = " << format_double(cfg.flow.family.r0) << "\n";
    os << "phi0 = " << format_double(cfg.flow.family.phi0) << "\n";
    os << "amp = " << format_double(cfg.flow.family.amp) << "\n";
    os << "phi_amp = " << format_double(cfg.flow.family.phi_amp) << "\n";
    os << "\n[heat]\n";
    os << "T = " << format_double(cfg.T) << "\n";
    os << "t_stop = " << format_double(cfg.t_stop) << "\n";
    os << "delta_width = " << format_double(cfg.delta_width) << "\n";
    os << "heat_dt = " << format_double(cfg.heat_dt) << "\n";
    os << "\n[checks]\n";
    os << "c1 = " << format_double(cfg.c1) << "\n";
    os << "eps_list = ";
    for (size_t i = 0; i < cfg.eps_list.size(); ++i)
        os << (i ? "," : "") << format_double(cfg.eps_list[i]);
    os << "\n";
    os << "delta_list = ";
    for (size_t i = 0; i < cfg.delta_list.size(); ++i)
        os << (i ? "," : "") << format_double(cfg.delta_list[i]);
    os << "\n";
    os << "family_size = " << cfg.family_size << "\n";
    os << "seed = " << cfg.seed << "\n";
    os << "tau_offset = " << format_double(cfg.tau_offset) << "\n";
    os << "s_override_zero = " << (cfg.s_override_zero ? "true" : "false") << "\n";
    os << "\n[output]\n";
    os << "dir = " << cfg.out_dir << "\n";
    os << "quiet = " << (cfg.quiet ? "true" : "false") << "\n";
    return os.str();
}

}  // namespace rhflow
