#include "rhflow/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rhflow {

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_metric_csv(std::ostream& os, const MetricState& m) {
    os << "# t=" << format_double(m.t) << " N=" << m.grid.n << "\n";
    os << "x,a,f,phi\n";
    for (int i = 0; i <= m.grid.n; ++i) {
        const auto k = static_cast<size_t>(i);
        os << format_double(m.grid.x(i)) << ',' << format_double(m.a[k]) << ','
           << format_double(m.f[k]) << ',' << format_double(m.phi[k]) << "\n";
    }
}

MetricState read_metric_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("metric csv: missing comment line");
    double t = 0.0;
    int n = 0;
    if (std::sscanf(line.c_str(), "# t=%lf N=%d", &t, &n) != 2)
        throw std::runtime_error("metric csv: malformed comment line: " + line);
    if (!std::getline(is, line) || line != "x,a,f,phi")
        throw std::runtime_error("metric csv: missing column header");
    MetricState m{Grid(n)};
    m.t = t;
    for (int i = 0; i <= n; ++i) {
        if (!std::getline(is, line))
            throw std::runtime_error("metric csv: truncated at node " + std::to_string(i));
        const auto k = static_cast<size_t>(i);
        double x = 0.0;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &x, &m.a[k], &m.f[k], &m.phi[k]) != 4)
            throw std::runtime_error("metric csv: malformed row: " + line);
    }
    return m;
}

void save_metric(const std::string& path, const MetricState& m) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    write_metric_csv(os, m);
}

MetricState load_metric(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open for reading: " + path);
    return read_metric_csv(is);
}

void save_history(const std::string& path, const FlowHistory& hist) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os << "# flow N=" << hist.grid().n << " K=" << hist.size() << " scheme=" << hist.scheme
       << " cfl=" << format_double(hist.cfl) << "\n";
    for (const auto& s : hist.states) write_metric_csv(os, s);
}

FlowHistory load_history(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open for reading: " + path);
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("history: missing manifest line");
    int n = 0;
    unsigned long k = 0;
    char scheme[32] = {0};
    double cfl = 0.0;
    if (std::sscanf(line.c_str(), "# flow N=%d K=%lu scheme=%31s cfl=%lf", &n, &k, scheme, &cfl) != 4)
        throw std::runtime_error("history: malformed manifest line: " + line);
    FlowHistory hist;
    hist.scheme = scheme;
    hist.cfl = cfl;
    for (unsigned long b = 0; b < k; ++b) {
        MetricState m = read_metric_csv(is);
        if (m.grid.n != n)
            throw std::runtime_error("history: grid differs between blocks (block " +
                                     std::to_string(b) + ")");
        hist.states.push_back(std::move(m));
    }
    return hist;
}

void save_heat_csv(const std::string& path, const Grid& g, const HeatSolution& sol) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os << "# direction="
       << (sol.direction == HeatDirection::Forward ? "forward" : "conjugate-backward")
       << " delta_width=" << format_double(sol.delta_width) << " dt=" << format_double(sol.dt)
       << "\n";
    os << "t,x,u\n";
    for (size_t k = 0; k < sol.size(); ++k)
        for (int i = 0; i <= g.n; ++i)
            os << format_double(sol.times[k]) << ',' << format_double(g.x(i)) << ','
               << format_double(sol.fields[k][i]) << "\n";
}

void save_entropy_csv(const std::string& path, const EntropyReport& rep) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os << "t,tau,F,dFdt,prodF,W,dWdt,prodW,res_F,res_W\n";
    for (size_t k = 0; k < rep.times.size(); ++k)
        os << format_double(rep.times[k]) << ',' << format_double(rep.tau[k]) << ','
           << format_double(rep.F[k]) << ',' << format_double(rep.dFdt[k]) << ','
           << format_double(rep.prodF[k]) << ',' << format_double(rep.W[k]) << ','
           << format_double(rep.dWdt[k]) << ',' << format_double(rep.prodW[k]) << ','
           << format_double(rep.resF[k]) << ',' << format_double(rep.resW[k]) << "\n";
}

nlohmann::json to_json(const SobolevReport& rep, int grid_n) {
    nlohmann::json doc;
    doc["kind"] = "sobolev";
    doc["inputs"] = {{"t", rep.t}, {"A", rep.A}, {"B", rep.B}, {"family", rep.family}};
    doc["margins"] = {{"labels", rep.labels},
                      {"values", rep.margins},
                      {"min", rep.min_margin},
                      {"A_best", rep.A_best},
                      {"quotient_min", rep.quotient_min},
                      {"probe_min_quotient", rep.probe_min_quotient}};
    if (rep.witness) doc["witness"] = *rep.witness;
    doc["resolution"] = {{"grid_n", grid_n}, {"tol", rep.tol}};
    return doc;
}

nlohmann::json to_json(const CheckReport& rep, int grid_n) {
    nlohmann::json doc;
    doc["kind"] = rep.kind;
    nlohmann::json inputs = {{"t", rep.t}};
    for (const auto& [name, value] : rep.scalars) inputs[name] = value;
    doc["inputs"] = inputs;
    doc["margins"] = {{"labels", rep.labels}, {"values", rep.margins}, {"min", rep.min_margin}};
    if (rep.witness) doc["witness"] = *rep.witness;
    doc["hypotheses_ok"] = rep.hypotheses_ok;
    doc["resolution"] = {{"grid_n", grid_n}, {"tol", rep.tol}};
    return doc;
}

nlohmann::json to_json(const GaussianReport& rep) {
    nlohmann::json doc;
    doc["kind"] = "gaussian";
    doc["inputs"] = {{"c1", rep.c1_used}, {"delta_width", rep.delta_width}};
    nlohmann::json samples = nlohmann::json::array();
    for (const auto& s : rep.samples)
        samples.push_back({{"t", s.t},
                           {"x", s.x},
                           {"G", s.G},
                           {"dist", s.dist},
                           {"ball_vol", s.ball_vol},
                           {"ratio", s.ratio}});
    doc["margins"] = {{"sup_ratio", rep.sup_ratio}, {"samples", samples}};
    doc["hypotheses_ok"] = rep.hypotheses_ok;
    if (!rep.note.empty()) doc["note"] = rep.note;
    doc["resolution"] = {{"grid_n", rep.grid_n}};
    return doc;
}

nlohmann::json to_json(const EntropyReport& rep, int grid_n) {
    nlohmann::json doc;
    doc["kind"] = "entropy";
    doc["inputs"] = {{"a_params", rep.a_params}, {"tol_mono", rep.tol_mono}};
    doc["margins"] = {{"times", rep.times},
                      {"F", rep.F},
                      {"W", rep.W},
                      {"flagged", rep.flagged},
                      {"max_excluded_nodes", rep.max_excluded_nodes}};
    doc["resolution"] = {{"grid_n", grid_n}};
    return doc;
}

void save_json(const std::string& path, const nlohmann::json& doc) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os << doc.dump(2) << "\n";
}

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string file_hash_hex(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open for hashing: " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, fnv1a(ss.str()));
    return buf;
}

}  // namespace rhflow
