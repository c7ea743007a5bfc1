#include "rhflow/runner.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <numbers>

#include "rhflow/inequalities.hpp"
#include "rhflow/io.hpp"

namespace rhflow {

namespace {
constexpr const char* kVersion = "rhflow 1.0.0";
}

int RunManifest::exit_code() const {
    bool flag = false;
    for (const auto& c : checks) {
        if (c.status == CheckStatus::Fail) return 1;
        if (c.status == CheckStatus::Flag) flag = true;
    }
    return flag ? 2 : 0;
}

namespace {

struct Session {
    const ExperimentConfig& cfg;
    RunManifest& man;
    std::filesystem::path out;

    void record_file(const std::filesystem::path& p) {
        man.files.emplace_back(p.string(), file_hash_hex(p.string()));
    }
    void add(const std::string& name, CheckStatus st, const std::string& detail = "") {
        man.checks.push_back({name, st, detail});
    }

    double default_width(const FlowHistory& hist, double T) const {
        if (cfg.delta_width > 0.0) return cfg.delta_width;
        const MetricState mT = metric_at(hist, T);
        double amax = 0.0;
        for (double a : mT.a) amax = std::max(amax, a);
        return 4.0 * mT.grid.h * amax;
    }

    // Heat steps aligned with the flow snapshot grid when possible: stored
    // slices then coincide with exact snapshots and the entropy rates are not
    // polluted by the metric interpolation error between snapshots.
    HeatOptions heat_options(double span, const FlowHistory& hist) const {
        HeatOptions opt;
        opt.dt = cfg.heat_dt;
        double dt_eff = opt.dt > 0.0 ? opt.dt : 0.2 * hist.grid().h * hist.grid().h;
        long k = 1;
        if (cfg.heat_dt <= 0.0 && hist.size() >= 2) {
            const double delta = hist.states[1].t - hist.states[0].t;
            bool uniform = true;
            for (size_t i = 1; i + 1 < hist.size(); ++i)
                if (std::abs(hist.states[i + 1].t - hist.states[i].t - delta) > 1e-12)
                    uniform = false;
            const auto on_grid = [&](double t) {
                const double r = (t - hist.t_begin()) / delta;
                return std::abs(r - std::round(r)) < 1e-9;
            };
            if (uniform && delta > 0.0 && on_grid(cfg.T) && on_grid(cfg.t_stop)) {
                k = std::max<long>(1, static_cast<long>(std::ceil(delta / dt_eff - 1e-12)));
                dt_eff = delta / static_cast<double>(k);
                opt.dt = dt_eff;
            }
        }
        const double steps = span / dt_eff;
        opt.store_stride = static_cast<int>(
            k * std::max<long>(1, static_cast<long>(steps / 200.0) / k));
        return opt;
    }

    double mass_tol(const Grid& g) const {
        const double s = 256.0 / g.n;
        return 1e-4 * std::max(1.0, s * s);
    }

    void suite_flow(const FlowHistory& hist) {
        const auto hp = out / "history.csv";
        save_history(hp.string(), hist);
        record_file(hp);
        const auto fp = out / "final_metric.csv";
        save_metric(fp.string(), hist.states.back());
        record_file(fp);
        try {
            for (const auto& s : hist.states)
                check_metric_invariants(s, 1e-6 + 50.0 * hist.grid().h * hist.grid().h);
            add("flow-invariants", CheckStatus::Pass,
                std::to_string(hist.size()) + " snapshots");
        } catch (const std::domain_error& e) {
            add("flow-invariants", CheckStatus::Fail, e.what());
        }
    }

    HeatSolution make_kernel(const FlowHistory& hist) const {
        const double width = default_width(hist, cfg.T);
        return fundamental_solution(hist, cfg.T, cfg.t_stop, width,
                                    heat_options(cfg.T - cfg.t_stop, hist));
    }

    void suite_kernel(const FlowHistory& hist, const HeatSolution& G) {
        const auto kp = out / "kernel.csv";
        save_heat_csv(kp.string(), hist.grid(), G);
        record_file(kp);

        double defect = 0.0;
        for (double m : G.mass) defect = std::max(defect, std::abs(m - 1.0));
        add("kernel-mass", defect <= mass_tol(hist.grid()) ? CheckStatus::Pass : CheckStatus::Fail,
            "max |mass-1| = " + format_double(defect));

        auto od = on_diagonal_check(hist, G);
        const auto op = out / "on_diagonal.json";
        save_json(op.string(), to_json(od, hist.grid().n));
        record_file(op);
        add("on-diagonal", CheckStatus::Pass, "c_meas = " + format_double(od.scalars[0].second));

        const double t_mid = 0.5 * (cfg.t_stop + cfg.T);
        const double res = adjoint_residual(hist, G, t_mid);
        add("adjoint-residual", std::isfinite(res) ? CheckStatus::Pass : CheckStatus::Fail,
            "residual = " + format_double(res));
    }

    void suite_entropy(const FlowHistory& hist) {
        // uniform-started conjugate solution: terminal data 1/Vol(g(T))
        const MetricState mT = metric_at(hist, cfg.T);
        ScalarField uT(mT.grid, Parity::Even, 1.0 / volume(mT));
        auto sol = solve_conjugate(hist, uT, cfg.T, cfg.t_stop,
                                   heat_options(cfg.T - cfg.t_stop, hist));
        const std::vector<double> a_params = {0.0, 1.0, std::sqrt(2.0 * std::numbers::pi), 5.0};
        auto rep = monotonicity_trace(hist, sol, cfg.tau_offset, a_params);
        const auto cp = out / "entropy.csv";
        save_entropy_csv(cp.string(), rep);
        record_file(cp);
        const auto jp = out / "entropy.json";
        save_json(jp.string(), to_json(rep, hist.grid().n));
        record_file(jp);
        add("entropy-monotonicity", rep.flagged ? CheckStatus::Fail : CheckStatus::Pass,
            rep.flagged ? "a rate fell below -tol_mono" : "all rates nonnegative within tol");
    }

    void suite_sobolev(const FlowHistory& hist) {
        const MetricState m0 = metric_at(hist, hist.t_begin());
        std::vector<double> zeroS;
        const std::vector<double>* ov = nullptr;
        if (cfg.s_override_zero) {
            zeroS.assign(static_cast<size_t>(m0.grid.nodes()), 0.0);
            ov = &zeroS;
        }
        SobolevReport sob0;
        try {
            sob0 = best_sobolev_constant(m0, ov, cfg.seed);
        } catch (const std::domain_error& e) {
            add("sobolev", CheckStatus::Flag, e.what());
            return;
        }
        const double A = sob0.A_best * (1.0 + 1e-6);
        auto ver = verify_uniform_sobolev(hist, hist.t_end(), A, 0.0, cfg.family_size, cfg.seed);
        const auto sp = out / "sobolev.json";
        save_json(sp.string(), to_json(ver, hist.grid().n));
        record_file(sp);
        add("sobolev", ver.min_margin >= -ver.tol ? CheckStatus::Pass : CheckStatus::Fail,
            "A_best = " + format_double(sob0.A_best) +
                ", min margin = " + format_double(ver.min_margin));

        auto ls = verify_log_sobolev(hist, hist.t_end(), cfg.eps_list, cfg.family_size, cfg.seed);
        const auto lp = out / "log_sobolev.json";
        save_json(lp.string(), to_json(ls, hist.grid().n));
        record_file(lp);
        add("log-sobolev", ls.min_margin >= -ls.tol ? CheckStatus::Pass : CheckStatus::Fail,
            "min margin = " + format_double(ls.min_margin));

        const auto [An, Bn] = plain_energy_pair(m0, A, 0.0);
        auto nash = nash_check(m0, An, Bn, cfg.family_size, cfg.seed);
        const auto np = out / "nash.json";
        save_json(np.string(), to_json(nash, hist.grid().n));
        record_file(np);
        add("nash", nash.min_margin >= -nash.tol ? CheckStatus::Pass : CheckStatus::Fail,
            "min margin = " + format_double(nash.min_margin));

        auto frozen = FlowHistory::frozen(m0, 0.0, cfg.T);
        auto ku = kernel_upper_check(frozen, An, Bn);
        const auto kp = out / "kernel_upper.json";
        save_json(kp.string(), to_json(ku, hist.grid().n));
        record_file(kp);
        add("kernel-upper", ku.min_margin >= -ku.tol ? CheckStatus::Pass : CheckStatus::Fail,
            "min margin = " + format_double(ku.min_margin));
    }

    void suite_gaussian(const FlowHistory& hist, const HeatSolution& G) {
        GaussianReport rep;
        if (cfg.s_override_zero) {
            rep.c1_used = cfg.c1;
            rep.delta_width = G.delta_width;
            rep.grid_n = hist.grid().n;
            rep.hypotheses_ok = false;
            rep.note = "hypotheses not satisfied; bound not asserted";
        } else {
            rep = gaussian_bound_check(hist, G, cfg.c1);
        }
        const auto gp = out / "gaussian.json";
        save_json(gp.string(), to_json(rep));
        record_file(gp);
        if (!rep.hypotheses_ok) {
            add("gaussian", CheckStatus::Flag, rep.note);
        } else if (rep.samples.empty()) {
            add("gaussian", CheckStatus::Flag,
                "no resolved samples (grid too coarse for the time window)");
        } else {
            add("gaussian",
                std::isfinite(rep.sup_ratio) ? CheckStatus::Pass : CheckStatus::Fail,
                "sup_ratio = " + format_double(rep.sup_ratio));
        }

        const double r = std::sqrt(0.9 * (cfg.T - cfg.t_stop));
        try {
            auto mv = mean_value_check(hist, G, r);
            const auto mp = out / "mean_value.json";
            save_json(mp.string(), to_json(mv, hist.grid().n));
            record_file(mp);
            add("mean-value", CheckStatus::Pass, "r = " + format_double(r));
        } catch (const std::domain_error& e) {
            add("mean-value", CheckStatus::Fail, e.what());
        }
    }
};

}  // namespace

RunManifest run_experiment(const ExperimentConfig& cfg) {
    const auto t_start = std::chrono::steady_clock::now();
    RunManifest man;
    man.version = kVersion;
    man.config_echo = dump_config(cfg);
    std::filesystem::create_directories(cfg.out_dir);
    Session s{cfg, man, cfg.out_dir};

    FlowHistory hist;
    try {
        hist = run(cfg.flow);
    } catch (const BlowUpError& e) {
        s.add("flow", CheckStatus::Fail, e.what());
    }

    if (!hist.states.empty()) {
        const auto kind = cfg.kind;
        if (kind == ExperimentKind::Flow) {
            s.suite_flow(hist);
        } else if (kind == ExperimentKind::Kernel) {
            auto G = s.make_kernel(hist);
            s.suite_kernel(hist, G);
        } else if (kind == ExperimentKind::Entropy) {
            s.suite_entropy(hist);
        } else if (kind == ExperimentKind::Sobolev) {
            s.suite_sobolev(hist);
        } else if (kind == ExperimentKind::Gaussian) {
            auto G = s.make_kernel(hist);
            s.suite_gaussian(hist, G);
        } else {  // verify-all
            s.suite_flow(hist);
            auto G = s.make_kernel(hist);
            s.suite_kernel(hist, G);
            s.suite_entropy(hist);
            s.suite_sobolev(hist);
            s.suite_gaussian(hist, G);
        }
    }

    man.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

    nlohmann::json doc;
    doc["version"] = man.version;
    doc["kind"] = kind_name(cfg.kind);
    doc["config"] = man.config_echo;
    doc["wall_seconds"] = man.wall_seconds;
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& c : man.checks)
        checks.push_back({{"name", c.name},
                          {"status", c.status == CheckStatus::Pass   ? "pass"
                                     : c.status == CheckStatus::Flag ? "flag"
                                                                     : "fail"},
                          {"detail", c.detail}});
    doc["checks"] = checks;
    nlohmann::json files = nlohmann::json::array();
    for (const auto& [path, hash] : man.files) files.push_back({{"path", path}, {"hash", hash}});
    doc["files"] = files;
    doc["exit_code"] = man.exit_code();
    save_json((std::filesystem::path(cfg.out_dir) / "manifest.json").string(), doc);
    return man;
}

}  // namespace rhflow
