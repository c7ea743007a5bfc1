#include "rhflow/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace rhflow {

namespace {

constexpr double kFloor = 1e-30;  // positivity floor for entropy integrands

// Trapezoid quadrature of a nodewise integrand against dmu = 4 pi a f^2 dx.
double integrate_nodal(const MetricState& m, const std::vector<double>& integrand) {
    const int n = m.grid.n;
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
        const auto k = static_cast<size_t>(i);
        const double c = (i == 0 || i == n) ? 0.5 : 1.0;
        acc += c * m.a[k] * m.f[k] * m.f[k] * integrand[k];
    }
    return 4.0 * std::numbers::pi * m.grid.h * acc;
}

void require_nonnegative(const ScalarField& u, const char* who) {
    for (double v : u.v)
        if (!(v >= 0.0)) throw std::domain_error(std::string(who) + ": u must be nonnegative");
}

// Derivative data of the potential f = -ln u + const, computed from the
// floored logarithm so underflowed tails stay finite; those nodes carry zero
// measure weight in the entropy integrals anyway.
struct PotentialDerivatives {
    std::vector<double> grad;      // D f_pot  (odd)
    std::vector<double> hess_rad;  // D^2 f_pot
    std::vector<double> hess_sph;  // (Df/f) D f_pot, poles filled evenly
};

PotentialDerivatives potential_derivatives(const MetricState& m, const ScalarField& u) {
    const auto sz = static_cast<size_t>(m.grid.nodes());
    std::vector<double> lnu(sz);
    for (size_t k = 0; k < sz; ++k) lnu[k] = std::log(std::max(u.v[k], kFloor));
    PotentialDerivatives pd;
    auto dlnu = arclength_deriv(m, lnu, Parity::Even);
    auto d2lnu = arclength_deriv2(m, lnu, Parity::Even);
    pd.grad.resize(sz);
    pd.hess_rad.resize(sz);
    pd.hess_sph.resize(sz);
    auto df = arclength_deriv(m, m.f, Parity::Odd);
    for (size_t k = 0; k < sz; ++k) {
        pd.grad[k] = -dlnu[k];
        pd.hess_rad[k] = -d2lnu[k];
        pd.hess_sph[k] = k > 0 && k + 1 < sz ? df[k] / m.f[k] * pd.grad[k] : 0.0;
    }
    fill_poles_even(m.grid, pd.hess_sph);
    return pd;
}

}  // namespace

ScalarField potential_f(const MetricState& m, const ScalarField& u, double tau) {
    if (!(tau > 0.0)) throw std::domain_error("potential_f: tau must be positive");
    ScalarField f(m.grid, Parity::Even);
    const double shift = 1.5 * std::log(4.0 * std::numbers::pi * tau);
    for (size_t k = 0; k < u.v.size(); ++k) {
        if (!(u.v[k] > 0.0)) throw std::domain_error("potential_f: u must be positive");
        f.v[k] = -std::log(u.v[k]) - shift;
    }
    return f;
}

double entropy_F(const MetricState& m, const ScalarField& u,
                 const std::vector<double>* S_override) {
    require_nonnegative(u, "entropy_F");
    auto cur = curvature(m);
    const std::vector<double>& S = S_override ? *S_override : cur.S;
    auto du = arclength_deriv(m, u.v, Parity::Even);
    std::vector<double> integrand(u.v.size(), 0.0);
    for (size_t k = 0; k < u.v.size(); ++k)
        if (u.v[k] > kFloor) integrand[k] = S[k] * u.v[k] + du[k] * du[k] / u.v[k];
    return integrate_nodal(m, integrand);
}

double entropy_W(const MetricState& m, const ScalarField& u, double tau) {
    if (!(tau > 0.0)) throw std::domain_error("entropy_W: tau must be positive");
    require_nonnegative(u, "entropy_W");
    const double F = entropy_F(m, u);
    const double shift = 1.5 * std::log(4.0 * std::numbers::pi * tau) + 3.0;
    std::vector<double> integrand(u.v.size(), 0.0);
    for (size_t k = 0; k < u.v.size(); ++k)
        if (u.v[k] > kFloor) integrand[k] = -u.v[k] * std::log(u.v[k]) - shift * u.v[k];
    return tau * F + integrate_nodal(m, integrand);
}

double entropy_W_gen(const MetricState& m, const ScalarField& u, double tau, double a_param) {
    if (!(tau > 0.0)) throw std::domain_error("entropy_W_gen: tau must be positive");
    if (a_param < 0.0) throw std::domain_error("entropy_W_gen: a_param must be nonnegative");
    require_nonnegative(u, "entropy_W_gen");
    const double F = entropy_F(m, u);
    const double shift = 1.5 * std::log(4.0 * std::numbers::pi * tau) + 3.0;
    std::vector<double> integrand(u.v.size(), 0.0);
    for (size_t k = 0; k < u.v.size(); ++k)
        if (u.v[k] > kFloor) integrand[k] = -u.v[k] * std::log(u.v[k]) - shift * u.v[k];
    const double coef = a_param * a_param / (2.0 * std::numbers::pi);
    return coef * tau * F + integrate_nodal(m, integrand);
}

double production_F(const MetricState& m, const ScalarField& u) {
    require_nonnegative(u, "production_F");
    auto cur = curvature(m);
    auto pd = potential_derivatives(m, u);
    ScalarField phi(m.grid, Parity::Even);
    phi.v = m.phi;
    auto lap_phi = laplacian(m, phi);
    std::vector<double> integrand(u.v.size(), 0.0);
    for (size_t k = 0; k < u.v.size(); ++k) {
        if (u.v[k] <= kFloor) continue;
        const double tr = cur.s_rad[k] + pd.hess_rad[k];
        const double ts = cur.s_sph[k] + pd.hess_sph[k];
        const double tp = lap_phi.v[k] - cur.dphi[k] * pd.grad[k];
        integrand[k] = 2.0 * (tr * tr + 2.0 * ts * ts + 2.0 * tp * tp) * u.v[k];
    }
    return integrate_nodal(m, integrand);
}

double production_W(const MetricState& m, const ScalarField& u, double tau) {
    if (!(tau > 0.0)) throw std::domain_error("production_W: tau must be positive");
    require_nonnegative(u, "production_W");
    auto cur = curvature(m);
    auto pd = potential_derivatives(m, u);
    ScalarField phi(m.grid, Parity::Even);
    phi.v = m.phi;
    auto lap_phi = laplacian(m, phi);
    const double c = 1.0 / (2.0 * tau);
    std::vector<double> integrand(u.v.size(), 0.0);
    for (size_t k = 0; k < u.v.size(); ++k) {
        if (u.v[k] <= kFloor) continue;
        const double tr = cur.s_rad[k] + pd.hess_rad[k] - c;
        const double ts = cur.s_sph[k] + pd.hess_sph[k] - c;
        const double tp = lap_phi.v[k] - cur.dphi[k] * pd.grad[k];
        integrand[k] = (2.0 * tau * (tr * tr + 2.0 * ts * ts) + 4.0 * tau * tp * tp) * u.v[k];
    }
    return integrate_nodal(m, integrand);
}

namespace {

// Tridiagonal interior representation of -4 Lap + S (divergence form, pole
// unknowns eliminated by even extrapolation), mirroring the heat solver.
struct InteriorOperator {
    std::vector<double> lo, di, up;  // index 0 <-> node 1
    std::vector<double> weight;      // measure weights a f^2 (interior)
};

InteriorOperator build_operator(const MetricState& m, const std::vector<double>& S) {
    const int n = m.grid.n;
    const double h = m.grid.h;
    const auto w_half = [&](int i) {
        const auto k = static_cast<size_t>(i);
        return 0.5 * (m.f[k] * m.f[k] / m.a[k] +
                      m.f[k + 1] * m.f[k + 1] / m.a[k + 1]);
    };
    InteriorOperator op;
    const auto sz = static_cast<size_t>(n - 1);
    op.lo.assign(sz, 0.0);
    op.di.assign(sz, 0.0);
    op.up.assign(sz, 0.0);
    op.weight.assign(sz, 0.0);
    for (int i = 1; i < n; ++i) {
        const auto k = static_cast<size_t>(i);
        const double vol = m.a[k] * m.f[k] * m.f[k] * h * h;
        op.weight[k - 1] = m.a[k] * m.f[k] * m.f[k];
        double lo = 0.0, up = 0.0;
        if (i == 1) {
            up = (w_half(1) - w_half(0) / 3.0) / vol;
        } else if (i == n - 1) {
            lo = (w_half(n - 2) - w_half(n - 1) / 3.0) / vol;
        } else {
            lo = w_half(i - 1) / vol;
            up = w_half(i) / vol;
        }
        op.lo[k - 1] = -4.0 * lo;
        op.up[k - 1] = -4.0 * up;
        op.di[k - 1] = 4.0 * (lo + up) + S[k];
    }
    return op;
}

std::vector<double> apply_operator(const InteriorOperator& op, const std::vector<double>& v) {
    const size_t sz = op.di.size();
    std::vector<double> out(sz);
    for (size_t k = 0; k < sz; ++k) {
        double s = op.di[k] * v[k];
        if (k > 0) s += op.lo[k] * v[k - 1];
        if (k + 1 < sz) s += op.up[k] * v[k + 1];
        out[k] = s;
    }
    return out;
}

void thomas(std::vector<double> dl, std::vector<double> dd, std::vector<double> du,
            std::vector<double>& rhs) {
    const size_t sz = dd.size();
    for (size_t k = 1; k < sz; ++k) {
        const double w = dl[k] / dd[k - 1];
        dd[k] -= w * du[k - 1];
        rhs[k] -= w * rhs[k - 1];
    }
    rhs[sz - 1] /= dd[sz - 1];
    for (size_t k = sz - 1; k-- > 0;) rhs[k] = (rhs[k] - du[k] * rhs[k + 1]) / dd[k];
}

}  // namespace

EigenResult lambda0(const MetricState& m, const std::vector<double>* S_override) {
    auto cur = curvature(m);
    const std::vector<double>& S = S_override ? *S_override : cur.S;
    const InteriorOperator op = build_operator(m, S);
    const size_t sz = op.di.size();

    // shift strictly below the spectrum: lambda0 >= min S for this operator
    const double shift = *std::min_element(S.begin(), S.end()) - 1.0;
    std::vector<double> dd(sz);
    for (size_t k = 0; k < sz; ++k) dd[k] = op.di[k] - shift;

    const auto mdot = [&](const std::vector<double>& x, const std::vector<double>& y) {
        double s = 0.0;
        for (size_t k = 0; k < sz; ++k) s += op.weight[k] * x[k] * y[k];
        return s;
    };

    std::vector<double> v(sz, 1.0);
    {
        const double nrm = std::sqrt(mdot(v, v));
        for (double& x : v) x /= nrm;
    }
    constexpr double kTolEig = 1e-8;
    constexpr int kMaxIter = 500;
    double lambda = 0.0, residual = std::numeric_limits<double>::infinity();
    int it = 0;
    for (; it < kMaxIter; ++it) {
        std::vector<double> w = v;
        thomas(op.lo, dd, op.up, w);
        const double nrm = std::sqrt(mdot(w, w));
        for (double& x : w) x /= nrm;
        v = w;
        auto Av = apply_operator(op, v);
        lambda = mdot(v, Av);
        double r2 = 0.0;
        for (size_t k = 0; k < sz; ++k) {
            const double r = Av[k] - lambda * v[k];
            r2 += op.weight[k] * r * r;
        }
        residual = std::sqrt(r2);
        if (residual <= kTolEig * std::max(1.0, std::abs(lambda))) break;
    }
    if (it == kMaxIter)
        throw std::runtime_error("lambda0: inverse iteration failed to converge in 500 steps");

    EigenResult out;
    out.lambda0 = lambda;
    out.residual = residual;
    out.iterations = it + 1;
    out.eigenfunction = ScalarField(m.grid, Parity::Even);
    for (size_t k = 0; k < sz; ++k) out.eigenfunction[static_cast<int>(k) + 1] = v[k];
    fill_poles_even(m.grid, out.eigenfunction.v);
    double mean = 0.0;
    for (double x : out.eigenfunction.v) mean += x;
    if (mean < 0.0)
        for (double& x : out.eigenfunction.v) x = -x;
    const double l2 = lp_norm(m, out.eigenfunction, 2.0);
    for (double& x : out.eigenfunction.v) x /= l2;
    return out;
}

EntropyReport monotonicity_trace(const FlowHistory& hist, const HeatSolution& G,
                                 double tau_offset, const std::vector<double>& a_params) {
    const size_t K = G.size();
    if (K < 3) throw std::domain_error("monotonicity_trace: need at least three stored slices");
    const double T = G.times.back();

    EntropyReport rep;
    rep.a_params = a_params;
    rep.times = G.times;
    rep.tau.resize(K);
    rep.F.resize(K);
    rep.W.resize(K);
    rep.prodF.resize(K);
    rep.prodW.resize(K);
    rep.Wgen.assign(a_params.size(), std::vector<double>(K));
    rep.WgenRate.assign(a_params.size(), std::vector<double>(K, std::numeric_limits<double>::quiet_NaN()));
    rep.WgenRhs.assign(a_params.size(), std::vector<double>(K));

    for (size_t k = 0; k < K; ++k) {
        const double tau = tau_offset + (T - G.times[k]);
        if (!(tau > 0.0)) throw std::domain_error("monotonicity_trace: tau <= 0 encountered");
        rep.tau[k] = tau;
        const MetricState m = metric_at(hist, G.times[k]);
        ScalarField u = G.fields[k];
        const double mass = G.mass[k];
        if (!(mass > 0.0)) throw std::domain_error("monotonicity_trace: slice with nonpositive mass");
        for (double& x : u.v) x /= mass;
        int below = 0;
        for (double x : u.v)
            if (x <= kFloor) ++below;
        rep.max_excluded_nodes = std::max(rep.max_excluded_nodes, below);

        rep.F[k] = entropy_F(m, u);
        rep.W[k] = entropy_W(m, u, tau);
        rep.prodF[k] = production_F(m, u);
        rep.prodW[k] = production_W(m, u, tau);
        for (size_t a = 0; a < a_params.size(); ++a) {
            rep.Wgen[a][k] = entropy_W_gen(m, u, tau, a_params[a]);
            rep.WgenRhs[a][k] =
                a_params[a] * a_params[a] / (2.0 * std::numbers::pi) * rep.prodW[k];
        }
    }

    const double nan = std::numeric_limits<double>::quiet_NaN();
    rep.dFdt.assign(K, nan);
    rep.dWdt.assign(K, nan);
    rep.resF.assign(K, nan);
    rep.resW.assign(K, nan);
    for (size_t k = 1; k + 1 < K; ++k) {
        const double dt2 = G.times[k + 1] - G.times[k - 1];
        rep.dFdt[k] = (rep.F[k + 1] - rep.F[k - 1]) / dt2;
        rep.dWdt[k] = (rep.W[k + 1] - rep.W[k - 1]) / dt2;
        rep.resF[k] = std::abs(rep.dFdt[k] - rep.prodF[k]);
        rep.resW[k] = std::abs(rep.dWdt[k] - rep.prodW[k]);
        if (rep.dFdt[k] < -rep.tol_mono || rep.dWdt[k] < -rep.tol_mono) rep.flagged = true;
        for (size_t a = 0; a < a_params.size(); ++a) {
            rep.WgenRate[a][k] = (rep.Wgen[a][k + 1] - rep.Wgen[a][k - 1]) / dt2;
            if (rep.WgenRate[a][k] < -rep.tol_mono) rep.flagged = true;
        }
    }
    return rep;
}

}  // namespace rhflow
