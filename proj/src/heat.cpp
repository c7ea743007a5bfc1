#include "rhflow/heat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace rhflow {

size_t HeatSolution::nearest(double t) const {
    size_t best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < times.size(); ++i) {
        const double d = std::abs(times[i] - t);
        if (d < bd) { bd = d; best = i; }
    }
    return best;
}

namespace {

// Divergence-form Laplacian on the interior nodes 1..n-1:
//   Lap u_i = lo_i u_{i-1} + di_i u_i + up_i u_{i+1},
//   Lap u_i = [w_{i+1/2}(u_{i+1}-u_i) - w_{i-1/2}(u_i-u_{i-1})] / (a_i f_i^2 h^2),
// with face conductivities w = f^2/a built from linearly interpolated f and a
// (f vanishes linearly at the poles, so this is uniformly accurate near them).
// The pole-side faces at 1/2 and n-1/2 carry no flux: the interior fluxes then
// telescope exactly against the nodal measure 4 pi a f^2 h (whose pole weights
// vanish), so the discrete d/dt of the mass is identically zero for pure
// diffusion and mass conservation of the conjugate solution holds up to the
// reaction/measure splitting error.
struct TriOperator {
    std::vector<double> lo, di, up;  // size n-1, index 0 <-> node 1
};

TriOperator build_laplacian(const MetricState& m) {
    const int n = m.grid.n;
    const double h = m.grid.h;
    const auto w_face = [&](int i) {  // f^2/a at the i+1/2 face
        const auto k = static_cast<size_t>(i);
        const double fm = 0.5 * (m.f[k] + m.f[k + 1]);
        const double am = 0.5 * (m.a[k] + m.a[k + 1]);
        return fm * fm / am;
    };
    TriOperator op;
    const auto sz = static_cast<size_t>(n - 1);
    op.lo.assign(sz, 0.0);
    op.di.assign(sz, 0.0);
    op.up.assign(sz, 0.0);
    for (int i = 1; i < n; ++i) {
        const auto k = static_cast<size_t>(i - 1);
        const auto j = static_cast<size_t>(i);
        const double vol = m.a[j] * m.f[j] * m.f[j] * h * h;
        const double wm = i > 1 ? w_face(i - 1) / vol : 0.0;
        const double wp = i < n - 1 ? w_face(i) / vol : 0.0;
        op.lo[k] = wm;
        op.up[k] = wp;
        op.di[k] = -(wm + wp);
    }
    return op;
}

// Thomas elimination for (diag, lower, upper) acting on interior unknowns.
void solve_tridiag(std::vector<double>& dl, std::vector<double>& dd, std::vector<double>& du,
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

enum class Equation { Heat, Conjugate };

// Shared implicit-Euler marcher in either time direction; storage is by
// increasing flow time. The conjugate equation is split per step into the
// implicit diffusion solve and an exact exp(-dtau S) reaction factor with S at
// the midpoint time: the factor cancels the measure production to second
// order in the step, and on frozen metrics with constant S the solution
// factorizes exactly into heat-semigroup times e^{-S tau}.
HeatSolution march(const FlowHistory& hist, const ScalarField& start, double t_from, double t_to,
                   Equation eq, const HeatOptions& opt,
                   const std::vector<double>* S_override = nullptr) {
    if (start.parity != Parity::Even)
        throw std::domain_error("heat solver: data must be even at the poles");
    const Grid& g = hist.grid();
    if (!(start.grid == g)) throw std::domain_error("heat solver: grid mismatch");
    const double span = std::abs(t_to - t_from);
    if (!(span > 0.0)) throw std::domain_error("heat solver: empty time interval");
    const double sgn = t_to > t_from ? 1.0 : -1.0;
    double dt = opt.dt > 0.0 ? opt.dt : 0.2 * g.h * g.h;
    const long nsteps = std::max<long>(1, static_cast<long>(std::ceil(span / dt - 1e-12)));
    dt = span / static_cast<double>(nsteps);

    HeatSolution sol;
    sol.direction = eq == Equation::Heat && sgn > 0 ? HeatDirection::Forward
                                                    : HeatDirection::ConjugateBackward;
    sol.dt = dt;

    const int n = g.n;
    const auto isz = static_cast<size_t>(n - 1);
    std::vector<double> u(isz);
    for (int i = 1; i < n; ++i) u[static_cast<size_t>(i - 1)] = start[i];

    const double u0min = *std::min_element(start.v.begin(), start.v.end());
    const bool want_nonneg = u0min >= 0.0;
    const double floor_tol = -1e-12 * (1.0 + *std::max_element(start.v.begin(), start.v.end()));

    auto store = [&](double t, const std::vector<double>& uu) {
        ScalarField fld(g, Parity::Even);
        for (int i = 1; i < n; ++i) fld[i] = uu[static_cast<size_t>(i - 1)];
        fill_poles_even(g, fld.v);
        sol.times.push_back(t);
        sol.mass.push_back(integrate(metric_at(hist, t), fld));
        sol.fields.push_back(std::move(fld));
    };
    store(t_from, u);

    std::vector<double> dl(isz), dd(isz), du(isz), rhs(isz);
    for (long j = 0; j < nsteps; ++j) {
        const double t_next = j + 1 == nsteps ? t_to : t_from + sgn * dt * static_cast<double>(j + 1);
        const MetricState m = metric_at(hist, t_next);
        const TriOperator lap = build_laplacian(m);
        for (size_t k = 0; k < isz; ++k) {
            dl[k] = -dt * lap.lo[k];
            du[k] = -dt * lap.up[k];
            dd[k] = 1.0 - dt * lap.di[k];
            rhs[k] = u[k];
        }
        solve_tridiag(dl, dd, du, rhs);
        u = rhs;
        if (eq == Equation::Conjugate) {
            const double t_cur = t_from + sgn * dt * static_cast<double>(j);
            const double t_mid = 0.5 * (t_cur + t_next);
            std::vector<double> S;
            if (S_override) {
                S = *S_override;
            } else {
                const MetricState mm = metric_at(hist, t_mid);
                S = curvature(mm).S;
            }
            for (size_t k = 0; k < isz; ++k) u[k] *= std::exp(-dt * S[k + 1]);
        }
        for (size_t k = 0; k < isz; ++k)
            if (!std::isfinite(u[k]))
                throw std::runtime_error("heat solver: non-finite value at t = " + std::to_string(t_next));
        if (want_nonneg) {
            for (size_t k = 0; k < isz; ++k)
                if (u[k] < floor_tol)
                    throw std::runtime_error("heat solver: positivity lost at t = " + std::to_string(t_next));
        }
        if ((j + 1) % opt.store_stride == 0 || j + 1 == nsteps) store(t_next, u);
    }

    if (sgn < 0) {  // store by increasing flow time
        std::reverse(sol.times.begin(), sol.times.end());
        std::reverse(sol.fields.begin(), sol.fields.end());
        std::reverse(sol.mass.begin(), sol.mass.end());
    }
    return sol;
}

}  // namespace

HeatSolution solve_forward(const FlowHistory& hist, const ScalarField& u0, double t0, double t1,
                           const HeatOptions& opt) {
    if (!(t0 < t1)) throw std::domain_error("solve_forward: need t0 < t1");
    return march(hist, u0, t0, t1, Equation::Heat, opt);
}

HeatSolution solve_conjugate(const FlowHistory& hist, const ScalarField& uT, double T,
                             double t_stop, const HeatOptions& opt,
                             const std::vector<double>* S_override) {
    if (!(t_stop < T)) throw std::domain_error("solve_conjugate: need t_stop < T");
    for (double v : uT.v)
        if (v < 0.0) throw std::domain_error("solve_conjugate: terminal data must be nonnegative");
    auto sol = march(hist, uT, T, t_stop, Equation::Conjugate, opt, S_override);
    sol.direction = HeatDirection::ConjugateBackward;
    return sol;
}

ScalarField delta_approx(const MetricState& m, double width) {
    if (!(width > 0.0)) throw std::domain_error("delta_approx: width must be positive");
    auto d = radial_distance_profile(m);
    ScalarField u(m.grid, Parity::Even);
    for (int i = 0; i <= m.grid.n; ++i) {
        const double s = d[static_cast<size_t>(i)];
        u[i] = s <= 6.0 * width ? std::exp(-0.5 * s * s / (width * width)) : 0.0;
    }
    const double mass = integrate(m, u);
    if (!(mass > 0.0)) throw std::domain_error("delta_approx: width below grid resolution");
    for (double& v : u.v) v /= mass;
    return u;
}

HeatSolution fundamental_solution(const FlowHistory& hist, double T, double t_stop, double width,
                                  const HeatOptions& opt) {
    const MetricState mT = metric_at(hist, T);
    double amax = 0.0;
    for (double a : mT.a) amax = std::max(amax, a);
    if (width < 2.0 * mT.grid.h * amax)
        throw std::domain_error("fundamental_solution: width below resolvability (need >= 2 h max a)");
    auto sol = solve_conjugate(hist, delta_approx(mT, width), T, t_stop, opt);
    sol.delta_width = width;
    return sol;
}

double static_kernel_oracle(double r, double d, double tau) {
    if (!(r > 0.0)) throw std::domain_error("static_kernel_oracle: radius must be positive");
    if (!(tau > 0.0)) throw std::domain_error("static_kernel_oracle: tau must be positive");
    if (d < 0.0 || d > std::numbers::pi * r + 1e-12)
        throw std::domain_error("static_kernel_oracle: distance outside [0, pi r]");
    const double theta = std::min(d / r, std::numbers::pi);
    const double c = std::cos(theta);
    // Chebyshev recurrence U_k(cos theta) = sin((k+1)theta)/sin(theta),
    // exact at the endpoints.
    double ukm = 1.0;        // U_0
    double uk = 2.0 * c;     // U_1
    double sum = 1.0;        // k = 0 term weight (k+1) e^0 U_0 = 1
    const double lam = 1.0 / (r * r);
    for (int k = 1; k < 4000; ++k) {
        const double decay = std::exp(-static_cast<double>(k) * (k + 2.0) * tau * lam);
        const double kk = k + 1.0;
        sum += kk * decay * uk;
        if (kk * kk * decay < 1e-18) break;
        const double un = 2.0 * c * uk - ukm;
        ukm = uk;
        uk = un;
    }
    return sum / (2.0 * std::numbers::pi * std::numbers::pi * r * r * r);
}

ScalarField static_propagate_oracle(double r, const MetricState& m, const ScalarField& u0,
                                    double tau) {
    if (!(tau >= 0.0)) throw std::domain_error("static_propagate_oracle: tau must be nonnegative");
    const int n = m.grid.n;
    const double norm2 = 2.0 * std::numbers::pi * std::numbers::pi * r * r * r;  // ||Z_k||^2
    const int kmax = std::min(n - 1, 600);
    // zonal harmonics at the nodes, U_k(cos x)
    std::vector<double> ukm(static_cast<size_t>(n + 1), 1.0), uk(static_cast<size_t>(n + 1));
    for (int i = 0; i <= n; ++i) uk[static_cast<size_t>(i)] = 2.0 * std::cos(m.grid.x(i));
    ScalarField out(m.grid, Parity::Even);
    ScalarField zk(m.grid, Parity::Even);
    for (int k = 0; k <= kmax; ++k) {
        if (k == 0) {
            std::fill(zk.v.begin(), zk.v.end(), 1.0);
        } else if (k == 1) {
            zk.v = uk;
        } else {
            for (size_t j = 0; j < zk.v.size(); ++j) {
                const double un = 2.0 * std::cos(m.grid.x(static_cast<int>(j))) * uk[j] - ukm[j];
                ukm[j] = uk[j];
                uk[j] = un;
            }
            zk.v = uk;
        }
        ScalarField prod(m.grid, Parity::Even);
        for (size_t j = 0; j < prod.v.size(); ++j) prod.v[j] = u0.v[j] * zk.v[j];
        const double coef = integrate(m, prod) / norm2;
        const double decay = std::exp(-static_cast<double>(k) * (k + 2.0) * tau / (r * r));
        if (std::abs(coef) * decay * (k + 1.0) < 1e-18 && k > 8) break;
        for (size_t j = 0; j < out.v.size(); ++j) out.v[j] += coef * decay * zk.v[j];
    }
    return out;
}

double adjoint_residual(const FlowHistory& hist, const HeatSolution& G, double t_fixed) {
    if (!(G.delta_width > 0.0))
        throw std::domain_error("adjoint_residual: G must come from fundamental_solution");
    const double T = G.times.back();
    if (!(t_fixed < T)) throw std::domain_error("adjoint_residual: t_fixed must precede T");
    // The adjoint property makes G(x, t_fixed; z, tau) a forward heat solution
    // in (z, tau); reconstruct it from the same mollified delta and measure the
    // forward-operator residual on the stored slices.
    HeatOptions opt;
    opt.dt = G.dt;
    opt.store_stride = 4;
    const MetricState m0 = metric_at(hist, t_fixed);
    auto dual = solve_forward(hist, delta_approx(m0, G.delta_width), t_fixed, T, opt);
    if (dual.size() < 3)
        throw std::domain_error("adjoint_residual: insufficient stored times for differencing");
    double num = 0.0, den = 0.0;
    for (size_t j = 1; j + 1 < dual.size(); ++j) {
        const MetricState m = metric_at(hist, dual.times[j]);
        auto lap = laplacian(m, dual.fields[j]);
        const double dt2 = dual.times[j + 1] - dual.times[j - 1];
        for (int i = 1; i < m.grid.n; ++i) {
            const auto k = static_cast<size_t>(i);
            const double dudt = (dual.fields[j + 1][i] - dual.fields[j - 1][i]) / dt2;
            const double res = lap[i] - dudt;
            const double w = m.a[k] * m.f[k] * m.f[k];
            num += w * res * res;
            den += w;
        }
    }
    return std::sqrt(num / den);
}

HStarResidual hstar_residual(const FlowHistory& hist, const HeatSolution& u, double t) {
    const size_t k = u.nearest(t);
    if (k == 0 || k + 1 >= u.size())
        throw std::domain_error("hstar_residual: t too close to the stored endpoints");
    const MetricState m = metric_at(hist, u.times[k]);
    auto cur = curvature(m);
    const double dt2 = u.times[k + 1] - u.times[k - 1];
    const ScalarField& uc = u.fields[k];
    auto lap_u = laplacian(m, uc);
    auto Du = arclength_deriv(m, uc.v, Parity::Even);

    constexpr double kFloor = 1e-30;
    ScalarField w0(m.grid, Parity::Even), w1(m.grid, Parity::Even), w2(m.grid, Parity::Even);
    for (int i = 0; i <= m.grid.n; ++i) {
        const auto ui0 = u.fields[k - 1][i];
        const auto ui1 = uc[i];
        const auto ui2 = u.fields[k + 1][i];
        w0[i] = ui0 > kFloor ? ui0 * std::log(ui0) : 0.0;
        w1[i] = ui1 > kFloor ? ui1 * std::log(ui1) : 0.0;
        w2[i] = ui2 > kFloor ? ui2 * std::log(ui2) : 0.0;
    }
    auto lap_w = laplacian(m, w1);

    HStarResidual out;
    double num_s = 0.0, num_i = 0.0, den = 0.0;
    for (int i = 1; i < m.grid.n; ++i) {
        const auto j = static_cast<size_t>(i);
        const double wgt = m.a[j] * m.f[j] * m.f[j];
        const double dudt = (u.fields[k + 1][i] - u.fields[k - 1][i]) / dt2;
        const double hs = lap_u[i] - cur.S[j] * uc[i] + dudt;
        num_s += wgt * hs * hs;
        den += wgt;
        if (uc[i] > kFloor) {
            const double dwdt = (w2[i] - w0[i]) / dt2;
            const double lhs = lap_w[i] - cur.S[j] * w1[i] + dwdt;
            const double rhs = Du[j] * Du[j] / uc[i] + cur.S[j] * uc[i];
            num_i += wgt * (lhs - rhs) * (lhs - rhs);
        } else {
            ++out.excluded_nodes;
        }
    }
    out.solver_residual = std::sqrt(num_s / den);
    out.identity_defect = std::sqrt(num_i / den);
    return out;
}

double evolution_identity_residual(const FlowHistory& hist, double t) {
    // nearest snapshot with both neighbors
    size_t k = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < hist.size(); ++i) {
        const double d = std::abs(hist.states[i].t - t);
        if (d < bd) { bd = d; k = i; }
    }
    if (k == 0 || k + 1 >= hist.size())
        throw std::domain_error("evolution_identity_residual: t too close to the history endpoints");
    const MetricState& m = hist.states[k];
    auto c0 = curvature(hist.states[k - 1]);
    auto c1 = curvature(m);
    auto c2 = curvature(hist.states[k + 1]);
    const double dt2 = hist.states[k + 1].t - hist.states[k - 1].t;

    ScalarField Sf(m.grid, Parity::Even);
    Sf.v = c1.S;
    auto lap_S = laplacian(m, Sf);
    ScalarField phi(m.grid, Parity::Even);
    phi.v = m.phi;
    auto lap_phi = laplacian(m, phi);

    double worst = 0.0;
    for (int i = 0; i <= m.grid.n; ++i) {
        const auto j = static_cast<size_t>(i);
        const double dSdt = (c2.S[j] - c0.S[j]) / dt2;
        const double sy2 = c1.s_rad[j] * c1.s_rad[j] + 2.0 * c1.s_sph[j] * c1.s_sph[j];
        const double rhs = lap_S[i] + 2.0 * sy2 + 4.0 * lap_phi[i] * lap_phi[i];
        worst = std::max(worst, std::abs(dSdt - rhs));
    }
    return worst;
}

}  // namespace rhflow
