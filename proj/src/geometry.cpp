#include "rhflow/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rhflow {

namespace {

// Parity-reflected access across both poles: index may lie in [-2, n+2].
inline double ghost(std::span<const double> v, int n, int i, Parity p) {
    double sign = 1.0;
    if (i < 0) {
        i = -i;
        if (p == Parity::Odd) sign = -1.0;
    } else if (i > n) {
        i = 2 * n - i;
        if (p == Parity::Odd) sign = -1.0;
    }
    return sign * v[static_cast<size_t>(i)];
}

// Sixth-order seven-point first derivative, normalized to be exact on sin/cos
// of the coordinate. Used inside the curvature evaluation: the sectional
// ratios divide derivative errors by f^2 ~ (x h)^2 near the poles, so the
// interior fourth-order stencils would leave an O(h^2) error there whose
// node-to-node profile is rough; two extra orders keep the pole-region
// curvature error at O(h^4).
std::vector<double> deriv6_x(const Grid& g, std::span<const double> v, Parity p) {
    const int n = g.n;
    const double h = g.h;
    const double denom =
        2.0 * (45.0 * std::sin(h) - 9.0 * std::sin(2.0 * h) + std::sin(3.0 * h));
    std::vector<double> out(static_cast<size_t>(n + 1));
    for (int i = 0; i <= n; ++i) {
        out[static_cast<size_t>(i)] =
            (45.0 * (ghost(v, n, i + 1, p) - ghost(v, n, i - 1, p)) -
             9.0 * (ghost(v, n, i + 2, p) - ghost(v, n, i - 2, p)) +
             (ghost(v, n, i + 3, p) - ghost(v, n, i - 3, p))) /
            denom;
    }
    return out;
}

// Sixth-order seven-point second derivative, sin/cos-normalized like deriv6_x.
std::vector<double> deriv6_xx(const Grid& g, std::span<const double> v, Parity p) {
    const int n = g.n;
    const double h = g.h;
    const double denom = 490.0 - 540.0 * std::cos(h) + 54.0 * std::cos(2.0 * h) -
                         4.0 * std::cos(3.0 * h);
    std::vector<double> out(static_cast<size_t>(n + 1));
    for (int i = 0; i <= n; ++i) {
        out[static_cast<size_t>(i)] =
            (270.0 * (ghost(v, n, i + 1, p) + ghost(v, n, i - 1, p)) -
             27.0 * (ghost(v, n, i + 2, p) + ghost(v, n, i - 2, p)) +
             2.0 * (ghost(v, n, i + 3, p) + ghost(v, n, i - 3, p)) -
             490.0 * ghost(v, n, i, p)) /
            denom;
    }
    return out;
}

}  // namespace

std::vector<double> deriv_x(const Grid& g, std::span<const double> v, Parity p) {
    const int n = g.n;
    const double h = g.h;
    // Normalization making the stencil exact on sin/cos of the coordinate.
    const double k1 = (8.0 * std::sin(h) - std::sin(2.0 * h)) / (6.0 * h);
    std::vector<double> out(static_cast<size_t>(n + 1));
    for (int i = 0; i <= n; ++i) {
        const double raw = (-ghost(v, n, i + 2, p) + 8.0 * ghost(v, n, i + 1, p) -
                            8.0 * ghost(v, n, i - 1, p) + ghost(v, n, i - 2, p)) /
                           (12.0 * h);
        out[static_cast<size_t>(i)] = raw / k1;
    }
    return out;
}

std::vector<double> deriv_xx(const Grid& g, std::span<const double> v, Parity p) {
    const int n = g.n;
    const double h = g.h;
    const double k2 = (30.0 - 32.0 * std::cos(h) + 2.0 * std::cos(2.0 * h)) / (12.0 * h * h);
    std::vector<double> out(static_cast<size_t>(n + 1));
    for (int i = 0; i <= n; ++i) {
        const double raw = (-ghost(v, n, i + 2, p) + 16.0 * ghost(v, n, i + 1, p) -
                            30.0 * ghost(v, n, i, p) + 16.0 * ghost(v, n, i - 1, p) -
                            ghost(v, n, i - 2, p)) /
                           (12.0 * h * h);
        out[static_cast<size_t>(i)] = raw / k2;
    }
    return out;
}

std::vector<double> arclength_deriv(const MetricState& m, std::span<const double> v, Parity p) {
    auto out = deriv_x(m.grid, v, p);
    for (int i = 0; i <= m.grid.n; ++i) out[static_cast<size_t>(i)] /= m.a[static_cast<size_t>(i)];
    return out;
}

std::vector<double> arclength_deriv2(const MetricState& m, std::span<const double> v, Parity p) {
    auto vx = deriv_x(m.grid, v, p);
    auto vxx = deriv_xx(m.grid, v, p);
    auto ax = deriv_x(m.grid, m.a, Parity::Even);
    std::vector<double> out(vx.size());
    for (int i = 0; i <= m.grid.n; ++i) {
        const auto k = static_cast<size_t>(i);
        out[k] = vxx[k] / (m.a[k] * m.a[k]) - vx[k] * ax[k] / (m.a[k] * m.a[k] * m.a[k]);
    }
    return out;
}

void fill_poles_even(const Grid& g, std::vector<double>& v) {
    const auto n = static_cast<size_t>(g.n);
    v[0] = (4.0 * v[1] - v[2]) / 3.0;
    v[n] = (4.0 * v[n - 1] - v[n - 2]) / 3.0;
}

void check_metric_invariants(const MetricState& m, double reg_tol) {
    const int n = m.grid.n;
    for (int i = 0; i <= n; ++i) {
        if (!(m.a[static_cast<size_t>(i)] > 0.0))
            throw std::domain_error("MetricState: non-positive lapse a at node " + std::to_string(i));
        if (i > 0 && i < n && !(m.f[static_cast<size_t>(i)] > 0.0))
            throw std::domain_error("MetricState: non-positive warp f at interior node " + std::to_string(i));
    }
    if (m.f[0] != 0.0 || m.f[static_cast<size_t>(n)] != 0.0)
        throw std::domain_error("MetricState: warp radius must vanish at the poles");
    const double h = m.grid.h;
    const double dfn = (-3.0 * m.f[0] + 4.0 * m.f[1] - m.f[2]) / (2.0 * h) / m.a[0];
    const double dfs = (3.0 * m.f[static_cast<size_t>(n)] - 4.0 * m.f[static_cast<size_t>(n - 1)] +
                        m.f[static_cast<size_t>(n - 2)]) /
                       (2.0 * h) / m.a[static_cast<size_t>(n)];
    if (std::abs(dfn - 1.0) > reg_tol)
        throw std::domain_error("MetricState: pole regularity violated at x=0, df/ds = " + std::to_string(dfn));
    if (std::abs(dfs + 1.0) > reg_tol)
        throw std::domain_error("MetricState: pole regularity violated at x=pi, df/ds = " + std::to_string(dfs));
    double phimax = 0.0;
    for (double p : m.phi) phimax = std::max(phimax, std::abs(p));
    const double dpn = (-3.0 * m.phi[0] + 4.0 * m.phi[1] - m.phi[2]) / (2.0 * h);
    const double dps = (3.0 * m.phi[static_cast<size_t>(n)] - 4.0 * m.phi[static_cast<size_t>(n - 1)] +
                        m.phi[static_cast<size_t>(n - 2)]) /
                       (2.0 * h);
    if (std::abs(dpn) > reg_tol * (1.0 + phimax) || std::abs(dps) > reg_tol * (1.0 + phimax))
        throw std::domain_error("MetricState: phi parity violated at a pole");
}

CurvatureFields curvature(const MetricState& m) {
    const int n = m.grid.n;
    for (int i = 0; i <= n; ++i) {
        if (!(m.a[static_cast<size_t>(i)] > 0.0))
            throw std::domain_error("curvature: non-positive lapse a at node " + std::to_string(i));
        if (i > 0 && i < n && !(m.f[static_cast<size_t>(i)] > 0.0))
            throw std::domain_error("curvature: non-positive warp f at interior node " + std::to_string(i));
    }
    // The pole values of the lapse are slaved to the warp by the regularity
    // constraint, which transmits node-scale warp noise into a(0), a(n) with a
    // 1/h gain. Curvature is evaluated with those two values replaced by the
    // smooth even continuation of the interior lapse (quadratic in x^2 through
    // nodes 1..3, O(h^6) on resolved profiles), so constraint noise at the
    // poles cannot feed back into the evolution.
    std::vector<double> ash(m.a.begin(), m.a.end());
    const auto un = static_cast<size_t>(n);
    ash[0] = even_pole_extension(ash[1], ash[2], ash[3]);
    ash[un] = even_pole_extension(ash[un - 1], ash[un - 2], ash[un - 3]);
    auto fx = deriv6_x(m.grid, m.f, Parity::Odd);
    auto fxx = deriv6_xx(m.grid, m.f, Parity::Odd);
    auto ax = deriv6_x(m.grid, ash, Parity::Even);
    auto px = deriv6_x(m.grid, m.phi, Parity::Even);
    const auto nsz = static_cast<size_t>(n + 1);
    std::vector<double> Df(nsz), D2f(nsz), Dphi(nsz);
    for (size_t k = 0; k < nsz; ++k) {
        const double a = ash[k];
        Df[k] = fx[k] / a;
        D2f[k] = fxx[k] / (a * a) - fx[k] * ax[k] / (a * a * a);
        Dphi[k] = px[k] / a;
    }

    CurvatureFields c;
    const auto sz = static_cast<size_t>(n + 1);
    c.ric_rad.resize(sz);
    c.ric_sph.resize(sz);
    c.R.resize(sz);
    c.dphi = Dphi;
    for (int i = 1; i < n; ++i) {
        const auto k = static_cast<size_t>(i);
        const double f = m.f[k];
        const double p = -D2f[k] / f;                          // -D^2 f / f
        const double q = (1.0 - Df[k] * Df[k]) / (f * f);      // (1 - (Df)^2) / f^2
        c.ric_rad[k] = 2.0 * p;
        c.ric_sph[k] = p + q;
        c.R[k] = 4.0 * p + 2.0 * q;
    }
    // The raw ratios divide by f ~ x h near the poles, so node-scale noise in
    // (a, f) is amplified by 1/h^2 at the pole-adjacent nodes. Curvature
    // components are smooth even functions of the polar coordinate, so the three
    // nodes nearest each pole are instead evaluated by quadratic extrapolation
    // in x^2 (resp. (pi - x)^2) through nodes 3..5; exact for constants and
    // O(h^6) for resolved even profiles.
    auto fill_pole_triples = [n](std::vector<double>& v) {
        // Lagrange weights at targets t = 0, 1, 4 for sample points y = 9, 16, 25
        // (y in units of h^2).
        static constexpr double W[3][3] = {
            {25.0 / 7.0, -25.0 / 7.0, 1.0},
            {45.0 / 14.0, -64.0 / 21.0, 5.0 / 6.0},
            {9.0 / 4.0, -5.0 / 3.0, 5.0 / 12.0},
        };
        for (int j = 0; j < 3; ++j) {
            v[static_cast<size_t>(j)] = W[j][0] * v[3] + W[j][1] * v[4] + W[j][2] * v[5];
            v[static_cast<size_t>(n - j)] = W[j][0] * v[static_cast<size_t>(n - 3)] +
                                            W[j][1] * v[static_cast<size_t>(n - 4)] +
                                            W[j][2] * v[static_cast<size_t>(n - 5)];
        }
    };
    fill_pole_triples(c.ric_rad);
    fill_pole_triples(c.ric_sph);
    fill_pole_triples(c.R);

    c.s_rad.resize(sz);
    c.s_sph = c.ric_sph;
    c.S.resize(sz);
    for (size_t k = 0; k < sz; ++k) {
        const double g2 = 2.0 * Dphi[k] * Dphi[k];
        c.s_rad[k] = c.ric_rad[k] - g2;
        c.S[k] = c.R[k] - g2;
    }
    return c;
}

ScalarField laplacian(const MetricState& m, const ScalarField& u) {
    if (u.parity != Parity::Even)
        throw std::domain_error("laplacian: field must be even at the poles");
    if (!(u.grid == m.grid)) throw std::domain_error("laplacian: grid mismatch");
    const int n = m.grid.n;
    auto Du = arclength_deriv(m, u.v, Parity::Even);
    auto D2u = arclength_deriv2(m, u.v, Parity::Even);
    auto Df = arclength_deriv(m, m.f, Parity::Odd);
    ScalarField out(m.grid, Parity::Even);
    for (int i = 1; i < n; ++i) {
        const auto k = static_cast<size_t>(i);
        out[i] = D2u[k] + 2.0 * (Df[k] / m.f[k]) * Du[k];
    }
    out[0] = 3.0 * D2u[0];
    out[n] = 3.0 * D2u[static_cast<size_t>(n)];
    return out;
}

namespace {
inline double measure_weight(const MetricState& m, int i) {
    const auto k = static_cast<size_t>(i);
    const double c = (i == 0 || i == m.grid.n) ? 0.5 : 1.0;
    return 4.0 * std::numbers::pi * m.a[k] * m.f[k] * m.f[k] * m.grid.h * c;
}
}  // namespace

double integrate(const MetricState& m, const ScalarField& u) {
    if (!(u.grid == m.grid)) throw std::domain_error("integrate: grid mismatch");
    double s = 0.0;
    for (int i = 0; i <= m.grid.n; ++i) s += measure_weight(m, i) * u[i];
    return s;
}

double volume(const MetricState& m) {
    double s = 0.0;
    for (int i = 0; i <= m.grid.n; ++i) s += measure_weight(m, i);
    return s;
}

double gradient_energy(const MetricState& m, const ScalarField& v) {
    if (v.parity != Parity::Even)
        throw std::domain_error("gradient_energy: field must be even at the poles");
    auto Dv = arclength_deriv(m, v.v, Parity::Even);
    double s = 0.0;
    for (int i = 0; i <= m.grid.n; ++i) {
        const auto k = static_cast<size_t>(i);
        s += measure_weight(m, i) * Dv[k] * Dv[k];
    }
    return s;
}

double lp_norm(const MetricState& m, const ScalarField& v, double p) {
    if (p < 1.0) throw std::domain_error("lp_norm: p must be >= 1");
    double s = 0.0;
    for (int i = 0; i <= m.grid.n; ++i) s += measure_weight(m, i) * std::pow(std::abs(v[i]), p);
    return std::pow(s, 1.0 / p);
}

double radial_distance(const MetricState& m, double x_coord) {
    if (x_coord < 0.0 || x_coord > std::numbers::pi + 1e-14)
        throw std::domain_error("radial_distance: coordinate outside [0, pi]");
    x_coord = std::min(x_coord, std::numbers::pi);
    const double h = m.grid.h;
    const int full = std::min(static_cast<int>(x_coord / h), m.grid.n);
    double d = 0.0;
    for (int i = 0; i < full; ++i)
        d += 0.5 * h * (m.a[static_cast<size_t>(i)] + m.a[static_cast<size_t>(i + 1)]);
    const double rem = x_coord - full * h;
    if (rem > 0.0 && full < m.grid.n) {
        const double a0 = m.a[static_cast<size_t>(full)];
        const double a1 = m.a[static_cast<size_t>(full + 1)];
        const double ax = a0 + (a1 - a0) * (rem / h);
        d += 0.5 * rem * (a0 + ax);
    }
    return d;
}

std::vector<double> radial_distance_profile(const MetricState& m) {
    std::vector<double> d(static_cast<size_t>(m.grid.n + 1), 0.0);
    for (int i = 1; i <= m.grid.n; ++i)
        d[static_cast<size_t>(i)] =
            d[static_cast<size_t>(i - 1)] +
            0.5 * m.grid.h * (m.a[static_cast<size_t>(i - 1)] + m.a[static_cast<size_t>(i)]);
    return d;
}

double ball_volume(const MetricState& m, double rho) {
    if (rho < 0.0) throw std::domain_error("ball_volume: negative radius");
    auto d = radial_distance_profile(m);
    const int n = m.grid.n;
    auto cell = [&](int i) {  // trapezoid volume of [x_i, x_{i+1}]
        const auto k = static_cast<size_t>(i);
        return 2.0 * std::numbers::pi * m.grid.h *
               (m.a[k] * m.f[k] * m.f[k] + m.a[k + 1] * m.f[k + 1] * m.f[k + 1]);
    };
    double vol = 0.0;
    for (int i = 0; i < n; ++i) {
        if (d[static_cast<size_t>(i + 1)] <= rho) {
            vol += cell(i);
            continue;
        }
        if (d[static_cast<size_t>(i)] >= rho) break;
        // partial cell: linear interpolation of the integrand in x
        const double frac =
            (rho - d[static_cast<size_t>(i)]) / (d[static_cast<size_t>(i + 1)] - d[static_cast<size_t>(i)]);
        const auto k = static_cast<size_t>(i);
        const double g0 = m.a[k] * m.f[k] * m.f[k];
        const double g1 = m.a[k + 1] * m.f[k + 1] * m.f[k + 1];
        const double gx = g0 + (g1 - g0) * frac;
        vol += 2.0 * std::numbers::pi * m.grid.h * frac * (g0 + gx);
        break;
    }
    return vol;
}

}  // namespace rhflow
