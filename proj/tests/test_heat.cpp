// Heat module: forward/conjugate solver oracles on the frozen round sphere,
// mass conservation of the delta-initialized conjugate solution, the spectral
// kernel oracle, residual diagnostics, and the evolution identity of S.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "rhflow/heat.hpp"

using namespace rhflow;
using std::numbers::pi;

namespace {

MetricState round_sphere(int n, double r) {
    return HomogeneousState{r, 0.0, 0.0}.materialize(Grid(n));
}

FlowHistory round_flow(int n, double t_end) {
    FlowConfig cfg;
    cfg.grid_n = n;
    cfg.t_end = t_end;
    cfg.dt = 1e-4;
    cfg.family.name = "round";
    return run(cfg);
}

}  // namespace

TEST_CASE("forward solve: constants are preserved exactly") {
    auto m = round_sphere(64, 1.0);
    auto frz = FlowHistory::frozen(m, 0.0, 0.5);
    ScalarField u0(m.grid, Parity::Even, 0.7);
    auto sol = solve_forward(frz, u0, 0.0, 0.4);
    for (const auto& f : sol.fields)
        for (double v : f.v) CHECK(v == doctest::Approx(0.7).epsilon(1e-13));
}

TEST_CASE("forward solve: first zonal mode decays at rate 3") {
    auto m = round_sphere(256, 1.0);
    auto frz = FlowHistory::frozen(m, 0.0, 0.5);
    auto u0 = ScalarField::sample(m.grid, Parity::Even,
                                  [](double x) { return 2.0 + std::cos(x); });
    auto sol = solve_forward(frz, u0, 0.0, 0.3);
    const auto& uf = sol.fields.back();
    for (int i = 0; i <= m.grid.n; ++i) {
        const double want = 2.0 + std::exp(-0.9) * std::cos(m.grid.x(i));
        CHECK(uf[i] == doctest::Approx(want).epsilon(5e-4));
    }
}

TEST_CASE("forward solve on a frozen metric conserves mass to near round-off") {
    auto m = round_sphere(128, 1.0);
    auto frz = FlowHistory::frozen(m, 0.0, 0.2);
    auto u0 = ScalarField::sample(m.grid, Parity::Even,
                                  [](double x) { return 1.0 + 0.3 * std::cos(2.0 * x); });
    auto sol = solve_forward(frz, u0, 0.0, 0.1);
    for (double ms : sol.mass) CHECK(ms == doctest::Approx(sol.mass.front()).epsilon(1e-10));
}

TEST_CASE("conjugate delta keeps unit mass; defect drops under refinement") {
    double drift64 = 0.0, drift128 = 0.0;
    for (int n : {64, 128}) {
        auto hist = round_flow(n, 0.11);
        auto G = fundamental_solution(hist, 0.11, 0.01, 4.0 * pi / n);
        double drift = 0.0;
        for (double ms : G.mass) drift = std::max(drift, std::abs(ms - 1.0));
        (n == 64 ? drift64 : drift128) = drift;
        // positivity of the kernel (discrete maximum principle)
        for (const auto& f : G.fields)
            for (double v : f.v) CHECK(v >= 0.0);
    }
    CHECK(drift128 < 1e-4);
    CHECK(drift64 / drift128 > 4.0);  // order >= 2 until the consistency floor
}

TEST_CASE("delta_approx: unit mass, pole peak, compact support") {
    auto m = round_sphere(128, 1.0);
    const double w = 0.2;
    auto d = delta_approx(m, w);
    double mass = 0.0;
    for (int i = 0; i < m.grid.n; ++i) {
        const double wi = (i == 0) ? 0.5 : 1.0;  // trapezoid against 4 pi a f^2 dx
        mass += wi * 4.0 * pi * m.a[static_cast<size_t>(i)] * m.f[static_cast<size_t>(i)] *
                m.f[static_cast<size_t>(i)] * d[i] * m.grid.h;
    }
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(d[0] > d[10]);
    for (int i = 0; i <= m.grid.n; ++i)
        if (m.grid.x(i) > 6.0 * w) CHECK(d[i] == 0.0);
    CHECK_THROWS_AS(delta_approx(m, -0.1), std::domain_error);
}

TEST_CASE("static kernel oracle: closed-form limits and scaling") {
    // tau -> infinity: uniform density 1/Vol = 1/(2 pi^2 r^3)
    CHECK(static_kernel_oracle(1.0, 1.0, 50.0) ==
          doctest::Approx(1.0 / (2.0 * pi * pi)).epsilon(1e-12));
    CHECK(static_kernel_oracle(2.0, 1.0, 200.0) ==
          doctest::Approx(1.0 / (16.0 * pi * pi)).epsilon(1e-12));
    // tau -> 0 on-diagonal: Euclidean normalization (4 pi tau)^{-3/2}
    const double tau = 1e-3;
    CHECK(static_kernel_oracle(1.0, 0.0, tau) * std::pow(4.0 * pi * tau, 1.5) ==
          doctest::Approx(1.0).epsilon(5e-3));
    // parabolic scaling K_r(d, tau) = r^{-3} K_1(d/r, tau/r^2)
    CHECK(static_kernel_oracle(2.0, 0.8, 0.12) ==
          doctest::Approx(static_kernel_oracle(1.0, 0.4, 0.03) / 8.0).epsilon(1e-12));
    CHECK_THROWS_AS(static_kernel_oracle(1.0, 0.1, -1.0), std::domain_error);
    CHECK_THROWS_AS(static_kernel_oracle(1.0, 4.0, 0.1), std::domain_error);
    CHECK_THROWS_AS(static_kernel_oracle(-1.0, 0.1, 0.1), std::domain_error);
}

TEST_CASE("frozen-sphere kernel matches the spectral oracle") {
    // Conjugate kernel on the frozen unit sphere = e^{-6 tau} x (plain heat
    // semigroup applied to the same mollified delta). Compare at nodes beyond
    // four delta-widths that the second-order operator resolves in relative
    // terms (oracle value >= 2e-2 sup).
    const int n = 256;
    auto m = round_sphere(n, 1.0);
    auto frz = FlowHistory::frozen(m, 0.0, 0.2);
    const double tau = 0.1, T = 0.2, width = 4.0 * pi / n;
    auto G = fundamental_solution(frz, T, T - tau, width);
    const auto& u = G.fields[G.nearest(T - tau)];
    auto prop = static_propagate_oracle(1.0, m, delta_approx(m, width), tau);
    double sup = 0.0;
    for (double v : prop.v) sup = std::max(sup, v);
    int compared = 0;
    for (int i = 0; i <= n; ++i) {
        const double d = radial_distance(m, m.grid.x(i));
        if (d < 4.0 * width || prop[i] < 2e-2 * sup) continue;
        const double want = std::exp(-0.6) * prop[i];
        CHECK(std::abs(u[i] - want) / want < 1e-3);
        ++compared;
    }
    CHECK(compared > 50);
}

TEST_CASE("static_propagate_oracle agrees with the forward solver") {
    const int n = 256;
    auto m = round_sphere(n, 1.0);
    auto frz = FlowHistory::frozen(m, 0.0, 0.2);
    auto u0 = ScalarField::sample(m.grid, Parity::Even, [](double x) {
        const double c = std::cos(x);
        return 1.0 + 0.5 * c + 0.2 * c * c;
    });
    auto prop = static_propagate_oracle(1.0, m, u0, 0.15);
    auto fw = solve_forward(frz, u0, 0.0, 0.15);
    for (int i = 0; i <= n; ++i)
        CHECK(fw.fields.back()[i] == doctest::Approx(prop[i]).epsilon(1e-3));
    // tau = 0 reproduces the data
    auto same = static_propagate_oracle(1.0, m, u0, 0.0);
    for (int i = 0; i <= n; ++i) CHECK(same[i] == doctest::Approx(u0[i]).epsilon(1e-10));
}

TEST_CASE("S == 0 override turns the conjugate solve into plain backward heat") {
    auto m = round_sphere(128, 1.0);
    auto frz = FlowHistory::frozen(m, 0.0, 0.2);
    auto uT = ScalarField::sample(m.grid, Parity::Even, [](double x) {
        const double c = std::cos(x);
        return 1.0 + 0.5 * c + 0.2 * c * c;
    });
    std::vector<double> zero(static_cast<size_t>(m.grid.nodes()), 0.0);
    auto conj = solve_conjugate(frz, uT, 0.2, 0.05, {}, &zero);
    auto fw = solve_forward(frz, uT, 0.0, 0.15);
    // elapsed tau = 0.15 in both solutions
    for (int i = 0; i <= m.grid.n; ++i)
        CHECK(conj.fields.front()[i] == doctest::Approx(fw.fields.back()[i]).epsilon(1e-12));
}

TEST_CASE("adjoint property: forward reconstruction has a small relative residual") {
    auto hist = round_flow(128, 0.11);
    auto G = fundamental_solution(hist, 0.11, 0.01, 4.0 * pi / 128.0);
    const double res = adjoint_residual(hist, G, 0.06);
    CHECK(std::isfinite(res));
    CHECK(res > 0.0);
    // widening the release bump smooths the early slices and shrinks the residual
    auto Gw = fundamental_solution(hist, 0.11, 0.01, 8.0 * pi / 128.0);
    CHECK(adjoint_residual(hist, Gw, 0.06) < res);

    auto uT = ScalarField(hist.grid(), Parity::Even, 1.0);
    auto plain = solve_conjugate(hist, uT, 0.11, 0.01);
    CHECK_THROWS_AS(adjoint_residual(hist, plain, 0.06), std::domain_error);
    CHECK_THROWS_AS(adjoint_residual(hist, G, 0.2), std::domain_error);
}

TEST_CASE("conjugate operator residual and the H*(u ln u) identity") {
    auto hist = round_flow(256, 0.11);
    auto G = fundamental_solution(hist, 0.11, 0.01, 4.0 * pi / 256.0);
    auto hs = hstar_residual(hist, G, 0.06);
    CHECK(hs.solver_residual < 5e-2);
    CHECK(hs.identity_defect < 5e-2);
    CHECK(hs.excluded_nodes == 0);
    CHECK_THROWS_AS(hstar_residual(hist, G, 0.0), std::domain_error);
}

TEST_CASE("evolution identity of S converges on the perturbed family") {
    // March every resolution with one common small step so the measured
    // residual isolates the spatial truncation of the identity.
    const double dt = 1e-6;
    const int nsteps = 50;
    double prev = 0.0;
    for (int n : {64, 128, 256}) {
        FlowHistory hist;
        MetricState m = initial_state(Grid(n), InitialFamily{"perturbed"});
        hist.states.push_back(m);
        for (int s = 0; s < nsteps; ++s) {
            m = step(m, dt);
            hist.states.push_back(m);
        }
        const double res = evolution_identity_residual(hist, 25.0 * dt);
        if (prev > 0.0) CHECK(prev / res > 2.0);  // order >= 1 under doubling
        prev = res;
        CHECK_THROWS_AS(evolution_identity_residual(hist, 0.0), std::domain_error);
    }
    CHECK(prev < 1e-2);
}

TEST_CASE("HeatSolution::nearest and solver argument validation") {
    auto m = round_sphere(64, 1.0);
    auto frz = FlowHistory::frozen(m, 0.0, 0.5);
    ScalarField u0(m.grid, Parity::Even, 1.0);
    auto sol = solve_forward(frz, u0, 0.0, 0.2);
    CHECK(sol.nearest(-1.0) == 0);
    CHECK(sol.nearest(1.0) == sol.size() - 1);
    const size_t k = sol.nearest(0.1);
    CHECK(std::abs(sol.times[k] - 0.1) <= 0.5 * sol.dt + 1e-12);

    CHECK_THROWS_AS(solve_forward(frz, u0, 0.2, 0.1), std::domain_error);
    CHECK_THROWS_AS(solve_conjugate(frz, u0, 0.1, 0.2), std::domain_error);
    ScalarField neg(m.grid, Parity::Even, -1.0);
    CHECK_THROWS_AS(solve_conjugate(frz, neg, 0.5, 0.1), std::domain_error);
    ScalarField wrong(Grid(32), Parity::Even, 1.0);
    CHECK_THROWS_AS(solve_forward(frz, wrong, 0.0, 0.1), std::domain_error);
    CHECK_THROWS_AS(fundamental_solution(frz, 0.5, 0.1, 1e-4), std::domain_error);
}
