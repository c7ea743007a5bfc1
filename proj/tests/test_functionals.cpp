// Functionals: closed-form entropies on the round sphere, production
// integrals, the generalized entropy family, lambda_0 oracles, and the
// monotonicity trace along the shrinking-sphere trajectory.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rhflow/functionals.hpp"

using namespace rhflow;
using std::numbers::pi;

namespace {

MetricState round_sphere(int n, double r) {
    return HomogeneousState{r, 0.0, 0.0}.materialize(Grid(n));
}

ScalarField uniform_density(const MetricState& m) {
    return ScalarField(m.grid, Parity::Even, 1.0 / volume(m));
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

TEST_CASE("potential_f inverts the density parametrization") {
    auto m = round_sphere(64, 1.0);
    const double tau = 0.3;
    auto u = ScalarField::sample(m.grid, Parity::Even,
                                 [](double x) { return 0.2 + 0.1 * std::cos(x); });
    auto f = potential_f(m, u, tau);
    for (int i = 0; i <= m.grid.n; ++i) {
        const double back = std::exp(-f[i]) / std::pow(4.0 * pi * tau, 1.5);
        CHECK(back == doctest::Approx(u[i]).epsilon(1e-13));
    }
    CHECK_THROWS_AS(potential_f(m, u, 0.0), std::domain_error);
    ScalarField zero(m.grid, Parity::Even, 0.0);
    CHECK_THROWS_AS(potential_f(m, zero, tau), std::domain_error);
}

TEST_CASE("F entropy: uniform density on round spheres") {
    for (double r : {1.0, 2.0}) {
        auto m = round_sphere(128, r);
        auto u = uniform_density(m);
        CHECK(entropy_F(m, u) == doctest::Approx(6.0 / (r * r)).epsilon(1e-12));
    }
    // S-override replaces the curvature term: F = integral of S u dmu only
    auto m = round_sphere(64, 1.0);
    auto u = uniform_density(m);
    std::vector<double> S1(static_cast<size_t>(m.grid.nodes()), 2.5);
    CHECK(entropy_F(m, u, &S1) == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("W entropy closed form on the unit round sphere") {
    auto m = round_sphere(128, 1.0);
    auto u = uniform_density(m);
    for (double tau : {0.1, 0.25, 0.7}) {
        const double want = 6.0 * tau + std::log(2.0 * pi * pi) - 1.5 * std::log(4.0 * pi * tau) - 3.0;
        CHECK(entropy_W(m, u, tau) == doctest::Approx(want).epsilon(1e-12));
    }
    CHECK_THROWS_AS(entropy_W(m, u, -0.1), std::domain_error);
}

TEST_CASE("generalized entropy family") {
    auto m = round_sphere(128, 1.0);
    auto u = uniform_density(m);
    const double tau = 0.3;
    // a = sqrt(2 pi) reproduces W exactly
    CHECK(entropy_W_gen(m, u, tau, std::sqrt(2.0 * pi)) ==
          doctest::Approx(entropy_W(m, u, tau)).epsilon(1e-14));
    // a = 0 drops the F-part
    const double n0 = std::log(2.0 * pi * pi) - 1.5 * std::log(4.0 * pi * tau) - 3.0;
    CHECK(entropy_W_gen(m, u, tau, 0.0) == doctest::Approx(n0).epsilon(1e-12));
    // quadratic dependence on a
    const double w0 = entropy_W_gen(m, u, tau, 0.0);
    const double w1 = entropy_W_gen(m, u, tau, 1.0);
    const double w2 = entropy_W_gen(m, u, tau, 2.0);
    CHECK(w2 - w0 == doctest::Approx(4.0 * (w1 - w0)).epsilon(1e-10));
    CHECK_THROWS_AS(entropy_W_gen(m, u, tau, -1.0), std::domain_error);
}

TEST_CASE("production integrals on the round sphere") {
    auto m = round_sphere(128, 1.0);
    auto u = uniform_density(m);
    // |Sy|^2 = s_rad^2 + 2 s_sph^2 = 12, production_F = 2 * 12
    CHECK(production_F(m, u) == doctest::Approx(24.0).epsilon(1e-12));
    // at tau = 1/4 the shrinker identity Sy = g/(2 tau) makes production_W vanish
    CHECK(production_W(m, u, 0.25) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(production_W(m, u, 0.5) > 0.0);
    CHECK_THROWS_AS(production_W(m, u, 0.0), std::domain_error);
}

TEST_CASE("lambda0 oracles and scaling") {
    auto m = round_sphere(256, 1.0);
    auto eig = lambda0(m);
    CHECK(eig.lambda0 == doctest::Approx(6.0).epsilon(1e-6));
    CHECK(eig.residual < 1e-8);
    // measure-weighted L2 normalization of the eigenfunction
    double nrm = 0.0;
    {
        ScalarField sq(m.grid, Parity::Even);
        for (int i = 0; i <= m.grid.n; ++i) sq[i] = eig.eigenfunction[i] * eig.eigenfunction[i];
        nrm = integrate(m, sq);
    }
    CHECK(nrm == doctest::Approx(1.0).epsilon(1e-8));

    auto m2 = round_sphere(256, 2.0);
    CHECK(lambda0(m2).lambda0 == doctest::Approx(1.5).epsilon(1e-6));

    // S == 0 override: the operator -4 Lap has bottom eigenvalue 0
    std::vector<double> zero(static_cast<size_t>(m.grid.nodes()), 0.0);
    CHECK(std::abs(lambda0(m, &zero).lambda0) < 1e-8);
}

TEST_CASE("lambda0 is dominated by every Rayleigh quotient") {
    auto m = round_sphere(128, 1.0);
    auto eig = lambda0(m);
    auto cur = curvature(m);
    for (double k : {1.0, 2.0, 3.0}) {
        auto v = ScalarField::sample(m.grid, Parity::Even,
                                     [k](double x) { return 1.0 + 0.5 * std::cos(k * x); });
        ScalarField sv(m.grid, Parity::Even);
        for (int i = 0; i <= m.grid.n; ++i) sv[i] = cur.S[static_cast<size_t>(i)] * v[i] * v[i];
        ScalarField v2(m.grid, Parity::Even);
        for (int i = 0; i <= m.grid.n; ++i) v2[i] = v[i] * v[i];
        const double quot = (4.0 * gradient_energy(m, v) + integrate(m, sv)) / integrate(m, v2);
        CHECK(eig.lambda0 <= quot + 1e-9);
    }
}

TEST_CASE("entropy rates match the production integrals along the round flow") {
    auto hist = round_flow(256, 0.11);
    HeatOptions opt;
    opt.store_stride = 8;
    auto G = fundamental_solution(hist, 0.11, 0.01, 4.0 * pi / 256.0, opt);
    auto rep = monotonicity_trace(hist, G, 0.15, {0.0, 1.0});
    const double T = rep.times.back();
    double worstF = 0.0, worstW = 0.0, min_rate = 1e300;
    for (size_t j = 1; j + 1 < rep.times.size(); ++j) {
        if (T - rep.times[j] < 0.03) continue;  // skip the under-resolved release window
        worstF = std::max(worstF, rep.resF[j] / std::max(1.0, std::abs(rep.prodF[j])));
        worstW = std::max(worstW, rep.resW[j] / std::max(1.0, std::abs(rep.prodW[j])));
        min_rate = std::min({min_rate, rep.dFdt[j], rep.dWdt[j]});
    }
    CHECK(worstF < 1e-2);
    CHECK(worstW < 1e-2);
    CHECK(min_rate > -1e-6);
    // early slices of the truncated delta are exactly zero away from the pole
    CHECK(rep.max_excluded_nodes < hist.grid().nodes());
}

TEST_CASE("generalized entropy rate dominates its production bound on the shrinker") {
    // Uniform conjugate solution with tau matched to the extinction time: the
    // correction (a^2/2pi - 1)(F - n/(2 tau)) vanishes and the monotonicity
    // inequality is an equality for every a.
    auto hist = round_flow(128, 0.11);
    const double T = 0.11;
    auto mT = metric_at(hist, T);
    ScalarField uT(mT.grid, Parity::Even, 1.0 / volume(mT));
    HeatOptions opt;
    opt.dt = 1e-4;  // align the conjugate steps with the flow snapshots
    auto sol = solve_conjugate(hist, uT, T, 0.01, opt);
    auto rep = monotonicity_trace(hist, sol, (1.0 - 4.0 * T) / 4.0,
                                  {0.0, 1.0, std::sqrt(2.0 * pi), 5.0});
    double min_gap = 1e300, wdiff = 0.0;
    for (size_t a = 0; a < rep.a_params.size(); ++a)
        for (size_t j = 1; j + 1 < rep.times.size(); ++j)
            min_gap = std::min(min_gap, rep.WgenRate[a][j] - rep.WgenRhs[a][j]);
    for (size_t j = 0; j < rep.times.size(); ++j)
        wdiff = std::max(wdiff, std::abs(rep.Wgen[2][j] - rep.W[j]));
    CHECK(min_gap > -1e-6);
    CHECK(wdiff < 1e-10);
    CHECK_FALSE(rep.flagged);
}

TEST_CASE("monotonicity_trace argument validation") {
    auto hist = round_flow(64, 0.05);
    auto mT = metric_at(hist, 0.05);
    ScalarField uT(mT.grid, Parity::Even, 1.0);
    auto sol = solve_conjugate(hist, uT, 0.05, 0.01);
    // tau_offset so negative that tau crosses zero inside the window
    CHECK_THROWS_AS(monotonicity_trace(hist, sol, -0.02, {1.0}), std::domain_error);
    HeatSolution tiny;
    tiny.times = {0.0, 1.0};
    tiny.fields = {uT, uT};
    tiny.mass = {1.0, 1.0};
    CHECK_THROWS_AS(monotonicity_trace(hist, tiny, 0.1, {1.0}), std::domain_error);
}
