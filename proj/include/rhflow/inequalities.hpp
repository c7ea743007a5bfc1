// Sobolev, log-Sobolev, Nash and heat-kernel-bound constants, plus the
// pointwise gradient/interpolation estimates, mean-value inequalities,
// on-diagonal bound and the Gaussian upper bound on the conjugate kernel.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rhflow/functionals.hpp"
#include "rhflow/testfields.hpp"

namespace rhflow {

// Default verification tolerance: fixed slack plus the O(h^2) discretization
// budget of the second-order operators.
inline double default_tol(const Grid& g) { return 1e-8 + 10.0 * g.h * g.h; }

struct SobolevReport {
    double t = 0.0;
    double A_best = 0.0;             // smallest A with B = 0
    double quotient_min = 0.0;       // inf of the Rayleigh-type quotient (1/A_best)
    double probe_min_quotient = 0.0; // certificate: min over 100 random probes
    double A = 0.0, B = 0.0;         // certified pair used for verification
    std::string family;
    std::vector<std::string> labels;
    std::vector<double> margins;     // A*energy + B*||v||_2^2 - ||v||_6^2
    double min_margin = 0.0;
    std::optional<std::string> witness;  // label of the worst offender if negative
    double tol = 0.0;
};

// Shared shape for the scalar inequality checks.
struct CheckReport {
    std::string kind;
    double t = 0.0;
    bool hypotheses_ok = true;
    std::vector<std::string> labels;
    std::vector<double> margins;
    double min_margin = 0.0;
    std::optional<std::string> witness;
    std::vector<std::pair<std::string, double>> scalars;  // named measured values
    double tol = 0.0;
};

struct GaussianSample {
    double t = 0.0, x = 0.0;
    double G = 0.0;       // kernel value
    double dist = 0.0;    // d(pole, x) at the terminal time
    double ball_vol = 0.0;
    double ratio = 0.0;   // G * |B| * exp(c1 d^2/(T-t))
};

struct GaussianReport {
    double c1_used = 0.0;
    double sup_ratio = 0.0;
    bool hypotheses_ok = true;
    std::string note;
    int grid_n = 0;
    double delta_width = 0.0;
    std::vector<GaussianSample> samples;
};

// Minimizes the quotient int(|grad v|^2 + S v^2/4) dmu / ||v||_6^2 by
// projected gradient descent on the ||.||_6-sphere; A_best = 1/inf.
// Throws std::domain_error when the quadratic form is not positive
// (hypothesis lambda_0 > 0 fails). The optimizer restarts from any random
// probe that beats its current minimum.
SobolevReport best_sobolev_constant(const MetricState& m,
                                    const std::vector<double>* S_override = nullptr,
                                    std::uint64_t seed = 0x5eed);

// Margins of (int v^6 dmu)^{1/3} <= A int(|grad v|^2 + S v^2/4) dmu + B ||v||_2^2
// over the seeded family plus structured probes at time t of the history.
SobolevReport verify_uniform_sobolev(const FlowHistory& hist, double t, double A, double B,
                                     int family_size, std::uint64_t seed = 0x5eed);

// Log-Sobolev margins: for ||v||_2 = 1,
//   int v^2 ln v^2 <= eps^2 int(4|grad v|^2 + S v^2) - 3 ln eps
//                     + (t + eps^2) B0/A0 + (3/2) ln(3 A0 / (2e)).
// A0, B0 are certified at the initial time of the history (B0 = 0 requires
// lambda_0(g(0)) > 0).
CheckReport verify_log_sobolev(const FlowHistory& hist, double t,
                               const std::vector<double>& eps_list, int family_size,
                               std::uint64_t seed = 0x5eed);

// Converts the certified (A, B) of the S-weighted Sobolev form into a pair
// valid for the plain-energy form ||v||_6^2 <= A ||grad v||^2 + B' ||v||_2^2.
std::pair<double, double> plain_energy_pair(const MetricState& m, double A, double B);

// Nash inequality ||v||_2^{10/3} <= (A ||grad v||_2^2 + B ||v||_2^2) ||v||_1^{4/3}
// with the plain-energy pair.
CheckReport nash_check(const MetricState& m, double A, double B, int family_size,
                       std::uint64_t seed = 0x5eed);

// On-diagonal kernel bound G(pole, t) <= (3A)^{3/2} t^{-3/2} e^{Bt/A} for the
// plain forward heat kernel on a frozen metric (the bound is fixed-metric).
CheckReport kernel_upper_check(const FlowHistory& hist, double A, double B);

// |grad u|/u <= sqrt(ln(A/u)/t) with A = sup u, t elapsed since the release
// time of the forward solution.
CheckReport gradient_estimate_check(const FlowHistory& hist, const HeatSolution& u);

// u(y,t) <= A^{delta/(1+delta)} u(x,t)^{1/(1+delta)} exp(d^2(x,y,t)/(4 t delta));
// y ranges over the pole and equator probes, x over all nodes.
CheckReport interpolation_check(const FlowHistory& hist, const HeatSolution& u,
                                const std::vector<double>& delta_list);

// Measured constants of the L^2/L^1 mean-value inequalities on parabolic
// cylinders ending at the last stored time, centered at the pole:
//   sup_{Q_{r/2}} u^p <= c r^{-5} iint_{Q_r} u^p,  p = 2, 1.
CheckReport mean_value_check(const FlowHistory& hist, const HeatSolution& u, double r);

// Measured constant of G(pole, t) (T-t)^{3/2} over resolved slices with
// T - t <= diam^2(g(T)).
CheckReport on_diagonal_check(const FlowHistory& hist, const HeatSolution& G);

// Gaussian upper bound of the conjugate kernel:
//   ratio = G(x,t) |B(pole, sqrt(T-t), T)|_T exp(c1 d^2(pole,x,T)/(T-t)),
// sampled over resolved slices and nodes at distance >= 4 delta-widths.
// Hypotheses Sy >= 0 and lambda_0(g(0)) > 0 are recorded; on violation the
// report is marked and the bound is not asserted.
GaussianReport gaussian_bound_check(const FlowHistory& hist, const HeatSolution& G, double c1);

}  // namespace rhflow
