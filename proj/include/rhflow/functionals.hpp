// Entropy functionals F, W and the generalized family W(a, .), entropy
// production integrals, the eigenvalue lambda_0 of -4 Lap + S, and the
// monotonicity trace along a flow + conjugate-heat trajectory.
#pragma once

#include <vector>

#include "rhflow/heat.hpp"

namespace rhflow {

struct EigenResult {
    double lambda0 = 0.0;
    ScalarField eigenfunction;  // normalized, ||v||_2 = 1
    double residual = 0.0;      // ||(-4 Lap + S) v - lambda0 v||_2, measure-weighted
    int iterations = 0;
};

// Trace of the entropies along stored conjugate-heat slices. Rates are
// centered finite differences in flow time; residuals compare them with the
// exact production integrals. Wgen rows follow a_params.
struct EntropyReport {
    std::vector<double> times, tau;
    std::vector<double> F, W;
    std::vector<double> dFdt, dWdt;          // NaN at the endpoints
    std::vector<double> prodF, prodW;
    std::vector<double> resF, resW;          // |rate - production|, NaN at ends
    std::vector<double> a_params;
    std::vector<std::vector<double>> Wgen;       // [a index][slice]
    std::vector<std::vector<double>> WgenRate;   // centered rate of Wgen
    std::vector<std::vector<double>> WgenRhs;    // (a^2/2pi) * prodW
    int max_excluded_nodes = 0;  // nodes under the positivity floor, worst slice
    double tol_mono = 1e-6;
    bool flagged = false;        // some rate fell below -tol_mono
};

// f = -ln u - (3/2) ln(4 pi tau); exact inverse of u = e^{-f}/(4 pi tau)^{3/2}.
ScalarField potential_f(const MetricState& m, const ScalarField& u, double tau);

// F = int (S u + |grad u|^2 / u) dmu. Nodes with u below the positivity floor
// (1e-30) contribute zero. `S_override` substitutes the scalar S pointwise.
double entropy_F(const MetricState& m, const ScalarField& u,
                 const std::vector<double>* S_override = nullptr);

// W = int [tau (S + |grad f|^2) + f - 3] u dmu with f the potential above.
double entropy_W(const MetricState& m, const ScalarField& u, double tau);

// Generalized family: (a^2 tau / 2pi) * F-part + int (f - 3) u dmu;
// a_param = sqrt(2 pi) reproduces W exactly.
double entropy_W_gen(const MetricState& m, const ScalarField& u, double tau, double a_param);

// 2 int (|Sy + Hess f|^2 + 2 |Lap phi - dphi(grad f)|^2) u dmu  (>= 0).
double production_F(const MetricState& m, const ScalarField& u);

// int (2 tau |Sy + Hess f - g/(2 tau)|^2 + 4 tau |Lap phi - dphi(grad f)|^2) u dmu.
double production_W(const MetricState& m, const ScalarField& u, double tau);

// Smallest eigenvalue of -4 Lap + S in the measure-weighted inner product,
// by shifted inverse iteration on the tridiagonal interior operator.
// tol_eig = 1e-8; throws std::runtime_error after 500 iterations without
// convergence.
EigenResult lambda0(const MetricState& m, const std::vector<double>* S_override = nullptr);

// Entropy trace along the trajectory: tau(t) = tau_offset + (T - t) must stay
// positive on the window (T = last stored time of G). Each slice of G is
// renormalized to unit mass before evaluation.
EntropyReport monotonicity_trace(const FlowHistory& hist, const HeatSolution& G,
                                 double tau_offset,
                                 const std::vector<double>& a_params = {0.0, 1.0});

}  // namespace rhflow
