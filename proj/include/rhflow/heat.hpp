// Forward heat equation and backward conjugate heat equation along an evolving
// metric, fundamental-solution approximation with a mollified delta, residual
// diagnostics, and the spectral kernel oracle of the static round sphere.
#pragma once

#include <vector>

#include "rhflow/flow.hpp"

namespace rhflow {

enum class HeatDirection { Forward, ConjugateBackward };

// Time series of fields along the flow, stored by increasing flow time.
struct HeatSolution {
    HeatDirection direction = HeatDirection::Forward;
    double delta_width = 0.0;  // 0 when not delta-initialized
    double dt = 0.0;           // internal solver step
    std::vector<double> times;
    std::vector<ScalarField> fields;
    std::vector<double> mass;  // int u dmu(g(t_k)) per stored time

    size_t size() const { return times.size(); }
    // Index of the stored time nearest to t.
    size_t nearest(double t) const;
};

struct HeatOptions {
    double dt = 0.0;        // 0: choose 0.2 * h^2 from the grid
    int store_stride = 1;   // keep every k-th step (first and last always kept)
};

// Solves du/dt = Lap_{g(t)} u from t0 to t1 by implicit Euler steps on the
// conservative divergence-form operator (tridiagonal solve per step).
HeatSolution solve_forward(const FlowHistory& hist, const ScalarField& u0, double t0, double t1,
                           const HeatOptions& opt = {});

// Solves du/dt + Lap u - S u = 0 backward from T to t_stop (forward in
// tau = T - t). Terminal data must be nonnegative and even at the poles.
// `S_override` substitutes the reaction coefficient pointwise (testing hook).
HeatSolution solve_conjugate(const FlowHistory& hist, const ScalarField& uT, double T,
                             double t_stop, const HeatOptions& opt = {},
                             const std::vector<double>* S_override = nullptr);

// Mollified delta at the north pole: Gaussian bump in arclength, truncated at
// six widths and renormalized to discrete mass one.
ScalarField delta_approx(const MetricState& m, double width);

// Conjugate solve from the renormalized delta at (north pole, T); width must
// resolve the grid: width >= 2 h max(a) at time T.
HeatSolution fundamental_solution(const FlowHistory& hist, double T, double t_stop, double width,
                                  const HeatOptions& opt = {});

// Heat kernel of the static round 3-sphere of radius r between points at
// geodesic distance d, elapsed time tau > 0 (spectral zonal expansion).
double static_kernel_oracle(double r, double d, double tau);

// Spectral propagation of axisymmetric data u0 on the frozen round sphere of
// radius r: the exact heat semigroup applied to u0, sampled on u0's grid.
ScalarField static_propagate_oracle(double r, const MetricState& m, const ScalarField& u0,
                                    double tau);

// Residual of the forward heat operator applied to G in its second argument
// pair. By the adjoint property this function of (z, tau) is reproduced by a
// forward solve from the same mollified delta released at t_fixed; the
// returned norm is the measure-weighted RMS of Lap_z u - du/dtau over interior
// stored slices.
double adjoint_residual(const FlowHistory& hist, const HeatSolution& G, double t_fixed);

struct HStarResidual {
    double solver_residual = 0.0;   // || (Lap - S + d/dt) u ||
    double identity_defect = 0.0;   // || H*(u ln u) - (|grad u|^2/u + S u) ||
    int excluded_nodes = 0;         // nodes with u below the positivity floor
};

// Evaluates the conjugate heat operator on a stored solution near time t and
// the pointwise identity H*(u ln u) = |grad u|^2/u + S u.
HStarResidual hstar_residual(const FlowHistory& hist, const HeatSolution& u, double t);

// Max-norm residual of d/dt S = Lap S + 2|Sy|^2 + 4|Lap phi|^2 at the stored
// snapshot nearest to t (centered differences across neighbors).
double evolution_identity_residual(const FlowHistory& hist, double t);

}  // namespace rhflow
