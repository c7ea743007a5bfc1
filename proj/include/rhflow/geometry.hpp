// Discrete warped-product geometry on S^3: the metric g = a^2 dx^2 + f^2 g_{S^2},
// its curvature, the coupled tensor (s_rad, s_sph, S), Laplacians, quadrature,
// pole-based distances and ball volumes.
#pragma once

#include <span>
#include <vector>

#include "rhflow/grid.hpp"

namespace rhflow {

// Warped-product metric plus scalar field at one instant of flow time.
struct MetricState {
    double t = 0.0;
    Grid grid;
    std::vector<double> a;    // radial lapse, > 0
    std::vector<double> f;    // warp radius, > 0 in the interior, = 0 at poles
    std::vector<double> phi;  // scalar field, even at poles

    MetricState() = default;
    explicit MetricState(const Grid& g)
        : grid(g),
          a(static_cast<size_t>(g.nodes()), 1.0),
          f(static_cast<size_t>(g.nodes()), 0.0),
          phi(static_cast<size_t>(g.nodes()), 0.0) {}

    int nodes() const { return grid.nodes(); }
};

// Throws std::domain_error naming the first offending node when the state
// violates positivity or pole regularity. `reg_tol` bounds |df/ds -+ 1| at the
// poles (one-sided, second order).
void check_metric_invariants(const MetricState& m, double reg_tol);

// Ricci eigenvalues, scalar curvature and the coupled tensor of the flow.
struct CurvatureFields {
    std::vector<double> ric_rad, ric_sph;  // Ricci eigenvalues
    std::vector<double> R;                 // scalar curvature
    std::vector<double> s_rad, s_sph;      // eigenvalues of Sy = Ric - 2 dphi x dphi
    std::vector<double> S;                 // trace, = R - 2|dphi|^2
    std::vector<double> dphi;              // arclength derivative of phi
};

// Centered derivative stencils. Five-point interior stencils are normalized so
// that sin/cos are differentiated exactly on the grid; this keeps the discrete
// round sphere an exact solution of the nodewise flow and removes the
// 0/0 cancellation loss of (1-(Df)^2)/f^2 near the poles. Ghost nodes use
// parity reflection across the poles.
std::vector<double> deriv_x(const Grid& g, std::span<const double> v, Parity p);
std::vector<double> deriv_xx(const Grid& g, std::span<const double> v, Parity p);

// Arclength derivative Dv = v_x / a.
std::vector<double> arclength_deriv(const MetricState& m, std::span<const double> v, Parity p);
// D^2 v = v_xx / a^2 - v_x a_x / a^3.
std::vector<double> arclength_deriv2(const MetricState& m, std::span<const double> v, Parity p);

// Even quadratic extrapolation of interior values onto the pole nodes.
void fill_poles_even(const Grid& g, std::vector<double>& v);

// Pole value of a smooth even field from its three nearest interior nodes:
// quadratic in x^2 through x = h, 2h, 3h (O(h^6) on resolved even profiles).
inline double even_pole_extension(double v1, double v2, double v3) {
    return 1.5 * v1 - 0.6 * v2 + 0.1 * v3;
}

CurvatureFields curvature(const MetricState& m);

// Laplace-Beltrami of an even field: D^2 u + 2 (Df/f) Du, pole value 3 D^2 u.
ScalarField laplacian(const MetricState& m, const ScalarField& u);

// Trapezoid quadrature of u against dmu = 4 pi a f^2 dx.
double integrate(const MetricState& m, const ScalarField& u);
double volume(const MetricState& m);

// int |grad v|^2 dmu = int (Dv)^2 dmu.
double gradient_energy(const MetricState& m, const ScalarField& v);

// (int |v|^p dmu)^(1/p); requires p >= 1.
double lp_norm(const MetricState& m, const ScalarField& v, double p);

// Geodesic distance from the north pole (x = 0) to the point at coordinate x.
double radial_distance(const MetricState& m, double x_coord);

// Volume of the geodesic ball {d(N,.) <= rho} about the north pole.
double ball_volume(const MetricState& m, double rho);

// All radial distances d(N, x_i) in one pass.
std::vector<double> radial_distance_profile(const MetricState& m);

}  // namespace rhflow
