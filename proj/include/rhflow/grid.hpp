// Uniform 1-D grid on [0, pi] and axisymmetric scalar fields with pole parity.
#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace rhflow {

// Nodes x[i] = i*h, i = 0..n, h = pi/n. x[0] and x[n] are the poles.
struct Grid {
    int n = 0;       // interval count; n+1 nodes
    double h = 0.0;  // spacing pi/n

    Grid() = default;
    explicit Grid(int intervals) : n(intervals), h(std::numbers::pi / intervals) {
        if (intervals < 8) throw std::invalid_argument("Grid: need at least 8 intervals");
    }

    int nodes() const { return n + 1; }
    double x(int i) const { return i == n ? std::numbers::pi : i * h; }
    bool operator==(const Grid& other) const { return n == other.n; }
};

enum class Parity { Even, Odd };

// Axisymmetric function of the polar coordinate. Even fields have vanishing
// one-sided derivative at both poles, odd fields vanish there.
struct ScalarField {
    Grid grid;
    Parity parity = Parity::Even;
    std::vector<double> v;

    ScalarField() = default;
    ScalarField(const Grid& g, Parity p, double fill = 0.0)
        : grid(g), parity(p), v(static_cast<size_t>(g.nodes()), fill) {}

    double& operator[](int i) { return v[static_cast<size_t>(i)]; }
    double operator[](int i) const { return v[static_cast<size_t>(i)]; }
    int nodes() const { return grid.nodes(); }

    template <class F>
    static ScalarField sample(const Grid& g, Parity p, F&& fn) {
        ScalarField out(g, p);
        for (int i = 0; i <= g.n; ++i) out[i] = fn(g.x(i));
        if (p == Parity::Odd) { out[0] = 0.0; out[g.n] = 0.0; }
        return out;
    }
};

}  // namespace rhflow
