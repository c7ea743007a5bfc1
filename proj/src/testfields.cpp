#include "rhflow/testfields.hpp"

#include <cmath>
#include <random>

namespace rhflow {

std::vector<TestField> random_band_limited(const Grid& g, std::uint64_t seed, int count) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::vector<TestField> out;
    out.reserve(static_cast<size_t>(count));
    for (int j = 0; j < count; ++j) {
        double coef[16];
        for (double& c : coef) c = unit(rng);
        auto fld = ScalarField::sample(g, Parity::Even, [&](double x) {
            double s = 0.0;
            for (int k = 0; k < 16; ++k) s += coef[k] / ((1.0 + k) * (1.0 + k)) * std::cos(k * x);
            return s;
        });
        out.push_back({"band-limited #" + std::to_string(j), std::move(fld)});
    }
    return out;
}

std::vector<TestField> structured_probes(const Grid& g) {
    std::vector<TestField> out;
    out.push_back({"constant", ScalarField::sample(g, Parity::Even, [](double) { return 1.0; })});
    out.push_back({"cos x", ScalarField::sample(g, Parity::Even, [](double x) { return std::cos(x); })});
    out.push_back({"pole bump", ScalarField::sample(g, Parity::Even, [](double x) {
                       return std::exp(-8.0 * x * x);
                   })});
    out.push_back({"equator bump", ScalarField::sample(g, Parity::Even, [](double x) {
                       const double d = x - std::numbers::pi / 2.0;
                       return std::exp(-8.0 * d * d);
                   })});
    out.push_back({"sin^2 x", ScalarField::sample(g, Parity::Even, [](double x) {
                       return std::sin(x) * std::sin(x);
                   })});
    return out;
}

std::vector<TestField> verification_family(const Grid& g, std::uint64_t seed, int count) {
    auto out = random_band_limited(g, seed, count);
    auto probes = structured_probes(g);
    out.insert(out.end(), std::make_move_iterator(probes.begin()),
               std::make_move_iterator(probes.end()));
    return out;
}

}  // namespace rhflow
