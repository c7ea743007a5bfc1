// Deterministic test-function families for inequality verification: seeded
// band-limited pseudo-random fields plus structured probes.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rhflow/grid.hpp"

namespace rhflow {

// One field of the family with a short description for witness reports.
struct TestField {
    std::string label;
    ScalarField field;
};

// `count` seeded band-limited fields: sums of the first 16 cosine modes with
// 1/(1+k)^2 amplitude decay, coefficients uniform in [-1, 1].
std::vector<TestField> random_band_limited(const Grid& g, std::uint64_t seed, int count);

// Structured probes: constant, cos x, a bump at the pole, a bump at the
// equator, and sin^2 x.
std::vector<TestField> structured_probes(const Grid& g);

// Concatenation of both families (the default verification battery).
std::vector<TestField> verification_family(const Grid& g, std::uint64_t seed, int count);

}  // namespace rhflow
