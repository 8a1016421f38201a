#pragma once

#include <cmath>
#include <random>

#include "charfront/linalg.hpp"

namespace charfront::test {

// Seeded source for the hand-rolled property generators.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}
    double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }
    int integer(int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng_); }
    Vec point(const Vec& lo, const Vec& hi) {
        Vec u(lo.size());
        for (std::size_t k = 0; k < lo.size(); ++k) u[k] = uniform(lo[k], hi[k]);
        return u;
    }

private:
    std::mt19937_64 rng_;
};

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace charfront::test
