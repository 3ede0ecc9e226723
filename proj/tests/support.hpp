#pragma once

#include "toricwk/geometry.hpp"

#include <initializer_list>
#include <random>
#include <utility>

namespace testing_support {

using namespace toricwk;

inline Polyhedron poly(int n, std::initializer_list<std::pair<IntVec, Rational>> hs) {
    std::vector<HalfSpace> out;
    for (const auto& [nu, a] : hs) out.emplace_back(nu, a);
    return Polyhedron(n, std::move(out));
}

inline Polyhedron shifted_orthant(int n) {
    std::vector<HalfSpace> hs;
    for (int i = 0; i < n; ++i) {
        IntVec e(n, 0);
        e[i] = 1;
        hs.emplace_back(e, Rational(1));
    }
    return Polyhedron(n, std::move(hs));
}

inline RatVec rv(std::initializer_list<long long> xs) {
    RatVec out;
    for (long long x : xs) out.emplace_back(x);
    return out;
}

// Random unimodular matrix as a product of elementary integer shears and sign flips.
inline std::vector<IntVec> random_unimodular(int n, std::mt19937& rng) {
    std::vector<IntVec> u(n, IntVec(n, 0));
    for (int i = 0; i < n; ++i) u[i][i] = 1;
    if (n < 2) {
        if (rng() % 2) u[0][0] = -1;
        return u;
    }
    std::uniform_int_distribution<int> row(0, n - 1), mult(-2, 2);
    for (int step = 0; step < 4; ++step) {
        int i = row(rng), j = row(rng);
        if (i == j) continue;
        int k = mult(rng);
        for (int c = 0; c < n; ++c) u[i][c] += k * u[j][c];
    }
    if (rng() % 2)
        for (auto& c : u[0]) c = -c;
    return u;
}

}  // namespace testing_support
