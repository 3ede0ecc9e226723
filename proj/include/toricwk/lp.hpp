#pragma once

#include "toricwk/rational.hpp"

namespace toricwk {

enum class LpStatus { Optimal, Unbounded, Infeasible };

struct LpResult {
    LpStatus status = LpStatus::Infeasible;
    Rational value;
    RatVec x;
};

// Exact two-phase simplex with Bland's rule:
//   maximize c.x  subject to  a[i].x <= b[i],  x free.
LpResult lp_maximize(const RatMat& a, const RatVec& b, const RatVec& c);

}  // namespace toricwk
