#pragma once

#include "antw/state_space.hpp"

namespace antw {

// Solves A X + X A^T + W = 0 for stable A (continuous Lyapunov).
Mat solve_lyapunov(const Mat& A, const Mat& W);

// Balanced truncation of a stable model: drops Hankel singular values below
// tol_rel * sigma_max. Intended as an optional cleanup for large interconnects.
StateSpaceModel balanced_truncate(const StateSpaceModel& s, double tol_rel = 1e-9,
                                  int max_order = -1);

}  // namespace antw
