#pragma once

#include "antw/state_space.hpp"

namespace antw {

// PID with first-order derivative filter, u = kp e + ki int(e) + kd d/dt(filtered e).
inline StateSpaceModel pid_controller(double kp, double ki, double kd, double tf) {
    if (!(tf > 0.0)) throw DimensionError("pid_controller: filter time constant must be > 0");
    Mat A(2, 2), B(2, 1), C(1, 2), D(1, 1);
    A << 0, 0, 0, -1.0 / tf;
    B << 1, 1.0 / tf;
    C << ki, -kd / tf;
    D << kp + kd / tf;
    return StateSpaceModel::make(A, B, C, D);
}

// Integral tracking state feedback ("MIMO-PI"): the controller sees the
// error vector e = r - x, integrates the channel `tracked`, and feeds the
// full error through a proportional row:  u = ki * int(e_tracked) + Kp e.
inline StateSpaceModel integral_state_feedback(const Mat& Kp, double ki, int tracked) {
    const int p = static_cast<int>(Kp.cols());
    const int m = static_cast<int>(Kp.rows());
    if (tracked < 0 || tracked >= p) throw DimensionError("integral_state_feedback: bad channel");
    Mat A = Mat::Zero(m, m), B = Mat::Zero(m, p), C = ki * Mat::Identity(m, m);
    for (int i = 0; i < m; ++i) B(i, tracked) = 1.0;
    return StateSpaceModel::make(A, B, C, Kp);
}

// Decoupled PI loops, one per channel, with per-channel gains.
inline StateSpaceModel pi_diagonal(const Vec& kp, const Vec& ki) {
    if (kp.size() != ki.size()) throw DimensionError("pi_diagonal: gain size mismatch");
    const int n = static_cast<int>(kp.size());
    return StateSpaceModel::make(Mat::Zero(n, n), Mat::Identity(n, n),
                                 Mat(ki.asDiagonal()), Mat(kp.asDiagonal()));
}

}  // namespace antw
