#pragma once

#include <vector>

#include "antw/parallel.hpp"
#include "antw/state_space.hpp"

namespace antw {

struct SweepSpec {
    double omega_min = 1e-3;
    double omega_max = 1e4;
    int points = 2000;
};

// Precomputed Hessenberg form of A for repeated (jwI - A)^{-1} B solves.
class FrequencyResponder {
  public:
    explicit FrequencyResponder(const StateSpaceModel& s);
    CMat response(double omega) const;  // C (jwI-A)^{-1} B + D
    double sigma_max_at(double omega) const;

  private:
    CMat H_, Bh_, Ch_;
    Mat D_;
    int n_;
};

struct SweepResult {
    double peak = 0.0;
    double peak_omega = 0.0;
};

// Max singular value of the response over a log grid. The OpenMP kernel and
// the serial path produce identical results (pointwise values, argmax merge).
SweepResult sweep_max(const StateSpaceModel& s, const SweepSpec& spec,
                      const ParallelConfig& par = {});

struct HinfResult {
    double value = 0.0;
    bool finite = false;
    double sweep_peak = 0.0;
    double sweep_peak_omega = 0.0;
    int bisection_iters = 0;
};

// H-infinity norm by bisection on the Hamiltonian imaginary-axis test,
// bracketed from below by the sweep peak. Unstable A yields finite=false.
HinfResult hinf_norm(const StateSpaceModel& s, double tol = 1e-6,
                     const SweepSpec& sweep = {}, const ParallelConfig& par = {});

}  // namespace antw
