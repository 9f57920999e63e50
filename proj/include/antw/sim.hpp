#pragma once

#include <optional>
#include <string>
#include <vector>

#include "antw/state_space.hpp"

namespace antw {

// Per-channel clamp bounds; +/-inf disables a side.
struct SaturationSpec {
    Vec lower, upper;

    static SaturationSpec bounds(Vec lower, Vec upper);
    static SaturationSpec unbounded(int n);
    static SaturationSpec symmetric(int n, double limit);
    static SaturationSpec box(int n, double lo, double hi);

    int dim() const { return static_cast<int>(lower.size()); }
    bool any_active() const;  // false when every bound is infinite
    Vec clamp(const Vec& v) const;
};

Vec saturate(const Vec& v, const SaturationSpec& spec);

// Piecewise-constant vector signal: value = levels[i] on [times[i], times[i+1]).
struct SignalGen {
    std::vector<double> times;
    std::vector<Vec> levels;

    static SignalGen constant(Vec v);
    static SignalGen step(Vec amplitude, double t_on);  // zero before t_on
    static SignalGen piecewise(std::vector<double> times, std::vector<Vec> levels);

    int dim() const { return levels.empty() ? 0 : static_cast<int>(levels[0].size()); }
    Vec eval(double t) const;
};

// Extra exogenous plant drive x' += Bw * w(t) (grid voltage, load changes).
struct ExogenousInput {
    Mat Bw;
    SignalGen w;
};

// Closed loop of plant + nominal controller + optional anti-windup blocks.
//
//   e      = r - y,            y = C_plant x  (tracked output)
//   s      = C_sat x (+ d),    monitored combination subject to limits
//   e_x    = sat(s) - s        state saturation error  -> state_aw -> u_mx
//   e_u    = sat(u) - u        input saturation error  -> input_aw -> u_mu
//   u_c    = controller(e + u_mu)
//   u      = u_c + u_mx
//
// The saturation blocks are monitors: the plant is driven by u itself unless
// apply_input_sat is set (hard actuator limit).
struct LoopConfig {
    StateSpaceModel plant;  // strictly proper; C selects the tracked output
    Mat c_sat;              // rows = monitored channels
    StateSpaceModel controller;
    std::optional<StateSpaceModel> state_aw;  // e_x -> u_mx
    std::optional<StateSpaceModel> input_aw;  // e_u -> u_mu
    SaturationSpec state_sat{};
    std::optional<SaturationSpec> input_sat;
    bool apply_input_sat = false;
    SignalGen reference;
    std::optional<SignalGen> meas_disturbance;  // adds to the monitored vector
    std::optional<ExogenousInput> exo;
    double horizon = 10.0;
    double step = 1e-3;
    Vec x0;  // plant initial state, zero when empty

    void validate() const;
};

// Row k of each matrix holds the signal at t(k).
struct SimulationTrace {
    Vec t;
    Mat x_full;  // plant states
    Mat x;       // monitored vector s
    Mat xhat;    // sat(s)
    Mat ex;      // xhat - x
    Mat u_c, u_mx, u_mu, u, uhat, eu;
    Mat y, r;
    Mat x_aw;    // state anti-windup compensator states (0 cols if static/none)
    double step = 0.0;
};

SimulationTrace simulate(const LoopConfig& cfg);

struct MetricsReport {
    double sat_error_energy_state = 0.0;  // integral ||xhat - x||^2
    double aw_energy_state = 0.0;         // integral ||u_mx||^2
    double aw_energy_input = 0.0;         // integral ||u_mu||^2
    double sat_error_energy_input = 0.0;  // integral ||uhat - u||^2
    double peak_abs_u = 0.0;
    Vec peak_violation;                   // per monitored channel
    double tracking_ise = 0.0;            // integral ||r - y||^2
    double horizon = 0.0;

    std::string to_json_string() const;
};

MetricsReport compute_metrics(const SimulationTrace& tr);

// Max over interior samples of
//   d/dt(z' P z) + alpha ||u_m||^2 + beta ||xhat-x||^2
//                - gamma_sat ||xhat||^2 - gamma_ctrl ||u_c||^2
// with V differentiated by central differences. z is the plant state when
// P is n x n, or (plant state, compensator state) when P is (n+nq) x (n+nq).
struct DissipationCheck {
    double max_residual = 0.0;
    double max_scaled = 0.0;  // residual / max(1, signal magnitude scale)
};

DissipationCheck dissipation_check(const SimulationTrace& tr, const Mat& P, double alpha,
                                   double beta, double gamma_sat, double gamma_ctrl);

void write_trace_csv(const SimulationTrace& tr, const std::string& path);

}  // namespace antw
