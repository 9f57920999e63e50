#pragma once

#include <optional>
#include <vector>

#include "antw/lmi.hpp"
#include "antw/parallel.hpp"
#include "antw/state_space.hpp"

namespace antw {

// Weights of the disturbance-attenuation inequality
//   alpha ||u_m||^2 + beta ||xhat - x||^2 < gamma_sat ||xhat||^2 + gamma_ctrl ||u_c||^2.
// gamma_sat multiplies the saturated-state channel (minimized by the design
// iteration); gamma_ctrl multiplies the nominal-control channel (fixed input).
struct AwWeights {
    double alpha = 1e-3;
    double beta = 1.0;
    double gamma_ctrl = 1.0;
};

// LMI in (Q symmetric > 0, Y) for a constant-gain state anti-windup
// compensator at a fixed attenuation level gamma_sat and linearization
// point Qc. Block rows: (x, u_c, xhat, aug_beta, aug_alpha).
LmiProblem build_static_aw_lmi(const Mat& A, const Mat& B, const AwWeights& w, double gamma_sat,
                               const Mat& Qc);

// LMI in (Q1 symmetric > 0, Y1, Y2, YA) for the dynamic compensator
// (A_q, B_q = I, K_m1, K_m2) with the structured Lyapunov factor
// [[Q1, h1 Q1],[h1 Q1, h2 Q1]], h2 > h1^2 > 0.
LmiProblem build_dynamic_aw_lmi(const Mat& A, const Mat& B, const AwWeights& w, double gamma_sat,
                                double h1, double h2, const Mat& Qc);

struct DesignOptions {
    int max_outer = 50;              // linearization-point updates
    double q_tol_rel = 1e-6;         // stop when ||Q - Qc|| <= tol * ||Q||
    int restart_budget = 200;        // random SPD draws for the initial Qc
    std::uint64_t seed = 1;
    double gamma_init = 100.0;       // first feasibility level (expanded x10 as needed)
    double gamma_cap = 1e9;
    int bisect_iters = 40;
    double bisect_tol_rel = 1e-3;
    SdpOptions sdp;
    ParallelConfig par;
    std::vector<std::pair<double, double>> h_grid = {
        {0.1, 1.0}, {0.1, 2.0}, {0.1, 5.0}, {0.3, 1.0}, {0.3, 2.0},
        {0.3, 5.0}, {0.5, 1.0}, {0.5, 2.0}, {0.5, 5.0}};
};

struct StaticAwDesign {
    Mat Km;
    Mat Q, Y, Qc;
    double gamma_sat = 0.0;
    AwWeights weights;
    SdpSolution certificate;
    std::vector<double> gamma_history;  // accepted level per outer round
    int restarts_used = 0;

    StateSpaceModel compensator() const { return StateSpaceModel::gain(Km); }
};

struct DynamicAwDesign {
    Mat Aq, Km1, Km2;  // B_q = I
    Mat Q1, Qc;
    double h1 = 0.0, h2 = 0.0;
    double gamma_sat = 0.0;
    AwWeights weights;
    SdpSolution certificate;
    std::vector<double> gamma_history;
    int restarts_used = 0;

    Mat augmented_a(const Mat& A, const Mat& B) const;
    // compensator as a system from (xhat - x) to u_m
    StateSpaceModel compensator() const;
};

StaticAwDesign design_static_aw(const Mat& A, const Mat& B, const AwWeights& w,
                                const DesignOptions& opts = {});

DynamicAwDesign design_dynamic_aw(const Mat& A, const Mat& B, const AwWeights& w,
                                  const DesignOptions& opts = {});

// Pre-congruence dissipation matrix for the constant-gain design, blocks
// (x, u_c, xhat, aug_beta, aug_alpha) with P = Q^{-1}: negative definiteness
// certifies internal stability plus the attenuation inequality.
Mat static_dissipation_matrix(const Mat& A, const Mat& B, const Mat& Km, const Mat& P,
                              const AwWeights& w, double gamma_sat);

// Same for the dynamic design on the augmented state (x, q).
Mat dynamic_dissipation_matrix(const Mat& A, const Mat& B, const DynamicAwDesign& d,
                               const Mat& P);

struct CertificateReport {
    bool pass = false;
    bool closed_loop_hurwitz = false;
    double dissipation_max_eig = 0.0;   // must be < 0
    double linearization_gap_min = 0.0;  // min eig of gamma (Q-Qc)'(Q-Qc), >= 0
};

CertificateReport verify_static_aw(const StaticAwDesign& d, const Mat& A, const Mat& B);
CertificateReport verify_dynamic_aw(const DynamicAwDesign& d, const Mat& A, const Mat& B);

}  // namespace antw
