#pragma once

#include <vector>

#include "antw/aw_plants.hpp"
#include "antw/hinf_norm.hpp"
#include "antw/parallel.hpp"

namespace antw {

// Compensator topology: block-diagonal list of MIMO rational blocks. Each
// block row shares one stable denominator of the given order; numerators are
// free (biproper). order 0 degenerates to a static gain.
struct CompensatorStructure {
    struct Block {
        int outputs = 1;
        int inputs = 1;
        int order = 0;
    };
    std::vector<Block> blocks;

    static CompensatorStructure static_gain(int outputs, int inputs);
    static CompensatorStructure single(int outputs, int inputs, int order);
    // diag(G_my, G_mu) with per-block channel counts
    static CompensatorStructure diagonal(int my_out, int my_in, int mu_out, int mu_in, int order);

    int total_outputs() const;
    int total_inputs() const;
    int parameter_count() const;
};

// theta layout per block row: [order pole parameters][per input: order+1
// descending numerator coefficients]. Pole parameters map through a
// softplus-plus-margin to stable denominators, so every theta yields a
// stable compensator.
StateSpaceModel realize_compensator(const CompensatorStructure& s, const Vec& theta);

// Exact embedding of a block-diagonal parameter vector into a single full
// block with the same row orders: cross-coupling numerators start at zero.
Vec embed_into_full(const CompensatorStructure& diag_s, const Vec& theta_diag,
                    const CompensatorStructure& full_s);

struct SynthOptions {
    int starts = 20;
    int evals_per_start = 5000;
    double nm_fraction = 0.35;      // tail budget for the Nelder-Mead polish
    SweepSpec sweep{1e-3, 1e4, 2000};
    int search_sweep_points = 250;  // coarse objective grid during the search
    std::uint64_t seed = 1;
    double stab_cap = 1e6;          // unstable iterates: cap * (1 + abscissa)
    double init_step = 0.5;
    double min_step = 1e-6;
    double hinf_tol = 1e-6;
    ParallelConfig par;
    std::vector<Vec> warm_starts;   // extra deterministic start points
};

struct SynthesisResult {
    StateSpaceModel compensator;
    std::vector<StateSpaceModel> blocks;
    Vec theta;
    double achieved_norm = 0.0;     // verified by hinf_norm on the closed loop
    double search_objective = 0.0;  // sweep surrogate at the optimum
    double open_loop_norm = 0.0;    // zero-compensator reference
    bool stable = false;
    int start_index = -1;
    std::vector<std::pair<int, double>> history;  // (evaluations, incumbent)
};

SynthesisResult synthesize_fixed_structure(const GeneralizedPlant& plant,
                                           const CompensatorStructure& structure,
                                           const SynthOptions& opts = {});

// Unstructured variant: one full block covering all channels.
SynthesisResult synthesize_full_matrix(const GeneralizedPlant& plant, int order,
                                       const SynthOptions& opts = {});

}  // namespace antw
