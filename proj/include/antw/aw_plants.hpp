#pragma once

#include "antw/interconnect.hpp"
#include "antw/state_space.hpp"

namespace antw {

// Generalized plant with partitioned channels: exogenous inputs w, compensator
// inputs u, performance outputs z, measurement outputs y (to the compensator).
struct GeneralizedPlant {
    StateSpaceModel P;  // inputs [w | u], outputs [z | y]
    int nw = 0, nu = 0, nz = 0, ny = 0;

    void validate() const;
};

// Mixed-sensitivity plant for the output/state anti-windup problem.
// Inputs (yhat, u_c, z2t), outputs (z1, z2, yhat - y):
//   [[W1, -W1 G, -W1 G], [0, 0, W2], [I, -G, -G]].
// SISO weights are broadcast over the channel counts of G.
GeneralizedPlant build_output_aw_plant(const StateSpaceModel& G, const StateSpaceModel& W1,
                                       const StateSpaceModel& W2);

// Joint input-state anti-windup plant. Exogenous inputs (yhat, w, e, uhat),
// compensator outputs (u_my, u_mu); outputs (z1t, z2t, yhat - y, uhat - u):
//   [[Wy, -Wy, -Wy G K, 0, -Wy G, -Wy G K],
//    [0,   0,  -Wu K,   Wu, -Wu,  -Wu K],
//    [I,  -I,  -G K,    0,  -G,   -G K],
//    [0,   0,  -K,      I,  -I,   -K]]
// where u = K(e + u_mu) + u_my drives the plant and w is an output
// disturbance (zero in the bundled scenarios).
GeneralizedPlant build_joint_aw_plant(const StateSpaceModel& G, const StateSpaceModel& K,
                                      const StateSpaceModel& Wy, const StateSpaceModel& Wu);

// Lower LFT F_l(P, C): closes u = C y, maps w -> z.
StateSpaceModel lower_lft(const GeneralizedPlant& P, const StateSpaceModel& C);

}  // namespace antw
