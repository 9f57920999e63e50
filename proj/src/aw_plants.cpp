#include "antw/aw_plants.hpp"

namespace antw {

void GeneralizedPlant::validate() const {
    if (P.inputs() != nw + nu || P.outputs() != nz + ny)
        throw DimensionError("GeneralizedPlant: channel partition does not cover the model");
}

namespace {
StateSpaceModel broadcast(const StateSpaceModel& W, int channels, const char* who) {
    if (W.inputs() == channels && W.outputs() == channels) return W;
    if (W.inputs() == 1 && W.outputs() == 1) return replicate_diag(W, channels);
    throw DimensionError(std::string(who) + ": weight must be SISO or match the channel count");
}
}  // namespace

GeneralizedPlant build_output_aw_plant(const StateSpaceModel& G, const StateSpaceModel& W1,
                                       const StateSpaceModel& W2) {
    const int p = G.outputs();
    const int m = G.inputs();
    StateSpaceModel w1 = broadcast(W1, p, "build_output_aw_plant W1");
    StateSpaceModel w2 = broadcast(W2, m, "build_output_aw_plant W2");

    Interconnector ic;
    int g = ic.add_part("G", G);
    int f1 = ic.add_part("W1", w1);
    int f2 = ic.add_part("W2", w2);
    int iy = ic.add_external_input("yhat", p);
    int iuc = ic.add_external_input("u_c", m);
    int iz2 = ic.add_external_input("z2t", m);

    // y = G(u_c + z2t)
    ic.connect_block(g, 0, Signal::external(iuc, 0), m);
    ic.connect_block(g, 0, Signal::external(iz2, 0), m);
    // W1 acts on yhat - y, W2 on the compensator output channel
    ic.connect_block(f1, 0, Signal::external(iy, 0), p);
    ic.connect_block(f1, 0, Signal::output(g, 0), p, -1.0);
    ic.connect_block(f2, 0, Signal::external(iz2, 0), m);

    int oz1 = ic.add_output("z1", p);
    ic.output_block(oz1, Signal::output(f1, 0), p);
    int oz2 = ic.add_output("z2", m);
    ic.output_block(oz2, Signal::output(f2, 0), m);
    int om = ic.add_output("err", p);
    ic.output_block(om, Signal::external(iy, 0), p);
    ic.output_block(om, Signal::output(g, 0), p, -1.0);

    GeneralizedPlant out;
    out.P = ic.build();
    out.nw = p + m;
    out.nu = m;
    out.nz = p + m;
    out.ny = p;
    out.validate();
    return out;
}

GeneralizedPlant build_joint_aw_plant(const StateSpaceModel& G, const StateSpaceModel& K,
                                      const StateSpaceModel& Wy, const StateSpaceModel& Wu) {
    const int p = G.outputs();
    const int m = G.inputs();
    if (K.inputs() != p || K.outputs() != m)
        throw DimensionError("build_joint_aw_plant: K must map the error vector to plant input");
    StateSpaceModel wy = broadcast(Wy, p, "build_joint_aw_plant Wy");
    StateSpaceModel wu = broadcast(Wu, m, "build_joint_aw_plant Wu");

    Interconnector ic;
    int g = ic.add_part("G", G);
    int k = ic.add_part("K", K);
    int fy = ic.add_part("Wy", wy);
    int fu = ic.add_part("Wu", wu);
    int iy = ic.add_external_input("yhat", p);
    int iw = ic.add_external_input("w", p);
    int ie = ic.add_external_input("e", p);
    int iu = ic.add_external_input("uhat", m);
    int imy = ic.add_external_input("u_my", m);
    int imu = ic.add_external_input("u_mu", p);

    // u = K(e + u_mu) + u_my, y = G u + w (w enters at the output)
    ic.connect_block(k, 0, Signal::external(ie, 0), p);
    ic.connect_block(k, 0, Signal::external(imu, 0), p);
    ic.connect_block(g, 0, Signal::output(k, 0), m);
    ic.connect_block(g, 0, Signal::external(imy, 0), m);

    // Wy on yhat - y - w; Wu on uhat - u
    ic.connect_block(fy, 0, Signal::external(iy, 0), p);
    ic.connect_block(fy, 0, Signal::output(g, 0), p, -1.0);
    ic.connect_block(fy, 0, Signal::external(iw, 0), p, -1.0);
    ic.connect_block(fu, 0, Signal::external(iu, 0), m);
    ic.connect_block(fu, 0, Signal::output(k, 0), m, -1.0);
    ic.connect_block(fu, 0, Signal::external(imy, 0), m, -1.0);

    int oz1 = ic.add_output("z1t", p);
    ic.output_block(oz1, Signal::output(fy, 0), p);
    int oz2 = ic.add_output("z2t", m);
    ic.output_block(oz2, Signal::output(fu, 0), m);
    int oey = ic.add_output("ey", p);
    ic.output_block(oey, Signal::external(iy, 0), p);
    ic.output_block(oey, Signal::output(g, 0), p, -1.0);
    ic.output_block(oey, Signal::external(iw, 0), p, -1.0);
    int oeu = ic.add_output("eu", m);
    ic.output_block(oeu, Signal::external(iu, 0), m);
    ic.output_block(oeu, Signal::output(k, 0), m, -1.0);
    ic.output_block(oeu, Signal::external(imy, 0), m, -1.0);

    GeneralizedPlant out;
    out.P = ic.build();
    out.nw = p + p + p + m;
    out.nu = m + p;
    out.nz = p + m;
    out.ny = p + m;
    out.validate();
    return out;
}

StateSpaceModel lower_lft(const GeneralizedPlant& gp, const StateSpaceModel& C) {
    gp.validate();
    if (C.inputs() != gp.ny || C.outputs() != gp.nu)
        throw DimensionError("lower_lft: compensator channels must match the plant partition");
    Interconnector ic;
    int p = ic.add_part("P", gp.P);
    int c = ic.add_part("C", C);
    int w = ic.add_external_input("w", gp.nw);
    ic.connect_block(p, 0, Signal::external(w, 0), gp.nw);
    // compensator inputs are the measurement outputs (below the z block)
    ic.connect_block(c, 0, Signal::output(p, gp.nz), gp.ny);
    ic.connect_block(p, gp.nw, Signal::output(c, 0), gp.nu);
    int oz = ic.add_output("z", gp.nz);
    ic.output_block(oz, Signal::output(p, 0), gp.nz);
    return ic.build();
}

}  // namespace antw
