#include "antw/interconnect.hpp"

namespace antw {

int Interconnector::add_part(std::string name, StateSpaceModel model) {
    parts_.emplace_back(std::move(name), std::move(model));
    return static_cast<int>(parts_.size()) - 1;
}

int Interconnector::add_external_input(std::string name, int dim) {
    if (dim <= 0) throw DimensionError("add_external_input: dim must be positive");
    ext_.emplace_back(std::move(name), dim);
    return static_cast<int>(ext_.size()) - 1;
}

void Interconnector::connect(int dst_part, int dst_channel, Signal src, double gain) {
    if (dst_part < 0 || dst_part >= static_cast<int>(parts_.size()))
        throw DimensionError("connect: bad destination part");
    if (dst_channel < 0 || dst_channel >= parts_[dst_part].second.inputs())
        throw DimensionError("connect: bad destination channel");
    if (src.is_external()) {
        int id = src.ext_id();
        if (id < 0 || id >= static_cast<int>(ext_.size()) || src.channel < 0 ||
            src.channel >= ext_[id].second)
            throw DimensionError("connect: bad external source");
    } else {
        if (src.part >= static_cast<int>(parts_.size()) || src.channel < 0 ||
            src.channel >= parts_[src.part].second.outputs())
            throw DimensionError("connect: bad source signal");
    }
    wires_.push_back({dst_part, dst_channel, src, gain});
}

void Interconnector::connect_block(int dst_part, int dst_channel0, Signal src0, int dim,
                                   double gain) {
    for (int k = 0; k < dim; ++k)
        connect(dst_part, dst_channel0 + k, Signal{src0.part, src0.channel + k}, gain);
}

int Interconnector::add_output(std::string name, int dim) {
    if (dim <= 0) throw DimensionError("add_output: dim must be positive");
    outs_.emplace_back(std::move(name), dim);
    return static_cast<int>(outs_.size()) - 1;
}

void Interconnector::output_term(int output_id, int output_channel, Signal src, double gain) {
    if (output_id < 0 || output_id >= static_cast<int>(outs_.size()))
        throw DimensionError("output_term: bad output id");
    if (output_channel < 0 || output_channel >= outs_[output_id].second)
        throw DimensionError("output_term: bad output channel");
    if (src.is_external()) {
        int id = src.ext_id();
        if (id < 0 || id >= static_cast<int>(ext_.size()) || src.channel < 0 ||
            src.channel >= ext_[id].second)
            throw DimensionError("output_term: bad external source");
    } else {
        if (src.part >= static_cast<int>(parts_.size()) || src.channel < 0 ||
            src.channel >= parts_[src.part].second.outputs())
            throw DimensionError("output_term: bad source signal");
    }
    reads_.push_back({output_id, output_channel, src, gain});
}

void Interconnector::output_block(int output_id, Signal src0, int dim, double gain) {
    for (int k = 0; k < dim; ++k)
        output_term(output_id, k, Signal{src0.part, src0.channel + k}, gain);
}

StateSpaceModel Interconnector::build() const {
    int n = 0, mu = 0, py = 0, q = 0, pz = 0;
    std::vector<int> in_off(parts_.size()), out_off(parts_.size()), x_off(parts_.size());
    for (std::size_t i = 0; i < parts_.size(); ++i) {
        const auto& m = parts_[i].second;
        x_off[i] = n;
        in_off[i] = mu;
        out_off[i] = py;
        n += m.order();
        mu += m.inputs();
        py += m.outputs();
    }
    std::vector<int> ext_off(ext_.size());
    for (std::size_t i = 0; i < ext_.size(); ++i) {
        ext_off[i] = q;
        q += ext_[i].second;
    }
    std::vector<int> o_off(outs_.size());
    for (std::size_t i = 0; i < outs_.size(); ++i) {
        o_off[i] = pz;
        pz += outs_[i].second;
    }

    Mat A = Mat::Zero(n, n), B = Mat::Zero(n, mu), C = Mat::Zero(py, n), D = Mat::Zero(py, mu);
    for (std::size_t i = 0; i < parts_.size(); ++i) {
        const auto& m = parts_[i].second;
        A.block(x_off[i], x_off[i], m.order(), m.order()) = m.A;
        B.block(x_off[i], in_off[i], m.order(), m.inputs()) = m.B;
        C.block(out_off[i], x_off[i], m.outputs(), m.order()) = m.C;
        D.block(out_off[i], in_off[i], m.outputs(), m.inputs()) = m.D;
    }

    // u = L y + E w
    Mat L = Mat::Zero(mu, py), E = Mat::Zero(mu, q);
    for (const auto& c : wires_) {
        int row = in_off[c.dst] + c.dst_ch;
        if (c.src.is_external())
            E(row, ext_off[c.src.ext_id()] + c.src.channel) += c.gain;
        else
            L(row, out_off[c.src.part] + c.src.channel) += c.gain;
    }
    // z = F y + G w
    Mat F = Mat::Zero(pz, py), G = Mat::Zero(pz, q);
    for (const auto& c : reads_) {
        int row = o_off[c.dst] + c.dst_ch;
        if (c.src.is_external())
            G(row, ext_off[c.src.ext_id()] + c.src.channel) += c.gain;
        else
            F(row, out_off[c.src.part] + c.src.channel) += c.gain;
    }

    // y = Cx + D(Ly + Ew)  =>  (I - DL) y = Cx + DEw
    Mat M = Mat::Identity(py, py) - D * L;
    Eigen::FullPivLU<Mat> lu(M);
    double rcond = 1.0;
    if (py > 0) {
        double mx = lu.matrixLU().diagonal().cwiseAbs().maxCoeff();
        double mn = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
        rcond = (mx > 0) ? mn / mx : 0.0;
    }
    if (!lu.isInvertible() || rcond < 1e-12) {
        std::string who;
        for (const auto& p : parts_) who += who.empty() ? p.first : ", " + p.first;
        throw IllPosedLoopError("ill-posed algebraic loop through feedthrough of parts {" + who +
                                "}");
    }
    Mat Ycx = lu.solve(C);
    Mat Yw = lu.solve(D * E);

    auto out = StateSpaceModel::make(A + B * L * Ycx, B * (E + L * Yw), F * Ycx, F * Yw + G);
    for (const auto& e : ext_)
        for (int k = 0; k < e.second; ++k)
            out.input_labels.push_back(e.first + "[" + std::to_string(k) + "]");
    for (const auto& o : outs_)
        for (int k = 0; k < o.second; ++k)
            out.output_labels.push_back(o.first + "[" + std::to_string(k) + "]");
    return out;
}

StateSpaceModel anti_windup_sensitivity(const StateSpaceModel& G, const StateSpaceModel& Gmy) {
    if (Gmy.inputs() != G.outputs() || G.inputs() != Gmy.outputs())
        throw DimensionError("anti_windup_sensitivity: G and Gmy channel mismatch");
    const int p = G.outputs();
    Interconnector ic;
    int g = ic.add_part("G", G);
    int m = ic.add_part("Gmy", Gmy);
    int v = ic.add_external_input("v", p);
    // s = v - G u,  u = Gmy s
    ic.connect_block(m, 0, Signal::external(v, 0), p);
    ic.connect_block(m, 0, Signal::output(g, 0), p, -1.0);
    ic.connect_block(g, 0, Signal::output(m, 0), G.inputs());
    int o = ic.add_output("s", p);
    ic.output_block(o, Signal::external(v, 0), p);
    ic.output_block(o, Signal::output(g, 0), p, -1.0);
    return ic.build();
}

StateSpaceModel feedback_loop(const StateSpaceModel& plant, const StateSpaceModel& fb) {
    if (fb.inputs() != plant.outputs() || fb.outputs() != plant.inputs())
        throw DimensionError("feedback_loop: channel mismatch");
    Interconnector ic;
    int g = ic.add_part("plant", plant);
    int k = ic.add_part("fb", fb);
    int u = ic.add_external_input("u", plant.inputs());
    ic.connect_block(g, 0, Signal::external(u, 0), plant.inputs());
    ic.connect_block(g, 0, Signal::output(k, 0), plant.inputs(), -1.0);
    ic.connect_block(k, 0, Signal::output(g, 0), plant.outputs());
    int o = ic.add_output("y", plant.outputs());
    ic.output_block(o, Signal::output(g, 0), plant.outputs());
    return ic.build();
}

}  // namespace antw
