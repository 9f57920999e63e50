#pragma once

#include <string>
#include <vector>

#include "antw/state_space.hpp"

namespace antw {

// Signal address inside an interconnection: output `channel` of part `part`,
// or channel of external input id when encoded via Signal::external().
struct Signal {
    int part = 0;     // >= 0: part output; < 0: external input id (-1 - id)
    int channel = 0;

    static Signal external(int ext_id, int channel = 0) { return Signal{-1 - ext_id, channel}; }
    static Signal output(int part, int channel = 0) { return Signal{part, channel}; }
    bool is_external() const { return part < 0; }
    int ext_id() const { return -1 - part; }
};

// Builds a single state-space model from labeled parts and a wiring list.
// Every part input and every declared output is a sum of gains times source
// signals. Feedthrough loops are eliminated algebraically; an ill-posed loop
// (singular I - D L) throws IllPosedLoopError naming the parts involved.
class Interconnector {
  public:
    int add_part(std::string name, StateSpaceModel model);
    int add_external_input(std::string name, int dim);

    void connect(int dst_part, int dst_channel, Signal src, double gain = 1.0);
    void connect_block(int dst_part, int dst_channel0, Signal src0, int dim, double gain = 1.0);

    int add_output(std::string name, int dim);
    void output_term(int output_id, int output_channel, Signal src, double gain = 1.0);
    void output_block(int output_id, Signal src0, int dim, double gain = 1.0);

    StateSpaceModel build() const;

  private:
    struct Conn {
        int dst = 0, dst_ch = 0;  // part id (or output id for output terms)
        Signal src;
        double gain = 1.0;
    };

    std::vector<std::pair<std::string, StateSpaceModel>> parts_;
    std::vector<std::pair<std::string, int>> ext_;
    std::vector<std::pair<std::string, int>> outs_;
    std::vector<Conn> wires_;    // into part inputs
    std::vector<Conn> reads_;    // into declared outputs
};

// S = (I + G Gmy)^{-1}: map from injected signal to the anti-windup loop's
// saturation error.
StateSpaceModel anti_windup_sensitivity(const StateSpaceModel& G, const StateSpaceModel& Gmy);

// Negative-feedback closure plant/fb, from external plant input to plant output.
StateSpaceModel feedback_loop(const StateSpaceModel& plant, const StateSpaceModel& fb);

}  // namespace antw
