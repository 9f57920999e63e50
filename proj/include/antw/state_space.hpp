#pragma once

#include <string>
#include <vector>

#include "antw/linalg.hpp"

namespace antw {

// Continuous-time LTI system  x' = A x + B u,  y = C x + D u.
// Immutable by convention after construction; all ops return new models.
struct StateSpaceModel {
    Mat A, B, C, D;
    std::vector<std::string> input_labels;   // optional
    std::vector<std::string> output_labels;  // optional

    int order() const { return static_cast<int>(A.rows()); }
    int inputs() const { return static_cast<int>(B.cols()); }
    int outputs() const { return static_cast<int>(C.rows()); }

    static StateSpaceModel make(Mat A, Mat B, Mat C, Mat D);
    // Static (memoryless) system y = D u.
    static StateSpaceModel gain(const Mat& D);
    static StateSpaceModel identity(int n) { return gain(Mat::Identity(n, n)); }
    static StateSpaceModel zero(int outputs, int inputs) {
        return gain(Mat::Zero(outputs, inputs));
    }
};

// y = g2(g1(u)).
StateSpaceModel series(const StateSpaceModel& g1, const StateSpaceModel& g2);
// y = g1(u) + g2(u).
StateSpaceModel parallel_sum(const StateSpaceModel& g1, const StateSpaceModel& g2);
StateSpaceModel scale_output(const StateSpaceModel& g, double c);

// C (jw I - A)^{-1} B + D. Throws when jw sits within tol of a pole of A.
CMat frequency_response(const StateSpaceModel& s, double omega, double pole_tol = 1e-9);

// All eigenvalues of A strictly left of -tol.
bool is_hurwitz(const StateSpaceModel& s, double tol = 1e-9);

// Broadcast a SISO model to p independent identical channels.
StateSpaceModel replicate_diag(const StateSpaceModel& w, int p);

// Stack models over a block-transfer grid: result(i,j) = blocks[i][j],
// inputs concatenated per column block, row outputs summed.
StateSpaceModel block_transfer(const std::vector<std::vector<StateSpaceModel>>& blocks);

std::string to_json_string(const StateSpaceModel& s);
StateSpaceModel state_space_from_json_string(const std::string& text);

}  // namespace antw
