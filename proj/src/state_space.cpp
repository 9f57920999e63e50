#include "antw/state_space.hpp"

#include <json.hpp>

namespace antw {

StateSpaceModel StateSpaceModel::make(Mat A, Mat B, Mat C, Mat D) {
    if (A.rows() != A.cols()) throw DimensionError("StateSpaceModel: A must be square");
    if (B.rows() != A.rows()) throw DimensionError("StateSpaceModel: B row count != state count");
    if (C.cols() != A.rows()) throw DimensionError("StateSpaceModel: C col count != state count");
    if (D.rows() != C.rows() || D.cols() != B.cols())
        throw DimensionError("StateSpaceModel: D shape must be outputs x inputs");
    if (!A.allFinite() || !B.allFinite() || !C.allFinite() || !D.allFinite())
        throw Error("StateSpaceModel: non-finite entries");
    StateSpaceModel s;
    s.A = std::move(A);
    s.B = std::move(B);
    s.C = std::move(C);
    s.D = std::move(D);
    return s;
}

StateSpaceModel StateSpaceModel::gain(const Mat& D) {
    return make(Mat::Zero(0, 0), Mat::Zero(0, D.cols()), Mat::Zero(D.rows(), 0), D);
}

StateSpaceModel series(const StateSpaceModel& g1, const StateSpaceModel& g2) {
    if (g2.inputs() != g1.outputs()) throw DimensionError("series: channel mismatch");
    int n1 = g1.order(), n2 = g2.order();
    Mat A = Mat::Zero(n1 + n2, n1 + n2);
    A.topLeftCorner(n1, n1) = g1.A;
    A.bottomRightCorner(n2, n2) = g2.A;
    A.bottomLeftCorner(n2, n1) = g2.B * g1.C;
    Mat B(n1 + n2, g1.inputs());
    B.topRows(n1) = g1.B;
    B.bottomRows(n2) = g2.B * g1.D;
    Mat C(g2.outputs(), n1 + n2);
    C.leftCols(n1) = g2.D * g1.C;
    C.rightCols(n2) = g2.C;
    return StateSpaceModel::make(A, B, C, g2.D * g1.D);
}

StateSpaceModel parallel_sum(const StateSpaceModel& g1, const StateSpaceModel& g2) {
    if (g1.inputs() != g2.inputs() || g1.outputs() != g2.outputs())
        throw DimensionError("parallel_sum: channel mismatch");
    int n1 = g1.order(), n2 = g2.order();
    Mat A = Mat::Zero(n1 + n2, n1 + n2);
    A.topLeftCorner(n1, n1) = g1.A;
    A.bottomRightCorner(n2, n2) = g2.A;
    Mat B(n1 + n2, g1.inputs());
    B.topRows(n1) = g1.B;
    B.bottomRows(n2) = g2.B;
    Mat C(g1.outputs(), n1 + n2);
    C.leftCols(n1) = g1.C;
    C.rightCols(n2) = g2.C;
    return StateSpaceModel::make(A, B, C, g1.D + g2.D);
}

StateSpaceModel scale_output(const StateSpaceModel& g, double c) {
    return StateSpaceModel::make(g.A, g.B, c * g.C, c * g.D);
}

CMat frequency_response(const StateSpaceModel& s, double omega, double pole_tol) {
    const std::complex<double> jw(0.0, omega);
    if (s.order() == 0) return s.D.cast<std::complex<double>>();
    EigenResult er = eigenvalues(s.A);
    if (er.converged) {
        for (int i = 0; i < er.values.size(); ++i) {
            if (std::abs(er.values[i] - jw) < pole_tol * std::max(1.0, std::abs(jw)))
                throw Error("frequency_response: evaluation frequency coincides with a pole");
        }
    }
    CMat M = -s.A.cast<std::complex<double>>();
    M.diagonal().array() += jw;
    CMat X = solve_complex(M, s.B.cast<std::complex<double>>());
    return s.C.cast<std::complex<double>>() * X + s.D.cast<std::complex<double>>();
}

bool is_hurwitz(const StateSpaceModel& s, double tol) {
    if (s.order() == 0) return true;
    EigenResult r = eigenvalues(s.A);
    if (!r.converged) return false;
    for (int i = 0; i < r.values.size(); ++i)
        if (r.values[i].real() >= -tol) return false;
    return true;
}

StateSpaceModel replicate_diag(const StateSpaceModel& w, int p) {
    if (w.inputs() != 1 || w.outputs() != 1)
        throw DimensionError("replicate_diag: weight must be SISO");
    int n = w.order();
    Mat A = Mat::Zero(n * p, n * p), B = Mat::Zero(n * p, p),
        C = Mat::Zero(p, n * p), D = Mat::Zero(p, p);
    for (int k = 0; k < p; ++k) {
        A.block(k * n, k * n, n, n) = w.A;
        B.block(k * n, k, n, 1) = w.B;
        C.block(k, k * n, 1, n) = w.C;
        D(k, k) = w.D(0, 0);
    }
    return StateSpaceModel::make(A, B, C, D);
}

StateSpaceModel block_transfer(const std::vector<std::vector<StateSpaceModel>>& blocks) {
    if (blocks.empty() || blocks[0].empty()) throw DimensionError("block_transfer: empty grid");
    const std::size_t br = blocks.size(), bc = blocks[0].size();
    for (const auto& row : blocks)
        if (row.size() != bc) throw DimensionError("block_transfer: ragged grid");

    std::vector<int> row_dim(br), col_dim(bc);
    for (std::size_t i = 0; i < br; ++i) row_dim[i] = blocks[i][0].outputs();
    for (std::size_t j = 0; j < bc; ++j) col_dim[j] = blocks[0][j].inputs();
    int n = 0, p = 0, m = 0;
    for (std::size_t i = 0; i < br; ++i)
        for (std::size_t j = 0; j < bc; ++j) {
            if (blocks[i][j].outputs() != row_dim[i] || blocks[i][j].inputs() != col_dim[j])
                throw DimensionError("block_transfer: inconsistent block dims");
            n += blocks[i][j].order();
        }
    for (int d : row_dim) p += d;
    for (int d : col_dim) m += d;

    Mat A = Mat::Zero(n, n), B = Mat::Zero(n, m), C = Mat::Zero(p, n), D = Mat::Zero(p, m);
    int xoff = 0;
    for (std::size_t i = 0; i < br; ++i) {
        int roff = 0;
        for (std::size_t k = 0; k < i; ++k) roff += row_dim[k];
        int coff = 0;
        for (std::size_t j = 0; j < bc; ++j) {
            const auto& g = blocks[i][j];
            int ng = g.order();
            A.block(xoff, xoff, ng, ng) = g.A;
            B.block(xoff, coff, ng, g.inputs()) = g.B;
            C.block(roff, xoff, g.outputs(), ng) = g.C;
            D.block(roff, coff, g.outputs(), g.inputs()) += g.D;
            xoff += ng;
            coff += col_dim[j];
        }
    }
    return StateSpaceModel::make(A, B, C, D);
}

namespace {
nlohmann::json mat_to_json(const Mat& M) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < M.rows(); ++i) {
        nlohmann::json r = nlohmann::json::array();
        for (int j = 0; j < M.cols(); ++j) r.push_back(M(i, j));
        rows.push_back(r);
    }
    return rows;
}

Mat mat_from_json(const nlohmann::json& j, int forced_cols = -1) {
    int rows = static_cast<int>(j.size());
    int cols = rows > 0 ? static_cast<int>(j[0].size()) : std::max(0, forced_cols);
    Mat M(rows, cols);
    for (int i = 0; i < rows; ++i) {
        if (static_cast<int>(j[i].size()) != cols) throw Error("matrix json: ragged rows");
        for (int c = 0; c < cols; ++c) M(i, c) = j[i][c].get<double>();
    }
    return M;
}
}  // namespace

std::string to_json_string(const StateSpaceModel& s) {
    nlohmann::ordered_json j;
    j["A"] = mat_to_json(s.A);
    j["B"] = mat_to_json(s.B);
    j["C"] = mat_to_json(s.C);
    j["D"] = mat_to_json(s.D);
    j["labels"] = {{"inputs", s.input_labels}, {"outputs", s.output_labels}};
    return j.dump(2);
}

StateSpaceModel state_space_from_json_string(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    Mat D = mat_from_json(j.at("D"));
    Mat A = mat_from_json(j.at("A"));
    Mat B = mat_from_json(j.at("B"), static_cast<int>(D.cols()));
    Mat C = mat_from_json(j.at("C"));
    if (C.size() == 0) C = Mat::Zero(D.rows(), A.rows());
    if (B.size() == 0) B = Mat::Zero(A.rows(), D.cols());
    auto s = StateSpaceModel::make(A, B, C, D);
    if (j.contains("labels")) {
        const auto& l = j["labels"];
        if (l.contains("inputs")) s.input_labels = l["inputs"].get<std::vector<std::string>>();
        if (l.contains("outputs")) s.output_labels = l["outputs"].get<std::vector<std::string>>();
    }
    return s;
}

}  // namespace antw
