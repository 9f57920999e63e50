#include "antw/lmi.hpp"

#include <json.hpp>

namespace antw {

AffineExpr AffineExpr::constant(Mat c) {
    AffineExpr e;
    e.rows_ = static_cast<int>(c.rows());
    e.cols_ = static_cast<int>(c.cols());
    e.const_ = std::move(c);
    return e;
}

AffineExpr AffineExpr::zero(int rows, int cols) { return constant(Mat::Zero(rows, cols)); }

AffineExpr AffineExpr::lmul(const Mat& L) const {
    if (L.cols() != rows_) throw DimensionError("AffineExpr::lmul: shape mismatch");
    AffineExpr e = *this;
    e.rows_ = static_cast<int>(L.rows());
    e.const_ = L * const_;
    for (auto& t : e.mterms_) t.left = L * t.left;
    for (auto& t : e.sterms_) t.coeff = L * t.coeff;
    return e;
}

AffineExpr AffineExpr::rmul(const Mat& R) const {
    if (R.rows() != cols_) throw DimensionError("AffineExpr::rmul: shape mismatch");
    AffineExpr e = *this;
    e.cols_ = static_cast<int>(R.cols());
    e.const_ = const_ * R;
    for (auto& t : e.mterms_) t.right = t.right * R;
    for (auto& t : e.sterms_) t.coeff = t.coeff * R;
    return e;
}

AffineExpr AffineExpr::transpose() const {
    AffineExpr e;
    e.rows_ = cols_;
    e.cols_ = rows_;
    e.const_ = const_.transpose();
    for (const auto& t : mterms_) {
        MatTerm nt;
        nt.var = t.var;
        nt.transposed = !t.transposed;
        nt.left = t.right.transpose();
        nt.right = t.left.transpose();
        e.mterms_.push_back(std::move(nt));
    }
    for (const auto& t : sterms_) e.sterms_.push_back({t.var, t.coeff.transpose()});
    return e;
}

AffineExpr AffineExpr::operator-() const { return -1.0 * AffineExpr(*this); }

AffineExpr operator+(AffineExpr a, const AffineExpr& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
        throw DimensionError("AffineExpr: addition shape mismatch");
    a.const_ += b.const_;
    a.mterms_.insert(a.mterms_.end(), b.mterms_.begin(), b.mterms_.end());
    a.sterms_.insert(a.sterms_.end(), b.sterms_.begin(), b.sterms_.end());
    return a;
}

AffineExpr operator-(AffineExpr a, const AffineExpr& b) { return std::move(a) + (-1.0 * b); }

AffineExpr operator*(double c, AffineExpr a) {
    a.const_ *= c;
    for (auto& t : a.mterms_) t.left *= c;
    for (auto& t : a.sterms_) t.coeff *= c;
    return a;
}

AffineExpr sym(const AffineExpr& e) { return e + e.transpose(); }

BlockGrid::BlockGrid(std::vector<int> row_sizes) : sizes_(std::move(row_sizes)) {
    offs_.resize(sizes_.size());
    for (std::size_t i = 0; i < sizes_.size(); ++i) {
        offs_[i] = total_;
        total_ += sizes_[i];
    }
    cells_.resize(sizes_.size());
    for (auto& row : cells_) row.resize(sizes_.size());
}

void BlockGrid::set(int i, int j, AffineExpr e) {
    if (i < 0 || j < i || j >= static_cast<int>(sizes_.size()))
        throw DimensionError("BlockGrid::set: fill the upper triangle only");
    if (e.rows() != sizes_[i] || e.cols() != sizes_[j])
        throw DimensionError("BlockGrid::set: block shape mismatch");
    cells_[i][j] = std::move(e);
}

AffineExpr BlockGrid::assemble() const {
    const int N = total_;
    const int nb = static_cast<int>(sizes_.size());
    AffineExpr out = AffineExpr::zero(N, N);
    auto embed = [&](const AffineExpr& e, int i, int j) {
        Mat Er = Mat::Zero(N, sizes_[i]);
        Er.block(offs_[i], 0, sizes_[i], sizes_[i]).setIdentity();
        Mat Ec = Mat::Zero(sizes_[j], N);
        Ec.block(0, offs_[j], sizes_[j], sizes_[j]).setIdentity();
        return e.lmul(Er).rmul(Ec);
    };
    for (int i = 0; i < nb; ++i)
        for (int j = i; j < nb; ++j) {
            if (!cells_[i][j]) continue;
            const AffineExpr& e = *cells_[i][j];
            if (i == j) {
                out = out + embed(e, i, i);
            } else {
                out = out + embed(e, i, j) + embed(e.transpose(), j, i);
            }
        }
    return out;
}

int LmiProblem::add_symmetric(const std::string& name, int n) {
    VarInfo v{name, VarKind::Symmetric, n, n, ncoords_, n * (n + 1) / 2};
    ncoords_ += v.count;
    vars_.push_back(v);
    return static_cast<int>(vars_.size()) - 1;
}

int LmiProblem::add_matrix(const std::string& name, int rows, int cols) {
    VarInfo v{name, VarKind::General, rows, cols, ncoords_, rows * cols};
    ncoords_ += v.count;
    vars_.push_back(v);
    return static_cast<int>(vars_.size()) - 1;
}

int LmiProblem::add_scalar(const std::string& name) {
    VarInfo v{name, VarKind::Scalar, 1, 1, ncoords_, 1};
    ncoords_ += 1;
    vars_.push_back(v);
    return static_cast<int>(vars_.size()) - 1;
}

AffineExpr LmiProblem::var(int id) const {
    const VarInfo& v = vars_.at(id);
    AffineExpr e;
    e.rows_ = v.rows;
    e.cols_ = v.cols;
    e.const_ = Mat::Zero(v.rows, v.cols);
    AffineExpr::MatTerm t;
    t.var = id;
    t.left = Mat::Identity(v.rows, v.rows);
    t.right = Mat::Identity(v.cols, v.cols);
    e.mterms_.push_back(std::move(t));
    return e;
}

AffineExpr LmiProblem::scalar_times(int id, Mat coeff) const {
    const VarInfo& v = vars_.at(id);
    if (v.kind != VarKind::Scalar) throw DimensionError("scalar_times: variable is not scalar");
    AffineExpr e;
    e.rows_ = static_cast<int>(coeff.rows());
    e.cols_ = static_cast<int>(coeff.cols());
    e.const_ = Mat::Zero(e.rows_, e.cols_);
    e.sterms_.push_back({id, std::move(coeff)});
    return e;
}

void LmiProblem::require_negative_definite(AffineExpr e, const std::string& name) {
    if (e.rows() != e.cols()) throw DimensionError("constraint must be square");
    cons_.push_back({name, std::move(e)});
}

void LmiProblem::require_positive_definite(AffineExpr e, const std::string& name) {
    require_negative_definite(-e, name);
}

void LmiProblem::objective_term(int var, int row, int col, double coeff) {
    const VarInfo& v = vars_.at(var);
    if (row < 0 || row >= v.rows || col < 0 || col >= v.cols)
        throw DimensionError("objective_term: bad entry");
    obj_.emplace_back(var, row, col, coeff);
}

Mat LmiProblem::value_of(int var, const Vec& x) const {
    const VarInfo& v = vars_.at(var);
    Mat M = Mat::Zero(v.rows, v.cols);
    if (v.kind == VarKind::Symmetric) {
        int k = v.offset;
        for (int i = 0; i < v.rows; ++i)
            for (int j = i; j < v.cols; ++j) {
                M(i, j) = x[k];
                M(j, i) = x[k];
                ++k;
            }
    } else {
        int k = v.offset;
        for (int i = 0; i < v.rows; ++i)
            for (int j = 0; j < v.cols; ++j) M(i, j) = x[k++];
    }
    return M;
}

Mat LmiProblem::eval_expr(const AffineExpr& e, const Vec& x) const {
    Mat M = e.const_part();
    for (const auto& t : e.mat_terms()) {
        Mat V = value_of(t.var, x);
        if (t.transposed) V.transposeInPlace();
        M += t.left * V * t.right;
    }
    for (const auto& t : e.scal_terms()) M += x[vars_.at(t.var).offset] * t.coeff;
    return M;
}

std::vector<LmiProblem::CompiledConstraint> LmiProblem::compile_constraints() const {
    std::vector<CompiledConstraint> out;
    Vec x0 = Vec::Zero(ncoords_);
    for (const auto& con : cons_) {
        CompiledConstraint cc;
        cc.name = con.name;
        Mat F0 = eval_expr(con.expr, x0);
        cc.F0 = 0.5 * (F0 + F0.transpose());
        cc.Fi.resize(ncoords_);
        for (int i = 0; i < ncoords_; ++i) {
            Vec xe = Vec::Zero(ncoords_);
            xe[i] = 1.0;
            Mat F = eval_expr(con.expr, xe) - F0;
            cc.Fi[i] = 0.5 * (F + F.transpose());
        }
        out.push_back(std::move(cc));
    }
    return out;
}

Vec LmiProblem::objective_vector() const {
    Vec c = Vec::Zero(ncoords_);
    for (const auto& [var, row, col, coeff] : obj_) {
        const VarInfo& v = vars_[var];
        int k;
        if (v.kind == VarKind::Symmetric) {
            int i = std::min(row, col), j = std::max(row, col);
            k = v.offset;
            for (int r = 0; r < i; ++r) k += v.cols - r;
            k += j - i;
        } else {
            k = v.offset + row * v.cols + col;
        }
        c[k] += coeff;
    }
    return c;
}

Vec LmiProblem::pack_values(const std::map<std::string, Mat>& values) const {
    Vec x = Vec::Zero(ncoords_);
    for (const auto& v : vars_) {
        auto it = values.find(v.name);
        if (it == values.end()) continue;
        const Mat& M = it->second;
        if (M.rows() != v.rows || M.cols() != v.cols)
            throw DimensionError("pack: shape mismatch for " + v.name);
        int k = v.offset;
        if (v.kind == VarKind::Symmetric) {
            for (int i = 0; i < v.rows; ++i)
                for (int j = i; j < v.cols; ++j) x[k++] = 0.5 * (M(i, j) + M(j, i));
        } else {
            for (int i = 0; i < v.rows; ++i)
                for (int j = 0; j < v.cols; ++j) x[k++] = M(i, j);
        }
    }
    return x;
}

std::map<std::string, Mat> LmiProblem::unpack_values(const Vec& x) const {
    std::map<std::string, Mat> out;
    for (std::size_t i = 0; i < vars_.size(); ++i)
        out[vars_[i].name] = value_of(static_cast<int>(i), x);
    return out;
}

namespace {
nlohmann::json mat_json(const Mat& M) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < M.rows(); ++i) {
        nlohmann::json r = nlohmann::json::array();
        for (int j = 0; j < M.cols(); ++j) r.push_back(M(i, j));
        rows.push_back(r);
    }
    return rows;
}
}  // namespace

std::string LmiProblem::to_json_string() const {
    nlohmann::ordered_json j;
    j["variables"] = nlohmann::json::array();
    for (const auto& v : vars_) {
        j["variables"].push_back(
            {{"name", v.name},
             {"kind", v.kind == VarKind::Symmetric ? "symmetric"
                      : v.kind == VarKind::General ? "general"
                                                   : "scalar"},
             {"rows", v.rows},
             {"cols", v.cols}});
    }
    j["constraints"] = nlohmann::json::array();
    Vec x0 = Vec::Zero(ncoords_);
    for (const auto& c : cons_) {
        nlohmann::ordered_json jc;
        jc["name"] = c.name;
        jc["dim"] = c.expr.rows();
        jc["F0"] = mat_json(eval_expr(c.expr, x0));
        nlohmann::json fis = nlohmann::json::array();
        for (int k = 0; k < ncoords_; ++k) {
            Vec xe = Vec::Zero(ncoords_);
            xe[k] = 1.0;
            Mat Fk = eval_expr(c.expr, xe) - eval_expr(c.expr, x0);
            if (Fk.cwiseAbs().maxCoeff() > 0) fis.push_back({{"coord", k}, {"F", mat_json(Fk)}});
        }
        jc["Fi"] = fis;
        j["constraints"].push_back(jc);
    }
    return j.dump(2);
}

std::string SdpSolution::to_json_string() const {
    nlohmann::ordered_json j;
    j["status"] = feasible() ? "feasible" : "infeasible";
    j["margin"] = margin;
    if (objective) j["objective"] = *objective;
    nlohmann::ordered_json vals;
    for (const auto& [name, M] : values) vals[name] = mat_json(M);
    j["values"] = vals;
    nlohmann::json log = nlohmann::json::array();
    for (const auto& r : this->log)
        log.push_back({{"phase", r.phase}, {"tau", r.tau}, {"inner", r.inner}, {"value", r.value}});
    j["log"] = log;
    return j.dump(2);
}

}  // namespace antw
