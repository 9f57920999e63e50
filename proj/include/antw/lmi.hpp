#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "antw/linalg.hpp"

namespace antw {

// Affine matrix expression in declared decision variables:
//   constant + sum_k L_k * V_k^(T) * R_k + sum_k x_k * M_k.
class AffineExpr {
  public:
    struct MatTerm {
        int var = -1;
        bool transposed = false;
        Mat left, right;
    };
    struct ScalTerm {
        int var = -1;
        Mat coeff;
    };

    AffineExpr() = default;
    static AffineExpr constant(Mat c);
    static AffineExpr zero(int rows, int cols);

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    AffineExpr lmul(const Mat& L) const;
    AffineExpr rmul(const Mat& R) const;
    AffineExpr transpose() const;
    AffineExpr operator-() const;

    friend AffineExpr operator+(AffineExpr a, const AffineExpr& b);
    friend AffineExpr operator-(AffineExpr a, const AffineExpr& b);
    friend AffineExpr operator*(double c, AffineExpr a);

    const Mat& const_part() const { return const_; }
    const std::vector<MatTerm>& mat_terms() const { return mterms_; }
    const std::vector<ScalTerm>& scal_terms() const { return sterms_; }

  private:
    friend class LmiProblem;
    friend class BlockGrid;
    int rows_ = 0, cols_ = 0;
    Mat const_;
    std::vector<MatTerm> mterms_;
    std::vector<ScalTerm> sterms_;
};

// expr + expr^T
AffineExpr sym(const AffineExpr& e);

// Symmetric block grid; fill the upper triangle, the mirror is implied.
class BlockGrid {
  public:
    BlockGrid(std::vector<int> row_sizes);
    void set(int i, int j, AffineExpr e);  // requires i <= j
    AffineExpr assemble() const;
    int dim() const { return total_; }

  private:
    std::vector<int> sizes_, offs_;
    int total_ = 0;
    std::vector<std::vector<std::optional<AffineExpr>>> cells_;
};

enum class VarKind { Symmetric, General, Scalar };

struct VarInfo {
    std::string name;
    VarKind kind;
    int rows = 0, cols = 0;
    int offset = 0;  // first scalar coordinate
    int count = 0;   // scalar coordinates
};

struct SdpOptions {
    double margin_tol_rel = 1e-9;     // strict feasibility threshold, scaled
    double strictness_rel = 1e-7;     // shift turning open constraints closed
    int max_inner = 60;               // Newton iterations per barrier stage
    double tau_max = 1e9;
    double deep_stop = 0.05;          // phase-1 early exit once t < -deep_stop (scaled)
    double var_box = 1e8;             // box barrier radius on scaled variables
};

struct IterRecord {
    int phase = 1;
    double tau = 0.0;
    int inner = 0;
    double value = 0.0;  // t (phase 1) or objective (phase 2)
};

struct SdpSolution {
    enum class Status { Feasible, Infeasible };
    Status status = Status::Infeasible;
    std::map<std::string, Mat> values;
    double margin = 0.0;  // max constraint eigenvalue at the solution (orig. scale)
    std::optional<double> objective;
    std::vector<IterRecord> log;

    bool feasible() const { return status == Status::Feasible; }
    std::string to_json_string() const;
};

// Affine LMI feasibility/minimization problem over named matrix variables.
class LmiProblem {
  public:
    int add_symmetric(const std::string& name, int n);
    int add_matrix(const std::string& name, int rows, int cols);
    int add_scalar(const std::string& name);

    AffineExpr var(int id) const;         // identity-wrapped variable expression
    AffineExpr scalar_times(int id, Mat coeff) const;

    // expr < 0 (strict, realized as expr <= -eps I).
    void require_negative_definite(AffineExpr e, const std::string& name);
    void require_positive_definite(AffineExpr e, const std::string& name);

    // minimize sum of coeff * entry(var,row,col)
    void objective_term(int var, int row, int col, double coeff);
    bool has_objective() const { return !obj_.empty(); }

    int num_vars() const { return static_cast<int>(vars_.size()); }
    int num_scalar_coords() const { return ncoords_; }
    const std::vector<VarInfo>& variables() const { return vars_; }

    // warm start: assignment for every variable (used by iterative redesigns)
    void set_initial(const std::map<std::string, Mat>& init) { init_ = init; }
    const std::map<std::string, Mat>& initial() const { return init_; }

    // dense view F_k(x) = F0 + sum_i x_i Fi used by the solver
    struct CompiledConstraint {
        std::string name;
        Mat F0;
        std::vector<Mat> Fi;
    };
    std::vector<CompiledConstraint> compile_constraints() const;

    Vec pack_values(const std::map<std::string, Mat>& values) const;
    std::map<std::string, Mat> unpack_values(const Vec& x) const;
    Vec objective_vector() const;

    std::string to_json_string() const;

  private:
    struct Constraint {
        std::string name;
        AffineExpr expr;  // must end up negative definite
    };

    Mat value_of(int var, const Vec& x) const;
    Mat eval_expr(const AffineExpr& e, const Vec& x) const;

    std::vector<VarInfo> vars_;
    std::vector<Constraint> cons_;
    std::vector<std::tuple<int, int, int, double>> obj_;
    std::map<std::string, Mat> init_;
    int ncoords_ = 0;
};

SdpSolution solve_sdp(const LmiProblem& p, const SdpOptions& opts = {});

}  // namespace antw
