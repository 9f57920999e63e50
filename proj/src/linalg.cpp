#include "antw/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace antw {

EigenResult eigenvalues(const Mat& M) {
    if (M.rows() != M.cols()) throw DimensionError("eigenvalues: matrix must be square");
    if (!is_finite(M)) throw Error("eigenvalues: non-finite entries");
    EigenResult r;
    if (M.rows() == 0) {
        r.values = CVec(0);
        r.converged = true;
        return r;
    }
    Eigen::EigenSolver<Mat> es(M, /*computeEigenvectors=*/false);
    r.converged = (es.info() == Eigen::Success);
    if (r.converged) r.values = es.eigenvalues();
    return r;
}

double spectral_abscissa(const Mat& M) {
    if (M.rows() == 0) return -std::numeric_limits<double>::infinity();
    EigenResult r = eigenvalues(M);
    if (!r.converged) throw ConvergenceError("spectral_abscissa: eigenvalue iteration did not converge");
    double a = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < r.values.size(); ++i) a = std::max(a, r.values[i].real());
    return a;
}

bool is_finite(const Mat& M) { return M.allFinite(); }

bool is_symmetric(const Mat& M, double tol_rel) {
    if (M.rows() != M.cols()) return false;
    double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
    return (M - M.transpose()).cwiseAbs().maxCoeff() <= tol_rel * scale;
}

Vec symmetric_eigenvalues(const Mat& M) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (M + M.transpose()),
                                          Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw ConvergenceError("symmetric_eigenvalues: iteration failed");
    return es.eigenvalues();
}

double lambda_max_sym(const Mat& M) {
    if (M.rows() == 0) return -std::numeric_limits<double>::infinity();
    return symmetric_eigenvalues(M).maxCoeff();
}

double lambda_min_sym(const Mat& M) {
    if (M.rows() == 0) return std::numeric_limits<double>::infinity();
    return symmetric_eigenvalues(M).minCoeff();
}

bool is_negative_definite(const Mat& M, double tol) {
    if (M.rows() != M.cols()) throw DimensionError("is_negative_definite: matrix must be square");
    if (!is_symmetric(M)) throw Error("is_negative_definite: matrix asymmetric beyond tolerance");
    return lambda_max_sym(M) < -tol;
}

bool is_positive_definite(const Mat& M, double tol) {
    return is_negative_definite(-M, tol);
}

Mat solve(const Mat& A, const Mat& B) {
    if (A.rows() != A.cols()) throw DimensionError("solve: A must be square");
    if (A.rows() != B.rows()) throw DimensionError("solve: row mismatch between A and B");
    Eigen::FullPivLU<Mat> lu(A);
    double rcond = 0.0;
    if (A.rows() > 0) {
        double mx = lu.matrixLU().diagonal().cwiseAbs().maxCoeff();
        double mn = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
        rcond = (mx > 0) ? mn / mx : 0.0;
    }
    if (!lu.isInvertible() || rcond < 1e-14)
        throw SingularMatrixError("solve: numerically singular matrix", rcond);
    Mat X = lu.solve(B);
    double res = (A * X - B).norm();
    if (!(res <= kSolveResidualTol * std::max(1.0, B.norm()) * std::max(1.0, A.norm())))
        throw SingularMatrixError("solve: residual check failed", rcond);
    return X;
}

CMat solve_complex(const CMat& A, const CMat& B) {
    Eigen::PartialPivLU<CMat> lu(A);
    CMat X = lu.solve(B);
    if (!X.allFinite()) throw SingularMatrixError("solve_complex: singular matrix", 0.0);
    return X;
}

CholeskyResult cholesky_logdet(const Mat& M) {
    CholeskyResult out;
    if (M.rows() != M.cols()) throw DimensionError("cholesky_logdet: matrix must be square");
    if (!is_symmetric(M)) throw Error("cholesky_logdet: matrix asymmetric beyond tolerance");
    Eigen::LLT<Mat> llt(0.5 * (M + M.transpose()));
    if (llt.info() != Eigen::Success) return out;  // indefinite: flag stays false
    out.factor = llt.matrixL();
    // strictly positive pivots required; LLT can accept semidefinite edge cases
    double ld = 0.0;
    for (int i = 0; i < out.factor.rows(); ++i) {
        double d = out.factor(i, i);
        if (!(d > 0.0) || !std::isfinite(d)) return CholeskyResult{};
        ld += 2.0 * std::log(d);
    }
    out.logdet = ld;
    out.positive_definite = true;
    return out;
}

double sigma_max(const Mat& M) {
    if (M.rows() == 0 || M.cols() == 0) return 0.0;
    return M.jacobiSvd().singularValues()(0);
}

double sigma_max_complex(const CMat& M) {
    if (M.rows() == 0 || M.cols() == 0) return 0.0;
    return M.jacobiSvd().singularValues()(0);
}

std::uint64_t Rng::next_u64() {
    // splitmix64: small state, reproducible everywhere
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double Rng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u1 = 0.0;
    do {
        u1 = uniform();
    } while (u1 <= 0.0);
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
}

Mat Rng::normal_matrix(int rows, int cols) {
    Mat M(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) M(i, j) = normal();
    return M;
}

Mat random_spd(int n, Rng& rng) {
    Mat G = rng.normal_matrix(n, n);
    return G.transpose() * G / static_cast<double>(n) + Mat::Identity(n, n);
}

}  // namespace antw
