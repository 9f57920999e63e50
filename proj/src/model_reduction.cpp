#include "antw/model_reduction.hpp"

#include <Eigen/Eigenvalues>

namespace antw {

Mat solve_lyapunov(const Mat& A, const Mat& W) {
    if (A.rows() != A.cols() || W.rows() != W.cols() || A.rows() != W.rows())
        throw DimensionError("solve_lyapunov: dimension mismatch");
    const int n = static_cast<int>(A.rows());
    if (n == 0) return Mat(0, 0);
    Eigen::ComplexSchur<Mat> sch(A, true);
    if (sch.info() != Eigen::Success) throw ConvergenceError("solve_lyapunov: Schur failed");
    CMat T = sch.matrixT();
    const CMat& U = sch.matrixU();
    CMat F = U.adjoint() * W.cast<std::complex<double>>() * U;
    CMat Y = CMat::Zero(n, n);
    CMat Tadj = T.adjoint();
    // T Y + Y T^* + F = 0, column back-substitution
    for (int k = n - 1; k >= 0; --k) {
        CVec rhs = F.col(k) + Y * Tadj.col(k);
        CMat Tk = T;
        Tk.diagonal().array() += Tadj(k, k);
        Y.col(k) = solve_complex(Tk, -rhs);
    }
    Mat X = (U * Y * U.adjoint()).real();
    return 0.5 * (X + X.transpose());
}

StateSpaceModel balanced_truncate(const StateSpaceModel& s, double tol_rel, int max_order) {
    if (s.order() == 0) return s;
    if (!is_hurwitz(s, 0.0))
        throw Error("balanced_truncate: model must be stable");
    const int n = s.order();
    Mat P = solve_lyapunov(s.A, s.B * s.B.transpose());
    Mat Q = solve_lyapunov(s.A.transpose(), s.C.transpose() * s.C);
    // jitter keeps semidefinite Gramians factorizable when states are
    // unreachable/unobservable
    double jp = 1e-12 * std::max(1.0, P.cwiseAbs().maxCoeff());
    double jq = 1e-12 * std::max(1.0, Q.cwiseAbs().maxCoeff());
    Eigen::LLT<Mat> lp(P + jp * Mat::Identity(n, n));
    Eigen::LLT<Mat> lq(Q + jq * Mat::Identity(n, n));
    if (lp.info() != Eigen::Success || lq.info() != Eigen::Success)
        throw Error("balanced_truncate: Gramian factorization failed");
    Mat Sp = lp.matrixL();
    Mat Sq = lq.matrixL();
    Eigen::JacobiSVD<Mat> svd(Sq.transpose() * Sp, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Vec hsv = svd.singularValues();
    int r = n;
    if (max_order >= 0) r = std::min(r, max_order);
    double cut = tol_rel * (hsv.size() ? hsv(0) : 0.0);
    while (r > 1 && hsv(r - 1) < cut) --r;
    Mat Sr = hsv.head(r).cwiseSqrt().cwiseInverse().asDiagonal();
    Mat T = Sp * svd.matrixV().leftCols(r) * Sr;       // n x r
    Mat Ti = Sr * svd.matrixU().leftCols(r).transpose() * Sq.transpose();  // r x n
    return StateSpaceModel::make(Ti * s.A * T, Ti * s.B, s.C * T, s.D);
}

}  // namespace antw
