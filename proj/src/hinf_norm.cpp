#include "antw/hinf_norm.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace antw {

FrequencyResponder::FrequencyResponder(const StateSpaceModel& s) : D_(s.D), n_(s.order()) {
    if (n_ == 0) return;
    Eigen::HessenbergDecomposition<Mat> hd(s.A);
    Mat H = hd.matrixH();
    Mat Q = hd.matrixQ();
    H_ = H.cast<std::complex<double>>();
    Bh_ = (Q.transpose() * s.B).cast<std::complex<double>>();
    Ch_ = (s.C * Q).cast<std::complex<double>>();
}

CMat FrequencyResponder::response(double omega) const {
    if (n_ == 0) return D_.cast<std::complex<double>>();
    const std::complex<double> jw(0.0, omega);
    // solve (jwI - H) X = Bh with H upper Hessenberg: O(n^2) per column
    CMat M = -H_;
    M.diagonal().array() += jw;
    CMat X = Bh_;
    const int n = n_;
    // Gaussian elimination on the single subdiagonal with partial pivoting
    CMat U = M;
    std::vector<int> perm(n);
    for (int k = 0; k < n - 1; ++k) {
        if (std::abs(U(k + 1, k)) > std::abs(U(k, k))) {
            U.row(k).tail(n - k).swap(U.row(k + 1).tail(n - k));
            X.row(k).swap(X.row(k + 1));
        }
        if (U(k, k) == std::complex<double>(0.0, 0.0)) continue;
        std::complex<double> f = U(k + 1, k) / U(k, k);
        if (f != std::complex<double>(0.0, 0.0)) {
            U.row(k + 1).tail(n - k) -= f * U.row(k).tail(n - k);
            X.row(k + 1) -= f * X.row(k);
        }
    }
    for (int i = n - 1; i >= 0; --i) {
        for (int c = 0; c < X.cols(); ++c) {
            std::complex<double> acc = X(i, c);
            for (int j = i + 1; j < n; ++j) acc -= U(i, j) * X(j, c);
            X(i, c) = acc / U(i, i);
        }
    }
    return Ch_ * X + D_.cast<std::complex<double>>();
}

double FrequencyResponder::sigma_max_at(double omega) const {
    return sigma_max_complex(response(omega));
}

SweepResult sweep_max(const StateSpaceModel& s, const SweepSpec& spec, const ParallelConfig& par) {
    FrequencyResponder fr(s);
    const int N = std::max(2, spec.points);
    const double l0 = std::log10(spec.omega_min), l1 = std::log10(spec.omega_max);
    std::vector<double> vals(N);
    parallel_for(static_cast<std::size_t>(N), par, [&](std::size_t i) {
        double w = std::pow(10.0, l0 + (l1 - l0) * static_cast<double>(i) / (N - 1));
        double v = fr.sigma_max_at(w);
        vals[i] = std::isfinite(v) ? v : 0.0;
    });
    SweepResult r;
    int best = 0;
    for (int i = 1; i < N; ++i)
        if (vals[i] > vals[best]) best = i;
    r.peak = vals[best];
    r.peak_omega = std::pow(10.0, l0 + (l1 - l0) * static_cast<double>(best) / (N - 1));
    return r;
}

namespace {
// gamma is an upper bound iff the associated Hamiltonian has no eigenvalue
// within axis_tol of the imaginary axis.
bool gamma_is_upper_bound(const StateSpaceModel& s, double gamma, double axis_tol) {
    const int n = s.order();
    const Mat& A = s.A;
    const Mat& B = s.B;
    const Mat& C = s.C;
    const Mat& D = s.D;
    Mat R = gamma * gamma * Mat::Identity(s.inputs(), s.inputs()) - D.transpose() * D;
    Eigen::LLT<Mat> llt(R);
    if (llt.info() != Eigen::Success) return false;  // gamma <= sigma_max(D)
    Mat Rinv = llt.solve(Mat::Identity(R.rows(), R.cols()));
    Mat Abar = A + B * Rinv * D.transpose() * C;
    Mat H(2 * n, 2 * n);
    H.topLeftCorner(n, n) = Abar;
    H.topRightCorner(n, n) = B * Rinv * B.transpose();
    H.bottomLeftCorner(n, n) = -C.transpose() * (Mat::Identity(s.outputs(), s.outputs()) +
                                                 D * Rinv * D.transpose()) * C;
    H.bottomRightCorner(n, n) = -Abar.transpose();
    EigenResult er = eigenvalues(H);
    if (!er.converged) throw ConvergenceError("hinf_norm: Hamiltonian eigenvalues failed");
    for (int i = 0; i < er.values.size(); ++i) {
        double re = std::abs(er.values[i].real());
        double mag = std::abs(er.values[i]);
        if (re <= axis_tol * std::max(1.0, mag)) return false;
    }
    return true;
}
}  // namespace

HinfResult hinf_norm(const StateSpaceModel& s, double tol, const SweepSpec& sweep,
                     const ParallelConfig& par) {
    HinfResult out;
    if (s.order() == 0) {
        out.value = sigma_max(s.D);
        out.finite = true;
        out.sweep_peak = out.value;
        return out;
    }
    if (!is_hurwitz(s, 0.0)) return out;  // finite = false
    SweepResult sw = sweep_max(s, sweep, par);
    out.sweep_peak = sw.peak;
    out.sweep_peak_omega = sw.peak_omega;
    out.finite = true;

    const double axis_tol = 1e-7;
    double sd = sigma_max(s.D);
    double lo = std::max(sw.peak, sd);
    double hi = 2.0 * lo + 1.0;
    int guard = 0;
    while (!gamma_is_upper_bound(s, hi, axis_tol)) {
        hi *= 2.0;
        if (++guard > 60) throw ConvergenceError("hinf_norm: no upper bound found");
    }
    int iters = 0;
    while (hi - lo > tol * std::max(1.0, lo) && iters < 200) {
        double mid = 0.5 * (lo + hi);
        if (mid <= sd) {
            lo = mid;
        } else if (gamma_is_upper_bound(s, mid, axis_tol)) {
            hi = mid;
        } else {
            lo = mid;
        }
        ++iters;
    }
    out.bisection_iters = iters;
    out.value = 0.5 * (lo + hi);
    return out;
}

}  // namespace antw
