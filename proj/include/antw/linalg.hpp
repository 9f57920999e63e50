#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>

#include "antw/errors.hpp"

namespace antw {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

constexpr double kSymTolRel = 1e-9;       // symmetry check, relative to ||M||
constexpr double kDefiniteTol = 1e-8;     // definiteness margin
constexpr double kSolveResidualTol = 1e-10;

// Eigenvalues of a general real square matrix. converged=false signals the
// QR iteration hit its cap; values are not usable in that case.
struct EigenResult {
    CVec values;
    bool converged = false;
};

EigenResult eigenvalues(const Mat& M);

// Max real part over the spectrum (spectral abscissa). Throws on non-convergence.
double spectral_abscissa(const Mat& M);

bool is_finite(const Mat& M);
bool is_symmetric(const Mat& M, double tol_rel = kSymTolRel);

// Eigenvalues of a symmetric matrix, ascending.
Vec symmetric_eigenvalues(const Mat& M);
double lambda_max_sym(const Mat& M);
double lambda_min_sym(const Mat& M);

// True iff max eigenvalue < -tol. Throws DimensionError / Error if M is not
// square or is asymmetric beyond the relative symmetry tolerance.
bool is_negative_definite(const Mat& M, double tol = kDefiniteTol);
bool is_positive_definite(const Mat& M, double tol = kDefiniteTol);

// Solves A X = B. Throws SingularMatrixError (with rcond estimate) when A is
// numerically singular; the result satisfies ||A X - B|| <= tol * max(1,||B||).
Mat solve(const Mat& A, const Mat& B);

// Complex linear solve for frequency-response work.
CMat solve_complex(const CMat& A, const CMat& B);

struct CholeskyResult {
    bool positive_definite = false;
    Mat factor;      // lower triangular, M = L L^T (valid iff positive_definite)
    double logdet = 0.0;
};

// Attempted Cholesky factorization; indefinite input is reported through the
// flag (domain test for the barrier solver), never thrown.
CholeskyResult cholesky_logdet(const Mat& M);

// Largest singular value.
double sigma_max(const Mat& M);
double sigma_max_complex(const CMat& M);

// Deterministic RNG with portable uniform/normal streams.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

    std::uint64_t next_u64();
    double uniform();                       // [0,1)
    double uniform(double lo, double hi);
    double normal();                        // standard normal, Box-Muller

    Mat normal_matrix(int rows, int cols);

  private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Wishart-style SPD draw G^T G / n + I.
Mat random_spd(int n, Rng& rng);

}  // namespace antw
