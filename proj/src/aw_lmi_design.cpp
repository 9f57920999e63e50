#include "antw/aw_lmi_design.hpp"

#include <cmath>

namespace antw {

namespace {
void check_weights(const AwWeights& w) {
    if (!(w.alpha > 0.0) || !(w.beta > 0.0) || !(w.gamma_ctrl > 0.0))
        throw DimensionError("anti-windup weights must be strictly positive");
}
void check_ab(const Mat& A, const Mat& B) {
    if (A.rows() != A.cols()) throw DimensionError("A must be square");
    if (B.rows() != A.rows()) throw DimensionError("B rows must match A");
}
}  // namespace

LmiProblem build_static_aw_lmi(const Mat& A, const Mat& B, const AwWeights& w, double gamma_sat,
                               const Mat& Qc) {
    check_weights(w);
    check_ab(A, B);
    if (!(gamma_sat > 0.0)) throw DimensionError("gamma_sat must be positive");
    const int n = static_cast<int>(A.rows());
    const int m = static_cast<int>(B.cols());
    if (Qc.rows() != n || Qc.cols() != n || !is_symmetric(Qc))
        throw DimensionError("Qc must be symmetric n x n");

    LmiProblem p;
    int q = p.add_symmetric("Q", n);
    int y = p.add_matrix("Y", m, n);
    auto Q = p.var(q);
    auto Y = p.var(y);
    const Mat In = Mat::Identity(n, n), Im = Mat::Identity(m, m);

    BlockGrid J({n, m, n, n, m});
    J.set(0, 0, Q.lmul(A) + Q.rmul(A.transpose()) - Y.lmul(B) - Y.transpose().rmul(B.transpose()));
    J.set(0, 1, AffineExpr::constant(B));
    J.set(0, 2, Y.lmul(B));
    J.set(0, 3, -w.beta * Q);
    J.set(0, 4, -w.alpha * Y.transpose());
    J.set(1, 1, AffineExpr::constant(-w.gamma_ctrl * Im));
    J.set(2, 2, -gamma_sat * (Q.rmul(Qc) + Q.lmul(Qc)) +
                    AffineExpr::constant(gamma_sat * Qc * Qc));
    J.set(2, 3, w.beta * Q);
    J.set(2, 4, w.alpha * Y.transpose());
    J.set(3, 3, AffineExpr::constant(-w.beta * In));
    J.set(4, 4, AffineExpr::constant(-w.alpha * Im));

    p.require_negative_definite(J.assemble(), "J");
    p.require_positive_definite(p.var(q), "Q_pd");
    return p;
}

LmiProblem build_dynamic_aw_lmi(const Mat& A, const Mat& B, const AwWeights& w, double gamma_sat,
                                double h1, double h2, const Mat& Qc) {
    check_weights(w);
    check_ab(A, B);
    if (!(h1 > 0.0) || !(h2 > h1 * h1))
        throw DimensionError("require h2 > h1^2 > 0");
    if (!(gamma_sat > 0.0)) throw DimensionError("gamma_sat must be positive");
    const int n = static_cast<int>(A.rows());
    const int m = static_cast<int>(B.cols());
    if (Qc.rows() != n || Qc.cols() != n || !is_symmetric(Qc))
        throw DimensionError("Qc must be symmetric n x n");

    LmiProblem p;
    int q1 = p.add_symmetric("Q1", n);
    int y1 = p.add_matrix("Y1", m, n);
    int y2 = p.add_matrix("Y2", m, n);
    int ya = p.add_matrix("YA", n, n);
    auto Q1 = p.var(q1);
    auto Y1 = p.var(y1);
    auto Y2 = p.var(y2);
    auto YA = p.var(ya);
    const Mat In = Mat::Identity(n, n), Im = Mat::Identity(m, m);

    // G11 = Atilde * Qbig expressed in the decision variables, with
    // Atilde = [[A - B Km1, B Km2], [-I, Aq]] and Qbig = [[Q1,h1Q1],[h1Q1,h2Q1]].
    auto g11_tl = Q1.lmul(A) - Y1.lmul(B) + h1 * Y2.lmul(B);
    auto g11_tr = h1 * (Q1.lmul(A) - Y1.lmul(B)) + h2 * Y2.lmul(B);
    auto g11_bl = -1.0 * Q1 + h1 * YA;
    auto g11_br = -h1 * Q1 + h2 * YA;

    // embed the 2x2 sub-grid into one (2n x 2n) expression
    Mat Etop = Mat::Zero(2 * n, n), Ebot = Mat::Zero(2 * n, n);
    Etop.topRows(n).setIdentity();
    Ebot.bottomRows(n).setIdentity();
    auto G11 = g11_tl.lmul(Etop).rmul(Etop.transpose()) +
               g11_tr.lmul(Etop).rmul(Ebot.transpose()) +
               g11_bl.lmul(Ebot).rmul(Etop.transpose()) +
               g11_br.lmul(Ebot).rmul(Ebot.transpose());

    Mat Bu = Mat::Zero(2 * n, m);
    Bu.topRows(n) = B;

    auto G13 = Y1.lmul(Etop * B) + Q1.lmul(Ebot);
    // columns (aug_beta | aug_alpha)
    Mat Eleft = Mat::Zero(n, n + m), Eright = Mat::Zero(m, n + m);
    Eleft.leftCols(n).setIdentity();
    Eright.rightCols(m).setIdentity();
    auto G14 = (-w.beta * (Q1.lmul(Etop) + h1 * Q1.lmul(Ebot))).rmul(Eleft) +
               (w.alpha * ((-1.0 * Y1.transpose() + h1 * Y2.transpose()).lmul(Etop) +
                           (-h1 * Y1.transpose() + h2 * Y2.transpose()).lmul(Ebot)))
                   .rmul(Eright);

    auto G33 = -gamma_sat * (Q1.rmul(Qc) + Q1.lmul(Qc)) +
               AffineExpr::constant(gamma_sat * Qc * Qc);
    auto G34 = (w.beta * Q1).rmul(Eleft) + (w.alpha * Y1.transpose()).rmul(Eright);
    Mat G44 = Mat::Zero(n + m, n + m);
    G44.topLeftCorner(n, n) = -w.beta * In;
    G44.bottomRightCorner(m, m) = -w.alpha * Im;

    BlockGrid G({2 * n, m, n, n + m});
    G.set(0, 0, sym(G11));
    G.set(0, 1, AffineExpr::constant(Bu));
    G.set(0, 2, G13);
    G.set(0, 3, G14);
    G.set(1, 1, AffineExpr::constant(-w.gamma_ctrl * Im));
    G.set(2, 2, G33);
    G.set(2, 3, G34);
    G.set(3, 3, AffineExpr::constant(G44));

    p.require_negative_definite(G.assemble(), "Gamma");
    p.require_positive_definite(p.var(q1), "Q1_pd");
    return p;
}

Mat static_dissipation_matrix(const Mat& A, const Mat& B, const Mat& Km, const Mat& P,
                              const AwWeights& w, double gamma_sat) {
    const int n = static_cast<int>(A.rows());
    const int m = static_cast<int>(B.cols());
    const Mat In = Mat::Identity(n, n), Im = Mat::Identity(m, m);
    Mat Acl = A - B * Km;
    const int N = n + m + n + n + m;
    Mat M = Mat::Zero(N, N);
    std::vector<int> off = {0, n, n + m, n + m + n, n + m + n + n};
    auto blk = [&](int i, int j, const Mat& V) {
        M.block(off[i], off[j], V.rows(), V.cols()) = V;
        if (i != j) M.block(off[j], off[i], V.cols(), V.rows()) = V.transpose();
    };
    blk(0, 0, Mat(P * Acl + Acl.transpose() * P));
    blk(0, 1, Mat(P * B));
    blk(0, 2, Mat(P * B * Km));
    blk(0, 3, Mat(-w.beta * In));
    blk(0, 4, Mat(-w.alpha * Km.transpose()));
    blk(1, 1, Mat(-w.gamma_ctrl * Im));
    blk(2, 2, Mat(-gamma_sat * In));
    blk(2, 3, Mat(w.beta * In));
    blk(2, 4, Mat(w.alpha * Km.transpose()));
    blk(3, 3, Mat(-w.beta * In));
    blk(4, 4, Mat(-w.alpha * Im));
    return M;
}

Mat DynamicAwDesign::augmented_a(const Mat& A, const Mat& B) const {
    const int n = static_cast<int>(A.rows());
    Mat At(2 * n, 2 * n);
    At.topLeftCorner(n, n) = A - B * Km1;
    At.topRightCorner(n, n) = B * Km2;
    At.bottomLeftCorner(n, n) = -Mat::Identity(n, n);
    At.bottomRightCorner(n, n) = Aq;
    return At;
}

StateSpaceModel DynamicAwDesign::compensator() const {
    const int n = static_cast<int>(Aq.rows());
    return StateSpaceModel::make(Aq, Mat::Identity(n, n), Km2, Km1);
}

Mat dynamic_dissipation_matrix(const Mat& A, const Mat& B, const DynamicAwDesign& d,
                               const Mat& P) {
    const int n = static_cast<int>(A.rows());
    const int m = static_cast<int>(B.cols());
    const Mat In = Mat::Identity(n, n), Im = Mat::Identity(m, m);
    Mat At = d.augmented_a(A, B);
    Mat Bu = Mat::Zero(2 * n, m);
    Bu.topRows(n) = B;
    Mat Bs(2 * n, n);
    Bs.topRows(n) = B * d.Km1;
    Bs.bottomRows(n) = In;
    Mat C1(n, 2 * n);
    C1 << -In, Mat::Zero(n, n);
    Mat C2(m, 2 * n);
    C2 << -d.Km1, d.Km2;

    const AwWeights& w = d.weights;
    const int N = 2 * n + m + n + n + m;
    Mat M = Mat::Zero(N, N);
    std::vector<int> off = {0, 2 * n, 2 * n + m, 2 * n + m + n, 2 * n + m + n + n};
    auto blk = [&](int i, int j, const Mat& V) {
        M.block(off[i], off[j], V.rows(), V.cols()) = V;
        if (i != j) M.block(off[j], off[i], V.cols(), V.rows()) = V.transpose();
    };
    blk(0, 0, Mat(P * At + At.transpose() * P));
    blk(0, 1, Mat(P * Bu));
    blk(0, 2, Mat(P * Bs));
    blk(0, 3, Mat(w.beta * C1.transpose()));
    blk(0, 4, Mat(w.alpha * C2.transpose()));
    blk(1, 1, Mat(-w.gamma_ctrl * Im));
    blk(2, 2, Mat(-d.gamma_sat * In));
    blk(2, 3, Mat(w.beta * In));
    blk(2, 4, Mat(w.alpha * d.Km1.transpose()));
    blk(3, 3, Mat(-w.beta * In));
    blk(4, 4, Mat(-w.alpha * Im));
    return M;
}

namespace {

// Deterministic then seeded-random linearization points; the scale matters
// as much as the shape, so the draws sweep a log-uniform size factor.
std::vector<Mat> qc_candidates(int n, int budget, std::uint64_t seed) {
    std::vector<Mat> out;
    for (double s : {0.05, 0.1, 0.2, 0.3, 0.5, 1.0, 2.0})
        out.push_back(s * Mat::Identity(n, n));
    Rng rng(seed);
    while (static_cast<int>(out.size()) < budget) {
        double s = std::pow(10.0, rng.uniform(-2.5, 0.5));
        out.push_back(s * random_spd(n, rng));
    }
    return out;
}

struct SolveOutcome {
    bool ok = false;
    SdpSolution sol;
};

}  // namespace

StaticAwDesign design_static_aw(const Mat& A, const Mat& B, const AwWeights& w,
                                const DesignOptions& opts) {
    check_weights(w);
    check_ab(A, B);
    const int n = static_cast<int>(A.rows());

    auto attempt = [&](double gamma, const Mat& Qc,
                       const std::map<std::string, Mat>* warm) -> SolveOutcome {
        LmiProblem p = build_static_aw_lmi(A, B, w, gamma, Qc);
        if (warm) p.set_initial(*warm);
        SolveOutcome o;
        o.sol = solve_sdp(p, opts.sdp);
        if (!o.sol.feasible()) return o;
        const Mat& Q = o.sol.values.at("Q");
        const Mat& Y = o.sol.values.at("Y");
        if (lambda_min_sym(Q) <= 0.0) return o;
        Mat Km = solve(Q.transpose(), Y.transpose()).transpose();
        Mat P = solve(Q, Mat::Identity(n, n));
        P = 0.5 * (P + P.transpose());
        o.ok = lambda_max_sym(static_dissipation_matrix(A, B, Km, P, w, gamma)) < 0.0;
        return o;
    };

    // step 1: find a feasible linearization point
    auto cands = qc_candidates(n, opts.restart_budget, opts.seed);
    Mat Qc;
    SdpSolution best;
    double gamma = opts.gamma_init;
    int used = 0;
    bool found = false;
    for (double g = opts.gamma_init; g <= opts.gamma_cap && !found; g *= 10.0) {
        used = 0;
        const std::size_t wave = 8;
        for (std::size_t base = 0; base < cands.size() && !found; base += wave) {
            std::size_t count = std::min(wave, cands.size() - base);
            std::vector<SolveOutcome> outs(count);
            parallel_for(count, opts.par,
                         [&](std::size_t i) { outs[i] = attempt(g, cands[base + i], nullptr); });
            used += static_cast<int>(count);
            for (std::size_t i = 0; i < count; ++i) {
                if (outs[i].ok) {
                    Qc = cands[base + i];
                    best = outs[i].sol;
                    gamma = g;
                    found = true;
                    break;
                }
            }
        }
    }
    if (!found)
        throw AlgorithmError("static anti-windup design: no feasible linearization point within " +
                             std::to_string(opts.restart_budget) + " draws (weights alpha=" +
                             std::to_string(w.alpha) + ", beta=" + std::to_string(w.beta) + ")");

    StaticAwDesign d;
    d.weights = w;
    d.restarts_used = used;

    // iterate: shrink gamma by bisection at fixed Qc, then move Qc to Q
    for (int outer = 0; outer < opts.max_outer; ++outer) {
        double lo = 0.0, hi = gamma;
        std::map<std::string, Mat> warm = best.values;
        for (int it = 0; it < opts.bisect_iters && (hi - lo) > opts.bisect_tol_rel * hi; ++it) {
            double mid = 0.5 * (lo + hi);
            SolveOutcome o = attempt(mid, Qc, &warm);
            if (o.ok) {
                hi = mid;
                best = o.sol;
                warm = best.values;
            } else {
                lo = mid;
            }
        }
        gamma = hi;
        d.gamma_history.push_back(gamma);
        const Mat& Q = best.values.at("Q");
        double gap = (Q - Qc).norm();
        Qc = Q;
        if (gap <= opts.q_tol_rel * Q.norm()) break;
        // moving the linearization point onto Q keeps the current solution
        // feasible at the same gamma, so the next round can only improve
        SolveOutcome o = attempt(gamma, Qc, &best.values);
        if (!o.ok) break;  // numerically at the boundary; keep previous certificate
        best = o.sol;
    }

    d.Q = best.values.at("Q");
    d.Y = best.values.at("Y");
    d.Qc = Qc;
    d.gamma_sat = gamma;
    d.Km = solve(d.Q.transpose(), d.Y.transpose()).transpose();
    d.certificate = best;
    if (spectral_abscissa(A - B * d.Km) >= 0.0)
        throw AlgorithmError("static anti-windup design: recovered gain is not stabilizing");
    return d;
}

DynamicAwDesign design_dynamic_aw(const Mat& A, const Mat& B, const AwWeights& w,
                                  const DesignOptions& opts) {
    check_weights(w);
    check_ab(A, B);
    const int n = static_cast<int>(A.rows());

    auto recover = [&](const SdpSolution& sol, double gamma, double h1, double h2,
                       const Mat& Qc) -> DynamicAwDesign {
        DynamicAwDesign t;
        t.weights = w;
        t.gamma_sat = gamma;
        t.h1 = h1;
        t.h2 = h2;
        t.Q1 = sol.values.at("Q1");
        Mat Q1t = t.Q1.transpose();
        t.Km1 = solve(Q1t, sol.values.at("Y1").transpose()).transpose();
        t.Km2 = solve(Q1t, sol.values.at("Y2").transpose()).transpose();
        t.Aq = solve(Q1t, sol.values.at("YA").transpose()).transpose();
        t.Qc = Qc;
        t.certificate = sol;
        return t;
    };

    auto attempt = [&](double gamma, double h1, double h2, const Mat& Qc,
                       const std::map<std::string, Mat>* warm) -> SolveOutcome {
        LmiProblem p = build_dynamic_aw_lmi(A, B, w, gamma, h1, h2, Qc);
        if (warm) p.set_initial(*warm);
        SolveOutcome o;
        o.sol = solve_sdp(p, opts.sdp);
        if (!o.sol.feasible()) return o;
        if (lambda_min_sym(o.sol.values.at("Q1")) <= 0.0) return o;
        DynamicAwDesign t = recover(o.sol, gamma, h1, h2, Qc);
        Mat Qbig(2 * n, 2 * n);
        Qbig << t.Q1, h1 * t.Q1, h1 * t.Q1, h2 * t.Q1;
        Mat P = solve(Qbig, Mat::Identity(2 * n, 2 * n));
        P = 0.5 * (P + P.transpose());
        o.ok = lambda_max_sym(dynamic_dissipation_matrix(A, B, t, P)) < 0.0;
        return o;
    };

    DynamicAwDesign result;
    bool have_result = false;
    int restarts_total = 0;

    for (const auto& [h1, h2] : opts.h_grid) {
        if (!(h1 > 0 && h2 > h1 * h1)) continue;
        auto cands = qc_candidates(n, std::max(8, opts.restart_budget / 8), opts.seed + 1);
        Mat Qc;
        SdpSolution best;
        double gamma = 0.0;
        bool found = false;
        for (double g = opts.gamma_init; g <= opts.gamma_cap && !found; g *= 10.0) {
            const std::size_t wave = 8;
            for (std::size_t base = 0; base < cands.size() && !found; base += wave) {
                std::size_t count = std::min(wave, cands.size() - base);
                std::vector<SolveOutcome> outs(count);
                parallel_for(count, opts.par, [&](std::size_t i) {
                    outs[i] = attempt(g, h1, h2, cands[base + i], nullptr);
                });
                restarts_total += static_cast<int>(count);
                for (std::size_t i = 0; i < count; ++i) {
                    if (outs[i].ok) {
                        Qc = cands[base + i];
                        best = outs[i].sol;
                        gamma = g;
                        found = true;
                        break;
                    }
                }
            }
        }
        if (!found) continue;

        std::vector<double> history;
        for (int outer = 0; outer < opts.max_outer; ++outer) {
            double lo = 0.0, hi = gamma;
            std::map<std::string, Mat> warm = best.values;
            for (int it = 0; it < opts.bisect_iters && (hi - lo) > opts.bisect_tol_rel * hi;
                 ++it) {
                double mid = 0.5 * (lo + hi);
                SolveOutcome o = attempt(mid, h1, h2, Qc, &warm);
                if (o.ok) {
                    hi = mid;
                    best = o.sol;
                    warm = best.values;
                } else {
                    lo = mid;
                }
            }
            gamma = hi;
            history.push_back(gamma);
            const Mat& Q1 = best.values.at("Q1");
            double gap = (Q1 - Qc).norm();
            Qc = Q1;
            if (gap <= opts.q_tol_rel * Q1.norm()) break;
            SolveOutcome o = attempt(gamma, h1, h2, Qc, &best.values);
            if (!o.ok) break;
            best = o.sol;
        }

        if (!have_result || gamma < result.gamma_sat) {
            DynamicAwDesign d = recover(best, gamma, h1, h2, Qc);
            d.gamma_history = history;
            d.restarts_used = restarts_total;
            if (spectral_abscissa(d.augmented_a(A, B)) < 0.0) {
                result = d;
                have_result = true;
            }
        }
    }
    if (!have_result)
        throw AlgorithmError(
            "dynamic anti-windup design: no feasible (h1, h2) grid point within the restart "
            "budget");
    return result;
}

namespace {
CertificateReport verify_common(double diss_max, double gap_min, bool hurwitz) {
    CertificateReport r;
    r.dissipation_max_eig = diss_max;
    r.linearization_gap_min = gap_min;
    r.closed_loop_hurwitz = hurwitz;
    r.pass = hurwitz && diss_max < 0.0 && gap_min >= -1e-9;
    return r;
}
}  // namespace

CertificateReport verify_static_aw(const StaticAwDesign& d, const Mat& A, const Mat& B) {
    const int n = static_cast<int>(A.rows());
    Mat P = solve(d.Q, Mat::Identity(n, n));
    P = 0.5 * (P + P.transpose());
    double diss = lambda_max_sym(static_dissipation_matrix(A, B, d.Km, P, d.weights, d.gamma_sat));
    Mat Gp = d.gamma_sat * (d.Q - d.Qc).transpose() * (d.Q - d.Qc);
    double gap = lambda_min_sym(0.5 * (Gp + Gp.transpose()));
    bool hur = spectral_abscissa(A - B * d.Km) < 0.0;
    return verify_common(diss, gap, hur);
}

CertificateReport verify_dynamic_aw(const DynamicAwDesign& d, const Mat& A, const Mat& B) {
    const int n = static_cast<int>(A.rows());
    Mat Qbig(2 * n, 2 * n);
    Qbig << d.Q1, d.h1 * d.Q1, d.h1 * d.Q1, d.h2 * d.Q1;
    Mat P = solve(Qbig, Mat::Identity(2 * n, 2 * n));
    P = 0.5 * (P + P.transpose());
    double diss = lambda_max_sym(dynamic_dissipation_matrix(A, B, d, P));
    Mat Gp = d.gamma_sat * (d.Q1 - d.Qc).transpose() * (d.Q1 - d.Qc);
    double gap = lambda_min_sym(0.5 * (Gp + Gp.transpose()));
    bool hur = spectral_abscissa(d.augmented_a(A, B)) < 0.0;
    return verify_common(diss, gap, hur);
}

}  // namespace antw
