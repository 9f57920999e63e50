#include <cmath>

#include "antw/lmi.hpp"

namespace antw {

namespace {

struct Scaled {
    // scaled + strictness-shifted constraint data used by the barrier
    std::vector<Mat> F0;
    std::vector<std::vector<Mat>> Fi;  // [constraint][coord]
    // original data for margin reporting
    std::vector<Mat> F0o;
    std::vector<std::vector<Mat>> Fio;
    Vec svar;          // x = svar .* xs
    double scale = 1;  // original problem magnitude
};

Scaled equilibrate(std::vector<LmiProblem::CompiledConstraint> cons, const SdpOptions& opts) {
    Scaled c;
    const int nv = cons.empty() ? 0 : static_cast<int>(cons[0].Fi.size());
    double scale = 0.0;
    for (auto& con : cons) {
        scale = std::max(scale, con.F0.cwiseAbs().maxCoeff());
        for (const auto& F : con.Fi)
            if (F.size()) scale = std::max(scale, F.cwiseAbs().maxCoeff());
        c.F0o.push_back(con.F0);
        c.Fio.push_back(con.Fi);
    }
    c.scale = std::max(scale, 1e-12);

    c.svar = Vec::Ones(nv);
    for (int i = 0; i < nv; ++i) {
        double mx = 0.0;
        for (const auto& Fi : c.Fio) mx = std::max(mx, Fi[i].cwiseAbs().maxCoeff());
        if (mx > 0) c.svar[i] = 1.0 / mx;
    }
    const double shift = opts.strictness_rel * c.scale;
    for (std::size_t k = 0; k < c.F0o.size(); ++k) {
        Mat F0 = c.F0o[k] + shift * Mat::Identity(c.F0o[k].rows(), c.F0o[k].cols());
        std::vector<Mat> Fi(c.Fio[k].size());
        double rown = F0.cwiseAbs().maxCoeff();
        for (int i = 0; i < static_cast<int>(Fi.size()); ++i) {
            Fi[i] = c.Fio[k][i] * c.svar[i];
            rown = std::max(rown, Fi[i].cwiseAbs().maxCoeff());
        }
        double ck = std::max(rown, 1e-12);
        F0 /= ck;
        for (auto& F : Fi) F /= ck;
        c.F0.push_back(std::move(F0));
        c.Fi.push_back(std::move(Fi));
    }
    return c;
}

Mat eval_scaled(const Scaled& c, std::size_t k, const Vec& xs) {
    Mat M = c.F0[k];
    for (int i = 0; i < xs.size(); ++i)
        if (xs[i] != 0.0 && c.Fi[k][i].size()) M += xs[i] * c.Fi[k][i];
    return M;
}

// +inf outside the barrier domain
double barrier_value(const Scaled& c, const Vec& z, bool phase1, double tau, const Vec& cobj,
                     double box) {
    const int nv = static_cast<int>(c.svar.size());
    Vec xs = z.head(nv);
    double f = phase1 ? tau * z[nv] : tau * cobj.dot(xs);
    for (std::size_t k = 0; k < c.F0.size(); ++k) {
        Mat S = -eval_scaled(c, k, xs);
        if (phase1) S.diagonal().array() += z[nv];
        Eigen::LLT<Mat> llt(S);
        if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
        for (int i = 0; i < S.rows(); ++i) {
            double d = llt.matrixL()(i, i);
            if (!(d > 0.0)) return std::numeric_limits<double>::infinity();
            f -= 2.0 * std::log(d);
        }
    }
    for (int i = 0; i < z.size(); ++i) {
        if (std::abs(z[i]) >= box) return std::numeric_limits<double>::infinity();
        f -= std::log(box - z[i]) + std::log(box + z[i]);
    }
    return f;
}

int newton_stage(const Scaled& c, Vec& z, bool phase1, double tau, const Vec& cobj, double box,
                 int max_inner, double deep_stop) {
    const int nv = static_cast<int>(c.svar.size());
    const int nz = static_cast<int>(z.size());
    int it = 0;
    for (; it < max_inner; ++it) {
        Vec g = Vec::Zero(nz);
        Mat H = Mat::Zero(nz, nz);
        if (phase1)
            g[nz - 1] += tau;
        else
            g.head(nv) += tau * cobj;

        bool domain_ok = true;
        for (std::size_t k = 0; k < c.F0.size() && domain_ok; ++k) {
            Mat S = -eval_scaled(c, k, z.head(nv));
            if (phase1) S.diagonal().array() += z[nz - 1];
            Eigen::LLT<Mat> llt(S);
            if (llt.info() != Eigen::Success) {
                domain_ok = false;
                break;
            }
            const int d = static_cast<int>(S.rows());
            Mat W = llt.solve(Mat::Identity(d, d));

            std::vector<Mat> WFW(nv);
            for (int i = 0; i < nv; ++i) {
                const Mat& Fi = c.Fi[k][i];
                if (!Fi.size() || Fi.cwiseAbs().maxCoeff() == 0.0) continue;
                Mat WF = W * Fi;
                g[i] += WF.trace();
                WFW[i] = WF * W;
            }
            if (phase1) g[nz - 1] -= W.trace();
            for (int i = 0; i < nv; ++i) {
                if (!WFW[i].size()) continue;
                for (int j = i; j < nv; ++j) {
                    if (!WFW[j].size()) continue;
                    double hij = (WFW[i].array() * c.Fi[k][j].array()).sum();
                    H(i, j) += hij;
                    if (j > i) H(j, i) += hij;
                }
                if (phase1) {
                    double hit = -WFW[i].trace();
                    H(i, nz - 1) += hit;
                    H(nz - 1, i) += hit;
                }
            }
            if (phase1) H(nz - 1, nz - 1) += (W.array() * W.array()).sum();
        }
        if (!domain_ok) break;

        for (int i = 0; i < nz; ++i) {
            double a = box - z[i], b = box + z[i];
            g[i] += 1.0 / a - 1.0 / b;
            H(i, i) += 1.0 / (a * a) + 1.0 / (b * b);
        }

        Vec dz;
        double lam = 0.0;
        bool have_step = false;
        for (int tries = 0; tries < 40; ++tries) {
            Eigen::LLT<Mat> hl(H + lam * Mat::Identity(nz, nz));
            if (hl.info() == Eigen::Success) {
                dz = -hl.solve(g);
                if (dz.allFinite()) {
                    have_step = true;
                    break;
                }
            }
            lam = std::max(1e-10 * (1.0 + H.cwiseAbs().maxCoeff()), 10.0 * lam);
        }
        if (!have_step) break;

        double ndec = -g.dot(dz);
        double f0 = barrier_value(c, z, phase1, tau, cobj, box);
        double a = 1.0;
        while (a > 1e-14 &&
               barrier_value(c, z + a * dz, phase1, tau, cobj, box) > f0 - 1e-4 * a * ndec)
            a *= 0.5;
        if (a <= 1e-14) break;
        z += a * dz;
        if (phase1 && deep_stop > 0.0 && z[nz - 1] < -deep_stop) return it + 1;
        if (0.5 * ndec < 1e-11 * (1.0 + std::abs(f0))) return it + 1;
    }
    return it;
}

}  // namespace

SdpSolution solve_sdp(const LmiProblem& p, const SdpOptions& opts) {
    SdpSolution sol;
    const int nv = p.num_scalar_coords();
    auto compiled = p.compile_constraints();
    if (compiled.empty()) throw Error("solve_sdp: no constraints");
    Scaled c = equilibrate(std::move(compiled), opts);

    Vec cobj = p.objective_vector();
    Vec cobj_s = cobj.cwiseProduct(c.svar);

    Vec xs = Vec::Zero(nv);
    if (!p.initial().empty()) {
        Vec x_init = p.pack_values(p.initial());
        xs = x_init.cwiseQuotient(c.svar);
        for (int i = 0; i < nv; ++i)
            if (!(std::abs(xs[i]) < 0.9 * opts.var_box)) xs[i] = 0.0;
    }

    double t0 = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < c.F0.size(); ++k)
        t0 = std::max(t0, lambda_max_sym(eval_scaled(c, k, xs)));
    t0 += 1.0;
    Vec z(nv + 1);
    z.head(nv) = xs;
    z[nv] = t0;
    for (double tau = 1.0; tau <= opts.tau_max; tau *= 10.0) {
        int inner =
            newton_stage(c, z, true, tau, cobj_s, opts.var_box, opts.max_inner, opts.deep_stop);
        sol.log.push_back({1, tau, inner, z[nv]});
        if (z[nv] < -opts.deep_stop) break;
    }
    xs = z.head(nv);

    auto orig_margin = [&](const Vec& xs_now) {
        Vec x = xs_now.cwiseProduct(c.svar);
        double m = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < c.F0o.size(); ++k) {
            Mat M = c.F0o[k];
            for (int i = 0; i < nv; ++i)
                if (x[i] != 0.0 && c.Fio[k][i].size()) M += x[i] * c.Fio[k][i];
            m = std::max(m, lambda_max_sym(M));
        }
        return m;
    };

    double margin = orig_margin(xs);
    const double margin_req = opts.margin_tol_rel * c.scale;
    bool feasible = margin < -margin_req && z[nv] < 0.0;

    if (feasible && p.has_objective()) {
        Vec zx = xs;
        for (double tau = 1.0; tau <= opts.tau_max; tau *= 10.0) {
            int inner = newton_stage(c, zx, false, tau, cobj_s, opts.var_box, opts.max_inner, 0.0);
            sol.log.push_back({2, tau, inner, cobj_s.dot(zx)});
        }
        xs = zx;
        margin = orig_margin(xs);
        feasible = margin < 0.0;
    }

    Vec x = xs.cwiseProduct(c.svar);
    sol.values = p.unpack_values(x);
    sol.margin = margin;
    sol.status = feasible ? SdpSolution::Status::Feasible : SdpSolution::Status::Infeasible;
    if (p.has_objective() && feasible) sol.objective = cobj.dot(x);
    return sol;
}

}  // namespace antw
