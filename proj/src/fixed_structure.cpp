#include "antw/fixed_structure.hpp"

#include <algorithm>
#include <cmath>

#include "antw/rational.hpp"

namespace antw {

CompensatorStructure CompensatorStructure::static_gain(int outputs, int inputs) {
    return single(outputs, inputs, 0);
}

CompensatorStructure CompensatorStructure::single(int outputs, int inputs, int order) {
    if (outputs <= 0 || inputs <= 0 || order < 0)
        throw DimensionError("CompensatorStructure: bad block spec");
    CompensatorStructure s;
    s.blocks.push_back({outputs, inputs, order});
    return s;
}

CompensatorStructure CompensatorStructure::diagonal(int my_out, int my_in, int mu_out, int mu_in,
                                                    int order) {
    CompensatorStructure s;
    s.blocks.push_back({my_out, my_in, order});
    s.blocks.push_back({mu_out, mu_in, order});
    return s;
}

int CompensatorStructure::total_outputs() const {
    int t = 0;
    for (const auto& b : blocks) t += b.outputs;
    return t;
}

int CompensatorStructure::total_inputs() const {
    int t = 0;
    for (const auto& b : blocks) t += b.inputs;
    return t;
}

int CompensatorStructure::parameter_count() const {
    int t = 0;
    for (const auto& b : blocks) t += b.outputs * (b.order + b.inputs * (b.order + 1));
    return t;
}

namespace {

constexpr double kPoleMargin = 1e-3;

double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }
double softplus_inv(double y) {
    if (y > 30.0) return y;
    return std::log(std::expm1(std::max(y, 1e-12)));
}

// stable monic denominator of the given order from unconstrained parameters
std::vector<double> denominator_from(const double* p, int order) {
    Polynomial d{1.0};
    int i = 0;
    while (order - i >= 2) {
        double c1 = softplus(p[i]) + kPoleMargin;
        double c0 = softplus(p[i + 1]) + kPoleMargin;
        d = d * Polynomial{1.0, c1, c0};
        i += 2;
    }
    if (i < order) d = d * Polynomial{1.0, softplus(p[i]) + kPoleMargin};
    return d.coeffs;
}

struct RowRealization {
    Mat A, B, C, D;  // C is 1 x order
};

RowRealization realize_row(const double* theta, int order, int inputs) {
    RowRealization r;
    const int k = order;
    std::vector<double> d = denominator_from(theta, k);
    r.A = Mat::Zero(k, k);
    for (int i = 0; i < k; ++i) {
        r.A(i, 0) = -d[i + 1];
        if (i + 1 < k) r.A(i, i + 1) = 1.0;
    }
    r.B = Mat::Zero(k, inputs);
    r.C = Mat::Zero(1, k);
    if (k > 0) r.C(0, 0) = 1.0;
    r.D = Mat::Zero(1, inputs);
    const double* num = theta + k;
    for (int j = 0; j < inputs; ++j, num += k + 1) {
        double n0 = num[0];
        r.D(0, j) = n0;
        for (int l = 1; l <= k; ++l) r.B(l - 1, j) = num[l] - n0 * d[l];
    }
    return r;
}

}  // namespace

StateSpaceModel realize_compensator(const CompensatorStructure& s, const Vec& theta) {
    if (theta.size() != s.parameter_count())
        throw DimensionError("realize_compensator: parameter count mismatch");
    const int P = s.total_outputs();
    const int M = s.total_inputs();
    int nx = 0;
    for (const auto& b : s.blocks) nx += b.outputs * b.order;

    Mat A = Mat::Zero(nx, nx), B = Mat::Zero(nx, M), C = Mat::Zero(P, nx), D = Mat::Zero(P, M);
    int xoff = 0, ooff = 0, ioff = 0, toff = 0;
    for (const auto& b : s.blocks) {
        const int stride = b.order + b.inputs * (b.order + 1);
        for (int row = 0; row < b.outputs; ++row) {
            RowRealization r = realize_row(theta.data() + toff, b.order, b.inputs);
            A.block(xoff, xoff, b.order, b.order) = r.A;
            B.block(xoff, ioff, b.order, b.inputs) = r.B;
            C.block(ooff + row, xoff, 1, b.order) = r.C;
            D.block(ooff + row, ioff, 1, b.inputs) = r.D;
            xoff += b.order;
            toff += stride;
        }
        ooff += b.outputs;
        ioff += b.inputs;
    }
    return StateSpaceModel::make(A, B, C, D);
}

Vec embed_into_full(const CompensatorStructure& diag_s, const Vec& theta_diag,
                    const CompensatorStructure& full_s) {
    if (full_s.blocks.size() != 1)
        throw DimensionError("embed_into_full: target must be a single block");
    const auto& f = full_s.blocks[0];
    if (f.outputs != diag_s.total_outputs() || f.inputs != diag_s.total_inputs())
        throw DimensionError("embed_into_full: channel counts must match");
    for (const auto& b : diag_s.blocks)
        if (b.order != f.order)
            throw DimensionError("embed_into_full: all block orders must equal the full order");
    if (theta_diag.size() != diag_s.parameter_count())
        throw DimensionError("embed_into_full: diag parameter count mismatch");

    Vec out = Vec::Zero(full_s.parameter_count());
    const int k = f.order;
    const int full_stride = k + f.inputs * (k + 1);
    int src = 0, row_out = 0, in_off = 0;
    for (const auto& b : diag_s.blocks) {
        for (int row = 0; row < b.outputs; ++row) {
            double* dst = out.data() + (row_out + row) * full_stride;
            // poles
            for (int i = 0; i < k; ++i) dst[i] = theta_diag[src + i];
            // numerators for this block's input slice, zero elsewhere
            for (int j = 0; j < b.inputs; ++j)
                for (int l = 0; l <= k; ++l)
                    dst[k + (in_off + j) * (k + 1) + l] =
                        theta_diag[src + k + j * (k + 1) + l];
            src += k + b.inputs * (k + 1);
        }
        row_out += b.outputs;
        in_off += b.inputs;
    }
    return out;
}

namespace {

struct Objective {
    const GeneralizedPlant& plant;
    const CompensatorStructure& structure;
    SweepSpec coarse;
    double cap;

    double operator()(const Vec& th) const {
        StateSpaceModel C = realize_compensator(structure, th);
        StateSpaceModel cl = lower_lft(plant, C);
        double absc;
        try {
            absc = spectral_abscissa(cl.A);
        } catch (const ConvergenceError&) {
            return 2.0 * cap;
        }
        if (!(absc < 0.0)) return cap * (1.0 + std::max(0.0, absc));
        return sweep_max(cl, coarse, ParallelConfig::serial()).peak;
    }
};

struct StartResult {
    Vec theta;
    double f = std::numeric_limits<double>::infinity();
    std::vector<std::pair<int, double>> history;
};

StartResult run_start(const Objective& obj, Vec theta, int budget, double init_step,
                      double min_step, double nm_fraction) {
    StartResult r;
    int evals = 0;
    auto eval = [&](const Vec& th) {
        ++evals;
        return obj(th);
    };
    double f = eval(theta);
    r.history.push_back({evals, f});
    const int n = static_cast<int>(theta.size());
    const int ps_budget = static_cast<int>(budget * (1.0 - nm_fraction));

    // coordinate pattern search with immediate acceptance
    Vec step = Vec::Constant(n, init_step);
    while (evals < ps_budget && step.maxCoeff() > min_step) {
        bool improved = false;
        for (int i = 0; i < n && evals + 2 <= ps_budget; ++i) {
            for (double sgn : {1.0, -1.0}) {
                Vec cand = theta;
                cand[i] += sgn * step[i];
                double fc = eval(cand);
                if (fc < f) {
                    theta = cand;
                    f = fc;
                    improved = true;
                    r.history.push_back({evals, f});
                    break;
                }
            }
        }
        if (!improved) step *= 0.5;
    }

    // Nelder-Mead polish
    int nm_budget = budget - evals;
    if (nm_budget > 2 * n + 2) {
        std::vector<Vec> xs(n + 1, theta);
        std::vector<double> fs(n + 1);
        fs[0] = f;
        for (int i = 0; i < n; ++i) {
            xs[i + 1][i] += std::max(step[i], 1e-3);
            fs[i + 1] = eval(xs[i + 1]);
        }
        while (evals < budget) {
            std::vector<int> idx(n + 1);
            for (int i = 0; i <= n; ++i) idx[i] = i;
            std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fs[a] < fs[b]; });
            std::vector<Vec> xs2(n + 1);
            std::vector<double> fs2(n + 1);
            for (int i = 0; i <= n; ++i) {
                xs2[i] = xs[idx[i]];
                fs2[i] = fs[idx[i]];
            }
            xs = xs2;
            fs = fs2;
            if (fs[0] < f) {
                f = fs[0];
                theta = xs[0];
                r.history.push_back({evals, f});
            }
            if (std::abs(fs[n] - fs[0]) <= 1e-12 * (1.0 + std::abs(fs[0]))) break;

            Vec centroid = Vec::Zero(n);
            for (int i = 0; i < n; ++i) centroid += xs[i];
            centroid /= n;
            Vec xr = centroid + (centroid - xs[n]);
            double fr = eval(xr);
            if (fr < fs[0]) {
                Vec xe = centroid + 2.0 * (centroid - xs[n]);
                double fe = eval(xe);
                if (fe < fr) {
                    xs[n] = xe;
                    fs[n] = fe;
                } else {
                    xs[n] = xr;
                    fs[n] = fr;
                }
            } else if (fr < fs[n - 1]) {
                xs[n] = xr;
                fs[n] = fr;
            } else {
                Vec xc = centroid + 0.5 * (xs[n] - centroid);
                double fc = eval(xc);
                if (fc < fs[n]) {
                    xs[n] = xc;
                    fs[n] = fc;
                } else {
                    for (int i = 1; i <= n && evals < budget; ++i) {
                        xs[i] = xs[0] + 0.5 * (xs[i] - xs[0]);
                        fs[i] = eval(xs[i]);
                    }
                }
            }
        }
        for (int i = 0; i <= n; ++i) {
            if (fs[i] < f) {
                f = fs[i];
                theta = xs[i];
                r.history.push_back({evals, f});
            }
        }
    }

    r.theta = theta;
    r.f = f;
    return r;
}

}  // namespace

SynthesisResult synthesize_fixed_structure(const GeneralizedPlant& plant,
                                           const CompensatorStructure& structure,
                                           const SynthOptions& opts) {
    plant.validate();
    if (structure.total_inputs() != plant.ny || structure.total_outputs() != plant.nu)
        throw DimensionError("synthesize_fixed_structure: structure incompatible with partition");
    const int np = structure.parameter_count();

    Objective obj{plant, structure,
                  SweepSpec{opts.sweep.omega_min, opts.sweep.omega_max, opts.search_sweep_points},
                  opts.stab_cap};

    std::vector<Vec> starts;
    starts.push_back(Vec::Zero(np));  // zero compensator: stable by construction
    for (const auto& wst : opts.warm_starts) {
        if (wst.size() != np)
            throw DimensionError("synthesize_fixed_structure: warm start size mismatch");
        starts.push_back(wst);
    }
    while (static_cast<int>(starts.size()) < std::max(opts.starts, 1)) {
        Rng rng(opts.seed + 1000003ULL * starts.size());
        Vec th(np);
        for (int i = 0; i < np; ++i) th[i] = rng.normal() * 0.5;
        starts.push_back(th);
    }

    std::vector<StartResult> results(starts.size());
    parallel_for(starts.size(), opts.par, [&](std::size_t i) {
        results[i] = run_start(obj, starts[i], opts.evals_per_start, opts.init_step,
                               opts.min_step, opts.nm_fraction);
    });

    int best = 0;
    for (std::size_t i = 1; i < results.size(); ++i)
        if (results[i].f < results[best].f) best = static_cast<int>(i);

    SynthesisResult out;
    out.theta = results[best].theta;
    out.search_objective = results[best].f;
    out.start_index = best;
    out.history = results[best].history;
    out.compensator = realize_compensator(structure, out.theta);
    // per-block views
    {
        int ooff = 0, ioff = 0;
        int xoff = 0;
        for (const auto& b : structure.blocks) {
            int nbx = b.outputs * b.order;
            out.blocks.push_back(StateSpaceModel::make(
                out.compensator.A.block(xoff, xoff, nbx, nbx),
                out.compensator.B.block(xoff, ioff, nbx, b.inputs),
                out.compensator.C.block(ooff, xoff, b.outputs, nbx),
                out.compensator.D.block(ooff, ioff, b.outputs, b.inputs)));
            xoff += nbx;
            ooff += b.outputs;
            ioff += b.inputs;
        }
    }

    StateSpaceModel cl = lower_lft(plant, out.compensator);
    out.stable = is_hurwitz(cl, 0.0);
    HinfResult hn = hinf_norm(cl, opts.hinf_tol, opts.sweep, opts.par);
    out.achieved_norm = hn.finite ? hn.value : std::numeric_limits<double>::infinity();
    out.stable = out.stable && hn.finite;

    StateSpaceModel zero_cl =
        lower_lft(plant, StateSpaceModel::zero(plant.nu, plant.ny));
    HinfResult open = hinf_norm(zero_cl, opts.hinf_tol, opts.sweep, opts.par);
    out.open_loop_norm = open.finite ? open.value : std::numeric_limits<double>::infinity();
    return out;
}

SynthesisResult synthesize_full_matrix(const GeneralizedPlant& plant, int order,
                                       const SynthOptions& opts) {
    return synthesize_fixed_structure(
        plant, CompensatorStructure::single(plant.nu, plant.ny, order), opts);
}

}  // namespace antw
