#include "antw/sim.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

namespace antw {

SaturationSpec SaturationSpec::bounds(Vec lower, Vec upper) {
    if (lower.size() != upper.size()) throw DimensionError("SaturationSpec: bound size mismatch");
    for (int i = 0; i < lower.size(); ++i)
        if (!(lower[i] < upper[i]))
            throw DimensionError("SaturationSpec: lower must be below upper per channel");
    SaturationSpec s;
    s.lower = std::move(lower);
    s.upper = std::move(upper);
    return s;
}

SaturationSpec SaturationSpec::unbounded(int n) {
    const double inf = std::numeric_limits<double>::infinity();
    return bounds(Vec::Constant(n, -inf), Vec::Constant(n, inf));
}

SaturationSpec SaturationSpec::symmetric(int n, double limit) {
    return bounds(Vec::Constant(n, -limit), Vec::Constant(n, limit));
}

SaturationSpec SaturationSpec::box(int n, double lo, double hi) {
    return bounds(Vec::Constant(n, lo), Vec::Constant(n, hi));
}

bool SaturationSpec::any_active() const {
    for (int i = 0; i < lower.size(); ++i)
        if (std::isfinite(lower[i]) || std::isfinite(upper[i])) return true;
    return false;
}

Vec SaturationSpec::clamp(const Vec& v) const {
    if (v.size() != lower.size()) throw DimensionError("saturate: dimension mismatch");
    return v.cwiseMax(lower).cwiseMin(upper);
}

Vec saturate(const Vec& v, const SaturationSpec& spec) { return spec.clamp(v); }

SignalGen SignalGen::constant(Vec v) {
    SignalGen s;
    s.times = {0.0};
    s.levels = {std::move(v)};
    return s;
}

SignalGen SignalGen::step(Vec amplitude, double t_on) {
    SignalGen s;
    s.times = {0.0, t_on};
    s.levels = {Vec::Zero(amplitude.size()), std::move(amplitude)};
    return s;
}

SignalGen SignalGen::piecewise(std::vector<double> times, std::vector<Vec> levels) {
    if (times.empty() || times.size() != levels.size())
        throw DimensionError("SignalGen: times/levels mismatch");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1])) throw DimensionError("SignalGen: times must increase");
    SignalGen s;
    s.times = std::move(times);
    s.levels = std::move(levels);
    return s;
}

Vec SignalGen::eval(double t) const {
    if (levels.empty()) throw Error("SignalGen: empty");
    std::size_t i = 0;
    while (i + 1 < times.size() && t >= times[i + 1]) ++i;
    if (t < times[0]) return Vec::Zero(levels[0].size());
    return levels[i];
}

void LoopConfig::validate() const {
    if (plant.D.size() && plant.D.cwiseAbs().maxCoeff() > 0)
        throw DimensionError("LoopConfig: plant must be strictly proper");
    if (c_sat.cols() != plant.order()) throw DimensionError("LoopConfig: c_sat column mismatch");
    if (controller.inputs() != plant.outputs())
        throw DimensionError("LoopConfig: controller input must match tracked output");
    if (controller.outputs() != plant.inputs())
        throw DimensionError("LoopConfig: controller output must match plant input");
    if (state_sat.dim() != c_sat.rows())
        throw DimensionError("LoopConfig: state saturation dimension mismatch");
    if (state_aw) {
        if (state_aw->inputs() != c_sat.rows() || state_aw->outputs() != plant.inputs())
            throw DimensionError("LoopConfig: state anti-windup channel mismatch");
    }
    if (input_aw) {
        if (input_aw->inputs() != plant.inputs() || input_aw->outputs() != plant.outputs())
            throw DimensionError("LoopConfig: input anti-windup channel mismatch");
    }
    if (input_sat && input_sat->dim() != plant.inputs())
        throw DimensionError("LoopConfig: input saturation dimension mismatch");
    if (reference.dim() != plant.outputs())
        throw DimensionError("LoopConfig: reference dimension mismatch");
    if (meas_disturbance && meas_disturbance->dim() != plant.order())
        throw DimensionError("LoopConfig: measurement disturbance must have state dimension");
    if (exo) {
        if (exo->Bw.rows() != plant.order() || exo->Bw.cols() != exo->w.dim())
            throw DimensionError("LoopConfig: exogenous input shape mismatch");
    }
    if (!(horizon > 0.0) || !(step > 0.0)) throw DimensionError("LoopConfig: horizon/step > 0");
    if (x0.size() != 0 && x0.size() != plant.order())
        throw DimensionError("LoopConfig: x0 dimension mismatch");
}

namespace {

struct LoopDims {
    int n, m, p, ns, nk, nmy, nmu;
};

struct Signals {
    Vec mon, mon_hat, ex;
    Vec u_mx, e, y, r;
    Vec u, u_c, u_mu, e_u, u_hat, u_plant;
};

class LoopSim {
  public:
    explicit LoopSim(const LoopConfig& cfg) : cfg_(cfg) {
        cfg.validate();
        d_.n = cfg.plant.order();
        d_.m = cfg.plant.inputs();
        d_.p = cfg.plant.outputs();
        d_.ns = static_cast<int>(cfg.c_sat.rows());
        d_.nk = cfg.controller.order();
        d_.nmy = cfg.state_aw ? cfg.state_aw->order() : 0;
        d_.nmu = cfg.input_aw ? cfg.input_aw->order() : 0;
        u_warm_ = Vec::Zero(d_.m);
    }

    int state_size() const { return d_.n + d_.nk + d_.nmy + d_.nmu; }
    const LoopDims& dims() const { return d_; }

    Signals resolve(double t, const Vec& s) {
        const auto& cfg = cfg_;
        Signals sg;
        Vec xp = s.head(d_.n);
        Vec xk = s.segment(d_.n, d_.nk);
        Vec xmy = s.segment(d_.n + d_.nk, d_.nmy);
        Vec xmu = s.tail(d_.nmu);

        Vec xm = xp;
        if (cfg.meas_disturbance) xm += cfg.meas_disturbance->eval(t);
        sg.mon = cfg.c_sat * xm;
        sg.mon_hat = cfg.state_sat.clamp(sg.mon);
        sg.ex = sg.mon_hat - sg.mon;
        sg.u_mx = Vec::Zero(d_.m);
        if (cfg.state_aw) sg.u_mx = cfg.state_aw->C * xmy + cfg.state_aw->D * sg.ex;
        sg.r = cfg.reference.eval(t);
        sg.y = cfg.plant.C * xm;
        sg.e = sg.r - sg.y;

        auto eval_u_next = [&](const Vec& u) {
            sg.e_u = Vec::Zero(d_.m);
            if (cfg.input_sat) sg.e_u = cfg.input_sat->clamp(u) - u;
            sg.u_mu = Vec::Zero(d_.p);
            if (cfg.input_aw) sg.u_mu = cfg.input_aw->C * xmu + cfg.input_aw->D * sg.e_u;
            sg.u_c = cfg.controller.C * xk + cfg.controller.D * (sg.e + sg.u_mu);
            return Vec(sg.u_c + sg.u_mx);
        };

        Vec u = u_warm_;
        bool converged = false;
        for (int it = 0; it < 50; ++it) {
            Vec u_next = eval_u_next(u);
            double du = (u_next - u).lpNorm<Eigen::Infinity>();
            u = u_next;
            if (du <= 1e-10 * std::max(1.0, u.lpNorm<Eigen::Infinity>())) {
                converged = true;
                break;
            }
        }
        if (!converged && cfg.input_aw && cfg.input_sat) {
            // the loop equation u = c0 + M (sat(u) - u) is piecewise linear in
            // u; solve it by semismooth Newton when plain iteration diverges
            // (|M| >= 1 in the clipped region)
            Mat M = cfg.controller.D * cfg.input_aw->D;
            for (int it = 0; it < 30 && !converged; ++it) {
                Vec F = u - eval_u_next(u);
                if (F.lpNorm<Eigen::Infinity>() <=
                    1e-10 * std::max(1.0, u.lpNorm<Eigen::Infinity>())) {
                    converged = true;
                    break;
                }
                Mat S = Mat::Zero(d_.m, d_.m);
                for (int i = 0; i < d_.m; ++i) {
                    bool interior = u[i] > cfg.input_sat->lower[i] &&
                                    u[i] < cfg.input_sat->upper[i];
                    if (interior) S(i, i) = 1.0;
                }
                Mat Jm = Mat::Identity(d_.m, d_.m) + M - M * S;
                Eigen::FullPivLU<Mat> lu(Jm);
                if (!lu.isInvertible()) break;
                u -= lu.solve(F);
            }
            if (converged) {
                Vec chk = eval_u_next(u);  // refresh sg fields at the solution
                (void)chk;
            }
        }
        if (!converged) throw SimulationError("algebraic loop fixed point did not contract", t);
        sg.u = u;
        u_warm_ = u;
        sg.u_hat = cfg.input_sat ? cfg.input_sat->clamp(u) : u;
        sg.u_plant = cfg.apply_input_sat ? sg.u_hat : sg.u;
        return sg;
    }

    Vec derivative(double t, const Vec& s) {
        Signals sg = resolve(t, s);
        const auto& cfg = cfg_;
        Vec ds(state_size());
        Vec xp = s.head(d_.n);
        Vec dxp = cfg.plant.A * xp + cfg.plant.B * sg.u_plant;
        if (cfg.exo) dxp += cfg.exo->Bw * cfg.exo->w.eval(t);
        ds.head(d_.n) = dxp;
        Vec xk = s.segment(d_.n, d_.nk);
        ds.segment(d_.n, d_.nk) = cfg.controller.A * xk + cfg.controller.B * (sg.e + sg.u_mu);
        if (cfg.state_aw) {
            Vec xmy = s.segment(d_.n + d_.nk, d_.nmy);
            ds.segment(d_.n + d_.nk, d_.nmy) = cfg.state_aw->A * xmy + cfg.state_aw->B * sg.ex;
        }
        if (cfg.input_aw) {
            Vec xmu = s.tail(d_.nmu);
            ds.tail(d_.nmu) = cfg.input_aw->A * xmu + cfg.input_aw->B * sg.e_u;
        }
        return ds;
    }

  private:
    const LoopConfig& cfg_;
    LoopDims d_;
    Vec u_warm_;
};

}  // namespace

SimulationTrace simulate(const LoopConfig& cfg) {
    LoopSim sim(cfg);
    const auto& d = sim.dims();
    const double h = cfg.step;
    const int N = static_cast<int>(std::floor(cfg.horizon / h + 0.5)) + 1;

    SimulationTrace tr;
    tr.step = h;
    tr.t = Vec::Zero(N);
    tr.x_full = Mat::Zero(N, d.n);
    tr.x = Mat::Zero(N, d.ns);
    tr.xhat = Mat::Zero(N, d.ns);
    tr.ex = Mat::Zero(N, d.ns);
    tr.u_c = Mat::Zero(N, d.m);
    tr.u_mx = Mat::Zero(N, d.m);
    tr.u_mu = Mat::Zero(N, d.p);
    tr.u = Mat::Zero(N, d.m);
    tr.uhat = Mat::Zero(N, d.m);
    tr.eu = Mat::Zero(N, d.m);
    tr.y = Mat::Zero(N, d.p);
    tr.r = Mat::Zero(N, d.p);
    tr.x_aw = Mat::Zero(N, d.nmy);

    Vec s = Vec::Zero(sim.state_size());
    if (cfg.x0.size()) s.head(d.n) = cfg.x0;

    for (int k = 0; k < N; ++k) {
        double t = k * h;
        if (!s.allFinite() || s.lpNorm<Eigen::Infinity>() > 1e12)
            throw SimulationError("state diverged", (k > 0 ? (k - 1) * h : 0.0));
        Signals sg = sim.resolve(t, s);
        tr.t[k] = t;
        tr.x_full.row(k) = s.head(d.n).transpose();
        tr.x.row(k) = sg.mon.transpose();
        tr.xhat.row(k) = sg.mon_hat.transpose();
        tr.ex.row(k) = sg.ex.transpose();
        tr.u_c.row(k) = sg.u_c.transpose();
        tr.u_mx.row(k) = sg.u_mx.transpose();
        tr.u_mu.row(k) = sg.u_mu.transpose();
        tr.u.row(k) = sg.u.transpose();
        tr.uhat.row(k) = sg.u_hat.transpose();
        tr.eu.row(k) = (sg.u_hat - sg.u).transpose();
        tr.y.row(k) = sg.y.transpose();
        tr.r.row(k) = sg.r.transpose();
        if (d.nmy) tr.x_aw.row(k) = s.segment(d.n + d.nk, d.nmy).transpose();
        if (k + 1 == N) break;

        Vec k1 = sim.derivative(t, s);
        Vec k2 = sim.derivative(t + 0.5 * h, s + 0.5 * h * k1);
        Vec k3 = sim.derivative(t + 0.5 * h, s + 0.5 * h * k2);
        Vec k4 = sim.derivative(t + h, s + h * k3);
        s += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return tr;
}

namespace {
double trapezoid_sq(const Mat& rows, double h) {
    double acc = 0.0;
    for (int k = 0; k + 1 < rows.rows(); ++k)
        acc += 0.5 * h * (rows.row(k).squaredNorm() + rows.row(k + 1).squaredNorm());
    return acc;
}
}  // namespace

MetricsReport compute_metrics(const SimulationTrace& tr) {
    if (tr.t.size() == 0) throw Error("compute_metrics: empty trace");
    MetricsReport m;
    const double h = tr.step;
    m.sat_error_energy_state = trapezoid_sq(tr.ex, h);
    m.aw_energy_state = trapezoid_sq(tr.u_mx, h);
    m.aw_energy_input = trapezoid_sq(tr.u_mu, h);
    m.sat_error_energy_input = trapezoid_sq(tr.eu, h);
    m.peak_abs_u = tr.u.cwiseAbs().maxCoeff();
    m.peak_violation = tr.ex.cwiseAbs().colwise().maxCoeff().transpose();
    m.tracking_ise = trapezoid_sq(Mat(tr.r - tr.y), h);
    m.horizon = tr.t[tr.t.size() - 1];
    return m;
}

std::string MetricsReport::to_json_string() const {
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["horizon"] = horizon;
    j["sat_error_energy_state"] = sat_error_energy_state;
    j["aw_energy_state"] = aw_energy_state;
    j["aw_energy_input"] = aw_energy_input;
    j["sat_error_energy_input"] = sat_error_energy_input;
    j["peak_abs_u"] = peak_abs_u;
    j["peak_violation"] =
        std::vector<double>(peak_violation.data(), peak_violation.data() + peak_violation.size());
    j["tracking_ise"] = tracking_ise;
    return j.dump(2);
}

DissipationCheck dissipation_check(const SimulationTrace& tr, const Mat& P, double alpha,
                                   double beta, double gamma_sat, double gamma_ctrl) {
    const int N = static_cast<int>(tr.t.size());
    if (N < 3) throw Error("dissipation_check: trace too short");
    if (!is_symmetric(P) || lambda_min_sym(P) <= 0)
        throw Error("dissipation_check: P must be symmetric positive definite");
    const int n = static_cast<int>(tr.x_full.cols());
    const int nq = static_cast<int>(P.rows()) - n;
    if (nq < 0 || (nq > 0 && nq != tr.x_aw.cols()))
        throw DimensionError("dissipation_check: P dimension matches neither x nor (x,q)");
    const double h = tr.step;

    auto V = [&](int k) {
        Vec z(n + nq);
        z.head(n) = tr.x_full.row(k).transpose();
        if (nq) z.tail(nq) = tr.x_aw.row(k).transpose();
        return z.dot(P * z);
    };

    DissipationCheck out;
    out.max_residual = -std::numeric_limits<double>::infinity();
    double scale = 1.0;
    for (int k = 1; k + 1 < N; ++k) {
        double dv = (V(k + 1) - V(k - 1)) / (2.0 * h);
        double a = alpha * tr.u_mx.row(k).squaredNorm();
        double b = beta * tr.ex.row(k).squaredNorm();
        double g1 = gamma_sat * tr.xhat.row(k).squaredNorm();
        double g2 = gamma_ctrl * tr.u_c.row(k).squaredNorm();
        double delta = dv + a + b - g1 - g2;
        out.max_residual = std::max(out.max_residual, delta);
        scale = std::max(scale, std::abs(dv) + a + b + g1 + g2);
    }
    out.max_scaled = out.max_residual / scale;
    return out;
}

void write_trace_csv(const SimulationTrace& tr, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw Error("write_trace_csv: cannot open " + path);
    auto emit_header = [&](const std::string& base, int dim) {
        for (int i = 0; i < dim; ++i) f << "," << base << (dim > 1 ? std::to_string(i + 1) : "");
    };
    f << "t";
    emit_header("x_full", static_cast<int>(tr.x_full.cols()));
    emit_header("x", static_cast<int>(tr.x.cols()));
    emit_header("xhat", static_cast<int>(tr.xhat.cols()));
    emit_header("ex", static_cast<int>(tr.ex.cols()));
    emit_header("u_c", static_cast<int>(tr.u_c.cols()));
    emit_header("u_mx", static_cast<int>(tr.u_mx.cols()));
    emit_header("u_mu", static_cast<int>(tr.u_mu.cols()));
    emit_header("u", static_cast<int>(tr.u.cols()));
    emit_header("uhat", static_cast<int>(tr.uhat.cols()));
    emit_header("eu", static_cast<int>(tr.eu.cols()));
    emit_header("y", static_cast<int>(tr.y.cols()));
    emit_header("r", static_cast<int>(tr.r.cols()));
    f << "\n";
    char buf[40];
    auto emit = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        f << "," << buf;
    };
    for (int k = 0; k < tr.t.size(); ++k) {
        std::snprintf(buf, sizeof(buf), "%.17g", tr.t[k]);
        f << buf;
        for (int c = 0; c < tr.x_full.cols(); ++c) emit(tr.x_full(k, c));
        for (int c = 0; c < tr.x.cols(); ++c) emit(tr.x(k, c));
        for (int c = 0; c < tr.xhat.cols(); ++c) emit(tr.xhat(k, c));
        for (int c = 0; c < tr.ex.cols(); ++c) emit(tr.ex(k, c));
        for (int c = 0; c < tr.u_c.cols(); ++c) emit(tr.u_c(k, c));
        for (int c = 0; c < tr.u_mx.cols(); ++c) emit(tr.u_mx(k, c));
        for (int c = 0; c < tr.u_mu.cols(); ++c) emit(tr.u_mu(k, c));
        for (int c = 0; c < tr.u.cols(); ++c) emit(tr.u(k, c));
        for (int c = 0; c < tr.uhat.cols(); ++c) emit(tr.uhat(k, c));
        for (int c = 0; c < tr.eu.cols(); ++c) emit(tr.eu(k, c));
        for (int c = 0; c < tr.y.cols(); ++c) emit(tr.y(k, c));
        for (int c = 0; c < tr.r.cols(); ++c) emit(tr.r(k, c));
        f << "\n";
    }
}

}  // namespace antw
