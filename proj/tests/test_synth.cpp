#include <doctest.h>

#include "antw/controllers.hpp"
#include "antw/fixed_structure.hpp"
#include "antw/rational.hpp"

using namespace antw;

namespace {

StateSpaceModel siso_plant() {
    return to_state_space(RationalTransfer::siso(Polynomial{1.0}, Polynomial{1.0, 1.0, 1.0}));
}

StateSpaceModel state_measured_plant() {
    Mat A(2, 2), B(2, 1);
    A << -1, -1, 1, 0;
    B << 1, 0;
    return StateSpaceModel::make(A, B, Mat::Identity(2, 2), Mat::Zero(2, 1));
}

StateSpaceModel w_const(double c) {
    Mat D(1, 1);
    D << c;
    return StateSpaceModel::gain(D);
}

StateSpaceModel lead_lag_weight() {
    return to_state_space(
        RationalTransfer::siso(Polynomial{1.0, 231.9}, Polynomial{1.0, 22.74}));
}

// direct realization of the stacked mixed-sensitivity matrix
// [[W1 S, -W1 S G], [W2 Gmy S, -W2 Gmy S G]]
StateSpaceModel mixed_sensitivity_direct(const StateSpaceModel& G, const StateSpaceModel& Gmy,
                                         const StateSpaceModel& W1, const StateSpaceModel& W2) {
    const int p = G.outputs(), m = G.inputs();
    auto S = anti_windup_sensitivity(G, Gmy);
    auto SG = series(G, S);
    auto GmyS = series(S, Gmy);
    auto GmySG = series(SG, Gmy);
    auto w1p = (W1.inputs() == 1 && p > 1) ? replicate_diag(W1, p) : W1;
    auto w2m = (W2.inputs() == 1 && m > 1) ? replicate_diag(W2, m) : W2;
    return block_transfer({{series(S, w1p), scale_output(series(SG, w1p), -1.0)},
                           {series(GmyS, w2m), scale_output(series(GmySG, w2m), -1.0)}});
}

Mat random_stabilizing_gmy(Rng& rng, const StateSpaceModel& G) {
    while (true) {
        Mat g = 0.5 * rng.normal_matrix(G.inputs(), G.outputs());
        Mat Acl = G.A - G.B * g * G.C;
        if (spectral_abscissa(Acl) < -1e-3) return g;
    }
}

}  // namespace

TEST_CASE("output anti-windup plant channels for the SISO case") {
    auto gp = build_output_aw_plant(siso_plant(), w_const(10.0), w_const(0.01));
    CHECK(gp.nw == 2);
    CHECK(gp.nu == 1);
    CHECK(gp.nz == 2);
    CHECK(gp.ny == 1);
    // zero compensator: yhat -> (yhat - y) channel is the identity
    auto cl = lower_lft(gp, StateSpaceModel::zero(1, 1));
    Interconnector noop;
    (void)noop;
    auto gpp = gp.P;
    for (double w : {0.1, 1.0, 10.0}) {
        CMat R = frequency_response(gpp, w);
        CHECK(std::abs(R(2, 0) - 1.0) < 1e-12);  // (err row, yhat col)
    }
    (void)cl;
}

TEST_CASE("output anti-windup plant reproduces W1 S when closed") {
    auto G = siso_plant();
    Mat g(1, 1);
    g << 2.0;
    auto gp = build_output_aw_plant(G, w_const(10.0), w_const(0.01));
    auto cl = lower_lft(gp, StateSpaceModel::gain(g));
    auto S = anti_windup_sensitivity(G, StateSpaceModel::gain(g));
    for (int i = 0; i < 10; ++i) {
        double w = std::pow(10.0, -2.0 + 4.0 * i / 9.0);
        auto expect = 10.0 * frequency_response(S, w)(0, 0);
        auto got = frequency_response(cl, w)(0, 0);
        CHECK(std::abs(got - expect) < 1e-8 * std::max(1.0, std::abs(expect)));
    }
}

TEST_CASE("mixed-sensitivity matrix equals the LFT closed loop") {
    auto G = state_measured_plant();
    auto gp = build_output_aw_plant(G, w_const(10.0), w_const(0.01));
    Rng rng(7);
    for (int trial = 0; trial < 4; ++trial) {
        Mat g = random_stabilizing_gmy(rng, G);
        auto direct = mixed_sensitivity_direct(G, StateSpaceModel::gain(g), w_const(10.0),
                                               w_const(0.01));
        auto lft = lower_lft(gp, StateSpaceModel::gain(g));
        auto n1 = hinf_norm(direct, 1e-8);
        auto n2 = hinf_norm(lft, 1e-8);
        REQUIRE(n1.finite);
        REQUIRE(n2.finite);
        CHECK(n2.value == doctest::Approx(n1.value).epsilon(1e-6));
    }
}

TEST_CASE("joint plant template rows") {
    auto G = state_measured_plant();
    auto K = integral_state_feedback((Mat(1, 2) << 4.0, 3.0).finished(), 2.0, 1);
    auto Wu = lead_lag_weight();
    auto Wy = lead_lag_weight();
    auto gp = build_joint_aw_plant(G, K, Wy, Wu);
    const int p = 2, m = 1;
    CHECK(gp.nw == 3 * p + m);
    CHECK(gp.nu == m + p);
    CHECK(gp.nz == p + m);
    CHECK(gp.ny == p + m);

    // weight poles at -22.74 appear in the plant spectrum
    auto ev = eigenvalues(gp.P.A);
    REQUIRE(ev.converged);
    int hits = 0;
    for (int i = 0; i < ev.values.size(); ++i)
        if (std::abs(ev.values[i] - std::complex<double>(-22.74, 0.0)) < 1e-6) ++hits;
    CHECK(hits >= 2);  // one per weighted channel

    // zero compensator: the (e -> uhat - u) block equals -K
    auto cl = lower_lft(gp, StateSpaceModel::zero(gp.nu, gp.ny));
    for (double w : {0.1, 1.0, 25.0}) {
        CMat R = frequency_response(cl, w);
        CMat Kw = frequency_response(K, w);
        // z rows: (z1t p, z2t m); exogenous cols: (yhat p, w p, e p, uhat m)
        // use the measurement row via a plant probe instead: close nothing and
        // check P itself
        CMat Rp = frequency_response(gp.P, w);
        for (int c = 0; c < p; ++c) {
            std::complex<double> got = Rp(p + m + p, 2 * p + c);  // eu row, e col
            CHECK(std::abs(got - (-Kw(0, c))) < 1e-8 * std::max(1.0, std::abs(Kw(0, c))));
        }
    }
    (void)cl;
}

TEST_CASE("lower LFT identities") {
    // static plant, P22 = 0: F_l = P11 + P12 C P21
    Mat P(2, 2);
    P << 0.3, 0.7, 1.1, 0.0;
    GeneralizedPlant gp;
    gp.P = StateSpaceModel::gain(P);
    gp.nw = gp.nu = gp.nz = gp.ny = 1;
    Mat c(1, 1);
    c << 2.5;
    auto cl = lower_lft(gp, StateSpaceModel::gain(c));
    CHECK(cl.D(0, 0) == doctest::Approx(0.3 + 0.7 * 2.5 * 1.1));

    auto cl0 = lower_lft(gp, StateSpaceModel::zero(1, 1));
    CHECK(cl0.D(0, 0) == doctest::Approx(0.3));
}

TEST_CASE("compensator realization matches its rational definition") {
    Rng rng(19);
    CompensatorStructure s = CompensatorStructure::single(1, 2, 3);
    for (int trial = 0; trial < 10; ++trial) {
        Vec th(s.parameter_count());
        for (int i = 0; i < th.size(); ++i) th[i] = rng.normal();
        auto C = realize_compensator(s, th);
        CHECK(C.order() == 3);
        CHECK(is_hurwitz(C, 0.0));  // stability enforced by the pole map

        // oracle: evaluate numerator/denominator polynomials directly
        auto sp = [](double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); };
        Polynomial den = Polynomial{1.0, sp(th[0]) + 1e-3, sp(th[1]) + 1e-3} *
                         Polynomial{1.0, sp(th[2]) + 1e-3};
        for (double w : {0.0, 0.5, 2.0, 20.0}) {
            std::complex<double> jw(0.0, w);
            CMat R = frequency_response(C, w);
            for (int j = 0; j < 2; ++j) {
                Polynomial num(std::vector<double>(th.data() + 3 + 4 * j,
                                                   th.data() + 3 + 4 * (j + 1)));
                auto expect = num.eval(jw) / den.eval(jw);
                CHECK(std::abs(R(0, j) - expect) < 1e-9 * std::max(1.0, std::abs(expect)));
            }
        }
    }
}

TEST_CASE("order-zero structure is a pure gain") {
    CompensatorStructure s = CompensatorStructure::static_gain(2, 3);
    CHECK(s.parameter_count() == 6);
    Vec th(6);
    th << 1, 2, 3, 4, 5, 6;
    auto C = realize_compensator(s, th);
    CHECK(C.order() == 0);
    CHECK(C.D(0, 0) == 1.0);
    CHECK(C.D(1, 2) == 6.0);
}

TEST_CASE("diagonal embedding into a full block is exact") {
    Rng rng(23);
    auto diag = CompensatorStructure::diagonal(1, 2, 1, 1, 2);
    auto full = CompensatorStructure::single(2, 3, 2);
    Vec th(diag.parameter_count());
    for (int i = 0; i < th.size(); ++i) th[i] = rng.normal();
    Vec thf = embed_into_full(diag, th, full);
    auto Cd = realize_compensator(diag, th);
    auto Cf = realize_compensator(full, thf);
    for (double w : {0.1, 1.0, 7.0}) {
        CMat a = frequency_response(Cd, w);
        CMat b = frequency_response(Cf, w);
        CHECK((a - b).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("static synthesis finds the zero optimum of a degenerate objective") {
    // z = [w; c C w]: any nonzero gain only hurts
    Mat P(2, 2);
    P << 1.0, 0.0, 0.0, 3.0;
    GeneralizedPlant gp;
    gp.P = StateSpaceModel::gain(P);
    gp.nw = 1;
    gp.nu = 1;
    gp.nz = 2;
    gp.ny = 0;
    // measurement channel: reuse w as y via an explicit row
    Mat P2(3, 2);
    P2 << 1.0, 0.0, 0.0, 3.0, 1.0, 0.0;
    gp.P = StateSpaceModel::gain(P2);
    gp.ny = 1;
    SynthOptions o;
    o.starts = 4;
    o.evals_per_start = 400;
    auto res = synthesize_fixed_structure(gp, CompensatorStructure::static_gain(1, 1), o);
    CHECK(std::abs(res.theta[0]) < 1e-3);
    CHECK(res.achieved_norm == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("fixed-structure synthesis improves on the open loop") {
    auto G = state_measured_plant();
    auto W1 = to_state_space(
        RationalTransfer::siso(Polynomial{1.0, 155.5}, Polynomial{1.0, 15.24}));
    auto gp = build_output_aw_plant(G, W1, w_const(0.01));
    SynthOptions o;
    o.starts = 4;
    o.evals_per_start = 600;
    o.seed = 5;
    auto res = synthesize_fixed_structure(
        gp, CompensatorStructure::single(1, 2, 2), o);
    REQUIRE(res.stable);
    CHECK(res.achieved_norm < res.open_loop_norm);
    // incumbent objective never increases
    for (std::size_t i = 1; i < res.history.size(); ++i)
        CHECK(res.history[i].second <= res.history[i - 1].second + 1e-15);
    // achieved norm is self-consistent with an independent evaluation
    auto cl = lower_lft(gp, res.compensator);
    auto check = hinf_norm(cl, 1e-6);
    REQUIRE(check.finite);
    CHECK(res.achieved_norm == doctest::Approx(check.value).epsilon(1e-9));
}

TEST_CASE("weight scaling scales the closed-loop norm at fixed compensator") {
    auto G = state_measured_plant();
    auto gp1 = build_output_aw_plant(G, w_const(10.0), w_const(0.01));
    auto gp3 = build_output_aw_plant(G, w_const(30.0), w_const(0.03));
    Rng rng(31);
    Mat g = random_stabilizing_gmy(rng, G);
    auto n1 = hinf_norm(lower_lft(gp1, StateSpaceModel::gain(g)), 1e-8);
    auto n3 = hinf_norm(lower_lft(gp3, StateSpaceModel::gain(g)), 1e-8);
    REQUIRE(n1.finite);
    REQUIRE(n3.finite);
    CHECK(n3.value == doctest::Approx(3.0 * n1.value).epsilon(1e-6));
}

TEST_CASE("full matrix contains the diagonal structure") {
    auto G = state_measured_plant();
    auto K = pid_controller(4.0, 3.0, 0.5, 0.2);
    // joint loop uses the error vector: lift the PID to the state error by
    // feeding only the tracked channel
    Mat lift(1, 2);
    lift << 0.0, 1.0;
    auto Kv = series(StateSpaceModel::gain(lift), K);
    auto W = lead_lag_weight();
    auto gp = build_joint_aw_plant(G, Kv, W, W);

    SynthOptions o;
    o.starts = 3;
    o.evals_per_start = 350;
    o.seed = 9;
    auto diag_s = CompensatorStructure::diagonal(1, 2, 2, 1, 2);
    auto diag = synthesize_fixed_structure(gp, diag_s, o);

    auto full_s = CompensatorStructure::single(3, 3, 2);
    SynthOptions o2 = o;
    o2.warm_starts = {embed_into_full(diag_s, diag.theta, full_s)};
    auto full = synthesize_fixed_structure(gp, full_s, o2);

    CHECK(full.achieved_norm <= diag.achieved_norm + 1e-6);
}
