#include <doctest.h>

#include "antw/hinf_norm.hpp"
#include "antw/interconnect.hpp"
#include "antw/model_reduction.hpp"
#include "antw/rational.hpp"
#include "antw/state_space.hpp"

using namespace antw;

namespace {

StateSpaceModel second_order_plant() {
    // 1/(s^2 + s + 1)
    return to_state_space(RationalTransfer::siso(Polynomial{1.0}, Polynomial{1.0, 1.0, 1.0}));
}

// random stable SISO transfer with given pole count
StateSpaceModel random_stable_siso(Rng& rng, int order) {
    Polynomial den{1.0};
    int k = 0;
    while (k < order) {
        if (order - k >= 2 && rng.uniform() < 0.5) {
            double wn = rng.uniform(0.3, 4.0), zeta = rng.uniform(0.2, 1.2);
            den = den * Polynomial{1.0, 2.0 * zeta * wn, wn * wn};
            k += 2;
        } else {
            den = den * Polynomial{1.0, rng.uniform(0.2, 4.0)};
            k += 1;
        }
    }
    std::vector<double> nc(order);  // strictly proper
    for (auto& c : nc) c = rng.normal();
    return to_state_space(RationalTransfer::siso(Polynomial(nc), den));
}

std::complex<double> scalar_response(const StateSpaceModel& s, double w) {
    return frequency_response(s, w)(0, 0);
}

}  // namespace

TEST_CASE("to_state_space canonical form of the second-order example") {
    auto g = second_order_plant();
    REQUIRE(g.order() == 2);
    CHECK(g.A(0, 0) == doctest::Approx(-1.0));
    CHECK(g.A(0, 1) == doctest::Approx(-1.0));
    CHECK(g.A(1, 0) == doctest::Approx(1.0));
    CHECK(g.A(1, 1) == doctest::Approx(0.0));
    CHECK(g.B(0, 0) == doctest::Approx(1.0));
    CHECK(g.B(1, 0) == doctest::Approx(0.0));
    // transfer output is the second canonical state; full-state measurement is
    // C = I on the same (A, B)
    CHECK(g.C(0, 0) == doctest::Approx(0.0));
    CHECK(g.C(0, 1) == doctest::Approx(1.0));
    CHECK(g.D(0, 0) == doctest::Approx(0.0));
}

TEST_CASE("to_state_space of a constant is a pure gain") {
    auto w = to_state_space(RationalTransfer::constant(0.01));
    CHECK(w.order() == 0);
    CHECK(w.D(0, 0) == doctest::Approx(0.01));
}

TEST_CASE("to_state_space of a lead-lag weight") {
    auto w = to_state_space(
        RationalTransfer::siso(Polynomial{1.0, 155.5}, Polynomial{1.0, 15.24}));
    CHECK(w.order() == 1);
    CHECK(std::abs(scalar_response(w, 0.0) - 155.5 / 15.24) < 1e-12);
}

TEST_CASE("realization matches the rational transfer on a probe grid") {
    Rng rng(21);
    for (int trial = 0; trial < 8; ++trial) {
        RationalTransfer t;
        t.rows = 2;
        t.cols = 2;
        for (int e = 0; e < 4; ++e) {
            double p1 = rng.uniform(0.2, 3.0), p2 = rng.uniform(0.2, 3.0);
            t.den.push_back(Polynomial{1.0, p1 + p2, p1 * p2});
            t.num.push_back(Polynomial{rng.normal(), rng.normal(), rng.normal()});  // biproper
        }
        auto ss = to_state_space(t);
        for (int i = 0; i < 12; ++i) {
            double w = std::pow(10.0, -2.0 + 4.0 * i / 11.0);
            CMat a = frequency_response(ss, w);
            CMat b = t.eval(std::complex<double>(0.0, w));
            CHECK((a - b).cwiseAbs().maxCoeff() <
                  1e-8 * std::max(1.0, b.cwiseAbs().maxCoeff()));
        }
    }
}

TEST_CASE("to_state_space rejects improper entries") {
    CHECK_THROWS_AS(
        to_state_space(RationalTransfer::siso(Polynomial{1.0, 0.0, 0.0}, Polynomial{1.0, 1.0})),
        Error);
}

TEST_CASE("frequency_response of the second-order example") {
    auto g = second_order_plant();
    CHECK(std::abs(scalar_response(g, 0.0) - 1.0) < 1e-12);
    auto r = scalar_response(g, 1.0);  // denominator becomes j
    CHECK(std::abs(std::abs(r) - 1.0) < 1e-12);
    CHECK(std::arg(r) == doctest::Approx(-M_PI / 2));

    Mat D(2, 3);
    D << 1, 2, 3, 4, 5, 6;
    auto st = StateSpaceModel::gain(D);
    CHECK((frequency_response(st, 17.3).real() - D).norm() < 1e-14);
}

TEST_CASE("frequency_response rejects evaluation at a pole") {
    Mat A(1, 1), B(1, 1), C(1, 1), D(1, 1);
    A << 0.0;  // integrator: pole at the origin
    B << 1.0;
    C << 1.0;
    D << 0.0;
    auto s = StateSpaceModel::make(A, B, C, D);
    CHECK_THROWS_AS(frequency_response(s, 0.0), Error);
}

TEST_CASE("interconnect identities") {
    auto g = second_order_plant();
    // feedback with zero gain leaves the plant untouched
    auto fb0 = feedback_loop(g, StateSpaceModel::zero(1, 1));
    auto ser = series(g, StateSpaceModel::identity(1));
    Rng rng(2);
    for (int i = 0; i < 10; ++i) {
        double w = rng.uniform(0.01, 10.0);
        auto r0 = scalar_response(g, w);
        CHECK(std::abs(scalar_response(fb0, w) - r0) < 1e-10);
        CHECK(std::abs(scalar_response(ser, w) - r0) < 1e-10);
    }
}

TEST_CASE("sensitivity loop matches scalar algebra") {
    auto g = second_order_plant();
    double k = 3.7;
    Mat K(1, 1);
    K << k;
    auto s = anti_windup_sensitivity(g, StateSpaceModel::gain(K));
    CHECK(s.order() == 2);
    for (int i = 0; i < 10; ++i) {
        double w = std::pow(10.0, -2.0 + 4.0 * i / 9.0);
        auto gw = scalar_response(g, w);
        auto expected = 1.0 / (1.0 + k * gw);
        CHECK(std::abs(scalar_response(s, w) - expected) < 1e-9);
    }
}

TEST_CASE("anti_windup_sensitivity special cases") {
    auto g = second_order_plant();
    auto s_id = anti_windup_sensitivity(g, StateSpaceModel::zero(1, 1));
    for (double w : {0.0, 0.5, 2.0})
        CHECK(std::abs(scalar_response(s_id, w) - 1.0) < 1e-12);

    Mat one(1, 1);
    one << 1.0;
    auto s_half =
        anti_windup_sensitivity(StateSpaceModel::gain(one), StateSpaceModel::gain(one));
    CHECK(std::abs(scalar_response(s_half, 1.0) - 0.5) < 1e-12);

    Mat ten(1, 1);
    ten << 10.0;
    auto s10 = anti_windup_sensitivity(g, StateSpaceModel::gain(ten));
    CHECK(std::abs(scalar_response(s10, 0.0)) == doctest::Approx(1.0 / 11.0));
}

TEST_CASE("saturation-error identity for the output anti-windup loop") {
    // hat_y - y = S hat_y - S G u at probe frequencies
    Rng rng(31);
    for (int trial = 0; trial < 6; ++trial) {
        auto g = random_stable_siso(rng, 2 + trial % 3);
        double gm = rng.uniform(0.1, 4.0);
        Mat GM(1, 1);
        GM << gm;

        Interconnector ic;
        int pg = ic.add_part("G", g);
        int pm = ic.add_part("Gmy", StateSpaceModel::gain(GM));
        int yh = ic.add_external_input("yhat", 1);
        int uu = ic.add_external_input("u", 1);
        // y = G(u + u_my), u_my = Gmy (yhat - y)
        ic.connect(pg, 0, Signal::external(uu, 0));
        ic.connect(pg, 0, Signal::output(pm, 0));
        ic.connect(pm, 0, Signal::external(yh, 0));
        ic.connect(pm, 0, Signal::output(pg, 0), -1.0);
        int o = ic.add_output("err", 1);
        ic.output_term(o, 0, Signal::external(yh, 0));
        ic.output_term(o, 0, Signal::output(pg, 0), -1.0);
        auto loop = ic.build();
        REQUIRE(loop.inputs() == 2);

        for (int i = 0; i < 20; ++i) {
            double w = std::pow(10.0, -2.0 + 4.0 * i / 19.0);
            auto gw = scalar_response(g, w);
            auto S = 1.0 / (1.0 + gw * gm);
            CMat R = frequency_response(loop, w);
            CHECK(std::abs(R(0, 0) - S) < 1e-8 * std::max(1.0, std::abs(S)));
            CHECK(std::abs(R(0, 1) - (-S * gw)) < 1e-8 * std::max(1.0, std::abs(S * gw)));
        }
    }
}

TEST_CASE("joint loop matches the closed-form factor expression") {
    // hat_y - y in terms of (hat_y, e, hat_u) through My, Sy, Su
    Rng rng(17);
    auto g = second_order_plant();
    auto k = to_state_space(RationalTransfer::siso(Polynomial{2.0, 4.0}, Polynomial{1.0, 3.0}));
    for (int trial = 0; trial < 4; ++trial) {
        double gmy = rng.uniform(0.2, 3.0), gmu = rng.uniform(0.2, 3.0);
        Mat MY(1, 1), MU(1, 1);
        MY << gmy;
        MU << gmu;

        Interconnector ic;
        int pg = ic.add_part("G", g);
        int pk = ic.add_part("K", k);
        int my = ic.add_part("Gmy", StateSpaceModel::gain(MY));
        int mu = ic.add_part("Gmu", StateSpaceModel::gain(MU));
        int iy = ic.add_external_input("yhat", 1);
        int ie = ic.add_external_input("e", 1);
        int iu = ic.add_external_input("uhat", 1);
        // u = K(e + u_mu) + u_my ; y = G u
        ic.connect(pk, 0, Signal::external(ie, 0));
        ic.connect(pk, 0, Signal::output(mu, 0));
        ic.connect(pg, 0, Signal::output(pk, 0));
        ic.connect(pg, 0, Signal::output(my, 0));
        // u_my = Gmy(yhat - y); u_mu = Gmu(uhat - u), u = K out + Gmy out
        ic.connect(my, 0, Signal::external(iy, 0));
        ic.connect(my, 0, Signal::output(pg, 0), -1.0);
        ic.connect(mu, 0, Signal::external(iu, 0));
        ic.connect(mu, 0, Signal::output(pk, 0), -1.0);
        ic.connect(mu, 0, Signal::output(my, 0), -1.0);
        int o = ic.add_output("ey", 1);
        ic.output_term(o, 0, Signal::external(iy, 0));
        ic.output_term(o, 0, Signal::output(pg, 0), -1.0);
        auto loop = ic.build();

        for (int i = 0; i < 12; ++i) {
            double w = std::pow(10.0, -2.0 + 4.0 * i / 11.0);
            auto G = scalar_response(g, w);
            auto K = scalar_response(k, w);
            auto Sy = 1.0 / (1.0 + G * gmy);
            auto Su = 1.0 / (1.0 + K * gmu);
            auto My = 1.0 / (1.0 - Sy * G * K * gmu * Su * gmy);
            auto cy = My * Sy;
            auto ce = -My * Sy * G * K * (1.0 - gmu * Su * K);
            auto cu = -My * Sy * G * K * gmu * Su;
            CMat R = frequency_response(loop, w);
            double scale = std::max({1.0, std::abs(cy), std::abs(ce), std::abs(cu)});
            CHECK(std::abs(R(0, 0) - cy) < 1e-6 * scale);
            CHECK(std::abs(R(0, 1) - ce) < 1e-6 * scale);
            CHECK(std::abs(R(0, 2) - cu) < 1e-6 * scale);
        }
    }
}

TEST_CASE("ill-posed algebraic loop is reported") {
    // unity-feedthrough loop: y = u, u = y  ->  I - DL singular
    Interconnector ic;
    int p = ic.add_part("direct", StateSpaceModel::identity(1));
    ic.connect(p, 0, Signal::output(p, 0));
    int o = ic.add_output("y", 1);
    ic.output_term(o, 0, Signal::output(p, 0));
    CHECK_THROWS_AS(ic.build(), IllPosedLoopError);
}

TEST_CASE("hinf norm of the second-order example is 2/sqrt(3)") {
    auto g = second_order_plant();
    auto r = hinf_norm(g, 1e-6);
    REQUIRE(r.finite);
    // analytic peak of 1/((1-w^2)^2 + w^2) at w^2 = 1/2
    CHECK(r.value == doctest::Approx(2.0 / std::sqrt(3.0)).epsilon(1e-6));
    CHECK(r.value >= r.sweep_peak - 1e-6);
}

TEST_CASE("hinf norm of a static gain is its largest singular value") {
    Mat D(2, 2);
    D << 1, 2, 0, 1;
    auto r = hinf_norm(StateSpaceModel::gain(D));
    REQUIRE(r.finite);
    CHECK(r.value == doctest::Approx(sigma_max(D)).epsilon(1e-9));
}

TEST_CASE("hinf norm homogeneity") {
    auto g = second_order_plant();
    auto n1 = hinf_norm(g, 1e-8);
    auto n3 = hinf_norm(scale_output(g, 3.0), 1e-8);
    CHECK(n3.value == doctest::Approx(3.0 * n1.value).epsilon(1e-6));
}

TEST_CASE("hinf norm of an unstable model is flagged infinite") {
    Mat A(1, 1), B(1, 1), C(1, 1), D(1, 1);
    A << 0.5;
    B << 1;
    C << 1;
    D << 0;
    auto r = hinf_norm(StateSpaceModel::make(A, B, C, D));
    CHECK_FALSE(r.finite);
}

TEST_CASE("hinf submultiplicativity on random stable pairs") {
    Rng rng(13);
    for (int trial = 0; trial < 6; ++trial) {
        auto g1 = random_stable_siso(rng, 2);
        auto g2 = random_stable_siso(rng, 3);
        auto n1 = hinf_norm(g1, 1e-6);
        auto n2 = hinf_norm(g2, 1e-6);
        auto ns = hinf_norm(series(g1, g2), 1e-6);
        REQUIRE(n1.finite);
        REQUIRE(n2.finite);
        REQUIRE(ns.finite);
        CHECK(ns.value <= n1.value * n2.value * (1.0 + 1e-6) + 1e-12);
    }
}

TEST_CASE("bisection result brackets the dense sweep") {
    SweepSpec dense{1e-3, 1e4, 14000};  // 2000 points per decade
    Rng rng(23);
    for (int trial = 0; trial < 4; ++trial) {
        auto g = random_stable_siso(rng, 3);
        auto r = hinf_norm(g, 1e-6, dense);
        REQUIRE(r.finite);
        CHECK(r.value >= r.sweep_peak - 1e-6 * std::max(1.0, r.sweep_peak));
        CHECK(r.value <= r.sweep_peak * (1.0 + 10.0 * 1e-6) + 1e-9);
    }
}

TEST_CASE("is_hurwitz") {
    CHECK(is_hurwitz(second_order_plant()));
    Mat z = Mat::Zero(1, 1);
    CHECK_FALSE(is_hurwitz(StateSpaceModel::make(z, z, z, z)));
    Mat one(1, 1);
    one << 1.0;
    CHECK_FALSE(is_hurwitz(StateSpaceModel::make(one, z, z, z)));
}

TEST_CASE("state space json round trip") {
    auto g = second_order_plant();
    g.input_labels = {"u[0]"};
    g.output_labels = {"y[0]"};
    auto back = state_space_from_json_string(to_json_string(g));
    CHECK((back.A - g.A).norm() < 1e-15);
    CHECK((back.B - g.B).norm() < 1e-15);
    CHECK((back.C - g.C).norm() < 1e-15);
    CHECK((back.D - g.D).norm() < 1e-15);
    CHECK(back.input_labels == g.input_labels);
}

TEST_CASE("rational json round trip preserves responses") {
    Rng rng(41);
    RationalTransfer t;
    t.rows = 1;
    t.cols = 2;
    t.num = {Polynomial{1.0, 0.5}, Polynomial{0.3}};
    t.den = {Polynomial{1.0, 2.0, 2.0}, Polynomial{1.0, 0.7}};
    auto back = rational_from_json_string(to_json_string(t));
    for (int i = 0; i < 5; ++i) {
        std::complex<double> s(0.0, rng.uniform(0.1, 10.0));
        CHECK((t.eval(s) - back.eval(s)).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("lyapunov solve and balanced truncation") {
    Rng rng(51);
    auto g = random_stable_siso(rng, 4);
    Mat W = g.B * g.B.transpose();
    Mat P = solve_lyapunov(g.A, W);
    CHECK((g.A * P + P * g.A.transpose() + W).norm() < 1e-9 * std::max(1.0, P.norm()));

    // pad with unreachable, unobservable stable states: truncation removes them
    int n = g.order();
    Mat A2 = Mat::Zero(n + 3, n + 3);
    A2.topLeftCorner(n, n) = g.A;
    A2.bottomRightCorner(3, 3) = -Mat::Identity(3, 3);
    Mat B2 = Mat::Zero(n + 3, 1);
    B2.topRows(n) = g.B;
    Mat C2 = Mat::Zero(1, n + 3);
    C2.leftCols(n) = g.C;
    auto padded = StateSpaceModel::make(A2, B2, C2, g.D);
    auto red = balanced_truncate(padded, 1e-8);
    CHECK(red.order() <= n);
    for (double w : {0.1, 1.0, 5.0}) {
        auto a = scalar_response(padded, w);
        auto b = scalar_response(red, w);
        CHECK(std::abs(a - b) < 1e-6 * std::max(1.0, std::abs(a)));
    }
}
