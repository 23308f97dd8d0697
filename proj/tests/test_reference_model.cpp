#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "hall_edge_lab/lattice.hpp"
#include "hall_edge_lab/reference_model.hpp"
#include "hall_edge_lab/spectral.hpp"

using namespace hel;

TEST_CASE("anomaly and velocities: free case and the tau = 1/2 point") {
  const auto free_case = anomaly_and_velocities(0.0, 1.3);
  CHECK(free_case.tau == 0.0);
  CHECK(free_case.v_s == 1.3);
  CHECK(free_case.v_c == 1.3);
  const auto half = anomaly_and_velocities(kPi, 1.0);
  CHECK(half.tau == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(half.v_c == doctest::Approx(3.0).epsilon(1e-14));
  CHECK_THROWS_WITH_AS((void)anomaly_and_velocities(10.0, 1.0),
                       doctest::Contains("AnomalyOutOfRange"), NumericError);
}

TEST_CASE("velocity split expands as lambda_ref/pi to first order") {
  for (double lam : {1e-3, 1e-4}) {
    const auto av = anomaly_and_velocities(lam, 1.0);
    const double split = av.v_c - av.v_s;
    CHECK(std::abs(split - lam / kPi) < 2.0 * lam * lam);
  }
  // error ratio ~10 under lambda -> lambda/10
  const double e3 =
      std::abs(anomaly_and_velocities(1e-3, 1.0).v_c - 1.0 - 1e-3 / kPi);
  const double e4 =
      std::abs(anomaly_and_velocities(1e-4, 1.0).v_c - 1.0 - 1e-4 / kPi);
  CHECK(e3 / e4 > 30.0);  // quadratic remainder shrinks 100x
}

TEST_CASE("density correlators: spin channel and degenerate limits") {
  const auto p = RefModelParams::make(0.8, 1.1, 1);
  // spin channel at p1 = 0 is -1/(2 pi v Z^2)
  const cplx s = density_correlator(p, 0.7, 0.0, Channel::Spin);
  CHECK(s.real() == doctest::Approx(-1.0 / (kTwoPi * 1.1)).epsilon(1e-12));
  CHECK(std::abs(s.imag()) < 1e-15);
  // free case: charge equals spin for every p
  const auto pf = RefModelParams::make(0.0, 1.1, 1);
  for (auto [p0, p1] : {std::pair{0.3, 0.2}, {0.0, 1.0}, {-0.4, 0.7}}) {
    const cplx c = density_correlator(pf, p0, p1, Channel::Charge);
    const cplx sp = density_correlator(pf, p0, p1, Channel::Spin);
    CHECK(std::abs(c - sp) < 1e-14);
  }
}

TEST_CASE("charge correlator static limit carries the 1/(1-tau) dressing") {
  const auto p = RefModelParams::make(0.9, 1.0, 1);
  const double tau = p.tau();
  const cplx c = density_correlator(p, 0.0, 0.4, Channel::Charge);
  const double expected =
      -1.0 / (kTwoPi * p.v_ref) / (1.0 - tau) * (-p.v_s() / p.v_c());
  CHECK(c.real() == doctest::Approx(expected).epsilon(1e-12));
  CHECK(std::abs(c.imag()) < 1e-15);
}

TEST_CASE("transport closed form satisfies the exact scaling relations") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> lam(-2.0, 2.0), vr(0.1, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double v = vr(rng);
    double l = lam(rng);
    if (std::abs(l / (kTwoPi * v)) >= 0.95) l = 0.5 * v;  // keep |tau| < 1
    const int omega = trial % 2 == 0 ? 1 : -1;
    const auto p = RefModelParams::make(l, v, omega);
    const auto t = transport_closed_form(p);
    const double ulp = 8.0 * std::numeric_limits<double>::epsilon();
    CHECK(std::abs(t.D_c - t.kappa_c * p.v_c() * p.v_c()) <= ulp * t.D_c);
    CHECK(std::abs(t.D_s - t.kappa_s * p.v_s() * p.v_s()) <= ulp * t.D_s);
    CHECK(t.G_c + omega / kPi == 0.0);
    CHECK(t.G_s + omega / kPi == 0.0);
    CHECK(t.Gtilde_c == t.G_c);
    CHECK(t.D_c * t.kappa_c == doctest::Approx(1.0 / (kPi * kPi)).epsilon(1e-14));
  }
}

TEST_CASE("first order match on the haldane edge state") {
  const HaldaneParams hp{1.0, 0.5, kPi / 2.0, 0.0};
  auto m = build_haldane(hp, 40, 0.0, false, Boundary::CylinderDirichlet)
               .with_interaction(onsite_interaction(2, 1.0));
  const auto states = detect_edge_states(m, 0.0, KGrid::lattice(m));
  REQUIRE(!states.empty());
  const EdgeState* lower = nullptr;
  for (const auto& s : states)
    if (s.side == Side::LowerEdge) lower = &s;
  REQUIRE(lower != nullptr);
  const double lambda = 1e-3;
  const auto fom = first_order_match(*lower, m, lambda);
  // on-site w: A = sum |xi|^4 <= 1 by Cauchy-Schwarz on a unit vector
  CHECK(fom.A > 0.0);
  CHECK(fom.A <= 1.0);
  CHECK(fom.lambda_ref_prediction == doctest::Approx(fom.A * lambda));
  CHECK(fom.v_s_prediction ==
        doctest::Approx(std::abs(lower->velocity) - fom.A / kPi * lambda));
  // independent contraction order: quadratic form of the weight vector
  const int M = 2, L = 40;
  double A2 = 0.0;
  for (int x2 = 0; x2 <= L; ++x2)
    for (int r = 0; r < M; ++r)
      A2 += std::pow(std::norm(lower->xi[x2 * M + r]), 2.0);
  CHECK(fom.A == doctest::Approx(A2).epsilon(1e-12));
}

TEST_CASE("first order match rejects bad inputs") {
  const HaldaneParams hp{1.0, 0.5, kPi / 2.0, 0.0};
  auto m = build_haldane(hp, 20, 0.0, false, Boundary::CylinderDirichlet)
               .with_interaction(onsite_interaction(2, 1.0));
  auto states = detect_edge_states(m, 0.0, KGrid::lattice(m));
  for (auto& s : states) {
    if (s.side == Side::UpperEdge)
      CHECK_THROWS_AS((void)first_order_match(s, m, 0.1), ConfigError);
    if (s.side == Side::LowerEdge) {
      EdgeState bad = s;
      bad.xi *= 2.0;
      CHECK_THROWS_AS((void)first_order_match(bad, m, 0.1), ConfigError);
    }
  }
}

TEST_CASE("closed-form first-order consistency against the reference model") {
  // v_c(lambda_ref) - v_s from the closed form matches lambda_ref/pi with
  // quadratic error; the error ratio is ~10 per decade in lambda
  const double A = 0.4, v = 1.2;
  auto err = [&](double lambda) {
    const double lref = A * lambda;
    const auto av = anomaly_and_velocities(lref, v);
    return std::abs((av.v_c - av.v_s) - A * lambda / kPi);
  };
  const double r = err(1e-3) / err(1e-4);
  CHECK(r > 30.0);
  CHECK(err(1e-3) < 1e-5);
}

TEST_CASE("spin-charge propagator reduces to the free chiral form") {
  const auto pf = RefModelParams::make(0.0, 1.4, -1);
  for (auto [dx0, dx1] : {std::pair{0.7, -1.3}, {-0.4, 0.9}, {2.0, 0.0}}) {
    const cplx val = spin_charge_propagator(pf, 1.0, dx0, dx1);
    const cplx free_prop = 1.0 / cplx(1.4 * dx0, -1.0 * dx1);
    CHECK(std::abs(val - free_prop) < 1e-13);
  }
}

TEST_CASE("spin-charge propagator: homogeneity and pure-time values") {
  const auto p = RefModelParams::make(1.2, 1.0, 1);
  // |value| ~ 1/r along rays
  const cplx a = spin_charge_propagator(p, 1.0, 0.3, 0.4);
  const cplx b = spin_charge_propagator(p, 1.0, 3.0, 4.0);
  CHECK(std::abs(b) == doctest::Approx(std::abs(a) / 10.0).epsilon(1e-12));
  // pure time separation: (1/Z) / (dx0 sqrt(v_s v_c)), both signs of dx0
  const double root = std::sqrt(p.v_s() * p.v_c());
  for (double dx0 : {1.7, -1.7}) {
    const cplx v = spin_charge_propagator(p, 2.0, dx0, 0.0);
    CHECK(v.real() == doctest::Approx(1.0 / (2.0 * dx0 * root)).epsilon(1e-12));
    CHECK(std::abs(v.imag()) < 1e-12);
  }
  CHECK_THROWS_WITH_AS((void)spin_charge_propagator(p, 1.0, 0.0, 0.0),
                       doctest::Contains("OriginSingularity"), NumericError);
}

TEST_CASE("propagator is continuous along dx0 at fixed dx1") {
  const auto p = RefModelParams::make(0.9, 1.0, 1);
  for (double dx1 : {0.4, -0.4}) {
    cplx prev = spin_charge_propagator(p, 1.0, -2.0, dx1);
    for (double dx0 = -2.0 + 0.05; dx0 <= 2.0; dx0 += 0.05) {
      const cplx cur = spin_charge_propagator(p, 1.0, dx0, dx1);
      CHECK(std::abs(cur - prev) < 0.6 * std::abs(prev) + 0.2);
      prev = cur;
    }
  }
}

TEST_CASE("density correlator accepts a p-dependent w_hat") {
  const auto p = RefModelParams::make(0.6, 1.0, 1);
  auto what = [](double p0, double p1) {
    return 1.0 / (1.0 + 0.2 * (p0 * p0 + p1 * p1));
  };
  const cplx full = density_correlator(p, 0.3, 0.5, Channel::Charge, what);
  const cplx leading = density_correlator(p, 0.3, 0.5, Channel::Charge);
  CHECK(std::abs(full - leading) > 1e-4);  // the dressing matters
  // at p -> 0 the two agree since w_hat(0) = 1
  const cplx a = density_correlator(p, 3e-3, 5e-3, Channel::Charge, what);
  const cplx b = density_correlator(p, 3e-3, 5e-3, Channel::Charge);
  CHECK(std::abs(a - b) < 1e-4 * std::abs(b));
}
