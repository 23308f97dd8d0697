#include <cmath>
#include <random>

#include "doctest.h"
#include "hall_edge_lab/lattice.hpp"
#include "hall_edge_lab/response.hpp"
#include "hall_edge_lab/spectral.hpp"

using namespace hel;

namespace {
const HaldaneParams kTopo{1.0, 0.5, kPi / 2.0, 0.0};

LatticeModel small_cylinder() {
  return build_haldane(kTopo, 8, 0.0, false, Boundary::CylinderDirichlet);
}
}  // namespace

TEST_CASE("density vertex is the identity away from Dirichlet rows") {
  const auto m = small_cylinder();
  const auto v = build_current_vertex(m, 0.4);
  std::vector<double> full(m.L() + 1, 1.0);
  const Mat J0 = v.windowed(0, 0.7, full);
  for (int x2 = 0; x2 <= m.L(); ++x2)
    for (int r = 0; r < 2; ++r) {
      const double expect = (x2 == 0 || x2 == m.L()) ? 0.0 : 1.0;
      CHECK(std::abs(J0(x2 * 2 + r, x2 * 2 + r) - expect) < 1e-15);
    }
  CHECK(std::abs(J0.sum() - cplx(2.0 * (m.L() - 1), 0.0)) < 1e-12);
}

TEST_CASE("j1 vertex at p1=0, t2=0 matches i e^{-ik}H(-1) - i e^{ik}H(1)") {
  const auto m = build_haldane({1.0, 0.0, 0.0, 0.0}, 8, 0.0, false,
                               Boundary::CylinderDirichlet);
  const auto v = build_current_vertex(m, 0.0);
  const double k1 = 1.234;
  for (int x2 = 1; x2 < 8; ++x2) {
    const Mat J = v.at(1, k1, x2);
    // expected block at (x2, x2): i e^{-ik} H(-1;x2,x2) - i e^{ik} H(1;x2,x2)
    Mat expect = Mat::Zero(2, 2);
    for (int r = 0; r < 2; ++r)
      for (int rp = 0; rp < 2; ++rp)
        expect(r, rp) =
            cplx(0, 1) * std::exp(cplx(0, -k1)) * m.hopping(-1, x2, x2, r, rp) -
            cplx(0, 1) * std::exp(cplx(0, k1)) * m.hopping(1, x2, x2, r, rp);
    CHECK((J.block(x2 * 2, x2 * 2, 2, 2) - expect).cwiseAbs().maxCoeff() <
          1e-14);
    // t2 = 0: no transverse structure in j1
    for (int y2 = 0; y2 <= 8; ++y2)
      if (y2 != x2)
        CHECK(J.block(x2 * 2, y2 * 2, 2, 2).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("vertex hermiticity relation J(k,p)^dag = J(k+p,-p)") {
  const auto m = small_cylinder();
  const double p1 = 0.53, k1 = 2.1;
  const auto vp = build_current_vertex(m, p1);
  const auto vm = build_current_vertex(m, -p1);
  std::vector<double> full(m.L() + 1, 1.0);
  for (int mu : {0, 1, 2}) {
    const Mat a = vp.windowed(mu, k1, full).adjoint();
    const Mat b = vm.windowed(mu, k1 + p1, full);
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("x2-summed density-density bubble vanishes at p1=0, eta != 0") {
  const auto m = small_cylinder();
  const double beta = 10.0;
  const KQuadrature quad = KQuadrature::lattice_grid(m.L());
  std::vector<double> full(m.L() + 1, 1.0);
  const cplx v = bubble_windowed(m, 0.0, beta, kTwoPi / beta, 0.0, 0, 0,
                                 Channel::Charge, full, full, quad);
  CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("ward identity holds to roundoff on the lattice grid") {
  const auto m = small_cylinder();
  const double beta = 8.0;
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> pn(-6, 6), en(-8, 8), y2d(0, 8);
  for (int trial = 0; trial < 8; ++trial) {
    const double p1 = kTwoPi * pn(rng) / m.L();
    const double eta = kTwoPi * en(rng) / beta;
    const int nu = trial % 2;
    const int y2 = y2d(rng);
    const auto r = ward_residual(m, 0.0, beta, eta, p1, nu, Channel::Charge, y2);
    if (r.scale == 0.0) continue;  // p = 0 row: trivially zero
    CHECK(r.relative() < 1e-10);
  }
}

TEST_CASE("ward identity holds for the spinful model and spin channel") {
  const auto m = build_haldane(kTopo, 6, 0.0, true, Boundary::CylinderDirichlet);
  const double beta = 6.0;
  for (Channel ch : {Channel::Charge, Channel::Spin}) {
    const auto r = ward_residual(m, 0.0, beta, kTwoPi * 2 / beta,
                                 kTwoPi * 1 / 6, 1, ch, 3);
    CHECK(r.relative() < 1e-10);
  }
}

TEST_CASE("schwinger term: t1=0 model has Delta proportional to t2 bonds only") {
  // with all hoppings off, Delta vanishes
  const auto empty = build_custom(2, 8, 0.0, false, Boundary::CylinderDirichlet,
                                  {{0, 0, 0, 0, cplx(0.3, 0.0)},
                                   {0, 0, 1, 1, cplx(-0.3, 0.0)}});
  const KQuadrature quad = KQuadrature::lattice_grid(8);
  for (int y2 : {1, 4})
    CHECK(std::abs(schwinger_term(empty, 0.0, 5.0, y2, quad)) < 1e-14);
}

TEST_CASE("free 2pt: 0^- limit gives minus the filled density matrix") {
  const auto m = small_cylinder();
  const double beta = 12.0;
  const KQuadrature quad = KQuadrature::lattice_grid(m.L());
  const Mat s = schwinger_2pt_free(m, 0.0, beta, {0.0, 0, 3}, {0.0, 0, 3}, quad);
  // diagonal entries must be in [-1, 0] (minus occupation)
  for (int r = 0; r < 2; ++r) {
    CHECK(s(r, r).real() <= 1e-12);
    CHECK(s(r, r).real() >= -1.0 - 1e-12);
    CHECK(std::abs(s(r, r).imag()) < 1e-12);
  }
  // trace over all sites = minus total filling of the band below mu
  double tr = 0.0;
  for (int x2 = 0; x2 <= m.L(); ++x2) {
    const Mat sx =
        schwinger_2pt_free(m, 0.0, beta, {0.0, 0, x2}, {0.0, 0, x2}, quad);
    tr += sx.trace().real();
  }
  // half filling of the physical modes: 2(L+1) dofs, (L-1) occupied per ... :
  // just check the value is strictly negative and finite
  CHECK(tr < 0.0);
}

TEST_CASE("free 2pt decays exponentially in imaginary time on a gapped torus") {
  const auto m = build_haldane(kTopo, 8, 0.0, false, Boundary::Torus);
  const double beta = 40.0;
  const KQuadrature quad = KQuadrature::lattice_grid(8);
  // gap ~ 2, so dist(mu, spectrum) ~ 1
  const double s1 =
      schwinger_2pt_free(m, 0.0, beta, {4.0, 0, 3}, {0.0, 0, 3}, quad)
          .cwiseAbs()
          .maxCoeff();
  const double s2 =
      schwinger_2pt_free(m, 0.0, beta, {8.0, 0, 3}, {0.0, 0, 3}, quad)
          .cwiseAbs()
          .maxCoeff();
  CHECK(s1 < std::exp(-0.8 * 4.0));
  CHECK(s2 < std::exp(-0.8 * 8.0));
  CHECK(s2 / s1 < std::exp(-0.5 * 4.0));
}

TEST_CASE("free 2pt is antiperiodic in x0") {
  const auto m = small_cylinder();
  const double beta = 7.0;
  const KQuadrature quad = KQuadrature::lattice_grid(m.L());
  const Mat a =
      schwinger_2pt_free(m, 0.0, beta, {1.3, 2, 4}, {0.0, 0, 3}, quad);
  const Mat b =
      schwinger_2pt_free(m, 0.0, beta, {1.3 + beta, 2, 4}, {0.0, 0, 3}, quad);
  CHECK((a + b).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("conjugation symmetry of the correlator result") {
  const auto m = small_cylinder();
  const double beta = 6.0;
  const KQuadrature quad = KQuadrature::lattice_grid(m.L());
  CorrelatorRequest req;
  req.beta = beta;
  req.eta = kTwoPi * 2 / beta;
  req.p1 = kTwoPi * 1 / 8;
  req.mu = 0;
  req.nu = 1;
  req.x2_set = {2, 3};
  req.y2_set = {1, 4};
  const auto plus = bubble_correlator(m, 0.0, req, quad);
  CorrelatorRequest rev = req;
  rev.eta = -req.eta;
  rev.p1 = -req.p1;
  rev.mu = req.nu;
  rev.nu = req.mu;
  rev.x2_set = req.y2_set;
  rev.y2_set = req.x2_set;
  const auto minus = bubble_correlator(m, 0.0, rev, quad);
  for (const auto& [key, val] : plus.values) {
    const auto [x2, y2] = key;
    const cplx other = minus.values.at({y2, x2});
    CHECK(std::abs(val - other) < 1e-12);
  }
}

TEST_CASE("adaptive quadrature reproduces a fine lattice sum") {
  // kappa-type kernel at moderate beta on the cylinder
  const auto m =
      build_haldane(kTopo, 16, 0.0, false, Boundary::CylinderDirichlet);
  const double beta = 30.0, p1 = 0.37, eta = kTwoPi * 1 / beta;
  std::vector<double> wa = window_leq(16, 7), wap = window_leq(16, 4);
  const auto states = detect_edge_states(m, 0.0, KGrid::lattice(m));
  std::vector<double> crit;
  for (const auto& s : states) {
    crit.push_back(s.kF_refined);
    crit.push_back(s.kF_refined - p1);
  }
  const KQuadrature fine = KQuadrature::lattice_grid(4096);
  const KQuadrature adap = KQuadrature::adaptive(crit, 1e-3);
  const cplx vf = bubble_windowed(m, 0.0, beta, eta, p1, 0, 0, Channel::Charge,
                                  wa, wap, fine);
  const cplx va = bubble_windowed(m, 0.0, beta, eta, p1, 0, 0, Channel::Charge,
                                  wa, wap, adap);
  CHECK(std::abs(vf - va) < 1e-6 * std::abs(vf));
  CHECK(adap.nodes.size() < fine.nodes.size() / 3);
}

TEST_CASE("edge conductance matrix rejects bad windows") {
  const auto m = small_cylinder();
  const KQuadrature quad = KQuadrature::lattice_grid(8);
  CHECK_THROWS_AS((void)edge_conductance_matrix(m, 0.0, 10.0, 3, 3, 0.1, 0.1,
                                                Channel::Charge, quad),
                  ConfigError);
  const auto tor = m.with_boundary(Boundary::Torus);
  CHECK_THROWS_AS((void)edge_conductance_matrix(tor, 0.0, 10.0, 4, 2, 0.1, 0.1,
                                                Channel::Charge, quad),
                  ConfigError);
}

TEST_CASE("extrapolation recovers power-law limits") {
  std::vector<double> eps{0.2, 0.1, 0.05};
  std::vector<double> v1, v2;
  for (double e : eps) {
    v1.push_back(3.0 + 0.7 * e);
    v2.push_back(-1.0 + 2.0 * e * e);
  }
  const auto x1 = extrapolate_sequence(eps, v1);
  const auto x2 = extrapolate_sequence(eps, v2);
  CHECK(x1.value == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(x1.fitted_order == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(x2.value == doctest::Approx(-1.0).epsilon(1e-10));
  CHECK(x2.fitted_order == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("large |x1-y1| free 2pt approaches the edge pole term") {
  // on the topological cylinder the two-point function at large x1 - y1 is
  // dominated by sum_e e^{-i kF dx1} xi xi^* / (-i dx0 + v_e dx1)
  const auto m =
      build_haldane(kTopo, 40, 0.0, false, Boundary::CylinderDirichlet);
  const double beta = 400.0;
  const auto states = detect_edge_states(m, 0.0, KGrid::lattice(m));
  REQUIRE(states.size() == 2);
  std::vector<double> crit;
  for (const auto& s : states) crit.push_back(s.kF_refined);
  const KQuadrature quad = KQuadrature::adaptive(crit, 2e-4, 64);
  // at kF = pi the edge wavefunction vanishes exactly on even sites, so
  // probe odd x2 where the pole residue is O(1)
  const double dx0 = 0.4;
  const int x2 = 3, y2 = 5;
  // pole term per edge branch: e^{-i kF dx1} xi xi^* / (2 pi (|v| dx0
  // + i omega dx1)), the dx0 > 0 stationary-phase result (same structure as
  // the free limit of the spin-charge-separated propagator)
  auto pole_term = [&](int dx1) {
    Mat t = Mat::Zero(2, 2);
    for (const auto& s : states) {
      const cplx phase = std::exp(cplx(0.0, -s.kF_refined * dx1));
      const cplx d(std::abs(s.velocity) * dx0, s.omega * dx1);
      for (int r = 0; r < 2; ++r)
        for (int rp = 0; rp < 2; ++rp)
          t(r, rp) += phase * s.xi[x2 * 2 + r] * std::conj(s.xi[y2 * 2 + rp]) /
                      (kTwoPi * d);
    }
    return t;
  };
  double dev_near = 0.0, dev_far = 0.0;
  for (int pass = 0; pass < 2; ++pass) {
    const int dx1 = pass == 0 ? 9 : 19;
    const Mat s2 =
        schwinger_2pt_free(m, 0.0, beta, {dx0, dx1, x2}, {0.0, 0, y2}, quad);
    const Mat pole = pole_term(dx1);
    const double dev = (s2 - pole).cwiseAbs().maxCoeff() /
                       pole.cwiseAbs().maxCoeff();
    (pass == 0 ? dev_near : dev_far) = dev;
  }
  // remainder decays faster than the pole term: the ratio improves with
  // distance and is close to 1 at the far point
  CHECK(dev_far < dev_near);
  CHECK(dev_far < 0.2);
}
