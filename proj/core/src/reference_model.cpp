#include "hall_edge_lab/reference_model.hpp"

#include <cmath>

namespace hel {

RefModelParams RefModelParams::make(double lambda_ref, double v_ref, int omega,
                                    double Z_ref) {
  if (!(v_ref > 0.0)) throw ConfigError("v_ref must be positive");
  if (!(Z_ref > 0.0)) throw ConfigError("Z_ref must be positive");
  if (omega != 1 && omega != -1) throw ConfigError("omega must be +-1");
  RefModelParams p{lambda_ref, v_ref, Z_ref, omega};
  if (std::abs(p.tau()) >= 1.0)
    throw NumericError("AnomalyOutOfRange",
                       "|tau| = " + std::to_string(std::abs(p.tau())) +
                           " >= 1, no valid construction");
  return p;
}

AnomalyVelocities anomaly_and_velocities(double lambda_ref, double v_ref) {
  const RefModelParams p = RefModelParams::make(lambda_ref, v_ref);
  return {p.tau(), p.v_s(), p.v_c()};
}

cplx density_correlator(const RefModelParams& p, double p0, double p1,
                        Channel channel,
                        const std::function<double(double, double)>& w_hat) {
  if (p0 == 0.0 && p1 == 0.0) throw ConfigError("p must be nonzero");
  const double w = p.omega;
  const double v = p.v_ref;
  const cplx D_minus(-w * v * p1, -p0);  // -i p0 - w v p1
  const double zz = p.Z_ref * p.Z_ref;
  if (channel == Channel::Spin) {
    const cplx D_plus(w * v * p1, -p0);
    if (std::abs(D_plus) < 1e-300)
      throw NumericError("PoleHit", "spin denominator vanishes");
    return -D_minus / (kTwoPi * v * zz * D_plus);
  }
  const double what = w_hat ? w_hat(p0, p1) : 1.0;
  const double tw = p.tau() * what;
  const cplx Dt(w * v * (1.0 + tw) / (1.0 - tw) * p1, -p0);
  if (std::abs(Dt) < 1e-300 || std::abs(1.0 - tw) < 1e-300)
    throw NumericError("PoleHit", "charge denominator vanishes");
  return -D_minus / (kTwoPi * v * zz * (1.0 - tw) * Dt);
}

RefTransport transport_closed_form(const RefModelParams& p) {
  RefTransport t;
  const double vs = p.v_s(), vc = p.v_c();
  t.kappa_c = 1.0 / (kPi * vc);
  t.D_c = vc / kPi;
  t.G_c = -p.omega / kPi;
  t.Gtilde_c = -p.omega / kPi;
  t.kappa_s = 1.0 / (kPi * vs);
  t.D_s = vs / kPi;
  t.G_s = -p.omega / kPi;
  t.Gtilde_s = -p.omega / kPi;
  return t;
}

FirstOrderMatch first_order_match(const EdgeState& edge,
                                  const LatticeModel& m, double lambda) {
  if (edge.side != Side::LowerEdge)
    throw ConfigError("first_order_match expects an x2 = 0 edge state");
  if (std::abs(edge.xi.norm() - 1.0) > 1e-10)
    throw ConfigError("edge wavefunction must be normalized");
  const int M = m.M();
  const int L = m.L();
  // w_hat_{r rp}(0; x2, y2) = sum_z1 w_{r rp}(z1; x2, y2)
  // site weights n_{x2, r} = |xi_{x2, r}|^2
  std::vector<double> weight(static_cast<std::size_t>(M) * (L + 1), 0.0);
  for (int x2 = 0; x2 <= L; ++x2)
    for (int r = 0; r < M; ++r)
      weight[x2 * M + r] = std::norm(edge.xi[x2 * M + r]);
  double A = 0.0;
  for (int x2 = 0; x2 <= L; ++x2)
    for (int dy = -1; dy <= 1; ++dy) {
      const int y2 = x2 + dy;
      if (y2 < 0 || y2 > L) continue;
      for (int r = 0; r < M; ++r) {
        const double wx = weight[x2 * M + r];
        if (wx == 0.0) continue;
        for (int rp = 0; rp < M; ++rp) {
          double wk = 0.0;
          for (int z1 = -1; z1 <= 1; ++z1)
            wk += m.interaction(z1, x2, y2, r, rp);
          if (wk != 0.0) A += wk * wx * weight[y2 * M + rp];
        }
      }
    }
  FirstOrderMatch out;
  out.A = A;
  out.lambda_ref_prediction = A * lambda;
  out.v_s_prediction = std::abs(edge.velocity) - (A / kPi) * lambda;
  return out;
}

cplx spin_charge_propagator(const RefModelParams& p, double Z, double dx0,
                            double dx1) {
  if (dx0 == 0.0 && dx1 == 0.0)
    throw NumericError("OriginSingularity", "dx = 0");
  const double w = p.omega;
  const cplx f1(p.v_s() * dx0, w * dx1);
  const cplx f2(p.v_c() * dx0, w * dx1);
  // principal square roots factor by factor; for dx1 = 0, dx0 < 0 both lie
  // on the cut with Im -> 0+ and the product reproduces dx0 sqrt(v_s v_c)
  return 1.0 / (Z * std::sqrt(f1) * std::sqrt(f2));
}

}  // namespace hel
