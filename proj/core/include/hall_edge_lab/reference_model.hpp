#pragma once

#include <functional>

#include "hall_edge_lab/spectral.hpp"
#include "hall_edge_lab/types.hpp"

namespace hel {

// Chiral Luttinger reference model parameters. The chiral anomaly
// tau = lambda_ref / (2 pi v_ref) dresses the charge sector:
// v_s = v_ref, v_c = v_ref (1 + tau)/(1 - tau). Valid only for |tau| < 1.
struct RefModelParams {
  double lambda_ref = 0.0;
  double v_ref = 1.0;
  double Z_ref = 1.0;
  int omega = 1;

  double tau() const { return lambda_ref / (kTwoPi * v_ref); }
  double v_s() const { return v_ref; }
  double v_c() const { return v_ref * (1.0 + tau()) / (1.0 - tau()); }

  static RefModelParams make(double lambda_ref, double v_ref, int omega = 1,
                             double Z_ref = 1.0);
};

struct AnomalyVelocities {
  double tau = 0.0;
  double v_s = 0.0;
  double v_c = 0.0;
};

// Throws AnomalyOutOfRange when |tau| >= 1.
AnomalyVelocities anomaly_and_velocities(double lambda_ref, double v_ref);

// Exact density-density correlators of the reference model:
//  charge: -(1/(2 pi v_ref Z^2)) D_{-w}(p) / ((1 - tau w_hat(p)) Dt_w(p))
//  spin:   -(1/(2 pi v_ref Z^2)) D_{-w}(p) / D_w(p)
// with D_w(p) = -i p0 + w v_ref p1 and Dt_w the tau-dressed charge
// denominator. w_hat defaults to the leading constant w_hat == 1.
// Throws PoleHit on vanishing denominators.
cplx density_correlator(const RefModelParams& p, double p0, double p1,
                        Channel channel,
                        const std::function<double(double, double)>& w_hat =
                            nullptr);

struct RefTransport {
  double kappa_c = 0.0, D_c = 0.0, G_c = 0.0, Gtilde_c = 0.0;
  double kappa_s = 0.0, D_s = 0.0, G_s = 0.0, Gtilde_s = 0.0;
};

// kappa = 1/(pi v), D = v/pi per channel velocity; G = Gtilde = -omega/pi
// in both channels, independent of the coupling.
RefTransport transport_closed_form(const RefModelParams& p);

struct FirstOrderMatch {
  double A = 0.0;                  // edge interaction overlap
  double lambda_ref_prediction = 0.0;  // A * lambda to leading order
  double v_s_prediction = 0.0;         // |v_e| - (A/pi) lambda
};

// A = sum_{x2,y2,r,rp} w_hat_{r rp}(0; x2, y2) |xi_{x2,r}|^2 |xi_{y2,rp}|^2
// for an x2 = 0 edge state; rejects unnormalized or wrong-side states.
FirstOrderMatch first_order_match(const EdgeState& edge,
                                  const LatticeModel& interacting_model,
                                  double lambda);

// (1/Z) [(v_s dx0 + i w dx1)(v_c dx0 + i w dx1)]^{-1/2}; principal branch of
// each factor, continuous along dx0 at fixed dx1. Throws OriginSingularity.
cplx spin_charge_propagator(const RefModelParams& p, double Z, double dx0,
                            double dx1);

}  // namespace hel
