#pragma once

#include <map>
#include <optional>
#include <vector>

#include "hall_edge_lab/lattice.hpp"
#include "hall_edge_lab/spectral.hpp"
#include "hall_edge_lab/types.hpp"

namespace hel {

// Nearest bosonic Matsubara frequency (2pi/beta) Z.
inline double snap_matsubara(double eta, double beta) {
  const double unit = kTwoPi / beta;
  return unit * std::llround(eta / unit);
}

// k1 quadrature: either the physical L-point lattice grid (weights 1/L, on
// which the lattice Ward identity is exact) or an adaptive analysis mesh for
// beta,L -> infinity transport evaluation. Weights represent the k-average:
// sum_i w_i f(k_i) ~ (1/L) sum_{k in S^1_L} f(k) ~ int dk/2pi f(k).
struct KQuadrature {
  std::vector<double> nodes;
  std::vector<double> weights;
  bool lattice = true;

  static KQuadrature lattice_grid(int n);
  // Gauss-Legendre panels graded toward the critical momenta (Fermi points
  // and their p1 shifts), resolving scales down to min_width.
  static KQuadrature adaptive(const std::vector<double>& critical_points,
                              double min_width, int coarse_panels = 32,
                              int gl_order = 8);
};

// One-particle current vertices J_mu(k1, p1) on the (x2, r) space.
// j_0 is the density vertex; j_1, j_2 collect the bond currents along e1,
// e2 with the four sqrt(2) diagonals at weight 1/2.
struct CurrentVertex {
  const LatticeModel* model = nullptr;
  double p1 = 0.0;

  // sum_{x2} weight[x2] * J_mu(k1, p1; x2); weight has L+1 entries.
  Mat windowed(int mu, double k1, const std::vector<double>& x2_weight) const;
  // single-x2 vertex J_mu(k1, p1; x2)
  Mat at(int mu, double k1, int x2) const;
};

CurrentVertex build_current_vertex(const LatticeModel& m, double p1);

std::vector<double> window_leq(int L, int a);  // indicator of x2 <= a

struct SpacetimePoint {
  double x0 = 0.0;
  int x1 = 0;
  int x2 = 0;
};

// Free time-ordered two-point function <T a^-_{x,r} a^+_{y,r'}>, Matsubara
// sum done in closed form per eigenmode, antiperiodic in x0 - y0 with the
// 0^- convention on the diagonal.
Mat schwinger_2pt_free(const LatticeModel& m, double mu, double beta,
                       const SpacetimePoint& x, const SpacetimePoint& y,
                       const KQuadrature& quad);

struct CorrelatorRequest {
  double beta = 10.0;
  double eta = 0.0;  // snapped to (2pi/beta) Z
  double p1 = 0.0;
  int mu = 0;
  int nu = 0;
  Channel channel = Channel::Charge;
  std::vector<int> x2_set;
  std::vector<int> y2_set;
};

struct CorrelatorResult {
  double beta = 0.0;
  int L = 0;
  double eta_raw = 0.0;
  double eta_beta = 0.0;
  double p1 = 0.0;
  int mu = 0;
  int nu = 0;
  Channel channel = Channel::Charge;
  bool analysis_grid = false;
  std::map<std::pair<int, int>, cplx> values;  // (x2, y2) -> value
};

// Connected time-ordered current-current correlator
// <T j^sharp_mu(eta_beta, p1, x2) ; j^sharp_nu(-eta_beta, -p1, y2)>,
// evaluated as a one-loop sum over eigenmode pairs of H(k1), H(k1+p1) with
// the frequency sum done analytically:
//   (1/L) sum_k sum_{a,b} A_ab B_ba (f_b - f_a)/(i eta + e_a - e_b),
// the e_a = e_b, eta = 0 case taking the -beta n_F' limit. lambda = 0 only.
CorrelatorResult bubble_correlator(const LatticeModel& m, double mu_chem,
                                   const CorrelatorRequest& req,
                                   const KQuadrature& quad, int workers = 0);

// Windowed version used by transport: x2/y2 sums folded into the vertices.
cplx bubble_windowed(const LatticeModel& m, double mu_chem, double beta,
                     double eta_beta, double p1, int mu, int nu,
                     Channel channel, const std::vector<double>& x2_weight,
                     const std::vector<double>& y2_weight,
                     const KQuadrature& quad, int workers = 0);

// Schwinger term Delta_{1,y2}: kinetic energy of the e1 bond plus half the
// four sqrt(2) bonds, from the one-particle density matrix (lambda = 0).
double schwinger_term(const LatticeModel& m, double mu_chem, double beta,
                      int y2, const KQuadrature& quad);

struct WardResidual {
  double residual = 0.0;
  double scale = 0.0;   // sum of the magnitudes of all identity terms
  double floor = 0.0;   // kinetic reference for 0 = 0 momentum rows
  double relative() const {
    const double s = std::max(scale, floor);
    return s > 0 ? residual / s : residual;
  }
};

// Residual of the momentum-space continuity identity
//  sum_mu eta_mu(p) p_mu sum_{x2} <T j_mu j_nu> + eta_nu(p) p_nu Delta_nu,y2
// with eta_0 = i, eta_1(p) = (1 - e^{i p1})/(-i p1). Exact (up to roundoff)
// on the lattice grid for any (eta_beta, p1).
WardResidual ward_residual(const LatticeModel& m, double mu_chem, double beta,
                           double eta, double p1, int nu, Channel channel,
                           int y2, int workers = 0);

// G^a_{mu nu}(eta, p1) for mu, nu in {0,1}:
//  sum_{y2<=a'} [ sum_{x2<=a} <T j_mu j_nu> + Delta_mu delta_{mu nu} ]
//  * (-1)^{delta_{mu,1}},  a > a' >= 1, cylinder models only.
Eigen::Matrix2cd edge_conductance_matrix(const LatticeModel& m, double mu_chem,
                                         double beta, int a, int a_prime,
                                         double eta, double p1,
                                         Channel channel,
                                         const KQuadrature& quad,
                                         int workers = 0);

struct TransportPoint {
  double eps = 0.0;
  double eta_raw = 0.0;
  double eta_beta = 0.0;
  double p1 = 0.0;
  int a = 0;
  int a_prime = 0;
  cplx value;
};

struct Extrapolated {
  double value = 0.0;
  double error = 0.0;
  double fitted_order = 0.0;
};

struct CoefficientTrace {
  std::vector<TransportPoint> raw;
  Extrapolated limit;
};

struct TransportCoefficients {
  double beta = 0.0;
  int a = 0;
  int a_prime = 0;
  Channel channel = Channel::Charge;
  // kappa, G: eta -> 0 before p1 -> 0 (eta = eps^2, p1 = eps);
  // D, Gtilde: p1 -> 0 before eta -> 0 (p1 = eps^2, eta = eps).
  CoefficientTrace kappa, D, G, Gtilde;
  // the kappa kernel under the reversed (D-type) ordering
  CoefficientTrace reversed_g00;
  double a_sensitivity = 0.0;  // |G(a,a') - G(a+5,a'+5)| at the largest eps
};

struct TransportOptions {
  int workers = 0;
  double min_panel = 0.0;  // 0 = auto from beta and the velocities
  int coarse_panels = 32;
  int gl_order = 8;
  int a_shift = 5;  // window growth for the a-insensitivity diagnostic
};

// Evaluates every edge transport coefficient along its prescribed limit
// ordering on the epsilon path and Richardson-extrapolates. beta_seq is
// increasing; the largest beta provides the headline values. Throws
// NonConvergent when successive extrapolants disagree beyond 10x the
// error model.
TransportCoefficients transport_limits(const LatticeModel& m, double mu_chem,
                                       const std::vector<double>& beta_seq,
                                       const std::vector<double>& eps_seq,
                                       int a, int a_prime, Channel channel,
                                       const TransportOptions& opt = {});

// Shared Richardson-style 3-point extrapolation with empirical order.
Extrapolated extrapolate_sequence(const std::vector<double>& eps,
                                  const std::vector<double>& values);

}  // namespace hel
