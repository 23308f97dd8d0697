#pragma once

#include <memory>
#include <vector>

#include "hall_edge_lab/lattice.hpp"
#include "hall_edge_lab/response.hpp"
#include "hall_edge_lab/types.hpp"

namespace hel {

struct ModeIndex {
  int x1 = 0;
  int x2 = 0;  // live cylinder row, 1..L2
  int r = 0;
};

struct QuadOpTerm {
  int i = 0;  // creation mode
  int j = 0;  // annihilation mode
  cplx amp;
};

// One-particle kernel sum_{ij} K_ij c+_i c_j.
struct QuadOp {
  std::vector<QuadOpTerm> terms;
  QuadOp& operator+=(const QuadOp& o) {
    terms.insert(terms.end(), o.terms.begin(), o.terms.end());
    return *this;
  }
};

// Brute-force many-body system on a tiny cylinder strip: x1 in {0..L1-1}
// periodic, live rows x2 in {1..L2} of a Dirichlet cylinder of height L2+1.
// The many-body Hamiltonian carries the lambda (rho - 1/2) w (rho - 1/2)
// interaction and -mu N; the full spectrum is computed per particle-number
// sector. Lehmann sums drop states whose relative Boltzmann weight is below
// weight_cut (default keeps truncation error far below the 1e-8 oracle
// tolerances).
class FockSystem {
 public:
  static FockSystem build(const LatticeModel& kernels, double lambda, int L1,
                          int L2, double beta, double weight_cut = 1e-18);

  int n_modes() const { return n_modes_; }
  double beta() const { return beta_; }
  double lambda() const { return lambda_; }
  double mu() const { return mu_; }
  int L1() const { return L1_; }
  int L2() const { return L2_; }
  const std::vector<ModeIndex>& modes() const { return modes_; }
  int mode_index(int x1, int x2, int r) const;
  // The matching cylinder lattice model (height L2+1) used by the kernels.
  const LatticeModel& strip() const { return *strip_; }

  double ground_energy() const { return E0_; }
  // sum over all states of exp(-beta (E - E0))
  double partition_rel() const { return z_rel_; }

  // ---- operator builders ----
  QuadOp density(double p1, int x2) const;              // j_0 at momentum p1
  QuadOp current(int mu, double p1, int x2) const;      // j_1 or j_2
  QuadOp current_or_density(int mu, double p1, int x2) const;
  QuadOp current_sum_x2(int mu, double p1, Channel ch) const;
  QuadOp channel_op(int mu, double p1, int x2, Channel ch) const;
  QuadOp number_op() const;
  // tau_{y,y+e1} + 1/2 sum_{|y-z|=sqrt2} tau_{y,z} at fixed y = (y1, y2)
  QuadOp schwinger_tau(int y1, int y2) const;

  // Cached matrix elements of a quadratic operator in the energy eigenbasis
  // (rows/columns restricted to the Boltzmann-weighted states). Transform
  // once, evaluate many frequencies.
  struct TransformedOp {
    std::vector<Mat> R;  // per sector: A_{m in low, n}
    std::vector<Mat> C;  // per sector: A_{m, n in low}
    double mean = 0.0;
  };
  TransformedOp transform_op(const QuadOp& A) const;
  cplx matsubara(const TransformedOp& A, const TransformedOp& B, double eta,
                 bool connected = true) const;

  // ---- Lehmann evaluations ----
  double expectation(const QuadOp& A) const;
  // <T A(x0) B(0)> for even operators, connected when requested; 0 <= x0 < beta
  cplx time_ordered(const QuadOp& A, const QuadOp& B, double x0,
                    bool connected = true) const;
  // int_0^beta dx0 e^{i eta x0} <T A(x0) B(0)>_conn, eta snapped bosonic
  cplx matsubara(const QuadOp& A, const QuadOp& B, double eta,
                 bool connected = true) const;
  // fermionic <T a^-_{x,r}(x0) a^+_{y,rp}(0)>, antiperiodic in x0
  cplx fermionic_2pt(const ModeIndex& x, const ModeIndex& y, double x0) const;

  // Normalized correlator matching the response-module convention:
  // (1/(beta L1)) <T jhat_mu jhat_nu> with the frequency transform absorbed,
  // i.e. matsubara(...)/L1.
  cplx current_correlator(int mu, int nu, double eta, double p1, int x2,
                          int y2, Channel ch) const;
  cplx current_correlator_x2sum(int mu, int nu, double eta, double p1, int y2,
                                Channel ch) const;

  double schwinger_term(int y2, int y1 = 0) const;  // Delta_{1,y2}

  struct WickSides {
    cplx real_time_side;
    cplx imag_time_side;
    double error = 0.0;
    double bound = 0.0;  // C (1/(eta^2 beta) + e^{-eta T}) with C = 1
  };
  WickSides wick_sides(const QuadOp& A, const QuadOp& B, double T,
                       double eta) const;

  struct Sector {
    int N = 0;
    std::vector<uint32_t> basis;
    RVec energies;  // absolute
    Mat vectors;
    std::vector<double> weights;  // exp(-beta(E - E0)) / Z_rel
    std::vector<int> low;         // indices with weight >= cut
  };
  const std::vector<Sector>& sectors() const { return sectors_; }

 private:
  int n_modes_ = 0;
  int L1_ = 0, L2_ = 0;
  double beta_ = 0.0, lambda_ = 0.0, mu_ = 0.0;
  double E0_ = 0.0, z_rel_ = 0.0, weight_cut_ = 0.0;
  std::vector<ModeIndex> modes_;
  std::vector<int> mode_lookup_;
  std::shared_ptr<const LatticeModel> strip_;
  std::vector<Sector> sectors_;
};

FockSystem build_fock_system(const LatticeModel& kernels, double lambda,
                             int L1, int L2, double beta);

// Residual of the lattice Ward identity assembled entirely from ED
// correlators and the ED Schwinger term, at (eta_beta, p1).
WardResidual ed_ward_check(const FockSystem& sys, double eta, double p1,
                           int nu, Channel channel, int y2);

struct WickSweepPoint {
  double beta = 0.0;
  double T = 0.0;
  double error = 0.0;
  double model = 0.0;  // 1/(eta^2 beta) + e^{-eta T}
};

struct WickSweepResult {
  std::vector<WickSweepPoint> points;
  double fitted_C = 0.0;      // error ~ C * model
  double beta_slope = 0.0;    // log-log slope of error vs beta, T-saturated
};

// (beta, T) sweep of the Wick-rotation lemma for fixed eta; rebuilds the
// Gibbs state at every beta.
WickSweepResult wick_rotation_sweep(const LatticeModel& kernels, double lambda,
                                    int L1, int L2,
                                    const std::vector<double>& betas,
                                    const std::vector<double>& Ts, double eta);

}  // namespace hel
