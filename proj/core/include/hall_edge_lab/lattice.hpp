#pragma once

#include <array>
#include <optional>
#include <vector>

#include "hall_edge_lab/types.hpp"

namespace hel {

enum class Boundary { Torus, CylinderDirichlet };

struct HaldaneParams {
  double t1 = 1.0;   // nearest-neighbour hop
  double t2 = 0.0;   // next-nearest-neighbour hop
  double phi = 0.0;  // flux phase
  double W = 0.0;    // staggered potential
};

// One hopping amplitude of a translation-invariant finite-range kernel:
// H_{r,rp}(z1; x2, x2 + dx2) = amp for every interior x2.
struct HoppingRecord {
  int z1 = 0;   // x1 - y1, in {-1, 0, 1}
  int dx2 = 0;  // y2 - x2, in {-1, 0, 1}
  int r = 0;
  int rp = 0;
  cplx amp;
};

struct InteractionRecord {
  int z1 = 0;
  int dx2 = 0;
  int r = 0;
  int rp = 0;
  double w = 0.0;
};

// Site-resolved amplitude H_{r,rp}(z1; x2, y2). Bypasses the Dirichlet mask,
// so boundary faults can be constructed and caught by validate_model.
struct SiteHoppingRecord {
  int z1 = 0;
  int x2 = 0;
  int y2 = 0;
  int r = 0;
  int rp = 0;
  cplx amp;
};

// Finite-range tight-binding model on a torus or Dirichlet cylinder, with M
// internal degrees of freedom per cell and translation invariance along e1
// (and along e2 in the interior). Internal dof ordering is spin-major:
// r = sigma * (M/2) + sublattice for spinful models.
//
// Units: hbar = e = lattice spacing = 1; energies in units of t1 unless the
// caller configures otherwise. Immutable after construction.
class LatticeModel {
 public:
  LatticeModel(int M, int L, double mu, Boundary boundary, bool spinful,
               std::vector<HoppingRecord> hoppings,
               std::vector<InteractionRecord> interactions = {},
               std::vector<SiteHoppingRecord> site_hoppings = {});

  int M() const { return M_; }
  int L() const { return L_; }
  double mu() const { return mu_; }
  Boundary boundary() const { return boundary_; }
  bool spinful() const { return spinful_; }
  bool has_interaction() const { return !interactions_.empty(); }

  // Kernel block H(z1; x2, x2+dx2) as an MxM matrix, before any boundary
  // masking. z1, dx2 in {-1,0,1}.
  const Mat& kernel(int z1, int dx2) const { return hop_[z1 + 1][dx2 + 1]; }
  const RMat& interaction_kernel(int z1, int dx2) const {
    return w_[z1 + 1][dx2 + 1];
  }

  // Single amplitude H_{r,rp}(z1; x2, y2) with Dirichlet masking applied.
  cplx hopping(int z1, int x2, int y2, int r, int rp) const;
  double interaction(int z1, int x2, int y2, int r, int rp) const;

  bool dirichlet_row(int x2) const {
    return boundary_ == Boundary::CylinderDirichlet && (x2 <= 0 || x2 >= L_);
  }

  // Spin-block view: the M/2-dof model acting on one spin sector. Only valid
  // for spinful models (H = H_up ⊕ H_down with identical blocks).
  LatticeModel spin_block() const;

  const std::vector<HoppingRecord>& hopping_records() const {
    return hoppings_;
  }
  const std::vector<InteractionRecord>& interaction_records() const {
    return interactions_;
  }
  const std::vector<SiteHoppingRecord>& site_hopping_records() const {
    return site_hoppings_;
  }

  LatticeModel with_boundary(Boundary b) const;
  LatticeModel with_interaction(std::vector<InteractionRecord> recs) const;
  LatticeModel with_site_hoppings(std::vector<SiteHoppingRecord> recs) const;

 private:
  int M_;
  int L_;
  double mu_;
  Boundary boundary_;
  bool spinful_;
  std::vector<HoppingRecord> hoppings_;
  std::vector<InteractionRecord> interactions_;
  std::vector<SiteHoppingRecord> site_hoppings_;
  Mat hop_[3][3];
  RMat w_[3][3];
};

// Spinful variant duplicates the Haldane block on both spin sectors.
// Rejects L < 4 and non-finite parameters.
LatticeModel build_haldane(const HaldaneParams& p, int L, double mu,
                           bool spinful,
                           Boundary boundary = Boundary::CylinderDirichlet);

LatticeModel build_custom(int M, int L, double mu, bool spinful,
                          Boundary boundary,
                          std::vector<HoppingRecord> hoppings,
                          std::vector<InteractionRecord> interactions = {});

// Effective one-dimensional operator at fixed k1: block tridiagonal matrix
// assembled from A(k1), A(k1)^*, V(k1). Size M*(L+1) on the cylinder (rows
// x2 = 0..L, Dirichlet rows zero), M*L on the torus (x2 periodic).
Mat effective_1d_hamiltonian(const LatticeModel& m, double k1);

// A(k1) = H_hat(k1; x2, x2+1) and V(k1) = H_hat(k1; x2, x2) of the interior.
Mat hopping_matrix_A(const LatticeModel& m, double k1);
Mat hopping_matrix_V(const LatticeModel& m, double k1);

// Bloch Hamiltonian V(k1) + A(k1) e^{-i k2} + A(k1)^dag e^{i k2}.
// Torus models only.
Mat bloch_hamiltonian(const LatticeModel& m, double k1, double k2);

// Closed-form Haldane bands, with the convention Omega(k) = 1 + e^{-i k1}
// + e^{-i k2} so the off-diagonal magnitude is t1 |Omega|.
std::array<double, 2> haldane_bands_closed_form(const HaldaneParams& p,
                                                double k1, double k2);

struct Violation {
  std::string invariant;
  double magnitude = 0.0;
  std::string detail;
};

// Reports violations of hermiticity, finite range, Dirichlet boundary rows
// and interaction symmetry. Empty report == valid model.
std::vector<Violation> validate_model(const LatticeModel& m);

// Interaction shorthands (spin-independent, symmetric).
std::vector<InteractionRecord> onsite_interaction(int M, double U,
                                                  bool spinful = false);
std::vector<InteractionRecord> nn_interaction(int M, double U,
                                              bool spinful = false);

}  // namespace hel
