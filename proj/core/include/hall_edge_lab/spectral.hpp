#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hall_edge_lab/lattice.hpp"
#include "hall_edge_lab/types.hpp"

namespace hel {

struct KGrid {
  int n = 0;               // uniform grid k = 2*pi*j/n, j = 0..n-1
  bool analysis = false;   // true when finer than the physical L-grid
  static KGrid lattice(const LatticeModel& m) { return {m.L(), false}; }
  double k(int j) const { return kTwoPi * j / n; }
  double spacing() const { return kTwoPi / n; }
};

// One eigenvalue branch over the k1-grid. Branches are indexed by sorted
// position at each k1; `min_link_overlap` records the weakest eigenvector
// overlap between adjacent grid points (crossings show up as small values).
struct EigenBranch {
  int index = 0;
  int spin = 0;  // spin sector for block-diagonal models, 0 otherwise
  std::vector<double> k1;
  std::vector<double> energy;
  std::vector<Vec> vectors;
  double min_link_overlap = 1.0;
  bool ambiguous = false;       // some link overlap below threshold
  bool dirichlet_null = false;  // spurious zero branch from masked rows
};

enum class Side { LowerEdge, UpperEdge };  // x2 = 0 vs x2 = L

struct EdgeState {
  int channel = 0;  // 1 = x2=0 side, 2 = x2=L side (Assumption-2 numbering)
  int spin = 0;
  double kF_grid = 0.0;     // grid minimizer of |eps - mu|
  double kF_refined = 0.0;  // quadratic interpolation through 3 grid points
  double velocity = 0.0;    // discrete derivative (L/2pi)(eps(k+2pi/L)-eps(k))
  double velocity_centered = 0.0;
  int omega = 0;  // sign of the velocity
  double energy_at_kF = 0.0;
  Vec xi;                       // normalized wavefunction at kF_grid
  double decay_rate = 0.0;      // c in |xi| ~ e^{-c x2} (amplitude rate)
  double decay_residual = 0.0;  // rms residual of the log-linear fit
  Side side = Side::LowerEdge;
};

struct GapInfo {
  double below = 0.0;  // sup of spectrum under mu
  double above = 0.0;  // inf of spectrum over mu
  double gap() const { return above - below; }
};

struct DecayCheck {
  int order = 0;  // derivative order n of Eq-style bound fits
  double rate = 0.0;
  double prefactor = 0.0;
  double residual = 0.0;
  bool ok = false;
};

struct AssumptionVerdict {
  int n_edge = 0;
  bool spin_degenerate = false;
  bool single_channel = false;
  std::vector<double> fermi_points;
  std::vector<DecayCheck> decay_checks;  // two per state: n = 0, 1
  std::vector<std::string> failures;
};

// Full band structure, all M*L (torus) or M*(L+1) (cylinder) branches,
// sorted by energy at each k1 and linked by eigenvector overlap.
// Deterministic given the model and grid. Per-k1 work runs on the pool.
std::vector<EigenBranch> band_structure(const LatticeModel& m,
                                        const KGrid& grid, int workers = 0);

// Bulk gap around mu from the torus twin of the model.
GapInfo torus_gap(const LatticeModel& m, double mu, const KGrid& grid);

struct EdgeDetectOptions {
  double link_overlap_threshold = 0.5;
  double flat_band_velocity = 1e-6;
  double decay_residual_threshold = 1e-2;
  int workers = 0;
};

// Edge states of a cylinder model: branches inside the bulk gap that cross
// the Fermi level, with exponentially localized eigenvectors. Throws NoGap,
// AmbiguousBranch, FlatBand.
std::vector<EdgeState> detect_edge_states(const LatticeModel& m, double mu,
                                          const KGrid& grid,
                                          const EdgeDetectOptions& opt = {});

AssumptionVerdict audit_assumptions(const LatticeModel& m, double mu,
                                    const KGrid& grid,
                                    const EdgeDetectOptions& opt = {});

// Deterministic gauge: rotate v so its largest-magnitude component is real
// positive.
void fix_gauge(Vec& v);

}  // namespace hel
