#pragma once

#include <vector>

#include "hall_edge_lab/lattice.hpp"
#include "hall_edge_lab/types.hpp"

namespace hel {

// Filled-band frame over a uniform k-grid, one spin block. Columns of
// frame[j1][j2] span Ran P(k); the projector is frame * frame^dag.
struct FermiProjectorField {
  int grid_n = 0;
  int filled = 0;
  std::vector<std::vector<Mat>> frames;
  Mat projector(int j1, int j2) const {
    return frames[j1][j2] * frames[j1][j2].adjoint();
  }
};

FermiProjectorField build_fermi_projector_field(const LatticeModel& block,
                                                double mu, int grid_n,
                                                int workers = 0);

// Lattice Chern number of the filled bands of one spin block via the
// plaquette link-variable discretization; exact integer, gauge independent.
// Orientation: right-handed (k1, k2). Throws GapClosed when the filled-band
// rank jumps or a link determinant degenerates; rejects grid_n < 6.
int chern_of_block(const LatticeModel& block, double mu, int grid_n,
                   int workers = 0);

// One Chern number per spin block (a single entry for spinless models).
std::vector<int> chern_number(const LatticeModel& m, double mu, int grid_n,
                              int workers = 0);

struct HallResult {
  std::vector<int> C_per_spin;
  double sigma12 = 0.0;  // (sum of C) / 2pi
  double sigma21 = 0.0;  // -sigma12
  int grid_n = 0;
  int refinement_delta = 0;  // C(2n) - C(n), summed over blocks
};

// sigma12^(0) = (sum over spin blocks of C) / 2pi, with the (k1,k2)
// right-handed orientation recorded in the artifact metadata.
HallResult hall_conductivity(const LatticeModel& m, double mu, int grid_n,
                             int workers = 0);

struct SweepPoint {
  double W = 0.0;
  double t2_sin_phi = 0.0;
  int C = 0;
};

// Chern number of the lower band as the staggered potential W is swept.
std::vector<SweepPoint> phase_sweep(const HaldaneParams& base, double mu,
                                    const std::vector<double>& W_values,
                                    int grid_n, int workers = 0);

}  // namespace hel
