#include "hall_edge_lab/topology.hpp"

#include <cmath>

#include "hall_edge_lab/parallel.hpp"

namespace hel {

FermiProjectorField build_fermi_projector_field(const LatticeModel& block,
                                                double mu, int grid_n,
                                                int workers) {
  if (grid_n < 6) throw ConfigError("chern grid must have n >= 6");
  const LatticeModel torus = block.boundary() == Boundary::Torus
                                 ? block
                                 : block.with_boundary(Boundary::Torus);
  FermiProjectorField f;
  f.grid_n = grid_n;
  f.frames.assign(grid_n, std::vector<Mat>(grid_n));
  std::vector<int> filled(grid_n * grid_n, -1);
  parallel_for(static_cast<std::size_t>(grid_n) * grid_n, workers,
               [&](std::size_t idx) {
                 const int j1 = static_cast<int>(idx) / grid_n;
                 const int j2 = static_cast<int>(idx) % grid_n;
                 const double k1 = kTwoPi * j1 / grid_n;
                 const double k2 = kTwoPi * j2 / grid_n;
                 Eigen::SelfAdjointEigenSolver<Mat> es(
                     bloch_hamiltonian(torus, k1, k2));
                 int nf = 0;
                 while (nf < es.eigenvalues().size() &&
                        es.eigenvalues()[nf] < mu)
                   ++nf;
                 filled[idx] = nf;
                 f.frames[j1][j2] = es.eigenvectors().leftCols(nf);
               });
  f.filled = filled[0];
  for (int idx = 0; idx < grid_n * grid_n; ++idx)
    if (filled[idx] != f.filled)
      throw NumericError("GapClosed",
                         "filled-band count jumps at grid index " +
                             std::to_string(idx));
  if (f.filled == 0)
    throw NumericError("GapClosed", "no filled bands below mu");
  return f;
}

int chern_of_block(const LatticeModel& block, double mu, int grid_n,
                   int workers) {
  const FermiProjectorField f =
      build_fermi_projector_field(block, mu, grid_n, workers);
  // Link variables U_mu(k) = det(Psi(k)^dag Psi(k+mu)); the plaquette field
  // strength is the principal arg of the oriented product. Each plaquette
  // angle lies in (-pi, pi]; the sum of angles is 2pi * C exactly.
  auto link = [&](int a1, int a2, int b1, int b2) -> cplx {
    const Mat ov = f.frames[a1][a2].adjoint() *
                   f.frames[(b1 + grid_n) % grid_n][(b2 + grid_n) % grid_n];
    const cplx d = ov.determinant();
    if (std::abs(d) < 1e-12)
      throw NumericError("GapClosed", "degenerate link overlap");
    return d / std::abs(d);
  };
  // The plaquette phase is oriented so that the n -> infinity limit equals
  // the continuum curvature integral i Tr P [d1 P, d2 P] with right-handed
  // (k1, k2); the overlap Wilson loop carries the opposite sign, hence
  // u3 u4 / (u1 u2).
  double total = 0.0;
  std::vector<double> plaq(static_cast<std::size_t>(grid_n) * grid_n, 0.0);
  for (int j1 = 0; j1 < grid_n; ++j1)
    for (int j2 = 0; j2 < grid_n; ++j2) {
      const cplx u1 = link(j1, j2, j1 + 1, j2);
      const cplx u2 = link((j1 + 1) % grid_n, j2, j1 + 1, j2 + 1);
      const cplx u3 = link(j1, (j2 + 1) % grid_n, j1 + 1, j2 + 1);
      const cplx u4 = link(j1, j2, j1, j2 + 1);
      plaq[j1 * grid_n + j2] = std::arg(u3 * u4 / (u1 * u2));
    }
  total = pairwise_sum(plaq);
  const double c = total / kTwoPi;
  const int ci = static_cast<int>(std::lround(c));
  if (std::abs(c - ci) > 1e-6)
    throw NumericError("GapClosed",
                       "plaquette sum is not an integer: " + std::to_string(c));
  return ci;
}

std::vector<int> chern_number(const LatticeModel& m, double mu, int grid_n,
                              int workers) {
  std::vector<int> out;
  if (m.spinful()) {
    const int c = chern_of_block(m.spin_block(), mu, grid_n, workers);
    out = {c, c};
  } else {
    out = {chern_of_block(m, mu, grid_n, workers)};
  }
  return out;
}

HallResult hall_conductivity(const LatticeModel& m, double mu, int grid_n,
                             int workers) {
  HallResult r;
  r.grid_n = grid_n;
  r.C_per_spin = chern_number(m, mu, grid_n, workers);
  const auto refined = chern_number(m, mu, 2 * grid_n, workers);
  int c = 0, cr = 0;
  for (std::size_t i = 0; i < r.C_per_spin.size(); ++i) {
    c += r.C_per_spin[i];
    cr += refined[i];
  }
  r.refinement_delta = cr - c;
  r.sigma12 = c / kTwoPi;
  r.sigma21 = -r.sigma12;
  return r;
}

std::vector<SweepPoint> phase_sweep(const HaldaneParams& base, double mu,
                                    const std::vector<double>& W_values,
                                    int grid_n, int workers) {
  std::vector<SweepPoint> out(W_values.size());
  for (std::size_t i = 0; i < W_values.size(); ++i) {
    HaldaneParams p = base;
    p.W = W_values[i];
    const LatticeModel m = build_haldane(p, 8, mu, false, Boundary::Torus);
    SweepPoint pt;
    pt.W = p.W;
    pt.t2_sin_phi = p.t2 * std::sin(p.phi);
    try {
      pt.C = chern_of_block(m, mu, grid_n, workers);
    } catch (const NumericError&) {
      pt.C = 999;  // gap closed at this sweep point
    }
    out[i] = pt;
  }
  return out;
}

}  // namespace hel
