#include "hall_edge_lab/ed_oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "hall_edge_lab/parallel.hpp"

namespace hel {

namespace {

// fermionic sign for c_j acting on |mask>: (-1)^{number of set bits below j}
inline int jw_sign(uint32_t mask, int j) {
  const uint32_t below = mask & ((1u << j) - 1u);
  return (std::popcount(below) & 1) ? -1 : 1;
}

struct Bond {
  int u1, u2, v1, v2;
  double w;
};
const Bond kBondsJ1[5] = {{0, 0, 1, 0, 1.0},
                          {0, 0, 1, -1, 0.5},
                          {0, 0, 1, 1, 0.5},
                          {0, -1, 1, 0, 0.5},
                          {0, 1, 1, 0, 0.5}};
const Bond kBondsJ2[5] = {{0, 0, 0, 1, 1.0},
                          {0, 0, -1, 1, 0.5},
                          {0, 0, 1, 1, 0.5},
                          {-1, 0, 0, 1, 0.5},
                          {1, 0, 0, 1, 0.5}};

}  // namespace

int FockSystem::mode_index(int x1, int x2, int r) const {
  const int x1w = ((x1 % L1_) + L1_) % L1_;
  if (x2 < 1 || x2 > L2_) return -1;
  const int M = strip_->M();
  return (x1w * L2_ + (x2 - 1)) * M + r;
}

FockSystem FockSystem::build(const LatticeModel& kernels, double lambda,
                             int L1, int L2, double beta, double weight_cut) {
  FockSystem sys;
  const int M = kernels.M();
  sys.n_modes_ = L1 * L2 * M;
  if (sys.n_modes_ > 14)
    throw NumericError("TooLarge", "L1*L2*M = " + std::to_string(sys.n_modes_) +
                                       " exceeds the 14-mode cap");
  if (L1 < 2 || L2 < 1) throw ConfigError("need L1 >= 2 and L2 >= 1");
  sys.L1_ = L1;
  sys.L2_ = L2;
  sys.beta_ = beta;
  sys.lambda_ = lambda;
  sys.mu_ = kernels.mu();
  sys.weight_cut_ = weight_cut;
  sys.strip_ = std::make_shared<LatticeModel>(
      M, L2 + 1, kernels.mu(), Boundary::CylinderDirichlet, kernels.spinful(),
      kernels.hopping_records(), kernels.interaction_records());
  const LatticeModel& strip = *sys.strip_;

  for (int x1 = 0; x1 < L1; ++x1)
    for (int x2 = 1; x2 <= L2; ++x2)
      for (int r = 0; r < M; ++r) sys.modes_.push_back({x1, x2, r});
  const int n = sys.n_modes_;

  // one-particle kernels on the ring: z1-resolved hops, periodized
  Mat h1 = Mat::Zero(n, n);
  RMat w1 = RMat::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const auto& a = sys.modes_[i];
      const auto& b = sys.modes_[j];
      for (int z1 = -1; z1 <= 1; ++z1) {
        if (((a.x1 - b.x1 - z1) % L1 + L1) % L1 != 0) continue;
        h1(i, j) += strip.hopping(z1, a.x2, b.x2, a.r, b.r);
        w1(i, j) += strip.interaction(z1, a.x2, b.x2, a.r, b.r);
      }
    }

  std::vector<std::vector<uint32_t>> bases(n + 1);
  for (uint32_t mask = 0; mask < (1u << n); ++mask)
    bases[std::popcount(mask)].push_back(mask);

  sys.sectors_.resize(n + 1);
  parallel_for(static_cast<std::size_t>(n + 1), 0, [&](std::size_t N) {
    Sector& sec = sys.sectors_[N];
    sec.N = static_cast<int>(N);
    sec.basis = bases[N];
    const int dim = static_cast<int>(sec.basis.size());
    std::vector<int> where(1u << n, -1);
    for (int s = 0; s < dim; ++s) where[sec.basis[s]] = s;
    Mat H = Mat::Zero(dim, dim);
    for (int s = 0; s < dim; ++s) {
      const uint32_t mask = sec.basis[s];
      for (int j = 0; j < n; ++j) {
        if (!(mask & (1u << j))) continue;
        const uint32_t m1 = mask & ~(1u << j);
        const int s1 = jw_sign(mask, j);
        for (int i = 0; i < n; ++i) {
          if (h1(i, j) == cplx(0.0, 0.0)) continue;
          if (m1 & (1u << i)) continue;
          H(where[m1 | (1u << i)], s) +=
              h1(i, j) * static_cast<double>(s1 * jw_sign(m1, i));
        }
      }
      double ediag = -sys.mu_ * static_cast<double>(N);
      if (lambda != 0.0) {
        for (int i = 0; i < n; ++i) {
          const double ni = (mask & (1u << i)) ? 0.5 : -0.5;
          for (int j = 0; j < n; ++j) {
            if (w1(i, j) == 0.0) continue;
            ediag += lambda * ni * w1(i, j) *
                     ((mask & (1u << j)) ? 0.5 : -0.5);
          }
        }
      }
      H(s, s) += ediag;
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(H);
    sec.energies = es.eigenvalues();
    sec.vectors = es.eigenvectors();
  });

  sys.E0_ = 1e300;
  for (const auto& sec : sys.sectors_)
    if (sec.energies.size() > 0) sys.E0_ = std::min(sys.E0_, sec.energies[0]);
  double z = 0.0;
  for (auto& sec : sys.sectors_)
    for (int q = 0; q < sec.energies.size(); ++q)
      z += std::exp(-beta * (sec.energies[q] - sys.E0_));
  sys.z_rel_ = z;
  const double low_cut = weight_cut * 1e-6;
  for (auto& sec : sys.sectors_) {
    sec.weights.resize(sec.energies.size());
    for (int q = 0; q < sec.energies.size(); ++q) {
      sec.weights[q] = std::exp(-beta * (sec.energies[q] - sys.E0_)) / z;
      if (sec.weights[q] >= low_cut) sec.low.push_back(q);
    }
  }
  return sys;
}

FockSystem build_fock_system(const LatticeModel& kernels, double lambda,
                             int L1, int L2, double beta) {
  return FockSystem::build(kernels, lambda, L1, L2, beta);
}

// ---------------- operator builders ----------------

QuadOp FockSystem::density(double p1, int x2) const {
  QuadOp op;
  const int M = strip_->M();
  for (int x1 = 0; x1 < L1_; ++x1)
    for (int r = 0; r < M; ++r) {
      const int i = mode_index(x1, x2, r);
      if (i < 0) continue;
      op.terms.push_back({i, i, std::exp(cplx(0.0, p1 * x1))});
    }
  return op;
}

QuadOp FockSystem::current(int mu, double p1, int x2) const {
  QuadOp op;
  const int M = strip_->M();
  const Bond* bonds = mu == 1 ? kBondsJ1 : kBondsJ2;
  for (int x1 = 0; x1 < L1_; ++x1) {
    const cplx ph = std::exp(cplx(0.0, p1 * x1));
    for (int ib = 0; ib < 5; ++ib) {
      const Bond& b = bonds[ib];
      const int ax1 = x1 + b.u1, bx1 = x1 + b.v1;
      const int ax2 = x2 + b.u2, bx2 = x2 + b.v2;
      const int zf = b.u1 - b.v1;
      for (int r = 0; r < M; ++r)
        for (int rp = 0; rp < M; ++rp) {
          const cplx hf = (ax2 < 0 || ax2 > L2_ + 1 || bx2 < 0 ||
                           bx2 > L2_ + 1)
                              ? cplx(0.0, 0.0)
                              : strip_->hopping(zf, ax2, bx2, r, rp);
          if (hf != cplx(0.0, 0.0)) {
            const int i = mode_index(ax1, ax2, r), j = mode_index(bx1, bx2, rp);
            if (i >= 0 && j >= 0)
              op.terms.push_back({i, j, cplx(0, 1) * b.w * ph * hf});
          }
          const cplx hb = (ax2 < 0 || ax2 > L2_ + 1 || bx2 < 0 ||
                           bx2 > L2_ + 1)
                              ? cplx(0.0, 0.0)
                              : strip_->hopping(-zf, bx2, ax2, r, rp);
          if (hb != cplx(0.0, 0.0)) {
            const int i = mode_index(bx1, bx2, r), j = mode_index(ax1, ax2, rp);
            if (i >= 0 && j >= 0)
              op.terms.push_back({i, j, cplx(0, -1) * b.w * ph * hb});
          }
        }
    }
  }
  return op;
}

QuadOp FockSystem::current_or_density(int mu, double p1, int x2) const {
  return mu == 0 ? density(p1, x2) : current(mu, p1, x2);
}

namespace {
double spin_sign(const LatticeModel& m, int r, Channel ch) {
  if (ch == Channel::Charge) return 1.0;
  if (!m.spinful()) throw ConfigError("spin channel requires a spinful model");
  return r < m.M() / 2 ? 1.0 : -1.0;
}
}  // namespace

QuadOp FockSystem::channel_op(int mu, double p1, int x2, Channel ch) const {
  QuadOp base = current_or_density(mu, p1, x2);
  if (ch == Channel::Spin)
    for (auto& t : base.terms)
      t.amp *= spin_sign(*strip_, modes_[t.i].r, ch);
  return base;
}

QuadOp FockSystem::current_sum_x2(int mu, double p1, Channel ch) const {
  QuadOp op;
  for (int x2 = 1; x2 <= L2_; ++x2) op += channel_op(mu, p1, x2, ch);
  return op;
}

QuadOp FockSystem::number_op() const {
  QuadOp op;
  for (int i = 0; i < n_modes_; ++i) op.terms.push_back({i, i, 1.0});
  return op;
}

QuadOp FockSystem::schwinger_tau(int y1, int y2) const {
  QuadOp op;
  const int M = strip_->M();
  struct Hop {
    int d1, d2;
    double w;
  };
  const Hop hops[5] = {
      {1, 0, 1.0}, {1, 1, 0.5}, {1, -1, 0.5}, {-1, 1, 0.5}, {-1, -1, 0.5}};
  for (const auto& h : hops) {
    const int zx1 = y1 + h.d1, zx2 = y2 + h.d2;
    if (zx2 < 0 || zx2 > L2_ + 1) continue;
    for (int r = 0; r < M; ++r)
      for (int rp = 0; rp < M; ++rp) {
        const cplx hf = strip_->hopping(-h.d1, y2, zx2, r, rp);
        if (hf != cplx(0.0, 0.0)) {
          const int i = mode_index(y1, y2, r), j = mode_index(zx1, zx2, rp);
          if (i >= 0 && j >= 0) op.terms.push_back({i, j, h.w * hf});
        }
        const cplx hb = strip_->hopping(h.d1, zx2, y2, r, rp);
        if (hb != cplx(0.0, 0.0)) {
          const int i = mode_index(zx1, zx2, r), j = mode_index(y1, y2, rp);
          if (i >= 0 && j >= 0) op.terms.push_back({i, j, h.w * hb});
        }
      }
  }
  return op;
}

// ---------------- Lehmann machinery ----------------

namespace {

Mat sector_matrix(const QuadOp& op, const FockSystem::Sector& sec,
                  int n_modes) {
  const int dim = static_cast<int>(sec.basis.size());
  std::vector<int> where(1u << n_modes, -1);
  for (int s = 0; s < dim; ++s) where[sec.basis[s]] = s;
  Mat A = Mat::Zero(dim, dim);
  for (int s = 0; s < dim; ++s) {
    const uint32_t mask = sec.basis[s];
    for (const auto& t : op.terms) {
      if (!(mask & (1u << t.j))) continue;
      const uint32_t m1 = mask & ~(1u << t.j);
      if (m1 & (1u << t.i)) continue;
      const int sg = jw_sign(mask, t.j) * jw_sign(m1, t.i);
      A(where[m1 | (1u << t.i)], s) += t.amp * static_cast<double>(sg);
    }
  }
  return A;
}

// rectangular matrix elements in the energy eigenbasis:
// R = Ulow^dag A U (low rows) and C = U^dag A Ulow (low columns)
struct OpBlocks {
  Mat R;
  Mat C;
};

OpBlocks op_blocks(const QuadOp& op, const FockSystem::Sector& sec,
                   int n_modes) {
  const Mat A = sector_matrix(op, sec, n_modes);
  const int nlow = static_cast<int>(sec.low.size());
  const int dim = static_cast<int>(sec.basis.size());
  Mat Ulow(dim, nlow);
  for (int c = 0; c < nlow; ++c) Ulow.col(c) = sec.vectors.col(sec.low[c]);
  OpBlocks b;
  b.R = (Ulow.adjoint() * A) * sec.vectors;
  b.C = sec.vectors.adjoint() * (A * Ulow);
  return b;
}

// generic accumulation over pairs with at least one weighted state
template <typename F>
void for_weighted_pairs(const FockSystem::Sector& sec, const OpBlocks& ab,
                        const OpBlocks& bb, F&& add) {
  const int dim = static_cast<int>(sec.basis.size());
  const int nlow = static_cast<int>(sec.low.size());
  std::vector<char> is_low(dim, 0);
  for (int q : sec.low) is_low[q] = 1;
  for (int c = 0; c < nlow; ++c) {
    const int m = sec.low[c];
    for (int n = 0; n < dim; ++n) add(m, n, ab.R(c, n), bb.C(n, c));
  }
  for (int c = 0; c < nlow; ++c) {
    const int n = sec.low[c];
    for (int m = 0; m < dim; ++m) {
      if (is_low[m]) continue;
      add(m, n, ab.C(m, c), bb.R(c, m));
    }
  }
}

}  // namespace

double FockSystem::expectation(const QuadOp& A) const {
  cplx acc = 0.0;
  for (const auto& sec : sectors_) {
    if (sec.low.empty()) continue;
    const Mat Asec = sector_matrix(A, sec, n_modes_);
    for (int c : sec.low) {
      const Vec v = sec.vectors.col(c);
      acc += sec.weights[c] * (v.adjoint() * Asec * v)(0, 0);
    }
  }
  return acc.real();
}

FockSystem::TransformedOp FockSystem::transform_op(const QuadOp& A) const {
  TransformedOp t;
  t.R.resize(sectors_.size());
  t.C.resize(sectors_.size());
  cplx mean = 0.0;
  for (std::size_t N = 0; N < sectors_.size(); ++N) {
    const auto& sec = sectors_[N];
    if (sec.low.empty()) continue;
    const auto b = op_blocks(A, sec, n_modes_);
    t.R[N] = b.R;
    t.C[N] = b.C;
    for (std::size_t c = 0; c < sec.low.size(); ++c)
      mean += sec.weights[sec.low[c]] * t.R[N](c, sec.low[c]);
  }
  t.mean = mean.real();
  return t;
}

cplx FockSystem::matsubara(const TransformedOp& A, const TransformedOp& B,
                           double eta, bool connected) const {
  const double eta_b = snap_matsubara(eta, beta_);
  cplx acc = 0.0;
  for (std::size_t N = 0; N < sectors_.size(); ++N) {
    const auto& sec = sectors_[N];
    if (sec.low.empty()) continue;
    OpBlocks ab{A.R[N], A.C[N]}, bb{B.R[N], B.C[N]};
    for_weighted_pairs(sec, ab, bb, [&](int m, int n, cplx Amn, cplx Bnm) {
      const double wm = sec.weights[m], wn = sec.weights[n];
      const cplx den(sec.energies[m] - sec.energies[n], eta_b);
      const cplx k = std::abs(den) < 1e-12 ? cplx(beta_ * wm, 0.0)
                                           : (wn - wm) / den;
      acc += k * Amn * Bnm;
    });
  }
  if (connected && eta_b == 0.0) acc -= beta_ * A.mean * B.mean;
  return acc;
}

cplx FockSystem::time_ordered(const QuadOp& A, const QuadOp& B, double x0,
                              bool connected) const {
  if (x0 < 0.0 || x0 >= beta_)
    throw ConfigError("time_ordered needs 0 <= x0 < beta");
  cplx acc = 0.0;
  for (const auto& sec : sectors_) {
    if (sec.low.empty()) continue;
    const auto ab = op_blocks(A, sec, n_modes_);
    const auto bb = op_blocks(B, sec, n_modes_);
    for_weighted_pairs(sec, ab, bb, [&](int m, int n, cplx Amn, cplx Bnm) {
      const double xi = -beta_ * (sec.energies[m] - E0_) +
                        x0 * (sec.energies[m] - sec.energies[n]);
      acc += std::exp(xi) / z_rel_ * Amn * Bnm;
    });
  }
  if (connected) acc -= expectation(A) * expectation(B);
  return acc;
}

cplx FockSystem::matsubara(const QuadOp& A, const QuadOp& B, double eta,
                           bool connected) const {
  const double eta_b = snap_matsubara(eta, beta_);
  cplx acc = 0.0;
  for (const auto& sec : sectors_) {
    if (sec.low.empty()) continue;
    const auto ab = op_blocks(A, sec, n_modes_);
    const auto bb = op_blocks(B, sec, n_modes_);
    for_weighted_pairs(sec, ab, bb, [&](int m, int n, cplx Amn, cplx Bnm) {
      const double wm = sec.weights[m], wn = sec.weights[n];
      const cplx den(sec.energies[m] - sec.energies[n], eta_b);
      const cplx k = std::abs(den) < 1e-12 ? cplx(beta_ * wm, 0.0)
                                           : (wn - wm) / den;
      acc += k * Amn * Bnm;
    });
  }
  if (connected && eta_b == 0.0)
    acc -= beta_ * expectation(A) * expectation(B);
  return acc;
}

namespace {

// c_mode block mapping sector N -> N-1 in the Fock bases
Mat annihilator_block(int mode, const FockSystem::Sector& from,
                      const FockSystem::Sector& to, int n_modes) {
  const int dfrom = static_cast<int>(from.basis.size());
  const int dto = static_cast<int>(to.basis.size());
  std::vector<int> where(1u << n_modes, -1);
  for (int s = 0; s < dto; ++s) where[to.basis[s]] = s;
  Mat C = Mat::Zero(dto, dfrom);
  for (int s = 0; s < dfrom; ++s) {
    const uint32_t mask = from.basis[s];
    if (!(mask & (1u << mode))) continue;
    C(where[mask & ~(1u << mode)], s) +=
        static_cast<double>(jw_sign(mask, mode));
  }
  return C;
}

}  // namespace

cplx FockSystem::fermionic_2pt(const ModeIndex& x, const ModeIndex& y,
                               double x0) const {
  double sign = 1.0;
  const double nwrap = std::floor(x0 / beta_);
  x0 -= nwrap * beta_;
  if (std::fmod(std::abs(nwrap), 2.0) == 1.0) sign = -1.0;
  const int ix = mode_index(x.x1, x.x2, x.r);
  const int iy = mode_index(y.x1, y.x2, y.r);
  if (ix < 0 || iy < 0) return 0.0;

  cplx acc = 0.0;
  if (x0 == 0.0) {
    // 0^- convention: -<a+_y a-_x>
    for (std::size_t N = 1; N < sectors_.size(); ++N) {
      const Sector& sec = sectors_[N];
      if (sec.low.empty()) continue;
      const Mat Cx = annihilator_block(ix, sec, sectors_[N - 1], n_modes_);
      const Mat Cy = annihilator_block(iy, sec, sectors_[N - 1], n_modes_);
      for (int q : sec.low) {
        const Vec v = sec.vectors.col(q);
        acc -= sec.weights[q] * ((Cy * v).adjoint() * (Cx * v))(0, 0);
      }
    }
    return sign * acc;
  }
  // <a-_x(x0) a+_y> over pairs (m in N, n in N+1)
  for (std::size_t N = 0; N + 1 < sectors_.size(); ++N) {
    const Sector& lo = sectors_[N];
    const Sector& hi = sectors_[N + 1];
    if (lo.basis.empty() || hi.basis.empty()) continue;
    if (lo.low.empty() && hi.low.empty()) continue;
    const Mat Cx = annihilator_block(ix, hi, lo, n_modes_);  // dlo x dhi
    const Mat Cy = annihilator_block(iy, hi, lo, n_modes_);
    const Mat AmT = lo.vectors.adjoint() * (Cx * hi.vectors);
    const Mat ByT = lo.vectors.adjoint() * (Cy * hi.vectors);
    const int dlo = static_cast<int>(lo.basis.size());
    const int dhi = static_cast<int>(hi.basis.size());
    std::vector<char> lo_low(dlo, 0);
    for (int q : lo.low) lo_low[q] = 1;
    auto kern = [&](int m, int n) {
      const double xi = -beta_ * (lo.energies[m] - E0_) +
                        x0 * (lo.energies[m] - hi.energies[n]);
      return std::exp(xi) / z_rel_;
    };
    // <m|a-_x|n><n|a+_y|m> = AmT(m,n) conj(ByT(m,n))
    for (int m : lo.low)
      for (int n = 0; n < dhi; ++n)
        acc += kern(m, n) * AmT(m, n) * std::conj(ByT(m, n));
    for (int n : hi.low)
      for (int m = 0; m < dlo; ++m) {
        if (lo_low[m]) continue;
        acc += kern(m, n) * AmT(m, n) * std::conj(ByT(m, n));
      }
  }
  return sign * acc;
}

cplx FockSystem::current_correlator(int mu, int nu, double eta, double p1,
                                    int x2, int y2, Channel ch) const {
  const QuadOp A = channel_op(mu, p1, x2, ch);
  const QuadOp B = channel_op(nu, -p1, y2, ch);
  return matsubara(A, B, eta) / static_cast<double>(L1_);
}

cplx FockSystem::current_correlator_x2sum(int mu, int nu, double eta,
                                          double p1, int y2,
                                          Channel ch) const {
  const QuadOp A = current_sum_x2(mu, p1, ch);
  const QuadOp B = channel_op(nu, -p1, y2, ch);
  return matsubara(A, B, eta) / static_cast<double>(L1_);
}

double FockSystem::schwinger_term(int y2, int y1) const {
  return expectation(schwinger_tau(y1, y2));
}

FockSystem::WickSides FockSystem::wick_sides(const QuadOp& A, const QuadOp& B,
                                             double T, double eta) const {
  const double eta_b = snap_matsubara(eta, beta_);
  const double meanA = expectation(A);
  const double meanB = expectation(B);
  cplx lhs = 0.0, rhs = 0.0;
  for (const auto& sec : sectors_) {
    if (sec.low.empty()) continue;
    const auto ab = op_blocks(A, sec, n_modes_);
    const auto bb = op_blocks(B, sec, n_modes_);
    for_weighted_pairs(sec, ab, bb, [&](int m, int n, cplx Amn, cplx Bnm) {
      if (m == n) {  // mean shift touches only diagonal elements
        Amn -= meanA;
        Bnm -= meanB;
      }
      const double wm = sec.weights[m], wn = sec.weights[n];
      const double d = sec.energies[m] - sec.energies[n];
      // real-time side: (w_m - w_n) \int_{-T}^0 e^{(eta + i d) t} dt
      const cplx den_rt(eta, d);
      lhs += (wm - wn) * Amn * Bnm * (1.0 - std::exp(-den_rt * T)) / den_rt;
      // imaginary-time side: i (w_n - w_m)/(-i eta_b + d); degenerate i b w_m
      const cplx den_it(d, -eta_b);
      if (std::abs(den_it) < 1e-12)
        rhs += cplx(0.0, 1.0) * beta_ * wm * Amn * Bnm;
      else
        rhs += cplx(0.0, 1.0) * (wn - wm) / den_it * Amn * Bnm;
    });
  }
  WickSides out;
  out.real_time_side = lhs / static_cast<double>(L1_);
  out.imag_time_side = rhs / static_cast<double>(L1_);
  out.error = std::abs(out.real_time_side - out.imag_time_side);
  out.bound = 1.0 / (eta * eta * beta_) + std::exp(-eta * T);
  return out;
}

WardResidual ed_ward_check(const FockSystem& sys, double eta, double p1,
                           int nu, Channel channel, int y2) {
  const double eta_b = snap_matsubara(eta, sys.beta());
  const cplx c0 = cplx(0.0, 1.0) * eta_b;
  const cplx c1 = cplx(0.0, 1.0) * (1.0 - std::exp(cplx(0.0, p1)));
  const cplx f0 = sys.current_correlator_x2sum(0, nu, eta_b, p1, y2, channel);
  const cplx f1 = sys.current_correlator_x2sum(1, nu, eta_b, p1, y2, channel);
  cplx contact = 0.0;
  if (nu == 1) contact = c1 * sys.schwinger_term(y2);
  WardResidual out;
  out.residual = std::abs(c0 * f0 + c1 * f1 + contact);
  out.scale = std::abs(c0 * f0) + std::abs(c1 * f1) + std::abs(contact);
  out.floor = 1e-4 * (std::abs(c0) + std::abs(c1));
  return out;
}

WickSweepResult wick_rotation_sweep(const LatticeModel& kernels, double lambda,
                                    int L1, int L2,
                                    const std::vector<double>& betas,
                                    const std::vector<double>& Ts,
                                    double eta) {
  WickSweepResult out;
  const double Tmax = *std::max_element(Ts.begin(), Ts.end());
  std::vector<double> log_beta, log_err;
  for (double beta : betas) {
    const FockSystem sys = FockSystem::build(kernels, lambda, L1, L2, beta);
    const QuadOp A = sys.current_sum_x2(0, kTwoPi / L1, Channel::Charge);
    const QuadOp B = sys.channel_op(1, -kTwoPi / L1, 1, Channel::Charge);
    for (double T : Ts) {
      const auto w = sys.wick_sides(A, B, T, eta);
      out.points.push_back({beta, T, w.error, w.bound});
      if (T == Tmax) {
        log_beta.push_back(std::log(beta));
        log_err.push_back(std::log(std::max(w.error, 1e-300)));
      }
    }
  }
  double num = 0.0, den = 0.0;
  for (const auto& p : out.points) {
    num += p.error * p.model;
    den += p.model * p.model;
  }
  out.fitted_C = den > 0 ? num / den : 0.0;
  if (log_beta.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int n = static_cast<int>(log_beta.size());
    for (int i = 0; i < n; ++i) {
      sx += log_beta[i];
      sy += log_err[i];
      sxx += log_beta[i] * log_beta[i];
      sxy += log_beta[i] * log_err[i];
    }
    out.beta_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
  return out;
}

}  // namespace hel
