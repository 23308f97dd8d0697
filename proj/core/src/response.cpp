#include "hall_edge_lab/response.hpp"

#include <algorithm>
#include <cmath>

#include "hall_edge_lab/parallel.hpp"

namespace hel {

namespace {

// Gauss-Legendre rule of order 8 on [-1, 1].
constexpr double kGLx[8] = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
    -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
    0.7966664774136267,  0.9602898564975363};
constexpr double kGLw[8] = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
    0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
    0.2223810344533745, 0.1012285362903763};

double circ_dist(double a, double b) {
  double d = std::fmod(std::abs(a - b), kTwoPi);
  return std::min(d, kTwoPi - d);
}

}  // namespace

KQuadrature KQuadrature::lattice_grid(int n) {
  KQuadrature q;
  q.lattice = true;
  q.nodes.resize(n);
  q.weights.assign(n, 1.0 / n);
  for (int j = 0; j < n; ++j) q.nodes[j] = kTwoPi * j / n;
  return q;
}

KQuadrature KQuadrature::adaptive(const std::vector<double>& critical_points,
                                  double min_width, int coarse_panels,
                                  int gl_order) {
  if (gl_order != 8) throw ConfigError("only the order-8 GL rule is wired in");
  std::vector<double> crit;
  for (double c : critical_points)
    crit.push_back(std::fmod(std::fmod(c, kTwoPi) + kTwoPi, kTwoPi));
  std::sort(crit.begin(), crit.end());
  // dyadic panel subdivision graded toward the critical points
  std::vector<std::pair<double, double>> panels, done;
  for (int j = 0; j < coarse_panels; ++j)
    panels.push_back(
        {kTwoPi * j / coarse_panels, kTwoPi * (j + 1) / coarse_panels});
  while (!panels.empty()) {
    auto [a, b] = panels.back();
    panels.pop_back();
    const double w = b - a;
    double dist = 1e300;
    for (double c : crit) {
      if (c >= a && c <= b) {
        dist = 0.0;
        break;
      }
      dist = std::min({dist, circ_dist(c, a), circ_dist(c, b)});
    }
    if (w > min_width && dist < w) {
      panels.push_back({a, 0.5 * (a + b)});
      panels.push_back({0.5 * (a + b), b});
    } else {
      done.push_back({a, b});
    }
  }
  std::sort(done.begin(), done.end());
  KQuadrature q;
  q.lattice = false;
  for (auto [a, b] : done) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int i = 0; i < 8; ++i) {
      q.nodes.push_back(mid + half * kGLx[i]);
      q.weights.push_back(half * kGLw[i] / kTwoPi);
    }
  }
  return q;
}

namespace {

struct Bond {
  int u1, u2, v1, v2;
  double w;
};

// Bond pattern of j_1 / j_2: the straight bond plus the four sqrt(2)
// diagonals at weight 1/2.
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

int wrap_site(const LatticeModel& m, int x2) {
  if (m.boundary() == Boundary::Torus) return ((x2 % m.L()) + m.L()) % m.L();
  return x2;
}

int transverse_sites(const LatticeModel& m) {
  return m.boundary() == Boundary::Torus ? m.L() : m.L() + 1;
}

}  // namespace

Mat CurrentVertex::windowed(int mu, double k1,
                            const std::vector<double>& x2_weight) const {
  const LatticeModel& m = *model;
  const int M = m.M();
  const int rows = transverse_sites(m);
  Mat J = Mat::Zero(static_cast<long>(M) * rows, static_cast<long>(M) * rows);
  if (mu == 0) {
    for (int x2 = 0; x2 < rows; ++x2) {
      if (x2_weight[x2] == 0.0 || m.dirichlet_row(x2)) continue;
      for (int r = 0; r < M; ++r) J(x2 * M + r, x2 * M + r) += x2_weight[x2];
    }
    return J;
  }
  const Bond* bonds = mu == 1 ? kBondsJ1 : kBondsJ2;
  for (int x2 = 0; x2 < rows; ++x2) {
    if (x2_weight[x2] == 0.0) continue;
    for (int ib = 0; ib < 5; ++ib) {
      const Bond& b = bonds[ib];
      int row2 = x2 + b.u2, col2 = x2 + b.v2;
      if (m.boundary() == Boundary::Torus) {
        row2 = wrap_site(m, row2);
        col2 = wrap_site(m, col2);
      } else if (row2 < 0 || row2 >= rows || col2 < 0 || col2 >= rows) {
        continue;
      }
      const int z_f = b.u1 - b.v1;
      const cplx ph_f =
          cplx(0.0, 1.0) * std::exp(cplx(0.0, k1 * b.u1 - (k1 + p1) * b.v1));
      const cplx ph_b =
          cplx(0.0, -1.0) * std::exp(cplx(0.0, k1 * b.v1 - (k1 + p1) * b.u1));
      for (int r = 0; r < M; ++r)
        for (int rp = 0; rp < M; ++rp) {
          const cplx hf = m.hopping(z_f, row2, col2, r, rp);
          if (hf != cplx(0.0, 0.0))
            J(row2 * M + r, col2 * M + rp) += b.w * x2_weight[x2] * ph_f * hf;
          const cplx hb = m.hopping(-z_f, col2, row2, r, rp);
          if (hb != cplx(0.0, 0.0))
            J(col2 * M + r, row2 * M + rp) += b.w * x2_weight[x2] * ph_b * hb;
        }
    }
  }
  return J;
}

Mat CurrentVertex::at(int mu, double k1, int x2) const {
  std::vector<double> w(transverse_sites(*model), 0.0);
  w[x2] = 1.0;
  return windowed(mu, k1, w);
}

CurrentVertex build_current_vertex(const LatticeModel& m, double p1) {
  return CurrentVertex{&m, p1};
}

std::vector<double> window_leq(int L, int a) {
  std::vector<double> w(L + 1, 0.0);
  for (int x2 = 0; x2 <= std::min(a, L); ++x2) w[x2] = 1.0;
  return w;
}

namespace {

struct EigK {
  RVec e;
  Mat U;
  std::vector<char> null_mode;  // spurious Dirichlet-row zero modes
};

EigK eig_response(const LatticeModel& m, double k1) {
  Eigen::SelfAdjointEigenSolver<Mat> es(effective_1d_hamiltonian(m, k1));
  if (es.info() != Eigen::Success)
    throw NumericError("EigensolverFailure",
                       "diagonalization failed at k1=" + std::to_string(k1));
  EigK out{es.eigenvalues(), es.eigenvectors(), {}};
  const int n = static_cast<int>(out.e.size());
  out.null_mode.assign(n, 0);
  if (m.boundary() == Boundary::CylinderDirichlet) {
    const int M = m.M(), L = m.L();
    for (int q = 0; q < n; ++q) {
      if (std::abs(out.e[q]) > 1e-12) continue;
      double bmass = 0.0;
      for (int r = 0; r < M; ++r)
        bmass += std::norm(out.U(r, q)) + std::norm(out.U(L * M + r, q));
      if (bmass > 0.5) out.null_mode[q] = 1;
    }
  }
  return out;
}

// Frequency kernel (f_b - f_a)/(i eta + e_a - e_b) with the degenerate
// -beta n_F' limit at eta = 0.
cplx freq_kernel(double ea, double eb, double mu, double beta, double eta) {
  const cplx den(ea - eb, eta);
  if (std::abs(den) < 1e-12) {
    const double f = fermi(ea, mu, beta);
    return beta * f * (1.0 - f);
  }
  return (fermi(eb, mu, beta) - fermi(ea, mu, beta)) / den;
}

struct BlockPlan {
  LatticeModel block;
  double factor;  // spin multiplicity of the channel at lambda = 0
};

BlockPlan channel_block(const LatticeModel& m, Channel channel) {
  if (!m.spinful()) {
    if (channel == Channel::Spin)
      throw ConfigError("spin channel requires a spinful model");
    return {m, 1.0};
  }
  // H_up = H_down and lambda = 0: charge and spin channels both reduce to
  // twice the single-block bubble (cross-spin parts vanish).
  return {m.spin_block(), 2.0};
}

struct NodeEigs {
  std::vector<EigK> at_k, at_kp;
};

NodeEigs node_eigs(const LatticeModel& block, const KQuadrature& quad,
                   double p1, int workers) {
  NodeEigs out;
  const std::size_t n = quad.nodes.size();
  out.at_k.resize(n);
  out.at_kp.resize(n);
  parallel_for(n, workers, [&](std::size_t i) {
    out.at_k[i] = eig_response(block, quad.nodes[i]);
    out.at_kp[i] =
        p1 == 0.0 ? out.at_k[i] : eig_response(block, quad.nodes[i] + p1);
  });
  return out;
}

cplx bubble_from_eigs(const LatticeModel& block, const NodeEigs& eigs,
                      const KQuadrature& quad, double mu_chem, double beta,
                      double eta_beta, double p1, int mu, int nu,
                      const std::vector<double>& x2w,
                      const std::vector<double>& y2w, int workers) {
  const CurrentVertex vx{&block, p1};
  const CurrentVertex vy{&block, -p1};
  const std::size_t n = quad.nodes.size();
  std::vector<cplx> terms(n, cplx(0.0, 0.0));
  parallel_for(n, workers, [&](std::size_t i) {
    const double k1 = quad.nodes[i];
    const EigK& ek = eigs.at_k[i];
    const EigK& ep = eigs.at_kp[i];
    const Mat A = ek.U.adjoint() * vx.windowed(mu, k1, x2w) * ep.U;
    const Mat B = ep.U.adjoint() * vy.windowed(nu, k1 + p1, y2w) * ek.U;
    cplx acc = 0.0;
    const int dim = static_cast<int>(ek.e.size());
    for (int a = 0; a < dim; ++a) {
      if (ek.null_mode[a]) continue;
      for (int b = 0; b < dim; ++b) {
        if (ep.null_mode[b]) continue;
        const cplx ab = A(a, b) * B(b, a);
        if (ab == cplx(0.0, 0.0)) continue;
        acc += ab * freq_kernel(ek.e[a], ep.e[b], mu_chem, beta, eta_beta);
      }
    }
    terms[i] = quad.weights[i] * acc;
  });
  return pairwise_sum(terms);
}

}  // namespace

cplx bubble_windowed(const LatticeModel& m, double mu_chem, double beta,
                     double eta_beta, double p1, int mu, int nu,
                     Channel channel, const std::vector<double>& x2_weight,
                     const std::vector<double>& y2_weight,
                     const KQuadrature& quad, int workers) {
  const BlockPlan plan = channel_block(m, channel);
  const NodeEigs eigs = node_eigs(plan.block, quad, p1, workers);
  if (eta_beta == 0.0 && p1 == 0.0) {
    for (const auto& ek : eigs.at_k)
      for (int q = 0; q < ek.e.size(); ++q)
        if (!ek.null_mode[q] && std::abs(ek.e[q] - mu_chem) < 1e-12 &&
            beta > 1e10)
          throw NumericError("DegenerateAtFermi",
                             "eta_beta = 0 with a level at the Fermi energy; "
                             "use finite beta");
  }
  return plan.factor * bubble_from_eigs(plan.block, eigs, quad, mu_chem, beta,
                                        eta_beta, p1, mu, nu, x2_weight,
                                        y2_weight, workers);
}

CorrelatorResult bubble_correlator(const LatticeModel& m, double mu_chem,
                                   const CorrelatorRequest& req,
                                   const KQuadrature& quad, int workers) {
  const BlockPlan plan = channel_block(m, req.channel);
  const double eta_beta = snap_matsubara(req.eta, req.beta);
  CorrelatorResult out;
  out.beta = req.beta;
  out.L = m.L();
  out.eta_raw = req.eta;
  out.eta_beta = eta_beta;
  out.p1 = req.p1;
  out.mu = req.mu;
  out.nu = req.nu;
  out.channel = req.channel;
  out.analysis_grid = !quad.lattice;
  const NodeEigs eigs = node_eigs(plan.block, quad, req.p1, workers);
  const int rows = transverse_sites(plan.block);
  for (int x2 : req.x2_set)
    for (int y2 : req.y2_set) {
      if (x2 < 0 || x2 >= rows || y2 < 0 || y2 >= rows)
        throw ConfigError("x2/y2 outside the lattice");
      std::vector<double> wx(rows, 0.0), wy(rows, 0.0);
      wx[x2] = 1.0;
      wy[y2] = 1.0;
      out.values[{x2, y2}] =
          plan.factor * bubble_from_eigs(plan.block, eigs, quad, mu_chem,
                                         req.beta, eta_beta, req.p1, req.mu,
                                         req.nu, wx, wy, workers);
    }
  return out;
}

Mat schwinger_2pt_free(const LatticeModel& m, double mu, double beta,
                       const SpacetimePoint& x, const SpacetimePoint& y,
                       const KQuadrature& quad) {
  const int M = m.M();
  Mat out = Mat::Zero(M, M);
  double tau = x.x0 - y.x0;
  // antiperiodic reduction to [0, beta) with the 0^- equal-time convention
  double sign = 1.0;
  const double nwrap = std::floor(tau / beta);
  tau -= nwrap * beta;
  if (std::fmod(std::abs(nwrap), 2.0) == 1.0) sign = -1.0;
  const bool at_zero = tau == 0.0;
  for (std::size_t i = 0; i < quad.nodes.size(); ++i) {
    const double k1 = quad.nodes[i];
    const EigK ek = eig_response(m, k1);
    const cplx phase =
        quad.weights[i] * std::exp(cplx(0.0, -k1 * (x.x1 - y.x1)));
    for (int q = 0; q < ek.e.size(); ++q) {
      if (ek.null_mode[q]) continue;
      const double e = ek.e[q];
      double g;
      if (at_zero) {
        g = -fermi(e, mu, beta);  // x0 - y0 -> 0^- limit
      } else {
        // e^{-tau (e - mu)} (1 - f), overflow-safe: the exponent z + a is
        // bounded for tau in [0, beta)
        const double arg = beta * (e - mu);
        const double z = -tau * (e - mu);
        g = arg > 0 ? std::exp(z) / (1.0 + std::exp(-arg))
                    : std::exp(z + arg) / (1.0 + std::exp(arg));
      }
      for (int r = 0; r < M; ++r)
        for (int rp = 0; rp < M; ++rp)
          out(r, rp) += sign * phase * ek.U(x.x2 * M + r, q) *
                        std::conj(ek.U(y.x2 * M + rp, q)) * g;
    }
  }
  return out;
}

double schwinger_term(const LatticeModel& m, double mu_chem, double beta,
                      int y2, const KQuadrature& quad) {
  // Delta_{1,y2} = < tau_{y,y+e1} + 1/2 sum_{|y-z| = sqrt2} tau_{y,z} >
  const BlockPlan plan = channel_block(m, Channel::Charge);
  const LatticeModel& blk = plan.block;
  const int M = blk.M();
  const int rows = transverse_sites(blk);
  if (y2 < 0 || y2 >= rows) throw ConfigError("y2 outside the lattice");
  struct Hop {
    int d1, d2;
    double w;
  };
  const Hop hops[5] = {
      {1, 0, 1.0}, {1, 1, 0.5}, {1, -1, 0.5}, {-1, 1, 0.5}, {-1, -1, 0.5}};
  std::vector<double> terms(quad.nodes.size(), 0.0);
  for (std::size_t i = 0; i < quad.nodes.size(); ++i) {
    const EigK ek = eig_response(blk, quad.nodes[i]);
    double acc = 0.0;
    for (const auto& h : hops) {
      int z2 = y2 + h.d2;
      if (blk.boundary() == Boundary::Torus)
        z2 = wrap_site(blk, z2);
      else if (z2 < 0 || z2 >= rows)
        continue;
      // <tau_{y,z}> = 2 Re sum_{r,rp} H_{r,rp}(-d1; y2, z2) <a+_{y,r} a-_{z,rp}>
      cplx val = 0.0;
      for (int r = 0; r < M; ++r)
        for (int rp = 0; rp < M; ++rp) {
          const cplx hk = blk.hopping(-h.d1, y2, z2, r, rp);
          if (hk == cplx(0.0, 0.0)) continue;
          cplx dm = 0.0;  // <a+_{y,r} a-_{z,rp}> at this k1
          for (int q = 0; q < ek.e.size(); ++q) {
            if (ek.null_mode[q]) continue;
            dm += ek.U(z2 * M + rp, q) * std::conj(ek.U(y2 * M + r, q)) *
                  fermi(ek.e[q], mu_chem, beta);
          }
          val += hk * dm * std::exp(cplx(0.0, -quad.nodes[i] * h.d1));
        }
      acc += h.w * 2.0 * val.real();
    }
    terms[i] = quad.weights[i] * acc;
  }
  return plan.factor * pairwise_sum(terms);
}

WardResidual ward_residual(const LatticeModel& m, double mu_chem, double beta,
                           double eta, double p1, int nu, Channel channel,
                           int y2, int workers) {
  const double eta_beta = snap_matsubara(eta, beta);
  const KQuadrature quad = KQuadrature::lattice_grid(m.L());
  const int rows = transverse_sites(m.spinful() ? m.spin_block() : m);
  std::vector<double> full(rows, 1.0), wy(rows, 0.0);
  wy[y2] = 1.0;
  const cplx f0 = bubble_windowed(m, mu_chem, beta, eta_beta, p1, 0, nu,
                                  channel, full, wy, quad, workers);
  const cplx f1 = bubble_windowed(m, mu_chem, beta, eta_beta, p1, 1, nu,
                                  channel, full, wy, quad, workers);
  // eta_mu(p) p_mu: i eta for mu = 0 and i (1 - e^{i p1}) for mu = 1
  const cplx c0 = cplx(0.0, 1.0) * eta_beta;
  const cplx c1 = cplx(0.0, 1.0) * (1.0 - std::exp(cplx(0.0, p1)));
  const cplx lhs = c0 * f0 + c1 * f1;
  cplx contact = 0.0;
  if (nu == 1) contact = c1 * schwinger_term(m, mu_chem, beta, y2, quad);
  WardResidual out;
  out.residual = std::abs(lhs + contact);
  out.scale = std::abs(c0 * f0) + std::abs(c1 * f1) + std::abs(contact);
  // momentum rows where every term vanishes identically (0 = 0) would
  // otherwise compare roundoff against roundoff
  out.floor = 1e-4 * (std::abs(c0) + std::abs(c1));
  return out;
}

Eigen::Matrix2cd edge_conductance_matrix(const LatticeModel& m, double mu_chem,
                                         double beta, int a, int a_prime,
                                         double eta, double p1,
                                         Channel channel,
                                         const KQuadrature& quad,
                                         int workers) {
  if (m.boundary() != Boundary::CylinderDirichlet)
    throw ConfigError("edge conductance requires a cylinder model");
  if (!(a > a_prime && a_prime >= 1))
    throw ConfigError("edge conductance requires a > a' >= 1");
  const double eta_beta = snap_matsubara(eta, beta);
  const int L = m.L();
  const auto wa = window_leq(L, a);
  const auto wap = window_leq(L, a_prime);
  double delta_sum = 0.0;
  for (int y2 = 0; y2 <= std::min(a_prime, L); ++y2)
    delta_sum += schwinger_term(m, mu_chem, beta, y2, quad);
  Eigen::Matrix2cd G;
  for (int mu = 0; mu <= 1; ++mu)
    for (int nu = 0; nu <= 1; ++nu) {
      cplx v = bubble_windowed(m, mu_chem, beta, eta_beta, p1, mu, nu, channel,
                               wa, wap, quad, workers);
      if (mu == 1 && nu == 1) v += delta_sum;
      G(mu, nu) = (mu == 1 ? -1.0 : 1.0) * v;
    }
  return G;
}

Extrapolated extrapolate_sequence(const std::vector<double>& eps,
                                  const std::vector<double>& values) {
  Extrapolated out;
  const std::size_t n = values.size();
  if (n == 0) return out;
  if (n == 1) {
    out.value = values[0];
    out.error = std::abs(values[0]);
    return out;
  }
  if (n == 2) {
    const double slope = (values[1] - values[0]) / (eps[1] - eps[0]);
    out.value = values[1] - slope * eps[1];
    out.error = std::abs(out.value - values[1]);
    out.fitted_order = 1.0;
    return out;
  }
  const double ea = eps[n - 3], eb = eps[n - 2], ec = eps[n - 1];
  const double vb = values[n - 2], vc = values[n - 1];
  const double d1 = vb - values[n - 3], d2 = vc - vb;
  if (std::abs(d2) < 1e-15 * std::max(1.0, std::abs(vc))) {
    out.value = vc;
    out.error = std::abs(d2);
    return out;
  }
  // empirical order from the ratio of successive differences
  double q = 1.0;
  if (d1 * d2 > 0.0 && std::abs(d1) > std::abs(d2))
    q = std::clamp(std::log(d1 / d2) / std::log(ea / eb), 0.25, 4.0);
  const double s = std::pow(eb / ec, q);  // > 1 for a decreasing sequence
  out.value = vc - d2 / (1.0 - s);
  out.error = std::abs(d2) / (s - 1.0);
  out.fitted_order = q;
  return out;
}

namespace {

double auto_min_panel(double beta, double vmax, double p1, double eta) {
  double w = 1.0 / (beta * std::max(vmax, 0.1));
  if (p1 != 0.0) w = std::min(w, std::abs(p1));
  if (eta != 0.0) w = std::min(w, std::abs(eta) / std::max(vmax, 0.1));
  return std::clamp(0.25 * w, 1e-5, 0.05);
}

}  // namespace

TransportCoefficients transport_limits(const LatticeModel& m, double mu_chem,
                                       const std::vector<double>& beta_seq,
                                       const std::vector<double>& eps_seq,
                                       int a, int a_prime, Channel channel,
                                       const TransportOptions& opt) {
  if (beta_seq.empty() || eps_seq.empty())
    throw ConfigError("transport_limits needs beta and eps sequences");
  for (std::size_t i = 1; i < eps_seq.size(); ++i)
    if (!(eps_seq[i] < eps_seq[i - 1]))
      throw ConfigError("eps sequence must be strictly decreasing");
  for (std::size_t i = 1; i < beta_seq.size(); ++i)
    if (!(beta_seq[i] > beta_seq[i - 1]))
      throw ConfigError("beta sequence must be strictly increasing");
  if (!(a > a_prime && a_prime >= 1))
    throw ConfigError("transport_limits requires a > a' >= 1");

  const double beta = beta_seq.back();
  const BlockPlan plan = channel_block(m, channel);
  const LatticeModel& blk = plan.block;
  const int L = blk.L();

  // Fermi points of the edge branches drive the quadrature grading.
  const auto states = detect_edge_states(m, mu_chem, KGrid::lattice(m));
  if (states.empty())
    throw NumericError("NoGap", "no edge states for transport");
  std::vector<double> kFs;
  double vmax = 0.0;
  for (const auto& s : states) {
    kFs.push_back(s.kF_refined);
    vmax = std::max(vmax, std::abs(s.velocity));
  }

  TransportCoefficients out;
  out.beta = beta;
  out.a = a;
  out.a_prime = a_prime;
  out.channel = channel;

  const auto wa = window_leq(L, a);
  const auto wap = window_leq(L, a_prime);
  const auto wa2 = window_leq(L, a + opt.a_shift);
  const auto wap2 = window_leq(L, a_prime + opt.a_shift);

  // Delta^{<= a'} with a p1-independent graded mesh
  const double mw0 =
      opt.min_panel > 0 ? opt.min_panel : auto_min_panel(beta, vmax, 0.0, 0.0);
  const KQuadrature dquad =
      KQuadrature::adaptive(kFs, mw0, opt.coarse_panels, opt.gl_order);
  double delta_ap = 0.0;
  for (int y2 = 0; y2 <= std::min(a_prime, L); ++y2)
    delta_ap += schwinger_term(m, mu_chem, beta, y2, dquad);

  cplx G_shift_largest_eps = 0.0, G_base_largest_eps = 0.0;
  for (std::size_t ie = 0; ie < eps_seq.size(); ++ie) {
    const double eps = eps_seq[ie];
    // --- kappa/G ordering: eta -> 0 first (eta = eps^2, p1 = eps) ---
    {
      const double p1 = eps;
      const double eta_b = snap_matsubara(eps * eps, beta);
      std::vector<double> crit = kFs;
      for (double k : kFs) crit.push_back(k - p1);
      const double mw = opt.min_panel > 0
                            ? opt.min_panel
                            : auto_min_panel(beta, vmax, p1, eta_b);
      const KQuadrature quad =
          KQuadrature::adaptive(crit, mw, opt.coarse_panels, opt.gl_order);
      const NodeEigs eigs = node_eigs(blk, quad, p1, opt.workers);
      auto F = [&](int mu, int nu, const std::vector<double>& wx,
                   const std::vector<double>& wy) {
        return plan.factor * bubble_from_eigs(blk, eigs, quad, mu_chem, beta,
                                              eta_b, p1, mu, nu, wx, wy,
                                              opt.workers);
      };
      const cplx f00 = F(0, 0, wa, wap);
      const cplx f01 = F(0, 1, wa, wap);
      out.kappa.raw.push_back({eps, eps * eps, eta_b, p1, a, a_prime, f00});
      out.G.raw.push_back({eps, eps * eps, eta_b, p1, a, a_prime, f01});
      if (ie == 0) {
        G_base_largest_eps = f01;
        G_shift_largest_eps = F(0, 1, wa2, wap2);
      }
    }
    // --- D/Gtilde ordering: p1 -> 0 first (p1 = eps^2, eta = eps) ---
    {
      const double p1 = eps * eps;
      const double eta_b = snap_matsubara(eps, beta);
      std::vector<double> crit = kFs;
      for (double k : kFs) crit.push_back(k - p1);
      const double mw = opt.min_panel > 0
                            ? opt.min_panel
                            : auto_min_panel(beta, vmax, p1, eta_b);
      const KQuadrature quad =
          KQuadrature::adaptive(crit, mw, opt.coarse_panels, opt.gl_order);
      const NodeEigs eigs = node_eigs(blk, quad, p1, opt.workers);
      auto F = [&](int mu, int nu, const std::vector<double>& wx,
                   const std::vector<double>& wy) {
        return plan.factor * bubble_from_eigs(blk, eigs, quad, mu_chem, beta,
                                              eta_b, p1, mu, nu, wx, wy,
                                              opt.workers);
      };
      const cplx f11 = F(1, 1, wa, wap);
      const cplx f10 = F(1, 0, wa, wap);
      const cplx f00r = F(0, 0, wa, wap);
      out.D.raw.push_back({eps, eps, eta_b, p1, a, a_prime, -(f11 + delta_ap)});
      out.Gtilde.raw.push_back({eps, eps, eta_b, p1, a, a_prime, -f10});
      out.reversed_g00.raw.push_back({eps, eps, eta_b, p1, a, a_prime, f00r});
    }
  }
  out.a_sensitivity = std::abs(G_shift_largest_eps - G_base_largest_eps);

  auto finish = [&](CoefficientTrace& t, bool guard) {
    std::vector<double> es, vs;
    for (const auto& pt : t.raw) {
      es.push_back(pt.eps);
      vs.push_back(pt.value.real());
    }
    t.limit = extrapolate_sequence(es, vs);
    if (guard && vs.size() >= 3) {
      const double d1 = std::abs(vs[vs.size() - 2] - vs[vs.size() - 3]);
      const double d2 = std::abs(vs[vs.size() - 1] - vs[vs.size() - 2]);
      if (d2 > 10.0 * std::max(d1, 1e-14 * std::abs(vs.back())) && d2 > 1e-10)
        throw NumericError("NonConvergent",
                           "successive transport estimates diverge");
    }
  };
  finish(out.kappa, true);
  finish(out.D, true);
  finish(out.G, true);
  finish(out.Gtilde, true);
  finish(out.reversed_g00, false);
  return out;
}

}  // namespace hel
