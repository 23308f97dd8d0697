#include <cmath>

#include "doctest.h"
#include "hall_edge_lab/rg_audit.hpp"

using namespace hel;

TEST_CASE("scaling dimension table matches the renormalized gains") {
  CHECK(scaling_dimension(2, 0, 0, true) == 1);   // 2/2 - 2 + 2
  CHECK(scaling_dimension(4, 0, 0, true) == 1);   // 4/2 - 2 + 1
  CHECK(scaling_dimension(6, 0, 0, true) == 1);   // 6/2 - 2 + 0
  CHECK(scaling_dimension(2, 0, 1, true) == 1);   // 1 + 1 - 2 + 1
  CHECK(scaling_dimension(2, 0, 0, false) == -1); // relevant when bare
  CHECK(scaling_dimension(4, 0, 0, false) == 0);  // marginal when bare
  CHECK_THROWS_AS((void)scaling_dimension(3, 0, 0, true), ConfigError);
  CHECK_THROWS_AS((void)scaling_dimension(2, 1, 0, true), ConfigError);
}

TEST_CASE("renormalized pure-psi vertices all have dimension >= 1") {
  for (int nPsi = 2; nPsi <= 10; nPsi += 2)
    CHECK(scaling_dimension(nPsi, 0, 0, true) >= 1);
}

TEST_CASE("tree shape counts follow the little Schroeder numbers") {
  const long expected[] = {1, 1, 3, 11, 45, 197, 903, 4279};
  for (int n = 1; n <= 8; ++n) {
    const auto e = enumerate_tree_shapes(n);
    CHECK(e.shape_count == expected[n - 1]);
    CHECK(e.shape_count <= e.bound_4n);
    for (const auto& s : e.shapes) CHECK(s.n_endpoints == n);
  }
  CHECK_THROWS_AS((void)enumerate_tree_shapes(9), ConfigError);
}

TEST_CASE("scale labeling count equals brute-force enumeration") {
  for (int n : {1, 2, 3}) {
    const auto e = enumerate_tree_shapes(n);
    for (const auto& shape : e.shapes)
      for (int h : {-1, -2, -3, -5}) {
        long brute = 0;
        enumerate_labeled_trees(shape, h,
                                [&](const std::vector<int>&) { ++brute; });
        CHECK(count_scale_labelings(shape, h) == brute);
      }
  }
}

TEST_CASE("labeled trees are strictly monotone with v0 at h+1") {
  const auto e = enumerate_tree_shapes(3);
  const auto& shape = e.shapes[0];
  enumerate_labeled_trees(shape, -4, [&](const std::vector<int>& scales) {
    CHECK(scales[0] == -3);
    for (std::size_t i = 1; i < scales.size(); ++i) {
      CHECK(scales[i] > scales[shape.parent[i]]);
      CHECK(scales[i] <= 0);
    }
  });
}

namespace {
GNTree chain_tree(int nPsi_mid) {
  // root(-3) -- v0(-2) -- v1(-1) -- endpoint(0)
  GNTree t;
  t.root_scale = -3;
  t.nodes.resize(3);
  t.nodes[0] = {-1, {1}, -2, 4, 0, 0, false};
  t.nodes[1] = {0, {2}, -1, nPsi_mid, 0, 0, false};
  t.nodes[2] = {1, {}, 0, 4, 0, 0, true};
  return t;
}
}  // namespace

TEST_CASE("dimensional audit flags the unrenormalized two-leg chain") {
  // a |P_v| = 2 vertex: relevant when bare (D = -1), cured by the gain
  GNTree t = chain_tree(2);
  t.nodes[0].nPsi = 2;
  const auto audit = dimensional_bound_audit(t);
  CHECK(audit.summable_renormalized);
  CHECK(!audit.summable_unrenormalized);
  // renormalized exponents: both vertices D = 1, scale steps 1 each
  CHECK(audit.log2_product_renormalized == doctest::Approx(-2.0));
}

TEST_CASE("six-leg vertices are summable even without the gain") {
  GNTree t = chain_tree(6);
  t.nodes[0].nPsi = 6;
  t.nodes[2].nPsi = 6;
  const auto audit = dimensional_bound_audit(t);
  CHECK(audit.summable_renormalized);
  CHECK(audit.summable_unrenormalized);
}

TEST_CASE("gn tree validation catches contract violations") {
  GNTree t = chain_tree(4);
  t.nodes[1].scale = -2;  // not strictly increasing
  CHECK(!t.validate().empty());
  GNTree t2 = chain_tree(4);
  t2.nodes[0].nPsi = 99;  // P_v exceeds children
  CHECK(!t2.validate().empty());
}

TEST_CASE("zero beta function freezes the couplings") {
  BetaModel model{1.0, 0.5, [](int, const FlowState&) { return FlowBeta{}; }};
  const FlowState init{1.0, 1.3, 0.0, 0.05};
  const auto tr = flow_iterate(init, model, -20);
  CHECK(tr.states.back().lambda == init.lambda);
  CHECK(tr.states.back().Z == init.Z);
  CHECK(tr.states.back().v == init.v);
  CHECK(tr.lambda_drift == 0.0);
}

TEST_CASE("geometric beta model saturates the closed-form envelope") {
  const double lam = 0.05, theta = 0.5;
  BetaModel model{1.0, theta, [=](int k, const FlowState&) {
                    FlowBeta b;
                    b.lambda = lam * lam * std::pow(2.0, theta * k);
                    return b;
                  }};
  const auto tr = flow_iterate({1.0, 1.0, 0.0, lam}, model, -40);
  // lambda_{-40} - lambda_0 = lam^2 sum_{k=-39..0} 2^{k/2}
  double expected = 0.0;
  for (int k = 0; k > -40; --k) expected += lam * lam * std::pow(2.0, 0.5 * k);
  CHECK(tr.lambda_drift == doctest::Approx(expected).epsilon(1e-12));
  CHECK(tr.lambda_drift <= lam * lam / (1.0 - std::pow(2.0, -0.5)) + 1e-15);
  CHECK(tr.within_envelope);
  // geometric tail: the drift accumulated below half depth is tiny
  CHECK(tr.tail_at_half_depth < 1e-3 * tr.lambda_drift);
}

TEST_CASE("Z flow with quadratic beta stays within the log bound") {
  const double lam = 0.1, theta = 0.4;
  BetaModel model{1.0, theta, [=](int k, const FlowState&) {
                    FlowBeta b;
                    b.z = lam * lam * std::pow(2.0, theta * k);
                    return b;
                  }};
  const auto tr = flow_iterate({1.0, 1.0, 0.0, lam}, model, -30);
  const double logZ = std::log(tr.states.back().Z);
  CHECK(logZ <= lam * lam / (1.0 - std::pow(2.0, -theta)) + 1e-12);
  CHECK(tr.states.back().Z > 1.0);
}

TEST_CASE("beta bound violations are reported") {
  BetaModel model{1.0, 0.5, [](int, const FlowState&) {
                    FlowBeta b;
                    b.lambda = 1.0;  // way outside C lambda^2 2^{theta k}
                    return b;
                  }};
  CHECK_THROWS_WITH_AS((void)flow_iterate({1.0, 1.0, 0.0, 0.01}, model, -5),
                       doctest::Contains("BetaBoundViolated"), NumericError);
}

TEST_CASE("constant nu beta matches the closed-form geometric sum") {
  const double b = 0.02, theta = 0.5, lam = 0.1;
  NuBetaModel model{1.0,
                    [=](int, const std::vector<double>&, double) { return b; }};
  const int h = -10;
  const auto fp = nu_fixed_point(model, theta, h, lam);
  for (int i = 0; i <= -h; ++i) {
    const int k = h + i;
    double expected = 0.0;
    for (int j = h; j <= k; ++j)
      expected -= std::pow(2.0, j - k + 1) * std::pow(2.0, theta * j) * b;
    CHECK(fp.nu[i] == doctest::Approx(expected).epsilon(1e-12));
    // envelope |nu_k| <= (2 b / (1 - 2^{-(1+theta)})) 2^{theta k}
    CHECK(std::abs(fp.nu[i]) <=
          2.0 * b / (1.0 - std::pow(2.0, -(1.0 + theta))) *
                  std::pow(2.0, theta * k) +
              1e-15);
  }
}

TEST_CASE("zero nu beta gives the zero sequence") {
  NuBetaModel model{1.0,
                    [](int, const std::vector<double>&, double) { return 0.0; }};
  const auto fp = nu_fixed_point(model, 0.3, -8, 0.05);
  for (double v : fp.nu) CHECK(v == 0.0);
}

TEST_CASE("nu iteration contracts with factor <= 1/2 for theta >= 0.1") {
  // bounded feedback model: beta~ depends on the current sequence
  const double lam = 0.08;
  for (double theta : {0.1, 0.3, 0.5}) {
    NuBetaModel model{2.0, [=](int j, const std::vector<double>& nu,
                               double lambda) {
                        const std::size_t i =
                            std::min<std::size_t>(std::max(0, j + 12),
                                                  nu.empty() ? 0 : nu.size() - 1);
                        const double feedback = nu.empty() ? 0.0 : nu[i];
                        return lambda * (1.0 + 0.3 * std::sin(1.7 * j)) +
                               0.1 * feedback;
                      }};
    const auto fp = nu_fixed_point(model, theta, -12, lam);
    CHECK(fp.contraction_factor <= 0.5);
    CHECK(fp.envelope_constant < 10.0);
  }
}
