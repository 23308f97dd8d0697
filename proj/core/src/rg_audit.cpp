#include "hall_edge_lab/rg_audit.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hel {

int renormalization_gain(int nPsi, int nPhi, int nA) {
  if (nPsi == 2 && nPhi == 0 && nA == 0) return 2;
  if (nPsi == 4 && nPhi == 0 && nA == 0) return 1;
  if (nPsi == 2 && nPhi == 0 && nA == 1) return 1;
  return 0;
}

int scaling_dimension(int nPsi, int nPhi, int nA, bool renormalized) {
  if (nPsi < 0 || nPhi < 0 || nA < 0)
    throw ConfigError("field multiplicities must be nonnegative");
  if (nPsi % 2 != 0) throw ConfigError("nPsi must be even");
  if ((nPsi + nPhi) % 2 != 0)
    throw ConfigError("nPsi + nPhi must be even (fermion parity)");
  const int base2 = nPsi + nPhi + 2 * nA - 4;  // 2 * (the dimension)
  if (base2 % 2 != 0) throw ConfigError("half-integer scaling dimension");
  int d = base2 / 2;
  if (renormalized) d += renormalization_gain(nPsi, nPhi, nA);
  return d;
}

namespace {

// compositions of n into parts >= 1; shapes built recursively: a subtree
// with 1 endpoint is a leaf, otherwise a branch vertex with >= 2 ordered
// children subtrees
void build_shapes(int n, std::vector<TreeShape>& out) {
  // enumerate shapes as nested structures encoded into parent arrays
  struct Sub {
    std::vector<int> parent;  // local, root at index 0
  };
  std::function<std::vector<Sub>(int)> gen = [&](int k) -> std::vector<Sub> {
    std::vector<Sub> result;
    if (k == 1) {
      result.push_back({{-1}});
      return result;
    }
    // root with >= 2 ordered children subtrees holding k endpoints total
    std::vector<int> parts;
    std::function<void(int, int)> compose = [&](int remaining, int minparts) {
      if (remaining == 0) {
        if (static_cast<int>(parts.size()) < 2) return;
        // cartesian product of child shapes
        std::vector<std::vector<Sub>> choices;
        for (int p : parts) choices.push_back(gen(p));
        std::vector<std::size_t> idx(parts.size(), 0);
        while (true) {
          Sub s;
          s.parent.push_back(-1);
          for (std::size_t c = 0; c < parts.size(); ++c) {
            const Sub& ch = choices[c][idx[c]];
            const int base = static_cast<int>(s.parent.size());
            for (std::size_t i = 0; i < ch.parent.size(); ++i)
              s.parent.push_back(ch.parent[i] < 0 ? 0 : ch.parent[i] + base);
          }
          result.push_back(std::move(s));
          std::size_t c = 0;
          while (c < idx.size() && ++idx[c] == choices[c].size()) {
            idx[c] = 0;
            ++c;
          }
          if (c == idx.size()) break;
        }
        return;
      }
      for (int p = 1; p <= remaining; ++p) {
        parts.push_back(p);
        compose(remaining - p, minparts);
        parts.pop_back();
      }
    };
    compose(k, 2);
    return result;
  };
  for (const auto& s : gen(n)) {
    TreeShape t;
    t.parent = s.parent;
    t.children.assign(s.parent.size(), {});
    for (std::size_t i = 1; i < s.parent.size(); ++i)
      t.children[s.parent[i]].push_back(static_cast<int>(i));
    int leaves = 0;
    for (const auto& c : t.children)
      if (c.empty()) ++leaves;
    t.n_endpoints = leaves;
    out.push_back(std::move(t));
  }
}

}  // namespace

TreeEnumeration enumerate_tree_shapes(int n_endpoints) {
  if (n_endpoints < 1 || n_endpoints > 8)
    throw ConfigError("tree enumeration capped at 1 <= n <= 8");
  TreeEnumeration e;
  build_shapes(n_endpoints, e.shapes);
  e.shape_count = static_cast<long>(e.shapes.size());
  e.bound_4n = 1;
  for (int i = 0; i < n_endpoints; ++i) e.bound_4n *= 4;
  if (e.shape_count > e.bound_4n)
    throw NumericError("BoundViolated",
                       "unlabeled count exceeds 4^n; enumeration bug");
  return e;
}

namespace {

// number of strictly increasing scale assignments for the subtree rooted at
// `node` given the parent's scale; every scale <= 0
long count_labelings_from(const TreeShape& shape, int node, int parent_scale) {
  long total = 0;
  for (int s = parent_scale + 1; s <= 0; ++s) {
    long ways = 1;
    for (int c : shape.children[node]) {
      ways *= count_labelings_from(shape, c, s);
      if (ways == 0) break;
    }
    total += ways;
  }
  return total;
}

}  // namespace

long count_scale_labelings(const TreeShape& shape, int h_root) {
  if (h_root < -12 || h_root >= 0)
    throw ConfigError("h_root must lie in [-12, -1]");
  // v0 is pinned to h_root + 1; if node 0 is already an endpoint the single
  // labeling is {h_root + 1}
  long total = 1;
  const int v0_scale = h_root + 1;
  if (v0_scale > 0) return 0;
  for (int c : shape.children[0])
    total *= count_labelings_from(shape, c, v0_scale);
  return total;
}

void enumerate_labeled_trees(
    const TreeShape& shape, int h_root,
    const std::function<void(const std::vector<int>&)>& visit) {
  if (h_root < -12 || h_root >= 0)
    throw ConfigError("h_root must lie in [-12, -1]");
  std::vector<int> scales(shape.parent.size(), 0);
  scales[0] = h_root + 1;
  // depth-first assignment in node order (children have higher indices)
  std::function<void(std::size_t)> rec = [&](std::size_t node) {
    if (node == shape.parent.size()) {
      visit(scales);
      return;
    }
    const int lo = scales[shape.parent[node]] + 1;
    for (int s = lo; s <= 0; ++s) {
      scales[node] = s;
      rec(node + 1);
    }
  };
  if (scales[0] <= 0) rec(1);
}

std::vector<std::string> GNTree::validate() const {
  std::vector<std::string> out;
  if (nodes.empty()) {
    out.push_back("empty tree");
    return out;
  }
  if (nodes[0].parent != -1) out.push_back("v0 must follow the root");
  if (nodes[0].scale != root_scale + 1)
    out.push_back("v0 must sit at scale h+1");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& v = nodes[i];
    if (v.parent >= 0 && nodes[v.parent].scale >= v.scale)
      out.push_back("scales must increase toward the endpoints");
    if (v.scale > 0) out.push_back("scales must stay <= 0");
    if (v.endpoint != v.children.empty())
      out.push_back("endpoint flag inconsistent with children");
    if (!v.children.empty()) {
      // P_v must be contained in the union of the children's fields
      int cPsi = 0, cPhi = 0, cA = 0;
      for (int c : v.children) {
        cPsi += nodes[c].nPsi;
        cPhi += nodes[c].nPhi;
        cA += nodes[c].nA;
      }
      if (v.nPsi > cPsi || v.nPhi > cPhi || v.nA > cA)
        out.push_back("P_v exceeds the union of its children");
    }
  }
  return out;
}

DimensionalAudit dimensional_bound_audit(const GNTree& tree) {
  const auto problems = tree.validate();
  if (!problems.empty())
    throw ConfigError("invalid GN tree: " + problems.front());
  DimensionalAudit out;
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const auto& v = tree.nodes[i];
    if (v.endpoint) continue;
    const int parent_scale =
        v.parent < 0 ? tree.root_scale : tree.nodes[v.parent].scale;
    const int dh = v.scale - parent_scale;
    const int Dr = scaling_dimension(v.nPsi, v.nPhi, v.nA, true);
    const int Du = scaling_dimension(v.nPsi, v.nPhi, v.nA, false);
    out.D_renormalized.push_back(Dr);
    out.D_unrenormalized.push_back(Du);
    out.log2_product_renormalized -= static_cast<double>(dh) * Dr;
    out.log2_product_unrenormalized -= static_cast<double>(dh) * Du;
    if (Dr < 1) out.summable_renormalized = false;
    if (Du < 1) out.summable_unrenormalized = false;
  }
  return out;
}

FlowTrajectory flow_iterate(const FlowState& initial, const BetaModel& model,
                            int h_min) {
  if (h_min >= 0) throw ConfigError("h_min must be negative");
  FlowTrajectory out;
  FlowState s = initial;
  const double lam0 = initial.lambda;
  const double envelope_unit = model.C * lam0 * lam0;
  out.scales.push_back(0);
  out.states.push_back(s);
  for (int k = 0; k > h_min; --k) {
    const FlowBeta b = model.eval(k, s);
    const double cap = envelope_unit * std::pow(2.0, model.theta * k);
    for (double comp : {b.z, b.v, b.nu, b.lambda})
      if (std::abs(comp) > cap * (1.0 + 1e-12))
        throw NumericError(
            "BetaBoundViolated",
            "beta component " + std::to_string(comp) + " exceeds C lambda^2 "
            "2^{theta k} = " + std::to_string(cap) + " at k = " +
                std::to_string(k));
    FlowState next = s;
    next.Z = s.Z * (1.0 + b.z);
    next.v = s.v + b.v;
    next.lambda = s.lambda + b.lambda;
    next.nu = 2.0 * (s.nu + b.nu);
    s = next;
    out.scales.push_back(k - 1);
    out.states.push_back(s);
  }
  out.lambda_drift = std::abs(s.lambda - lam0);
  out.envelope_bound =
      envelope_unit / (1.0 - std::pow(2.0, -model.theta));
  out.within_envelope = out.lambda_drift <= out.envelope_bound * (1 + 1e-12);
  const std::size_t half = out.states.size() / 2;
  out.tail_at_half_depth =
      std::abs(out.states.back().lambda - out.states[half].lambda);
  return out;
}

NuFixedPoint nu_fixed_point(const NuBetaModel& model, double theta, int h_min,
                            double lambda) {
  if (h_min >= 0) throw ConfigError("h_min must be negative");
  const int n = -h_min + 1;  // scales h_min..0
  std::vector<double> nu(n, 0.0), next(n, 0.0);
  auto weighted_norm = [&](const std::vector<double>& a,
                           const std::vector<double>& b) {
    double w = 0.0;
    for (int i = 0; i < n; ++i) {
      const int k = h_min + i;
      w = std::max(w, std::abs(a[i] - b[i]) * std::pow(2.0, -theta * k));
    }
    return w;
  };
  NuFixedPoint out;
  double prev_delta = -1.0;
  std::vector<double> prev = nu;
  for (int iter = 0; iter < 200; ++iter) {
    // nu_k = -sum_{j=h_min}^{k} 2^{j-k+1} 2^{theta j} beta~^nu_{j+1}
    for (int i = 0; i < n; ++i) {
      const int k = h_min + i;
      double acc = 0.0;
      for (int j = h_min; j <= k; ++j) {
        const double bt = model.eval(j + 1, nu, lambda);
        if (std::abs(bt) > model.C * std::abs(lambda) * (1.0 + 1e-12))
          throw NumericError("BetaBoundViolated",
                             "|beta~^nu| exceeds C |lambda|");
        acc += std::pow(2.0, j - k + 1) * std::pow(2.0, theta * j) * bt;
      }
      next[i] = -acc;
    }
    const double delta = weighted_norm(next, nu);
    prev = nu;
    nu = next;
    out.iterations = iter + 1;
    if (delta < 1e-14) break;
    if (prev_delta > 1e-12 && delta > 1e-13) {
      const double factor = delta / prev_delta;
      out.contraction_factor = std::max(out.contraction_factor, factor);
      if (factor >= 1.0 && delta > 1e-12)
        throw NumericError("NoContraction",
                           "nu iteration fails to contract (factor " +
                               std::to_string(factor) + ")");
    }
    prev_delta = delta;
  }
  out.nu = nu;
  double env = 0.0;
  for (int i = 0; i < n; ++i) {
    const int k = h_min + i;
    env = std::max(env, std::abs(nu[i]) * std::pow(2.0, -theta * k) /
                            std::max(std::abs(lambda), 1e-300));
  }
  out.envelope_constant = env;
  return out;
}

}  // namespace hel
