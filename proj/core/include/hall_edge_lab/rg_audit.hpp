#pragma once

#include <functional>
#include <vector>

#include "hall_edge_lab/types.hpp"

namespace hel {

// Scale-labeled rooted tree of the multiscale expansion. Vertices carry the
// external field multiplicities (psi, phi, A); scales increase strictly from
// the root toward the endpoints, the root is not a branching point and the
// vertex v0 right after it sits at scale h+1.
struct GNNode {
  int parent = -1;
  std::vector<int> children;
  int scale = 0;
  int nPsi = 0, nPhi = 0, nA = 0;
  bool endpoint = false;
};

struct GNTree {
  int root_scale = 0;
  std::vector<GNNode> nodes;  // nodes[0] is v0
  // checks monotone scales, root/v0 structure and P_v containment
  std::vector<std::string> validate() const;
};

// Renormalization gain z_v: 2 for the pure two-leg vertex, 1 for the pure
// four-leg vertex and for the two-leg vertex with one A source, 0 otherwise.
int renormalization_gain(int nPsi, int nPhi, int nA);

// Vertex scaling dimension nPsi/2 + nPhi/2 + nA - 2 (+ z_v when
// renormalized). Rejects odd nPsi.
int scaling_dimension(int nPsi, int nPhi, int nA, bool renormalized);

// Plane rooted tree shapes with n ordered endpoints and no unary branch
// points; counted by the little Schroeder numbers and bounded by 4^n.
struct TreeShape {
  std::vector<int> parent;          // parent[0] = -1 for the top vertex
  std::vector<std::vector<int>> children;
  int n_endpoints = 0;
};

struct TreeEnumeration {
  std::vector<TreeShape> shapes;
  long shape_count = 0;
  long bound_4n = 0;
};

// All unlabeled shapes for n endpoints (n <= 8) plus the 4^n bound check.
TreeEnumeration enumerate_tree_shapes(int n_endpoints);

// Number of strictly monotone scale labelings of a shape with root at
// h_root < 0 and every vertex scale <= 0 (recursive count).
long count_scale_labelings(const TreeShape& shape, int h_root);

// Lazy stream of the labelings; callback receives per-node scales aligned
// with the shape's node order. Caps: n <= 8, h_root >= -12.
void enumerate_labeled_trees(const TreeShape& shape, int h_root,
                             const std::function<void(const std::vector<int>&)>& visit);

struct DimensionalAudit {
  double log2_product_renormalized = 0.0;
  double log2_product_unrenormalized = 0.0;
  bool summable_renormalized = true;
  bool summable_unrenormalized = true;
  std::vector<int> D_renormalized;   // per non-endpoint node
  std::vector<int> D_unrenormalized;
};

// Evaluates prod_v 2^{-(h_v - h_v') D_v} over non-endpoint vertices for the
// renormalized and bare dimension bookkeeping; "summable" means every
// non-endpoint D_v >= 1.
DimensionalAudit dimensional_bound_audit(const GNTree& tree);

struct FlowState {
  double Z = 1.0;
  double v = 1.0;
  double nu = 0.0;
  double lambda = 0.0;
};

struct FlowBeta {
  double z = 0.0, v = 0.0, nu = 0.0, lambda = 0.0;
};

// User-supplied beta-function model with its declared envelope
// |beta_k| <= C lambda0^2 2^{theta k}; the iteration checks the envelope at
// every scale and throws BetaBoundViolated when the model breaks it.
struct BetaModel {
  double C = 1.0;
  double theta = 0.5;
  std::function<FlowBeta(int k, const FlowState&)> eval;
};

struct FlowTrajectory {
  std::vector<int> scales;        // 0, -1, ..., h_min
  std::vector<FlowState> states;  // aligned with scales
  double lambda_drift = 0.0;      // |lambda_{h_min} - lambda_0|
  double envelope_bound = 0.0;    // C lambda^2 / (1 - 2^{-theta})
  bool within_envelope = true;
  double tail_at_half_depth = 0.0;  // |lambda_{h_min} - lambda_{h_min/2}|
};

FlowTrajectory flow_iterate(const FlowState& initial, const BetaModel& model,
                            int h_min);

// nu-sequence beta model: |beta~^nu_j| <= C |lambda|; the 2^{theta j}
// envelope factor is part of the fixed-point parametrization.
struct NuBetaModel {
  double C = 1.0;
  std::function<double(int j, const std::vector<double>& nu_seq,
                       double lambda)>
      eval;
};

struct NuFixedPoint {
  std::vector<double> nu;  // nu_k for k = h_min..0 (index k - h_min)
  int iterations = 0;
  double contraction_factor = 0.0;  // measured in the 2^{-theta k} sup norm
  double envelope_constant = 0.0;   // sup_k |nu_k| 2^{-theta k} / |lambda|
};

// Banach iteration of nu_k = -sum_{j=h}^{k} 2^{j-k+1} 2^{theta j}
// beta~^nu_{j+1}; throws NoContraction when successive iterates stop
// contracting.
NuFixedPoint nu_fixed_point(const NuBetaModel& model, double theta, int h_min,
                            double lambda);

}  // namespace hel
