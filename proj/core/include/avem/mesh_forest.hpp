#ifndef AVEM_MESH_FOREST_HPP
#define AVEM_MESH_FOREST_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "avem/geometry.hpp"

namespace avem {

using NodeId = std::int32_t;
using ElementId = std::int32_t;

inline constexpr NodeId kNoNode = -1;
inline constexpr ElementId kNoElement = -1;
/// Sentinel admissibility bound: chains degenerate to plain bisection.
inline constexpr int kLambdaUnbounded = 1 << 28;

enum class NodeStatus : std::uint8_t { proper, hanging };

struct NodeRecord {
  Point xy;
  NodeStatus status = NodeStatus::proper;
  NodeId parent_a = kNoNode;  // endpoints of the edge whose bisection created the node
  NodeId parent_b = kNoNode;
  int lambda = 0;  // global index: 0 for proper nodes, max(parents)+1 for hanging ones
  bool on_boundary = false;
};

struct ElementRecord {
  // Counterclockwise corner triple with the newest vertex first, so the edge
  // opposite the newest vertex is (corners[1], corners[2]).
  std::array<NodeId, 3> corners{kNoNode, kNoNode, kNoNode};
  int level = 0;  // bisections since the root partition
  ElementId parent = kNoElement;
  ElementId child0 = kNoElement;  // child containing corners[1]
  ElementId child1 = kNoElement;  // child containing corners[2]
  bool alive = true;

  NodeId newest_vertex() const { return corners[0]; }
  bool has_children() const { return child0 != kNoElement; }
};

/// Newest-vertex-bisection forest over a conforming root triangulation.
///
/// The forest is persistent: node and element records are append-only and dead
/// elements are kept, which is what makes tree overlays and level queries
/// possible. A "mesh" is the set of alive leaves. Hanging nodes are first-class
/// mesh nodes carrying a global index lambda (0 iff the node is a corner of
/// every alive element containing it); the index of the partition is the
/// maximum lambda over all nodes, and a partition is Lambda-admissible when
/// that maximum stays below the bound.
class MeshForest {
 public:
  /// Build a forest from a conforming triangulation. Corner order per triangle
  /// is normalized to counterclockwise; the newest vertex of each root is
  /// placed opposite its longest edge (ties broken by smallest node id).
  /// Coordinates must be dyadic rationals (at most 32 fractional bits).
  static MeshForest from_triangulation(std::span<const Point> points,
                                       std::span<const std::array<int, 3>> triangles);

  // -- tables ---------------------------------------------------------------
  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_elements() const { return static_cast<int>(elements_.size()); }
  int num_alive() const { return n_alive_; }
  int num_roots() const { return n_roots_; }
  const NodeRecord& node(NodeId n) const { return nodes_[static_cast<std::size_t>(n)]; }
  const ElementRecord& element(ElementId e) const { return elements_[static_cast<std::size_t>(e)]; }
  bool is_alive(ElementId e) const { return elements_[static_cast<std::size_t>(e)].alive; }

  /// Alive elements in ascending id order.
  std::vector<ElementId> alive_elements() const;

  // -- geometry -------------------------------------------------------------
  Point node_xy(NodeId n) const { return node(n).xy; }
  double element_area(ElementId e) const;
  /// Mesh size h_E = |E|^{1/2}.
  double element_h(ElementId e) const { return std::sqrt(element_area(e)); }
  Point element_centroid(ElementId e) const;
  double total_area() const;

  /// Edge opposite the newest vertex.
  std::array<NodeId, 2> opposite_edge(ElementId e) const {
    const auto& r = element(e);
    return {r.corners[1], r.corners[2]};
  }

  /// All nodes on the boundary of an alive element, counterclockwise, hanging
  /// nodes included. Size 3 for a proper triangle.
  std::vector<NodeId> element_boundary_nodes(ElementId e) const;

  // -- adjacency and admissibility -------------------------------------------
  /// The unique alive element sharing the full edge opposite the newest vertex
  /// of E, or kNoElement when the edge is on the domain boundary or carries
  /// hanging nodes in its interior.
  ElementId facing_element(ElementId e) const;

  /// Two adjacent elements are compatible when neither newest vertex lies on
  /// the line through their shared edge. Throws if the elements do not share
  /// an edge.
  bool compatible(ElementId e1, ElementId e2) const;

  /// The global index the midpoint of the opposite edge would carry after
  /// bisecting E alone: 0 if the midpoint exists and is (or would become)
  /// proper, its current index if it exists and stays hanging, and
  /// max(lambda of the edge endpoints) + 1 when it does not exist yet.
  int prospective_lambda(ElementId e) const;

  /// Refinement chain for E: the list of elements that must be bisected ahead
  /// of E so that bisecting E keeps the partition Lambda-admissible. Levels
  /// along the chain are non-increasing and the chain has at most
  /// level(E) + 1 elements beyond E. Throws if a prospective index above
  /// Lambda + 1 is met (the input partition was not admissible).
  std::vector<ElementId> build_chain(ElementId e, int lambda_bound) const;

  // -- mutation ---------------------------------------------------------------
  /// Bisect an alive element at the midpoint of its opposite edge. Creates or
  /// promotes the midpoint node and recomputes global indices that the cut
  /// affects. Returns the two children.
  std::pair<ElementId, ElementId> bisect(ElementId e);

  /// Bisect E after refining its chain, preserving Lambda-admissibility.
  /// Every element created here has level at most level(E) + 1.
  void create_admissible_chain(ElementId e, int lambda_bound);

  /// Refine every marked element that is still alive when visited, through
  /// create_admissible_chain. The output partition is Lambda-admissible and no
  /// originally marked element survives.
  void refine(std::span<const ElementId> marked, int lambda_bound);

  /// Coarsest common refinement of two partitions grown from the same root
  /// triangulation: the alive set of the union of the two bisection trees.
  /// Throws if the root partitions differ.
  static MeshForest overlay(const MeshForest& a, const MeshForest& b);

  /// Global index of the partition (max lambda over all nodes).
  int global_index() const;

  bool node_on_boundary(NodeId n) const { return node(n).on_boundary; }

  // -- hooks for serialization (mesh_io) --------------------------------------
  struct RawTables {
    std::vector<NodeRecord> nodes;
    std::vector<ElementRecord> elements;
    int n_roots = 0;
  };
  RawTables raw_tables() const;
  static MeshForest from_raw_tables(RawTables tables);

 private:
  using EdgeKey = std::uint64_t;
  static EdgeKey edge_key(NodeId a, NodeId b) {
    const auto lo = static_cast<std::uint32_t>(a < b ? a : b);
    const auto hi = static_cast<std::uint32_t>(a < b ? b : a);
    return (static_cast<std::uint64_t>(hi) << 32) | lo;
  }

  NodeId find_or_create_midpoint(NodeId a, NodeId b, bool& created);
  void add_side(EdgeKey k, ElementId e);
  void remove_side(EdgeKey k, ElementId e);
  int side_count(EdgeKey k) const;
  ElementId side_other(EdgeKey k, ElementId e) const;
  /// True if some alive element has, as an exact side, this edge or an
  /// ancestor of it in the halving forest (i.e. the node at its midpoint is
  /// interior to an alive side and therefore hanging).
  bool covered_by_alive_side(EdgeKey k) const;
  bool covered_by_alive_side_excluding(EdgeKey k, ElementId skip) const;
  void propagate_lambda(NodeId from);
  void collect_side_nodes(NodeId a, NodeId b, std::vector<NodeId>& out) const;
  void rebuild_derived();

  std::vector<NodeRecord> nodes_;
  std::vector<ElementRecord> elements_;
  int n_roots_ = 0;
  int n_alive_ = 0;

  std::unordered_map<EdgeKey, NodeId> edge_midpoint_;
  std::unordered_map<EdgeKey, EdgeKey> edge_parent_;
  std::unordered_map<EdgeKey, std::array<ElementId, 2>> side_elems_;
  std::unordered_set<EdgeKey> boundary_edges_;
  std::vector<std::vector<std::pair<NodeId, NodeId>>> splits_at_;  // node -> (other endpoint, midpoint)
};

}  // namespace avem

#endif
