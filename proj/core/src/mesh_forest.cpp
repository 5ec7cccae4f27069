#include "avem/mesh_forest.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

namespace avem {

namespace {

double squared_length(Point a, Point b) { return dot(b - a, b - a); }

}  // namespace

MeshForest MeshForest::from_triangulation(std::span<const Point> points,
                                          std::span<const std::array<int, 3>> triangles) {
  MeshForest mesh;
  mesh.nodes_.reserve(points.size());
  for (const Point& p : points) {
    if (!is_dyadic(p.x, 32) || !is_dyadic(p.y, 32)) {
      throw std::invalid_argument("from_triangulation: coordinates must be dyadic (<= 32 fractional bits)");
    }
    NodeRecord n;
    n.xy = p;
    mesh.nodes_.push_back(n);
  }

  for (const auto& t : triangles) {
    std::array<NodeId, 3> c{static_cast<NodeId>(t[0]), static_cast<NodeId>(t[1]),
                            static_cast<NodeId>(t[2])};
    for (NodeId id : c) {
      if (id < 0 || id >= mesh.num_nodes()) throw std::invalid_argument("triangle references unknown node");
    }
    const double area2 = cross(points[c[1]] - points[c[0]], points[c[2]] - points[c[0]]);
    if (area2 == 0.0) throw std::invalid_argument("degenerate root triangle");
    if (area2 < 0.0) std::swap(c[1], c[2]);

    // Newest vertex opposite the longest edge; ties broken by the smallest
    // opposite-node id.
    int nv_pos = 0;
    double best = -1.0;
    for (int i = 0; i < 3; ++i) {
      const double l2 = squared_length(mesh.nodes_[c[(i + 1) % 3]].xy, mesh.nodes_[c[(i + 2) % 3]].xy);
      if (l2 > best || (l2 == best && c[i] < c[nv_pos])) {
        best = l2;
        nv_pos = i;
      }
    }
    ElementRecord rec;
    rec.corners = {c[nv_pos], c[(nv_pos + 1) % 3], c[(nv_pos + 2) % 3]};
    mesh.elements_.push_back(rec);
  }

  mesh.n_roots_ = mesh.num_elements();
  mesh.n_alive_ = mesh.num_elements();
  mesh.splits_at_.resize(points.size());

  for (ElementId e = 0; e < mesh.num_elements(); ++e) {
    const auto& c = mesh.elements_[e].corners;
    for (int i = 0; i < 3; ++i) {
      const EdgeKey k = edge_key(c[i], c[(i + 1) % 3]);
      if (mesh.side_count(k) >= 2) throw std::invalid_argument("root triangulation is not conforming");
      mesh.add_side(k, e);
    }
  }
  for (const auto& [k, owners] : mesh.side_elems_) {
    const int count = (owners[0] != kNoElement) + (owners[1] != kNoElement);
    if (count == 1) {
      mesh.boundary_edges_.insert(k);
      mesh.nodes_[static_cast<NodeId>(k & 0xffffffffu)].on_boundary = true;
      mesh.nodes_[static_cast<NodeId>(k >> 32)].on_boundary = true;
    }
  }
  return mesh;
}

std::vector<ElementId> MeshForest::alive_elements() const {
  std::vector<ElementId> out;
  out.reserve(static_cast<std::size_t>(n_alive_));
  for (ElementId e = 0; e < num_elements(); ++e) {
    if (elements_[e].alive) out.push_back(e);
  }
  return out;
}

double MeshForest::element_area(ElementId e) const {
  const auto& c = element(e).corners;
  return std::abs(triangle_area(node_xy(c[0]), node_xy(c[1]), node_xy(c[2])));
}

Point MeshForest::element_centroid(ElementId e) const {
  const auto& c = element(e).corners;
  const Point a = node_xy(c[0]), b = node_xy(c[1]), d = node_xy(c[2]);
  return {(a.x + b.x + d.x) / 3.0, (a.y + b.y + d.y) / 3.0};
}

double MeshForest::total_area() const {
  long double sum = 0.0L;
  for (ElementId e = 0; e < num_elements(); ++e) {
    if (elements_[e].alive) sum += element_area(e);
  }
  return static_cast<double>(sum);
}

void MeshForest::collect_side_nodes(NodeId a, NodeId b, std::vector<NodeId>& out) const {
  const auto it = edge_midpoint_.find(edge_key(a, b));
  if (it == edge_midpoint_.end()) return;
  collect_side_nodes(a, it->second, out);
  out.push_back(it->second);
  collect_side_nodes(it->second, b, out);
}

std::vector<NodeId> MeshForest::element_boundary_nodes(ElementId e) const {
  const auto& c = element(e).corners;
  std::vector<NodeId> out;
  for (int i = 0; i < 3; ++i) {
    out.push_back(c[i]);
    collect_side_nodes(c[i], c[(i + 1) % 3], out);
  }
  return out;
}

void MeshForest::add_side(EdgeKey k, ElementId e) {
  auto& owners = side_elems_.try_emplace(k, std::array<ElementId, 2>{kNoElement, kNoElement}).first->second;
  if (owners[0] == kNoElement) {
    owners[0] = e;
  } else if (owners[1] == kNoElement) {
    owners[1] = e;
  } else {
    throw std::logic_error("add_side: more than two alive elements on one side");
  }
}

void MeshForest::remove_side(EdgeKey k, ElementId e) {
  const auto it = side_elems_.find(k);
  assert(it != side_elems_.end());
  auto& owners = it->second;
  if (owners[0] == e) {
    owners[0] = owners[1];
    owners[1] = kNoElement;
  } else {
    assert(owners[1] == e);
    owners[1] = kNoElement;
  }
  if (owners[0] == kNoElement) side_elems_.erase(it);
}

int MeshForest::side_count(EdgeKey k) const {
  const auto it = side_elems_.find(k);
  if (it == side_elems_.end()) return 0;
  return (it->second[0] != kNoElement) + (it->second[1] != kNoElement);
}

ElementId MeshForest::side_other(EdgeKey k, ElementId e) const {
  const auto it = side_elems_.find(k);
  if (it == side_elems_.end()) return kNoElement;
  if (it->second[0] != kNoElement && it->second[0] != e) return it->second[0];
  if (it->second[1] != kNoElement && it->second[1] != e) return it->second[1];
  return kNoElement;
}

bool MeshForest::covered_by_alive_side(EdgeKey k) const {
  return covered_by_alive_side_excluding(k, kNoElement);
}

bool MeshForest::covered_by_alive_side_excluding(EdgeKey k, ElementId skip) const {
  EdgeKey cur = k;
  while (true) {
    const auto it = side_elems_.find(cur);
    if (it != side_elems_.end()) {
      for (const ElementId owner : it->second) {
        if (owner != kNoElement && owner != skip) return true;
      }
    }
    const auto pit = edge_parent_.find(cur);
    if (pit == edge_parent_.end()) return false;
    cur = pit->second;
  }
}

ElementId MeshForest::facing_element(ElementId e) const {
  const auto oe = opposite_edge(e);
  EdgeKey cur = edge_key(oe[0], oe[1]);
  if (edge_midpoint_.contains(cur)) return kNoElement;  // hanging nodes interior to the edge
  while (true) {
    const ElementId other = side_other(cur, e);
    if (other != kNoElement) return other;
    const auto pit = edge_parent_.find(cur);
    if (pit == edge_parent_.end()) return kNoElement;  // domain boundary
    cur = pit->second;
  }
}

bool MeshForest::compatible(ElementId e1, ElementId e2) const {
  if (e1 == e2) throw std::invalid_argument("compatible: elements are not adjacent");
  const auto sides_of = [&](ElementId e) {
    const auto& c = element(e).corners;
    return std::array<EdgeKey, 3>{edge_key(c[0], c[1]), edge_key(c[1], c[2]), edge_key(c[2], c[0])};
  };
  const auto s1 = sides_of(e1);
  const auto s2 = sides_of(e2);

  // Two sides overlap along a segment exactly when one is the other or an
  // ancestor of the other in the edge-halving forest.
  EdgeKey witness = 0;
  bool found = false;
  std::unordered_set<EdgeKey> up1;
  for (EdgeKey k : s1) {
    EdgeKey cur = k;
    while (true) {
      up1.insert(cur);
      const auto pit = edge_parent_.find(cur);
      if (pit == edge_parent_.end()) break;
      cur = pit->second;
    }
  }
  for (EdgeKey k : s2) {
    if (up1.contains(k)) {
      witness = k;
      found = true;
      break;
    }
  }
  if (!found) {
    std::unordered_set<EdgeKey> up2;
    for (EdgeKey k : s2) {
      EdgeKey cur = k;
      while (true) {
        up2.insert(cur);
        const auto pit = edge_parent_.find(cur);
        if (pit == edge_parent_.end()) break;
        cur = pit->second;
      }
    }
    for (EdgeKey k : s1) {
      if (up2.contains(k)) {
        witness = k;
        found = true;
        break;
      }
    }
  }
  if (!found) throw std::invalid_argument("compatible: elements are not adjacent");

  const Point wa = node_xy(static_cast<NodeId>(witness & 0xffffffffu));
  const Point wb = node_xy(static_cast<NodeId>(witness >> 32));
  const Point n1 = node_xy(element(e1).newest_vertex());
  const Point n2 = node_xy(element(e2).newest_vertex());
  return !collinear(wa, wb, n1) && !collinear(wa, wb, n2);
}

int MeshForest::prospective_lambda(ElementId e) const {
  const auto oe = opposite_edge(e);
  const EdgeKey k = edge_key(oe[0], oe[1]);
  const auto it = edge_midpoint_.find(k);
  if (it != edge_midpoint_.end()) {
    const bool stays_hanging = covered_by_alive_side_excluding(k, e);
    return stays_hanging ? node(it->second).lambda : 0;
  }
  return std::max(node(oe[0]).lambda, node(oe[1]).lambda) + 1;
}

std::vector<ElementId> MeshForest::build_chain(ElementId e, int lambda_bound) const {
  if (!is_alive(e)) throw std::invalid_argument("build_chain: element not alive");
  std::vector<ElementId> chain{e};
  while (true) {
    const int lam = prospective_lambda(chain.back());
    if (lam <= lambda_bound) break;
    if (lam > lambda_bound + 1) {
      throw std::logic_error("build_chain: prospective index exceeds Lambda+1, input partition not admissible");
    }
    const ElementId f = facing_element(chain.back());
    if (f == kNoElement) {
      throw std::logic_error("build_chain: no facing element at index Lambda+1");
    }
    const bool comp = compatible(chain.back(), f);
    chain.push_back(f);
    if (comp) break;
  }
  return chain;
}

NodeId MeshForest::find_or_create_midpoint(NodeId a, NodeId b, bool& created) {
  const EdgeKey k = edge_key(a, b);
  const auto it = edge_midpoint_.find(k);
  if (it != edge_midpoint_.end()) {
    created = false;
    return it->second;
  }
  created = true;
  const NodeId m = num_nodes();
  NodeRecord rec;
  // Halving stays exact as long as the sums are; a rounded midpoint would
  // silently break every dyadic predicate downstream.
  double sx = 0.0, sy = 0.0;
  if (!exact_sum(node_xy(a).x, node_xy(b).x, sx) || !exact_sum(node_xy(a).y, node_xy(b).y, sy)) {
    throw std::logic_error("bisect: refinement depth exceeds exact dyadic coordinates");
  }
  rec.xy = {0.5 * sx, 0.5 * sy};
  rec.parent_a = std::min(a, b);
  rec.parent_b = std::max(a, b);
  rec.status = NodeStatus::hanging;  // settled by the caller
  rec.lambda = 0;
  rec.on_boundary = boundary_edges_.contains(k);
  nodes_.push_back(rec);
  splits_at_.emplace_back();

  edge_midpoint_.emplace(k, m);
  edge_parent_.emplace(edge_key(a, m), k);
  edge_parent_.emplace(edge_key(m, b), k);
  splits_at_[static_cast<std::size_t>(a)].emplace_back(b, m);
  splits_at_[static_cast<std::size_t>(b)].emplace_back(a, m);
  if (rec.on_boundary) {
    boundary_edges_.insert(edge_key(a, m));
    boundary_edges_.insert(edge_key(m, b));
  }
  return m;
}

void MeshForest::propagate_lambda(NodeId from) {
  std::vector<NodeId> work{from};
  while (!work.empty()) {
    const NodeId x = work.back();
    work.pop_back();
    for (const auto& [other, mid] : splits_at_[static_cast<std::size_t>(x)]) {
      auto& m = nodes_[static_cast<std::size_t>(mid)];
      const int nl = m.status == NodeStatus::proper
                         ? 0
                         : std::max(node(x).lambda, node(other).lambda) + 1;
      if (nl != m.lambda) {
        m.lambda = nl;
        work.push_back(mid);
      }
    }
  }
}

std::pair<ElementId, ElementId> MeshForest::bisect(ElementId e) {
  if (e < 0 || e >= num_elements() || !elements_[static_cast<std::size_t>(e)].alive) {
    throw std::invalid_argument("bisect: element not alive");
  }
  const auto corners = elements_[static_cast<std::size_t>(e)].corners;
  const int level = elements_[static_cast<std::size_t>(e)].level;
  const NodeId nv = corners[0], p = corners[1], q = corners[2];
  const EdgeKey k_pq = edge_key(p, q);

  bool created = false;
  const NodeId m = find_or_create_midpoint(p, q, created);

  remove_side(edge_key(nv, p), e);
  remove_side(k_pq, e);
  remove_side(edge_key(q, nv), e);

  const ElementId c0 = num_elements();
  const ElementId c1 = c0 + 1;
  ElementRecord r0;
  r0.corners = {m, nv, p};
  r0.level = level + 1;
  r0.parent = e;
  ElementRecord r1;
  r1.corners = {m, q, nv};
  r1.level = level + 1;
  r1.parent = e;
  elements_.push_back(r0);
  elements_.push_back(r1);
  auto& parent = elements_[static_cast<std::size_t>(e)];
  parent.alive = false;
  parent.child0 = c0;
  parent.child1 = c1;
  n_alive_ += 1;

  for (const ElementId c : {c0, c1}) {
    const auto& cc = elements_[static_cast<std::size_t>(c)].corners;
    for (int i = 0; i < 3; ++i) add_side(edge_key(cc[i], cc[(i + 1) % 3]), c);
  }

  // Settle the midpoint: proper exactly when no alive side still contains it
  // in its interior. A promotion lowers the indices of every hanging node in
  // the halving subtree below, which propagate_lambda replays.
  const bool hanging = covered_by_alive_side(k_pq);
  auto& mn = nodes_[static_cast<std::size_t>(m)];
  if (created) {
    mn.status = hanging ? NodeStatus::hanging : NodeStatus::proper;
    mn.lambda = hanging ? std::max(node(p).lambda, node(q).lambda) + 1 : 0;
  } else if (!hanging && mn.status == NodeStatus::hanging) {
    mn.status = NodeStatus::proper;
    mn.lambda = 0;
    propagate_lambda(m);
  }
  return {c0, c1};
}

void MeshForest::create_admissible_chain(ElementId e, int lambda_bound) {
  const auto chain = build_chain(e, lambda_bound);
  for (std::size_t k = chain.size(); k-- > 1;) {
    const ElementId ek = chain[k];
    const ElementId prev = chain[k - 1];
    const bool comp = compatible(ek, prev);
    bisect(ek);
    if (!comp) {
      // Incompatible step: the child of ek facing the predecessor takes a
      // second cut.
      const ElementId sibling = facing_element(prev);
      if (sibling == kNoElement || !is_alive(sibling)) {
        throw std::logic_error("create_admissible_chain: facing child not found");
      }
      bisect(sibling);
    }
  }
  bisect(chain[0]);
}

void MeshForest::refine(std::span<const ElementId> marked, int lambda_bound) {
  for (const ElementId e : marked) {
    if (is_alive(e)) create_admissible_chain(e, lambda_bound);
  }
}

int MeshForest::global_index() const {
  int lam = 0;
  for (const auto& n : nodes_) lam = std::max(lam, n.lambda);
  return lam;
}

MeshForest MeshForest::overlay(const MeshForest& a, const MeshForest& b) {
  if (a.n_roots_ != b.n_roots_) throw std::invalid_argument("overlay: different root partitions");
  for (ElementId r = 0; r < a.n_roots_; ++r) {
    const auto& ca = a.element(r).corners;
    const auto& cb = b.element(r).corners;
    for (int i = 0; i < 3; ++i) {
      const Point pa = a.node_xy(ca[i]);
      const Point pb = b.node_xy(cb[i]);
      if (pa.x != pb.x || pa.y != pb.y) {
        throw std::invalid_argument("overlay: different root partitions");
      }
    }
  }

  // Fresh forest holding just the shared roots, then replay the union tree.
  RawTables tables;
  int max_node = -1;
  for (ElementId r = 0; r < a.n_roots_; ++r) {
    for (const NodeId n : a.element(r).corners) max_node = std::max(max_node, n);
  }
  tables.nodes.assign(a.nodes_.begin(), a.nodes_.begin() + max_node + 1);
  tables.n_roots = a.n_roots_;
  for (ElementId r = 0; r < a.n_roots_; ++r) {
    ElementRecord rec;
    rec.corners = a.element(r).corners;
    tables.elements.push_back(rec);
  }
  MeshForest out = from_raw_tables(std::move(tables));

  struct Frame {
    ElementId ea, eb, eo;
  };
  std::vector<Frame> stack;
  for (ElementId r = 0; r < a.n_roots_; ++r) stack.push_back({r, r, r});
  while (!stack.empty()) {
    const Frame f = stack.back();
    stack.pop_back();
    const bool ref_a = f.ea != kNoElement && a.element(f.ea).has_children();
    const bool ref_b = f.eb != kNoElement && b.element(f.eb).has_children();
    if (!ref_a && !ref_b) continue;
    const auto [o0, o1] = out.bisect(f.eo);
    stack.push_back({ref_a ? a.element(f.ea).child0 : kNoElement,
                     ref_b ? b.element(f.eb).child0 : kNoElement, o0});
    stack.push_back({ref_a ? a.element(f.ea).child1 : kNoElement,
                     ref_b ? b.element(f.eb).child1 : kNoElement, o1});
  }
  return out;
}

MeshForest::RawTables MeshForest::raw_tables() const {
  return RawTables{nodes_, elements_, n_roots_};
}

MeshForest MeshForest::from_raw_tables(RawTables tables) {
  MeshForest mesh;
  mesh.nodes_ = std::move(tables.nodes);
  mesh.elements_ = std::move(tables.elements);
  mesh.n_roots_ = tables.n_roots;
  mesh.rebuild_derived();
  return mesh;
}

void MeshForest::rebuild_derived() {
  n_alive_ = 0;
  edge_midpoint_.clear();
  edge_parent_.clear();
  side_elems_.clear();
  boundary_edges_.clear();
  splits_at_.assign(nodes_.size(), {});

  for (NodeId n = 0; n < num_nodes(); ++n) {
    const auto& rec = nodes_[static_cast<std::size_t>(n)];
    if (rec.parent_a == kNoNode) continue;
    const EdgeKey k = edge_key(rec.parent_a, rec.parent_b);
    edge_midpoint_.emplace(k, n);
    edge_parent_.emplace(edge_key(rec.parent_a, n), k);
    edge_parent_.emplace(edge_key(n, rec.parent_b), k);
    splits_at_[static_cast<std::size_t>(rec.parent_a)].emplace_back(rec.parent_b, n);
    splits_at_[static_cast<std::size_t>(rec.parent_b)].emplace_back(rec.parent_a, n);
  }

  for (ElementId e = 0; e < num_elements(); ++e) {
    const auto& rec = elements_[static_cast<std::size_t>(e)];
    if (!rec.alive) continue;
    ++n_alive_;
    for (int i = 0; i < 3; ++i) add_side(edge_key(rec.corners[i], rec.corners[(i + 1) % 3]), e);
  }

  // Boundary edges: sides held by a single root, expanded through all splits.
  std::unordered_map<EdgeKey, int> root_sides;
  for (ElementId r = 0; r < n_roots_; ++r) {
    const auto& c = elements_[static_cast<std::size_t>(r)].corners;
    for (int i = 0; i < 3; ++i) root_sides[edge_key(c[i], c[(i + 1) % 3])] += 1;
  }
  std::vector<EdgeKey> queue;
  for (const auto& [k, count] : root_sides) {
    if (count == 1) queue.push_back(k);
  }
  while (!queue.empty()) {
    const EdgeKey k = queue.back();
    queue.pop_back();
    boundary_edges_.insert(k);
    const auto it = edge_midpoint_.find(k);
    if (it != edge_midpoint_.end()) {
      const NodeId m = it->second;
      const NodeId lo = static_cast<NodeId>(k & 0xffffffffu);
      const NodeId hi = static_cast<NodeId>(k >> 32);
      queue.push_back(edge_key(lo, m));
      queue.push_back(edge_key(m, hi));
    }
  }
}

}  // namespace avem
