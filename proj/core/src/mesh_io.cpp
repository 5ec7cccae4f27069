#include "avem/mesh_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace avem {

namespace {

constexpr const char* kHeader = "avem-mesh 1";

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void save_mesh_text(const MeshForest& mesh, std::ostream& os) {
  const auto tables = mesh.raw_tables();
  os << kHeader << "\n";
  os << "roots " << tables.n_roots << "\n";
  os << "nodes " << tables.nodes.size() << "\n";
  for (std::size_t i = 0; i < tables.nodes.size(); ++i) {
    const auto& n = tables.nodes[i];
    os << i << ' ' << fmt_double(n.xy.x) << ' ' << fmt_double(n.xy.y) << ' '
       << (n.status == NodeStatus::proper ? 'P' : 'H') << ' ' << n.parent_a << ' ' << n.parent_b
       << ' ' << n.lambda << '\n';
  }
  os << "elements " << tables.elements.size() << "\n";
  for (std::size_t i = 0; i < tables.elements.size(); ++i) {
    const auto& e = tables.elements[i];
    os << i << ' ' << e.corners[0] << ' ' << e.corners[1] << ' ' << e.corners[2] << ' '
       << e.corners[0] << ' ' << e.level << ' ' << e.child0 << ' ' << e.child1 << ' '
       << (e.alive ? 1 : 0) << '\n';
  }
}

MeshForest load_mesh_text(std::istream& is) {
  std::string header;
  std::getline(is, header);
  if (header != kHeader) throw std::runtime_error("mesh file: unknown header '" + header + "'");

  MeshForest::RawTables tables;
  std::string word;
  std::size_t count = 0;

  is >> word >> tables.n_roots;
  if (word != "roots") throw std::runtime_error("mesh file: expected 'roots'");
  is >> word >> count;
  if (word != "nodes") throw std::runtime_error("mesh file: expected 'nodes'");
  tables.nodes.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t id = 0;
    char status = 0;
    auto& n = tables.nodes[i];
    is >> id >> n.xy.x >> n.xy.y >> status >> n.parent_a >> n.parent_b >> n.lambda;
    if (!is || id != i) throw std::runtime_error("mesh file: bad node record");
    if (status != 'P' && status != 'H') throw std::runtime_error("mesh file: bad node status");
    n.status = status == 'P' ? NodeStatus::proper : NodeStatus::hanging;
  }

  is >> word >> count;
  if (word != "elements") throw std::runtime_error("mesh file: expected 'elements'");
  tables.elements.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t id = 0;
    NodeId nv = kNoNode;
    int alive = 0;
    auto& e = tables.elements[i];
    is >> id >> e.corners[0] >> e.corners[1] >> e.corners[2] >> nv >> e.level >> e.child0 >>
        e.child1 >> alive;
    if (!is || id != i) throw std::runtime_error("mesh file: bad element record");
    if (nv != e.corners[0]) throw std::runtime_error("mesh file: newest vertex must lead the corner list");
    e.parent = kNoElement;
    e.alive = alive != 0;
  }
  for (std::size_t i = 0; i < tables.elements.size(); ++i) {
    auto& e = tables.elements[i];
    for (const ElementId c : {e.child0, e.child1}) {
      if (c == kNoElement) continue;
      if (c < 0 || static_cast<std::size_t>(c) >= tables.elements.size()) {
        throw std::runtime_error("mesh file: child id out of range");
      }
      tables.elements[static_cast<std::size_t>(c)].parent = static_cast<ElementId>(i);
    }
  }

  // Recompute boundary flags from scratch so a hand-edited file cannot carry
  // stale ones.
  MeshForest mesh = MeshForest::from_raw_tables(std::move(tables));
  return mesh;
}

void save_mesh_text_file(const MeshForest& mesh, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  save_mesh_text(mesh, os);
}

MeshForest load_mesh_text_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open for reading: " + path);
  return load_mesh_text(is);
}

namespace {

// Fixed palette for bisection-count heat maps, buckets 0..5.
constexpr const char* kBucketColors[6] = {"#2c7bb6", "#74b7ae", "#c4e6a2",
                                          "#ffe8a4", "#f59053", "#d7191c"};

struct Bounds {
  double xmin = std::numeric_limits<double>::max();
  double xmax = std::numeric_limits<double>::lowest();
  double ymin = std::numeric_limits<double>::max();
  double ymax = std::numeric_limits<double>::lowest();
};

}  // namespace

void save_mesh_svg(const MeshForest& mesh, std::ostream& os, const SvgOptions& options) {
  Bounds b;
  for (NodeId n = 0; n < mesh.num_nodes(); ++n) {
    const Point p = mesh.node_xy(n);
    b.xmin = std::min(b.xmin, p.x);
    b.xmax = std::max(b.xmax, p.x);
    b.ymin = std::min(b.ymin, p.y);
    b.ymax = std::max(b.ymax, p.y);
  }
  const double dx = std::max(b.xmax - b.xmin, 1e-12);
  const double dy = std::max(b.ymax - b.ymin, 1e-12);
  const double scale = options.width / dx;
  const double height = dy * scale;

  double smin = 0.0, smax = 1.0;
  if (options.scalar_values && !options.scalar_values->empty()) {
    smin = std::numeric_limits<double>::max();
    smax = std::numeric_limits<double>::lowest();
    for (const auto& [e, v] : *options.scalar_values) {
      smin = std::min(smin, v);
      smax = std::max(smax, v);
    }
    if (smax <= smin) smax = smin + 1.0;
  }

  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" "
                "viewBox=\"0 0 %.3f %.3f\">\n",
                options.width, height, options.width, height);
  os << buf;

  const auto to_svg = [&](Point p) {
    return Point{(p.x - b.xmin) * scale, (b.ymax - p.y) * scale};
  };

  for (const ElementId e : mesh.alive_elements()) {
    const auto nodes = mesh.element_boundary_nodes(e);
    std::string fill = "#ffffff";
    if (options.bucket_values) {
      const auto it = options.bucket_values->find(e);
      if (it != options.bucket_values->end()) {
        fill = kBucketColors[std::clamp(it->second, 0, 5)];
      }
    } else if (options.scalar_values) {
      const auto it = options.scalar_values->find(e);
      if (it != options.scalar_values->end()) {
        const double t = (it->second - smin) / (smax - smin);
        const int g = static_cast<int>(255.0 * (1.0 - 0.85 * t));
        std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", g, g, 255);
        fill = buf;
      }
    } else if (options.highlight_polygons && nodes.size() > 3) {
      fill = "#e04a4a";
    }
    os << "<polygon points=\"";
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const Point p = to_svg(mesh.node_xy(nodes[i]));
      std::snprintf(buf, sizeof(buf), "%s%.3f,%.3f", i == 0 ? "" : " ", p.x, p.y);
      os << buf;
    }
    os << "\" fill=\"" << fill << "\" stroke=\"#202020\" stroke-width=\"0.35\"/>\n";
  }
  os << "</svg>\n";
}

void save_mesh_svg_file(const MeshForest& mesh, const std::string& path, const SvgOptions& options) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  save_mesh_svg(mesh, os, options);
}

}  // namespace avem
