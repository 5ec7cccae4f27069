#ifndef AVEM_MESH_IO_HPP
#define AVEM_MESH_IO_HPP

#include <iosfwd>
#include <map>
#include <string>

#include "avem/mesh_forest.hpp"

namespace avem {

/// Versioned text format, one node and one element per line, ordered by id.
/// Round-trips byte-identically.
void save_mesh_text(const MeshForest& mesh, std::ostream& os);
MeshForest load_mesh_text(std::istream& is);

void save_mesh_text_file(const MeshForest& mesh, const std::string& path);
MeshForest load_mesh_text_file(const std::string& path);

struct SvgOptions {
  double width = 720.0;
  /// Fill elements with more than three boundary nodes.
  bool highlight_polygons = false;
  /// Per-element integer used with the fixed 6-bucket palette (values clamp
  /// to [0,5]); overrides highlighting.
  const std::map<ElementId, int>* bucket_values = nullptr;
  /// Per-element scalar rendered with a linear grayscale ramp.
  const std::map<ElementId, double>* scalar_values = nullptr;
};

void save_mesh_svg(const MeshForest& mesh, std::ostream& os, const SvgOptions& options = {});
void save_mesh_svg_file(const MeshForest& mesh, const std::string& path, const SvgOptions& options = {});

}  // namespace avem

#endif
