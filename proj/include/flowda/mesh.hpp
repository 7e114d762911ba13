#pragma once

#include <array>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "flowda/errors.hpp"

namespace flowda {

enum class BoundaryTag { Inlet, Outlet, Wall };

std::string to_string(BoundaryTag tag);
BoundaryTag boundary_tag_from_string(const std::string& s);

// Oriented so the domain lies to the left when walking v0 -> v1; the outward
// normal is then (dy, -dx) normalized.
struct BoundaryEdge {
  int v0 = 0, v1 = 0;
  BoundaryTag tag = BoundaryTag::Wall;
};

struct ChannelSpec {
  enum class Kind { Straight, Curved };

  Kind kind = Kind::Straight;
  double length = 5.0;       // straight channel only
  double half_height = 0.5;  // both kinds
  // curved channel: straight run, circular bend, straight run
  double upstream_length = 2.5;
  double bend_angle_deg = 90.0;
  double bend_radius = 1.5;
  double downstream_length = 2.5;
  // abscissa (centerline arc length) where the working domain begins
  std::optional<double> truncation_x;

  double total_centerline_length() const;
  double bend_arc_length() const;
  double bend_start() const { return upstream_length; }
  double bend_end() const { return upstream_length + bend_arc_length(); }

  void validate() const;  // throws ConfigError
};

// Triangulated 2D channel. Structured metadata (columns/rows of the logical
// grid behind the triangulation) is kept so sections and truncation lines
// coincide with node columns exactly.
struct Mesh {
  std::vector<std::array<double, 2>> vertices;
  std::vector<std::array<int, 3>> triangles;  // counterclockwise
  std::vector<BoundaryEdge> boundary_edges;
  // section id -> interior edges (vertex pairs, ordered wall to wall)
  std::map<int, std::vector<std::array<int, 2>>> section_edges;
  std::map<int, double> section_stations;  // section id -> centerline station
  double h_max = 0.0;

  // structured grid metadata
  int n_cols = 0, n_rows = 0;        // cell counts
  std::vector<double> col_stations;  // size n_cols + 1, centerline stations

  int vertex_index(int col, int row) const { return col * (n_rows + 1) + row; }
  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_triangles() const { return static_cast<int>(triangles.size()); }

  double triangle_area(int t) const;
  double total_area() const;
  std::array<double, 2> edge_midpoint(const BoundaryEdge& e) const;
  std::array<double, 2> outward_normal(const BoundaryEdge& e) const;

  // Column index whose station matches `station` within tolerance, or -1.
  int find_column(double station) const;

  // Consistency checks from the type invariants; throws MeshError.
  void validate() const;
};

Mesh build_straight_channel(const ChannelSpec& spec, double h,
                            const std::vector<double>& sections);
Mesh build_curved_channel(const ChannelSpec& spec, double h,
                          const std::vector<double>& stations);

// Sub-mesh downstream of spec.truncation_x; the cut column becomes the new
// inlet and retained sections are re-indexed from zero.
Mesh truncate(const Mesh& mesh, const ChannelSpec& spec);

// Centerline map of the curved channel: point, unit tangent, unit normal at
// arc-length station s.
struct CenterlineFrame {
  std::array<double, 2> point;
  std::array<double, 2> tangent;
  std::array<double, 2> normal;
};
CenterlineFrame centerline_frame(const ChannelSpec& spec, double s);

// Legacy-VTK unstructured grid (POINTS/CELLS/CELL_TYPES), text format.
void write_vtk(const Mesh& mesh, std::ostream& out);

// Versioned text dump for golden tests, with exact round-trip of doubles.
void write_mesh_dump(const Mesh& mesh, std::ostream& out);
Mesh read_mesh_dump(std::istream& in);

}  // namespace flowda
