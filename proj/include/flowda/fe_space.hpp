#pragma once

#include <array>
#include <map>
#include <vector>

#include "flowda/mesh.hpp"

namespace flowda {

enum class ElementFamily { TaylorHoodP2P1, StabilizedP1P1 };

std::string to_string(ElementFamily family);

// Per-triangle affine geometry: barycentric gradients, area, diameter.
struct TriGeometry {
  std::array<std::array<double, 2>, 3> grad_lambda;
  double area = 0.0;
  double diameter = 0.0;  // longest edge
};

// One-dimensional trace element (inlet or observation section): 2 nodes for
// P1 velocity, 3 for P2 (endpoints + edge midnode), ordered along the line.
struct TraceElement {
  std::array<int, 3> nodes{-1, -1, -1};  // velocity node ids
  int n_nodes = 2;
  double length = 0.0;
};

// Mixed velocity/pressure space on a Mesh. Velocity has two components per
// node; pressure is always P1 on vertices. Immutable after build_space.
struct FeSpace {
  const Mesh* mesh = nullptr;
  ElementFamily family = ElementFamily::StabilizedP1P1;

  int n_velocity_nodes = 0;  // vertices (+ edge nodes for P2)
  int n_velocity_dofs = 0;   // N_u = 2 * n_velocity_nodes
  int n_pressure_dofs = 0;   // N_p = vertex count
  int nodes_per_tri = 3;     // 3 (P1) or 6 (P2)

  // Per triangle: 3 vertex nodes then, for P2, the nodes on edges
  // (v0,v1), (v1,v2), (v2,v0).
  std::vector<std::array<int, 6>> tri_nodes;
  std::vector<TriGeometry> tri_geometry;
  std::vector<std::array<double, 2>> node_coords;  // velocity nodes

  // Index sets (velocity nodes, ordered along the boundary where relevant)
  std::vector<int> inlet_nodes;         // wall-to-wall order
  std::array<int, 2> inlet_corners{-1, -1};
  std::vector<int> control_nodes;       // inlet nodes minus corners
  std::vector<int> control_dofs;        // 2 dofs per control node, N_g total
  std::vector<int> inlet_dofs;          // all inlet nodes' dofs
  std::vector<int> wall_nodes;          // sorted
  std::vector<int> dirichlet_dofs_velocity_control;  // wall + inlet dofs
  std::vector<int> dirichlet_dofs_wall_only;

  std::vector<TraceElement> inlet_elements;
  std::map<int, std::vector<int>> section_nodes;  // ordered along section
  std::map<int, std::vector<TraceElement>> section_elements;

  int velocity_dof(int node, int component) const {
    return 2 * node + component;
  }
  int pressure_offset() const { return n_velocity_dofs; }
  int total_dofs() const { return n_velocity_dofs + n_pressure_dofs; }
  int n_control_dofs() const { return static_cast<int>(control_dofs.size()); }
  bool is_p2() const { return family == ElementFamily::TaylorHoodP2P1; }

  // Edge-node id for P2 (vertex pair in any order); -1 for P1.
  int edge_node(int a, int b) const;

  std::map<std::pair<int, int>, int> edge_node_ids;  // (min,max) -> node id
};

FeSpace build_space(const Mesh& mesh, ElementFamily family);

}  // namespace flowda
