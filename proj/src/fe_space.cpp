#include "flowda/fe_space.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace flowda {

std::string to_string(ElementFamily family) {
  return family == ElementFamily::TaylorHoodP2P1 ? "p2p1" : "p1p1";
}

int FeSpace::edge_node(int a, int b) const {
  if (!is_p2()) return -1;
  const auto it = edge_node_ids.find({std::min(a, b), std::max(a, b)});
  return it == edge_node_ids.end() ? -1 : it->second;
}

namespace {

TriGeometry tri_geometry(const Mesh& mesh, const std::array<int, 3>& tri) {
  const auto& p0 = mesh.vertices[tri[0]];
  const auto& p1 = mesh.vertices[tri[1]];
  const auto& p2 = mesh.vertices[tri[2]];
  const double det =
      (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p1[1] - p0[1]) * (p2[0] - p0[0]);
  TriGeometry g;
  g.area = 0.5 * det;
  // grad lambda_i = perp(opposite edge) / det
  g.grad_lambda[0] = {(p1[1] - p2[1]) / det, (p2[0] - p1[0]) / det};
  g.grad_lambda[1] = {(p2[1] - p0[1]) / det, (p0[0] - p2[0]) / det};
  g.grad_lambda[2] = {(p0[1] - p1[1]) / det, (p1[0] - p0[0]) / det};
  const double e0 = std::hypot(p1[0] - p0[0], p1[1] - p0[1]);
  const double e1 = std::hypot(p2[0] - p1[0], p2[1] - p1[1]);
  const double e2 = std::hypot(p0[0] - p2[0], p0[1] - p2[1]);
  g.diameter = std::max({e0, e1, e2});
  return g;
}

// Orders the vertices of a polyline given as consecutive edges.
std::vector<int> polyline_vertices(
    const std::vector<std::array<int, 2>>& edges) {
  std::vector<int> nodes;
  nodes.reserve(edges.size() + 1);
  nodes.push_back(edges.front()[0]);
  for (const auto& e : edges) nodes.push_back(e[1]);
  return nodes;
}

}  // namespace

FeSpace build_space(const Mesh& mesh, ElementFamily family) {
  FeSpace space;
  space.mesh = &mesh;
  space.family = family;
  const bool p2 = family == ElementFamily::TaylorHoodP2P1;
  space.nodes_per_tri = p2 ? 6 : 3;

  const int n_vertices = mesh.n_vertices();
  space.n_pressure_dofs = n_vertices;
  space.node_coords = mesh.vertices;

  // Unique edge enumeration for P2 midside nodes, ordered by vertex pair.
  if (p2) {
    std::set<std::pair<int, int>> edge_set;
    for (const auto& tri : mesh.triangles)
      for (int e = 0; e < 3; ++e) {
        int a = tri[e], b = tri[(e + 1) % 3];
        if (a > b) std::swap(a, b);
        edge_set.insert({a, b});
      }
    int next = n_vertices;
    for (const auto& [a, b] : edge_set) {
      space.edge_node_ids[{a, b}] = next++;
      space.node_coords.push_back(
          {0.5 * (mesh.vertices[a][0] + mesh.vertices[b][0]),
           0.5 * (mesh.vertices[a][1] + mesh.vertices[b][1])});
    }
    space.n_velocity_nodes = next;
  } else {
    space.n_velocity_nodes = n_vertices;
  }
  space.n_velocity_dofs = 2 * space.n_velocity_nodes;

  space.tri_nodes.resize(mesh.n_triangles());
  space.tri_geometry.resize(mesh.n_triangles());
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    auto& nodes = space.tri_nodes[t];
    nodes = {tri[0], tri[1], tri[2], -1, -1, -1};
    if (p2)
      for (int e = 0; e < 3; ++e)
        nodes[3 + e] = space.edge_node(tri[e], tri[(e + 1) % 3]);
    space.tri_geometry[t] = tri_geometry(mesh, tri);
  }

  // Boundary node sets. Inlet nodes are ordered along the inlet polyline.
  std::vector<std::array<int, 2>> inlet_edges;
  std::set<int> wall_vertex_set;
  for (const auto& be : mesh.boundary_edges) {
    if (be.tag == BoundaryTag::Inlet) inlet_edges.push_back({be.v0, be.v1});
    if (be.tag == BoundaryTag::Wall) {
      wall_vertex_set.insert(be.v0);
      wall_vertex_set.insert(be.v1);
    }
  }
  if (!inlet_edges.empty()) {
    // Chain the inlet edges into a polyline.
    std::map<int, std::vector<std::array<int, 2>>> by_start;
    std::set<int> starts, ends;
    for (auto& e : inlet_edges) {
      by_start[e[0]].push_back(e);
      starts.insert(e[0]);
      ends.insert(e[1]);
    }
    int head = -1;
    for (int s : starts)
      if (!ends.count(s)) head = s;
    if (head < 0) throw MeshError("inlet boundary is not an open polyline");
    std::vector<std::array<int, 2>> chained;
    int current = head;
    while (by_start.count(current)) {
      auto e = by_start[current].front();
      by_start.erase(current);
      chained.push_back(e);
      current = e[1];
    }
    if (chained.size() != inlet_edges.size())
      throw MeshError("inlet boundary edges are not connected");

    const auto verts = polyline_vertices(chained);
    space.inlet_corners = {verts.front(), verts.back()};
    for (std::size_t k = 0; k < verts.size(); ++k) {
      space.inlet_nodes.push_back(verts[k]);
      if (p2 && k + 1 < verts.size())
        space.inlet_nodes.push_back(space.edge_node(verts[k], verts[k + 1]));
    }
    // Re-establish wall-to-wall order independent of edge orientation:
    // sort by position along the polyline is already guaranteed by the walk.
    for (const auto& e : chained) {
      TraceElement el;
      el.nodes = {e[0], e[1], p2 ? space.edge_node(e[0], e[1]) : -1};
      el.n_nodes = p2 ? 3 : 2;
      const auto& a = mesh.vertices[e[0]];
      const auto& b = mesh.vertices[e[1]];
      el.length = std::hypot(b[0] - a[0], b[1] - a[1]);
      space.inlet_elements.push_back(el);
    }
  }

  std::set<int> wall_nodes(wall_vertex_set);
  if (p2)
    for (const auto& be : mesh.boundary_edges)
      if (be.tag == BoundaryTag::Wall)
        wall_nodes.insert(space.edge_node(be.v0, be.v1));
  space.wall_nodes.assign(wall_nodes.begin(), wall_nodes.end());

  const std::set<int> corner_set{space.inlet_corners[0],
                                 space.inlet_corners[1]};
  for (int n : space.inlet_nodes) {
    space.inlet_dofs.push_back(space.velocity_dof(n, 0));
    space.inlet_dofs.push_back(space.velocity_dof(n, 1));
    if (!corner_set.count(n)) {
      space.control_nodes.push_back(n);
      space.control_dofs.push_back(space.velocity_dof(n, 0));
      space.control_dofs.push_back(space.velocity_dof(n, 1));
    }
  }

  std::set<int> dirichlet_wall;
  for (int n : space.wall_nodes) {
    dirichlet_wall.insert(space.velocity_dof(n, 0));
    dirichlet_wall.insert(space.velocity_dof(n, 1));
  }
  space.dirichlet_dofs_wall_only.assign(dirichlet_wall.begin(),
                                        dirichlet_wall.end());
  std::set<int> dirichlet_all(dirichlet_wall);
  for (int d : space.inlet_dofs) dirichlet_all.insert(d);
  space.dirichlet_dofs_velocity_control.assign(dirichlet_all.begin(),
                                               dirichlet_all.end());

  // Observation sections: ordered nodes and 1D elements.
  for (const auto& [id, edges] : mesh.section_edges) {
    std::vector<int>& nodes = space.section_nodes[id];
    const auto verts = polyline_vertices(edges);
    for (std::size_t k = 0; k < verts.size(); ++k) {
      nodes.push_back(verts[k]);
      if (p2 && k + 1 < verts.size())
        nodes.push_back(space.edge_node(verts[k], verts[k + 1]));
    }
    auto& elements = space.section_elements[id];
    for (const auto& e : edges) {
      TraceElement el;
      el.nodes = {e[0], e[1], p2 ? space.edge_node(e[0], e[1]) : -1};
      el.n_nodes = p2 ? 3 : 2;
      const auto& a = mesh.vertices[e[0]];
      const auto& b = mesh.vertices[e[1]];
      el.length = std::hypot(b[0] - a[0], b[1] - a[1]);
      elements.push_back(el);
    }
  }
  return space;
}

}  // namespace flowda
