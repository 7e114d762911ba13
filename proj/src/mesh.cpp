#include "flowda/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

namespace flowda {

namespace {
constexpr double kPi = 3.14159265358979323846;

double station_tolerance(double total_length) {
  return 1e-9 * std::max(1.0, total_length);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace

std::string to_string(BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::Inlet: return "inlet";
    case BoundaryTag::Outlet: return "outlet";
    case BoundaryTag::Wall: return "wall";
  }
  return "?";
}

BoundaryTag boundary_tag_from_string(const std::string& s) {
  if (s == "inlet") return BoundaryTag::Inlet;
  if (s == "outlet") return BoundaryTag::Outlet;
  if (s == "wall") return BoundaryTag::Wall;
  throw IoError("unknown boundary tag '" + s + "'");
}

double ChannelSpec::bend_arc_length() const {
  if (kind == Kind::Straight) return 0.0;
  return bend_radius * bend_angle_deg * kPi / 180.0;
}

double ChannelSpec::total_centerline_length() const {
  if (kind == Kind::Straight) return length;
  return upstream_length + bend_arc_length() + downstream_length;
}

void ChannelSpec::validate() const {
  if (half_height <= 0) throw ConfigError("channel: half_height must be > 0");
  if (kind == Kind::Straight) {
    if (length <= 0) throw ConfigError("channel: length must be > 0");
  } else {
    if (upstream_length <= 0 || downstream_length <= 0)
      throw ConfigError("channel: straight runs must have positive length");
    if (bend_angle_deg < 0 || bend_angle_deg > 180)
      throw ConfigError("channel: bend angle must lie in [0, 180] degrees");
    if (bend_angle_deg > 0 && bend_radius <= half_height)
      throw ConfigError(
          "channel: bend radius must exceed half_height (self-intersecting "
          "parametrization)");
  }
  if (truncation_x) {
    const double tx = *truncation_x;
    const double upstream_end =
        (kind == Kind::Straight) ? length : upstream_length;
    if (tx < 0 || tx > upstream_end)
      throw ConfigError("channel: truncation_x=" + fmt(tx) +
                        " must lie inside the upstream straight segment");
  }
}

CenterlineFrame centerline_frame(const ChannelSpec& spec, double s) {
  if (spec.kind == ChannelSpec::Kind::Straight)
    return {{s, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
  const double s0 = spec.bend_start();
  const double s1 = spec.bend_end();
  if (s <= s0) return {{s, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
  const double r = spec.bend_radius;
  if (s <= s1) {
    const double theta = (s - s0) / r;  // left turn
    const double ct = std::cos(theta), st = std::sin(theta);
    return {{s0 + r * st, r * (1.0 - ct)}, {ct, st}, {-st, ct}};
  }
  const double theta = spec.bend_angle_deg * kPi / 180.0;
  const double ct = std::cos(theta), st = std::sin(theta);
  const std::array<double, 2> bend_exit{s0 + r * st, r * (1.0 - ct)};
  const double ds = s - s1;
  return {{bend_exit[0] + ds * ct, bend_exit[1] + ds * st}, {ct, st}, {-st, ct}};
}

double Mesh::triangle_area(int t) const {
  const auto& tri = triangles[t];
  const auto& a = vertices[tri[0]];
  const auto& b = vertices[tri[1]];
  const auto& c = vertices[tri[2]];
  return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]));
}

double Mesh::total_area() const {
  double area = 0.0;
  for (int t = 0; t < n_triangles(); ++t) area += triangle_area(t);
  return area;
}

std::array<double, 2> Mesh::edge_midpoint(const BoundaryEdge& e) const {
  const auto& a = vertices[e.v0];
  const auto& b = vertices[e.v1];
  return {0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])};
}

std::array<double, 2> Mesh::outward_normal(const BoundaryEdge& e) const {
  const auto& a = vertices[e.v0];
  const auto& b = vertices[e.v1];
  const double dx = b[0] - a[0], dy = b[1] - a[1];
  const double len = std::hypot(dx, dy);
  return {dy / len, -dx / len};
}

int Mesh::find_column(double station) const {
  const double tol = station_tolerance(col_stations.empty() ? 1.0
                                                            : col_stations.back());
  for (std::size_t i = 0; i < col_stations.size(); ++i)
    if (std::abs(col_stations[i] - station) <= tol) return static_cast<int>(i);
  return -1;
}

void Mesh::validate() const {
  for (int t = 0; t < n_triangles(); ++t)
    if (triangle_area(t) <= 0)
      throw MeshError("triangle " + std::to_string(t) +
                      " has non-positive area " + fmt(triangle_area(t)));

  // Edge ownership: boundary edges in exactly one triangle, interior in two.
  std::map<std::pair<int, int>, int> edge_count;
  for (const auto& tri : triangles)
    for (int e = 0; e < 3; ++e) {
      int a = tri[e], b = tri[(e + 1) % 3];
      if (a > b) std::swap(a, b);
      edge_count[{a, b}]++;
    }
  for (const auto& [edge, count] : edge_count)
    if (count > 2)
      throw MeshError("edge shared by more than two triangles");

  std::set<std::pair<int, int>> tagged;
  for (const auto& be : boundary_edges) {
    int a = be.v0, b = be.v1;
    if (a > b) std::swap(a, b);
    const auto it = edge_count.find({a, b});
    if (it == edge_count.end() || it->second != 1)
      throw MeshError("boundary edge is not owned by exactly one triangle");
    if (!tagged.insert({a, b}).second)
      throw MeshError("boundary edge tagged more than once");
  }
  for (const auto& [edge, count] : edge_count)
    if (count == 1 && !tagged.count(edge))
      throw MeshError("untagged boundary edge");

  for (const auto& [id, edges] : section_edges) {
    if (edges.empty())
      throw MeshError("section " + std::to_string(id) + " has no edges");
    for (const auto& e : edges) {
      int a = e[0], b = e[1];
      if (a > b) std::swap(a, b);
      const auto it = edge_count.find({a, b});
      if (it == edge_count.end() || it->second != 2)
        throw MeshError("section edge is not an interior edge");
    }
    for (std::size_t k = 1; k < edges.size(); ++k)
      if (edges[k][0] != edges[k - 1][1])
        throw MeshError("section edges do not form a connected polyline");
  }
}

namespace {

// Shared structured-grid construction. Column stations are prescribed;
// vertices come from the centerline frame at each column.
Mesh build_structured(const ChannelSpec& spec,
                      const std::vector<double>& col_stations, int n_rows,
                      double h, const std::vector<double>& sections) {
  Mesh mesh;
  mesh.h_max = h;
  mesh.n_cols = static_cast<int>(col_stations.size()) - 1;
  mesh.n_rows = n_rows;
  mesh.col_stations = col_stations;

  const int nc = mesh.n_cols, nr = mesh.n_rows;
  const double half = spec.half_height;

  mesh.vertices.reserve(static_cast<std::size_t>(nc + 1) * (nr + 1));
  for (int i = 0; i <= nc; ++i) {
    const CenterlineFrame frame = centerline_frame(spec, col_stations[i]);
    for (int j = 0; j <= nr; ++j) {
      const double y = -half + (2.0 * half) * j / nr;
      mesh.vertices.push_back({frame.point[0] + y * frame.normal[0],
                               frame.point[1] + y * frame.normal[1]});
    }
  }

  // Two triangles per cell. Diagonals mirror about the midline so the mesh
  // maps onto itself under y -> -y when n_rows is even.
  auto v = [&](int i, int j) { return mesh.vertex_index(i, j); };
  mesh.triangles.reserve(static_cast<std::size_t>(2) * nc * nr);
  for (int i = 0; i < nc; ++i)
    for (int j = 0; j < nr; ++j) {
      const int v00 = v(i, j), v10 = v(i + 1, j);
      const int v01 = v(i, j + 1), v11 = v(i + 1, j + 1);
      if (2 * j < nr) {
        mesh.triangles.push_back({v00, v10, v11});
        mesh.triangles.push_back({v00, v11, v01});
      } else {
        mesh.triangles.push_back({v00, v10, v01});
        mesh.triangles.push_back({v10, v11, v01});
      }
    }

  // Boundary edges, oriented with the domain on the left.
  for (int i = 0; i < nc; ++i) {
    mesh.boundary_edges.push_back({v(i, 0), v(i + 1, 0), BoundaryTag::Wall});
    mesh.boundary_edges.push_back(
        {v(i + 1, nr), v(i, nr), BoundaryTag::Wall});
  }
  for (int j = 0; j < nr; ++j) {
    mesh.boundary_edges.push_back({v(0, j + 1), v(0, j), BoundaryTag::Inlet});
    mesh.boundary_edges.push_back(
        {v(nc, j), v(nc, j + 1), BoundaryTag::Outlet});
  }

  // Observation sections must land on node columns.
  const double total = col_stations.back();
  for (std::size_t k = 0; k < sections.size(); ++k) {
    const double s = sections[k];
    const int col = mesh.find_column(s);
    if (col < 0)
      throw MeshError("misaligned observation section at station " + fmt(s) +
                      ": no node column there (h=" + fmt(h) + ")");
    if (col == 0 || col == nc)
      throw MeshError("observation section at station " + fmt(s) +
                      " must lie strictly inside (0, " + fmt(total) + ")");
    std::vector<std::array<int, 2>> edges;
    edges.reserve(nr);
    for (int j = 0; j < nr; ++j) edges.push_back({v(col, j), v(col, j + 1)});
    mesh.section_edges[static_cast<int>(k)] = std::move(edges);
    mesh.section_stations[static_cast<int>(k)] = col_stations[col];
  }
  return mesh;
}

int exact_subdivisions(double length, double h, const std::string& what) {
  const double ratio = length / h;
  const int n = static_cast<int>(std::lround(ratio));
  if (n < 1 || std::abs(ratio - n) > 1e-9 * std::max(1.0, ratio))
    throw MeshError("h=" + fmt(h) + " does not divide " + what + "=" +
                    fmt(length));
  return n;
}

}  // namespace

Mesh build_straight_channel(const ChannelSpec& spec, double h,
                            const std::vector<double>& sections) {
  if (spec.kind != ChannelSpec::Kind::Straight)
    throw ConfigError("build_straight_channel requires a straight spec");
  spec.validate();
  if (h <= 0) throw MeshError("h must be > 0");
  for (double s : sections)
    if (s <= 0 || s >= spec.length)
      throw MeshError("misaligned observation section: station " + fmt(s) +
                      " outside (0, " + fmt(spec.length) + ")");

  const int nc = exact_subdivisions(spec.length, h, "length");
  const int nr = exact_subdivisions(2.0 * spec.half_height, h, "2*half_height");
  std::vector<double> stations(nc + 1);
  for (int i = 0; i <= nc; ++i) stations[i] = spec.length * i / nc;
  return build_structured(spec, stations, nr, h, sections);
}

Mesh build_curved_channel(const ChannelSpec& spec, double h,
                          const std::vector<double>& stations) {
  if (spec.kind != ChannelSpec::Kind::Curved)
    throw ConfigError("build_curved_channel requires a curved spec");
  spec.validate();
  if (h <= 0) throw MeshError("h must be > 0");
  const double total = spec.total_centerline_length();
  for (double s : stations)
    if (s <= 0 || s >= total)
      throw MeshError("misaligned observation section: station " + fmt(s) +
                      " outside (0, " + fmt(total) + ")");

  const int n_up = exact_subdivisions(spec.upstream_length, h, "upstream_length");
  const int n_down =
      exact_subdivisions(spec.downstream_length, h, "downstream_length");
  const int nr = exact_subdivisions(2.0 * spec.half_height, h, "2*half_height");

  // The bend arc is generally not an integer multiple of h; its column count
  // is snapped so columns stay <= h apart and segment junctions remain nodes.
  const double arc = spec.bend_arc_length();
  std::vector<double> col_stations;
  for (int i = 0; i <= n_up; ++i)
    col_stations.push_back(spec.upstream_length * i / n_up);
  if (arc > 0) {
    const int n_bend = std::max(1, static_cast<int>(std::ceil(arc / h - 1e-12)));
    for (int j = 1; j <= n_bend; ++j)
      col_stations.push_back(spec.upstream_length + arc * j / n_bend);
  }
  const double bend_end = spec.upstream_length + arc;
  for (int k = 1; k <= n_down; ++k)
    col_stations.push_back(bend_end + spec.downstream_length * k / n_down);

  return build_structured(spec, col_stations, nr, h, stations);
}

Mesh truncate(const Mesh& mesh, const ChannelSpec& spec) {
  if (!spec.truncation_x)
    throw ConfigError("truncate: spec has no truncation_x");
  const double tx = *spec.truncation_x;
  const int cut = mesh.find_column(tx);
  if (cut < 0)
    throw MeshError("truncation line at station " + fmt(tx) +
                    " does not coincide with a node column");
  if (cut == 0) return mesh;
  if (cut >= mesh.n_cols)
    throw MeshError("truncation at station " + fmt(tx) +
                    " leaves an empty domain");

  Mesh out;
  out.h_max = mesh.h_max;
  out.n_cols = mesh.n_cols - cut;
  out.n_rows = mesh.n_rows;
  out.col_stations.assign(mesh.col_stations.begin() + cut,
                          mesh.col_stations.end());

  const int nr = mesh.n_rows;
  const int first_vertex = cut * (nr + 1);
  out.vertices.assign(mesh.vertices.begin() + first_vertex,
                      mesh.vertices.end());

  auto remap = [&](int v) { return v - first_vertex; };
  for (const auto& tri : mesh.triangles) {
    if (tri[0] >= first_vertex && tri[1] >= first_vertex &&
        tri[2] >= first_vertex)
      out.triangles.push_back({remap(tri[0]), remap(tri[1]), remap(tri[2])});
  }
  for (const auto& be : mesh.boundary_edges) {
    if (be.v0 >= first_vertex && be.v1 >= first_vertex &&
        be.tag != BoundaryTag::Inlet)
      out.boundary_edges.push_back({remap(be.v0), remap(be.v1), be.tag});
  }
  // The cut column becomes the new inlet.
  for (int j = 0; j < nr; ++j)
    out.boundary_edges.push_back({out.vertex_index(0, j + 1),
                                  out.vertex_index(0, j), BoundaryTag::Inlet});

  const double tol = station_tolerance(mesh.col_stations.back());
  int next_id = 0;
  for (const auto& [id, station] : mesh.section_stations) {
    if (station <= tx + tol) continue;  // at or upstream of the cut
    const auto& edges = mesh.section_edges.at(id);
    std::vector<std::array<int, 2>> remapped;
    remapped.reserve(edges.size());
    for (const auto& e : edges) remapped.push_back({remap(e[0]), remap(e[1])});
    out.section_edges[next_id] = std::move(remapped);
    out.section_stations[next_id] = station;
    ++next_id;
  }
  return out;
}

void write_vtk(const Mesh& mesh, std::ostream& out) {
  out << "# vtk DataFile Version 3.0\n";
  out << "flowda mesh\n";
  out << "ASCII\n";
  out << "DATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.n_vertices() << " double\n";
  for (const auto& v : mesh.vertices)
    out << fmt(v[0]) << ' ' << fmt(v[1]) << " 0\n";
  out << "CELLS " << mesh.n_triangles() << ' ' << 4 * mesh.n_triangles()
      << '\n';
  for (const auto& t : mesh.triangles)
    out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  out << "CELL_TYPES " << mesh.n_triangles() << '\n';
  for (int t = 0; t < mesh.n_triangles(); ++t) out << "5\n";
}

void write_mesh_dump(const Mesh& mesh, std::ostream& out) {
  out << "flowda-mesh v1\n";
  out << "h_max " << fmt(mesh.h_max) << '\n';
  out << "vertices " << mesh.n_vertices() << '\n';
  for (const auto& v : mesh.vertices) out << fmt(v[0]) << ' ' << fmt(v[1]) << '\n';
  out << "triangles " << mesh.n_triangles() << '\n';
  for (const auto& t : mesh.triangles)
    out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  out << "boundary_edges " << mesh.boundary_edges.size() << '\n';
  for (const auto& e : mesh.boundary_edges)
    out << e.v0 << ' ' << e.v1 << ' ' << to_string(e.tag) << '\n';
  out << "sections " << mesh.section_edges.size() << '\n';
  for (const auto& [id, edges] : mesh.section_edges) {
    out << id << ' ' << fmt(mesh.section_stations.at(id)) << ' '
        << edges.size() << '\n';
    for (const auto& e : edges) out << e[0] << ' ' << e[1] << '\n';
  }
  out << "structured " << mesh.n_cols << ' ' << mesh.n_rows << '\n';
  for (double s : mesh.col_stations) out << fmt(s) << '\n';
}

Mesh read_mesh_dump(std::istream& in) {
  auto expect = [&](const std::string& keyword) {
    std::string word;
    if (!(in >> word) || word != keyword)
      throw IoError("mesh dump: expected '" + keyword + "', got '" + word +
                    "'");
  };
  expect("flowda-mesh");
  std::string version;
  in >> version;
  if (version != "v1") throw IoError("mesh dump: unsupported version " + version);

  Mesh mesh;
  expect("h_max");
  in >> mesh.h_max;
  expect("vertices");
  int n = 0;
  in >> n;
  mesh.vertices.resize(n);
  for (auto& v : mesh.vertices) in >> v[0] >> v[1];
  expect("triangles");
  in >> n;
  mesh.triangles.resize(n);
  for (auto& t : mesh.triangles) in >> t[0] >> t[1] >> t[2];
  expect("boundary_edges");
  in >> n;
  mesh.boundary_edges.resize(n);
  for (auto& e : mesh.boundary_edges) {
    std::string tag;
    in >> e.v0 >> e.v1 >> tag;
    e.tag = boundary_tag_from_string(tag);
  }
  expect("sections");
  in >> n;
  for (int k = 0; k < n; ++k) {
    int id = 0, count = 0;
    double station = 0.0;
    in >> id >> station >> count;
    std::vector<std::array<int, 2>> edges(count);
    for (auto& e : edges) in >> e[0] >> e[1];
    mesh.section_edges[id] = std::move(edges);
    mesh.section_stations[id] = station;
  }
  expect("structured");
  in >> mesh.n_cols >> mesh.n_rows;
  mesh.col_stations.resize(mesh.n_cols + 1);
  for (double& s : mesh.col_stations) in >> s;
  if (!in) throw IoError("mesh dump: truncated stream");
  return mesh;
}

}  // namespace flowda
