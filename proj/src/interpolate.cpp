#include "flowda/interpolate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace flowda {

namespace {

std::array<double, 3> barycentric(const Mesh& mesh, int t,
                                  const std::array<double, 2>& p) {
  const auto& tri = mesh.triangles[t];
  const auto& a = mesh.vertices[tri[0]];
  const auto& b = mesh.vertices[tri[1]];
  const auto& c = mesh.vertices[tri[2]];
  const double det =
      (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
  const double l1 =
      ((p[0] - a[0]) * (c[1] - a[1]) - (p[1] - a[1]) * (c[0] - a[0])) / det;
  const double l2 =
      ((b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])) / det;
  return {1.0 - l1 - l2, l1, l2};
}

double min_bary(const std::array<double, 3>& b) {
  return std::min({b[0], b[1], b[2]});
}

}  // namespace

MeshLocator::MeshLocator(const Mesh& mesh) : mesh_(&mesh) {
  double x1 = -std::numeric_limits<double>::max(), y1 = x1;
  x0_ = std::numeric_limits<double>::max();
  y0_ = x0_;
  for (const auto& v : mesh.vertices) {
    x0_ = std::min(x0_, v[0]);
    y0_ = std::min(y0_, v[1]);
    x1 = std::max(x1, v[0]);
    y1 = std::max(y1, v[1]);
  }
  cell_ = std::max(2.0 * mesh.h_max, 1e-12);
  nx_ = std::max(1, static_cast<int>((x1 - x0_) / cell_) + 1);
  ny_ = std::max(1, static_cast<int>((y1 - y0_) / cell_) + 1);
  bins_.resize(static_cast<std::size_t>(nx_) * ny_);
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    double bx0 = x1, bx1 = x0_, by0 = y1, by1 = y0_;
    for (int v : tri) {
      bx0 = std::min(bx0, mesh.vertices[v][0]);
      bx1 = std::max(bx1, mesh.vertices[v][0]);
      by0 = std::min(by0, mesh.vertices[v][1]);
      by1 = std::max(by1, mesh.vertices[v][1]);
    }
    const int i0 = std::clamp(static_cast<int>((bx0 - x0_) / cell_), 0, nx_ - 1);
    const int i1 = std::clamp(static_cast<int>((bx1 - x0_) / cell_), 0, nx_ - 1);
    const int j0 = std::clamp(static_cast<int>((by0 - y0_) / cell_), 0, ny_ - 1);
    const int j1 = std::clamp(static_cast<int>((by1 - y0_) / cell_), 0, ny_ - 1);
    for (int i = i0; i <= i1; ++i)
      for (int j = j0; j <= j1; ++j)
        bins_[static_cast<std::size_t>(i) * ny_ + j].push_back(t);
  }
}

int MeshLocator::bin_of(double x, double y) const {
  const int i = std::clamp(static_cast<int>((x - x0_) / cell_), 0, nx_ - 1);
  const int j = std::clamp(static_cast<int>((y - y0_) / cell_), 0, ny_ - 1);
  return i * ny_ + j;
}

MeshLocator::Location MeshLocator::locate(const std::array<double, 2>& p,
                                          double snap_tol) const {
  int best_tri = -1;
  std::array<double, 3> best_bary{};
  double best_min = -std::numeric_limits<double>::max();

  auto consider = [&](int t) {
    const auto bary = barycentric(*mesh_, t, p);
    const double mb = min_bary(bary);
    if (mb > best_min) {
      best_min = mb;
      best_bary = bary;
      best_tri = t;
    }
  };

  // The point's own bin first, then a fallback scan over everything.
  for (int t : bins_[bin_of(p[0], p[1])]) {
    consider(t);
    if (best_min >= -1e-13) break;
  }
  if (best_min < -1e-13)
    for (int t = 0; t < mesh_->n_triangles(); ++t) {
      consider(t);
      if (best_min >= -1e-13) break;
    }

  if (best_tri < 0 || best_min < -snap_tol)
    throw MeshError("point (" + std::to_string(p[0]) + ", " +
                    std::to_string(p[1]) + ") lies outside the source mesh");

  Location loc;
  loc.triangle = best_tri;
  loc.bary = best_bary;
  loc.snapped = best_min < 0.0;
  if (loc.snapped) {
    double sum = 0.0;
    for (double& b : loc.bary) {
      b = std::max(b, 0.0);
      sum += b;
    }
    for (double& b : loc.bary) b /= sum;
  }
  return loc;
}

FieldInterpolator::FieldInterpolator(const FeSpace& space)
    : space_(&space), locator_(*space.mesh) {
  // Bin velocity nodes for exact-node snapping.
  double x1 = -std::numeric_limits<double>::max(), y1 = x1;
  nx0_ = std::numeric_limits<double>::max();
  ny0_ = nx0_;
  for (const auto& v : space.node_coords) {
    nx0_ = std::min(nx0_, v[0]);
    ny0_ = std::min(ny0_, v[1]);
    x1 = std::max(x1, v[0]);
    y1 = std::max(y1, v[1]);
  }
  ncell_ = std::max(space.mesh->h_max, 1e-12);
  nnx_ = std::max(1, static_cast<int>((x1 - nx0_) / ncell_) + 1);
  nny_ = std::max(1, static_cast<int>((y1 - ny0_) / ncell_) + 1);
  node_bins_.resize(static_cast<std::size_t>(nnx_) * nny_);
  for (std::size_t n = 0; n < space.node_coords.size(); ++n) {
    const auto& v = space.node_coords[n];
    const int i = std::clamp(static_cast<int>((v[0] - nx0_) / ncell_), 0,
                             nnx_ - 1);
    const int j = std::clamp(static_cast<int>((v[1] - ny0_) / ncell_), 0,
                             nny_ - 1);
    node_bins_[static_cast<std::size_t>(i) * nny_ + j].push_back(
        static_cast<int>(n));
  }
}

std::optional<int> FieldInterpolator::snapped_node(
    const std::array<double, 2>& p) const {
  const double tol = 1e-12 * std::max(1.0, space_->mesh->h_max);
  const int ic = std::clamp(static_cast<int>((p[0] - nx0_) / ncell_), 0,
                            nnx_ - 1);
  const int jc = std::clamp(static_cast<int>((p[1] - ny0_) / ncell_), 0,
                            nny_ - 1);
  for (int i = std::max(0, ic - 1); i <= std::min(nnx_ - 1, ic + 1); ++i)
    for (int j = std::max(0, jc - 1); j <= std::min(nny_ - 1, jc + 1); ++j)
      for (int n : node_bins_[static_cast<std::size_t>(i) * nny_ + j]) {
        const auto& v = space_->node_coords[n];
        if (std::abs(v[0] - p[0]) <= tol && std::abs(v[1] - p[1]) <= tol)
          return n;
      }
  return std::nullopt;
}

std::array<double, 2> FieldInterpolator::velocity(
    const Vec& U, const std::array<double, 2>& p) const {
  if (const auto node = snapped_node(p))
    return {U[space_->velocity_dof(*node, 0)],
            U[space_->velocity_dof(*node, 1)]};

  const auto loc = locator_.locate(p);
  const auto& nodes = space_->tri_nodes[loc.triangle];
  const bool p2 = space_->is_p2();
  std::array<double, 2> out{0.0, 0.0};
  const auto& bary = loc.bary;
  if (!p2) {
    for (int m = 0; m < 3; ++m)
      for (int c = 0; c < 2; ++c)
        out[c] += bary[m] * U[space_->velocity_dof(nodes[m], c)];
    return out;
  }
  std::array<double, 6> shape{};
  for (int i = 0; i < 3; ++i) shape[i] = bary[i] * (2.0 * bary[i] - 1.0);
  for (int e = 0; e < 3; ++e)
    shape[3 + e] = 4.0 * bary[e] * bary[(e + 1) % 3];
  for (int m = 0; m < 6; ++m)
    for (int c = 0; c < 2; ++c)
      out[c] += shape[m] * U[space_->velocity_dof(nodes[m], c)];
  return out;
}

double FieldInterpolator::pressure(const Vec& P,
                                   const std::array<double, 2>& p) const {
  if (const auto node = snapped_node(p))
    if (*node < space_->n_pressure_dofs) return P[*node];
  const auto loc = locator_.locate(p);
  const auto& tri = space_->mesh->triangles[loc.triangle];
  double out = 0.0;
  for (int m = 0; m < 3; ++m) out += loc.bary[m] * P[tri[m]];
  return out;
}

Vec interpolate_velocity(const FieldInterpolator& src, const Vec& U_src,
                         const FeSpace& dst) {
  Vec out = Vec::Zero(dst.n_velocity_dofs);
  for (int n = 0; n < dst.n_velocity_nodes; ++n) {
    const auto value = src.velocity(U_src, dst.node_coords[n]);
    out[dst.velocity_dof(n, 0)] = value[0];
    out[dst.velocity_dof(n, 1)] = value[1];
  }
  return out;
}

Vec interpolate_pressure(const FieldInterpolator& src, const Vec& P_src,
                         const FeSpace& dst) {
  Vec out = Vec::Zero(dst.n_pressure_dofs);
  for (int n = 0; n < dst.n_pressure_dofs; ++n)
    out[n] = src.pressure(P_src, dst.mesh->vertices[n]);
  return out;
}

}  // namespace flowda
