#pragma once

#include <array>
#include <optional>

#include "flowda/fe_space.hpp"
#include "flowda/sparse.hpp"

namespace flowda {

// Point location over a triangulation via uniform-grid binning with a
// barycentric-clamp fallback. Points within `snap_tol` (barycentric units) of
// an element are snapped onto it; on the curved channel this absorbs the
// sagitta between a coarse node on the wall arc and the finer polygonal
// boundary of the source mesh.
class MeshLocator {
public:
  explicit MeshLocator(const Mesh& mesh);

  struct Location {
    int triangle = -1;
    std::array<double, 3> bary{};
    bool snapped = false;
  };

  // Throws MeshError when the point is further than snap_tol from every
  // element.
  Location locate(const std::array<double, 2>& p,
                  double snap_tol = 5e-3) const;

private:
  const Mesh* mesh_;
  double x0_ = 0, y0_ = 0, cell_ = 1;
  int nx_ = 1, ny_ = 1;
  std::vector<std::vector<int>> bins_;

  int bin_of(double x, double y) const;
};

// Evaluates FE fields of a source space at arbitrary points. Points that
// coincide with a source node (within 1e-12 of the local mesh size) return
// the nodal value bit-for-bit.
class FieldInterpolator {
public:
  explicit FieldInterpolator(const FeSpace& space);

  std::array<double, 2> velocity(const Vec& U,
                                 const std::array<double, 2>& p) const;
  double pressure(const Vec& P, const std::array<double, 2>& p) const;

  const FeSpace& space() const { return *space_; }

private:
  const FeSpace* space_;
  MeshLocator locator_;
  // vertex snap grid: node index by rounded coordinates
  std::optional<int> snapped_node(const std::array<double, 2>& p) const;
  std::vector<std::vector<int>> node_bins_;
  double nx0_ = 0, ny0_ = 0, ncell_ = 1;
  int nnx_ = 1, nny_ = 1;
};

// Nodal transfer of a velocity field from `src` onto the velocity nodes of
// `dst` (2 dofs per node), and of a pressure field onto vertices.
Vec interpolate_velocity(const FieldInterpolator& src, const Vec& U_src,
                         const FeSpace& dst);
Vec interpolate_pressure(const FieldInterpolator& src, const Vec& P_src,
                         const FeSpace& dst);

}  // namespace flowda
