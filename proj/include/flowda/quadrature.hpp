#pragma once

#include <array>

namespace flowda {

// Degree-4 rule on the reference triangle (6 points, barycentric
// coordinates, weights summing to one; multiply by element area).
struct TriQuadrature {
  static constexpr int n_points = 6;
  static constexpr std::array<std::array<double, 3>, 6> points{{
      {0.10810301816807022736, 0.44594849091596488632, 0.44594849091596488632},
      {0.44594849091596488632, 0.10810301816807022736, 0.44594849091596488632},
      {0.44594849091596488632, 0.44594849091596488632, 0.10810301816807022736},
      {0.81684757298045851308, 0.09157621350977074346, 0.09157621350977074346},
      {0.09157621350977074346, 0.81684757298045851308, 0.09157621350977074346},
      {0.09157621350977074346, 0.09157621350977074346, 0.81684757298045851308},
  }};
  static constexpr std::array<double, 6> weights{
      0.22338158967801146570, 0.22338158967801146570, 0.22338158967801146570,
      0.10995174365532186764, 0.10995174365532186764, 0.10995174365532186764,
  };
};

// Three-point Gauss-Legendre on [0, 1], exact through degree 5; weights sum
// to one (multiply by segment length).
struct EdgeQuadrature {
  static constexpr int n_points = 3;
  static constexpr std::array<double, 3> points{
      0.11270166537925831148, 0.5, 0.88729833462074168852};
  static constexpr std::array<double, 3> weights{
      0.27777777777777777778, 0.44444444444444444444, 0.27777777777777777778};
};

}  // namespace flowda
