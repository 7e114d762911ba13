#pragma once

// Slow, dense, per-element quadrature oracle: an independent assembly path
// used to pin down every matrix the library produces. Works on the reference
// triangle with explicit Jacobian mapping (the library itself uses
// barycentric gradients), so agreement is a genuine cross-check.

#include <Eigen/Dense>

#include "flowda/fe_space.hpp"
#include "flowda/sparse.hpp"

namespace oracle {

Eigen::MatrixXd viscous(const flowda::FeSpace& space, double nu);
Eigen::MatrixXd divergence(const flowda::FeSpace& space);
Eigen::MatrixXd velocity_mass(const flowda::FeSpace& space);
Eigen::MatrixXd convection(const flowda::FeSpace& space, const flowda::Vec& U);
Eigen::MatrixXd convection_supg(const flowda::FeSpace& space,
                                const flowda::Vec& U, double nu);
Eigen::MatrixXd pressure_supg(const flowda::FeSpace& space,
                              const flowda::Vec& U, double nu);
Eigen::MatrixXd pressure_stab(const flowda::FeSpace& space,
                              const flowda::Vec& U, double nu);
Eigen::MatrixXd observation_mass(const flowda::FeSpace& space,
                                 const std::vector<int>& section_ids);
Eigen::MatrixXd inlet_regularizer(const flowda::FeSpace& space);
Eigen::MatrixXd inlet_mass(const flowda::FeSpace& space);

// Hand-rolled dense Gaussian elimination with partial pivoting.
flowda::Vec dense_gauss_solve(Eigen::MatrixXd a, flowda::Vec b);

// Max absolute entrywise difference between a dense matrix and a CSR one.
double max_diff(const Eigen::MatrixXd& dense, const flowda::CsrMatrix& sparse);

}  // namespace oracle
