#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "cssav/fem.hpp"
#include "cssav/sparse.hpp"

namespace cssav {

/// Default quadrature degrees. They make every polynomial integrand exact,
/// in particular the trilinear convection form on P2 (degree 5).
int mass_quadrature_degree(int velocity_degree);
int stiffness_quadrature_degree(int velocity_degree);
int convection_quadrature_degree(int velocity_degree);
int coupling_quadrature_degree(int velocity_degree);
int rhs_quadrature_degree(int velocity_degree);

/// All-zero matrix coupling every DOF of `rows` with every DOF of `cols`
/// that shares a cell with it (all component pairs). Every matrix assembled
/// on the same space pair uses this pattern, so they can be combined with
/// SparseMatrix::add_scaled.
SparseMatrix cell_pattern(const FeSpace& rows, const FeSpace& cols);

/// M_ij = (phi_i, phi_j), block diagonal over components.
SparseMatrix assemble_mass(const FeSpace& space, int quad_degree = 0);
/// K_ij = (grad phi_i, grad phi_j), block diagonal over components.
SparseMatrix assemble_stiffness(const FeSpace& space, int quad_degree = 0);
/// G = (div u, div v) on a two-component space.
SparseMatrix assemble_graddiv(const FeSpace& space, int quad_degree = 0);

/// c(w; u, v) = (w . grad u + 0.5 (div w) u, v). Row index is the test DOF.
SparseMatrix assemble_convection(const FeSpace& space, std::span<const double> w, int quad_degree = 0);
/// Adds scale * C(w) into `target`, whose pattern must contain cell_pattern(space, space).
void add_convection(SparseMatrix& target, const FeSpace& space, std::span<const double> w, double scale = 1.0,
                    int quad_degree = 0);

/// B_{i,k} = (q_k, div v_i): rows are velocity DOFs, columns pressure DOFs.
SparseMatrix assemble_pressure_coupling(const FeSpace& velocity, const FeSpace& pressure, int quad_degree = 0);

/// Load vector (f(., t), v) on a two-component space.
std::vector<double> assemble_load(const FeSpace& space, const VectorFunction& f, double t, int quad_degree = 0);

/// Boundary load (t(., time), v) over facets carrying `tag`.
std::vector<double> assemble_traction(const FeSpace& space, const VectorFunction& traction, double time,
                                      BoundaryTag tag = BoundaryTag::NeumannOutflow);

/// Rate of change of n . g at a point of a boundary facet.
using FacetRate = std::function<double(std::size_t facet, const Vec2& x)>;

struct PpeRhsInput {
    const VectorFunction* forcing = nullptr;  // null means f = 0
    const FacetRate* normal_rate = nullptr;   // null means n . g is static
    double nu = 1.0;
    double time = 0.0;
    int quad_degree = 0;
};

/// Right-hand side of the weak pressure Poisson equation for velocity `u`:
///   (f - u . grad u - 0.5 (div u) u, grad q)
///   + int_Gamma nu omega (n_x d_y q - n_y d_x q) ds
///   - int_{Gamma_D} d_t(n . g) q ds,
/// with omega = d_x u_y - d_y u_x taken from the cell adjacent to each facet.
/// The curl term is integrated over the whole boundary; test functions that
/// vanish on the outflow make its outflow part zero anyway.
std::vector<double> assemble_ppe_rhs(const FeSpace& pressure, const FeSpace& velocity, std::span<const double> u,
                                     const PpeRhsInput& input);

/// Constrained DOFs with prescribed values.
struct DirichletData {
    std::vector<int> dofs;
    std::vector<double> values;
};

/// b_i -= sum_j A_ij g_j over constrained j for every free row i, and
/// b_j = g_j for constrained j. `a` is the unconstrained matrix.
void lift_dirichlet_rhs(const SparseMatrix& a, std::span<double> b, std::span<const int> dofs,
                        std::span<const double> values);
/// Zeroes constrained rows and columns and puts 1 on their diagonal.
void constrain_matrix(SparseMatrix& a, std::span<const int> dofs);
/// Symmetric elimination: lift_dirichlet_rhs followed by constrain_matrix.
void apply_dirichlet(SparseMatrix& a, std::span<double> b, std::span<const int> dofs, std::span<const double> values);

/// Pressure values on outflow nodes: for each pressure node on a facet
/// tagged NeumannOutflow, (1/psi) times the average over its adjacent outflow
/// facets of nu grad u : (n x n) - t . n. Throws std::domain_error when
/// |psi| < 1e-6.
DirichletData project_neumann_pressure(const FeSpace& pressure, const FeSpace& velocity, std::span<const double> u,
                                       const VectorFunction* traction, double time, double psi, double nu);

}  // namespace cssav
