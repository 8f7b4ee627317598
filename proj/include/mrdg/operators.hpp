#pragma once

#include "mrdg/hierspace.hpp"

#include <Eigen/Sparse>

#include <string>

namespace mrdg
{
enum class BetaScaling
{
  none,
  by_h
};

/// Flux constants of the ultra-weak form:
///   u~' = {u'} + alpha1 [u'] + beta1 [u],   u^ = {u} + alpha2 [u] + beta2 [u']
/// where inside the fluxes [q] = q^+ - q^- (the "+" side has the larger
/// coordinate). The edge terms of the weak form use q^- - q^+.
struct FluxParams
{
  cplx alpha1{0.5, 0.0};
  cplx alpha2{-0.5, 0.0};
  cplx beta1{0.0, 0.0};
  cplx beta2{0.0, 0.0};
  BetaScaling scaling = BetaScaling::by_h;
  std::string family  = "conservative";

  static FluxParams conservative();
  static FluxParams dissipative();
  static FluxParams from_name(std::string const &name);
};

using SparseMatrix = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

/// Sparse operator on the DoF space of one unknown of an element set.
struct LinearOperator
{
  SparseMatrix matrix;
  std::uint64_t fingerprint = 0;

  Eigen::Index rows() const { return matrix.rows(); }

  // y = A x for every unknown of the state (block diagonal over unknowns)
  Eigen::VectorXcd apply(HierState const &state) const;
};

// Local (k+1)x(k+1) blocks of the 1D forms between a test element (row) and
// a trial element (column); zero outside the structural pattern.
Eigen::MatrixXcd laplacian_block_1d(int k, ElementKey test, ElementKey trial,
                                    FluxParams const &flux, double h);
Eigen::MatrixXcd convection_block_1d(int k, ElementKey test, ElementKey trial,
                                     double speed);

// True when the 1D forms can couple the two elements: the supports touch
// and, across levels, the finer support touches a breakpoint of the coarser.
bool elements_interact_1d(ElementKey const &a, ElementKey const &b);

// Ultra-weak Laplacian on a periodic domain; 2D is the tensor sum.
// Flux penalties use h = 2^{-max_level} when scaled.
LinearOperator assemble_laplacian(SetPtr const &set, FluxParams const &flux);

// Upwind DG form of speed * d/dx for u_t + speed u_x = 0 (1D only).
LinearOperator assemble_convection(SetPtr const &set, double speed);

/// Linear part of the coupled system
///   u_t = -a u_x + i (c L u + beta u + kappa v)
///   v_t = +a v_x + i (c L v - beta u + kappa v)
struct CoupledLinear
{
  double a       = 0.0; // transport speed alpha / M
  double c_lap   = 1.0;
  double beta    = 0.0;
  double kappa   = 0.0;
};

// Full linear right-hand side for a two-unknown state. `conv_u` must be the
// convection operator for speed +a and `conv_v` for speed -a.
Eigen::VectorXcd coupled_rhs_linear(HierState const &state, CoupledLinear const &p,
                                    LinearOperator const &laplacian,
                                    LinearOperator const &conv_u,
                                    LinearOperator const &conv_v);

// Operator dump: "row col re im" per nonzero.
void write_triplets(std::ostream &out, LinearOperator const &op);

} // namespace mrdg
