#pragma once

#include "mrdg/nonlinear.hpp"
#include "mrdg/operators.hpp"

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>

namespace mrdg
{
/// Additive (IMEX) Runge-Kutta pair: explicit (a_exp, b_exp) for the
/// nonstiff part, diagonally implicit (a_imp, b_imp) for the stiff part.
struct ImexTableau
{
  std::string name;
  int order = 0;
  Eigen::MatrixXd a_exp, a_imp;
  Eigen::VectorXd b_exp, b_imp;

  int stages() const { return static_cast<int>(b_imp.size()); }
  Eigen::VectorXd c_exp() const { return a_exp.rowwise().sum(); }
  Eigen::VectorXd c_imp() const { return a_imp.rowwise().sum(); }
  bool stiffly_accurate() const;

  // largest violation of the coupled order conditions up to `order`
  double order_defect(int order) const;

  static ImexTableau ssp3_433();   // default
  static ImexTableau ars_443();    // stiffly accurate
  static ImexTableau euler();      // forward/backward Euler pair
  static ImexTableau from_name(std::string const &name);
};

class SolverFailure : public std::runtime_error
{
public:
  SolverFailure(std::string const &what, double residual);
  double residual() const { return residual_; }

private:
  double residual_;
};

struct SolverOptions
{
  double tol = 1e-10;
  int max_iter = 2000;
  int restart = 60;
  // systems up to this many unknowns may use a sparse LU factorization
  long long direct_threshold = 40000;
  // the same bound when the operator is rebuilt every step (adaptive grids),
  // where the factorization is never reused
  long long adaptive_direct_threshold = 4096;
  // below the threshold GMRES is tried first with this many iterations; the
  // LU factorization is built only if that fails (0: always factorize)
  int krylov_budget = 100;
};

/// Solver for (I - s L) y = r, factorized or preconditioned once.
class ShiftedSolver
{
public:
  ShiftedSolver(SparseMatrix const &L, cplx shift, int block_size, SolverOptions opts);
  ~ShiftedSolver();
  ShiftedSolver(ShiftedSolver const &) = delete;
  ShiftedSolver &operator=(ShiftedSolver const &) = delete;

  Eigen::VectorXcd solve(Eigen::VectorXcd const &rhs) const;
  bool direct() const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// General sparse solve with the same strategy (direct below the threshold,
// block-Jacobi preconditioned GMRES above). Throws SolverFailure.
Eigen::VectorXcd solve_linear(SparseMatrix const &A, Eigen::VectorXcd const &rhs,
                              SolverOptions const &opts = {}, int block_size = 1);

/// Semi-discrete right-hand side y' = K y + E(y) with K = stiff_coef * L
/// applied to every unknown.
class SplitRhs
{
public:
  using ExplicitFn = std::function<Eigen::VectorXcd(HierState const &)>;

  SplitRhs(SetPtr set, int unknowns, LinearOperator laplacian, cplx stiff_coef,
           ExplicitFn nonstiff, SolverOptions opts = {});

  SetPtr const &set() const { return set_; }
  int unknowns() const { return unknowns_; }
  LinearOperator const &laplacian() const { return laplacian_; }
  cplx stiff_coef() const { return stiff_coef_; }

  Eigen::VectorXcd stiff(Eigen::VectorXcd const &y) const;
  Eigen::VectorXcd nonstiff(HierState const &y) const;

  // y with (I - theta K) y = rhs; theta > 0
  Eigen::VectorXcd solve_stiff(double theta, Eigen::VectorXcd const &rhs) const;

private:
  SetPtr set_;
  int unknowns_;
  LinearOperator laplacian_;
  cplx stiff_coef_;
  ExplicitFn nonstiff_;
  SolverOptions opts_;
  mutable std::mutex mutex_;
  mutable std::map<double, std::shared_ptr<ShiftedSolver const>> solvers_;
};

// i u_t + c_lap L u + f(|u|^2) u = 0  ->  u_t = i c_lap L u + i I_h(f u)
std::shared_ptr<SplitRhs> make_nls_rhs(SetPtr const &set, FluxParams const &flux,
                                       double c_lap, Nonlinearity const &nl,
                                       SolverOptions const &opts = {},
                                       double guard = default_blowup_guard);

// Coupled system: stiff part i c L per unknown; convection, linear couplings
// and the interpolated sources explicit.
std::shared_ptr<SplitRhs> make_coupled_rhs(SetPtr const &set, FluxParams const &flux,
                                           CoupledLinear const &p, Nonlinearity const &nl,
                                           SolverOptions const &opts = {},
                                           double guard = default_blowup_guard);

HierState imex_step(HierState const &state, double dt, SplitRhs const &rhs,
                    ImexTableau const &tableau);

// first-order pair: (I - dt K) y1 = y0 + dt E(y0)
HierState euler_pair_step(HierState const &state, double dt, SplitRhs const &rhs);

// cfl * dx^exponent with dx = 2^-N
double choose_dt(int N, double cfl, double exponent = 1.0);
// cfl * M * dx / alpha
double choose_dt_coupled(int N, double cfl, double M, double alpha);

} // namespace mrdg
