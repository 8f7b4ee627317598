#include "mrdg/timestep.hpp"

#include <Eigen/SparseLU>
#include <unsupported/Eigen/IterativeSolvers>

#include <cmath>
#include <limits>
#include <sstream>

namespace mrdg
{
bool ImexTableau::stiffly_accurate() const
{
  int const s = stages();
  for (int j = 0; j < s; ++j)
    if (std::abs(a_imp(s - 1, j) - b_imp[j]) > 1e-15)
      return false;
  return true;
}

double ImexTableau::order_defect(int p) const
{
  // partitioned Runge-Kutta conditions with every colouring of the trees
  std::array<Eigen::MatrixXd const *, 2> const A{&a_exp, &a_imp};
  std::array<Eigen::VectorXd const *, 2> const B{&b_exp, &b_imp};
  std::array<Eigen::VectorXd, 2> const C{c_exp(), c_imp()};
  double worst = 0.0;
  for (int x = 0; x < 2; ++x)
  {
    auto const &b = *B[x];
    if (p >= 1)
      worst = std::max(worst, std::abs(b.sum() - 1.0));
    for (int y = 0; y < 2; ++y)
    {
      if (p >= 2)
        worst = std::max(worst, std::abs(b.dot(C[y]) - 0.5));
      for (int z = 0; z < 2 && p >= 3; ++z)
      {
        worst = std::max(worst, std::abs(b.dot(C[y].cwiseProduct(C[z])) - 1.0 / 3.0));
        worst = std::max(worst, std::abs(b.dot(*A[y] * C[z]) - 1.0 / 6.0));
      }
    }
  }
  return worst;
}

ImexTableau ImexTableau::ssp3_433()
{
  double const al = 0.24169426078821, be = 0.06042356519705, et = 0.12915286960590;
  ImexTableau t;
  t.name  = "ssp3_433";
  t.order = 3;
  t.a_exp = Eigen::MatrixXd::Zero(4, 4);
  t.a_exp(2, 1) = 1.0;
  t.a_exp(3, 1) = 0.25;
  t.a_exp(3, 2) = 0.25;
  t.a_imp = Eigen::MatrixXd::Zero(4, 4);
  t.a_imp(0, 0) = al;
  t.a_imp(1, 0) = -al;
  t.a_imp(1, 1) = al;
  t.a_imp(2, 1) = 1.0 - al;
  t.a_imp(2, 2) = al;
  t.a_imp(3, 0) = be;
  t.a_imp(3, 1) = et;
  t.a_imp(3, 2) = 0.5 - be - et - al;
  t.a_imp(3, 3) = al;
  t.b_exp = Eigen::Vector4d(0.0, 1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0);
  t.b_imp = t.b_exp;
  return t;
}

ImexTableau ImexTableau::ars_443()
{
  ImexTableau t;
  t.name  = "ars_443";
  t.order = 3;
  t.a_exp = Eigen::MatrixXd::Zero(5, 5);
  t.a_exp(1, 0) = 0.5;
  t.a_exp(2, 0) = 11.0 / 18.0;
  t.a_exp(2, 1) = 1.0 / 18.0;
  t.a_exp(3, 0) = 5.0 / 6.0;
  t.a_exp(3, 1) = -5.0 / 6.0;
  t.a_exp(3, 2) = 0.5;
  t.a_exp(4, 0) = 0.25;
  t.a_exp(4, 1) = 1.75;
  t.a_exp(4, 2) = 0.75;
  t.a_exp(4, 3) = -1.75;
  t.a_imp = Eigen::MatrixXd::Zero(5, 5);
  t.a_imp(1, 1) = 0.5;
  t.a_imp(2, 1) = 1.0 / 6.0;
  t.a_imp(2, 2) = 0.5;
  t.a_imp(3, 1) = -0.5;
  t.a_imp(3, 2) = 0.5;
  t.a_imp(3, 3) = 0.5;
  t.a_imp(4, 1) = 1.5;
  t.a_imp(4, 2) = -1.5;
  t.a_imp(4, 3) = 0.5;
  t.a_imp(4, 4) = 0.5;
  t.b_exp = t.a_exp.row(4).transpose();
  t.b_imp = t.a_imp.row(4).transpose();
  return t;
}

ImexTableau ImexTableau::euler()
{
  ImexTableau t;
  t.name  = "euler";
  t.order = 1;
  t.a_exp = Eigen::MatrixXd::Zero(2, 2);
  t.a_exp(1, 0) = 1.0;
  t.a_imp = Eigen::MatrixXd::Zero(2, 2);
  t.a_imp(1, 1) = 1.0;
  t.b_exp = Eigen::Vector2d(1.0, 0.0);
  t.b_imp = Eigen::Vector2d(0.0, 1.0);
  return t;
}

ImexTableau ImexTableau::from_name(std::string const &name)
{
  ImexTableau t;
  if (name == "ssp3_433")
    t = ssp3_433();
  else if (name == "ars_443")
    t = ars_443();
  else if (name == "euler")
    t = euler();
  else
    throw std::invalid_argument("unknown IMEX tableau '" + name + "'");
  if (t.order_defect(t.order) > 1e-12)
    throw std::logic_error("IMEX tableau " + name + " fails its order conditions");
  return t;
}

SolverFailure::SolverFailure(std::string const &what, double residual)
    : std::runtime_error(what), residual_(residual)
{
}

namespace
{
using ColMatrix = Eigen::SparseMatrix<cplx, Eigen::ColMajor>;

// Inverse of the diagonal element blocks.
class BlockJacobi
{
public:
  using Scalar       = cplx;
  using StorageIndex = int;

  BlockJacobi() = default;
  template <class M>
  explicit BlockJacobi(M const &m)
  {
    compute(m);
  }

  void set_block_size(int b) { block_ = b; }

  template <class M>
  BlockJacobi &analyzePattern(M const &)
  {
    return *this;
  }

  template <class M>
  BlockJacobi &factorize(M const &m)
  {
    n_ = m.rows();
    Eigen::Index const nb = n_ / block_;
    inv_.assign(nb, Eigen::MatrixXcd::Zero(block_, block_));
    for (Eigen::Index r = 0; r < m.outerSize(); ++r)
      for (typename M::InnerIterator it(m, r); it; ++it)
        if (it.row() / block_ == it.col() / block_)
          inv_[it.row() / block_](it.row() % block_, it.col() % block_) = it.value();
    for (auto &b : inv_)
      b = b.partialPivLu().inverse();
    return *this;
  }

  template <class M>
  BlockJacobi &compute(M const &m)
  {
    return factorize(m);
  }

  template <class Rhs>
  Eigen::VectorXcd solve(Rhs const &b) const
  {
    Eigen::VectorXcd x(b.size());
    for (std::size_t e = 0; e < inv_.size(); ++e)
      x.segment(e * block_, block_) = inv_[e] * b.segment(e * block_, block_);
    return x;
  }

  Eigen::ComputationInfo info() const { return Eigen::Success; }
  Eigen::Index rows() const { return n_; }
  Eigen::Index cols() const { return n_; }

private:
  int block_    = 1;
  Eigen::Index n_ = 0;
  std::vector<Eigen::MatrixXcd> inv_;
};

double relative_residual(SparseMatrix const &A, Eigen::VectorXcd const &x,
                         Eigen::VectorXcd const &b)
{
  double const nb = b.norm();
  return nb == 0.0 ? (A * x).norm() : (b - A * x).norm() / nb;
}
} // namespace

struct ShiftedSolver::Impl
{
  SparseMatrix matrix;
  SolverOptions opts;
  std::unique_ptr<Eigen::SparseLU<ColMatrix, Eigen::COLAMDOrdering<int>>> lu;
  std::unique_ptr<Eigen::GMRES<SparseMatrix, BlockJacobi>> gmres;
  bool fallback = false; // switch to LU when GMRES misses the tolerance

  void factorize()
  {
    lu = std::make_unique<Eigen::SparseLU<ColMatrix, Eigen::COLAMDOrdering<int>>>();
    ColMatrix const cm = matrix;
    lu->compute(cm);
    if (lu->info() != Eigen::Success)
      throw SolverFailure("sparse LU factorization failed: " + lu->lastErrorMessage(),
                          std::numeric_limits<double>::infinity());
    gmres.reset();
  }
};

ShiftedSolver::ShiftedSolver(SparseMatrix const &L, cplx shift, int block_size,
                             SolverOptions opts)
    : impl_(std::make_unique<Impl>())
{
  SparseMatrix id(L.rows(), L.cols());
  id.setIdentity();
  impl_->matrix = id - shift * L;
  impl_->matrix.makeCompressed();
  impl_->opts = opts;
  bool const small = L.rows() <= opts.direct_threshold;
  if (small && opts.krylov_budget <= 0)
  {
    impl_->factorize();
    return;
  }
  impl_->fallback = small;
  impl_->gmres    = std::make_unique<Eigen::GMRES<SparseMatrix, BlockJacobi>>();
  impl_->gmres->preconditioner().set_block_size(block_size);
  impl_->gmres->set_restart(opts.restart);
  impl_->gmres->setMaxIterations(small ? opts.krylov_budget : opts.max_iter);
  impl_->gmres->setTolerance(0.1 * opts.tol);
  impl_->gmres->compute(impl_->matrix);
}

ShiftedSolver::~ShiftedSolver() = default;

bool ShiftedSolver::direct() const { return static_cast<bool>(impl_->lu); }

Eigen::VectorXcd ShiftedSolver::solve(Eigen::VectorXcd const &rhs) const
{
  Eigen::VectorXcd x;
  if (impl_->lu)
    x = impl_->lu->solve(rhs);
  else
  {
    // the GMRES stopping test uses the preconditioned residual; restart from
    // the current iterate until the true residual meets the tolerance
    x = impl_->gmres->solve(rhs);
    int const passes = impl_->fallback ? 1 : 4;
    for (int pass = 0;
         pass < passes && relative_residual(impl_->matrix, x, rhs) > impl_->opts.tol; ++pass)
      x = impl_->gmres->solveWithGuess(rhs, x);
    if (impl_->fallback && relative_residual(impl_->matrix, x, rhs) > impl_->opts.tol)
    {
      impl_->factorize();
      x = impl_->lu->solve(rhs);
    }
  }
  double const res = relative_residual(impl_->matrix, x, rhs);
  // direct solves are accepted with some slack for conditioning
  double const limit = impl_->lu ? std::max(impl_->opts.tol, 1e-8) : impl_->opts.tol;
  if (!(res <= limit))
  {
    std::ostringstream os;
    os << "linear solve did not converge: relative residual " << res;
    throw SolverFailure(os.str(), res);
  }
  return x;
}

Eigen::VectorXcd solve_linear(SparseMatrix const &A, Eigen::VectorXcd const &rhs,
                              SolverOptions const &opts, int block_size)
{
  if (A.rows() != A.cols() || A.rows() != rhs.size())
    throw std::invalid_argument("solve_linear: dimension mismatch");
  SparseMatrix id(A.rows(), A.cols());
  id.setIdentity();
  // reuse ShiftedSolver with I - s L = A, i.e. s = 1, L = I - A
  SparseMatrix const L = id - A;
  return ShiftedSolver(L, 1.0, block_size, opts).solve(rhs);
}

SplitRhs::SplitRhs(SetPtr set, int unknowns, LinearOperator laplacian, cplx stiff_coef,
                   ExplicitFn nonstiff, SolverOptions opts)
    : set_(std::move(set)), unknowns_(unknowns), laplacian_(std::move(laplacian)),
      stiff_coef_(stiff_coef), nonstiff_(std::move(nonstiff)), opts_(opts)
{
  if (laplacian_.fingerprint != set_->fingerprint())
    throw std::invalid_argument("SplitRhs: operator assembled on a different set");
}

Eigen::VectorXcd SplitRhs::stiff(Eigen::VectorXcd const &y) const
{
  auto const n = set_->dof();
  Eigen::VectorXcd out(y.size());
  for (int q = 0; q < unknowns_; ++q)
    out.segment(q * n, n) = stiff_coef_ * (laplacian_.matrix * y.segment(q * n, n));
  return out;
}

Eigen::VectorXcd SplitRhs::nonstiff(HierState const &y) const
{
  if (y.set()->fingerprint() != set_->fingerprint())
    throw std::logic_error("SplitRhs: state lives on a different set");
  if (!nonstiff_)
    return Eigen::VectorXcd::Zero(y.coeffs().size());
  return nonstiff_(y);
}

Eigen::VectorXcd SplitRhs::solve_stiff(double theta, Eigen::VectorXcd const &rhs) const
{
  std::shared_ptr<ShiftedSolver const> solver;
  {
    std::lock_guard lock(mutex_);
    auto &slot = solvers_[theta];
    if (!slot)
      slot = std::make_shared<ShiftedSolver>(laplacian_.matrix, theta * stiff_coef_,
                                             set_->block_size(), opts_);
    solver = slot;
  }
  auto const n = set_->dof();
  Eigen::VectorXcd out(rhs.size());
  for (int q = 0; q < unknowns_; ++q)
    out.segment(q * n, n) = solver->solve(rhs.segment(q * n, n));
  return out;
}

std::shared_ptr<SplitRhs> make_nls_rhs(SetPtr const &set, FluxParams const &flux,
                                       double c_lap, Nonlinearity const &nl,
                                       SolverOptions const &opts, double guard)
{
  cplx const I(0.0, 1.0);
  SplitRhs::ExplicitFn fn;
  if (nl.name != "none")
    fn = [nl, guard, I](HierState const &y) -> Eigen::VectorXcd {
      return I * source_interpolant(y, nl, guard).coeffs();
    };
  return std::make_shared<SplitRhs>(set, nl.unknowns, assemble_laplacian(set, flux),
                                    I * c_lap, std::move(fn), opts);
}

std::shared_ptr<SplitRhs> make_coupled_rhs(SetPtr const &set, FluxParams const &flux,
                                           CoupledLinear const &p, Nonlinearity const &nl,
                                           SolverOptions const &opts, double guard)
{
  if (nl.unknowns != 2)
    throw std::invalid_argument("make_coupled_rhs: needs a two-unknown nonlinearity");
  cplx const I(0.0, 1.0);
  auto conv_u = std::make_shared<LinearOperator>(assemble_convection(set, p.a));
  auto conv_v = std::make_shared<LinearOperator>(assemble_convection(set, -p.a));
  auto fn = [=](HierState const &y) -> Eigen::VectorXcd {
    auto const n = y.set()->dof();
    auto const u = y.unknown(0);
    auto const v = y.unknown(1);
    Eigen::VectorXcd out(2 * n);
    out.segment(0, n) = -(conv_u->matrix * u) + I * (p.beta * u + p.kappa * v);
    out.segment(n, n) = -(conv_v->matrix * v) + I * (-p.beta * u + p.kappa * v);
    if (nl.name != "none")
      out += I * source_interpolant(y, nl, guard).coeffs();
    return out;
  };
  return std::make_shared<SplitRhs>(set, 2, assemble_laplacian(set, flux), I * p.c_lap,
                                    std::move(fn), opts);
}

HierState imex_step(HierState const &state, double dt, SplitRhs const &rhs,
                    ImexTableau const &tab)
{
  if (!(dt > 0.0))
    throw std::invalid_argument("imex_step: dt must be positive");
  if (state.set()->fingerprint() != rhs.set()->fingerprint())
    throw std::logic_error("imex_step: operator/set mismatch");
  int const s = tab.stages();
  auto const &y0 = state.coeffs();
  std::vector<Eigen::VectorXcd> E(s), K(s);
  std::vector<bool> need_e(s, false);
  for (int j = 0; j < s; ++j)
  {
    need_e[j] = tab.b_exp[j] != 0.0;
    for (int i = j + 1; i < s; ++i)
      need_e[j] = need_e[j] || tab.a_exp(i, j) != 0.0;
  }
  for (int i = 0; i < s; ++i)
  {
    Eigen::VectorXcd r = y0;
    for (int j = 0; j < i; ++j)
    {
      if (tab.a_exp(i, j) != 0.0)
        r += dt * tab.a_exp(i, j) * E[j];
      if (tab.a_imp(i, j) != 0.0)
        r += dt * tab.a_imp(i, j) * K[j];
    }
    double const aii = tab.a_imp(i, i);
    HierState Y(state.set(), state.unknowns(),
                aii != 0.0 ? rhs.solve_stiff(dt * aii, r) : std::move(r));
    K[i] = rhs.stiff(Y.coeffs());
    if (need_e[i])
      E[i] = rhs.nonstiff(Y);
  }
  Eigen::VectorXcd y1 = y0;
  for (int j = 0; j < s; ++j)
  {
    if (tab.b_exp[j] != 0.0)
      y1 += dt * tab.b_exp[j] * E[j];
    if (tab.b_imp[j] != 0.0)
      y1 += dt * tab.b_imp[j] * K[j];
  }
  return HierState(state.set(), state.unknowns(), std::move(y1));
}

HierState euler_pair_step(HierState const &state, double dt, SplitRhs const &rhs)
{
  if (!(dt > 0.0))
    throw std::invalid_argument("euler_pair_step: dt must be positive");
  Eigen::VectorXcd r = state.coeffs() + dt * rhs.nonstiff(state);
  return HierState(state.set(), state.unknowns(), rhs.solve_stiff(dt, r));
}

double choose_dt(int N, double cfl, double exponent)
{
  return cfl * std::pow(std::ldexp(1.0, -N), exponent);
}

double choose_dt_coupled(int N, double cfl, double M, double alpha)
{
  return cfl * M * std::ldexp(1.0, -N) / alpha;
}

} // namespace mrdg
