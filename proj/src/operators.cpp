#include "mrdg/operators.hpp"

#include <cmath>
#include <iomanip>
#include <map>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <tuple>

namespace mrdg
{
FluxParams FluxParams::conservative() { return FluxParams{}; }

FluxParams FluxParams::dissipative()
{
  FluxParams f;
  f.beta1  = {1.0, -1.0};
  f.beta2  = {1.0, 1.0};
  f.family = "dissipative";
  return f;
}

FluxParams FluxParams::from_name(std::string const &name)
{
  if (name == "conservative" || name == "alternating")
    return conservative();
  if (name == "dissipative")
    return dissipative();
  throw std::invalid_argument("unknown flux family '" + name + "'");
}

Eigen::VectorXcd LinearOperator::apply(HierState const &state) const
{
  if (state.set()->fingerprint() != fingerprint)
    throw std::logic_error("operator applied to a state on a different element set");
  Eigen::VectorXcd y(state.coeffs().size());
  auto const n = state.set()->dof();
  for (int q = 0; q < state.unknowns(); ++q)
    y.segment(q * n, n) = matrix * state.unknown(q);
  return y;
}

namespace
{
struct Support
{
  double lo, hi;
};

Support support(ElementKey const &e) { return {support1d(e.level[0], e.cell[0])[0],
                                               support1d(e.level[0], e.cell[0])[1]}; }

// breakpoints of an element's functions, reduced modulo 1 into [0,1)
std::vector<double> breakpoints_of(ElementKey const &e)
{
  if (e.level[0] == 0)
    return {0.0};
  auto const s = support(e);
  std::vector<double> pts{s.lo, 0.5 * (s.lo + s.hi)};
  if (s.hi < 1.0)
    pts.push_back(s.hi);
  else if (s.lo > 0.0)
    pts.push_back(0.0);
  return pts;
}

bool touches(Support s, double p)
{
  if (p == 0.0)
    return s.lo == 0.0 || s.hi == 1.0;
  return s.lo <= p && p <= s.hi;
}

// one-sided value of a basis function with periodic wrap at 0 == 1
double trace(AlpertBasis const &b, int i, ElementKey const &e, double x, int deriv,
             Side side)
{
  if (side == Side::left && x == 0.0)
    return b.eval(i, e.level[0], e.cell[0], 1.0, deriv, Side::left);
  return b.eval(i, e.level[0], e.cell[0], x, deriv, side);
}

// pieces of the finer of two nested elements, or none if supports are disjoint
std::vector<Support> common_pieces(ElementKey const &a, ElementKey const &b)
{
  ElementKey const &fine   = a.level[0] >= b.level[0] ? a : b;
  ElementKey const &coarse = a.level[0] >= b.level[0] ? b : a;
  auto const sf = support(fine), sc = support(coarse);
  if (sf.lo < sc.lo || sf.hi > sc.hi)
    return {};
  if (fine.level[0] == 0)
    return {sf};
  double const mid = 0.5 * (sf.lo + sf.hi);
  return {{sf.lo, mid}, {mid, sf.hi}};
}
} // namespace

bool elements_interact_1d(ElementKey const &a, ElementKey const &b)
{
  if (a.level[0] == b.level[0])
  {
    if (a.cell[0] == b.cell[0])
      return true;
    auto const sa = support(a), sb = support(b);
    bool const adjacent = sa.hi == sb.lo || sb.hi == sa.lo ||
                          (sa.lo == 0.0 && sb.hi == 1.0) ||
                          (sb.lo == 0.0 && sa.hi == 1.0);
    return adjacent;
  }
  ElementKey const &fine   = a.level[0] > b.level[0] ? a : b;
  ElementKey const &coarse = a.level[0] > b.level[0] ? b : a;
  auto const sf            = support(fine);
  for (double p : breakpoints_of(coarse))
    if (touches(sf, p))
      return true;
  return false;
}

Eigen::MatrixXcd laplacian_block_1d(int k, ElementKey test, ElementKey trial,
                                    FluxParams const &flux, double h)
{
  int const kp = k + 1;
  Eigen::MatrixXcd B = Eigen::MatrixXcd::Zero(kp, kp);
  if (!elements_interact_1d(test, trial))
    return B;
  auto const &b = AlpertBasis::get(k);
  cplx const beta1 = flux.scaling == BetaScaling::by_h ? flux.beta1 / h : flux.beta1;
  cplx const beta2 = flux.scaling == BetaScaling::by_h ? flux.beta2 * h : flux.beta2;

  // volume term  sum_cells int v w''
  QuadRule const quad = gauss_rule(kp);
  for (auto const &piece : common_pieces(test, trial))
    for (std::size_t g = 0; g < quad.nodes.size(); ++g)
    {
      double const x = piece.lo + (piece.hi - piece.lo) * quad.nodes[g];
      double const w = quad.weights[g] * (piece.hi - piece.lo);
      for (int iw = 0; iw < kp; ++iw)
      {
        double const d2 = b.eval(iw, test.level[0], test.cell[0], x, 2, Side::right);
        if (d2 == 0.0)
          continue;
        for (int iv = 0; iv < kp; ++iv)
          B(iw, iv) += w * d2 * b.eval(iv, trial.level[0], trial.cell[0], x, 0, Side::right);
      }
    }

  // edge terms at the test function's breakpoints:  - u^ [w'] + u~' [w]
  for (double x : breakpoints_of(test))
  {
    for (int iv = 0; iv < kp; ++iv)
    {
      double const vm  = trace(b, iv, trial, x, 0, Side::left);
      double const vp  = trace(b, iv, trial, x, 0, Side::right);
      double const dvm = trace(b, iv, trial, x, 1, Side::left);
      double const dvp = trace(b, iv, trial, x, 1, Side::right);
      if (vm == 0.0 && vp == 0.0 && dvm == 0.0 && dvp == 0.0)
        continue;
      // flux jumps are right minus left; the edge terms use left minus right
      cplx const uhat = 0.5 * (vm + vp) + flux.alpha2 * (vp - vm) + beta2 * (dvp - dvm);
      cplx const utld = 0.5 * (dvm + dvp) + flux.alpha1 * (dvp - dvm) + beta1 * (vp - vm);
      for (int iw = 0; iw < kp; ++iw)
      {
        double const jw  = trace(b, iw, test, x, 0, Side::left) -
                           trace(b, iw, test, x, 0, Side::right);
        double const jdw = trace(b, iw, test, x, 1, Side::left) -
                           trace(b, iw, test, x, 1, Side::right);
        B(iw, iv) += -uhat * jdw + utld * jw;
      }
    }
  }
  return B;
}

Eigen::MatrixXcd convection_block_1d(int k, ElementKey test, ElementKey trial,
                                     double speed)
{
  int const kp = k + 1;
  Eigen::MatrixXcd B = Eigen::MatrixXcd::Zero(kp, kp);
  if (!elements_interact_1d(test, trial) || speed == 0.0)
    return B;
  auto const &b = AlpertBasis::get(k);
  QuadRule const quad = gauss_rule(kp);
  for (auto const &piece : common_pieces(test, trial))
    for (std::size_t g = 0; g < quad.nodes.size(); ++g)
    {
      double const x = piece.lo + (piece.hi - piece.lo) * quad.nodes[g];
      double const w = quad.weights[g] * (piece.hi - piece.lo);
      for (int iw = 0; iw < kp; ++iw)
      {
        double const d1 = b.eval(iw, test.level[0], test.cell[0], x, 1, Side::right);
        for (int iv = 0; iv < kp; ++iv)
          B(iw, iv) -= speed * w * d1 *
                       b.eval(iv, trial.level[0], trial.cell[0], x, 0, Side::right);
      }
    }
  Side const upwind = speed > 0.0 ? Side::left : Side::right;
  for (double x : breakpoints_of(test))
    for (int iv = 0; iv < kp; ++iv)
    {
      double const vhat = trace(b, iv, trial, x, 0, upwind);
      if (vhat == 0.0)
        continue;
      for (int iw = 0; iw < kp; ++iw)
      {
        double const jw = trace(b, iw, test, x, 0, Side::left) -
                          trace(b, iw, test, x, 0, Side::right);
        B(iw, iv) += speed * vhat * jw;
      }
    }
  return B;
}

namespace
{
// All nonzero 1D blocks over the complete hierarchy up to max_level:
// for each test element (index1d) the list of (trial index1d, block).
struct Operator1D
{
  std::vector<std::vector<std::pair<int, Eigen::MatrixXcd>>> rows;
};

template <class BlockFn>
std::shared_ptr<Operator1D const> build_1d(int max_level, BlockFn &&fn)
{
  auto op        = std::make_shared<Operator1D>();
  int const nel  = 1 << max_level;
  op->rows.resize(nel);
  for (int r = 0; r < nel; ++r)
  {
    auto const [lr, jr] = element1d(r);
    ElementKey const test{{lr, 0}, {jr, 0}};
    for (int c = 0; c < nel; ++c)
    {
      auto const [lc, jc] = element1d(c);
      ElementKey const trial{{lc, 0}, {jc, 0}};
      if (!elements_interact_1d(test, trial))
        continue;
      op->rows[r].emplace_back(c, fn(test, trial));
    }
  }
  return op;
}

using CacheKey = std::tuple<int, int, int, double, double, double, double, double, double,
                            double, double, int>;

std::shared_ptr<Operator1D const> laplacian_1d(int k, int max_level, FluxParams const &flux)
{
  static std::mutex mutex;
  static std::map<CacheKey, std::shared_ptr<Operator1D const>> cache;
  CacheKey const key{0,
                     k,
                     max_level,
                     flux.alpha1.real(),
                     flux.alpha1.imag(),
                     flux.alpha2.real(),
                     flux.alpha2.imag(),
                     flux.beta1.real(),
                     flux.beta1.imag(),
                     flux.beta2.real(),
                     flux.beta2.imag(),
                     static_cast<int>(flux.scaling)};
  std::lock_guard lock(mutex);
  auto &slot = cache[key];
  if (!slot)
  {
    double const h = std::ldexp(1.0, -max_level);
    slot = build_1d(max_level, [&](ElementKey const &t, ElementKey const &v) {
      return laplacian_block_1d(k, t, v, flux, h);
    });
  }
  return slot;
}

std::shared_ptr<Operator1D const> convection_1d(int k, int max_level, double speed)
{
  static std::mutex mutex;
  static std::map<CacheKey, std::shared_ptr<Operator1D const>> cache;
  CacheKey const key{1, k, max_level, speed, 0, 0, 0, 0, 0, 0, 0, 0};
  std::lock_guard lock(mutex);
  auto &slot = cache[key];
  if (!slot)
    slot = build_1d(max_level, [&](ElementKey const &t, ElementKey const &v) {
      return convection_block_1d(k, t, v, speed);
    });
  return slot;
}

// Tensor-sum assembly: sum over dims of (1D operator in dim m) x identity.
LinearOperator assemble_tensor_sum(SetPtr const &set,
                                   std::vector<std::shared_ptr<Operator1D const>> const &ops)
{
  int const kp = set->degree() + 1;
  int const bs = set->block_size();
  std::vector<Eigen::Triplet<cplx>> trip;
  for (int e = 0; e < set->size(); ++e)
  {
    auto const &key = set->key(e);
    for (int m = 0; m < set->dim(); ++m)
    {
      int const em = set->elem1d(e, m);
      for (auto const &[c, B] : ops[m]->rows[em])
      {
        auto const [lc, jc] = element1d(c);
        ElementKey nb       = key;
        nb.level[m]         = lc;
        nb.cell[m]          = jc;
        int const col       = set->find(nb);
        if (col < 0)
          continue;
        Eigen::Index const r0 = static_cast<Eigen::Index>(e) * bs;
        Eigen::Index const c0 = static_cast<Eigen::Index>(col) * bs;
        if (set->dim() == 1)
        {
          for (int i = 0; i < kp; ++i)
            for (int j = 0; j < kp; ++j)
              if (B(i, j) != 0.0)
                trip.emplace_back(r0 + i, c0 + j, B(i, j));
        }
        else
        {
          for (int i = 0; i < kp; ++i)
            for (int j = 0; j < kp; ++j)
            {
              if (B(i, j) == 0.0)
                continue;
              for (int o = 0; o < kp; ++o)
              {
                int const ri = m == 0 ? i * kp + o : o * kp + i;
                int const ci = m == 0 ? j * kp + o : o * kp + j;
                trip.emplace_back(r0 + ri, c0 + ci, B(i, j));
              }
            }
        }
      }
    }
  }
  LinearOperator op;
  op.matrix.resize(set->dof(), set->dof());
  op.matrix.setFromTriplets(trip.begin(), trip.end());
  op.fingerprint = set->fingerprint();
  return op;
}
} // namespace

LinearOperator assemble_laplacian(SetPtr const &set, FluxParams const &flux)
{
  if (!set->hierarchy_complete())
    throw std::invalid_argument("assemble_laplacian: incomplete hierarchy");
  auto const op = laplacian_1d(set->degree(), set->max_level(), flux);
  return assemble_tensor_sum(set, {op, op});
}

LinearOperator assemble_convection(SetPtr const &set, double speed)
{
  if (set->dim() != 1)
    throw std::invalid_argument("assemble_convection: only defined in 1D");
  if (!set->hierarchy_complete())
    throw std::invalid_argument("assemble_convection: incomplete hierarchy");
  return assemble_tensor_sum(set, {convection_1d(set->degree(), set->max_level(), speed)});
}

Eigen::VectorXcd coupled_rhs_linear(HierState const &state, CoupledLinear const &p,
                                    LinearOperator const &laplacian,
                                    LinearOperator const &conv_u,
                                    LinearOperator const &conv_v)
{
  if (state.unknowns() != 2)
    throw std::invalid_argument("coupled_rhs_linear: expects two unknowns");
  for (auto const *op : {&laplacian, &conv_u, &conv_v})
    if (op->fingerprint != state.set()->fingerprint())
      throw std::logic_error("coupled_rhs_linear: operator/set mismatch");
  cplx const I(0.0, 1.0);
  auto const u = state.unknown(0);
  auto const v = state.unknown(1);
  auto const n = state.set()->dof();
  Eigen::VectorXcd out(2 * n);
  out.segment(0, n) = -(conv_u.matrix * u) + I * (p.c_lap * (laplacian.matrix * u) +
                                                  p.beta * u + p.kappa * v);
  out.segment(n, n) = -(conv_v.matrix * v) + I * (p.c_lap * (laplacian.matrix * v) -
                                                  p.beta * u + p.kappa * v);
  return out;
}

void write_triplets(std::ostream &out, LinearOperator const &op)
{
  out << std::scientific << std::setprecision(17);
  for (int r = 0; r < op.matrix.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(op.matrix, r); it; ++it)
      out << it.row() << ' ' << it.col() << ' ' << it.value().real() << ' '
          << it.value().imag() << '\n';
}

} // namespace mrdg
