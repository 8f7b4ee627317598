#include "mrdg/hierspace.hpp"

#include <algorithm>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace mrdg
{
int level_sum(ElementKey const &key) { return key.level[0] + key.level[1]; }
int level_max(ElementKey const &key) { return std::max(key.level[0], key.level[1]); }

bool key_less(ElementKey const &a, ElementKey const &b)
{
  int const sa = level_sum(a), sb = level_sum(b);
  if (sa != sb)
    return sa < sb;
  if (a.level != b.level)
    return a.level < b.level;
  return a.cell < b.cell;
}

bool valid_key(ElementKey const &key, int dim)
{
  for (int m = 0; m < max_dim; ++m)
  {
    if (m >= dim)
    {
      if (key.level[m] != 0 || key.cell[m] != 0)
        return false;
      continue;
    }
    if (key.level[m] < 0 || key.cell[m] < 0 ||
        key.cell[m] >= cells_at_level(key.level[m]))
      return false;
  }
  return true;
}

std::vector<ElementKey> parents(ElementKey const &key, int dim)
{
  std::vector<ElementKey> out;
  for (int m = 0; m < dim; ++m)
  {
    if (key.level[m] == 0)
      continue;
    ElementKey p = key;
    p.level[m] -= 1;
    p.cell[m] = p.level[m] == 0 ? 0 : key.cell[m] / 2;
    out.push_back(p);
  }
  return out;
}

std::vector<ElementKey> children(ElementKey const &key, int dim, int max_level)
{
  std::vector<ElementKey> out;
  for (int m = 0; m < dim; ++m)
  {
    if (key.level[m] >= max_level)
      continue;
    ElementKey c = key;
    c.level[m] += 1;
    if (key.level[m] == 0)
    {
      c.cell[m] = 0;
      out.push_back(c);
    }
    else
    {
      c.cell[m] = 2 * key.cell[m];
      out.push_back(c);
      c.cell[m] += 1;
      out.push_back(c);
    }
  }
  return out;
}

GridMode grid_mode_from_string(std::string const &name)
{
  if (name == "full")
    return GridMode::full;
  if (name == "sparse")
    return GridMode::sparse;
  if (name == "adaptive")
    return GridMode::adaptive;
  throw std::invalid_argument("unknown grid mode '" + name + "'");
}

std::string to_string(GridMode mode)
{
  switch (mode)
  {
  case GridMode::full:
    return "full";
  case GridMode::sparse:
    return "sparse";
  default:
    return "adaptive";
  }
}

ElementSet::ElementSet(int dim, int k, int max_level, GridMode mode,
                       std::vector<ElementKey> keys)
    : dim_(dim), k_(k), max_level_(max_level), mode_(mode), keys_(std::move(keys))
{
  if (dim < 1 || dim > max_dim)
    throw std::invalid_argument("ElementSet: unsupported dimension " +
                                std::to_string(dim));
  if (k < 1 || k > max_degree)
    throw std::invalid_argument("ElementSet: degree must be in [1, 3]");
  block_ = dim == 1 ? k + 1 : (k + 1) * (k + 1);
  std::sort(keys_.begin(), keys_.end(), key_less);
  keys_.erase(std::unique(keys_.begin(), keys_.end()), keys_.end());
  index_.reserve(keys_.size() * 2);
  std::uint64_t h = 1469598103934665603ull ^ static_cast<std::uint64_t>((max_level * 4 + dim) * 8 + k);
  for (int e = 0; e < size(); ++e)
  {
    auto const &key = keys_[e];
    if (!valid_key(key, dim) || level_max(key) > max_level)
      throw std::invalid_argument("ElementSet: invalid element key");
    index_.emplace(key, e);
    top_level_ = std::max(top_level_, level_max(key));
    h = (h ^ ElementKeyHash{}(key)) * 1099511628211ull;
  }
  fingerprint_ = h;
  tables_      = BasisTables::get(k, max_level);
}

int ElementSet::find(ElementKey const &key) const
{
  auto it = index_.find(key);
  return it == index_.end() ? -1 : it->second;
}

bool ElementSet::hierarchy_complete() const
{
  if (keys_.empty() || !contains(ElementKey{}))
    return false;
  for (auto const &key : keys_)
    for (auto const &p : parents(key, dim_))
      if (!contains(p))
        return false;
  return true;
}

EvalPlan const &ElementSet::eval_plan() const
{
  std::call_once(plan_once_, [this] {
    std::set<std::array<int, 2>> levels;
    for (auto const &key : keys_)
      levels.insert(key.level);
    int const kp      = k_ + 1;
    int const npts    = dim_ == 1 ? kp : kp * kp;
    auto const &tab   = *tables_;
    plan_.offsets.assign(static_cast<std::size_t>(size()) * npts + 1, 0);
    plan_.sources.clear();
    for (int e = 0; e < size(); ++e)
    {
      int const e0 = elem1d(e, 0), e1 = elem1d(e, 1);
      for (int p = 0; p < npts; ++p)
      {
        int const p0 = dim_ == 1 ? p : p / kp;
        int const p1 = dim_ == 1 ? 0 : p % kp;
        for (auto const &lv : levels)
        {
          ElementKey src;
          src.level   = lv;
          src.cell[0] = tab.chain_cell(e0, p0, lv[0]);
          src.cell[1] = dim_ == 1 ? 0 : tab.chain_cell(e1, p1, lv[1]);
          int const s = find(src);
          if (s >= 0)
            plan_.sources.push_back(s);
        }
        plan_.offsets[static_cast<std::size_t>(e) * npts + p + 1] =
            static_cast<int>(plan_.sources.size());
      }
    }
  });
  return plan_;
}

SetPtr build_set(GridMode mode, int max_level, int k, int dim)
{
  if (dim < 1 || dim > max_dim)
    throw std::invalid_argument("build_set: unsupported dimension");
  if (max_level < 0)
    throw std::invalid_argument("build_set: negative level");
  std::vector<ElementKey> keys;
  int const l1max = dim == 2 ? max_level : 0;
  for (int l0 = 0; l0 <= max_level; ++l0)
    for (int l1 = 0; l1 <= l1max; ++l1)
    {
      if (mode == GridMode::sparse && l0 + l1 > max_level)
        continue;
      for (int j0 = 0; j0 < cells_at_level(l0); ++j0)
        for (int j1 = 0; j1 < cells_at_level(l1); ++j1)
          keys.push_back(ElementKey{{l0, l1}, {j0, j1}});
    }
  return std::make_shared<ElementSet const>(dim, k, max_level, mode, std::move(keys));
}

SetPtr make_set(int dim, int k, int max_level, GridMode mode,
                std::vector<ElementKey> keys)
{
  std::unordered_map<ElementKey, char, ElementKeyHash> seen;
  std::vector<ElementKey> stack = keys;
  std::vector<ElementKey> all;
  stack.push_back(ElementKey{});
  while (!stack.empty())
  {
    auto key = stack.back();
    stack.pop_back();
    if (!seen.emplace(key, 1).second)
      continue;
    all.push_back(key);
    for (auto const &p : parents(key, dim))
      stack.push_back(p);
  }
  return std::make_shared<ElementSet const>(dim, k, max_level, mode, std::move(all));
}

HierState::HierState(SetPtr set, int unknowns)
    : set_(std::move(set)), unknowns_(unknowns),
      coeffs_(Eigen::VectorXcd::Zero(set_->dof() * unknowns))
{}

HierState::HierState(SetPtr set, int unknowns, Eigen::VectorXcd coeffs)
    : set_(std::move(set)), unknowns_(unknowns), coeffs_(std::move(coeffs))
{
  if (coeffs_.size() != set_->dof() * unknowns)
    throw std::invalid_argument("HierState: coefficient vector size mismatch");
}

HierState HierState::transfer(SetPtr const &target) const
{
  if (target->dim() != set_->dim() || target->degree() != set_->degree())
    throw std::invalid_argument("HierState::transfer: incompatible sets");
  HierState out(target, unknowns_);
  for (int e = 0; e < target->size(); ++e)
  {
    int const src = set_->find(target->key(e));
    if (src < 0)
      continue;
    for (int q = 0; q < unknowns_; ++q)
      out.block(q, e) = block(q, src);
  }
  return out;
}

cplx LegendreGrid::eval(std::array<int, 2> cell, Point const &x) const
{
  int const kp = k + 1;
  std::array<double, max_degree + 1> v0{}, v1{};
  for (int m = 0; m < kp; ++m)
  {
    v0[m] = cell_legendre(m, level, cell[0], x[0]);
    v1[m] = dim == 2 ? cell_legendre(m, level, cell[1], x[1]) : 1.0;
  }
  long long const c =
      dim == 1 ? cell[0] : 1ll * cell[0] * cells_per_dim() + cell[1];
  cplx const *a = data.data() + c * block();
  cplx s        = 0.0;
  if (dim == 1)
    for (int m = 0; m < kp; ++m)
      s += a[m] * v0[m];
  else
    for (int m0 = 0; m0 < kp; ++m0)
      for (int m1 = 0; m1 < kp; ++m1)
        s += a[m0 * kp + m1] * v0[m0] * v1[m1];
  return s;
}

LegendreGrid project_grid(Field const &f, int dim, int k, int level, int quad_nodes)
{
  LegendreGrid grid{dim, k, level, {}};
  int const kp  = k + 1;
  int const n   = grid.cells_per_dim();
  double const h = 1.0 / n;
  QuadRule const quad = gauss_rule(quad_nodes > 0 ? quad_nodes : k + 2);
  int const ng        = static_cast<int>(quad.nodes.size());
  // local normalized Legendre values at the Gauss nodes (cell independent)
  std::vector<double> chi(static_cast<std::size_t>(kp) * ng);
  for (int m = 0; m < kp; ++m)
    for (int g = 0; g < ng; ++g)
      chi[m * ng + g] = std::sqrt(static_cast<double>(n) * (2.0 * m + 1.0)) *
                        legendre(m, 2.0 * quad.nodes[g] - 1.0);
  grid.data.assign(grid.num_cells() * grid.block(), 0.0);
  if (dim == 1)
  {
    for (int c = 0; c < n; ++c)
      for (int g = 0; g < ng; ++g)
      {
        cplx const v = f(Point{(c + quad.nodes[g]) * h, 0.0}) * (quad.weights[g] * h);
        for (int m = 0; m < kp; ++m)
          grid.data[c * kp + m] += v * chi[m * ng + g];
      }
    return grid;
  }
  std::vector<cplx> vals(static_cast<std::size_t>(ng) * ng);
  for (int c0 = 0; c0 < n; ++c0)
    for (int c1 = 0; c1 < n; ++c1)
    {
      for (int g0 = 0; g0 < ng; ++g0)
        for (int g1 = 0; g1 < ng; ++g1)
          vals[g0 * ng + g1] =
              f(Point{(c0 + quad.nodes[g0]) * h, (c1 + quad.nodes[g1]) * h}) *
              (quad.weights[g0] * quad.weights[g1] * h * h);
      cplx *a = grid.data.data() + (1ll * c0 * n + c1) * kp * kp;
      for (int m0 = 0; m0 < kp; ++m0)
        for (int m1 = 0; m1 < kp; ++m1)
        {
          cplx s = 0.0;
          for (int g0 = 0; g0 < ng; ++g0)
            for (int g1 = 0; g1 < ng; ++g1)
              s += vals[g0 * ng + g1] * (chi[m0 * ng + g0] * chi[m1 * ng + g1]);
          a[m0 * kp + m1] = s;
        }
    }
  return grid;
}

namespace
{
// Applies a 1D two-scale transform along dimension m of a (2^n)^d x (k+1)^d
// array. Forward maps cell order to index1d order; inverse maps back.
void transform_dim(std::vector<cplx> &data, int dim, int k, int level, int m,
                   BasisTables const &tab, bool forward)
{
  int const kp    = k + 1;
  int const n     = 1 << level;
  int const n1    = dim == 2 ? n : 1;
  int const k1    = dim == 2 ? kp : 1;
  int const other = dim == 2 ? n : 1;
  auto const H0 = tab.h0(), H1 = tab.h1(), G0 = tab.g0(), G1 = tab.g1();

  auto index = [&](int x, int i, int xo, int io) -> std::size_t {
    if (m == 0)
      return ((static_cast<std::size_t>(x) * n1 + xo) * kp + i) * k1 + io;
    return ((static_cast<std::size_t>(xo) * n1 + x) * kp + io) * k1 + i;
  };

  std::vector<cplx> fiber(static_cast<std::size_t>(n) * kp), out(fiber.size()),
      cur(fiber.size());
  for (int xo = 0; xo < other; ++xo)
    for (int io = 0; io < (dim == 2 ? kp : 1); ++io)
    {
      for (int x = 0; x < n; ++x)
        for (int i = 0; i < kp; ++i)
          fiber[x * kp + i] = data[index(x, i, xo, io)];
      if (forward)
      {
        cur = fiber;
        for (int lev = level; lev >= 1; --lev)
        {
          int const half = 1 << (lev - 1);
          std::vector<cplx> next(static_cast<std::size_t>(half) * kp);
          for (int c = 0; c < half; ++c)
          {
            cplx const *a = cur.data() + (2 * c) * kp;
            cplx const *b = cur.data() + (2 * c + 1) * kp;
            cplx *dst     = out.data() + static_cast<std::size_t>(index1d(lev, c)) * kp;
            for (int i = 0; i < kp; ++i)
            {
              cplx s = 0.0, d = 0.0;
              for (int q = 0; q < kp; ++q)
              {
                s += H0[i * kp + q] * a[q] + H1[i * kp + q] * b[q];
                d += G0[i * kp + q] * a[q] + G1[i * kp + q] * b[q];
              }
              next[c * kp + i] = s;
              dst[i]           = d;
            }
          }
          cur.swap(next);
        }
        for (int i = 0; i < kp; ++i)
          out[i] = cur[i];
      }
      else
      {
        cur.assign(fiber.begin(), fiber.begin() + kp);
        for (int lev = 1; lev <= level; ++lev)
        {
          int const half = 1 << (lev - 1);
          std::vector<cplx> next(static_cast<std::size_t>(2 * half) * kp);
          for (int c = 0; c < half; ++c)
          {
            cplx const *s = cur.data() + c * kp;
            cplx const *d =
                fiber.data() + static_cast<std::size_t>(index1d(lev, c)) * kp;
            cplx *a = next.data() + (2 * c) * kp;
            cplx *b = next.data() + (2 * c + 1) * kp;
            for (int q = 0; q < kp; ++q)
            {
              cplx sa = 0.0, sb = 0.0;
              for (int i = 0; i < kp; ++i)
              {
                sa += H0[i * kp + q] * s[i] + G0[i * kp + q] * d[i];
                sb += H1[i * kp + q] * s[i] + G1[i * kp + q] * d[i];
              }
              a[q] = sa;
              b[q] = sb;
            }
          }
          cur.swap(next);
        }
        out = cur;
      }
      for (int x = 0; x < n; ++x)
        for (int i = 0; i < kp; ++i)
          data[index(x, i, xo, io)] = out[x * kp + i];
    }
}

std::size_t grid_hier_index(ElementSet const &set, int e, int level)
{
  int const n  = 1 << level;
  int const kp = set.degree() + 1;
  if (set.dim() == 1)
    return static_cast<std::size_t>(set.elem1d(e, 0)) * kp;
  return (static_cast<std::size_t>(set.elem1d(e, 0)) * n + set.elem1d(e, 1)) * kp * kp;
}

void check_grid_level(ElementSet const &set, int level)
{
  if (level < set.top_level())
    throw std::invalid_argument("grid level below the finest active level");
  if (level > set.tables()->max_level())
    throw std::invalid_argument("grid level above the table level");
}
} // namespace

LegendreGrid to_grid(HierState const &state, int q, int level)
{
  auto const &set = *state.set();
  check_grid_level(set, level);
  LegendreGrid grid{set.dim(), set.degree(), level, {}};
  grid.data.assign(grid.num_cells() * grid.block(), 0.0);
  int const bs = set.block_size();
  for (int e = 0; e < set.size(); ++e)
  {
    auto const blk = state.block(q, e);
    std::size_t const off = grid_hier_index(set, e, level);
    // element blocks (i0, i1) sit contiguously inside the (e0, e1, i0, i1) layout
    for (int i = 0; i < bs; ++i)
      grid.data[off + i] = blk[i];
  }
  for (int m = set.dim() - 1; m >= 0; --m)
    transform_dim(grid.data, set.dim(), set.degree(), level, m, *set.tables(), false);
  return grid;
}

void from_grid(LegendreGrid const &grid, HierState &state, int q)
{
  auto const &set = *state.set();
  check_grid_level(set, grid.level);
  if (grid.dim != set.dim() || grid.k != set.degree())
    throw std::invalid_argument("from_grid: grid and set mismatch");
  std::vector<cplx> data = grid.data;
  for (int m = 0; m < set.dim(); ++m)
    transform_dim(data, set.dim(), set.degree(), grid.level, m, *set.tables(), true);
  int const bs = set.block_size();
  for (int e = 0; e < set.size(); ++e)
  {
    std::size_t const off = grid_hier_index(set, e, grid.level);
    auto blk              = state.block(q, e);
    for (int i = 0; i < bs; ++i)
      blk[i] = data[off + i];
  }
}

HierState project_l2(std::vector<Field> const &fields, SetPtr const &set,
                     int quad_nodes)
{
  HierState state(set, static_cast<int>(fields.size()));
  int const level = set->top_level();
  for (int q = 0; q < static_cast<int>(fields.size()); ++q)
    from_grid(project_grid(fields[q], set->dim(), set->degree(), level, quad_nodes),
              state, q);
  return state;
}

HierState project_l2(Field const &f, SetPtr const &set, int quad_nodes)
{
  return project_l2(std::vector<Field>{f}, set, quad_nodes);
}

cplx reconstruct(HierState const &state, int q, Point const &x,
                 std::array<Side, 2> sides)
{
  auto const &set    = *state.set();
  auto const &alpert = AlpertBasis::get(set.degree());
  int const kp       = set.degree() + 1;
  cplx s             = 0.0;
  std::array<double, max_degree + 1> v0{}, v1{};
  for (int e = 0; e < set.size(); ++e)
  {
    auto const &key = set.key(e);
    bool nonzero    = true;
    for (int m = 0; m < set.dim(); ++m)
    {
      auto const [lo, hi] = support1d(key.level[m], key.cell[m]);
      if (x[m] < lo || x[m] > hi)
        nonzero = false;
    }
    if (!nonzero)
      continue;
    for (int i = 0; i < kp; ++i)
    {
      v0[i] = alpert.eval(i, key.level[0], key.cell[0], x[0], 0, sides[0]);
      v1[i] = set.dim() == 2
                  ? alpert.eval(i, key.level[1], key.cell[1], x[1], 0, sides[1])
                  : 1.0;
    }
    auto const blk = state.block(q, e);
    if (set.dim() == 1)
      for (int i = 0; i < kp; ++i)
        s += blk[i] * v0[i];
    else
      for (int i0 = 0; i0 < kp; ++i0)
        for (int i1 = 0; i1 < kp; ++i1)
          s += blk[i0 * kp + i1] * (v0[i0] * v1[i1]);
  }
  return s;
}

std::vector<Point> node_points(ElementSet const &set)
{
  int const kp   = set.degree() + 1;
  int const npts = set.block_size();
  auto const &tab = *set.tables();
  std::vector<Point> pts;
  pts.reserve(static_cast<std::size_t>(set.size()) * npts);
  for (int e = 0; e < set.size(); ++e)
    for (int p = 0; p < npts; ++p)
    {
      if (set.dim() == 1)
        pts.push_back({tab.node(set.elem1d(e, 0), p), 0.0});
      else
        pts.push_back({tab.node(set.elem1d(e, 0), p / kp),
                       tab.node(set.elem1d(e, 1), p % kp)});
    }
  return pts;
}

Eigen::VectorXcd to_points(HierState const &state)
{
  auto const &set  = *state.set();
  auto const &plan = set.eval_plan();
  auto const &tab  = *set.tables();
  int const kp     = set.degree() + 1;
  int const npts   = set.block_size();
  Eigen::VectorXcd out(state.coeffs().size());
  for (int q = 0; q < state.unknowns(); ++q)
    for (int e = 0; e < set.size(); ++e)
    {
      int const e0 = set.elem1d(e, 0), e1 = set.elem1d(e, 1);
      for (int p = 0; p < npts; ++p)
      {
        int const p0 = set.dim() == 1 ? p : p / kp;
        int const p1 = set.dim() == 1 ? 0 : p % kp;
        std::size_t const n = static_cast<std::size_t>(e) * npts + p;
        cplx s              = 0.0;
        for (int t = plan.offsets[n]; t < plan.offsets[n + 1]; ++t)
        {
          int const src   = plan.sources[t];
          auto const &key = set.key(src);
          auto const a0   = tab.alpert_at_node(e0, p0, key.level[0]);
          cplx const *c   = state.coeffs().data() + state.offset(q, src);
          if (set.dim() == 1)
          {
            for (int i = 0; i < kp; ++i)
              s += c[i] * a0[i];
          }
          else
          {
            auto const a1 = tab.alpert_at_node(e1, p1, key.level[1]);
            for (int i0 = 0; i0 < kp; ++i0)
            {
              cplx r = 0.0;
              for (int i1 = 0; i1 < kp; ++i1)
                r += c[i0 * kp + i1] * a1[i1];
              s += r * a0[i0];
            }
          }
        }
        out[state.offset(q, e) + p] = s;
      }
    }
  return out;
}

namespace
{
// Unidirectional sweep along dimension m: subtract (or add back) the
// interpolatory contributions of the ancestors along that dimension.
void interp_sweep(Eigen::VectorXcd &v, ElementSet const &set, int unknowns, int m,
                  bool hierarchize)
{
  int const kp   = set.degree() + 1;
  int const npts = set.block_size();
  auto const &tab = *set.tables();
  std::vector<int> order(set.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return set.key(a).level[m] < set.key(b).level[m];
  });
  if (!hierarchize)
    std::reverse(order.begin(), order.end());
  double const sign = hierarchize ? -1.0 : 1.0;
  for (int q = 0; q < unknowns; ++q)
    for (int e : order)
    {
      auto const &key = set.key(e);
      int const lev   = key.level[m];
      int const em    = set.elem1d(e, m);
      Eigen::Index const off = (static_cast<Eigen::Index>(q) * set.size() + e) * npts;
      for (int a = 0; a < lev; ++a)
      {
        ElementKey anc = key;
        anc.level[m]   = a;
        anc.cell[m]    = ancestor_cell(lev, key.cell[m], a);
        int const ea   = set.find(anc);
        if (ea < 0)
          throw std::invalid_argument("interpolation transform: incomplete hierarchy");
        auto const G = tab.interp_ancestor(em, a);
        Eigen::Index const aoff =
            (static_cast<Eigen::Index>(q) * set.size() + ea) * npts;
        if (set.dim() == 1)
        {
          for (int p = 0; p < kp; ++p)
          {
            cplx s = 0.0;
            for (int pp = 0; pp < kp; ++pp)
              s += G[p * kp + pp] * v[aoff + pp];
            v[off + p] += sign * s;
          }
        }
        else
        {
          for (int p = 0; p < kp; ++p)
            for (int po = 0; po < kp; ++po)
            {
              cplx s = 0.0;
              for (int pp = 0; pp < kp; ++pp)
              {
                int const ai = m == 0 ? pp * kp + po : po * kp + pp;
                s += G[p * kp + pp] * v[aoff + ai];
              }
              int const ti = m == 0 ? p * kp + po : po * kp + p;
              v[off + ti] += sign * s;
            }
        }
      }
    }
}
} // namespace

Eigen::VectorXcd from_points(Eigen::VectorXcd const &values, SetPtr const &set,
                             int unknowns)
{
  if (values.size() != set->dof() * unknowns)
    throw std::invalid_argument("from_points: size mismatch");
  Eigen::VectorXcd v = values;
  for (int m = 0; m < set->dim(); ++m)
    interp_sweep(v, *set, unknowns, m, true);
  return v;
}

Eigen::VectorXcd interp_to_points(Eigen::VectorXcd const &coeffs, SetPtr const &set,
                                  int unknowns)
{
  if (coeffs.size() != set->dof() * unknowns)
    throw std::invalid_argument("interp_to_points: size mismatch");
  Eigen::VectorXcd v = coeffs;
  for (int m = set->dim() - 1; m >= 0; --m)
    interp_sweep(v, *set, unknowns, m, false);
  return v;
}

cplx eval_interp(Eigen::VectorXcd const &coeffs, SetPtr const &set, int q,
                 Point const &x)
{
  auto const &interp = InterpBasis::get(set->degree());
  int const kp       = set->degree() + 1;
  int const npts     = set->block_size();
  cplx s             = 0.0;
  for (int e = 0; e < set->size(); ++e)
  {
    auto const &key = set->key(e);
    Eigen::Index const off = (static_cast<Eigen::Index>(q) * set->size() + e) * npts;
    for (int p = 0; p < npts; ++p)
    {
      int const p0 = set->dim() == 1 ? p : p / kp;
      int const p1 = set->dim() == 1 ? 0 : p % kp;
      double w     = interp(p0, key.level[0], key.cell[0], x[0]);
      if (set->dim() == 2 && w != 0.0)
        w *= interp(p1, key.level[1], key.cell[1], x[1]);
      if (w != 0.0)
        s += w * coeffs[off + p];
    }
  }
  return s;
}

void write_snapshot(std::ostream &out, HierState const &state, double time)
{
  auto const &set = *state.set();
  out << "mrdg-snapshot 1\n";
  out << "dim " << set.dim() << " k " << set.degree() << " max_level "
      << set.max_level() << " mode " << to_string(set.mode()) << " unknowns "
      << state.unknowns() << " elements " << set.size() << '\n';
  out << std::scientific << std::setprecision(17);
  out << "time " << time << '\n';
  for (int e = 0; e < set.size(); ++e)
  {
    auto const &key = set.key(e);
    for (int m = 0; m < set.dim(); ++m)
      out << key.level[m] << ' ';
    for (int m = 0; m < set.dim(); ++m)
      out << key.cell[m] << ' ';
    for (int q = 0; q < state.unknowns(); ++q)
      for (auto c : state.block(q, e))
        out << ' ' << c.real() << ' ' << c.imag();
    out << '\n';
  }
}

HierState read_snapshot(std::istream &in, double *time)
{
  std::string tag, name, mode;
  int version = 0, dim = 0, k = 0, max_level = 0, unknowns = 0, nelem = 0;
  double t = 0.0;
  in >> tag >> version;
  if (tag != "mrdg-snapshot" || version != 1)
    throw std::runtime_error("read_snapshot: not a snapshot file");
  in >> name >> dim >> name >> k >> name >> max_level >> name >> mode >> name >>
      unknowns >> name >> nelem >> name >> t;
  if (!in)
    throw std::runtime_error("read_snapshot: malformed header");
  std::vector<ElementKey> keys(nelem);
  int const bs = dim == 1 ? k + 1 : (k + 1) * (k + 1);
  std::vector<cplx> vals(static_cast<std::size_t>(nelem) * unknowns * bs);
  for (int e = 0; e < nelem; ++e)
  {
    for (int m = 0; m < dim; ++m)
      in >> keys[e].level[m];
    for (int m = 0; m < dim; ++m)
      in >> keys[e].cell[m];
    for (int q = 0; q < unknowns; ++q)
      for (int i = 0; i < bs; ++i)
      {
        double re = 0, im = 0;
        in >> re >> im;
        vals[(static_cast<std::size_t>(e) * unknowns + q) * bs + i] = {re, im};
      }
  }
  if (!in)
    throw std::runtime_error("read_snapshot: truncated element records");
  auto set = std::make_shared<ElementSet const>(dim, k, max_level,
                                                grid_mode_from_string(mode), keys);
  HierState state(set, unknowns);
  for (int e = 0; e < nelem; ++e)
  {
    int const idx = set->find(keys[e]);
    for (int q = 0; q < unknowns; ++q)
      for (int i = 0; i < bs; ++i)
        state.block(q, idx)[i] = vals[(static_cast<std::size_t>(e) * unknowns + q) * bs + i];
  }
  if (time)
    *time = t;
  return state;
}

} // namespace mrdg
