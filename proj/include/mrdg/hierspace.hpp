#pragma once

#include "mrdg/basis.hpp"

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace mrdg
{
using cplx = std::complex<double>;
using Point = std::array<double, 2>;
using Field = std::function<cplx(Point const &)>;

inline constexpr int max_dim = 2;

/// Hierarchical element (levels l, cells j). Unused dimensions stay zero.
struct ElementKey
{
  std::array<int, max_dim> level{};
  std::array<int, max_dim> cell{};

  bool operator==(ElementKey const &) const = default;
};

struct ElementKeyHash
{
  std::size_t operator()(ElementKey const &key) const noexcept
  {
    std::uint64_t h = 1469598103934665603ull;
    for (int v : {key.level[0], key.level[1], key.cell[0], key.cell[1]})
    {
      h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ull;
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

int level_sum(ElementKey const &key);
int level_max(ElementKey const &key);
// ordering by |l|_1, then levels, then cells
bool key_less(ElementKey const &a, ElementKey const &b);
bool valid_key(ElementKey const &key, int dim);

// Parents obtained by coarsening one dimension (l=1 -> root of that dim).
std::vector<ElementKey> parents(ElementKey const &key, int dim);
// Children obtained by refining one dimension; dims already at max_level are skipped.
std::vector<ElementKey> children(ElementKey const &key, int dim, int max_level);

enum class GridMode
{
  full,
  sparse,
  adaptive
};

GridMode grid_mode_from_string(std::string const &name);
std::string to_string(GridMode mode);

class ElementSet;
using SetPtr = std::shared_ptr<ElementSet const>;

/// Per-node evaluation plan: Alpert functions of active elements that are
/// nonzero at each interpolation node. Built lazily, immutable afterwards.
struct EvalPlan
{
  // for node n (element-major, (k+1)^d per element), contributors
  // [offsets[n], offsets[n+1]) into `sources`
  std::vector<int> offsets;
  std::vector<int> sources;
};

/// Immutable, sorted, hierarchy-complete set of elements.
class ElementSet
{
public:
  ElementSet(int dim, int k, int max_level, GridMode mode,
             std::vector<ElementKey> keys);

  int dim() const { return dim_; }
  int degree() const { return k_; }
  int max_level() const { return max_level_; }
  GridMode mode() const { return mode_; }
  int size() const { return static_cast<int>(keys_.size()); }
  int block_size() const { return block_; }
  long long dof() const { return static_cast<long long>(size()) * block_; }

  ElementKey const &key(int e) const { return keys_[e]; }
  std::span<const ElementKey> keys() const { return keys_; }
  // index of key, or -1
  int find(ElementKey const &key) const;
  bool contains(ElementKey const &key) const { return find(key) >= 0; }
  std::uint64_t fingerprint() const { return fingerprint_; }

  // highest level actually present in any dimension
  int top_level() const { return top_level_; }
  bool hierarchy_complete() const;

  // 1D element index (index1d) of element e along dimension m
  int elem1d(int e, int m) const
  {
    return index1d(keys_[e].level[m], keys_[e].cell[m]);
  }

  std::shared_ptr<BasisTables const> const &tables() const { return tables_; }
  EvalPlan const &eval_plan() const;

private:
  int dim_;
  int k_;
  int max_level_;
  int top_level_ = 0;
  int block_;
  GridMode mode_;
  std::vector<ElementKey> keys_;
  std::unordered_map<ElementKey, int, ElementKeyHash> index_;
  std::uint64_t fingerprint_ = 0;
  std::shared_ptr<BasisTables const> tables_;
  mutable std::once_flag plan_once_;
  mutable EvalPlan plan_;
};

SetPtr build_set(GridMode mode, int max_level, int k, int dim);

// Set containing `keys` and all of their ancestors.
SetPtr make_set(int dim, int k, int max_level, GridMode mode,
                std::vector<ElementKey> keys);

/// Alpert coefficients over an element set. Layout: unknown-major, then
/// element, then local index i = i_1 (k+1) + i_2.
class HierState
{
public:
  HierState() = default;
  explicit HierState(SetPtr set, int unknowns = 1);
  HierState(SetPtr set, int unknowns, Eigen::VectorXcd coeffs);

  SetPtr const &set() const { return set_; }
  int unknowns() const { return unknowns_; }
  Eigen::VectorXcd &coeffs() { return coeffs_; }
  Eigen::VectorXcd const &coeffs() const { return coeffs_; }

  Eigen::Index offset(int q, int e) const
  {
    return (static_cast<Eigen::Index>(q) * set_->size() + e) * set_->block_size();
  }
  auto block(int q, int e) { return coeffs_.segment(offset(q, e), set_->block_size()); }
  auto block(int q, int e) const
  {
    return coeffs_.segment(offset(q, e), set_->block_size());
  }
  auto unknown(int q)
  {
    return coeffs_.segment(static_cast<Eigen::Index>(q) * set_->dof(), set_->dof());
  }
  auto unknown(int q) const
  {
    return coeffs_.segment(static_cast<Eigen::Index>(q) * set_->dof(), set_->dof());
  }

  double norm(int q) const { return unknown(q).norm(); }

  // same coefficients on another set: shared elements copied, new ones zero
  HierState transfer(SetPtr const &target) const;

private:
  SetPtr set_;
  int unknowns_ = 0;
  Eigen::VectorXcd coeffs_;
};

/// Cell-wise orthonormal Legendre coefficients on the uniform grid with 2^n
/// cells per dimension. Layout: cell-major (c_1, c_2), then local (m_1, m_2).
struct LegendreGrid
{
  int dim = 1;
  int k = 0;
  int level = 0;
  std::vector<cplx> data;

  int cells_per_dim() const { return 1 << level; }
  int block() const { return dim == 1 ? k + 1 : (k + 1) * (k + 1); }
  long long num_cells() const
  {
    return dim == 1 ? cells_per_dim() : 1ll * cells_per_dim() * cells_per_dim();
  }
  // value at x inside cell c (cell chosen by caller)
  cplx eval(std::array<int, 2> cell, Point const &x) const;
};

// L2 projection of a field onto the full level-n grid using `quad_nodes`
// Gauss nodes per dimension and cell (0 selects k+2).
LegendreGrid project_grid(Field const &f, int dim, int k, int level,
                          int quad_nodes = 0);

// Fast two-scale transforms between an element set and the uniform grid at
// level >= set->top_level().
LegendreGrid to_grid(HierState const &state, int q, int level);
void from_grid(LegendreGrid const &grid, HierState &state, int q);

HierState project_l2(std::vector<Field> const &fields, SetPtr const &set,
                     int quad_nodes = 0);
HierState project_l2(Field const &f, SetPtr const &set, int quad_nodes = 0);

// Point evaluation of unknown q. `sides` picks the one-sided limit per dimension.
cplx reconstruct(HierState const &state, int q, Point const &x,
                 std::array<Side, 2> sides = {Side::right, Side::right});

// Interpolation node coordinates, one per (element, local node), element-major.
std::vector<Point> node_points(ElementSet const &set);

// Values of the Alpert representation at all active interpolation nodes.
// Same layout as the coefficients.
Eigen::VectorXcd to_points(HierState const &state);

// Hierarchical interpolatory coefficients from node values (unidirectional
// sweeps over ancestors).
Eigen::VectorXcd from_points(Eigen::VectorXcd const &values, SetPtr const &set,
                             int unknowns);

// Inverse of from_points: node values of an interpolatory representation.
Eigen::VectorXcd interp_to_points(Eigen::VectorXcd const &coeffs, SetPtr const &set,
                                  int unknowns);

// Value of the interpolatory representation of unknown q at x.
cplx eval_interp(Eigen::VectorXcd const &coeffs, SetPtr const &set, int q,
                 Point const &x);

// Text snapshot: header then one record per element.
void write_snapshot(std::ostream &out, HierState const &state, double time);
HierState read_snapshot(std::istream &in, double *time = nullptr);

} // namespace mrdg
