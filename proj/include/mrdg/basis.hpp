#pragma once

#include <array>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

namespace mrdg
{
inline constexpr int max_degree = 3;

// One-sided limit selector at breakpoints.
enum class Side
{
  left,
  right
};

struct QuadRule
{
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Legendre rule with n nodes mapped to [0,1]. Valid for 1 <= n <= 10.
QuadRule gauss_rule(int n);

// Legendre polynomial P_n and its derivative on [-1,1].
double legendre(int n, double t);
double legendre_deriv(int n, double t);

/// Piecewise polynomial on [0,1]. Each piece stores monomial coefficients in
/// the local variable s = (x - a) / (b - a) of its interval [a,b].
class PiecewisePoly1D
{
public:
  PiecewisePoly1D() = default;
  PiecewisePoly1D(std::vector<double> breakpoints,
                  std::vector<std::vector<double>> coeffs);

  // right-continuous, except at x = 1 where the left limit is used
  double operator()(double x) const;

  // q-th derivative; limits taken from the requested side. Limits from
  // outside [0,1] are zero.
  double eval(double x, int deriv, Side side) const;

  // value of the q-th derivative inside piece p at local coordinate s
  double eval_piece(int piece, double s, int deriv) const;

  int num_pieces() const { return static_cast<int>(coeffs_.size()); }
  int degree() const;
  std::span<const double> breakpoints() const { return breakpoints_; }
  std::span<const double> piece_coeffs(int piece) const
  {
    return coeffs_[piece];
  }

private:
  std::vector<double> breakpoints_;
  std::vector<std::vector<double>> coeffs_;
};

// sqrt(2i+1) P_i(2x-1): the orthonormal level-0 scaling functions.
PiecewisePoly1D legendre_scaling(int i);

// Orthonormal mother wavelets h_0..h_k on [0,1] with pieces [0,1/2], [1/2,1],
// orthogonal to all polynomials of degree <= k.
std::vector<PiecewisePoly1D> alpert_wavelets(int k);

/// Immutable Alpert basis of degree k. Level 0 holds the scaling functions;
/// level l >= 1 holds 2^{(l-1)/2} h_i(2^{l-1} x - j) for j < 2^{l-1}.
class AlpertBasis
{
public:
  explicit AlpertBasis(int k);

  // Cached instance for 0 <= k <= max_degree.
  static AlpertBasis const &get(int k);

  int degree() const { return k_; }

  // value (or derivative) of v^j_{i,l} at x, right-continuous except at 1
  double operator()(int i, int level, int cell, double x) const;
  double eval(int i, int level, int cell, double x, int deriv, Side side) const;

  PiecewisePoly1D const &scaling(int i) const { return scaling_[i]; }
  PiecewisePoly1D const &wavelet(int i) const { return wavelets_[i]; }

private:
  int k_;
  std::vector<PiecewisePoly1D> scaling_;
  std::vector<PiecewisePoly1D> wavelets_;
};

/// Nested interpolation nodes and hierarchical Lagrange functions.
///
/// Level-0 nodes: {1/3, 2/3} (k=1), {1/6, 1/3, 2/3} (k=2),
/// {1/6, 1/3, 2/3, 5/6} (k=3). Each set is closed under x -> 2x mod 1, so the
/// level-l node set (the level-0 nodes copied into every level-l cell)
/// contains every coarser node. No node ever sits on a dyadic cell boundary.
///
/// Element (l, j), l >= 1, owns the k+1 level-l nodes inside level-(l-1) cell j
/// that are not level-(l-1) nodes. Its functions are the level-l Lagrange
/// polynomials at those nodes, each supported on one half of the cell.
class InterpBasis
{
public:
  explicit InterpBasis(int k);
  static InterpBasis const &get(int k);

  int degree() const { return k_; }

  // node p of element (level, cell)
  double node(int level, int cell, int p) const;

  // all nodes of the full level-l node set in increasing order
  std::vector<double> nodes_at_level(int level) const;

  // hierarchical function p of element (level, cell) at x
  double operator()(int p, int level, int cell, double x) const;

  std::span<const double> level0_nodes() const { return nodes0_; }

  // Lagrange polynomial through the level-0 nodes, local variable s in [0,1]
  double lagrange(int q, double s) const;

private:
  int k_;
  std::vector<double> nodes0_;
  // new node p of a refined cell: half (0/1) and the level-0 node it copies
  std::vector<int> new_half_;
  std::vector<int> new_source_;
  std::vector<double> new_local_;
  std::vector<std::vector<double>> lagrange_coeffs_;
};

inline int cells_at_level(int level) { return level == 0 ? 1 : 1 << (level - 1); }

// Linear index of 1D element (level, cell) among all levels: 0, 1, 2..3, 4..7, ...
inline int index1d(int level, int cell)
{
  return level == 0 ? 0 : (1 << (level - 1)) + cell;
}

inline std::array<int, 2> element1d(int index)
{
  if (index == 0)
    return {0, 0};
  int level = 1;
  while ((1 << level) <= index)
    ++level;
  return {level, index - (1 << (level - 1))};
}

// Support [lo, hi] of 1D element (level, cell).
inline std::array<double, 2> support1d(int level, int cell)
{
  if (level == 0)
    return {0.0, 1.0};
  double const w = 1.0 / cells_at_level(level);
  return {cell * w, (cell + 1) * w};
}

// Cell of the level-l element whose support contains x (right-continuous).
inline int cell_containing(int level, double x)
{
  int const n = cells_at_level(level);
  int j       = static_cast<int>(x * n);
  return j < 0 ? 0 : (j >= n ? n - 1 : j);
}

// 1D element at level `anc` that is an ancestor of (level, cell); anc <= level.
inline int ancestor_cell(int level, int cell, int anc)
{
  if (anc == 0)
    return 0;
  return cell >> (level - anc);
}

/// Precomputed 1D tables for degree k and levels <= max_level, shared by the
/// hierarchical transforms. Immutable after construction.
class BasisTables
{
public:
  BasisTables(int k, int max_level);

  static std::shared_ptr<BasisTables const> get(int k, int max_level);

  int degree() const { return k_; }
  int max_level() const { return max_level_; }
  int num_elements() const { return num_elements_; }

  double node(int elem, int p) const { return nodes_[elem * (k_ + 1) + p]; }

  // Alpert values at node p of element `elem` for the level-`lev` element
  // containing that node: k+1 values.
  std::span<const double> alpert_at_node(int elem, int p, int lev) const
  {
    auto const off = ((static_cast<std::size_t>(elem) * (k_ + 1) + p) *
                          (max_level_ + 1) +
                      lev) *
                     (k_ + 1);
    return {alpert_nodes_.data() + off, static_cast<std::size_t>(k_ + 1)};
  }
  int chain_cell(int elem, int p, int lev) const
  {
    return chain_cells_[(static_cast<std::size_t>(elem) * (k_ + 1) + p) *
                            (max_level_ + 1) +
                        lev];
  }

  // Interpolatory function i' of the level-`anc` ancestor of `elem`,
  // evaluated at node p of `elem`: entry [p * (k+1) + i'], anc < level(elem).
  std::span<const double> interp_ancestor(int elem, int anc) const
  {
    auto const off = (static_cast<std::size_t>(elem) * (max_level_ + 1) + anc) *
                     (k_ + 1) * (k_ + 1);
    return {interp_anc_.data() + off,
            static_cast<std::size_t>((k_ + 1) * (k_ + 1))};
  }

  // <v_{anc-ancestor, i}, phi_{elem, i'}>: entry [i * (k+1) + i'],
  // anc <= level(elem).
  std::span<const double> gram_ancestor(int elem, int anc) const
  {
    auto const off = (static_cast<std::size_t>(elem) * (max_level_ + 1) + anc) *
                     (k_ + 1) * (k_ + 1);
    return {gram_anc_.data() + off,
            static_cast<std::size_t>((k_ + 1) * (k_ + 1))};
  }

  // two-scale filters between cell Legendre blocks (row-major (k+1)^2):
  // parent = H0 left + H1 right, detail = G0 left + G1 right
  std::span<const double> h0() const { return filters_[0]; }
  std::span<const double> h1() const { return filters_[1]; }
  std::span<const double> g0() const { return filters_[2]; }
  std::span<const double> g1() const { return filters_[3]; }

private:
  int k_;
  int max_level_;
  int num_elements_;
  std::vector<double> nodes_;
  std::vector<double> alpert_nodes_;
  std::vector<int> chain_cells_;
  std::vector<double> interp_anc_;
  std::vector<double> gram_anc_;
  std::array<std::vector<double>, 4> filters_;
};

// Orthonormal Legendre basis of a level-n cell: 2^{n/2} sqrt(2m+1) P_m(2s-1).
double cell_legendre(int m, int level, int cell, double x);

} // namespace mrdg
