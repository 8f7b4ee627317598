#pragma once

// Brute-force dense constructions from the pointwise basis functions, used to
// check the fast transforms.

#include "mrdg/hierspace.hpp"

#include <Eigen/Dense>

namespace dense
{
using namespace mrdg;

// Dense interpolation matrix: row = node, column = (element, local function).
inline Eigen::MatrixXd interp_matrix(ElementSet const &set)
{
  auto const &ib  = InterpBasis::get(set.degree());
  auto const pts  = node_points(set);
  int const kp    = set.degree() + 1;
  int const bs    = set.block_size();
  Eigen::MatrixXd B(pts.size(), set.dof());
  for (std::size_t r = 0; r < pts.size(); ++r)
    for (int e = 0; e < set.size(); ++e)
    {
      auto const &key = set.key(e);
      for (int p = 0; p < bs; ++p)
      {
        int p0   = set.dim() == 1 ? p : p / kp;
        int p1   = set.dim() == 1 ? 0 : p % kp;
        double v = ib(p0, key.level[0], key.cell[0], pts[r][0]);
        if (set.dim() == 2)
          v *= ib(p1, key.level[1], key.cell[1], pts[r][1]);
        B(r, e * bs + p) = v;
      }
    }
  return B;
}

inline double alpert_fn(ElementSet const &set, int e, int i, Point const &x)
{
  auto const &b   = AlpertBasis::get(set.degree());
  auto const &key = set.key(e);
  int const kp    = set.degree() + 1;
  if (set.dim() == 1)
    return b(i, key.level[0], key.cell[0], x[0]);
  return b(i / kp, key.level[0], key.cell[0], x[0]) *
         b(i % kp, key.level[1], key.cell[1], x[1]);
}
} // namespace dense
