#include "mrdg/nonlinear.hpp"

#include <cmath>
#include <sstream>

namespace mrdg
{
Nonlinearity Nonlinearity::none(int unknowns)
{
  Nonlinearity nl;
  nl.name     = "none";
  nl.unknowns = unknowns;
  nl.f        = [](double, double) { return 0.0; };
  nl.g        = nl.f;
  return nl;
}

Nonlinearity Nonlinearity::cubic()
{
  Nonlinearity nl;
  nl.name = "cubic";
  nl.f    = [](double s, double) { return s; };
  return nl;
}

Nonlinearity Nonlinearity::cubic_quintic()
{
  Nonlinearity nl;
  nl.name = "cubic_quintic";
  nl.f    = [](double s, double) { return s + s * s; };
  return nl;
}

Nonlinearity Nonlinearity::scaled_cubic(double c)
{
  Nonlinearity nl;
  nl.name = "scaled_cubic";
  nl.f    = [c](double s, double) { return c * s; };
  return nl;
}

Nonlinearity Nonlinearity::coupled(double beta)
{
  Nonlinearity nl;
  nl.name     = "coupled";
  nl.unknowns = 2;
  nl.f        = [beta](double s1, double s2) { return s1 + beta * s2; };
  nl.g        = [beta](double s1, double s2) { return beta * s1 + s2; };
  return nl;
}

Nonlinearity Nonlinearity::from_name(std::string const &name, double param)
{
  if (name == "none")
    return none();
  if (name == "cubic")
    return cubic();
  if (name == "cubic_quintic")
    return cubic_quintic();
  if (name == "scaled_cubic")
    return scaled_cubic(param);
  if (name == "coupled")
    return coupled(param);
  throw std::invalid_argument("unknown nonlinearity '" + name + "'");
}

namespace
{
std::string blowup_message(double value)
{
  std::ostringstream os;
  os << "blow-up: |u|^2 = " << value << " at an interpolation node";
  return os.str();
}

// out += scatter of v along dimension m: every element sends G * v to each of
// its ancestors along m (itself included).
void gram_scatter(Eigen::VectorXcd const &v, Eigen::VectorXcd &out, ElementSet const &set,
                  int unknowns, int m)
{
  int const kp   = set.degree() + 1;
  int const npts = set.block_size();
  auto const &tab = *set.tables();
  for (int q = 0; q < unknowns; ++q)
    for (int e = 0; e < set.size(); ++e)
    {
      auto const &key = set.key(e);
      int const lev   = key.level[m];
      int const em    = set.elem1d(e, m);
      Eigen::Index const off = (static_cast<Eigen::Index>(q) * set.size() + e) * npts;
      for (int a = 0; a <= lev; ++a)
      {
        ElementKey anc = key;
        anc.level[m]   = a;
        anc.cell[m]    = ancestor_cell(lev, key.cell[m], a);
        int const ea   = a == lev ? e : set.find(anc);
        if (ea < 0)
          throw std::invalid_argument("interp_to_alpert: incomplete hierarchy");
        auto const G = tab.gram_ancestor(em, a);
        Eigen::Index const aoff = (static_cast<Eigen::Index>(q) * set.size() + ea) * npts;
        if (set.dim() == 1)
        {
          for (int i = 0; i < kp; ++i)
          {
            cplx s = 0.0;
            for (int p = 0; p < kp; ++p)
              s += G[i * kp + p] * v[off + p];
            out[aoff + i] += s;
          }
        }
        else
        {
          for (int i = 0; i < kp; ++i)
            for (int o = 0; o < kp; ++o)
            {
              cplx s = 0.0;
              for (int p = 0; p < kp; ++p)
                s += G[i * kp + p] * v[off + (m == 0 ? p * kp + o : o * kp + p)];
              out[aoff + (m == 0 ? i * kp + o : o * kp + i)] += s;
            }
        }
      }
    }
}
} // namespace

BlowUp::BlowUp(double value) : std::runtime_error(blowup_message(value)), value_(value) {}

Eigen::VectorXcd interp_to_alpert(Eigen::VectorXcd const &coeffs, SetPtr const &set,
                                  int unknowns)
{
  if (coeffs.size() != set->dof() * unknowns)
    throw std::invalid_argument("interp_to_alpert: size mismatch");
  Eigen::VectorXcd cur = coeffs;
  for (int m = 0; m < set->dim(); ++m)
  {
    Eigen::VectorXcd next = Eigen::VectorXcd::Zero(cur.size());
    gram_scatter(cur, next, *set, unknowns, m);
    cur.swap(next);
  }
  return cur;
}

Eigen::VectorXcd alpert_to_interp(HierState const &state)
{
  return from_points(to_points(state), state.set(), state.unknowns());
}

HierState source_from_points(Eigen::VectorXcd const &values, SetPtr const &set,
                             Nonlinearity const &nl, double guard)
{
  auto const n = set->dof();
  if (values.size() != n * nl.unknowns)
    throw std::invalid_argument("source_interpolant: state/nonlinearity mismatch");
  Eigen::VectorXcd w(values.size());
  for (Eigen::Index p = 0; p < n; ++p)
  {
    double const s1 = std::norm(values[p]);
    double const s2 = nl.unknowns == 2 ? std::norm(values[n + p]) : 0.0;
    double const s  = std::max(s1, s2);
    if (!(s <= guard))
      throw BlowUp(s);
    w[p] = nl.f(s1, s2) * values[p];
    if (nl.unknowns == 2)
      w[n + p] = nl.g(s1, s2) * values[n + p];
  }
  auto const interp = from_points(w, set, nl.unknowns);
  return HierState(set, nl.unknowns, interp_to_alpert(interp, set, nl.unknowns));
}

HierState source_interpolant(HierState const &state, Nonlinearity const &nl, double guard)
{
  if (state.unknowns() != nl.unknowns)
    throw std::invalid_argument("source_interpolant: state/nonlinearity mismatch");
  return source_from_points(to_points(state), state.set(), nl, guard);
}

} // namespace mrdg
