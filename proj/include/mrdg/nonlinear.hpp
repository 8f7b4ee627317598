#pragma once

#include "mrdg/hierspace.hpp"

#include <functional>
#include <stdexcept>
#include <string>

namespace mrdg
{
/// Real nonlinearity of the squared moduli. For one unknown the source is
/// f(|u|^2, 0) u; for two unknowns (f(|u|^2,|v|^2) u, g(|u|^2,|v|^2) v).
struct Nonlinearity
{
  std::string name = "none";
  int unknowns     = 1;
  std::function<double(double, double)> f;
  std::function<double(double, double)> g;

  static Nonlinearity none(int unknowns = 1);
  static Nonlinearity cubic();                       // s
  static Nonlinearity cubic_quintic();               // s + s^2
  static Nonlinearity scaled_cubic(double c = 2.0);  // c s
  static Nonlinearity coupled(double beta);          // s1 + beta s2, beta s1 + s2

  // "none", "cubic", "cubic_quintic", "scaled_cubic" (uses param, default 2),
  // "coupled" (uses param as beta)
  static Nonlinearity from_name(std::string const &name, double param);
};

/// Raised when point values exceed the guard or stop being finite.
class BlowUp : public std::runtime_error
{
public:
  explicit BlowUp(double value);
  double value() const { return value_; }

private:
  double value_;
};

inline constexpr double default_blowup_guard = 1e12;

// Alpert coefficients of the interpolant given hierarchical interpolatory
// coefficients. Exact for functions in the active space.
Eigen::VectorXcd interp_to_alpert(Eigen::VectorXcd const &coeffs, SetPtr const &set,
                                  int unknowns);

// Interpolatory coefficients of an Alpert representation (to_points then
// from_points). Inverse of interp_to_alpert when the set is a full grid.
Eigen::VectorXcd alpert_to_interp(HierState const &state);

// Alpert coefficients of I_h(f(|u|^2) u) for every unknown. Throws BlowUp when
// some |u|^2 exceeds `guard`.
HierState source_interpolant(HierState const &state, Nonlinearity const &nl,
                             double guard = default_blowup_guard);

// Same, starting from node values that were already computed.
HierState source_from_points(Eigen::VectorXcd const &values, SetPtr const &set,
                             Nonlinearity const &nl, double guard = default_blowup_guard);

} // namespace mrdg
