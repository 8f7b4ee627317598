#include "oracles.hpp"

#include "mrdg/nonlinear.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

using namespace mrdg;

namespace
{
constexpr double two_pi = 2.0 * std::numbers::pi;

HierState random_state(SetPtr const &set, int unknowns, std::mt19937_64 &rng)
{
  HierState s(set, unknowns);
  s.coeffs() = oracle::random_complex(s.coeffs().size(), rng);
  return s;
}
} // namespace

TEST_SUITE("nonlinear")
{
  TEST_CASE("presets")
  {
    CHECK(Nonlinearity::cubic().f(2.0, 0.0) == 2.0);
    CHECK(Nonlinearity::cubic_quintic().f(2.0, 0.0) == 6.0);
    CHECK(Nonlinearity::scaled_cubic().f(2.0, 0.0) == 4.0);
    auto const c = Nonlinearity::coupled(0.5);
    CHECK(c.unknowns == 2);
    CHECK(c.f(1.0, 2.0) == 2.0);
    CHECK(c.g(1.0, 2.0) == 2.5);
    CHECK(Nonlinearity::from_name("scaled_cubic", 18.0).f(1.0, 0.0) == 18.0);
    CHECK_THROWS_AS(Nonlinearity::from_name("sine", 0.0), std::invalid_argument);
  }

  TEST_CASE("zero nonlinearity and constants")
  {
    std::mt19937_64 rng(1);
    auto const set = build_set(GridMode::sparse, 4, 3, 2);
    auto const u   = random_state(set, 1, rng);
    CHECK(source_interpolant(u, Nonlinearity::none()).coeffs().norm() == 0.0);

    cplx const c(0.6, -0.3);
    for (int dim : {1, 2})
    {
      auto const s   = build_set(GridMode::sparse, 4, 2, dim);
      auto const uc  = project_l2([&](Point const &) { return c; }, s);
      auto const out = source_interpolant(uc, Nonlinearity::cubic());
      CHECK(std::abs(out.coeffs()[0] - std::norm(c) * c) < 1e-13);
      CHECK(out.coeffs().tail(out.coeffs().size() - 1).norm() < 1e-13);
    }
  }

  TEST_CASE("interp_to_alpert agrees with Lagrange reconstruction")
  {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    struct Case
    {
      int dim, N, k;
      GridMode mode;
    };
    for (auto const c : {Case{1, 4, 3, GridMode::full}, Case{1, 5, 1, GridMode::full},
                         Case{2, 3, 2, GridMode::full}, Case{2, 4, 3, GridMode::sparse}})
    {
      CAPTURE(c.dim);
      CAPTURE(c.N);
      auto const set = build_set(c.mode, c.N, c.k, c.dim);
      Eigen::VectorXcd const w = oracle::random_complex(set->dof(), rng);
      HierState const a(set, 1, interp_to_alpert(w, set, 1));
      double err = 0.0;
      for (int t = 0; t < 50; ++t)
      {
        Point const x{unif(rng), c.dim == 2 ? unif(rng) : 0.0};
        err = std::max(err, std::abs(reconstruct(a, 0, x) - eval_interp(w, set, 0, x)));
      }
      CHECK(err < 1e-11);
      // both representations span the same space: exact round trips
      CHECK((alpert_to_interp(a) - w).norm() < 1e-11 * w.norm());
      auto const b = random_state(set, 1, rng);
      CHECK((interp_to_alpert(alpert_to_interp(b), set, 1) - b.coeffs()).norm() <
            1e-11 * b.coeffs().norm());
    }
  }

  TEST_CASE("interpolated source converges at order k+1")
  {
    cplx const I(0.0, 1.0);
    auto u = [&](Point const &x) {
      return std::exp(I * two_pi * x[0]) * (1.0 + 0.3 * std::sin(two_pi * x[0]));
    };
    auto source = [&](double x) {
      cplx const v = u({x, 0.0});
      double const s = std::norm(v);
      return (s + s * s) * v;
    };
    for (int k = 1; k <= 3; ++k)
    {
      double prev = 0.0;
      for (int N = 4; N <= 6; ++N)
      {
        auto const set = build_set(GridMode::full, N, k, 1);
        // use point values of the exact field so only interpolation error remains
        Eigen::VectorXcd vals(set->dof());
        auto const pts = node_points(*set);
        for (std::size_t p = 0; p < pts.size(); ++p)
          vals[p] = u(pts[p]);
        auto const src = source_from_points(vals, set, Nonlinearity::cubic_quintic());
        double const err = std::sqrt(oracle::integrate(
            [&](double x) { return std::norm(reconstruct(src, 0, {x, 0.0}) - source(x)); },
            0.0, 1.0, 1 << N));
        if (N > 4)
          CHECK(std::log2(prev / err) > k + 1 - 0.3);
        prev = err;
      }
    }
  }

  TEST_CASE("reality, phase equivariance and coupled sources")
  {
    std::mt19937_64 rng(9);
    auto const set = build_set(GridMode::sparse, 4, 3, 2);
    HierState u    = random_state(set, 1, rng);
    HierState re(set, 1, Eigen::VectorXcd(u.coeffs().real().cast<cplx>()));
    CHECK(source_interpolant(re, Nonlinearity::cubic_quintic()).coeffs().imag().norm() < 1e-12);

    cplx const phase = std::polar(1.0, 0.7);
    HierState rot(set, 1, phase * u.coeffs());
    auto const a = source_interpolant(u, Nonlinearity::cubic());
    auto const b = source_interpolant(rot, Nonlinearity::cubic());
    CHECK((b.coeffs() - phase * a.coeffs()).norm() < 1e-12 * a.coeffs().norm());

    auto const set1 = build_set(GridMode::full, 5, 2, 1);
    auto const uv   = random_state(set1, 2, rng);
    auto const both = source_interpolant(uv, Nonlinearity::coupled(2.0 / 3.0));
    // reference: pointwise from independently evaluated node values
    auto const pts  = node_points(*set1);
    auto const n    = set1->dof();
    Eigen::VectorXcd w(2 * n);
    for (Eigen::Index p = 0; p < n; ++p)
    {
      cplx const uu = reconstruct(uv, 0, pts[p]), vv = reconstruct(uv, 1, pts[p]);
      double const s1 = std::norm(uu), s2 = std::norm(vv);
      w[p]     = (s1 + 2.0 / 3.0 * s2) * uu;
      w[n + p] = (2.0 / 3.0 * s1 + s2) * vv;
    }
    auto const ref = interp_to_alpert(from_points(w, set1, 2), set1, 2);
    CHECK((both.coeffs() - ref).norm() < 1e-11 * ref.norm());
  }

  TEST_CASE("blow-up guard")
  {
    auto const set = build_set(GridMode::full, 3, 2, 1);
    auto const u   = project_l2([](Point const &) { return cplx(1e3); }, set);
    CHECK_NOTHROW(source_interpolant(u, Nonlinearity::cubic()));
    CHECK_THROWS_AS(source_interpolant(u, Nonlinearity::cubic(), 1e5), BlowUp);
    HierState bad = u;
    bad.coeffs()[0] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(source_interpolant(bad, Nonlinearity::cubic()), BlowUp);
  }
}
