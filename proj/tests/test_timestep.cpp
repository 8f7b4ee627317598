#include "oracles.hpp"

#include "mrdg/timestep.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace mrdg;

namespace
{
constexpr double two_pi = 2.0 * std::numbers::pi;
cplx const I(0.0, 1.0);

// scalar stability function of the implicit part: 1 + z b^T (I - z A)^{-1} 1
cplx stability(ImexTableau const &t, cplx z)
{
  int const s = t.stages();
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Identity(s, s) - z * t.a_imp.cast<cplx>();
  Eigen::VectorXcd const ones = Eigen::VectorXcd::Ones(s);
  return 1.0 + z * t.b_imp.cast<cplx>().dot(M.lu().solve(ones));
}

double slope(std::vector<double> const &errs)
{
  return std::log2(errs[errs.size() - 2] / errs.back());
}
} // namespace

TEST_SUITE("timestep")
{
  TEST_CASE("tableaux satisfy their order conditions")
  {
    auto const ssp = ImexTableau::from_name("ssp3_433");
    auto const ars = ImexTableau::from_name("ars_443");
    auto const eul = ImexTableau::from_name("euler");
    CHECK(ssp.order_defect(3) < 1e-12);
    CHECK(ars.order_defect(3) < 1e-12);
    CHECK(eul.order_defect(1) < 1e-15);
    CHECK(eul.order_defect(2) > 0.1);
    CHECK_FALSE(ssp.stiffly_accurate());
    CHECK(ars.stiffly_accurate());
    for (auto const *t : {&ssp, &ars})
      for (int i = 0; i < t->stages(); ++i)
        for (int j = i; j < t->stages(); ++j)
        {
          CHECK(t->a_exp(i, j) == 0.0);
          if (j > i)
            CHECK(t->a_imp(i, j) == 0.0);
        }
    CHECK_THROWS_AS(ImexTableau::from_name("rk4"), std::invalid_argument);
  }

  TEST_CASE("choose_dt")
  {
    CHECK(choose_dt(8, 0.1) == doctest::Approx(0.1 / 256).epsilon(1e-15));
    CHECK(choose_dt(6, 0.1, 4.0 / 3.0) == doctest::Approx(0.1 / 256).epsilon(1e-14));
    CHECK(choose_dt_coupled(10, 0.1, 50.0, 0.5) ==
          doctest::Approx(0.1 * 50.0 / 1024 / 0.5).epsilon(1e-15));
  }

  TEST_CASE("solve_linear")
  {
    std::mt19937_64 rng(2);
    SparseMatrix id(50, 50);
    id.setIdentity();
    auto const b = oracle::random_complex(50, rng);
    CHECK((solve_linear(id, b) - b).norm() <= 1e-10 * b.norm());

    int const n = 200;
    std::vector<Eigen::Triplet<cplx>> trip;
    std::uniform_int_distribution<int> col(0, n - 1);
    auto const vals = oracle::random_complex(5 * n, rng);
    for (int r = 0; r < n; ++r)
    {
      trip.emplace_back(r, r, cplx(12.0, 3.0));
      for (int t = 0; t < 5; ++t)
        trip.emplace_back(r, col(rng), vals[5 * r + t]);
    }
    SparseMatrix A(n, n);
    A.setFromTriplets(trip.begin(), trip.end());
    auto const rhs = oracle::random_complex(n, rng);
    // Krylov first, LU only, GMRES only, Krylov budget too small (LU fallback)
    for (auto [threshold, budget] : {std::pair{100000ll, 100}, std::pair{100000ll, 0},
                                     std::pair{0ll, 100}, std::pair{100000ll, 1}})
    {
      SolverOptions o;
      o.direct_threshold = threshold;
      o.krylov_budget    = budget;
      auto const x       = solve_linear(A, rhs, o, 4);
      CHECK((A * x - rhs).norm() / rhs.norm() <= 1e-10);
    }

    auto const set = build_set(GridMode::full, 4, 2, 1);
    auto const L   = assemble_laplacian(set, FluxParams::conservative());
    ShiftedSolver const solver(L.matrix, cplx(0.0, 1e-3), set->block_size(), SolverOptions{});
    auto const r  = oracle::random_complex(set->dof(), rng);
    auto const y  = solver.solve(r);
    CHECK((y - cplx(0.0, 1e-3) * (L.matrix * y) - r).norm() <= 1e-10 * r.norm());

    // a stiff shift exhausts the Krylov budget and switches to the factorization
    SolverOptions tight;
    tight.krylov_budget = 2;
    ShiftedSolver const stiff(L.matrix, cplx(0.0, 10.0), set->block_size(), tight);
    CHECK(!stiff.direct());
    auto const z = stiff.solve(r);
    CHECK(stiff.direct());
    CHECK((z - cplx(0.0, 10.0) * (L.matrix * z) - r).norm() <= 1e-8 * r.norm());
  }

  TEST_CASE("zero state with zero source stays zero")
  {
    auto const set = build_set(GridMode::sparse, 4, 2, 2);
    auto const rhs = make_nls_rhs(set, FluxParams::conservative(), 1.0, Nonlinearity::cubic());
    HierState const z(set);
    CHECK(imex_step(z, 1e-3, *rhs, ImexTableau::ssp3_433()).coeffs().norm() == 0.0);
    CHECK(euler_pair_step(z, 1e-3, *rhs).coeffs().norm() == 0.0);
  }

  TEST_CASE("stiff scalar reduction matches the stability function")
  {
    auto const set = build_set(GridMode::full, 0, 1, 1);
    for (auto const &tab : {ImexTableau::ssp3_433(), ImexTableau::ars_443()})
      for (double z : {-1.0, -10.0, -100.0, -1000.0})
      {
        LinearOperator op;
        op.matrix.resize(set->dof(), set->dof());
        op.matrix.setIdentity();
        op.matrix *= z;
        op.fingerprint = set->fingerprint();
        SplitRhs const rhs(set, 1, op, 1.0, nullptr);
        HierState y(set);
        y.coeffs().setConstant(1.0);
        auto const y1 = imex_step(y, 1.0, rhs, tab);
        cplx const R  = stability(tab, z);
        CHECK(std::abs(y1.coeffs()[0] - R) < 1e-12);
        CHECK(std::abs(R) <= 1.0);
      }
  }

  TEST_CASE("linear Schroedinger: third order in time")
  {
    // Data: the plane wave projected onto the discrete eigenspace of L nearest
    // -(2 pi)^2, so the exact flow is a phase rotation and the high-frequency
    // modes of the ultra-weak operator are not excited.
    auto const set = build_set(GridMode::full, 4, 3, 1);
    auto const rhs = make_nls_rhs(set, FluxParams::conservative(), 1.0, Nonlinearity::none());
    auto const pw  = project_l2([](Point const &x) { return std::exp(I * two_pi * x[0]); }, set);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(
        Eigen::MatrixXcd(rhs->laplacian().matrix));
    Eigen::Index best = 0;
    (eig.eigenvalues().array() + two_pi * two_pi).abs().minCoeff(&best);
    double const lambda = eig.eigenvalues()[best];
    CHECK(std::abs(lambda + two_pi * two_pi) < 1e-6 * two_pi * two_pi);
    Eigen::VectorXcd c = Eigen::VectorXcd::Zero(set->dof());
    for (Eigen::Index j = 0; j < set->dof(); ++j)
      if (std::abs(eig.eigenvalues()[j] - lambda) < 1e-6)
        c += eig.eigenvectors().col(j) * eig.eigenvectors().col(j).dot(pw.coeffs());
    HierState const u0(set, 1, c);
    double const T = 0.1;
    Eigen::VectorXcd const ref = std::exp(I * lambda * T) * c;
    for (auto const &tab : {ImexTableau::ssp3_433(), ImexTableau::ars_443()})
    {
      std::vector<double> errs;
      for (int steps : {10, 20, 40, 80})
      {
        HierState u = u0;
        for (int s = 0; s < steps; ++s)
          u = imex_step(u, T / steps, *rhs, tab);
        errs.push_back((u.coeffs() - ref).norm());
      }
      CAPTURE(tab.name);
      for (std::size_t i = 1; i < errs.size(); ++i)
        CHECK(std::abs(std::log2(errs[i - 1] / errs[i]) - 3.0) < 0.2);
    }
  }

  TEST_CASE("nonlinear run: IMEX third order, Euler pair first order")
  {
    // i u_t + u_xx + (|u|^2 + |u|^4) u = 0 against a fine-step reference
    auto const set = build_set(GridMode::full, 4, 3, 1);
    auto const rhs = make_nls_rhs(set, FluxParams::conservative(), 1.0,
                                  Nonlinearity::cubic_quintic());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(
        Eigen::MatrixXcd(rhs->laplacian().matrix));
    // smooth data free of high-frequency modes: the eigenvectors nearest zero
    auto const pw = project_l2(
        [](Point const &x) { return 0.8 + 0.3 * std::exp(I * two_pi * x[0]); }, set);
    Eigen::VectorXcd c = Eigen::VectorXcd::Zero(set->dof());
    for (Eigen::Index j = 0; j < set->dof(); ++j)
      if (std::abs(eig.eigenvalues()[j]) < 100.0)
        c += eig.eigenvectors().col(j) * eig.eigenvectors().col(j).dot(pw.coeffs());
    HierState const u0(set, 1, c);
    double const T = 0.05;
    auto run = [&](int steps, bool euler) {
      HierState u = u0;
      for (int s = 0; s < steps; ++s)
        u = euler ? euler_pair_step(u, T / steps, *rhs)
                  : imex_step(u, T / steps, *rhs, ImexTableau::ssp3_433());
      return u.coeffs();
    };
    Eigen::VectorXcd const ref = run(1280, false);
    std::vector<double> imex, euler;
    for (int steps : {10, 20, 40})
    {
      imex.push_back((run(steps, false) - ref).norm());
      euler.push_back((run(steps, true) - ref).norm());
    }
    CHECK(std::abs(slope(imex) - 3.0) < 0.3);
    CHECK(std::abs(slope(euler) - 1.0) < 0.2);

    // one-step defect between the two schemes is O(dt^2)
    std::vector<double> defect;
    for (double dt : {4e-3, 2e-3, 1e-3})
      defect.push_back((imex_step(u0, dt, *rhs, ImexTableau::ssp3_433()).coeffs() -
                        euler_pair_step(u0, dt, *rhs).coeffs())
                           .norm());
    CHECK(std::abs(slope(defect) - 2.0) < 0.3);
  }

  TEST_CASE("norm behaviour of the linear flow")
  {
    auto const set = build_set(GridMode::full, 4, 2, 1);
    auto const u0  = project_l2(
        [](Point const &x) { return std::exp(I * two_pi * x[0]) * (1.0 + 0.5 * std::cos(two_pi * x[0])); },
        set);
    // conservative flux: drift of |u| over t = 1 decays at order 3
    auto const cons = make_nls_rhs(set, FluxParams::conservative(), 1.0, Nonlinearity::none());
    std::vector<double> drift;
    for (int steps : {200, 400, 800})
    {
      HierState u = u0;
      for (int s = 0; s < steps; ++s)
        u = imex_step(u, 1.0 / steps, *cons, ImexTableau::ssp3_433());
      drift.push_back(std::abs(u.norm(0) - u0.norm(0)));
    }
    CHECK(slope(drift) > 2.6);

    // dissipative flux: norm never increases, for both step types
    auto const diss = make_nls_rhs(set, FluxParams::dissipative(), 1.0, Nonlinearity::none());
    HierState a = u0, b = u0;
    for (int s = 0; s < 50; ++s)
    {
      auto const na = imex_step(a, 1e-2, *diss, ImexTableau::ssp3_433());
      auto const nb = euler_pair_step(b, 1e-2, *diss);
      CHECK(na.norm(0) <= a.norm(0) * (1.0 + 1e-12));
      CHECK(nb.norm(0) <= b.norm(0) * (1.0 + 1e-12));
      a = na;
      b = nb;
    }
  }

  TEST_CASE("coupled right-hand side")
  {
    auto const set = build_set(GridMode::full, 4, 2, 1);
    CoupledLinear p;
    p.a     = 0.5;
    p.c_lap = 0.5;
    p.beta  = 0.1;
    p.kappa = 0.2;
    auto const nl  = Nonlinearity::coupled(2.0 / 3.0);
    auto const rhs = make_coupled_rhs(set, FluxParams::conservative(), p, nl);
    std::mt19937_64 rng(4);
    HierState y(set, 2);
    y.coeffs() = oracle::random_complex(2 * set->dof(), rng) * 0.1;
    auto const L  = assemble_laplacian(set, FluxParams::conservative());
    auto const Cu = assemble_convection(set, p.a);
    auto const Cv = assemble_convection(set, -p.a);
    Eigen::VectorXcd const full = coupled_rhs_linear(y, p, L, Cu, Cv) +
                                  I * source_interpolant(y, nl).coeffs();
    Eigen::VectorXcd const split = rhs->stiff(y.coeffs()) + rhs->nonstiff(y);
    CHECK((full - split).norm() < 1e-12 * full.norm());
    auto const next = imex_step(y, 1e-3, *rhs, ImexTableau::ssp3_433());
    CHECK(next.unknowns() == 2);
    CHECK(std::isfinite(next.coeffs().norm()));
  }
}
