// Acceptance report: one PASS/FAIL line per criterion, with the measured
// numbers shown above it. Usage: acceptance [--strict] [criterion ...]
#include "dense.hpp"
#include "oracles.hpp"

#include "mrdg/app.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>

using namespace mrdg;

namespace
{
constexpr double pi = std::numbers::pi;
cplx const I(0.0, 1.0);

struct Outcome
{
  bool pass = true;
  std::string summary;
};

void note(char const *fmt, auto... args)
{
  std::printf("    ");
  std::printf(fmt, args...);
  std::printf("\n");
  std::fflush(stdout);
}

bool within_factor(double measured, double reference, double factor)
{
  return measured <= factor * reference && measured >= reference / factor;
}

bool within_fraction(double measured, double reference, double frac)
{
  return std::abs(measured - reference) <= frac * reference;
}

// ---------------------------------------------------------------------------
// 1. sparse-grid accuracy table, d = 2

struct SparseRow
{
  int k, N;
  double re, im;
};

Outcome sparse_table()
{
  std::vector<SparseRow> const reference{
      {2, 3, 3.20e-02, 4.33e-02}, {2, 4, 7.91e-03, 1.43e-02}, {2, 5, 7.74e-04, 7.77e-04},
      {2, 6, 1.88e-04, 2.66e-04}, {2, 7, 1.46e-05, 1.47e-05}, {3, 3, 9.82e-03, 2.67e-02},
      {3, 4, 1.96e-04, 2.29e-04}, {3, 5, 2.05e-05, 1.46e-05}, {3, 6, 2.60e-06, 9.40e-07},
      {3, 7, 5.99e-08, 5.89e-08}};
  auto const problem = make_problem("accuracy2d");
  Outcome out;
  int bad_err = 0, bad_order = 0;
  std::vector<ErrorPair> measured;
  for (auto const &row : reference)
  {
    auto cfg     = default_config("accuracy2d");
    cfg.grid     = GridMode::sparse;
    cfg.k        = row.k;
    cfg.N        = row.N;
    cfg.exponent = row.k == 3 ? 4.0 / 3.0 : 1.0;
    cfg.t_final  = 0.1;
    auto const rep = run(cfg, problem);
    auto const e   = rep.errors.at(0);
    measured.push_back(e);
    bool const ok = within_factor(e.re, row.re, 3) && within_factor(e.im, row.im, 3);
    bad_err += !ok;
    note("k=%d N=%d  re %.3e (reference %.2e)  im %.3e (reference %.2e)%s", row.k, row.N, e.re,
         row.re, e.im, row.im, ok ? "" : "  <- outside factor 3");
  }
  for (std::size_t i = 1; i < reference.size(); ++i)
  {
    if (reference[i].k != reference[i - 1].k)
      continue;
    double const o_re  = std::log2(measured[i - 1].re / measured[i].re);
    double const o_im  = std::log2(measured[i - 1].im / measured[i].im);
    double const p_re  = std::log2(reference[i - 1].re / reference[i].re);
    double const p_im  = std::log2(reference[i - 1].im / reference[i].im);
    bool const ok      = std::abs(o_re - p_re) <= 0.5 && std::abs(o_im - p_im) <= 0.5;
    bad_order += !ok;
    note("k=%d N=%d order re %.2f (reference %.2f)  im %.2f (reference %.2f)%s", reference[i].k,
         reference[i].N, o_re, p_re, o_im, p_im, ok ? "" : "  <- outside 0.5");
  }
  out.pass = bad_err == 0 && bad_order == 0;
  std::ostringstream s;
  s << bad_err << " of 10 rows outside factor 3, " << bad_order << " of 8 orders outside 0.5";
  out.summary = s.str();
  return out;
}

// ---------------------------------------------------------------------------
// 2. adaptive accuracy table, d = 2, k = 3

Outcome adaptive_table()
{
  struct Row
  {
    double eps;
    int N;
    long long dof;
    double re, im;
  };
  // N is not given; it is the level that reproduces the time-step-dominated errors
  std::vector<Row> const reference{{1e-2, 4, 320, 1.43e-02, 2.86e-02},
                                 {1e-3, 4, 512, 2.81e-03, 2.81e-03},
                                 {1e-4, 5, 896, 3.08e-04, 3.07e-04},
                                 {1e-5, 6, 1984, 3.63e-05, 3.63e-05}};
  auto const problem = make_problem("accuracy2d");
  int bad = 0;
  std::vector<double> re, im, eps;
  std::vector<long long> dofs;
  for (auto const &row : reference)
  {
    auto cfg     = default_config("accuracy2d");
    cfg.grid     = GridMode::adaptive;
    cfg.k        = 3;
    cfg.N        = row.N;
    cfg.exponent = 1.0;
    cfg.epsilon  = row.eps;
    cfg.eta      = row.eps / 10;
    cfg.t_final  = 0.1;
    auto const rep = run(cfg, problem);
    auto const e   = rep.errors.at(0);
    long long const dof = rep.state.set()->dof();
    bool const ok = within_fraction(double(dof), double(row.dof), 0.25) &&
                    within_factor(e.re, row.re, 3) && within_factor(e.im, row.im, 3);
    bad += !ok;
    re.push_back(e.re);
    im.push_back(e.im);
    eps.push_back(row.eps);
    dofs.push_back(dof);
    note("eps=%.0e N=%d  DoF %lld (reference %lld)  re %.3e (reference %.2e)  im %.3e (reference "
         "%.2e)%s",
         row.eps, row.N, dof, row.dof, e.re, row.re, e.im, row.im, ok ? "" : "  <- outside");
  }
  auto const rr = rates(re, dofs, eps);
  auto const ri = rates(im, dofs, eps);
  int bad_rate  = 0;
  for (std::size_t i = 2; i < reference.size(); ++i)
  {
    bool const ok = std::abs(*rr[i].r_eps - 1.0) <= 0.3 && std::abs(*ri[i].r_eps - 1.0) <= 0.3;
    bad_rate += !ok;
    note("eps=%.0e  R_eps re %.2f  im %.2f  R_DoF re %.2f  im %.2f%s", reference[i].eps,
         *rr[i].r_eps, *ri[i].r_eps, *rr[i].r_dof, *ri[i].r_dof, ok ? "" : "  <- outside");
  }
  Outcome out;
  out.pass = bad == 0 && bad_rate == 0;
  std::ostringstream s;
  s << bad << " of 4 rows outside DoF 25% / error factor 3, " << bad_rate
    << " of 2 R_eps outside 1 +- 0.3";
  out.summary = s.str();
  return out;
}

// ---------------------------------------------------------------------------
// 3. coupled system, k = 3

Outcome coupled_table()
{
  struct Row
  {
    double eps;
    long long dof;
    double ure, uim, vre, vim;
  };
  std::vector<Row> const reference{{1e-2, 60, 6.82e-04, 1.21e-03, 1.44e-03, 1.43e-03},
                                 {1e-3, 84, 8.22e-05, 1.28e-04, 1.49e-04, 1.68e-04},
                                 {1e-4, 136, 1.16e-05, 1.75e-05, 2.16e-05, 3.43e-05}};
  auto const problem = make_problem("coupled_accuracy");
  int bad = 0;
  for (auto const &row : reference)
  {
    auto cfg    = default_config("coupled_accuracy");
    cfg.N       = 10;
    cfg.k       = 3;
    cfg.epsilon = row.eps;
    cfg.eta     = row.eps / 10;
    cfg.t_final = 1.0;
    auto const rep = run(cfg, problem);
    auto const &e  = rep.errors;
    long long const dof = rep.state.set()->dof();
    bool const ok = within_fraction(double(dof), double(row.dof), 0.25) &&
                    within_factor(e[0].re, row.ure, 3) && within_factor(e[0].im, row.uim, 3) &&
                    within_factor(e[1].re, row.vre, 3) && within_factor(e[1].im, row.vim, 3);
    bad += !ok;
    note("eps=%.0e  DoF %lld (reference %lld)", row.eps, dof, row.dof);
    note("  u re %.3e (%.2e, x%.2f)  u im %.3e (%.2e, x%.2f)", e[0].re, row.ure,
         e[0].re / row.ure, e[0].im, row.uim, e[0].im / row.uim);
    note("  v re %.3e (%.2e, x%.2f)  v im %.3e (%.2e, x%.2f)%s", e[1].re, row.vre,
         e[1].re / row.vre, e[1].im, row.vim, e[1].im / row.vim, ok ? "" : "  <- outside");
  }
  Outcome out;
  out.pass = bad == 0;
  out.summary = std::to_string(bad) + " of 3 rows outside DoF 25% / error factor 3";
  return out;
}

// ---------------------------------------------------------------------------
// 4. skew-adjointness of i L

Outcome skewness()
{
  std::mt19937_64 rng(2024);
  std::map<std::tuple<int, int, int, int>, LinearOperator> ops;
  auto op = [&](int d, int N, int k, int flux) -> LinearOperator const & {
    auto key = std::make_tuple(d, N, k, flux);
    auto it  = ops.find(key);
    if (it == ops.end())
      it = ops
               .emplace(key, assemble_laplacian(build_set(GridMode::full, N, k, d),
                                                flux ? FluxParams::dissipative()
                                                     : FluxParams::conservative()))
               .first;
    return it->second;
  };
  double worst_cons = 0.0, worst_diss = -1e300;
  for (int trial = 0; trial < 100; ++trial)
  {
    int const d = 1 + trial % 2;
    int const N = 1 + (trial / 2) % 5;
    int const k = 1 + (trial / 10) % 3;
    auto const set = build_set(GridMode::full, N, k, d);
    HierState u(set, 1, oracle::random_complex(set->dof(), rng));
    double const n2 = u.coeffs().squaredNorm();
    Eigen::VectorXcd const Lu = op(d, N, k, 0).apply(u);
    Eigen::VectorXcd const Du = op(d, N, k, 1).apply(u);
    // Re <i L u, u>
    double const c  = (I * u.coeffs().dot(Lu)).real() / n2;
    double const ds = (I * u.coeffs().dot(Du)).real() / n2;
    worst_cons      = std::max(worst_cons, std::abs(c));
    worst_diss      = std::max(worst_diss, ds);
  }
  note("max |Re<iLu,u>| / |u|^2 = %.2e (conservative), max Re<iLu,u> / |u|^2 = %.2e "
       "(dissipative)",
       worst_cons, worst_diss);
  Outcome out;
  out.pass = worst_cons <= 1e-11 && worst_diss <= 1e-11;
  std::ostringstream s;
  s << "100 random states, full grids N <= 5, d = 1, 2, k = 1..3";
  out.summary = s.str();
  return out;
}

// ---------------------------------------------------------------------------
// 5. fast transforms against dense constructions

Outcome transforms()
{
  std::mt19937_64 rng(99);
  auto f = [](Point const &x) {
    return cplx(std::sin(2 * pi * x[0]) * std::cos(2 * pi * x[1]) + x[0],
                std::exp(x[0] - x[1]));
  };
  double worst_interp = 0.0, worst_proj = 0.0, worst_rec = 0.0;
  int cases = 0;
  for (int d : {1, 2})
    for (int N = 0; N <= (d == 1 ? 4 : 3); ++N)
      for (int k = 1; k <= 3; ++k)
      {
        auto const set = build_set(GridMode::full, N, k, d);
        ++cases;
        // interpolatory forward/inverse
        Eigen::MatrixXcd const B = dense::interp_matrix(*set).cast<cplx>();
        Eigen::VectorXcd const vals = oracle::random_complex(set->dof(), rng);
        Eigen::VectorXcd const fast = from_points(vals, set, 1);
        Eigen::VectorXcd const ref  = B.fullPivLu().solve(vals);
        worst_interp = std::max(worst_interp, (fast - ref).cwiseAbs().maxCoeff());
        Eigen::VectorXcd const back = interp_to_points(ref, set, 1);
        worst_interp = std::max(worst_interp, (back - B * ref).cwiseAbs().maxCoeff());

        // Alpert projection against dense quadrature of f times each basis function
        auto const st = project_l2(f, set, 10);
        for (int e = 0; e < set->size(); ++e)
          for (int i = 0; i < set->block_size(); ++i)
          {
            double re, im;
            if (d == 1)
            {
              re = oracle::integrate(
                  [&](double x) { return f({x, 0.0}).real() * dense::alpert_fn(*set, e, i, {x, 0}); },
                  0, 1, 16);
              im = oracle::integrate(
                  [&](double x) { return f({x, 0.0}).imag() * dense::alpert_fn(*set, e, i, {x, 0}); },
                  0, 1, 16);
            }
            else
            {
              re = oracle::integrate2d(
                  [&](double x, double y) {
                    return f({x, y}).real() * dense::alpert_fn(*set, e, i, {x, y});
                  },
                  8);
              im = oracle::integrate2d(
                  [&](double x, double y) {
                    return f({x, y}).imag() * dense::alpert_fn(*set, e, i, {x, y});
                  },
                  8);
            }
            worst_proj = std::max(worst_proj, std::abs(st.block(0, e)[i] - cplx(re, im)));
          }

        // reconstruction against the direct sum over basis functions
        HierState const r(set, 1, oracle::random_complex(set->dof(), rng));
        std::uniform_real_distribution<double> U(0.0, 1.0);
        for (int p = 0; p < 20; ++p)
        {
          Point const x{U(rng), d == 2 ? U(rng) : 0.0};
          cplx direct = 0.0;
          for (int e = 0; e < set->size(); ++e)
            for (int i = 0; i < set->block_size(); ++i)
              direct += r.block(0, e)[i] * dense::alpert_fn(*set, e, i, x);
          worst_rec = std::max(worst_rec, std::abs(reconstruct(r, 0, x) - direct));
        }
        Eigen::VectorXcd const pv = to_points(r);
        auto const pts            = node_points(*set);
        for (std::size_t n = 0; n < pts.size(); ++n)
        {
          cplx direct = 0.0;
          for (int e = 0; e < set->size(); ++e)
            for (int i = 0; i < set->block_size(); ++i)
              direct += r.block(0, e)[i] * dense::alpert_fn(*set, e, i, pts[n]);
          worst_rec = std::max(worst_rec, std::abs(pv[n] - direct));
        }
      }
  note("%d full grids: interpolation %.2e, projection %.2e, reconstruction %.2e", cases,
       worst_interp, worst_proj, worst_rec);
  Outcome out;
  out.pass    = worst_interp <= 1e-11 && worst_proj <= 1e-11 && worst_rec <= 1e-11;
  out.summary = "max elementwise deviation from dense constructions <= 1e-11";
  return out;
}

// ---------------------------------------------------------------------------
// 6. IMEX order on the linear Schroedinger plane wave

Outcome imex_order()
{
  double const two_pi = 2.0 * pi;
  auto const set = build_set(GridMode::full, 4, 3, 1);
  auto const rhs = make_nls_rhs(set, FluxParams::conservative(), 1.0, Nonlinearity::none());
  auto const pw  = project_l2([&](Point const &x) { return std::exp(I * two_pi * x[0]); }, set);
  // discrete eigenvector nearest the plane wave: its exact flow is a phase rotation
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(Eigen::MatrixXcd(rhs->laplacian().matrix));
  Eigen::Index best = 0;
  (eig.eigenvalues().array() + two_pi * two_pi).abs().minCoeff(&best);
  double const lambda = eig.eigenvalues()[best];
  Eigen::VectorXcd c  = Eigen::VectorXcd::Zero(set->dof());
  for (Eigen::Index j = 0; j < set->dof(); ++j)
    if (std::abs(eig.eigenvalues()[j] - lambda) < 1e-6)
      c += eig.eigenvectors().col(j) * eig.eigenvectors().col(j).dot(pw.coeffs());
  HierState const u0(set, 1, c);
  double const T = 0.1;
  Eigen::VectorXcd const ref = std::exp(I * lambda * T) * c;
  auto const tab = ImexTableau::from_name(RunConfig{}.tableau);
  std::vector<double> errs;
  for (int steps : {10, 20, 40, 80})
  {
    HierState u = u0;
    for (int s = 0; s < steps; ++s)
      u = imex_step(u, T / steps, *rhs, tab);
    errs.push_back((u.coeffs() - ref).norm());
  }
  Outcome out;
  std::ostringstream s;
  s << tab.name << " slopes";
  for (std::size_t i = 1; i < errs.size(); ++i)
  {
    double const slope = std::log2(errs[i - 1] / errs[i]);
    out.pass           = out.pass && std::abs(slope - 3.0) <= 0.2;
    s << ' ' << std::fixed;
    s.precision(3);
    s << slope;
  }
  note("errors %.3e %.3e %.3e %.3e", errs[0], errs[1], errs[2], errs[3]);
  out.summary = s.str();
  return out;
}

// ---------------------------------------------------------------------------
// 7. single soliton tracking

Outcome soliton()
{
  auto const problem = make_problem("soliton1");
  auto cfg           = default_config("soliton1");
  cfg.epsilon        = 1e-4;
  cfg.eta            = 1e-5;
  cfg.N              = 8;
  cfg.t_final        = 2.0;
  long long const full_dof = build_set(GridMode::full, cfg.N, cfg.k, 1)->dof();
  double const cell        = std::ldexp(1.0, -cfg.N);
  long long max_dof        = 0;
  double worst             = 0.0;
  int checked              = 0;
  auto observer = [&](double t, HierState const &s) {
    max_dof = std::max(max_dof, s.set()->dof());
    for (double target : {0.5, 1.0, 2.0})
    {
      if (std::abs(t - target) > 1e-9)
        continue;
      double best = -1.0, xb = 0.0;
      int const samples = 1 << 13;
      for (int i = 0; i < samples; ++i)
      {
        double const x = (i + 0.5) / samples;
        double const a = std::abs(reconstruct(s, 0, {x, 0.0}));
        if (a > best)
        {
          best = a;
          xb   = x;
        }
      }
      // peak of sech(X - x0 - 4t) with X = M(x - 1/2), x0 = 25
      double const exact = std::fmod(0.5 + (25.0 + 4.0 * t) / problem.M, 1.0);
      double dist        = std::abs(xb - exact);
      dist               = std::min(dist, 1.0 - dist);
      worst              = std::max(worst, dist);
      ++checked;
      note("t=%.1f  peak %.5f  analytic %.5f  |u_h| %.4f  DoF %lld", t, xb, exact, best,
           s.set()->dof());
    }
  };
  auto const rep = run(cfg, problem, observer);
  note("max DoF %lld of %lld (full grid), %d steps", max_dof, full_dof, rep.steps);
  Outcome out;
  out.pass = rep.status == RunStatus::completed && checked == 3 && worst <= 2 * cell &&
             max_dof < 0.2 * double(full_dof);
  std::ostringstream s;
  s << "peak offset " << worst / cell << " finest cells (limit 2), max DoF "
    << 100.0 * double(max_dof) / double(full_dof) << "% of full (limit 20%)";
  out.summary = s.str();
  return out;
}

// ---------------------------------------------------------------------------
// 8. finite-time blow-up, d = 2

Outcome blowup()
{
  auto const problem = make_problem("blowup2d_b");
  auto const cfg     = default_config("blowup2d_b");
  auto const rep     = run(cfg, problem);
  Outcome out;
  double const t_guard = rep.time + rep.dt;
  auto const &h        = rep.history;
  std::size_t const tail = std::max<std::size_t>(2, h.size() / 5);
  bool monotone          = true;
  for (std::size_t i = h.size() - tail + 1; i < h.size(); ++i)
    monotone = monotone && h[i].max_abs > h[i - 1].max_abs;

  auto const &set = *rep.state.set();
  int top         = 0;
  for (auto const &key : set.keys())
    top = std::max(top, level_max(key));
  int finest = 0, central = 0;
  for (auto const &key : set.keys())
  {
    if (level_max(key) != top)
      continue;
    ++finest;
    bool inside = true;
    for (int m = 0; m < 2; ++m)
    {
      auto const s   = support1d(key.level[m], key.cell[m]);
      double const c = 0.5 * (s[0] + s[1]);
      inside         = inside && std::abs(c - 0.5) <= 0.25;
    }
    central += inside;
  }
  double const frac = finest ? double(central) / finest : 0.0;
  note("status %s at t=%.5f (%d steps, dt %.3e), max|u_h| %.3e, DoF %lld",
       to_string(rep.status).c_str(), rep.time, rep.steps, rep.dt,
       h.empty() ? 0.0 : h.back().max_abs, set.dof());
  note("stop reason: %s", rep.message.c_str());
  note("final %zu steps monotone: %s; finest level %d: %d of %d elements central", tail,
       monotone ? "yes" : "no", top, central, finest);
  out.pass = rep.status == RunStatus::blowup && t_guard >= 0.03 && t_guard <= 0.05 && monotone &&
             frac >= 0.8;
  std::ostringstream s;
  s << "guard at t = " << t_guard << " (window [0.03, 0.05]), "
    << (monotone ? "monotone" : "not monotone") << " growth, " << 100.0 * frac
    << "% of finest elements central";
  out.summary = s.str();
  return out;
}

struct Criterion
{
  int id;
  char const *name;
  std::function<Outcome()> fn;
};
} // namespace

int main(int argc, char **argv)
{
  std::vector<Criterion> const all{{1, "sparse-grid accuracy table (d=2)", sparse_table},
                                   {2, "adaptive accuracy table (d=2, k=3)", adaptive_table},
                                   {3, "coupled system accuracy table (k=3)", coupled_table},
                                   {4, "skew-adjointness of the flux forms", skewness},
                                   {5, "transforms against dense oracles", transforms},
                                   {6, "IMEX order on the plane wave", imex_order},
                                   {7, "single soliton tracking", soliton},
                                   {8, "finite-time blow-up (d=2)", blowup}};
  bool strict = false;
  std::set<int> chosen;
  for (int i = 1; i < argc; ++i)
  {
    std::string const a = argv[i];
    if (a == "--strict")
      strict = true;
    else
      chosen.insert(std::stoi(a));
  }
  int failed = 0, ran = 0;
  for (auto const &c : all)
  {
    if (!chosen.empty() && !chosen.contains(c.id))
      continue;
    std::printf("criterion %d: %s\n", c.id, c.name);
    std::fflush(stdout);
    auto const t0 = std::chrono::steady_clock::now();
    Outcome o;
    try
    {
      o = c.fn();
    }
    catch (std::exception const &e)
    {
      o = {false, std::string("exception: ") + e.what()};
    }
    double const sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    ++ran;
    std::printf("[%s] %d %s: %s (%.0f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name,
                o.summary.c_str(), sec);
    std::fflush(stdout);
  }
  std::printf("%d of %d criteria failed\n", failed, ran);
  return strict && failed ? 1 : 0;
}
