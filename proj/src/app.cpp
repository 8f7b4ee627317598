#include "mrdg/app.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace mrdg
{
namespace
{
constexpr double pi = std::numbers::pi;
cplx const I(0.0, 1.0);

double sech(double x) { return 1.0 / std::cosh(x); }

// sum over periodic images of a profile defined on the real line
std::function<cplx(double)> periodize(std::function<cplx(double)> g)
{
  return [g = std::move(g)](double x) {
    cplx s = 0.0;
    for (int j = -2; j <= 2; ++j)
      s += g(x + j);
    return s;
  };
}

struct CoupledSoliton
{
  double a, c, shift; // amplitude parameter, velocity, centre offset
};

// sqrt(2a/(1+beta)) sech(sqrt(2a)(X - ct)) exp(i((c -+ alpha) X - ((c^2-alpha^2)/2 - a) t))
cplx coupled_profile(CoupledSoliton const &s, double alpha, double beta, double X, double t,
                     double sign)
{
  double const amp   = std::sqrt(2.0 * s.a / (1.0 + beta));
  double const phase = (s.c + sign * alpha) * X - (0.5 * (s.c * s.c - alpha * alpha) - s.a) * t;
  return amp * sech(std::sqrt(2.0 * s.a) * (X - s.c * t)) * std::exp(I * phase);
}

ProblemSpec coupled_problem(std::string name, double M, double centre,
                            std::vector<CoupledSoliton> solitons, bool exact)
{
  double const alpha = 0.5, beta = 2.0 / 3.0;
  ProblemSpec p;
  p.name         = std::move(name);
  p.equation     = Equation::coupled;
  p.dim          = 1;
  p.M            = M;
  p.alpha        = alpha;
  p.c_lap        = 1.0 / (2.0 * M * M);
  p.nonlinearity = Nonlinearity::coupled(beta);
  p.coupled      = CoupledLinear{alpha / M, p.c_lap, 0.0, 0.0};
  auto field = [=](double sign, double t) {
    return periodize([=](double x) {
      cplx s = 0.0;
      for (auto const &sol : solitons)
        s += coupled_profile(sol, alpha, beta, M * (x - centre - sol.shift), t, sign);
      return s;
    });
  };
  auto const u0 = field(-1.0, 0.0), v0 = field(1.0, 0.0);
  p.initial = {[u0](Point const &x) { return u0(x[0]); },
               [v0](Point const &x) { return v0(x[0]); }};
  if (exact)
    p.exact = [field](Point const &x, double t) -> std::vector<cplx> {
      return {field(-1.0, t)(x[0]), field(1.0, t)(x[0])};
    };
  return p;
}
} // namespace

std::vector<std::string> problem_names()
{
  return {"accuracy1d",       "accuracy2d",       "soliton1",         "soliton2",
          "bound_state3",     "bound_state4",     "bound_state5",     "coupled_accuracy",
          "coupled_soliton1", "coupled_soliton2", "coupled_soliton3", "singular2d",
          "blowup2d_a",       "blowup2d_b"};
}

ProblemSpec make_problem(std::string const &name)
{
  ProblemSpec p;
  p.name = name;
  if (name == "accuracy1d" || name == "accuracy2d")
  {
    int const d        = name == "accuracy1d" ? 1 : 2;
    double const omega = 4.0 * d * pi * pi - 2.0;
    p.dim              = d;
    p.nonlinearity     = Nonlinearity::cubic_quintic();
    auto u = [d, omega](Point const &x, double t) {
      double s = x[0] + (d == 2 ? x[1] : 0.0);
      return std::exp(I * (2.0 * pi * s - omega * t));
    };
    p.initial = {[u](Point const &x) { return u(x, 0.0); }};
    p.exact   = [u](Point const &x, double t) -> std::vector<cplx> { return {u(x, t)}; };
    return p;
  }
  if (name == "soliton1" || name == "soliton2")
  {
    p.M            = 50.0;
    p.c_lap        = 1.0 / (p.M * p.M);
    p.nonlinearity = Nonlinearity::scaled_cubic(2.0);
    double const M = p.M;
    if (name == "soliton1")
    {
      // sech(X - x0 - 4t) exp(i(2(X - x0) - 3t)), X = M(x - 1/2), x0 = 25
      double const x0 = 25.0;
      auto field = [=](double t) {
        return periodize([=](double x) {
          double const X = M * (x - 0.5) - x0;
          return sech(X - 4.0 * t) * std::exp(I * (2.0 * X - 3.0 * t));
        });
      };
      auto const u0 = field(0.0);
      p.initial     = {[u0](Point const &x) { return u0(x[0]); }};
      p.exact = [field](Point const &x, double t) -> std::vector<cplx> {
        return {field(t)(x[0])};
      };
    }
    else
    {
      auto const u0 = periodize([M](double x) {
        cplx s = 0.0;
        for (auto [c, xj] : {std::pair{4.0, -10.0}, std::pair{-4.0, 10.0}})
        {
          double const X = M * (x - 0.5) - xj;
          s += sech(X) * std::exp(I * (0.5 * c * X));
        }
        return s;
      });
      p.initial = {[u0](Point const &x) { return u0(x[0]); }};
    }
    return p;
  }
  if (name.rfind("bound_state", 0) == 0)
  {
    int const L = name.size() == 12 ? name[11] - '0' : -1;
    if (L < 3 || L > 5)
      throw std::invalid_argument("unknown problem: " + name);
    p.M            = 30.0;
    p.c_lap        = 1.0 / (p.M * p.M);
    p.nonlinearity = Nonlinearity::scaled_cubic(2.0 * L * L);
    double const M = p.M;
    auto const u0  = periodize([M](double x) { return cplx(sech(M * (x - 0.5))); });
    p.initial      = {[u0](Point const &x) { return u0(x[0]); }};
    return p;
  }
  if (name == "coupled_accuracy")
    return coupled_problem(name, 50.0, 0.5, {{1.0, 1.0, 0.0}}, true);
  if (name == "coupled_soliton1")
    return coupled_problem(name, 100.0, 0.2, {{1.0, 1.0, 0.0}}, true);
  if (name == "coupled_soliton2")
    return coupled_problem(name, 100.0, 0.2, {{1.0, 1.0, 0.0}, {0.5, 0.1, 0.25}}, false);
  if (name == "coupled_soliton3")
    return coupled_problem(name, 100.0, 0.2,
                           {{1.2, 1.0, 0.0}, {0.72, 0.1, 0.25}, {0.36, -1.0, 0.5}}, false);
  if (name == "singular2d" || name == "blowup2d_a" || name == "blowup2d_b")
  {
    p.dim          = 2;
    p.nonlinearity = Nonlinearity::cubic();
    if (name == "singular2d")
    {
      p.M            = 2.0 * pi;
      double const M = p.M;
      p.initial      = {[M](Point const &x) {
        return cplx((1.0 + std::sin(M * x[0])) * (2.0 + std::sin(M * x[1])));
      }};
    }
    else if (name == "blowup2d_a")
    {
      p.M            = 2.0 * pi;
      double const M = p.M;
      p.initial      = {[M](Point const &x) {
        double const X = M * (x[0] - 0.5), Y = M * (x[1] - 0.5);
        return cplx(2.0 + 0.01 * std::sin(X + pi / 4) * std::sin(Y + pi / 4));
      }};
    }
    else
    {
      p.M            = 10.0;
      double const M = p.M;
      p.initial      = {[M](Point const &x) {
        cplx s = 0.0;
        for (int i = -1; i <= 1; ++i)
          for (int j = -1; j <= 1; ++j)
          {
            double const X = M * (x[0] + i - 0.5), Y = M * (x[1] + j - 0.5);
            s += 6.0 * std::sqrt(2.0) * std::exp(-X * X - Y * Y);
          }
        return s;
      }};
    }
    p.c_lap = 1.0 / (p.M * p.M);
    return p;
  }
  throw std::invalid_argument("unknown problem: " + name);
}

void RunConfig::validate() const
{
  if (k < 1 || k > 3)
    throw std::invalid_argument("config: k must be 1, 2 or 3");
  if (N < 0)
    throw std::invalid_argument("config: N must be nonnegative");
  if (grid == GridMode::adaptive && !(epsilon > eta && eta >= 0.0))
    throw std::invalid_argument("config: adaptive mode needs epsilon > eta >= 0");
  if (!(t_final >= 0.0))
    throw std::invalid_argument("config: t_final must be nonnegative");
  if (!(cfl > 0.0) && !(dt > 0.0))
    throw std::invalid_argument("config: cfl must be positive");
  if (!(guard > 0.0))
    throw std::invalid_argument("config: guard must be positive");
}

RunConfig default_config(std::string const &problem)
{
  make_problem(problem); // rejects unknown names
  RunConfig c;
  c.problem = problem;
  c.grid    = GridMode::adaptive;
  c.k       = 3;
  c.N       = 8;
  auto set_adapt = [&](int N, double eps, double eta, double t, std::vector<double> snaps) {
    c.N         = N;
    c.epsilon   = eps;
    c.eta       = eta;
    c.t_final   = t;
    c.snapshots = std::move(snaps);
  };
  if (problem == "accuracy1d")
    set_adapt(8, 1e-4, 1e-5, 1.0, {});
  else if (problem == "accuracy2d")
  {
    c.grid     = GridMode::sparse;
    c.N        = 7;
    c.exponent = 4.0 / 3.0;
    c.t_final  = 0.1;
  }
  else if (problem == "soliton1")
    set_adapt(8, 1e-4, 1e-5, 2.0, {0.0, 2.0});
  else if (problem == "soliton2")
    set_adapt(8, 1e-4, 1e-5, 5.0, {0.0, 2.5, 5.0});
  else if (problem == "bound_state3" || problem == "bound_state4")
    set_adapt(9, 1e-4, 1e-5, 0.6, {0.0, 0.4, 0.6});
  else if (problem == "bound_state5")
    set_adapt(10, 1e-4, 1e-5, 0.6, {0.0, 0.4, 0.6});
  else if (problem == "coupled_accuracy")
    set_adapt(10, 1e-4, 1e-5, 1.0, {});
  else if (problem == "coupled_soliton1")
    set_adapt(9, 1e-4, 5e-5, 50.0, {0.0, 20.0, 50.0});
  else if (problem == "coupled_soliton2" || problem == "coupled_soliton3")
    set_adapt(9, 1e-4, 4e-5, 50.0, {0.0, 20.0, 50.0});
  else if (problem == "singular2d")
    set_adapt(7, 1e-4, 1e-5, 0.108, {0.0, 0.108});
  else if (problem == "blowup2d_a")
    set_adapt(7, 1e-4, 1e-5, 1.5813, {0.0, 1.5813});
  else if (problem == "blowup2d_b")
    set_adapt(9, 1e-3, 1e-4, 0.06, {0.0, 0.04});
  return c;
}

RunConfig parse_config(std::istream &in)
{
  namespace pt = boost::property_tree;
  pt::ptree tree;
  pt::read_ini(in, tree);
  auto c = default_config(tree.get<std::string>("problem.name", "accuracy1d"));
  if (auto v = tree.get_optional<std::string>("grid.mode"))
    c.grid = grid_mode_from_string(*v);
  c.N    = tree.get("grid.N", c.N);
  c.k    = tree.get("grid.k", c.k);
  c.flux = tree.get("flux.type", c.flux);
  c.tableau  = tree.get("time.tableau", c.tableau);
  c.cfl      = tree.get("time.cfl", c.cfl);
  c.exponent = tree.get("time.exponent", c.exponent);
  c.dt       = tree.get("time.dt", c.dt);
  c.t_final  = tree.get("time.tfinal", c.t_final);
  if (auto v = tree.get_optional<std::string>("time.snapshots"))
  {
    c.snapshots.clear();
    std::istringstream s(*v);
    for (std::string item; std::getline(s, item, ',');)
      if (item.find_first_not_of(" \t") != std::string::npos)
        c.snapshots.push_back(std::stod(item));
  }
  c.epsilon = tree.get("adapt.epsilon", c.epsilon);
  c.eta     = tree.get("adapt.eta", c.eta);
  if (auto v = tree.get_optional<std::string>("adapt.aggregation"))
  {
    if (*v == "max")
      c.aggregation = Aggregation::max;
    else if (*v == "sum")
      c.aggregation = Aggregation::sum;
    else
      throw std::invalid_argument("config: unknown aggregation " + *v);
  }
  c.output_dir = tree.get("output.dir", c.output_dir);
  c.solver.tol              = tree.get("solver.tol", c.solver.tol);
  c.solver.max_iter         = tree.get("solver.max_iter", c.solver.max_iter);
  c.solver.restart          = tree.get("solver.restart", c.solver.restart);
  c.solver.direct_threshold = tree.get("solver.direct_threshold", c.solver.direct_threshold);
  c.solver.krylov_budget    = tree.get("solver.krylov_budget", c.solver.krylov_budget);
  c.solver.adaptive_direct_threshold =
      tree.get("solver.adaptive_direct_threshold", c.solver.adaptive_direct_threshold);
  c.guard       = tree.get("solver.guard", c.guard);
  c.init_sweeps = tree.get("adapt.init_sweeps", c.init_sweeps);
  c.validate();
  return c;
}

RunConfig load_config(std::filesystem::path const &path)
{
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open config " + path.string());
  return parse_config(in);
}

double time_step(RunConfig const &cfg, ProblemSpec const &problem)
{
  if (cfg.dt > 0.0)
    return cfg.dt;
  if (problem.equation == Equation::coupled)
    return choose_dt_coupled(cfg.N, cfg.cfl, problem.M, problem.alpha);
  return choose_dt(cfg.N, cfg.cfl, cfg.exponent);
}

namespace
{
AdaptParams adapt_params(RunConfig const &cfg)
{
  AdaptParams p;
  p.epsilon     = cfg.epsilon;
  p.eta         = cfg.eta;
  p.max_level   = cfg.N;
  p.aggregation = cfg.aggregation;
  return p;
}

bool same_keys(ElementSet const &a, ElementSet const &b)
{
  if (a.size() != b.size())
    return false;
  for (int e = 0; e < a.size(); ++e)
    if (!(a.key(e) == b.key(e)))
      return false;
  return true;
}
} // namespace

HierState initial_state(RunConfig const &cfg, ProblemSpec const &problem, int *sweeps)
{
  if (sweeps)
    *sweeps = 0;
  if (cfg.grid != GridMode::adaptive)
    return project_l2(problem.initial, build_set(cfg.grid, cfg.N, cfg.k, problem.dim));

  auto const params = adapt_params(cfg);
  auto const start  = build_set(GridMode::sparse, cfg.N, cfg.k, problem.dim);
  SetPtr set = make_set(problem.dim, cfg.k, cfg.N, GridMode::adaptive,
                        {start->keys().begin(), start->keys().end()});
  auto u = project_l2(problem.initial, set);
  // threshold, refine, re-project until the element set stops changing
  for (int s = 0; s < cfg.init_sweeps; ++s)
  {
    auto const refined = project_l2(problem.initial, refine(u, params).set());
    auto const next    = coarsen(refined, params);
    if (sweeps)
      *sweeps = s + 1;
    bool const done = same_keys(*next.set(), *u.set());
    u               = project_l2(problem.initial, next.set());
    if (done)
      break;
  }
  return u;
}

double max_abs(HierState const &state)
{
  auto const v = to_points(state);
  double m     = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
  {
    double const a = std::abs(v[i]);
    if (!(a <= m))
      m = a; // NaN propagates
  }
  return m;
}

namespace
{
double total_norm(HierState const &state) { return state.coeffs().norm(); }

// number of uniform cells per dimension used for error and plot sampling
int sample_level(HierState const &state) { return state.set()->top_level(); }
} // namespace

ErrorPair l2_error(HierState const &state, int q, Field const &exact)
{
  auto const &set  = *state.set();
  int const level  = sample_level(state);
  auto const grid  = to_grid(state, q, level);
  auto const rule  = gauss_rule(set.degree() + 2);
  int const n      = grid.cells_per_dim();
  double const h   = std::ldexp(1.0, -level);
  double sre = 0.0, sim = 0.0;
  if (set.dim() == 1)
  {
    for (int c = 0; c < n; ++c)
      for (std::size_t a = 0; a < rule.nodes.size(); ++a)
      {
        Point const x{(c + rule.nodes[a]) * h, 0.0};
        cplx const d   = grid.eval({c, 0}, x) - exact(x);
        double const w = rule.weights[a] * h;
        sre += w * d.real() * d.real();
        sim += w * d.imag() * d.imag();
      }
  }
  else
  {
    for (int c0 = 0; c0 < n; ++c0)
      for (int c1 = 0; c1 < n; ++c1)
        for (std::size_t a = 0; a < rule.nodes.size(); ++a)
          for (std::size_t b = 0; b < rule.nodes.size(); ++b)
          {
            Point const x{(c0 + rule.nodes[a]) * h, (c1 + rule.nodes[b]) * h};
            cplx const d   = grid.eval({c0, c1}, x) - exact(x);
            double const w = rule.weights[a] * rule.weights[b] * h * h;
            sre += w * d.real() * d.real();
            sim += w * d.imag() * d.imag();
          }
  }
  return {std::sqrt(sre), std::sqrt(sim)};
}

std::vector<ErrorPair> l2_errors(HierState const &state, ExactFn const &exact, double t)
{
  if (!exact)
    throw std::invalid_argument("l2_errors: problem has no exact solution");
  std::vector<ErrorPair> out;
  for (int q = 0; q < state.unknowns(); ++q)
    out.push_back(l2_error(state, q, [&](Point const &x) { return exact(x, t)[q]; }));
  return out;
}

RunReport run(RunConfig const &cfg, ProblemSpec const &problem, StepObserver const &observer)
{
  cfg.validate();
  if (problem.equation == Equation::coupled && problem.dim != 1)
    throw std::invalid_argument("run: the coupled system is one-dimensional");
  auto const flux  = FluxParams::from_name(cfg.flux);
  auto const tab   = ImexTableau::from_name(cfg.tableau);
  double const gs  = cfg.guard * cfg.guard;
  auto const &nl   = problem.nonlinearity;
  SolverOptions solver = cfg.solver;
  if (cfg.grid == GridMode::adaptive)
    solver.direct_threshold = std::min(solver.direct_threshold, solver.adaptive_direct_threshold);
  AdaptiveStepper::RhsFactory factory = [&](SetPtr const &set) {
    if (problem.equation == Equation::coupled)
      return make_coupled_rhs(set, flux, problem.coupled, nl, solver, gs);
    return make_nls_rhs(set, flux, problem.c_lap, nl, solver, gs);
  };

  RunReport rep;
  HierState u = initial_state(cfg, problem, &rep.init_sweeps);

  // uniform steps that land on t_final
  double dt = time_step(cfg, problem);
  int nsteps = cfg.t_final > 0.0 ? static_cast<int>(std::ceil(cfg.t_final / dt - 1e-9)) : 0;
  rep.dt     = nsteps > 0 ? cfg.t_final / nsteps : dt;
  dt         = rep.dt;

  std::vector<double> snaps = cfg.snapshots;
  std::sort(snaps.begin(), snaps.end());
  std::size_t next_snap = 0;
  auto record = [&](double t, HierState const &s) {
    rep.history.push_back({t, s.set()->dof(), total_norm(s), max_abs(s)});
    while (next_snap < snaps.size() && t >= snaps[next_snap] - 0.5 * dt)
    {
      if (rep.snapshots.empty() || rep.snapshots.back().t != t)
        rep.snapshots.push_back({t, s});
      ++next_snap;
    }
    if (observer)
      observer(t, s);
  };
  record(0.0, u);

  std::unique_ptr<AdaptiveStepper> stepper;
  std::shared_ptr<SplitRhs> rhs;
  if (cfg.grid == GridMode::adaptive)
    stepper = std::make_unique<AdaptiveStepper>(factory, tab, adapt_params(cfg));

  double t = 0.0;
  for (int n = 0; n < nsteps; ++n)
  {
    HierState next;
    try
    {
      if (stepper)
        next = stepper->step(u, dt);
      else
      {
        if (!rhs)
          rhs = factory(u.set());
        next = imex_step(u, dt, *rhs, tab);
      }
    }
    catch (BlowUp const &)
    {
      rep.status  = RunStatus::blowup;
      rep.message = "nonlinear source exceeded the guard";
      break;
    }
    catch (SolverFailure const &e)
    {
      // a stagnating implicit solve marks the approach to a singularity; a
      // non-finite residual or a failed factorization is a genuine failure
      bool const stall = std::isfinite(e.residual());
      rep.status       = stall ? RunStatus::blowup : RunStatus::solver_failure;
      rep.message      = stall ? std::string("implicit solver stalled: ") + e.what() : e.what();
      break;
    }
    double const m = max_abs(next);
    if (!(m <= cfg.guard))
    {
      rep.status  = RunStatus::blowup;
      rep.message = "max |u_h| exceeded the guard";
      break;
    }
    t = (n + 1 == nsteps) ? cfg.t_final : (n + 1) * dt;
    u = std::move(next);
    ++rep.steps;
    record(t, u);
  }
  rep.time = t;
  if (rep.status != RunStatus::completed &&
      (rep.snapshots.empty() || rep.snapshots.back().t != t))
    rep.snapshots.push_back({t, u});
  if (problem.has_exact())
    rep.errors = l2_errors(u, problem.exact, t);
  rep.state = std::move(u);
  return rep;
}

std::vector<RateRow> rates(std::vector<double> const &errors,
                           std::vector<long long> const &dofs,
                           std::vector<double> const &epsilons)
{
  std::vector<RateRow> out(errors.size());
  for (std::size_t i = 1; i < errors.size(); ++i)
  {
    double const le = std::log(errors[i] / errors[i - 1]);
    if (i < dofs.size())
      out[i].r_dof = -le / std::log(double(dofs[i]) / double(dofs[i - 1]));
    if (i < epsilons.size())
      out[i].r_eps = le / std::log(epsilons[i] / epsilons[i - 1]);
  }
  return out;
}

std::vector<std::optional<double>> orders(std::vector<double> const &errors)
{
  std::vector<std::optional<double>> out(errors.size());
  for (std::size_t i = 1; i < errors.size(); ++i)
    out[i] = std::log2(errors[i - 1] / errors[i]);
  return out;
}

namespace
{
std::ostream &sci(std::ostream &out)
{
  return out << std::scientific << std::setprecision(17);
}

void opt(std::ostream &out, std::optional<double> const &v)
{
  out << ',';
  if (v)
    out << *v;
}

std::string suffix(int q, int unknowns)
{
  if (unknowns == 1)
    return "";
  return q == 0 ? "_u" : "_v";
}
} // namespace

void write_errors(std::ostream &out, std::vector<ErrorRow> const &rows, bool epsilon_sweep,
                  int unknowns)
{
  sci(out);
  out << (epsilon_sweep ? "epsilon" : "N") << ",dof";
  for (int q = 0; q < unknowns; ++q)
    out << ",err_re" << suffix(q, unknowns) << ",err_im" << suffix(q, unknowns);
  for (int q = 0; q < unknowns; ++q)
    for (char const *part : {"re", "im"})
    {
      if (epsilon_sweep)
        out << ",rdof_" << part << suffix(q, unknowns) << ",reps_" << part
            << suffix(q, unknowns);
      else
        out << ",order_" << part << suffix(q, unknowns);
    }
  out << '\n';

  std::vector<long long> dofs;
  std::vector<double> params;
  for (auto const &r : rows)
  {
    dofs.push_back(r.dof);
    params.push_back(r.param);
  }
  // rate columns per unknown and part
  std::vector<std::vector<RateRow>> rr;
  std::vector<std::vector<std::optional<double>>> oo;
  for (int q = 0; q < unknowns; ++q)
    for (int part = 0; part < 2; ++part)
    {
      std::vector<double> e;
      for (auto const &r : rows)
        e.push_back(part == 0 ? r.errors.at(q).re : r.errors.at(q).im);
      rr.push_back(rates(e, dofs, params));
      oo.push_back(orders(e));
    }
  for (std::size_t i = 0; i < rows.size(); ++i)
  {
    auto const &r = rows[i];
    if (epsilon_sweep)
      out << r.param;
    else
      out << static_cast<long long>(r.param);
    out << ',' << r.dof;
    for (int q = 0; q < unknowns; ++q)
      out << ',' << r.errors.at(q).re << ',' << r.errors.at(q).im;
    for (std::size_t c = 0; c < rr.size(); ++c)
    {
      if (epsilon_sweep)
      {
        opt(out, rr[c][i].r_dof);
        opt(out, rr[c][i].r_eps);
      }
      else
        opt(out, oo[c][i]);
    }
    out << '\n';
  }
}

void write_history(std::ostream &out, std::vector<HistoryRow> const &history)
{
  sci(out);
  out << "t,dof,norm,max_abs\n";
  for (auto const &h : history)
    out << h.t << ',' << h.dof << ',' << h.norm << ',' << h.max_abs << '\n';
}

void write_solution(std::ostream &out, HierState const &state, int level)
{
  sci(out);
  auto const &set = *state.set();
  int const d     = set.dim();
  int const nq    = state.unknowns();
  int const L     = sample_level(state);
  std::vector<LegendreGrid> grids;
  for (int q = 0; q < nq; ++q)
    grids.push_back(to_grid(state, q, L));
  int const cells = 1 << L;
  int const npts  = (1 << (level + 1)) + 1;
  out << (d == 1 ? "x" : "x,y");
  for (int q = 0; q < nq; ++q)
    out << ",re" << suffix(q, nq) << ",im" << suffix(q, nq) << ",abs" << suffix(q, nq);
  out << '\n';
  auto cell_of = [&](double x) {
    return std::min(static_cast<int>(x * cells), cells - 1);
  };
  auto emit = [&](Point const &x) {
    out << x[0];
    if (d == 2)
      out << ',' << x[1];
    std::array<int, 2> const c{cell_of(x[0]), d == 2 ? cell_of(x[1]) : 0};
    for (int q = 0; q < nq; ++q)
    {
      cplx const v = grids[q].eval(c, x);
      out << ',' << v.real() << ',' << v.imag() << ',' << std::abs(v);
    }
    out << '\n';
  };
  for (int i = 0; i < npts; ++i)
  {
    double const x = double(i) / (npts - 1);
    if (d == 1)
      emit({x, 0.0});
    else
      for (int j = 0; j < npts; ++j)
        emit({x, double(j) / (npts - 1)});
  }
}

std::string time_stamp(double t)
{
  std::ostringstream s;
  s << std::fixed << std::setprecision(6) << t;
  return s.str();
}

std::string to_string(RunStatus status)
{
  switch (status)
  {
  case RunStatus::completed:
    return "completed";
  case RunStatus::blowup:
    return "blowup";
  case RunStatus::solver_failure:
    return "solver_failure";
  }
  return "unknown";
}

void emit_outputs(RunReport const &report, RunConfig const &cfg,
                  std::filesystem::path const &dir)
{
  std::filesystem::create_directories(dir);
  auto open = [&](std::string const &name) {
    std::ofstream f(dir / name);
    if (!f)
      throw std::runtime_error("cannot write " + (dir / name).string());
    return f;
  };
  {
    auto f = open("history.csv");
    write_history(f, report.history);
  }
  {
    auto f = open("errors.csv");
    int const nq = report.state.set() ? report.state.unknowns() : 1;
    std::vector<ErrorRow> rows;
    bool const eps = cfg.grid == GridMode::adaptive;
    if (!report.errors.empty())
      rows.push_back({eps ? cfg.epsilon : double(cfg.N), report.state.set()->dof(),
                      report.errors});
    write_errors(f, rows, eps, nq);
  }
  auto dump = [&](double t, HierState const &state) {
    auto const stamp = time_stamp(t);
    {
      auto f = open("solution_t" + stamp + ".csv");
      write_solution(f, state, cfg.N);
    }
    auto f = open("elements_t" + stamp + ".csv");
    write_elements(f, *state.set());
  };
  bool final_written = false;
  for (auto const &s : report.snapshots)
  {
    dump(s.t, s.state);
    final_written = final_written || time_stamp(s.t) == time_stamp(report.time);
  }
  // the final state is always written
  if (!final_written && report.state.set())
    dump(report.time, report.state);
}

} // namespace mrdg
