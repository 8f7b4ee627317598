// Command-line driver: runs one registered problem (or a sweep over N or
// epsilon) and writes the CSV outputs.
#include "mrdg/app.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

using namespace mrdg;

namespace
{
std::vector<double> parse_list(std::string const &text)
{
  std::vector<double> out;
  std::istringstream s(text);
  for (std::string item; std::getline(s, item, ',');)
    if (!item.empty())
      out.push_back(std::stod(item));
  return out;
}

int exit_code(RunStatus status)
{
  switch (status)
  {
  case RunStatus::completed:
    return 0;
  case RunStatus::blowup:
    return 2;
  case RunStatus::solver_failure:
    return 3;
  }
  return 1;
}

void summary(std::ostream &out, RunConfig const &cfg, RunReport const &rep)
{
  out << cfg.problem << ": " << to_string(rep.status) << " at t = " << rep.time << " after "
      << rep.steps << " steps (dt = " << rep.dt << "), DoF = " << rep.state.set()->dof();
  for (std::size_t q = 0; q < rep.errors.size(); ++q)
    out << ", L2 error[" << q << "] re = " << rep.errors[q].re << " im = " << rep.errors[q].im;
  if (!rep.message.empty())
    out << " (" << rep.message << ")";
  out << '\n';
}
} // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Adaptive multiresolution ultra-weak DG solver for NLS equations"};
  std::string config_path, problem, grid, flux, tableau, out_dir, sweep_n, sweep_eps,
      snapshots;
  std::optional<int> N, k;
  std::optional<double> epsilon, eta, cfl, exponent, dt, tfinal, guard;
  bool list = false;
  app.add_option("config", config_path, "configuration file (INI)");
  app.add_option("--problem", problem, "registered problem name");
  app.add_option("--grid", grid, "full | sparse | adaptive");
  app.add_option("--N", N, "maximum mesh level");
  app.add_option("--k", k, "polynomial degree (1..3)");
  app.add_option("--flux", flux, "conservative | dissipative");
  app.add_option("--tableau", tableau, "ssp3_433 | ars_443 | euler");
  app.add_option("--epsilon", epsilon, "refinement threshold");
  app.add_option("--eta", eta, "coarsening threshold");
  app.add_option("--cfl", cfl, "CFL number");
  app.add_option("--exponent", exponent, "dt = cfl dx^exponent");
  app.add_option("--dt", dt, "fixed time step");
  app.add_option("--tfinal", tfinal, "final time");
  app.add_option("--snapshots", snapshots, "comma separated snapshot times");
  app.add_option("--guard", guard, "stop when max |u_h| exceeds this");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--sweep-N", sweep_n, "comma separated N values (errors.csv with orders)");
  app.add_option("--sweep-epsilon", sweep_eps,
                 "comma separated epsilon values; eta keeps its ratio to epsilon");
  app.add_flag("--list", list, "print the registered problems");
  CLI11_PARSE(app, argc, argv);

  if (list)
  {
    for (auto const &name : problem_names())
      std::cout << name << '\n';
    return 0;
  }

  try
  {
    RunConfig cfg = config_path.empty() ? default_config(problem.empty() ? "accuracy1d" : problem)
                                        : load_config(config_path);
    if (!problem.empty())
      cfg.problem = problem;
    if (!grid.empty())
      cfg.grid = grid_mode_from_string(grid);
    if (N)
      cfg.N = *N;
    if (k)
      cfg.k = *k;
    if (!flux.empty())
      cfg.flux = flux;
    if (!tableau.empty())
      cfg.tableau = tableau;
    if (epsilon)
      cfg.epsilon = *epsilon;
    if (eta)
      cfg.eta = *eta;
    if (cfl)
      cfg.cfl = *cfl;
    if (exponent)
      cfg.exponent = *exponent;
    if (dt)
      cfg.dt = *dt;
    if (tfinal)
      cfg.t_final = *tfinal;
    if (!snapshots.empty())
      cfg.snapshots = parse_list(snapshots);
    if (guard)
      cfg.guard = *guard;
    if (!out_dir.empty())
      cfg.output_dir = out_dir;
    cfg.validate();
    auto const spec = make_problem(cfg.problem);

    if (sweep_n.empty() && sweep_eps.empty())
    {
      auto const rep = run(cfg, spec);
      summary(std::cout, cfg, rep);
      if (!cfg.output_dir.empty())
        emit_outputs(rep, cfg, cfg.output_dir);
      return exit_code(rep.status);
    }

    bool const eps_sweep = !sweep_eps.empty();
    auto const values    = parse_list(eps_sweep ? sweep_eps : sweep_n);
    double const ratio   = cfg.eta / cfg.epsilon;
    std::vector<ErrorRow> rows;
    int code = 0;
    for (double v : values)
    {
      RunConfig c = cfg;
      std::string label;
      if (eps_sweep)
      {
        c.epsilon = v;
        c.eta     = v * ratio;
        label     = "eps" + std::to_string(v);
      }
      else
      {
        c.N   = static_cast<int>(v);
        label = "N" + std::to_string(c.N);
      }
      auto const rep = run(c, spec);
      summary(std::cout, c, rep);
      if (!cfg.output_dir.empty())
        emit_outputs(rep, c, std::filesystem::path(cfg.output_dir) / label);
      if (!rep.errors.empty())
        rows.push_back({v, rep.state.set()->dof(), rep.errors});
      code = std::max(code, exit_code(rep.status));
    }
    write_errors(std::cout, rows, eps_sweep, spec.unknowns());
    if (!cfg.output_dir.empty())
    {
      std::ofstream f(std::filesystem::path(cfg.output_dir) / "errors.csv");
      write_errors(f, rows, eps_sweep, spec.unknowns());
    }
    return code;
  }
  catch (std::exception const &e)
  {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
