#pragma once

#include "mrdg/adapt.hpp"

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mrdg
{
enum class Equation
{
  nls,
  coupled
};

using ExactFn = std::function<std::vector<cplx>(Point const &, double)>;

/// One registered experiment. Domain is the periodic unit square/interval.
struct ProblemSpec
{
  std::string name;
  Equation equation = Equation::nls;
  int dim           = 1;
  double M          = 1.0;
  // coefficient of the Laplacian; for the coupled system also inside `coupled`
  double c_lap = 1.0;
  Nonlinearity nonlinearity = Nonlinearity::none();
  CoupledLinear coupled;
  double alpha = 0.0; // coupled transport constant, a = alpha / M
  std::vector<Field> initial;
  ExactFn exact; // empty when no closed form is known

  int unknowns() const { return static_cast<int>(initial.size()); }
  bool has_exact() const { return static_cast<bool>(exact); }
};

// accuracy1d, accuracy2d, soliton1, soliton2, bound_state3..5, coupled_accuracy,
// coupled_soliton1..3, singular2d, blowup2d_a, blowup2d_b
std::vector<std::string> problem_names();
ProblemSpec make_problem(std::string const &name);

struct RunConfig
{
  std::string problem = "accuracy1d";
  GridMode grid       = GridMode::full;
  int N               = 6;
  int k               = 3;
  std::string flux    = "conservative";
  std::string tableau = "ssp3_433";
  double epsilon      = 1e-4;
  double eta          = 1e-5;
  Aggregation aggregation = Aggregation::max;
  // dt = cfl dx^exponent, or cfl M dx / alpha for the coupled system;
  // a positive `dt` overrides both
  double cfl      = 0.1;
  double exponent = 1.0;
  double dt       = 0.0;
  double t_final  = 0.1;
  std::vector<double> snapshots;
  std::string output_dir;
  SolverOptions solver;
  double guard      = 1e6; // bound on max |u_h| before a run is stopped
  int init_sweeps   = 10;

  void validate() const;
};

// Settings used for the registered experiment.
RunConfig default_config(std::string const &problem);

// Sectioned key-value file (problem, grid, flux, time, adapt, output, solver);
// keys not present keep the registered defaults of the named problem.
RunConfig load_config(std::filesystem::path const &path);
RunConfig parse_config(std::istream &in);

struct HistoryRow
{
  double t;
  long long dof;
  double norm;
  double max_abs;
};

struct Snapshot
{
  double t;
  HierState state;
};

struct ErrorPair
{
  double re = 0.0;
  double im = 0.0;
};

enum class RunStatus
{
  completed,
  blowup,
  solver_failure
};

struct RunReport
{
  RunStatus status = RunStatus::completed;
  std::string message;
  double time = 0.0; // time of the last valid state
  double dt   = 0.0;
  int steps   = 0;
  HierState state;
  std::vector<HistoryRow> history;
  std::vector<Snapshot> snapshots;
  std::vector<ErrorPair> errors; // per unknown at `time`, when an exact solution exists
  int init_sweeps = 0;           // sweeps of the initial adaptive projection
};

using StepObserver = std::function<void(double t, HierState const &)>;

double time_step(RunConfig const &cfg, ProblemSpec const &problem);

// Initial projection; adaptive mode iterates threshold/refine to a fixed point.
HierState initial_state(RunConfig const &cfg, ProblemSpec const &problem,
                        int *sweeps = nullptr);

RunReport run(RunConfig const &cfg, ProblemSpec const &problem,
              StepObserver const &observer = {});

// L2 errors of real and imaginary parts of unknown q, (k+2)^d Gauss nodes per
// cell of the finest uniform grid covering the active set.
ErrorPair l2_error(HierState const &state, int q, Field const &exact);
std::vector<ErrorPair> l2_errors(HierState const &state, ExactFn const &exact, double t);

double max_abs(HierState const &state);

struct RateRow
{
  std::optional<double> r_dof; // -ln(e_i/e_{i-1}) / ln(DoF_i/DoF_{i-1})
  std::optional<double> r_eps; //  ln(e_i/e_{i-1}) / ln(eps_i/eps_{i-1})
};
std::vector<RateRow> rates(std::vector<double> const &errors,
                           std::vector<long long> const &dofs,
                           std::vector<double> const &epsilons);
// log2(e_{i-1}/e_i) for successive refinement levels
std::vector<std::optional<double>> orders(std::vector<double> const &errors);

/// One line of an accuracy table.
struct ErrorRow
{
  double param; // N or epsilon
  long long dof;
  std::vector<ErrorPair> errors;
};

// errors.csv: N sweeps get order columns, epsilon sweeps R_DoF/R_eps columns
void write_errors(std::ostream &out, std::vector<ErrorRow> const &rows, bool epsilon_sweep,
                  int unknowns);
void write_history(std::ostream &out, std::vector<HistoryRow> const &history);
// x(,y), then re, im, abs per unknown on (2^{level+1}+1)^d uniform points
void write_solution(std::ostream &out, HierState const &state, int level);

// history.csv, solution_t*.csv and elements_t*.csv in `dir`
void emit_outputs(RunReport const &report, RunConfig const &cfg,
                  std::filesystem::path const &dir);
std::string time_stamp(double t);

std::string to_string(RunStatus status);

} // namespace mrdg
