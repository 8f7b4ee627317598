#pragma once

#include "mrdg/timestep.hpp"

#include <functional>
#include <iosfwd>
#include <memory>

namespace mrdg
{
enum class Aggregation
{
  max, // largest block norm over unknowns
  sum  // root of the summed squares over unknowns
};

struct AdaptParams
{
  double epsilon = 1e-4; // refinement threshold
  double eta     = 1e-5; // coarsening threshold
  int max_level  = 8;    // cap on every level index
  Aggregation aggregation = Aggregation::max;

  void validate() const;
};

// Block norm of element e (by index, or by key; inactive keys throw).
double indicator(HierState const &state, int e, Aggregation agg = Aggregation::max);
double indicator(HierState const &state, ElementKey const &key,
                 Aggregation agg = Aggregation::max);

// All children (up to max_level) of every element, zero-filled.
HierState augment(HierState const &state, int max_level);

// Children of every element with indicator > epsilon are activated
// (zero-filled), plus their ancestors.
HierState refine(HierState const &state, AdaptParams const &params);

// Leaves with indicator < eta are removed repeatedly; the root stays.
HierState coarsen(HierState const &state, AdaptParams const &params);

/// One adaptive time step: augment, predict with the Euler pair, refine on
/// the prediction, take the real IMEX step, coarsen.
class AdaptiveStepper
{
public:
  using RhsFactory = std::function<std::shared_ptr<SplitRhs>(SetPtr const &)>;

  AdaptiveStepper(RhsFactory factory, ImexTableau tableau, AdaptParams params);

  HierState step(HierState const &state, double dt);

  // operator bundle for a set; reused while the element set is unchanged
  std::shared_ptr<SplitRhs> rhs_for(SetPtr const &set);

  AdaptParams const &params() const { return params_; }
  ImexTableau const &tableau() const { return tableau_; }
  // element set on which the last real step was taken
  SetPtr const &last_step_set() const { return last_step_set_; }

private:
  RhsFactory factory_;
  ImexTableau tableau_;
  AdaptParams params_;
  std::vector<std::pair<std::uint64_t, std::shared_ptr<SplitRhs>>> cache_;
  SetPtr last_step_set_;
};

// Active elements: level..., cell..., lower corner..., width... per line.
void write_elements(std::ostream &out, ElementSet const &set);

} // namespace mrdg
