#include "mrdg/adapt.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <unordered_set>

namespace mrdg
{
void AdaptParams::validate() const
{
  if (!(eta >= 0.0) || !(eta < epsilon))
    throw std::invalid_argument("adaptivity needs 0 <= eta < epsilon");
  if (max_level < 0)
    throw std::invalid_argument("adaptivity needs max_level >= 0");
}

double indicator(HierState const &state, int e, Aggregation agg)
{
  double acc = 0.0;
  for (int q = 0; q < state.unknowns(); ++q)
  {
    double const n = state.block(q, e).norm();
    acc = agg == Aggregation::max ? std::max(acc, n) : acc + n * n;
  }
  return agg == Aggregation::max ? acc : std::sqrt(acc);
}

double indicator(HierState const &state, ElementKey const &key, Aggregation agg)
{
  int const e = state.set()->find(key);
  if (e < 0)
    throw std::out_of_range("indicator: element is not active");
  return indicator(state, e, agg);
}

namespace
{
HierState with_keys(HierState const &state, std::vector<ElementKey> keys, int max_level)
{
  auto const &set = *state.set();
  auto target = make_set(set.dim(), set.degree(), std::max(max_level, set.max_level()),
                         GridMode::adaptive, std::move(keys));
  if (target->fingerprint() == set.fingerprint() && target->size() == set.size())
    return state;
  return state.transfer(target);
}

std::vector<ElementKey> key_list(ElementSet const &set)
{
  return {set.keys().begin(), set.keys().end()};
}
} // namespace

HierState augment(HierState const &state, int max_level)
{
  auto const &set = *state.set();
  auto keys       = key_list(set);
  for (auto const &key : set.keys())
    for (auto const &c : children(key, set.dim(), max_level))
      keys.push_back(c);
  return with_keys(state, std::move(keys), max_level);
}

HierState refine(HierState const &state, AdaptParams const &params)
{
  auto const &set = *state.set();
  auto keys       = key_list(set);
  for (int e = 0; e < set.size(); ++e)
    if (indicator(state, e, params.aggregation) > params.epsilon)
      for (auto const &c : children(set.key(e), set.dim(), params.max_level))
        keys.push_back(c);
  return with_keys(state, std::move(keys), params.max_level);
}

HierState coarsen(HierState const &state, AdaptParams const &params)
{
  auto const &set = *state.set();
  int const n     = set.size();
  std::vector<char> alive(n, 1);
  // number of active children of each element
  std::vector<int> nchild(n, 0);
  for (int e = 0; e < n; ++e)
    for (auto const &p : parents(set.key(e), set.dim()))
      ++nchild[set.find(p)];
  std::vector<double> ind(n);
  for (int e = 0; e < n; ++e)
    ind[e] = indicator(state, e, params.aggregation);
  // keys are sorted by |l|_1, so a reverse scan removes leaves before their parents
  bool removed = false;
  for (int e = n - 1; e > 0; --e)
  {
    if (nchild[e] > 0 || !(ind[e] < params.eta))
      continue;
    alive[e] = 0;
    removed  = true;
    for (auto const &p : parents(set.key(e), set.dim()))
      --nchild[set.find(p)];
  }
  if (!removed)
    return state;
  std::vector<ElementKey> keys;
  for (int e = 0; e < n; ++e)
    if (alive[e])
      keys.push_back(set.key(e));
  return with_keys(state, std::move(keys), params.max_level);
}

AdaptiveStepper::AdaptiveStepper(RhsFactory factory, ImexTableau tableau, AdaptParams params)
    : factory_(std::move(factory)), tableau_(std::move(tableau)), params_(params)
{
  params_.validate();
}

std::shared_ptr<SplitRhs> AdaptiveStepper::rhs_for(SetPtr const &set)
{
  for (auto const &[fp, rhs] : cache_)
    if (fp == set->fingerprint() && rhs->set()->size() == set->size())
      return rhs;
  auto rhs = factory_(set);
  cache_.insert(cache_.begin(), {set->fingerprint(), rhs});
  if (cache_.size() > 3)
    cache_.pop_back();
  return rhs;
}

HierState AdaptiveStepper::step(HierState const &state, double dt)
{
  auto const aug       = augment(state, params_.max_level);
  auto const predicted = euler_pair_step(aug, dt, *rhs_for(aug.set()));
  // current set plus the children of every element that is significant in the
  // prediction; augmented elements that were not flagged are dropped again
  auto const &pset = *predicted.set();
  auto keys        = key_list(*state.set());
  for (int e = 0; e < pset.size(); ++e)
    if (indicator(predicted, e, params_.aggregation) > params_.epsilon)
    {
      keys.push_back(pset.key(e));
      for (auto const &c : children(pset.key(e), pset.dim(), params_.max_level))
        keys.push_back(c);
    }
  auto const start = with_keys(state, std::move(keys), params_.max_level);
  last_step_set_   = start.set();
  auto const next  = imex_step(start, dt, *rhs_for(start.set()), tableau_);
  return coarsen(next, params_);
}

void write_elements(std::ostream &out, ElementSet const &set)
{
  int const d = set.dim();
  out << std::scientific << std::setprecision(17);
  for (int m = 0; m < d; ++m)
    out << (m ? "," : "") << "l" << m + 1;
  for (int m = 0; m < d; ++m)
    out << ",j" << m + 1;
  for (int m = 0; m < d; ++m)
    out << ",x" << m + 1;
  for (int m = 0; m < d; ++m)
    out << ",w" << m + 1;
  out << '\n';
  for (auto const &key : set.keys())
  {
    for (int m = 0; m < d; ++m)
      out << (m ? "," : "") << key.level[m];
    for (int m = 0; m < d; ++m)
      out << ',' << key.cell[m];
    for (int m = 0; m < d; ++m)
      out << ',' << support1d(key.level[m], key.cell[m])[0];
    for (int m = 0; m < d; ++m)
    {
      auto const s = support1d(key.level[m], key.cell[m]);
      out << ',' << s[1] - s[0];
    }
    out << '\n';
  }
}

} // namespace mrdg
