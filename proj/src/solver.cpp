#include "chronos/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <thread>
#include <unordered_map>

namespace chronos {

std::size_t ValueFunction::best_index(const Belief& xi) const {
  if (vectors.empty()) throw std::logic_error("value function has no vectors");
  std::size_t best = 0;
  double best_value = xi.dot(vectors[0].values);
  for (std::size_t k = 1; k < vectors.size(); ++k) {
    const double v = xi.dot(vectors[k].values);
    if (v > best_value) {
      best_value = v;
      best = k;
    }
  }
  return best;
}

double ValueFunction::value_at(const Belief& xi) const { return xi.dot(vectors[best_index(xi)].values); }

std::size_t ValueFunction::action_at(const Belief& xi) const { return vectors[best_index(xi)].action; }

ValueFunction constant_value_function(std::size_t n_states, double value) {
  return ValueFunction{{AlphaVector{std::vector<double>(n_states, value), 0}}};
}

ValueFunction initial_value_function(const PosmdpModel& model, const SampleBank& bank) {
  const auto rewards = compute_stage_reward(model);
  const std::size_t ns = model.n_states();
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < ns; ++s)
    for (std::size_t a = 0; a < model.n_actions(); ++a)
      if (model.admissible(s, a)) m = std::min(m, rewards(s, a));
  if (m == 0.0) return constant_value_function(ns, 0.0);

  const bool lower = m >= 0.0;
  double lambda = lower ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
  auto consider = [&](double x) { lambda = lower ? std::min(lambda, x) : std::max(lambda, x); };
  if (!bank.times.empty()) {
    const MixtureDensity mixture(model, bank);
    for (const auto& t : bank.times) consider(mixture.importance_ratio(t.tau, model.beta()));
  } else {
    for (std::size_t s = 0; s < ns; ++s)
      for (std::size_t a = 0; a < model.n_actions(); ++a)
        for (std::size_t t = 0; t < ns; ++t)
          if (model.transition(s, a, t) > 0.0) consider(model.discount(s, a, t));
  }
  if (!(lambda < 1.0)) {
    std::ostringstream os;
    os.precision(6);
    os << "minimum-reward initial value undefined: importance ratio bound " << lambda
       << " is not below 1; supply an explicit initial alpha value";
    throw InitializationError(os.str());
  }
  return constant_value_function(ns, m / (1.0 - lambda));
}

std::vector<std::vector<double>> alpha_given_a_tau_o(const PosmdpModel& model, const ValueFunction& v,
                                                     std::size_t action, double tau, std::size_t observation) {
  const std::size_t ns = model.n_states();
  const bool at_atom = model.is_atom_time(tau);
  std::vector<std::vector<double>> out;
  out.reserve(v.vectors.size());
  for (const auto& alpha : v.vectors) {
    std::vector<double> proj(ns, 0.0);
    for (std::size_t s = 0; s < ns; ++s) {
      for (std::size_t t = 0; t < ns; ++t) {
        const double p = model.transition(s, action, t);
        if (p == 0.0) continue;
        proj[s] += model.observation(action, t, observation) * p *
                   model.sojourn_density(s, action, t, tau, at_atom) * alpha.values[t];
      }
    }
    out.push_back(std::move(proj));
  }
  return out;
}

BackupOperator::BackupOperator(const PosmdpModel& model, const SampleBank& bank)
    : model_(&model), rewards_(compute_stage_reward(model)) {
  const std::size_t ns = model.n_states();
  const std::size_t na = model.n_actions();
  const std::size_t no = model.n_observations();
  groups_.resize(na);
  observed_.resize(na);

  for (std::size_t a = 0; a < na; ++a)
    for (std::size_t o = 0; o < no; ++o)
      for (std::size_t t = 0; t < ns; ++t)
        if (model.observation(a, t, o) > 0.0) {
          observed_[a].push_back(o);
          break;
        }

  if (bank.times.empty()) return;
  const MixtureDensity mixture(model, bank);
  const double scale = 1.0 / static_cast<double>(bank.times.size());

  // Distinct sample times in order of first appearance, with summed weights.
  std::vector<double> taus;
  std::vector<double> weights;
  std::unordered_map<double, std::size_t> slot;
  for (const auto& sample : bank.times) {
    const auto [it, inserted] = slot.try_emplace(sample.tau, taus.size());
    if (inserted) {
      taus.push_back(sample.tau);
      weights.push_back(0.0);
    }
    weights[it->second] += mixture.importance_ratio(sample.tau, model.beta()) * scale;
  }

  for (std::size_t g = 0; g < taus.size(); ++g) {
    const double tau = taus[g];
    const bool at_atom = model.is_atom_time(tau);
    for (std::size_t a = 0; a < na; ++a) {
      TimeGroup group{tau, weights[g], {}};
      for (std::size_t s = 0; s < ns; ++s) {
        for (std::size_t t = 0; t < ns; ++t) {
          const double p = model.transition(s, a, t);
          if (p == 0.0) continue;
          const double k = p * model.sojourn_density(s, a, t, tau, at_atom);
          if (k != 0.0) group.entries.push_back({s, t, k});
        }
      }
      if (!group.entries.empty()) groups_[a].push_back(std::move(group));
    }
  }
}

std::size_t BackupOperator::group_count() const {
  std::size_t n = 0;
  for (const auto& g : groups_) n += g.size();
  return n;
}

void BackupOperator::bind(const ValueFunction& v) {
  if (v.vectors.empty()) throw std::invalid_argument("cannot back up through an empty value function");
  const std::size_t ns = model_->n_states();
  const std::size_t na = model_->n_actions();
  const std::size_t no = model_->n_observations();
  n_vectors_ = v.vectors.size();
  projected_.assign(na * no * n_vectors_ * ns, 0.0);
  for (std::size_t a = 0; a < na; ++a)
    for (std::size_t o : observed_[a])
      for (std::size_t k = 0; k < n_vectors_; ++k) {
        double* row = &projected_[((a * no + o) * n_vectors_ + k) * ns];
        for (std::size_t t = 0; t < ns; ++t) row[t] = model_->observation(a, t, o) * v.vectors[k].values[t];
      }
}

std::vector<double> BackupOperator::backup_action(const Belief& xi, std::size_t a) const {
  const std::size_t ns = model_->n_states();
  const std::size_t no = model_->n_observations();
  std::vector<double> alpha(ns, 0.0);
  std::vector<double> reach(ns);
  std::vector<double> chosen(ns);
  for (const TimeGroup& group : groups_[a]) {
    // reach(s') = sum_s xi(s) P(s'|s,a) f(tau|s,a,s'); <xi, alpha(.|a,tau,o)> = sum_s' G alpha reach.
    std::fill(reach.begin(), reach.end(), 0.0);
    for (const auto& e : group.entries) reach[e.next] += xi[e.state] * e.value;
    std::fill(chosen.begin(), chosen.end(), 0.0);
    for (std::size_t o : observed_[a]) {
      const double* base = &projected_[(a * no + o) * n_vectors_ * ns];
      std::size_t best = 0;
      double best_value = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < n_vectors_; ++k) {
        const double* row = base + k * ns;
        double v = 0.0;
        for (std::size_t t = 0; t < ns; ++t) v += row[t] * reach[t];
        if (v > best_value) {
          best_value = v;
          best = k;
        }
      }
      const double* row = base + best * ns;
      for (std::size_t t = 0; t < ns; ++t) chosen[t] += row[t];
    }
    for (const auto& e : group.entries) alpha[e.state] += group.weight * e.value * chosen[e.next];
  }
  for (std::size_t s = 0; s < ns; ++s) alpha[s] += rewards_(s, a);
  return alpha;
}

AlphaVector BackupOperator::backup(const Belief& xi) const {
  if (n_vectors_ == 0) throw std::logic_error("BackupOperator::backup called before bind");
  const std::size_t ns = model_->n_states();
  const std::size_t na = model_->n_actions();

  // Actions admissible throughout the support of xi; all actions if none are.
  std::vector<std::size_t> actions;
  for (std::size_t a = 0; a < na; ++a) {
    bool ok = true;
    for (std::size_t s = 0; s < ns && ok; ++s) ok = xi[s] == 0.0 || model_->admissible(s, a);
    if (ok) actions.push_back(a);
  }
  if (actions.empty())
    for (std::size_t a = 0; a < na; ++a) actions.push_back(a);

  std::vector<std::vector<double>> candidates(actions.size());
  if (threads_ > 1 && actions.size() > 1) {
    std::vector<std::jthread> workers;
    const std::size_t n_workers = std::min(threads_, actions.size());
    for (std::size_t w = 0; w < n_workers; ++w)
      workers.emplace_back([&, w] {
        for (std::size_t i = w; i < actions.size(); i += n_workers) candidates[i] = backup_action(xi, actions[i]);
      });
  } else {
    for (std::size_t i = 0; i < actions.size(); ++i) candidates[i] = backup_action(xi, actions[i]);
  }

  std::size_t best = 0;
  double best_value = xi.dot(candidates[0]);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const double v = xi.dot(candidates[i]);
    if (v > best_value) {
      best_value = v;
      best = i;
    }
  }
  return AlphaVector{std::move(candidates[best]), actions[best]};
}

AlphaVector backup(const PosmdpModel& model, const ValueFunction& v, const SampleBank& bank, const Belief& xi) {
  BackupOperator op(model, bank);
  op.bind(v);
  return op.backup(xi);
}

namespace {

constexpr double kDuplicateTolerance = 1e-9;

bool near_duplicate(const AlphaVector& a, const AlphaVector& b) {
  for (std::size_t s = 0; s < a.values.size(); ++s)
    if (std::abs(a.values[s] - b.values[s]) > kDuplicateTolerance) return false;
  return true;
}

std::vector<double> evaluate_all(const ValueFunction& v, const std::vector<Belief>& beliefs) {
  std::vector<double> out(beliefs.size());
  for (std::size_t i = 0; i < beliefs.size(); ++i) out[i] = v.value_at(beliefs[i]);
  return out;
}

}  // namespace

ValueFunction perseus_update(const BackupOperator& op, const ValueFunction& v, const std::vector<Belief>& beliefs,
                             Rng& rng, UpdateStats* stats) {
  const std::vector<double> before = evaluate_all(v, beliefs);
  ValueFunction next;
  std::vector<std::size_t> pending(beliefs.size());
  for (std::size_t i = 0; i < pending.size(); ++i) pending[i] = i;

  UpdateStats local;
  while (!pending.empty()) {
    const std::size_t i = pending[rng.index(pending.size())];
    const Belief& xi = beliefs[i];
    AlphaVector alpha = op.backup(xi);
    ++local.backups;
    if (xi.dot(alpha.values) < before[i])
      alpha = v.vectors[v.best_index(xi)];
    else
      ++local.improved;

    // A belief leaves B' once it is strictly improved or was itself backed up.
    // Exact ties keep it pending: otherwise a backup that merely reproduces an
    // old vector clears B' and the pass reports a spurious zero residual.
    std::vector<std::size_t> still;
    still.reserve(pending.size());
    for (std::size_t j : pending)
      if (j != i && !(beliefs[j].dot(alpha.values) > before[j])) still.push_back(j);
    pending.swap(still);

    const bool duplicate = std::any_of(next.vectors.begin(), next.vectors.end(),
                                       [&](const AlphaVector& existing) { return near_duplicate(existing, alpha); });
    if (!duplicate) next.vectors.push_back(std::move(alpha));
  }
  if (next.vectors.empty()) next = v;

  if (stats != nullptr) {
    const std::vector<double> after = evaluate_all(next, beliefs);
    for (std::size_t i = 0; i < beliefs.size(); ++i) {
      local.min_improvement = std::min(local.min_improvement, after[i] - before[i]);
      local.residual = std::max(local.residual, std::abs(after[i] - before[i]));
    }
    *stats = local;
  }
  return next;
}

ValueFunction perseus_update(const PosmdpModel& model, const ValueFunction& v, const SampleBank& bank, Rng& rng,
                             UpdateStats* stats) {
  BackupOperator op(model, bank);
  op.bind(v);
  return perseus_update(op, v, bank.beliefs, rng, stats);
}

SolveResult solve(const PosmdpModel& model, const SampleBank& bank, const ValueFunction& v0,
                  const SolveOptions& options) {
  if (v0.vectors.empty()) throw std::invalid_argument("solve needs a nonempty initial value function");
  if (bank.beliefs.empty()) throw std::invalid_argument("solve needs a nonempty belief set");
  BackupOperator op(model, bank);
  op.set_threads(options.threads);

  SolveResult result;
  result.epsilon = options.epsilon.value_or(std::max(1e-4 * op.rewards().max_abs(), 1e-12));
  if (!(result.epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");

  Rng rng(options.seed);
  ValueFunction current = v0;
  for (std::size_t it = 1; it <= options.max_iters; ++it) {
    const auto start = std::chrono::steady_clock::now();
    op.bind(current);
    UpdateStats stats;
    ValueFunction next = perseus_update(op, current, bank.beliefs, rng, &stats);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    result.trace.push_back({it, next.vectors.size(), stats.backups, stats.residual, stats.min_improvement,
                            elapsed.count()});
    current = std::move(next);
    if (stats.residual < result.epsilon) {
      result.converged = true;
      break;
    }
  }
  result.value = std::move(current);
  return result;
}

}  // namespace chronos
