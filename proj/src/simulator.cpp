#include "chronos/simulator.hpp"

#include <cmath>
#include <functional>
#include <iomanip>
#include <stdexcept>
#include <string>

namespace chronos {

StepResult step(const PosmdpModel& model, std::size_t state, std::size_t action, Rng& rng) {
  if (state >= model.n_states()) throw std::out_of_range("state index out of range");
  if (action >= model.n_actions()) throw std::out_of_range("action index out of range");
  if (!model.admissible(state, action))
    throw std::invalid_argument("action " + model.data().actions[action] + " is not admissible in state " +
                                model.data().states[state]);
  const std::size_t next = rng.categorical(model.transition_row(state, action));
  const SojournDistribution* law = model.sojourn(state, action, next);
  if (law == nullptr) throw ModelError("transition has no sojourn distribution");
  const double tau = law->sample(rng);
  const std::size_t o = rng.categorical(model.observation_row(action, next));
  const double beta = model.beta();
  const double accrual = beta > 0.0 ? -std::expm1(-beta * tau) / beta : tau;
  return {next, tau, o, model.lump_reward(state, action) + model.rate_reward(state, action, next) * accrual};
}

namespace {

History run(const PosmdpModel& model, const std::function<std::size_t(const Belief&)>& policy, const Belief& xi0,
            std::size_t epochs, Rng& rng) {
  if (epochs == 0) throw std::invalid_argument("rollout needs at least one epoch");
  History h{xi0, {}, 0.0, 0.0};
  h.entries.reserve(epochs);
  Belief xi = xi0;
  std::size_t s = rng.categorical(xi0.values());
  double discount = 1.0;
  for (std::size_t n = 0; n < epochs; ++n) {
    const std::size_t a = policy(xi);
    const StepResult r = step(model, s, a, rng);
    h.cumulative_discounted_reward += discount * r.reward;
    xi = update_with_time(model, xi, a, r.tau, r.observation);
    h.entries.push_back({a, r.tau, r.observation, s, r.next_state, r.reward, discount,
                         h.cumulative_discounted_reward, xi});
    h.cumulative_time += r.tau;
    discount = std::exp(-model.beta() * h.cumulative_time);
    s = r.next_state;
  }
  return h;
}

Estimate summarize(const std::vector<double>& returns) {
  Estimate e;
  e.episodes = returns.size();
  double sum = 0.0;
  for (double r : returns) sum += r;
  e.mean = sum / static_cast<double>(returns.size());
  if (returns.size() > 1) {
    double ss = 0.0;
    for (double r : returns) ss += (r - e.mean) * (r - e.mean);
    const double var = ss / static_cast<double>(returns.size() - 1);
    e.standard_error = std::sqrt(var / static_cast<double>(returns.size()));
  }
  return e;
}

std::uint64_t episode_seed(std::uint64_t seed, std::size_t episode) {
  return mix_seed(mix_seed(seed) + static_cast<std::uint64_t>(episode));
}

Estimate evaluate_with(const PosmdpModel& model, const std::function<std::size_t(const Belief&)>& policy,
                       std::size_t episodes, std::size_t epochs, std::uint64_t seed) {
  if (episodes == 0) throw std::invalid_argument("evaluate needs at least one episode");
  const Belief xi0(std::vector<double>(model.initial_belief().begin(), model.initial_belief().end()));
  std::vector<double> returns(episodes);
  for (std::size_t i = 0; i < episodes; ++i) {
    Rng rng(episode_seed(seed, i));
    returns[i] = run(model, policy, xi0, epochs, rng).cumulative_discounted_reward;
  }
  return summarize(returns);
}

}  // namespace

History rollout(const PosmdpModel& model, const ValueFunction& v, const Belief& xi0, std::size_t epochs, Rng& rng) {
  return run(model, [&](const Belief& xi) { return v.action_at(xi); }, xi0, epochs, rng);
}

History rollout_fixed(const PosmdpModel& model, std::size_t action, const Belief& xi0, std::size_t epochs,
                      Rng& rng) {
  return run(model, [action](const Belief&) { return action; }, xi0, epochs, rng);
}

Estimate evaluate(const PosmdpModel& model, const ValueFunction& v, std::size_t episodes, std::size_t epochs,
                  std::uint64_t seed) {
  return evaluate_with(model, [&](const Belief& xi) { return v.action_at(xi); }, episodes, epochs, seed);
}

Estimate evaluate_fixed(const PosmdpModel& model, std::size_t action, std::size_t episodes, std::size_t epochs,
                        std::uint64_t seed) {
  return evaluate_with(model, [action](const Belief&) { return action; }, episodes, epochs, seed);
}

void write_trajectory_csv(std::ostream& out, const PosmdpModel& model, const History& history) {
  const auto& states = model.data().states;
  out << "epoch,action,tau,observation";
  for (const auto& s : states) out << ",belief_" << s;
  out << ",discounted_reward_so_far\n";
  const auto old_precision = out.precision(17);
  for (std::size_t n = 0; n < history.entries.size(); ++n) {
    const auto& e = history.entries[n];
    out << n << ',' << model.data().actions[e.action] << ',' << e.tau << ','
        << model.data().observations[e.observation];
    for (std::size_t s = 0; s < model.n_states(); ++s) out << ',' << e.belief[s];
    out << ',' << e.discounted_reward_so_far << '\n';
  }
  out.precision(old_precision);
}

}  // namespace chronos
