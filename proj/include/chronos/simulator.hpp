#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

#include "chronos/belief.hpp"
#include "chronos/model.hpp"
#include "chronos/rng.hpp"
#include "chronos/solver.hpp"

namespace chronos {

struct StepResult {
  std::size_t next_state;
  double tau;
  std::size_t observation;
  /// r1(s,a) + r2(s,a,s') (1 - exp(-beta tau)) / beta, i.e. valued at the start of the sojourn.
  double reward;
};

/// One transition of the hidden process. Throws std::invalid_argument if a is
/// not admissible in s.
StepResult step(const PosmdpModel& model, std::size_t state, std::size_t action, Rng& rng);

struct HistoryEntry {
  std::size_t action;
  double tau;
  std::size_t observation;
  std::size_t state;       // hidden state the action was taken in
  std::size_t next_state;
  double reward;           // realized stage reward
  double discount;         // exp(-beta T_n) at the start of this epoch
  double discounted_reward_so_far;
  Belief belief;           // belief after the update
};

struct History {
  Belief initial_belief;
  std::vector<HistoryEntry> entries;
  double cumulative_time = 0.0;
  double cumulative_discounted_reward = 0.0;
};

/// Greedy rollout of V from xi0. The hidden start state is drawn from xi0.
History rollout(const PosmdpModel& model, const ValueFunction& v, const Belief& xi0, std::size_t epochs, Rng& rng);

/// Same, but acting with a fixed action every epoch.
History rollout_fixed(const PosmdpModel& model, std::size_t action, const Belief& xi0, std::size_t epochs,
                      Rng& rng);

struct Estimate {
  double mean = 0.0;
  std::optional<double> standard_error;  // absent for one episode
  std::size_t episodes = 0;
};

/// Independent rollouts from the model's initial belief. Episode i uses the
/// seed mix_seed(seed, i), so results are reproducible.
Estimate evaluate(const PosmdpModel& model, const ValueFunction& v, std::size_t episodes, std::size_t epochs,
                  std::uint64_t seed);
Estimate evaluate_fixed(const PosmdpModel& model, std::size_t action, std::size_t episodes, std::size_t epochs,
                        std::uint64_t seed);

/// epoch,action,tau,observation,belief_1..belief_k,discounted_reward_so_far
void write_trajectory_csv(std::ostream& out, const PosmdpModel& model, const History& history);

}  // namespace chronos
