#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "chronos/distributions.hpp"

namespace chronos {

/// Raised when model data has inconsistent shapes or cannot be constructed.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// States laid out observable-major: state = observable * |hidden| + hidden.
struct MixedObservable {
  std::vector<std::string> observable;
  std::vector<std::string> hidden;
  friend bool operator==(const MixedObservable&, const MixedObservable&) = default;
};

/// Beta-shaped observation row for one action over binned observations.
struct BetaObservation {
  std::size_t action;
  double phi;
  double eta;
  friend bool operator==(const BetaObservation&, const BetaObservation&) = default;
};

/// Raw POSMDP description. Tensors are dense and flattened row-major:
///   transition, sojourn, rate_reward: [s][a][s']
///   observation_kernel:               [a][s'][o]
///   initial_observation_kernel:       [s'][o]
///   lump_reward:                      [s][a]
struct ModelData {
  std::string name;
  std::vector<std::string> states;
  std::vector<std::string> actions;
  std::vector<std::string> observations;
  /// Set when observations are `bins` evenly spaced points on [0, 1].
  std::optional<std::size_t> observation_bins;
  /// [s][a]; empty means every action is admissible everywhere.
  std::vector<std::vector<bool>> admissible;
  std::vector<double> transition;
  std::vector<std::optional<SojournDistribution>> sojourn;
  std::vector<double> observation_kernel;
  /// When non-empty, observation_kernel was generated from these rows.
  std::vector<BetaObservation> beta_observation;
  std::optional<std::vector<double>> initial_observation_kernel;
  std::vector<double> lump_reward;
  std::vector<double> rate_reward;
  double beta = 0.0;
  std::vector<double> initial_belief;
  std::optional<MixedObservable> mixed_observable;

  friend bool operator==(const ModelData&, const ModelData&) = default;
};

/// Immutable finite POSMDP with cached expected-discount factors and an index
/// of atom locations used by the mixed-measure density convention.
///
/// Construction checks only tensor shapes and distribution placement; the
/// semantic assumptions are reported by `validate`.
class PosmdpModel {
 public:
  explicit PosmdpModel(ModelData data);

  const ModelData& data() const { return data_; }
  const std::string& name() const { return data_.name; }

  std::size_t n_states() const { return n_states_; }
  std::size_t n_actions() const { return n_actions_; }
  std::size_t n_observations() const { return n_obs_; }

  bool admissible(std::size_t s, std::size_t a) const {
    return data_.admissible.empty() || data_.admissible[s][a];
  }
  std::vector<std::size_t> admissible_actions(std::size_t s) const;

  double transition(std::size_t s, std::size_t a, std::size_t next) const {
    return data_.transition[sas(s, a, next)];
  }
  /// Transition row P(.|s,a).
  std::span<const double> transition_row(std::size_t s, std::size_t a) const {
    return {data_.transition.data() + sas(s, a, 0), n_states_};
  }
  const SojournDistribution* sojourn(std::size_t s, std::size_t a, std::size_t next) const {
    const auto& d = data_.sojourn[sas(s, a, next)];
    return d ? &*d : nullptr;
  }
  double observation(std::size_t a, std::size_t next, std::size_t o) const {
    return data_.observation_kernel[(a * n_states_ + next) * n_obs_ + o];
  }
  /// Observation row G(.|a,s').
  std::span<const double> observation_row(std::size_t a, std::size_t next) const {
    return {data_.observation_kernel.data() + (a * n_states_ + next) * n_obs_, n_obs_};
  }
  double lump_reward(std::size_t s, std::size_t a) const { return data_.lump_reward[s * n_actions_ + a]; }
  double rate_reward(std::size_t s, std::size_t a, std::size_t next) const {
    return data_.rate_reward[sas(s, a, next)];
  }
  double beta() const { return data_.beta; }
  std::span<const double> initial_belief() const { return data_.initial_belief; }

  /// E[exp(-beta tau)] for the (s,a,s') sojourn law; 1 when no law is stored.
  double discount(std::size_t s, std::size_t a, std::size_t next) const { return discount_[sas(s, a, next)]; }

  /// Sorted distinct atom locations over all stored sojourn laws.
  std::span<const double> atom_times() const { return atom_times_; }
  bool is_atom_time(double tau) const;

  /// f(tau|s,a,s') under the mixed-measure convention: at an atom location
  /// only atoms contribute (their mass), elsewhere only continuous densities.
  double sojourn_density(std::size_t s, std::size_t a, std::size_t next, double tau) const;
  /// Same as above with the atom test already resolved by the caller.
  double sojourn_density(std::size_t s, std::size_t a, std::size_t next, double tau, bool at_atom) const;

  std::size_t sas(std::size_t s, std::size_t a, std::size_t next) const {
    return (s * n_actions_ + a) * n_states_ + next;
  }

 private:
  ModelData data_;
  std::size_t n_states_ = 0;
  std::size_t n_actions_ = 0;
  std::size_t n_obs_ = 0;
  std::vector<double> discount_;
  std::vector<double> atom_times_;
};

struct Violation {
  std::string code;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  std::string summary() const;
};

ValidationReport validate(const PosmdpModel& model);

/// Expected discounted reward R(s,a) accrued between two decision epochs.
struct StageRewardTable {
  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  std::vector<double> values;  // [s][a]

  double operator()(std::size_t s, std::size_t a) const { return values[s * n_actions + a]; }
  double min() const;
  double max_abs() const;
};

/// R(s,a) = r1(s,a) + sum_s' P(s'|s,a) r2(s,a,s') (1 - E[e^{-beta tau}]) / beta,
/// using r2 * E[tau] in the beta -> 0 limit.
StageRewardTable compute_stage_reward(const PosmdpModel& model);

/// Evenly spaced observation points on [0, 1] clamped into the open interval.
std::vector<double> observation_bin_points(std::size_t bins);

/// Row of G(.|a) from a beta density normalized over the bin points.
std::vector<double> beta_observation_row(const BetaDensity& density, std::size_t bins);

}  // namespace chronos
