#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "chronos/model.hpp"

namespace chronos {

/// Probability vector over the model's states.
class Belief {
 public:
  /// Tolerance on |sum - 1| accepted by the checked constructor.
  static constexpr double kSumTolerance = 1e-12;

  /// Throws std::invalid_argument unless entries are >= 0 and sum to 1.
  explicit Belief(std::vector<double> probabilities);

  /// Scales nonnegative mass to sum to one.
  static Belief normalized(std::vector<double> mass);
  static Belief point_mass(std::size_t n_states, std::size_t state);
  static Belief uniform(std::size_t n_states);

  std::size_t size() const { return p_.size(); }
  double operator[](std::size_t s) const { return p_[s]; }
  std::span<const double> values() const { return p_; }
  double dot(std::span<const double> v) const;

  friend bool operator==(const Belief&, const Belief&) = default;

 private:
  struct Unchecked {};
  Belief(std::vector<double> p, Unchecked) : p_(std::move(p)) {}
  std::vector<double> p_;
};

/// Thrown when observed evidence has (numerically) zero likelihood.
class ImpossibleEvidence : public std::runtime_error {
 public:
  ImpossibleEvidence(std::size_t action, double tau, std::size_t observation);
  std::size_t action;
  double tau;
  std::size_t observation;
};

inline constexpr double kImpossibleEvidenceThreshold = 1e-300;

/// Posterior after taking `action`, observing sojourn `tau` and observation `o`:
/// xi'(s') ∝ G(o|a,s') sum_s P(s'|s,a) f(tau|s,a,s') xi(s).
Belief update_with_time(const PosmdpModel& model, const Belief& xi, std::size_t action, double tau,
                        std::size_t observation);

/// Posterior ignoring the sojourn time: xi'(s') ∝ G(o|a,s') sum_s P(s'|s,a) xi(s).
Belief update_without_time(const PosmdpModel& model, const Belief& xi, std::size_t action,
                           std::size_t observation);

/// Unnormalized P(o|xi,a,tau) for every observation, with its total.
struct ObservationLikelihood {
  std::vector<double> mass;
  double total = 0.0;
};
ObservationLikelihood observation_time_likelihood(const PosmdpModel& model, const Belief& xi,
                                                  std::size_t action, double tau);

/// Predicted next-state mass sum_s P(s'|s,a) f(tau|s,a,s') xi(s), before observation.
std::vector<double> predict_with_time(const PosmdpModel& model, const Belief& xi, std::size_t action,
                                      double tau);

}  // namespace chronos
