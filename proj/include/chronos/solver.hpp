#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "chronos/belief.hpp"
#include "chronos/model.hpp"
#include "chronos/sampler.hpp"

namespace chronos {

/// Hyperplane over the belief simplex tagged with the action whose backup produced it.
struct AlphaVector {
  std::vector<double> values;
  std::size_t action = 0;
  friend bool operator==(const AlphaVector&, const AlphaVector&) = default;
};

/// Piecewise-linear convex value function V(xi) = max_k <xi, alpha_k>.
struct ValueFunction {
  std::vector<AlphaVector> vectors;

  /// Index of the maximizing vector; ties go to the lowest index.
  std::size_t best_index(const Belief& xi) const;
  double value_at(const Belief& xi) const;
  std::size_t action_at(const Belief& xi) const;

  friend bool operator==(const ValueFunction&, const ValueFunction&) = default;
};

inline double value_at(const ValueFunction& v, const Belief& xi) { return v.value_at(xi); }
inline std::size_t action_at(const ValueFunction& v, const Belief& xi) { return v.action_at(xi); }

/// A single constant vector (tagged with action 0).
ValueFunction constant_value_function(std::size_t n_states, double value);

class InitializationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Lower-bound start: one vector with entries M / (1 - lambda), M the minimum
/// stage reward and lambda the smallest (M >= 0) or largest (M < 0) importance
/// ratio exp(-beta tau_n) / D(tau_n) over C. Without samples, lambda falls back
/// to the extreme expected discount over reachable transitions. Throws
/// InitializationError when lambda >= 1.
ValueFunction initial_value_function(const PosmdpModel& model, const SampleBank& bank);

/// alpha(s|a,tau,o) = sum_s' G(o|a,s') P(s'|s,a) f(tau|s,a,s') alpha(s') for every alpha in V.
std::vector<std::vector<double>> alpha_given_a_tau_o(const PosmdpModel& model, const ValueFunction& v,
                                                     std::size_t action, double tau, std::size_t observation);

/// Importance-weighted backup machinery for a fixed (model, bank).
///
/// Samples in C are grouped by (action, tau): every sample with the same tau
/// produces the same projection, so each group carries the summed importance
/// weight and the sparse kernel P(s'|s,a) f(tau|s,a,s'). Groups whose kernel
/// vanishes are dropped since they contribute exactly zero.
class BackupOperator {
 public:
  BackupOperator(const PosmdpModel& model, const SampleBank& bank);

  /// Binds the value function the next backups project through.
  void bind(const ValueFunction& v);
  /// New alpha vector at xi for the bound value function.
  AlphaVector backup(const Belief& xi) const;

  const StageRewardTable& rewards() const { return rewards_; }
  std::size_t group_count() const;
  /// Worker threads used to back up actions concurrently; results do not
  /// depend on the thread count.
  void set_threads(std::size_t threads) { threads_ = threads == 0 ? 1 : threads; }

 private:
  struct KernelEntry {
    std::size_t state;
    std::size_t next;
    double value;
  };
  struct TimeGroup {
    double tau;
    double weight;
    std::vector<KernelEntry> entries;
  };

  std::vector<double> backup_action(const Belief& xi, std::size_t a) const;

  const PosmdpModel* model_;
  StageRewardTable rewards_;
  std::vector<std::vector<TimeGroup>> groups_;             // [a]
  std::vector<std::vector<std::size_t>> observed_;         // [a] -> o with some G(o|a,.) > 0
  std::vector<double> projected_;                          // [a][o][k][s'] = G(o|a,s') alpha_k(s')
  std::size_t n_vectors_ = 0;
  std::size_t threads_ = 1;
};

/// One backup computed from scratch (convenience wrapper around BackupOperator).
AlphaVector backup(const PosmdpModel& model, const ValueFunction& v, const SampleBank& bank, const Belief& xi);

struct UpdateStats {
  std::size_t backups = 0;
  std::size_t improved = 0;
  /// min over B of V'(xi) - V(xi); Perseus keeps this >= 0 up to rounding.
  double min_improvement = std::numeric_limits<double>::infinity();
  /// max over B of |V'(xi) - V(xi)|.
  double residual = 0.0;
};

/// One randomized Perseus pass over B.
ValueFunction perseus_update(const BackupOperator& op, const ValueFunction& v, const std::vector<Belief>& beliefs,
                             Rng& rng, UpdateStats* stats = nullptr);
ValueFunction perseus_update(const PosmdpModel& model, const ValueFunction& v, const SampleBank& bank, Rng& rng,
                             UpdateStats* stats = nullptr);

struct SolveOptions {
  /// Sup-norm threshold over B; defaults to 1e-4 * max |R|.
  std::optional<double> epsilon;
  std::size_t max_iters = 500;
  std::uint64_t seed = kDefaultSeed;
  std::size_t threads = 1;
};

struct IterationRecord {
  std::size_t iteration = 0;
  std::size_t vectors = 0;
  std::size_t backups = 0;
  double residual = 0.0;
  double min_improvement = 0.0;
  double seconds = 0.0;
};

struct SolveResult {
  ValueFunction value;
  std::vector<IterationRecord> trace;
  bool converged = false;
  double epsilon = 0.0;
};

/// Repeats Perseus passes from v0 until the sup-norm change over B drops
/// below epsilon or max_iters passes ran. Non-convergence is reported in the
/// result, not thrown.
SolveResult solve(const PosmdpModel& model, const SampleBank& bank, const ValueFunction& v0,
                  const SolveOptions& options = {});

}  // namespace chronos
