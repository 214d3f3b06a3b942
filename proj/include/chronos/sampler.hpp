#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <vector>

#include "chronos/belief.hpp"
#include "chronos/model.hpp"

namespace chronos {

/// One collected sojourn time with the transition that produced it.
struct TimeSample {
  double tau;
  std::size_t state;
  std::size_t action;
  std::size_t next_state;
  friend bool operator==(const TimeSample&, const TimeSample&) = default;
};

/// Frozen exploration output: belief set B, sojourn samples C and mixture
/// weights w(s,a,s') (flattened [s][a][s'], the empirical origin frequencies of C).
struct SampleBank {
  std::vector<Belief> beliefs;
  std::vector<TimeSample> times;
  std::vector<double> weights;
  std::uint64_t seed = 0;

  friend bool operator==(const SampleBank&, const SampleBank&) = default;
};

/// Explores the model from its initial belief until |B| = n: pick a stored
/// belief uniformly, draw s, a uniform admissible action, s', tau and an
/// observation from P(o|xi,a,tau), and store the updated belief. One sojourn
/// sample is recorded per added belief, so |C| = n - 1.
SampleBank collect(const PosmdpModel& model, std::size_t n, std::uint64_t seed);

/// Appends extra beliefs to B (C and w are unchanged).
void add_beliefs(SampleBank& bank, const std::vector<Belief>& beliefs);

/// Recomputes w from the origins recorded in C.
std::vector<double> origin_weights(const PosmdpModel& model, const std::vector<TimeSample>& times);

/// Importance-sampling proposal D(tau) = sum w(s,a,s') f(tau|s,a,s') under the
/// mixed-measure convention. Precomputes the nonzero mixture components.
class MixtureDensity {
 public:
  MixtureDensity(const PosmdpModel& model, const SampleBank& bank);

  double operator()(double tau) const;
  /// exp(-beta tau) / D(tau).
  double importance_ratio(double tau, double beta) const;

 private:
  struct Component {
    double weight;
    const SojournDistribution* law;
  };
  const PosmdpModel* model_;
  std::vector<Component> continuous_;
  std::map<double, double> atom_weight_;
};

double mixture_density(const SampleBank& bank, const PosmdpModel& model, double tau);
double importance_ratio(const SampleBank& bank, const PosmdpModel& model, double tau, double beta);

}  // namespace chronos
