#include "chronos/sampler.hpp"

#include <cmath>

namespace chronos {

SampleBank collect(const PosmdpModel& model, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("collect needs n >= 1");
  Rng rng(seed);
  SampleBank bank;
  bank.seed = seed;
  bank.beliefs.reserve(n);
  bank.times.reserve(n - 1);
  bank.beliefs.emplace_back(std::vector<double>(model.initial_belief().begin(), model.initial_belief().end()));

  while (bank.beliefs.size() < n) {
    // Copy: push_back below may reallocate.
    const Belief xi = bank.beliefs[rng.index(bank.beliefs.size())];
    const std::size_t s = rng.categorical(xi.values());
    const auto actions = model.admissible_actions(s);
    const std::size_t a = actions[rng.index(actions.size())];
    const std::size_t next = rng.categorical(model.transition_row(s, a));
    const SojournDistribution* law = model.sojourn(s, a, next);
    if (law == nullptr) throw ModelError("collect reached a transition without a sojourn distribution");
    const double tau = law->sample(rng);
    bank.times.push_back({tau, s, a, next});

    const auto likelihood = observation_time_likelihood(model, xi, a, tau);
    const std::size_t o = rng.categorical(likelihood.mass);
    bank.beliefs.push_back(update_with_time(model, xi, a, tau, o));
  }
  bank.weights = origin_weights(model, bank.times);
  return bank;
}

void add_beliefs(SampleBank& bank, const std::vector<Belief>& beliefs) {
  bank.beliefs.insert(bank.beliefs.end(), beliefs.begin(), beliefs.end());
}

std::vector<double> origin_weights(const PosmdpModel& model, const std::vector<TimeSample>& times) {
  const std::size_t ns = model.n_states();
  std::vector<double> counts(ns * model.n_actions() * ns, 0.0);
  for (const auto& t : times) counts[model.sas(t.state, t.action, t.next_state)] += 1.0;
  if (!times.empty())
    for (double& c : counts) c /= static_cast<double>(times.size());
  return counts;
}

MixtureDensity::MixtureDensity(const PosmdpModel& model, const SampleBank& bank) : model_(&model) {
  const std::size_t ns = model.n_states();
  const std::size_t na = model.n_actions();
  if (bank.weights.size() != ns * na * ns) throw std::invalid_argument("sample bank does not match the model");
  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t a = 0; a < na; ++a) {
      for (std::size_t t = 0; t < ns; ++t) {
        const double w = bank.weights[model.sas(s, a, t)];
        if (w == 0.0) continue;
        const SojournDistribution* law = model.sojourn(s, a, t);
        if (law == nullptr) continue;
        if (law->is_atom())
          atom_weight_[law->atom_value()] += w;
        else
          continuous_.push_back({w, law});
      }
    }
  }
}

double MixtureDensity::operator()(double tau) const {
  if (!(tau > 0.0)) return 0.0;
  if (model_->is_atom_time(tau)) {
    const auto it = atom_weight_.find(tau);
    return it == atom_weight_.end() ? 0.0 : it->second;
  }
  double d = 0.0;
  for (const auto& c : continuous_) d += c.weight * c.law->pdf(tau);
  return d;
}

double MixtureDensity::importance_ratio(double tau, double beta) const {
  return std::exp(-beta * tau) / (*this)(tau);
}

double mixture_density(const SampleBank& bank, const PosmdpModel& model, double tau) {
  return MixtureDensity(model, bank)(tau);
}

double importance_ratio(const SampleBank& bank, const PosmdpModel& model, double tau, double beta) {
  return MixtureDensity(model, bank).importance_ratio(tau, beta);
}

}  // namespace chronos
