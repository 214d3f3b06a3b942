#pragma once

// Straight-line reference for the importance-weighted backup: every sum is
// written out, no grouping by tau, no caching.

#include <cmath>
#include <limits>
#include <variant>

#include "chronos/solver.hpp"
#include "support.hpp"

namespace testing {

using namespace chronos;

struct Micro {
  ModelData d;
  std::vector<TimeSample> times;
  std::vector<double> weights;
};

inline bool any_atom_at(const ModelData& d, double tau) {
  for (const auto& law : d.sojourn)
    if (law && law->is_atom() && law->atom_value() == tau) return true;
  return false;
}

inline double f_ref(const ModelData& d, std::size_t s, std::size_t a, std::size_t t, double tau) {
  const auto& law = d.sojourn[sas(d, s, a, t)];
  if (!law) return 0.0;
  if (law->is_atom()) return tau == law->atom_value() ? 1.0 : 0.0;
  if (any_atom_at(d, tau)) return 0.0;
  const auto& ig = std::get<InverseGaussian>(law->variant());
  return ig_density(ig.mu, ig.lambda, tau);
}

inline double discount_ref(const SojournDistribution& law, double beta) {
  if (law.is_atom()) return std::exp(-beta * law.atom_value());
  const auto& ig = std::get<InverseGaussian>(law.variant());
  return std::exp(ig.lambda / ig.mu * (1.0 - std::sqrt(1.0 + 2.0 * ig.mu * ig.mu * beta / ig.lambda)));
}

inline double reward_ref(const ModelData& d, std::size_t s, std::size_t a) {
  double r = d.lump_reward[s * d.actions.size() + a];
  for (std::size_t t = 0; t < d.states.size(); ++t) {
    const std::size_t i = sas(d, s, a, t);
    if (d.transition[i] > 0.0) r += d.transition[i] * d.rate_reward[i] * (1.0 - discount_ref(*d.sojourn[i], d.beta)) / d.beta;
  }
  return r;
}

inline AlphaVector backup_ref(const Micro& mc, const std::vector<std::vector<double>>& alphas, const std::vector<double>& xi) {
  const ModelData& d = mc.d;
  const std::size_t ns = d.states.size(), na = d.actions.size(), no = d.observations.size();
  AlphaVector best;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < na; ++a) {
    std::vector<double> alpha(ns);
    for (std::size_t s = 0; s < ns; ++s) alpha[s] = reward_ref(d, s, a);
    for (const auto& c : mc.times) {
      double mix = 0.0;
      for (std::size_t s = 0; s < ns; ++s)
        for (std::size_t b = 0; b < na; ++b)
          for (std::size_t t = 0; t < ns; ++t) mix += mc.weights[sas(d, s, b, t)] * f_ref(d, s, b, t, c.tau);
      const double ratio = std::exp(-d.beta * c.tau) / mix;
      for (std::size_t o = 0; o < no; ++o) {
        std::vector<double> chosen;
        double chosen_value = -std::numeric_limits<double>::infinity();
        for (const auto& k : alphas) {
          std::vector<double> proj(ns, 0.0);
          for (std::size_t s = 0; s < ns; ++s)
            for (std::size_t t = 0; t < ns; ++t)
              proj[s] += d.observation_kernel[(a * ns + t) * no + o] * d.transition[sas(d, s, a, t)] *
                         f_ref(d, s, a, t, c.tau) * k[t];
          double v = 0.0;
          for (std::size_t s = 0; s < ns; ++s) v += xi[s] * proj[s];
          if (v > chosen_value) chosen_value = v, chosen = proj;
        }
        for (std::size_t s = 0; s < ns; ++s) alpha[s] += ratio * chosen[s] / static_cast<double>(mc.times.size());
      }
    }
    double v = 0.0;
    for (std::size_t s = 0; s < ns; ++s) v += xi[s] * alpha[s];
    if (v > best_value) best_value = v, best = AlphaVector{alpha, a};
  }
  return best;
}

inline Micro random_micro(Rng& rng) {
  const std::size_t ns = 1 + rng.index(3), na = 1 + rng.index(2), no = 1 + rng.index(2);
  Micro mc{random_model(rng, ns, na, no, 0.4), {}, {}};
  const PosmdpModel m(mc.d);
  const std::size_t nc = 1 + rng.index(4);
  for (std::size_t n = 0; n < nc; ++n) {
    const std::size_t s = rng.index(ns), a = rng.index(na);
    const std::size_t t = rng.categorical(m.transition_row(s, a));
    mc.times.push_back({m.sojourn(s, a, t)->sample(rng), s, a, t});
  }
  // repeat a time now and then so grouping by tau is exercised
  if (nc > 1 && rng.uniform() < 0.5) mc.times.back() = mc.times.front();
  mc.weights = origin_weights(m, mc.times);
  return mc;
}

inline SampleBank bank_of(const Micro& mc, const std::vector<double>& xi) {
  SampleBank b;
  b.beliefs.push_back(Belief(xi));
  b.times = mc.times;
  b.weights = mc.weights;
  return b;
}

}  // namespace testing
