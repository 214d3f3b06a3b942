#pragma once

// Oracles and generators shared by the unit suites. Everything here is coded
// independently of the library internals it is used to check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "chronos/model.hpp"
#include "chronos/rng.hpp"

namespace testing {

/// Tanh-sinh quadrature on [a, b] split at the given interior points.
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        std::vector<double> breaks = {}) {
  boost::math::quadrature::tanh_sinh<double> q;
  breaks.push_back(a);
  breaks.push_back(b);
  std::sort(breaks.begin(), breaks.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (breaks[i] < a || breaks[i + 1] > b || breaks[i + 1] <= breaks[i]) continue;
    total += q.integrate(f, breaks[i], breaks[i + 1], 1e-12);
  }
  return total;
}

/// Inverse-Gaussian density written straight from its formula (long double).
inline double ig_density(double mu, double lambda, double t) {
  if (t <= 0.0) return 0.0;
  const long double x = t;
  const long double z = (x - mu) * (x - mu);
  return static_cast<double>(std::sqrt(lambda / (2.0L * std::numbers::pi_v<long double> * x * x * x)) *
                             std::exp(-lambda * z / (2.0L * mu * mu * x)));
}

/// Truncated (to t > 0) Gaussian density from its formula.
inline double tg_density(double mu, double sigma, double t) {
  if (t <= 0.0) return 0.0;
  const double z = (t - mu) / sigma;
  const double mass = 0.5 * std::erfc(-mu / (sigma * std::numbers::sqrt2));
  return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi)) / mass;
}

/// Breakpoints that put quadrature nodes where a peaked density lives.
inline std::vector<double> around(double centre, double width) {
  std::vector<double> out;
  for (int k = -8; k <= 8; ++k) out.push_back(centre + k * width);
  return out;
}

/// Two-sided Kolmogorov-Smirnov statistic of `samples` against `cdf`.
inline double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

struct MeanSe {
  double mean;
  double se;
};

inline MeanSe mean_se(const std::vector<double>& xs) {
  double m = 0.0;
  for (double x : xs) m += x;
  m /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return {m, std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()))};
}

inline std::vector<double> random_simplex(chronos::Rng& rng, std::size_t n) {
  std::vector<double> p(n);
  double total = 0.0;
  for (auto& x : p) total += (x = -std::log(rng.uniform_open()));
  for (auto& x : p) x /= total;
  return p;
}

/// Blank model data with every tensor sized and zeroed.
inline chronos::ModelData blank(std::size_t ns, std::size_t na, std::size_t no) {
  chronos::ModelData d;
  for (std::size_t i = 0; i < ns; ++i) d.states.push_back("s" + std::to_string(i));
  for (std::size_t i = 0; i < na; ++i) d.actions.push_back("a" + std::to_string(i));
  for (std::size_t i = 0; i < no; ++i) d.observations.push_back("o" + std::to_string(i));
  d.transition.assign(ns * na * ns, 0.0);
  d.sojourn.assign(ns * na * ns, std::nullopt);
  d.rate_reward.assign(ns * na * ns, 0.0);
  d.lump_reward.assign(ns * na, 0.0);
  d.observation_kernel.assign(na * ns * no, 0.0);
  d.initial_belief.assign(ns, 1.0 / static_cast<double>(ns));
  d.beta = 0.05;
  return d;
}

inline std::size_t sas(const chronos::ModelData& d, std::size_t s, std::size_t a, std::size_t t) {
  return (s * d.actions.size() + a) * d.states.size() + t;
}

/// Random dense model: random P and G rows, a mix of inverse-Gaussian and
/// atom sojourns, random rewards. `atom_share` is the chance a transition is
/// an atom; atoms are drawn from a short list so times repeat across triples.
inline chronos::ModelData random_model(chronos::Rng& rng, std::size_t ns, std::size_t na, std::size_t no,
                                       double atom_share = 0.3) {
  chronos::ModelData d = blank(ns, na, no);
  const double atoms[] = {1.0, 2.0, 3.5};
  for (std::size_t s = 0; s < ns; ++s)
    for (std::size_t a = 0; a < na; ++a) {
      const auto row = random_simplex(rng, ns);
      for (std::size_t t = 0; t < ns; ++t) {
        const std::size_t i = sas(d, s, a, t);
        d.transition[i] = row[t];
        if (rng.uniform() < atom_share) {
          d.sojourn[i] = chronos::SojournDistribution::atom(atoms[rng.index(3)]);
        } else {
          const double mu = 0.5 + 4.0 * rng.uniform();
          d.sojourn[i] = chronos::SojournDistribution::inverse_gaussian(mu, mu * mu * (1.0 + 9.0 * rng.uniform()));
        }
        d.rate_reward[i] = 10.0 * (rng.uniform() - 0.5);
      }
      d.lump_reward[s * na + a] = 10.0 * (rng.uniform() - 0.5);
    }
  for (std::size_t a = 0; a < na; ++a)
    for (std::size_t t = 0; t < ns; ++t) {
      const auto row = random_simplex(rng, no);
      for (std::size_t o = 0; o < no; ++o) d.observation_kernel[(a * ns + t) * no + o] = row[o];
    }
  d.initial_belief = random_simplex(rng, ns);
  d.beta = 0.02 + 0.2 * rng.uniform();
  return d;
}

}  // namespace testing
