#include "chronos/problems.hpp"

#include <array>
#include <string>

namespace chronos {

namespace {

ModelData empty_model(std::size_t ns, std::size_t na, std::size_t no) {
  ModelData d;
  d.transition.assign(ns * na * ns, 0.0);
  d.sojourn.assign(ns * na * ns, std::nullopt);
  d.rate_reward.assign(ns * na * ns, 0.0);
  d.lump_reward.assign(ns * na, 0.0);
  d.observation_kernel.assign(na * ns * no, 0.0);
  d.initial_belief.assign(ns, 0.0);
  return d;
}

std::size_t flat(std::size_t ns, std::size_t na, std::size_t s, std::size_t a, std::size_t t) {
  return (s * na + a) * ns + t;
}

}  // namespace

PosmdpModel build_bus_problem(BusRewards rewards) {
  constexpr std::size_t ns = kBusStops * kBusIntensities;
  constexpr std::size_t na = 2;
  constexpr std::size_t no = kBusStops;
  constexpr std::size_t kBus = 0;
  constexpr std::size_t kBike = 1;

  // Mean bus travel time from stop s to s+1, per intensity.
  constexpr std::array<std::array<double, 4>, kBusIntensities> bus_mean{{
      {5.0, 5.0, 5.0, 5.0},
      {5.0, 10.0, 10.0, 20.0},
      {10.0, 25.0, 25.0, 45.0},
  }};
  // Bike time from stop s to the last stop.
  constexpr std::array<double, 4> bike_time{30.0, 25.0, 20.0, 12.0};

  ModelData d = empty_model(ns, na, no);
  d.name = "bus";
  const std::array<std::string, kBusIntensities> hidden{"low", "medium", "high"};
  MixedObservable mixed;
  for (std::size_t stop = 0; stop < kBusStops; ++stop) mixed.observable.push_back(std::to_string(stop));
  mixed.hidden.assign(hidden.begin(), hidden.end());
  for (std::size_t stop = 0; stop < kBusStops; ++stop)
    for (std::size_t i = 0; i < kBusIntensities; ++i) d.states.push_back(std::to_string(stop) + ":" + hidden[i]);
  d.actions = {"bus", "bike"};
  d.observations = mixed.observable;
  d.mixed_observable = mixed;

  for (std::size_t i = 0; i < kBusIntensities; ++i) {
    for (std::size_t stop = 0; stop + 1 < kBusStops; ++stop) {
      const std::size_t s = bus_state(stop, i);
      const std::size_t up = bus_state(stop + 1, i);
      const double mu = bus_mean[i][stop];
      d.transition[flat(ns, na, s, kBus, up)] = 1.0;
      d.sojourn[flat(ns, na, s, kBus, up)] = SojournDistribution::inverse_gaussian(mu, 10.0 * mu * mu);

      const std::size_t last = bus_state(kBusStops - 1, i);
      d.transition[flat(ns, na, s, kBike, last)] = 1.0;
      d.sojourn[flat(ns, na, s, kBike, last)] = SojournDistribution::atom(bike_time[stop]);
    }
    // Reaching the last stop restarts the line with a fresh intensity.
    const std::size_t last = bus_state(kBusStops - 1, i);
    for (std::size_t a = 0; a < na; ++a) {
      for (std::size_t j = 0; j < kBusIntensities; ++j) {
        d.transition[flat(ns, na, last, a, bus_state(0, j))] = 1.0 / 3.0;
        d.sojourn[flat(ns, na, last, a, bus_state(0, j))] = SojournDistribution::atom(kBusResetTime);
      }
    }
  }

  for (std::size_t a = 0; a < na; ++a)
    for (std::size_t t = 0; t < ns; ++t) d.observation_kernel[(a * ns + t) * no + t / kBusIntensities] = 1.0;

  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t a = 0; a < na; ++a) {
      if (rewards == BusRewards::kGoal) {
        if (s / kBusIntensities == kBusStops - 1) d.lump_reward[s * na + a] = 100.0;
      } else {
        for (std::size_t t = 0; t < ns; ++t) d.rate_reward[flat(ns, na, s, a, t)] = -1.0;
      }
    }
  }

  d.beta = 0.02;
  for (std::size_t i = 0; i < kBusIntensities; ++i) d.initial_belief[bus_state(0, i)] = 1.0 / 3.0;
  return PosmdpModel(std::move(d));
}

PosmdpModel build_maintenance_problem(std::size_t observation_bins) {
  if (observation_bins < 2) throw std::invalid_argument("maintenance problem needs observation_bins >= 2");
  constexpr std::size_t ns = 4;
  constexpr std::size_t na = 4;
  const std::size_t no = observation_bins;

  using Matrix = std::array<std::array<double, ns>, ns>;
  constexpr Matrix deteriorate{{
      {0.1043, 0.7413, 0.1493, 0.0051},
      {0.0, 0.1043, 0.7413, 0.1544},
      {0.0, 0.0, 0.1043, 0.8957},
      {0.0, 0.0, 0.0, 1.0},
  }};
  constexpr Matrix dose{{
      {1.0, 0.0, 0.0, 0.0},
      {0.50, 0.50, 0.0, 0.0},
      {0.25, 0.70, 0.05, 0.0},
      {0.20, 0.55, 0.20, 0.05},
  }};
  constexpr Matrix replace{{
      {1.0, 0.0, 0.0, 0.0},
      {1.0, 0.0, 0.0, 0.0},
      {1.0, 0.0, 0.0, 0.0},
      {1.0, 0.0, 0.0, 0.0},
  }};
  const std::array<const Matrix*, na> transitions{&deteriorate, &deteriorate, &dose, &replace};
  const std::array<SojournDistribution, na> sojourns{
      SojournDistribution::atom(78.7433),
      SojournDistribution::atom(85.3052),
      SojournDistribution::atom(3.0),
      SojournDistribution::truncated_gaussian(10.0, 1.5),
  };
  constexpr std::array<double, na> lump{0.0, -100.0, -200.0, -500.0};
  constexpr std::array<std::array<double, na>, ns> rate{{
      {500.0, 500.0, -100.0, -100.0},
      {250.0, 250.0, -100.0, -100.0},
      {-300.0, -300.0, -100.0, -100.0},
      {-500.0, -500.0, -100.0, -100.0},
  }};
  constexpr std::array<double, na> phi{2.0, 6.0, 18.0, 18.0};
  constexpr std::array<double, na> eta{18.0, 18.0, 18.0, 6.0};

  ModelData d = empty_model(ns, na, no);
  d.name = "maintenance";
  d.states = {"good", "acceptable", "poor", "awful"};
  d.actions = {"do_nothing", "backwash", "dose", "replace"};
  d.observation_bins = observation_bins;
  for (std::size_t j = 0; j < no; ++j) d.observations.push_back("o" + std::to_string(j));

  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t a = 0; a < na; ++a) {
      d.lump_reward[s * na + a] = lump[a];
      for (std::size_t t = 0; t < ns; ++t) {
        const double p = (*transitions[a])[s][t];
        d.transition[flat(ns, na, s, a, t)] = p;
        d.rate_reward[flat(ns, na, s, a, t)] = rate[s][a];
        if (p > 0.0) d.sojourn[flat(ns, na, s, a, t)] = sojourns[a];
      }
    }
  }

  for (std::size_t a = 0; a < na; ++a) {
    d.beta_observation.push_back({a, phi[a], eta[a]});
    const auto row = beta_observation_row(BetaDensity(phi[a], eta[a]), no);
    for (std::size_t t = 0; t < ns; ++t)
      for (std::size_t o = 0; o < no; ++o) d.observation_kernel[(a * ns + t) * no + o] = row[o];
  }

  d.beta = 0.01;
  d.initial_belief = {1.0, 0.0, 0.0, 0.0};
  return PosmdpModel(std::move(d));
}

std::vector<ReferenceBelief> maintenance_reference_beliefs() {
  // Actions are 0-based: 1 = backwash, 2 = dose, 3 = replace.
  return {
      {{0.9972, 0.0028, 0.0, 0.0}, 1, 46309.8867},
      {{0.9965, 0.0035, 0.0, 0.0}, 1, 46299.5234},
      {{0.8714, 0.1286, 0.0, 0.0}, 1, 44448.0742},
      {{0.8160, 0.1840, 0.0, 0.0}, 1, 43628.1680},
      {{0.0031, 0.6803, 0.3165, 0.0001}, 2, 41197.9805},
      {{0.0001, 0.0390, 0.9457, 0.0152}, 2, 40560.6250},
      {{0.0, 0.0003, 0.8488, 0.1509}, 3, 40504.4453},
      {{0.0, 0.0, 0.0, 1.0}, 3, 40504.4414},
  };
}

}  // namespace chronos
