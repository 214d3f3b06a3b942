#include <doctest.h>

#include "chronos/belief.hpp"
#include "chronos/problems.hpp"
#include "support.hpp"

using namespace chronos;
using doctest::Approx;

namespace {

Belief stop_uniform(std::size_t stop) {
  std::vector<double> p(15, 0.0);
  for (std::size_t i = 0; i < 3; ++i) p[bus_state(stop, i)] = 1.0 / 3.0;
  return Belief(p);
}

double total(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

}  // namespace

TEST_CASE("belief construction") {
  CHECK_THROWS_AS(Belief({0.5, 0.6}), std::invalid_argument);
  CHECK_THROWS_AS(Belief({1.5, -0.5}), std::invalid_argument);
  CHECK(Belief::uniform(4)[2] == 0.25);
  CHECK(Belief::point_mass(3, 1)[1] == 1.0);
  CHECK(total(Belief::normalized({1.0, 2.0, 5.0}).values()) == Approx(1.0).epsilon(1e-15));
}

TEST_CASE("bus: bus leg timing separates the intensities") {
  const auto m = build_bus_problem();
  const Belief post = update_with_time(m, stop_uniform(0), 0, 5.0, 1);
  // direct evaluation: posterior over (1, i) proportional to f_i(5), mu = 5, 5, 10
  const double f[3] = {testing::ig_density(5.0, 250.0, 5.0), testing::ig_density(5.0, 250.0, 5.0),
                       testing::ig_density(10.0, 1000.0, 5.0)};
  const double z = f[0] + f[1] + f[2];
  for (std::size_t i = 0; i < 3; ++i) CHECK(post[bus_state(1, i)] == Approx(f[i] / z).epsilon(1e-12));
  CHECK(post[bus_state(1, 0)] == post[bus_state(1, 1)]);
  CHECK(post[bus_state(1, 0)] > post[bus_state(1, 2)]);
  CHECK(total(post.values()) == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("bus: bike time carries no intensity information") {
  const auto m = build_bus_problem();
  const Belief post = update_with_time(m, stop_uniform(0), 1, 30.0, 4);
  for (std::size_t i = 0; i < 3; ++i) CHECK(post[bus_state(4, i)] == Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("update without time ignores sojourn laws") {
  const auto m = build_bus_problem();
  const Belief post = update_without_time(m, stop_uniform(0), 0, 1);
  for (std::size_t i = 0; i < 3; ++i) CHECK(post[bus_state(1, i)] == Approx(1.0 / 3.0).epsilon(1e-15));

  Rng rng(8);
  auto d = testing::random_model(rng, 3, 2, 3);
  const Belief xi(testing::random_simplex(rng, 3));
  const Belief before = update_without_time(PosmdpModel(d), xi, 1, 2);
  for (auto& law : d.sojourn) law = SojournDistribution::truncated_gaussian(4.0, 1.0);
  const Belief after = update_without_time(PosmdpModel(d), xi, 1, 2);
  CHECK(before == after);
}

TEST_CASE("degenerate kernels") {
  // three-state cycle with identity observations and atom sojourns
  auto d = testing::blank(3, 1, 3);
  for (std::size_t s = 0; s < 3; ++s) {
    d.transition[testing::sas(d, s, 0, (s + 1) % 3)] = 1.0;
    d.sojourn[testing::sas(d, s, 0, (s + 1) % 3)] = SojournDistribution::atom(1.0 + static_cast<double>(s));
    d.observation_kernel[s * 3 + s] = 1.0;
  }
  const PosmdpModel m(d);
  const Belief post = update_with_time(m, Belief::point_mass(3, 1), 0, 2.0, 2);
  CHECK(post == Belief::point_mass(3, 2));

  // identity observations make the no-time posterior the pushed-forward prior, read at o
  const Belief xi({0.2, 0.3, 0.5});
  CHECK(update_without_time(m, xi, 0, 0) == Belief::point_mass(3, 0));
  const auto pred = predict_with_time(m, xi, 0, 3.0);
  CHECK(pred[0] == Approx(0.5));
  CHECK(pred[1] == 0.0);

  CHECK_THROWS_AS((void)update_with_time(m, Belief::point_mass(3, 1), 0, 2.5, 2), ImpossibleEvidence);
  try {
    (void)update_with_time(m, Belief::point_mass(3, 1), 0, 2.0, 0);
    FAIL("expected ImpossibleEvidence");
  } catch (const ImpossibleEvidence& e) {
    CHECK(e.action == 0);
    CHECK(e.tau == 2.0);
    CHECK(e.observation == 0);
  }
}

TEST_CASE("observation-time likelihood") {
  SUBCASE("bus reveals the stop") {
    const auto m = build_bus_problem();
    const auto lik = observation_time_likelihood(m, Belief::point_mass(15, bus_state(0, 1)), 0, 5.0);
    CHECK(lik.mass[1] == lik.total);
    CHECK(lik.total > 0.0);
    for (std::size_t o : {0, 2, 3, 4}) CHECK(lik.mass[o] == 0.0);
  }
  SUBCASE("maintenance follows the beta row") {
    const auto m = build_maintenance_problem();
    const auto row = beta_observation_row(BetaDensity(2.0, 18.0), 100);
    const auto lik = observation_time_likelihood(m, Belief({0.4, 0.3, 0.2, 0.1}), 0, 78.7433);
    REQUIRE(lik.total > 0.0);
    for (std::size_t o = 0; o < 100; ++o) CHECK(lik.mass[o] / lik.total == Approx(row[o]).epsilon(1e-12));
  }
  SUBCASE("uniform observation kernel") {
    Rng rng(4);
    auto d = testing::random_model(rng, 3, 2, 4, 0.0);
    std::fill(d.observation_kernel.begin(), d.observation_kernel.end(), 0.25);
    const PosmdpModel m(d);
    const auto lik = observation_time_likelihood(m, Belief(testing::random_simplex(rng, 3)), 1, 1.3);
    for (double x : lik.mass) CHECK(x / lik.total == Approx(0.25).epsilon(1e-14));
  }
}

TEST_CASE("normalizer equals the likelihood entry") {
  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const PosmdpModel m(testing::random_model(rng, 3, 2, 3));
    const Belief xi(testing::random_simplex(rng, 3));
    const std::size_t a = rng.index(2);
    const double tau = 0.3 + 5.0 * rng.uniform();
    const auto lik = observation_time_likelihood(m, xi, a, tau);
    const auto pred = predict_with_time(m, xi, a, tau);
    for (std::size_t o = 0; o < 3; ++o) {
      if (lik.mass[o] < 1e-250) continue;
      const Belief post = update_with_time(m, xi, a, tau, o);
      CHECK(total(post.values()) == Approx(1.0).epsilon(1e-12));
      for (std::size_t t = 0; t < 3; ++t)
        CHECK(post[t] * lik.mass[o] == Approx(m.observation(a, t, o) * pred[t]).epsilon(1e-12));
    }
  }
}

TEST_CASE("updates are pure and always normalized") {
  Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const PosmdpModel m(testing::random_model(rng, 3, 2, 2));
    Belief xi(testing::random_simplex(rng, 3));
    for (int step = 0; step < 10; ++step) {
      const std::size_t s = rng.categorical(xi.values());
      const std::size_t a = rng.index(2);
      const std::size_t t = rng.categorical(m.transition_row(s, a));
      const double tau = m.sojourn(s, a, t)->sample(rng);
      const std::size_t o = rng.categorical(m.observation_row(a, t));
      const Belief next = update_with_time(m, xi, a, tau, o);
      CHECK(next == update_with_time(m, xi, a, tau, o));
      CHECK(std::abs(total(next.values()) - 1.0) <= 1e-12);
      xi = next;
    }
  }
}

TEST_CASE("averaging the timed update over tau recovers the untimed update") {
  Rng rng(314);
  for (int trial = 0; trial < 5; ++trial) {
    CAPTURE(trial);
    const PosmdpModel m(testing::random_model(rng, 3, 2, 2, 0.2));
    const Belief xi(testing::random_simplex(rng, 3));
    const std::size_t a = rng.index(2);
    // draw (s, s', tau, o) from the model; conditional on o the timed
    // posterior averages to the untimed one
    std::vector<std::vector<std::vector<double>>> draws(2, std::vector<std::vector<double>>(3));
    for (int n = 0; n < 40000; ++n) {
      const std::size_t s = rng.categorical(xi.values());
      const std::size_t t = rng.categorical(m.transition_row(s, a));
      const double tau = m.sojourn(s, a, t)->sample(rng);
      const std::size_t o = rng.categorical(m.observation_row(a, t));
      const Belief post = update_with_time(m, xi, a, tau, o);
      for (std::size_t k = 0; k < 3; ++k) draws[o][k].push_back(post[k]);
    }
    for (std::size_t o = 0; o < 2; ++o) {
      if (draws[o][0].size() < 100) continue;
      const Belief exact = update_without_time(m, xi, a, o);
      for (std::size_t k = 0; k < 3; ++k) {
        const auto est = testing::mean_se(draws[o][k]);
        CHECK(std::abs(est.mean - exact[k]) <= 3.0 * est.se + 1e-12);
      }
    }
  }
}
