#include "chronos/belief.hpp"

#include <cmath>
#include <sstream>

namespace chronos {

Belief::Belief(std::vector<double> probabilities) : p_(std::move(probabilities)) {
  if (p_.empty()) throw std::invalid_argument("belief must have at least one state");
  double sum = 0.0;
  for (double p : p_) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw std::invalid_argument("belief entries must be finite and >= 0");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kSumTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "belief sums to " << sum << ", not 1";
    throw std::invalid_argument(os.str());
  }
}

Belief Belief::normalized(std::vector<double> mass) {
  double sum = 0.0;
  for (double m : mass) {
    if (!(m >= 0.0) || !std::isfinite(m)) throw std::invalid_argument("belief mass must be finite and >= 0");
    sum += m;
  }
  if (!(sum > 0.0)) throw std::invalid_argument("belief mass sums to zero");
  for (double& m : mass) m /= sum;
  return Belief(std::move(mass), Unchecked{});
}

Belief Belief::point_mass(std::size_t n_states, std::size_t state) {
  std::vector<double> p(n_states, 0.0);
  p.at(state) = 1.0;
  return Belief(std::move(p), Unchecked{});
}

Belief Belief::uniform(std::size_t n_states) {
  return Belief(std::vector<double>(n_states, 1.0 / static_cast<double>(n_states)), Unchecked{});
}

double Belief::dot(std::span<const double> v) const {
  double acc = 0.0;
  for (std::size_t s = 0; s < p_.size(); ++s) acc += p_[s] * v[s];
  return acc;
}

ImpossibleEvidence::ImpossibleEvidence(std::size_t a, double t, std::size_t o)
    : std::runtime_error([&] {
        std::ostringstream os;
        os.precision(17);
        os << "impossible evidence: action " << a << ", tau " << t << ", observation " << o;
        return os.str();
      }()),
      action(a),
      tau(t),
      observation(o) {}

std::vector<double> predict_with_time(const PosmdpModel& model, const Belief& xi, std::size_t action,
                                      double tau) {
  const std::size_t ns = model.n_states();
  const bool at_atom = model.is_atom_time(tau);
  std::vector<double> next(ns, 0.0);
  for (std::size_t s = 0; s < ns; ++s) {
    if (xi[s] == 0.0) continue;
    for (std::size_t t = 0; t < ns; ++t) {
      const double p = model.transition(s, action, t);
      if (p == 0.0) continue;
      next[t] += p * model.sojourn_density(s, action, t, tau, at_atom) * xi[s];
    }
  }
  return next;
}

namespace {

Belief condition_on_observation(const PosmdpModel& model, std::vector<double> predicted, std::size_t action,
                                double tau, std::size_t observation) {
  if (observation >= model.n_observations()) throw std::out_of_range("observation index out of range");
  double norm = 0.0;
  for (std::size_t t = 0; t < predicted.size(); ++t) {
    predicted[t] *= model.observation(action, t, observation);
    norm += predicted[t];
  }
  if (!(norm >= kImpossibleEvidenceThreshold)) throw ImpossibleEvidence(action, tau, observation);
  return Belief::normalized(std::move(predicted));
}

void check_action(const PosmdpModel& model, std::size_t action) {
  if (action >= model.n_actions()) throw std::out_of_range("action index out of range");
}

}  // namespace

Belief update_with_time(const PosmdpModel& model, const Belief& xi, std::size_t action, double tau,
                        std::size_t observation) {
  check_action(model, action);
  if (!(tau > 0.0)) throw std::invalid_argument("sojourn time must be > 0");
  return condition_on_observation(model, predict_with_time(model, xi, action, tau), action, tau, observation);
}

Belief update_without_time(const PosmdpModel& model, const Belief& xi, std::size_t action,
                           std::size_t observation) {
  check_action(model, action);
  const std::size_t ns = model.n_states();
  std::vector<double> next(ns, 0.0);
  for (std::size_t s = 0; s < ns; ++s) {
    if (xi[s] == 0.0) continue;
    for (std::size_t t = 0; t < ns; ++t) next[t] += model.transition(s, action, t) * xi[s];
  }
  return condition_on_observation(model, std::move(next), action, std::nan(""), observation);
}

ObservationLikelihood observation_time_likelihood(const PosmdpModel& model, const Belief& xi,
                                                  std::size_t action, double tau) {
  check_action(model, action);
  if (!(tau > 0.0)) throw std::invalid_argument("sojourn time must be > 0");
  const auto predicted = predict_with_time(model, xi, action, tau);
  ObservationLikelihood out{std::vector<double>(model.n_observations(), 0.0), 0.0};
  for (std::size_t t = 0; t < predicted.size(); ++t) {
    if (predicted[t] == 0.0) continue;
    const auto row = model.observation_row(action, t);
    for (std::size_t o = 0; o < row.size(); ++o) out.mass[o] += row[o] * predicted[t];
  }
  for (double m : out.mass) out.total += m;
  return out;
}

}  // namespace chronos
