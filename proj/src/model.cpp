#include "chronos/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace chronos {

namespace {

void expect_size(std::string_view what, std::size_t got, std::size_t want) {
  if (got != want) {
    std::ostringstream os;
    os << what << " has " << got << " entries, expected " << want;
    throw ModelError(os.str());
  }
}

std::string triple(const ModelData& d, std::size_t s, std::size_t a, std::size_t next) {
  return "(" + d.states[s] + ", " + d.actions[a] + ", " + d.states[next] + ")";
}

}  // namespace

PosmdpModel::PosmdpModel(ModelData data) : data_(std::move(data)) {
  n_states_ = data_.states.size();
  n_actions_ = data_.actions.size();
  n_obs_ = data_.observations.size();
  if (n_states_ == 0 || n_actions_ == 0 || n_obs_ == 0)
    throw ModelError("model needs at least one state, action and observation");

  const std::size_t sas_size = n_states_ * n_actions_ * n_states_;
  expect_size("transition", data_.transition.size(), sas_size);
  expect_size("sojourn", data_.sojourn.size(), sas_size);
  expect_size("rate_reward", data_.rate_reward.size(), sas_size);
  expect_size("lump_reward", data_.lump_reward.size(), n_states_ * n_actions_);
  expect_size("observation_kernel", data_.observation_kernel.size(), n_actions_ * n_states_ * n_obs_);
  expect_size("initial_belief", data_.initial_belief.size(), n_states_);
  if (data_.initial_observation_kernel)
    expect_size("g0", data_.initial_observation_kernel->size(), n_states_ * n_obs_);
  if (!data_.admissible.empty()) {
    expect_size("admissible", data_.admissible.size(), n_states_);
    for (const auto& row : data_.admissible) expect_size("admissible row", row.size(), n_actions_);
  }
  for (const auto& b : data_.beta_observation)
    if (b.action >= n_actions_) throw ModelError("beta observation row names an unknown action");

  discount_.assign(sas_size, 1.0);
  for (std::size_t i = 0; i < sas_size; ++i) {
    const auto& d = data_.sojourn[i];
    if (!d) continue;
    if (data_.beta >= 0.0 && std::isfinite(data_.beta))
      discount_[i] = d->expected_discount(data_.beta);
    else
      discount_[i] = std::numeric_limits<double>::quiet_NaN();
    if (d->is_atom()) atom_times_.push_back(d->atom_value());
  }
  std::sort(atom_times_.begin(), atom_times_.end());
  atom_times_.erase(std::unique(atom_times_.begin(), atom_times_.end()), atom_times_.end());
}

std::vector<std::size_t> PosmdpModel::admissible_actions(std::size_t s) const {
  std::vector<std::size_t> out;
  for (std::size_t a = 0; a < n_actions_; ++a)
    if (admissible(s, a)) out.push_back(a);
  return out;
}

bool PosmdpModel::is_atom_time(double tau) const {
  return std::binary_search(atom_times_.begin(), atom_times_.end(), tau);
}

double PosmdpModel::sojourn_density(std::size_t s, std::size_t a, std::size_t next, double tau) const {
  return sojourn_density(s, a, next, tau, is_atom_time(tau));
}

double PosmdpModel::sojourn_density(std::size_t s, std::size_t a, std::size_t next, double tau,
                                    bool at_atom) const {
  const SojournDistribution* d = sojourn(s, a, next);
  if (d == nullptr) return 0.0;
  if (at_atom != d->is_atom()) return 0.0;
  return d->pdf(tau);
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  os << violations.size() << " violation" << (violations.size() == 1 ? "" : "s");
  for (const auto& v : violations) os << "\n  [" << v.code << "] " << v.message;
  return os.str();
}

ValidationReport validate(const PosmdpModel& model) {
  ValidationReport report;
  const ModelData& d = model.data();
  const std::size_t ns = model.n_states();
  const std::size_t na = model.n_actions();
  const std::size_t no = model.n_observations();
  auto add = [&](std::string code, std::string message) {
    report.violations.push_back({std::move(code), std::move(message)});
  };

  if (!(std::isfinite(d.beta) && d.beta > 0.0)) add("beta", "discount rate must be finite and > 0");

  for (std::size_t s = 0; s < ns; ++s)
    if (model.admissible_actions(s).empty()) add("admissible", "state " + d.states[s] + " has no admissible action");

  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t a = 0; a < na; ++a) {
      if (!model.admissible(s, a)) continue;
      double sum = 0.0;
      bool bad_entry = false;
      for (std::size_t t = 0; t < ns; ++t) {
        const double p = model.transition(s, a, t);
        if (!(std::isfinite(p) && p >= 0.0)) bad_entry = true;
        sum += p;
        if (p > 0.0 && model.sojourn(s, a, t) == nullptr)
          add("missing_sojourn", "no sojourn distribution for reachable transition " + triple(d, s, a, t));
      }
      if (bad_entry || std::abs(sum - 1.0) > 1e-9) {
        std::ostringstream os;
        os.precision(17);
        os << "transition row (" << d.states[s] << ", " << d.actions[a] << ") sums to " << sum;
        add("transition_row", os.str());
      }

      // Assumption 1: some tau > 0 leaves positive probability of a longer sojourn.
      double probe = std::numeric_limits<double>::infinity();
      for (std::size_t t = 0; t < ns; ++t) {
        const auto* law = model.sojourn(s, a, t);
        if (model.transition(s, a, t) > 0.0 && law != nullptr) probe = std::min(probe, law->mean());
      }
      if (std::isfinite(probe)) {
        probe *= 0.5;
        double mass = 0.0;
        for (std::size_t t = 0; t < ns; ++t) {
          const auto* law = model.sojourn(s, a, t);
          if (law != nullptr) mass += model.transition(s, a, t) * law->cdf(probe);
        }
        if (!(mass < 1.0 - 1e-12))
          add("finite_epochs", "transitions from (" + d.states[s] + ", " + d.actions[a] +
                                   ") complete with certainty in arbitrarily short time");
      }
      // Assumption 2: bounded per-stage rewards.
      bool rewards_finite = std::isfinite(model.lump_reward(s, a));
      for (std::size_t t = 0; t < ns; ++t) rewards_finite = rewards_finite && std::isfinite(model.rate_reward(s, a, t));
      if (!rewards_finite)
        add("reward_bound", "rewards for (" + d.states[s] + ", " + d.actions[a] + ") are not finite");
    }
  }

  // Assumption 3: finite expected sojourn times.
  for (std::size_t s = 0; s < ns; ++s)
    for (std::size_t a = 0; a < na; ++a)
      for (std::size_t t = 0; t < ns; ++t)
        if (const auto* law = model.sojourn(s, a, t); law != nullptr && !std::isfinite(law->mean()))
          add("infinite_mean", "sojourn mean is not finite for " + triple(d, s, a, t));

  for (std::size_t a = 0; a < na; ++a) {
    for (std::size_t t = 0; t < ns; ++t) {
      double sum = 0.0;
      bool bad_entry = false;
      for (std::size_t o = 0; o < no; ++o) {
        const double g = model.observation(a, t, o);
        if (!(std::isfinite(g) && g >= 0.0)) bad_entry = true;
        sum += g;
      }
      if (bad_entry || std::abs(sum - 1.0) > 1e-9)
        add("observation_row", "observation row (" + d.actions[a] + ", " + d.states[t] + ") is not a distribution");
    }
  }

  if (d.initial_observation_kernel) {
    for (std::size_t t = 0; t < ns; ++t) {
      double sum = 0.0;
      for (std::size_t o = 0; o < no; ++o) sum += (*d.initial_observation_kernel)[t * no + o];
      if (std::abs(sum - 1.0) > 1e-9) add("g0_row", "initial observation row for " + d.states[t] + " is not a distribution");
    }
  }

  double belief_sum = 0.0;
  bool belief_negative = false;
  for (double p : d.initial_belief) {
    belief_sum += p;
    if (!(p >= 0.0)) belief_negative = true;
  }
  if (belief_negative || std::abs(belief_sum - 1.0) > 1e-12)
    add("initial_belief", "initial belief is not a probability vector");

  if (d.mixed_observable && d.mixed_observable->observable.size() * d.mixed_observable->hidden.size() != ns)
    add("mixed_observable", "observable x hidden factorization does not match the state count");

  return report;
}

double StageRewardTable::min() const { return *std::min_element(values.begin(), values.end()); }

double StageRewardTable::max_abs() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

StageRewardTable compute_stage_reward(const PosmdpModel& model) {
  const std::size_t ns = model.n_states();
  const std::size_t na = model.n_actions();
  const double beta = model.beta();
  StageRewardTable table{ns, na, std::vector<double>(ns * na, 0.0)};
  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t a = 0; a < na; ++a) {
      double r = model.lump_reward(s, a);
      for (std::size_t t = 0; t < ns; ++t) {
        const double p = model.transition(s, a, t);
        const double rate = model.rate_reward(s, a, t);
        if (p == 0.0 || rate == 0.0) continue;
        const auto* law = model.sojourn(s, a, t);
        if (law == nullptr) continue;
        const double accrual = beta > 0.0 ? (1.0 - model.discount(s, a, t)) / beta : law->mean();
        r += p * rate * accrual;
      }
      table.values[s * na + a] = r;
    }
  }
  return table;
}

std::vector<double> observation_bin_points(std::size_t bins) {
  if (bins < 2) throw std::invalid_argument("observation bins must be >= 2");
  constexpr double kEdge = 1e-9;
  std::vector<double> points(bins);
  for (std::size_t j = 0; j < bins; ++j) {
    const double x = static_cast<double>(j) / static_cast<double>(bins - 1);
    points[j] = std::clamp(x, kEdge, 1.0 - kEdge);
  }
  return points;
}

std::vector<double> beta_observation_row(const BetaDensity& density, std::size_t bins) {
  const auto points = observation_bin_points(bins);
  std::vector<double> row(bins);
  double total = 0.0;
  for (std::size_t j = 0; j < bins; ++j) {
    row[j] = density.pdf(points[j]);
    total += row[j];
  }
  for (double& g : row) g /= total;
  return row;
}

}  // namespace chronos
