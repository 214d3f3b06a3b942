#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include "chronos/rng.hpp"

namespace chronos {

/// Inverse Gaussian (Wald) law with mean `mu` and shape `lambda`.
struct InverseGaussian {
  double mu;
  double lambda;
  friend bool operator==(const InverseGaussian&, const InverseGaussian&) = default;
};

/// Point mass at a fixed positive time.
struct DeterministicAtom {
  double value;
  friend bool operator==(const DeterministicAtom&, const DeterministicAtom&) = default;
};

/// Gaussian restricted to (0, inf). `mu` and `sigma` are the parameters of the
/// parent Gaussian, not the moments of the truncated law.
struct TruncatedGaussian {
  double mu;
  double sigma;
  friend bool operator==(const TruncatedGaussian&, const TruncatedGaussian&) = default;
};

/// Sojourn-time law for one (s, a, s') transition.
///
/// Densities are taken with respect to Lebesgue measure plus counting measure
/// on atoms, so `pdf` of an atom is its mass (1) at the atom and 0 elsewhere.
/// Instances are immutable once constructed; invalid parameters are rejected
/// by the constructor and never at evaluation time.
class SojournDistribution {
 public:
  using Variant = std::variant<InverseGaussian, DeterministicAtom, TruncatedGaussian>;

  SojournDistribution(InverseGaussian d);
  SojournDistribution(DeterministicAtom d);
  SojournDistribution(TruncatedGaussian d);

  static SojournDistribution inverse_gaussian(double mu, double lambda) {
    return SojournDistribution(InverseGaussian{mu, lambda});
  }
  static SojournDistribution atom(double value) {
    return SojournDistribution(DeterministicAtom{value});
  }
  static SojournDistribution truncated_gaussian(double mu, double sigma) {
    return SojournDistribution(TruncatedGaussian{mu, sigma});
  }

  const Variant& variant() const { return law_; }
  bool is_atom() const { return std::holds_alternative<DeterministicAtom>(law_); }
  /// Atom location; throws if the law is continuous.
  double atom_value() const;
  /// Serialization tag: "inverse_gaussian", "atom" or "truncated_gaussian".
  std::string_view type_name() const;

  double pdf(double tau) const;
  double cdf(double tau) const;
  double sample(Rng& rng) const;
  double mean() const;
  /// E[exp(-beta * tau)] for beta >= 0.
  double expected_discount(double beta) const;

  friend bool operator==(const SojournDistribution&, const SojournDistribution&) = default;

 private:
  Variant law_;
  double tg_mass_ = 1.0;  // 1 - Phi(-mu/sigma) for the truncated Gaussian
};

/// Beta density with shape parameters `phi` (alpha) and `eta` (beta).
class BetaDensity {
 public:
  BetaDensity(double phi, double eta);

  double phi() const { return phi_; }
  double eta() const { return eta_; }
  /// Density at o in (0, 1); throws std::domain_error outside.
  double pdf(double o) const;
  double log_pdf(double o) const;
  double mode() const;

 private:
  double phi_;
  double eta_;
  double log_norm_;
};

/// Standard normal helpers shared by the distribution code and tests.
double standard_normal_pdf(double x);
double standard_normal_cdf(double x);
/// log Phi(x), accurate far into the lower tail.
double log_standard_normal_cdf(double x);

}  // namespace chronos
