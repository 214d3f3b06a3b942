#include "chronos/distributions.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <numbers>

namespace chronos {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

double standard_normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double log_standard_normal_cdf(double x) {
  if (x > -30.0) return std::log(standard_normal_cdf(x));
  // Mills-ratio asymptotic series; relative error below 1e-12 for x <= -30.
  const double y = -x;
  const double y2 = y * y;
  const double series = 1.0 - 1.0 / y2 + 3.0 / (y2 * y2) - 15.0 / (y2 * y2 * y2);
  return -0.5 * y2 - std::log(y) - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(series);
}

SojournDistribution::SojournDistribution(InverseGaussian d) : law_(d) {
  if (!positive_finite(d.mu) || !positive_finite(d.lambda))
    throw std::invalid_argument("inverse_gaussian requires mu > 0 and lambda > 0");
}

SojournDistribution::SojournDistribution(DeterministicAtom d) : law_(d) {
  if (!positive_finite(d.value)) throw std::invalid_argument("atom requires value > 0");
}

SojournDistribution::SojournDistribution(TruncatedGaussian d) : law_(d) {
  if (!std::isfinite(d.mu) || !positive_finite(d.sigma))
    throw std::invalid_argument("truncated_gaussian requires finite mu and sigma > 0");
  tg_mass_ = standard_normal_cdf(d.mu / d.sigma);
  if (!(tg_mass_ > 0.0))
    throw std::invalid_argument("truncated_gaussian has no mass on (0, inf)");
}

double SojournDistribution::atom_value() const {
  if (const auto* a = std::get_if<DeterministicAtom>(&law_)) return a->value;
  throw std::logic_error("atom_value called on a continuous sojourn distribution");
}

std::string_view SojournDistribution::type_name() const {
  return std::visit(Overloaded{
                        [](const InverseGaussian&) { return std::string_view("inverse_gaussian"); },
                        [](const DeterministicAtom&) { return std::string_view("atom"); },
                        [](const TruncatedGaussian&) { return std::string_view("truncated_gaussian"); },
                    },
                    law_);
}

double SojournDistribution::pdf(double tau) const {
  if (!(tau > 0.0)) return 0.0;
  return std::visit(
      Overloaded{
          [&](const InverseGaussian& d) {
            const double dev = tau - d.mu;
            const double expo = -d.lambda * dev * dev / (2.0 * d.mu * d.mu * tau);
            // log space: near 0 the prefactor overflows while the exponential underflows
            return std::exp(expo + 0.5 * (std::log(d.lambda / (2.0 * std::numbers::pi)) - 3.0 * std::log(tau)));
          },
          [&](const DeterministicAtom& d) { return tau == d.value ? 1.0 : 0.0; },
          [&](const TruncatedGaussian& d) {
            return standard_normal_pdf((tau - d.mu) / d.sigma) / (d.sigma * tg_mass_);
          },
      },
      law_);
}

double SojournDistribution::cdf(double tau) const {
  if (std::isnan(tau)) return std::numeric_limits<double>::quiet_NaN();
  if (tau == std::numeric_limits<double>::infinity()) return 1.0;
  return std::visit(
      Overloaded{
          [&](const InverseGaussian& d) {
            if (!(tau > 0.0)) return 0.0;
            const double root = std::sqrt(d.lambda / tau);
            const double first = standard_normal_cdf(root * (tau / d.mu - 1.0));
            // exp(2 lambda / mu) * Phi(-y) overflows naively for large shape.
            const double log_second =
                2.0 * d.lambda / d.mu + log_standard_normal_cdf(-root * (tau / d.mu + 1.0));
            const double v = first + std::exp(log_second);
            return std::min(1.0, std::max(0.0, v));
          },
          [&](const DeterministicAtom& d) { return tau >= d.value ? 1.0 : 0.0; },
          [&](const TruncatedGaussian& d) {
            if (!(tau > 0.0)) return 0.0;
            // Upper-tail form keeps precision when the truncation mass is ~1.
            const double upper = standard_normal_cdf(-(tau - d.mu) / d.sigma);
            return std::min(1.0, std::max(0.0, 1.0 - upper / tg_mass_));
          },
      },
      law_);
}

double SojournDistribution::sample(Rng& rng) const {
  return std::visit(
      Overloaded{
          [&](const InverseGaussian& d) {
            // Michael, Schucany & Haas (1976). The smaller root is obtained as
            // mu^2 / larger root to avoid cancellation at large shape.
            for (;;) {
              const double z = rng.normal();
              const double y = z * z;
              const double mu_y = d.mu * y;
              const double larger =
                  d.mu + d.mu * mu_y / (2.0 * d.lambda) +
                  d.mu / (2.0 * d.lambda) * std::sqrt(4.0 * d.lambda * mu_y + mu_y * mu_y);
              const double x = d.mu * d.mu / larger;
              const double u = rng.uniform();
              const double tau = (u <= d.mu / (d.mu + x)) ? x : larger;
              if (tau > 0.0 && std::isfinite(tau)) return tau;
            }
          },
          [&](const DeterministicAtom& d) { return d.value; },
          [&](const TruncatedGaussian& d) {
            for (;;) {
              const double tau = d.mu + d.sigma * rng.normal();
              if (tau > 0.0) return tau;
            }
          },
      },
      law_);
}

double SojournDistribution::mean() const {
  return std::visit(Overloaded{
                        [](const InverseGaussian& d) { return d.mu; },
                        [](const DeterministicAtom& d) { return d.value; },
                        [&](const TruncatedGaussian& d) {
                          const double alpha = -d.mu / d.sigma;
                          return d.mu + d.sigma * standard_normal_pdf(alpha) / tg_mass_;
                        },
                    },
                    law_);
}

double SojournDistribution::expected_discount(double beta) const {
  if (!(beta >= 0.0)) throw std::invalid_argument("expected_discount requires beta >= 0");
  if (beta == 0.0) return 1.0;
  return std::visit(
      Overloaded{
          [&](const InverseGaussian& d) {
            // Laplace transform of the inverse Gaussian.
            const double ratio = d.lambda / d.mu;
            return std::exp(ratio * (1.0 - std::sqrt(1.0 + 2.0 * d.mu * d.mu * beta / d.lambda)));
          },
          [&](const DeterministicAtom& d) { return std::exp(-beta * d.value); },
          [&](const TruncatedGaussian& d) {
            const double lo = std::max(0.0, d.mu - 40.0 * d.sigma);
            const double hi = d.mu + 40.0 * d.sigma;
            auto integrand = [&](double t) { return std::exp(-beta * t) * pdf(t); };
            return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, lo, hi,
                                                                                 15, 1e-13);
          },
      },
      law_);
}

BetaDensity::BetaDensity(double phi, double eta) : phi_(phi), eta_(eta) {
  if (!positive_finite(phi) || !positive_finite(eta))
    throw std::invalid_argument("beta density requires phi > 0 and eta > 0");
  log_norm_ = std::lgamma(phi + eta) - std::lgamma(phi) - std::lgamma(eta);
}

double BetaDensity::log_pdf(double o) const {
  if (!(o > 0.0 && o < 1.0)) throw std::domain_error("beta density evaluated outside (0, 1)");
  return log_norm_ + (phi_ - 1.0) * std::log(o) + (eta_ - 1.0) * std::log1p(-o);
}

double BetaDensity::pdf(double o) const { return std::exp(log_pdf(o)); }

double BetaDensity::mode() const {
  if (phi_ > 1.0 && eta_ > 1.0) return (phi_ - 1.0) / (phi_ + eta_ - 2.0);
  throw std::domain_error("beta density mode is not interior");
}

}  // namespace chronos
