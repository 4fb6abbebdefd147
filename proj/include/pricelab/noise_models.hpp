#pragma once

#include <string>
#include <string_view>

#include "pricelab/rng.hpp"

namespace pricelab {

// Log-probabilities are clamped here before exponentiation.
inline constexpr double kLogFloor = -690.0;

enum class NoiseFamily { kNormal, kLogistic, kExponential, kUniform };

/// A log-concave noise distribution F with density f.
///
/// `scale` is the standard deviation for normal, the logistic scale s for
/// logistic, the mean for exponential and the half-width a for uniform on
/// [-a, a]. Values are small and immutable; copy freely.
class NoiseModel {
 public:
  static NoiseModel normal(double scale = 1.0);
  static NoiseModel logistic(double scale = 1.0);
  static NoiseModel exponential(double scale = 1.0);
  static NoiseModel uniform(double half_width = 1.0);
  /// "normal", "logistic", "exponential" or "uniform".
  static NoiseModel from_name(std::string_view name, double scale = 1.0);

  std::string_view name() const;
  NoiseFamily family() const { return family_; }
  double scale() const { return scale_; }
  NoiseModel with_scale(double scale) const;
  bool symmetric() const {
    return family_ != NoiseFamily::kExponential;
  }

  // Open support (lower, upper); infinite where unbounded.
  double support_lower() const;
  double support_upper() const;
  bool in_support(double x) const {
    return x > support_lower() && x < support_upper();
  }

  double cdf(double x) const;
  double sf(double x) const;  // 1 - F
  double pdf(double x) const;
  double pdf_prime(double x) const;

  double log_cdf(double x) const;  // clamped at kLogFloor
  double log_sf(double x) const;   // clamped at kLogFloor
  double log_cdf_prime(double x) const;  // (log F)'
  double log_sf_prime(double x) const;   // (log(1 - F))'
  double log_pdf_prime(double x) const;  // f'/f

  // (1 - F(x)) / f(x), computed without forming the ratio of tiny numbers.
  double inverse_hazard(double x) const;
  // Unclamped log(1 - F(x)).
  double log_sf_unclamped(double x) const;

  // Range of the virtual valuation over the support: (lower, upper).
  double virtual_valuation_lower() const;
  double virtual_valuation_upper() const;

  double sample(Rng& rng) const;

  // E[(m + z)^+] for z ~ F.
  double expected_positive_part(double m) const;

 private:
  NoiseModel(NoiseFamily family, double scale);

  NoiseFamily family_;
  double scale_;
};

enum class LinkKind { kIdentity, kExp };

/// Strictly increasing, log-concave outer transform psi of the valuation.
class LinkFunction {
 public:
  static LinkFunction identity() { return LinkFunction(LinkKind::kIdentity); }
  static LinkFunction exp() { return LinkFunction(LinkKind::kExp); }
  /// "identity" or "exp".
  static LinkFunction from_name(std::string_view name);

  LinkKind kind() const { return kind_; }
  bool is_identity() const { return kind_ == LinkKind::kIdentity; }
  std::string_view name() const;

  double psi(double v) const;
  double psi_prime(double v) const;
  double psi_inverse(double p) const;
  // psi'(v) / psi(v).
  double log_psi_prime(double v) const;
  // psi^{-1} applied to a posted price, finite for every p >= 0.
  double price_transform(double p) const;

 private:
  explicit LinkFunction(LinkKind kind) : kind_(kind) {}
  LinkKind kind_;
};

struct SteepnessConstants {
  double u_W;
  double ell_W;
};

// lambda(v) = f(v) / (1 - F(v)).
double hazard_rate(const NoiseModel& model, double v);

// Solves hazard_rate(y) = r. Throws UnsupportedCombination when r is outside
// the range of the hazard (e.g. r >= 1/s for logistic noise).
double inverse_hazard_rate(const NoiseModel& model, double r);

// phi(v) = v - (1 - F(v)) / f(v).
double virtual_valuation(const NoiseModel& model, double v);

// phi^{-1}(u) to |phi(w) - u| <= 1e-10.
double inverse_virtual_valuation(const NoiseModel& model, double u);

/// Revenue-maximizing price for mean valuation v: argmax_p p (1 - F(p - v)).
///
/// In the interior this is g(v) = v + phi^{-1}(-v). For bounded supports the
/// maximizer can sit at a corner (sale is certain, or no price sells); those
/// cases are returned directly so that the result is always the argmax.
double pricing_g(const NoiseModel& model, double v);

/// g_psi(v): the root w of w - lambda^{-1}(psi'(w)/psi(w)) = v. The
/// clairvoyant price under the link is psi(g_psi(mu . x)).
double pricing_g_nonlinear(const NoiseModel& model, const LinkFunction& link,
                           double v);

SteepnessConstants steepness_constants(const NoiseModel& model, double W);

}  // namespace pricelab
