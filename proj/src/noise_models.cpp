#include "pricelab/noise_models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "pricelab/errors.hpp"

namespace pricelab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLogSqrt2Pi = 0.91893853320467274178;
constexpr int kMaxDoublings = 200;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---- standard normal helpers ----

double std_normal_log_pdf(double z) { return -0.5 * z * z - kLogSqrt2Pi; }

// Mills ratio Q(t) / phi(t) with Q the upper tail.
double std_normal_mills(double t) {
  if (t < 5.0) {
    const double q = 0.5 * std::erfc(t / std::numbers::sqrt2);
    return std::exp(std::log(q) - std_normal_log_pdf(t));
  }
  // Continued fraction 1 / (t + 1/(t + 2/(t + 3/(t + ...)))).
  double a = t;
  for (int k = 120; k >= 1; --k) a = t + k / a;
  return 1.0 / a;
}

double std_normal_log_sf(double t) {
  if (t < 5.0) return std::log(0.5 * std::erfc(t / std::numbers::sqrt2));
  return std_normal_log_pdf(t) + std::log(std_normal_mills(t));
}

double softplus(double u) {
  return std::max(u, 0.0) + std::log1p(std::exp(-std::abs(u)));
}

double logistic_cdf(double z) {
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z))
                : std::exp(z) / (1.0 + std::exp(z));
}

}  // namespace

// ---------------------------------------------------------------------------
// NoiseModel

NoiseModel::NoiseModel(NoiseFamily family, double scale)
    : family_(family), scale_(scale) {
  if (!(scale > 0.0) || !std::isfinite(scale))
    throw ArgumentError("noise scale must be positive and finite, got " +
                        fmt(scale));
}

NoiseModel NoiseModel::normal(double scale) {
  return NoiseModel(NoiseFamily::kNormal, scale);
}
NoiseModel NoiseModel::logistic(double scale) {
  return NoiseModel(NoiseFamily::kLogistic, scale);
}
NoiseModel NoiseModel::exponential(double scale) {
  return NoiseModel(NoiseFamily::kExponential, scale);
}
NoiseModel NoiseModel::uniform(double half_width) {
  return NoiseModel(NoiseFamily::kUniform, half_width);
}

NoiseModel NoiseModel::from_name(std::string_view name, double scale) {
  if (name == "normal") return normal(scale);
  if (name == "logistic") return logistic(scale);
  if (name == "exponential") return exponential(scale);
  if (name == "uniform") return uniform(scale);
  throw ArgumentError("unknown noise model '" + std::string(name) + "'");
}

NoiseModel NoiseModel::with_scale(double scale) const {
  return NoiseModel(family_, scale);
}

std::string_view NoiseModel::name() const {
  switch (family_) {
    case NoiseFamily::kNormal: return "normal";
    case NoiseFamily::kLogistic: return "logistic";
    case NoiseFamily::kExponential: return "exponential";
    case NoiseFamily::kUniform: return "uniform";
  }
  return "?";
}

double NoiseModel::support_lower() const {
  switch (family_) {
    case NoiseFamily::kExponential: return 0.0;
    case NoiseFamily::kUniform: return -scale_;
    default: return -kInf;
  }
}

double NoiseModel::support_upper() const {
  return family_ == NoiseFamily::kUniform ? scale_ : kInf;
}

double NoiseModel::cdf(double x) const {
  const double s = scale_;
  switch (family_) {
    case NoiseFamily::kNormal:
      return 0.5 * std::erfc(-x / (s * std::numbers::sqrt2));
    case NoiseFamily::kLogistic: return logistic_cdf(x / s);
    case NoiseFamily::kExponential: return x <= 0 ? 0.0 : -std::expm1(-x / s);
    case NoiseFamily::kUniform:
      return std::clamp((x + s) / (2 * s), 0.0, 1.0);
  }
  return 0.0;
}

double NoiseModel::sf(double x) const {
  const double s = scale_;
  switch (family_) {
    case NoiseFamily::kNormal:
      return 0.5 * std::erfc(x / (s * std::numbers::sqrt2));
    case NoiseFamily::kLogistic: return logistic_cdf(-x / s);
    case NoiseFamily::kExponential: return x <= 0 ? 1.0 : std::exp(-x / s);
    case NoiseFamily::kUniform:
      return std::clamp((s - x) / (2 * s), 0.0, 1.0);
  }
  return 0.0;
}

double NoiseModel::pdf(double x) const {
  const double s = scale_;
  switch (family_) {
    case NoiseFamily::kNormal:
      return std::exp(std_normal_log_pdf(x / s)) / s;
    case NoiseFamily::kLogistic: {
      const double F = logistic_cdf(x / s);
      return F * (1.0 - F) / s;
    }
    case NoiseFamily::kExponential: return x < 0 ? 0.0 : std::exp(-x / s) / s;
    case NoiseFamily::kUniform:
      return (x > -s && x < s) ? 0.5 / s : 0.0;
  }
  return 0.0;
}

double NoiseModel::pdf_prime(double x) const {
  const double f = pdf(x);
  if (f == 0.0) return 0.0;
  return f * log_pdf_prime(x);
}

double NoiseModel::log_pdf_prime(double x) const {
  const double s = scale_;
  switch (family_) {
    case NoiseFamily::kNormal: return -x / (s * s);
    case NoiseFamily::kLogistic:
      return (1.0 - 2.0 * logistic_cdf(x / s)) / s;
    case NoiseFamily::kExponential: return -1.0 / s;
    case NoiseFamily::kUniform: return 0.0;
  }
  return 0.0;
}

double NoiseModel::log_sf_unclamped(double x) const {
  const double s = scale_;
  switch (family_) {
    case NoiseFamily::kNormal: return std_normal_log_sf(x / s);
    case NoiseFamily::kLogistic: return -softplus(x / s);
    case NoiseFamily::kExponential: return x <= 0 ? 0.0 : -x / s;
    case NoiseFamily::kUniform:
      if (x <= -s) return 0.0;
      if (x >= s) return -kInf;
      return std::log((s - x) / (2 * s));
  }
  return 0.0;
}

double NoiseModel::log_sf(double x) const {
  return std::max(log_sf_unclamped(x), kLogFloor);
}

double NoiseModel::log_cdf(double x) const {
  const double s = scale_;
  double v = 0.0;
  switch (family_) {
    case NoiseFamily::kNormal: v = std_normal_log_sf(-x / s); break;
    case NoiseFamily::kLogistic: v = -softplus(-x / s); break;
    case NoiseFamily::kExponential:
      v = x <= 0 ? -kInf : std::log(-std::expm1(-x / s));
      break;
    case NoiseFamily::kUniform:
      if (x >= s) v = 0.0;
      else if (x <= -s) v = -kInf;
      else v = std::log((x + s) / (2 * s));
      break;
  }
  return std::max(v, kLogFloor);
}

double NoiseModel::log_cdf_prime(double x) const {
  const double s = scale_;
  switch (family_) {
    case NoiseFamily::kNormal: return 1.0 / (s * std_normal_mills(-x / s));
    case NoiseFamily::kLogistic: return logistic_cdf(-x / s) / s;
    case NoiseFamily::kExponential:
      return x <= 0 ? 0.0 : 1.0 / (s * std::expm1(x / s));
    case NoiseFamily::kUniform:
      return (x > -s && x < s) ? 1.0 / (x + s) : 0.0;
  }
  return 0.0;
}

double NoiseModel::log_sf_prime(double x) const {
  const double s = scale_;
  switch (family_) {
    case NoiseFamily::kNormal: return -1.0 / (s * std_normal_mills(x / s));
    case NoiseFamily::kLogistic: return -logistic_cdf(x / s) / s;
    case NoiseFamily::kExponential: return x < 0 ? 0.0 : -1.0 / s;
    case NoiseFamily::kUniform:
      return (x > -s && x < s) ? -1.0 / (s - x) : 0.0;
  }
  return 0.0;
}

double NoiseModel::inverse_hazard(double x) const {
  const double s = scale_;
  switch (family_) {
    case NoiseFamily::kNormal: return s * std_normal_mills(x / s);
    case NoiseFamily::kLogistic: return s * (1.0 + std::exp(-x / s));
    case NoiseFamily::kExponential: return x < 0 ? kInf : s;
    case NoiseFamily::kUniform:
      return (x > -s && x < s) ? s - x : (x <= -s ? kInf : 0.0);
  }
  return 0.0;
}

double NoiseModel::virtual_valuation_lower() const {
  switch (family_) {
    case NoiseFamily::kExponential: return -scale_;
    case NoiseFamily::kUniform: return -3.0 * scale_;
    default: return -kInf;
  }
}

double NoiseModel::virtual_valuation_upper() const {
  return family_ == NoiseFamily::kUniform ? scale_ : kInf;
}

double NoiseModel::sample(Rng& rng) const {
  const double s = scale_;
  switch (family_) {
    case NoiseFamily::kNormal: {
      // Box-Muller, one variate per call so the stream position is fixed.
      const double u1 = uniform_open01(rng);
      const double u2 = uniform_open01(rng);
      return s * std::sqrt(-2.0 * std::log(u1)) *
             std::cos(2.0 * std::numbers::pi * u2);
    }
    case NoiseFamily::kLogistic: {
      const double u = uniform_open01(rng);
      return s * std::log(u / (1.0 - u));
    }
    case NoiseFamily::kExponential:
      return -s * std::log(uniform_open01(rng));
    case NoiseFamily::kUniform: return s * (2.0 * uniform_open01(rng) - 1.0);
  }
  return 0.0;
}

double NoiseModel::expected_positive_part(double m) const {
  const double s = scale_;
  switch (family_) {
    case NoiseFamily::kNormal: {
      const double z = m / s;
      return m * cdf(m) + s * std::exp(std_normal_log_pdf(z));
    }
    case NoiseFamily::kLogistic: return s * softplus(m / s);
    case NoiseFamily::kExponential:
      return m >= 0 ? m + s : s * std::exp(m / s);
    case NoiseFamily::kUniform:
      if (m >= s) return m;
      if (m <= -s) return 0.0;
      return (m + s) * (m + s) / (4.0 * s);
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// LinkFunction

LinkFunction LinkFunction::from_name(std::string_view name) {
  if (name == "identity") return identity();
  if (name == "exp") return exp();
  throw ArgumentError("unknown link function '" + std::string(name) + "'");
}

std::string_view LinkFunction::name() const {
  return kind_ == LinkKind::kIdentity ? "identity" : "exp";
}

double LinkFunction::psi(double v) const {
  return kind_ == LinkKind::kIdentity ? v : std::exp(v);
}

double LinkFunction::psi_prime(double v) const {
  return kind_ == LinkKind::kIdentity ? 1.0 : std::exp(v);
}

double LinkFunction::psi_inverse(double p) const {
  if (kind_ == LinkKind::kIdentity) return p;
  if (!(p > 0.0))
    throw DomainError("exp link: psi^{-1} undefined at p=" + fmt(p));
  return std::log(p);
}

double LinkFunction::log_psi_prime(double v) const {
  if (kind_ == LinkKind::kExp) return 1.0;
  if (!(v > 0.0))
    throw DomainError("identity link: log psi undefined at v=" + fmt(v));
  return 1.0 / v;
}

double LinkFunction::price_transform(double p) const {
  if (kind_ == LinkKind::kIdentity) return p;
  return std::log(std::max(p, 1e-300));
}

// ---------------------------------------------------------------------------
// Pricing machinery

double hazard_rate(const NoiseModel& model, double v) {
  if (model.log_sf_unclamped(v) <= std::log(1e-300))
    throw DomainError(std::string(model.name()) +
                      ": survival function underflows at v=" + fmt(v));
  return 1.0 / model.inverse_hazard(v);
}

double virtual_valuation(const NoiseModel& model, double v) {
  if (!model.in_support(v) && !(model.family() == NoiseFamily::kExponential &&
                                v == 0.0))
    throw DomainError(std::string(model.name()) +
                      ": virtual valuation undefined outside the support, v=" +
                      fmt(v));
  return v - model.inverse_hazard(v);
}

namespace {

// phi'(w) = 2 + (1 - F) f' / f^2.
double virtual_valuation_slope(const NoiseModel& model, double w) {
  return 2.0 + model.inverse_hazard(w) * model.log_pdf_prime(w);
}

double phi_minus(const NoiseModel& model, double w, double u) {
  return w - model.inverse_hazard(w) - u;
}

}  // namespace

double inverse_virtual_valuation(const NoiseModel& model, double u) {
  const double s = model.scale();
  switch (model.family()) {
    case NoiseFamily::kUniform:
      // phi(w) = 2w - a on (-a, a).
      if (!(u > -3.0 * s && u < s))
        throw DomainError("uniform: u=" + fmt(u) +
                          " outside the range of the virtual valuation");
      return 0.5 * (u + s);
    case NoiseFamily::kExponential:
      // phi(w) = w - s on [0, inf).
      if (u < -s)
        throw DomainError("exponential: u=" + fmt(u) +
                          " outside the range of the virtual valuation");
      return u + s;
    default: break;
  }

  double lo = u - 1.0, hi = u + 1.0, width = 1.0;
  for (int i = 0; phi_minus(model, lo, u) > 0.0; ++i) {
    if (i >= kMaxDoublings)
      throw NoRootError(std::string(model.name()) +
                        ": no lower bracket for phi^{-1}(" + fmt(u) + ")");
    lo -= width;
    width *= 2.0;
  }
  width = 1.0;
  for (int i = 0; phi_minus(model, hi, u) < 0.0; ++i) {
    if (i >= kMaxDoublings)
      throw NoRootError(std::string(model.name()) +
                        ": no upper bracket for phi^{-1}(" + fmt(u) + ")");
    hi += width;
    width *= 2.0;
  }

  // Safeguarded Newton: phi' > 1 so the bracket always contains one root.
  double w = 0.5 * (lo + hi);
  for (int it = 0; it < 400; ++it) {
    const double r = phi_minus(model, w, u);
    if (std::abs(r) <= 1e-13 * std::max(1.0, std::abs(u))) return w;
    if (r > 0.0) hi = w;
    else lo = w;
    if (hi - lo <= 1e-12 * std::max(1.0, std::abs(w))) break;
    const double slope = virtual_valuation_slope(model, w);
    double next = w - r / slope;
    if (!std::isfinite(next) || next <= lo || next >= hi) next = 0.5 * (lo + hi);
    w = next;
  }
  return 0.5 * (lo + hi);
}

double pricing_g(const NoiseModel& model, double v) {
  const double u = -v;
  double price;
  if (u <= model.virtual_valuation_lower()) {
    // Sale is certain at the optimum: price at the bottom of the support.
    price = v + model.support_lower();
  } else if (u >= model.virtual_valuation_upper()) {
    // No positive price sells.
    price = 0.0;
  } else {
    price = v + inverse_virtual_valuation(model, u);
  }
  return std::max(price, 0.0);
}

double inverse_hazard_rate(const NoiseModel& model, double r) {
  const double s = model.scale();
  auto unsupported = [&](const char* why) {
    return UnsupportedCombination(std::string(model.name()) +
                                  " noise: hazard rate never equals " + fmt(r) +
                                  " (" + why + ")");
  };
  if (!(r > 0.0) || !std::isfinite(r)) throw unsupported("hazard is positive");
  switch (model.family()) {
    case NoiseFamily::kLogistic: {
      // lambda(y) = F(y) / s, bounded by 1/s.
      const double F = r * s;
      if (F >= 1.0) throw unsupported("logistic hazard is bounded by 1/scale");
      return s * std::log(F / (1.0 - F));
    }
    case NoiseFamily::kExponential:
      throw unsupported("exponential hazard is constant");
    case NoiseFamily::kUniform: {
      // lambda(y) = 1 / (a - y) on (-a, a).
      if (r <= 0.5 / s) throw unsupported("uniform hazard exceeds 1/(2a)");
      return s - 1.0 / r;
    }
    case NoiseFamily::kNormal: break;
  }
  auto excess = [&](double y) { return 1.0 / model.inverse_hazard(y) - r; };
  double lo = -1.0, hi = 1.0, width = 1.0;
  for (int i = 0; excess(lo) > 0.0; ++i) {
    if (i >= kMaxDoublings) throw NoRootError("normal: inverse hazard bracket");
    lo -= width;
    width *= 2.0;
  }
  width = 1.0;
  for (int i = 0; excess(hi) < 0.0; ++i) {
    if (i >= kMaxDoublings) throw NoRootError("normal: inverse hazard bracket");
    hi += width;
    width *= 2.0;
  }
  while (hi - lo > 1e-13 * std::max(1.0, std::abs(lo))) {
    const double mid = 0.5 * (lo + hi);
    if (excess(mid) > 0.0) hi = mid;
    else lo = mid;
  }
  return 0.5 * (lo + hi);
}

double pricing_g_nonlinear(const NoiseModel& model, const LinkFunction& link,
                           double v) {
  if (link.is_identity()) return pricing_g(model, v);

  auto residual = [&](double w) {
    double shift;
    try {
      shift = inverse_hazard_rate(model, link.log_psi_prime(w));
    } catch (const UnsupportedCombination& e) {
      throw UnsupportedCombination("link '" + std::string(link.name()) +
                                   "' with " + e.what());
    }
    return w - shift - v;
  };

  double lo = v - 1.0, hi = v + 1.0, width = 1.0;
  double r_lo = residual(lo);
  for (int i = 0; r_lo > 0.0; ++i) {
    if (i >= kMaxDoublings) throw NoRootError("g_psi: no lower bracket");
    lo -= width;
    width *= 2.0;
    r_lo = residual(lo);
  }
  width = 1.0;
  for (int i = 0; residual(hi) < 0.0; ++i) {
    if (i >= kMaxDoublings) throw NoRootError("g_psi: no upper bracket");
    hi += width;
    width *= 2.0;
  }
  // Left side is increasing with slope >= 1; bisect.
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double r = residual(mid);
    if (r == 0.0) return mid;
    if (r > 0.0) hi = mid;
    else lo = mid;
    if (hi - lo <= 1e-13 * std::max(1.0, std::abs(mid))) break;
  }
  return 0.5 * (lo + hi);
}

SteepnessConstants steepness_constants(const NoiseModel& model, double W) {
  if (!(W > 0.0)) throw ArgumentError("steepness_constants: W must be > 0");
  const double edge = 3.0 * W;
  const double u_W =
      std::max(model.log_cdf_prime(-edge), -model.log_sf_prime(edge));

  // Curvature floor min{-(log F)'', -(log(1-F))''} by central differences of
  // the closed-form first derivatives.
  auto curvature = [&](double x) {
    const double h = 1e-5 * std::max(1.0, std::abs(x));
    if (!model.in_support(x - h) || !model.in_support(x + h)) return kInf;
    const double c_cdf =
        -(model.log_cdf_prime(x + h) - model.log_cdf_prime(x - h)) / (2 * h);
    const double c_sf =
        -(model.log_sf_prime(x + h) - model.log_sf_prime(x - h)) / (2 * h);
    return std::min(c_cdf, c_sf);
  };

  constexpr int kGrid = 10001;
  std::vector<double> xs(kGrid), cs(kGrid);
  int best = 0;
  for (int i = 0; i < kGrid; ++i) {
    xs[i] = -edge + 2.0 * edge * i / (kGrid - 1);
    cs[i] = curvature(xs[i]);
    if (cs[i] < cs[best]) best = i;
  }
  double ell_W = cs[best];
  if (best > 0 && best < kGrid - 1 && std::isfinite(cs[best - 1]) &&
      std::isfinite(cs[best + 1])) {
    // Vertex of the parabola through the three points around the minimizer.
    const double x0 = xs[best - 1], x1 = xs[best], x2 = xs[best + 1];
    const double y0 = cs[best - 1], y1 = cs[best], y2 = cs[best + 1];
    const double denom = (x0 - x1) * (x0 - x2) * (x1 - x2);
    const double A = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom;
    const double B =
        (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) /
        denom;
    if (A > 0.0) {
      const double xv = -B / (2.0 * A);
      if (xv > x0 && xv < x2) ell_W = std::min(ell_W, curvature(xv));
    }
  }
  return {u_W, ell_W};
}

}  // namespace pricelab
