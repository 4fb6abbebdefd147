#include "pricelab/policies.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>

#include "pricelab/errors.hpp"

namespace pricelab {

double Policy::next_price(const Vector& x_aug) {
  if (awaiting_)
    throw ProtocolError(std::string(id()) +
                        ": next_price called twice without observe");
  const double p = price_for(x_aug);
  if (!std::isfinite(p) || p < 0.0)
    throw NumericalError(std::string(id()) + ": invalid price " +
                         std::to_string(p));
  pending_x_ = x_aug;
  pending_price_ = p;
  awaiting_ = true;
  return p;
}

void Policy::observe(const MarketOutcome& outcome) {
  if (!awaiting_)
    throw ProtocolError(std::string(id()) + ": observe without next_price");
  if (outcome.posted_price != pending_price_)
    throw ProtocolError(std::string(id()) +
                        ": outcome price does not match the posted price");
  if (outcome.sale != 1 && outcome.sale != -1)
    throw ProtocolError(std::string(id()) + ": sale must be +1 or -1");
  awaiting_ = false;
  record(pending_x_, pending_price_, outcome.sale);
}

namespace {

SolverConfig with_radius(SolverConfig solver, double W) {
  solver.W = W;
  return solver;
}

void require_dims(int d, double W, const char* who) {
  if (d < 1) throw ArgumentError(std::string(who) + ": d must be >= 1");
  if (!(W > 0.0)) throw ArgumentError(std::string(who) + ": W must be > 0");
}

void require_length(const Vector& mu, int d, const char* who) {
  if (mu.size() != d + 1)
    throw ArgumentError(std::string(who) + ": estimate must have length d+1");
}

}  // namespace

// --- RMLP ------------------------------------------------------------------

RmlpPolicy::RmlpPolicy(Params params)
    : params_(std::move(params)),
      u_W_(steepness_constants(params_.noise, params_.W).u_W),
      buffer_(params_.d + 1),
      mu_hat_(Vector::Zero(params_.d + 1)) {
  require_dims(params_.d, params_.W, "RmlpPolicy");
  params_.solver = with_radius(params_.solver, params_.W);
}

std::string_view RmlpPolicy::id() const {
  if (!params_.regularized) return "mle_unreg";
  return params_.link.is_identity() ? "rmlp" : "rmlp_nonlinear";
}

void RmlpPolicy::inject_estimate(const Vector& mu) {
  require_length(mu, params_.d, "RmlpPolicy::inject_estimate");
  mu_hat_ = mu;
  frozen_ = true;
}

double RmlpPolicy::price_for(const Vector& x_aug) {
  if (k_ == 1 && !frozen_) return 0.0;
  const double w =
      pricing_g_nonlinear(params_.noise, params_.link, mu_hat_.dot(x_aug));
  return params_.link.psi(w);
}

void RmlpPolicy::record(const Vector& x_aug, double price, int sale) {
  buffer_.add(x_aug, price, sale, params_.link);
  ++position_;
  if (position_ == (std::int64_t{1} << (k_ - 1))) {
    if (!frozen_) refit();
    buffer_.clear();
    position_ = 0;
    ++k_;
  }
}

void RmlpPolicy::refit() {
  const int next = k_ + 1;
  SolverConfig solver = params_.solver;
  solver.lambda =
      params_.regularized
          ? params_.lambda_scale * lambda_schedule_rmlp(next, params_.d, u_W_)
          : 0.0;
  FitRecord rec;
  rec.k = next;
  rec.n_fit = buffer_.size();
  rec.lambda = solver.lambda;
  try {
    FitResult fit = fit_l1_mle(buffer_, params_.noise, solver, mu_hat_);
    mu_hat_ = fit.mu_hat;
    rec.iterations = fit.iterations;
    rec.converged = fit.converged;
  } catch (const Error&) {
    rec.failed = true;
  }
  rec.mu_hat = mu_hat_;
  fits_.push_back(std::move(rec));
}

// --- RMLP-2 ----------------------------------------------------------------

Rmlp2Policy::Rmlp2Policy(Params params)
    : params_(std::move(params)),
      unit_(params_.noise.with_scale(1.0)),
      u_W_(steepness_constants(unit_, params_.W).u_W),
      rng_(params_.seed),
      explored_(params_.d + 1),
      mu_hat_(Vector::Zero(params_.d + 1)) {
  require_dims(params_.d, params_.W, "Rmlp2Policy");
  if (!(params_.box.lo > 0.0) || !(params_.box.hi > params_.box.lo))
    throw ArgumentError("Rmlp2Policy: need 0 < beta_lo < beta_hi");
  params_.solver = with_radius(params_.solver, params_.W);
}

void Rmlp2Policy::inject_estimate(const Vector& mu, double beta) {
  require_length(mu, params_.d, "Rmlp2Policy::inject_estimate");
  if (!(beta > 0.0))
    throw ArgumentError("Rmlp2Policy::inject_estimate: beta must be > 0");
  mu_hat_ = mu;
  beta_hat_ = beta;
  fitted_ = true;
  frozen_ = true;
}

double Rmlp2Policy::price_for(const Vector& x_aug) {
  last_explore_ = position_ == 0;
  if (last_explore_) return uniform(rng_, 0.0, 1.0);
  if (!fitted_) return pricing_g(unit_, 0.0);
  return pricing_g(unit_, mu_hat_.dot(x_aug)) / beta_hat_;
}

void Rmlp2Policy::record(const Vector& x_aug, double price, int sale) {
  if (position_ == 0) {
    explored_.add(x_aug, price, sale);
    if (k_ > 1 && !frozen_) refit();
  }
  ++position_;
  if (position_ == k_) {
    position_ = 0;
    ++k_;
  }
}

void Rmlp2Policy::refit() {
  const int n = explored_.size();
  SolverConfig solver = params_.solver;
  solver.lambda = params_.lambda_scale * 4.0 * u_W_ *
                  std::sqrt(std::log(static_cast<double>(params_.d)) / n);
  FitRecord rec;
  rec.k = k_;
  rec.n_fit = n;
  rec.lambda = solver.lambda;
  try {
    const std::optional<Vector> warm_mu =
        fitted_ ? std::optional<Vector>(mu_hat_) : std::nullopt;
    const std::optional<double> warm_beta =
        fitted_ ? std::optional<double>(beta_hat_) : std::nullopt;
    FitResult fit = fit_l1_mle_with_scale(explored_, unit_, solver,
                                          params_.box, warm_mu, warm_beta);
    mu_hat_ = fit.mu_hat;
    beta_hat_ = *fit.beta_hat;
    fitted_ = true;
    rec.iterations = fit.iterations;
    rec.converged = fit.converged;
  } catch (const Error&) {
    rec.failed = true;
  }
  rec.mu_hat = mu_hat_ / beta_hat_;
  rec.beta_hat = beta_hat_;
  fits_.push_back(std::move(rec));
}

// --- DIP -------------------------------------------------------------------

DipPolicy::DipPolicy(Params params)
    : params_(std::move(params)),
      rng_(params_.seed),
      explored_(params_.d + 1),
      mu_hat_(Vector::Zero(params_.d + 1)) {
  require_dims(params_.d, params_.W, "DipPolicy");
  if (!(params_.delta > 0.0))
    throw ArgumentError("DipPolicy: delta must be > 0");
  if (params_.c < 1) throw ArgumentError("DipPolicy: c must be >= 1");
  params_.solver = with_radius(params_.solver, params_.W);
}

void DipPolicy::inject_estimate(const Vector& mu) {
  require_length(mu, params_.d, "DipPolicy::inject_estimate");
  mu_hat_ = mu;
  frozen_ = true;
}

double DipPolicy::price_for(const Vector& x_aug) {
  last_explore_ = position_ < params_.c;
  if (last_explore_) return uniform(rng_, 0.0, K());
  return std::max(mu_hat_.dot(x_aug) - 2.0 * params_.delta, 0.0);
}

void DipPolicy::record(const Vector& x_aug, double price, int sale) {
  if (position_ < params_.c) explored_.add(x_aug, price, sale);
  ++position_;
  if (position_ == params_.c && !frozen_) refit();
  if (position_ == params_.c + k_) {
    position_ = 0;
    ++k_;
  }
}

void DipPolicy::refit() {
  const int n = explored_.size();
  SolverConfig solver = params_.solver;
  solver.lambda = params_.lambda_scale * 8.0 * (K() + params_.W) *
                  std::sqrt(std::log(static_cast<double>(params_.d)) / n);
  FitRecord rec;
  rec.k = k_;
  rec.n_fit = n;
  rec.lambda = solver.lambda;
  try {
    FitResult fit =
        fit_l1_quadratic(explored_, K(), solver, params_.response, mu_hat_);
    mu_hat_ = fit.mu_hat;
    rec.iterations = fit.iterations;
    rec.converged = fit.converged;
  } catch (const Error&) {
    rec.failed = true;
  }
  rec.mu_hat = mu_hat_;
  fits_.push_back(std::move(rec));
}

// --- baselines -------------------------------------------------------------

ClairvoyantPolicy::ClairvoyantPolicy(Vector mu0, NoiseModel noise,
                                     LinkFunction link)
    : mu0_(std::move(mu0)), noise_(noise), link_(link) {
  if (mu0_.size() == 0)
    throw ArgumentError("ClairvoyantPolicy: empty mu0");
}

double ClairvoyantPolicy::price_for(const Vector& x_aug) {
  return link_.psi(pricing_g_nonlinear(noise_, link_, mu0_.dot(x_aug)));
}

FixedPricePolicy::FixedPricePolicy(double price) : price_(price) {
  if (!(price >= 0.0) || !std::isfinite(price))
    throw ArgumentError("fixed price must be a finite number >= 0");
}

// --- factory ---------------------------------------------------------------

namespace {

double parse_fixed_price(std::string_view id) {
  const std::string_view text = id.substr(6);
  double value = 0.0;
  const auto [end, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size() || text.empty())
    throw ArgumentError("bad fixed price in policy id '" + std::string(id) +
                        "'");
  return value;
}

}  // namespace

void validate_policy_id(std::string_view id) {
  if (id == "rmlp" || id == "rmlp_nonlinear" || id == "rmlp2" ||
      id == "dip" || id == "clairvoyant" || id == "mle_unreg")
    return;
  if (id.starts_with("fixed:")) {
    const double p = parse_fixed_price(id);
    if (!(p >= 0.0))
      throw ArgumentError("fixed price must be >= 0 in '" + std::string(id) +
                          "'");
    return;
  }
  throw ArgumentError("unknown policy '" + std::string(id) + "'");
}

std::unique_ptr<Policy> make_policy(std::string_view id,
                                    const PolicyContext& ctx) {
  validate_policy_id(id);
  if (id == "rmlp" || id == "rmlp_nonlinear" || id == "mle_unreg") {
    RmlpPolicy::Params p;
    p.d = ctx.d;
    p.W = ctx.W;
    p.noise = ctx.noise;
    p.link = id == "rmlp" ? LinkFunction::identity() : ctx.link;
    p.lambda_scale = ctx.lambda_scale;
    p.regularized = id != "mle_unreg";
    p.solver = ctx.solver;
    return std::make_unique<RmlpPolicy>(std::move(p));
  }
  if (id == "rmlp2") {
    Rmlp2Policy::Params p;
    p.d = ctx.d;
    p.W = ctx.W;
    p.noise = ctx.noise;
    p.box = ctx.box;
    p.lambda_scale = ctx.lambda_scale;
    p.solver = ctx.solver;
    p.seed = ctx.seed;
    return std::make_unique<Rmlp2Policy>(std::move(p));
  }
  if (id == "dip") {
    DipPolicy::Params p;
    p.d = ctx.d;
    p.W = ctx.W;
    p.delta = ctx.delta;
    p.c = ctx.c;
    p.response = ctx.dip_response;
    p.lambda_scale = ctx.lambda_scale;
    p.solver = ctx.solver;
    p.seed = ctx.seed;
    return std::make_unique<DipPolicy>(std::move(p));
  }
  if (id == "clairvoyant") {
    if (ctx.mu0.size() != ctx.d + 1)
      throw ArgumentError("clairvoyant policy needs mu0 of length d+1");
    return std::make_unique<ClairvoyantPolicy>(ctx.mu0, ctx.noise, ctx.link);
  }
  return std::make_unique<FixedPricePolicy>(parse_fixed_price(id));
}

}  // namespace pricelab
