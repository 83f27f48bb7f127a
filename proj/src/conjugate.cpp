#include "sugs/conjugate.hpp"

#include <cmath>
#include <string>

namespace sugs {

namespace {

constexpr double kLogPi = 1.1447298858494001741;  // log(pi)
constexpr double kDegeneracyRel = 1e-12;

double checked_nu_s(double t, double lambda, double m, std::size_t d) {
  double nu_s = t - lambda * m * m;
  if (!(nu_s > kDegeneracyRel * t)) {
    throw numerical_error("degenerate scale statistic at variable " +
                          std::to_string(d) + ": nu*S = " +
                          std::to_string(nu_s) + " with t = " +
                          std::to_string(t));
  }
  return nu_s;
}

}  // namespace

Hyperparameters::Hyperparameters(std::vector<double> mu0_, double lambda0_,
                                 double nu0_, double s0_)
    : mu0(std::move(mu0_)), lambda0(lambda0_), nu0(nu0_), s0(s0_) {
  validate();
}

void Hyperparameters::validate() const {
  if (!(lambda0 > 0.0) || !(nu0 > 0.0) || !(s0 > 0.0)) {
    throw invalid_input("hyperparameters require lambda0, nu0, s0 > 0");
  }
  for (double m : mu0) {
    if (!std::isfinite(m)) throw invalid_input("non-finite prior mean");
  }
}

Hyperparameters Hyperparameters::restricted(
    std::span<const std::size_t> vars) const {
  Hyperparameters h;
  h.lambda0 = lambda0;
  h.nu0 = nu0;
  h.s0 = s0;
  h.mu0.reserve(vars.size());
  for (std::size_t d : vars) h.mu0.push_back(mu0[d]);
  return h;
}

Hyperparameters Hyperparameters::data_defaults(const Matrix& data) {
  Hyperparameters h;
  h.mu0 = data.column_means();
  h.lambda0 = 0.01;
  h.nu0 = static_cast<double>(data.cols);
  h.s0 = 0.2;
  h.validate();
  return h;
}

Hyperparameters Hyperparameters::constant(double mu0, double lambda0,
                                          double nu0, double s0,
                                          std::size_t n_vars) {
  return Hyperparameters(std::vector<double>(n_vars, mu0), lambda0, nu0, s0);
}

ClusterState ClusterState::prior(const Hyperparameters& hyper) {
  hyper.validate();
  ClusterState s;
  s.lambda_ = hyper.lambda0;
  s.nu_ = hyper.nu0;
  s.count_ = 0;
  s.m_ = hyper.mu0;
  s.t_.resize(hyper.n_vars());
  for (std::size_t d = 0; d < hyper.n_vars(); ++d) {
    s.t_[d] = hyper.nu0 * hyper.s0 + hyper.lambda0 * hyper.mu0[d] * hyper.mu0[d];
  }
  return s;
}

double ClusterState::nu_s(std::size_t d) const {
  return checked_nu_s(t_[d], lambda_, m_[d], d);
}

void ClusterState::add(std::span<const double> x) {
  if (x.size() != m_.size())
    throw invalid_input("observation has " + std::to_string(x.size()) +
                        " variables, state has " + std::to_string(m_.size()));
  double next_lambda = lambda_ + 1.0;
  for (std::size_t d = 0; d < m_.size(); ++d) {
    m_[d] = (lambda_ * m_[d] + x[d]) / next_lambda;
    t_[d] += x[d] * x[d];
  }
  lambda_ = next_lambda;
  nu_ += 1.0;
  ++count_;
  cache_ok_ = false;
}

void ClusterState::remove(std::span<const double> x) {
  if (x.size() != m_.size())
    throw invalid_input("observation has " + std::to_string(x.size()) +
                        " variables, state has " + std::to_string(m_.size()));
  if (count_ == 0)
    throw invalid_input("cannot remove an observation from an empty state");
  double prev_lambda = lambda_ - 1.0;
  for (std::size_t d = 0; d < m_.size(); ++d) {
    m_[d] = (lambda_ * m_[d] - x[d]) / prev_lambda;
    t_[d] -= x[d] * x[d];
  }
  lambda_ = prev_lambda;
  nu_ -= 1.0;
  --count_;
  cache_ok_ = false;
}

void ClusterState::refresh_cache() const {
  const std::size_t dim = m_.size();
  pred_scale_.resize(dim);
  double log_nu_s_sum = 0.0;
  double scale_factor = lambda_ / (1.0 + lambda_);
  for (std::size_t d = 0; d < dim; ++d) {
    double nu_s = checked_nu_s(t_[d], lambda_, m_[d], d);
    log_nu_s_sum += std::log(nu_s);
    pred_scale_[d] = scale_factor / nu_s;
  }
  // per-variable constant of the t density, nu*sigma^2 = (1+lambda)/lambda * nu*S
  double c = std::lgamma(0.5 * (nu_ + 1.0)) - std::lgamma(0.5 * nu_) -
             0.5 * (kLogPi + std::log((1.0 + lambda_) / lambda_));
  log_nu_s_sum_ = log_nu_s_sum;
  pred_const_ = static_cast<double>(dim) * c - 0.5 * log_nu_s_sum;
  pred_shape_ = 0.5 * (nu_ + 1.0);
  cache_ok_ = true;
}

double ClusterState::predictive_log_density(std::span<const double> x) const {
  if (x.size() != m_.size())
    throw invalid_input("observation dimension mismatch in predictive");
  if (!cache_ok_) refresh_cache();
  double acc = 0.0;
  const double* xv = x.data();
  const double* mv = m_.data();
  const double* sv = pred_scale_.data();
  const std::size_t dim = m_.size();
  for (std::size_t d = 0; d < dim; ++d) {
    double dx = xv[d] - mv[d];
    acc += std::log1p(dx * dx * sv[d]);
  }
  return pred_const_ - pred_shape_ * acc;
}

double ClusterState::log_marginal_likelihood(
    const Hyperparameters& prior) const {
  if (prior.n_vars() != m_.size())
    throw invalid_input("hyperparameter dimension mismatch in marginal");
  if (count_ == 0) return 0.0;
  if (!cache_ok_) refresh_cache();
  double n = static_cast<double>(count_);
  double per_var = -0.5 * n * kLogPi + std::lgamma(0.5 * nu_) -
                   std::lgamma(0.5 * prior.nu0) +
                   0.5 * (std::log(prior.lambda0) - std::log(lambda_)) +
                   0.5 * prior.nu0 * std::log(prior.nu0 * prior.s0);
  return static_cast<double>(m_.size()) * per_var - 0.5 * nu_ * log_nu_s_sum_;
}

double scalar_log_marginal(std::size_t n, double sum, double sumsq,
                           double mu0, double lambda0, double nu0, double s0) {
  if (n == 0) return 0.0;
  double nn = static_cast<double>(n);
  double lambda = lambda0 + nn;
  double nu = nu0 + nn;
  double m = (lambda0 * mu0 + sum) / lambda;
  double t = nu0 * s0 + lambda0 * mu0 * mu0 + sumsq;
  double nu_s = checked_nu_s(t, lambda, m, 0);
  return -0.5 * nn * kLogPi + std::lgamma(0.5 * nu) - std::lgamma(0.5 * nu0) +
         0.5 * (std::log(lambda0) - std::log(lambda)) +
         0.5 * (nu0 * std::log(nu0 * s0) - nu * std::log(nu_s));
}

}  // namespace sugs
