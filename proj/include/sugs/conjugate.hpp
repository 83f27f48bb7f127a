#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sugs/common.hpp"

namespace sugs {

// Normal-inverse-chi-squared prior for one Gaussian component, one set of
// hyperparameters shared by every variable except for the per-variable prior
// mean mu0. Variables are modelled as independent given the allocations
// (diagonal covariance throughout).
struct Hyperparameters {
  std::vector<double> mu0;  // prior mean, per variable
  double lambda0 = 0.01;    // prior precision scale
  double nu0 = 1.0;         // prior degrees of freedom
  double s0 = 0.2;          // prior scale

  Hyperparameters() = default;
  Hyperparameters(std::vector<double> mu0_, double lambda0_, double nu0_,
                  double s0_);

  std::size_t n_vars() const { return mu0.size(); }
  void validate() const;  // throws invalid_input on non-positive scales

  // Same lambda0/nu0/s0, mu0 restricted to the given variable subset.
  Hyperparameters restricted(std::span<const std::size_t> vars) const;

  // mu0 = per-column mean, lambda0 = 0.01, nu0 = number of columns, s0 = 0.2.
  static Hyperparameters data_defaults(const Matrix& data);
  static Hyperparameters constant(double mu0, double lambda0, double nu0,
                                  double s0, std::size_t n_vars);
};

// Sequential sufficient statistics for one cluster. lambda, nu and the
// observation count are shared across variables because every variable of an
// observation is absorbed together; the mean m and raw accumulator t are per
// variable. The scale statistic nu*S = t - lambda*m^2 is derived on demand
// and guarded against cancellation: nu*S < 1e-12 * t raises numerical_error
// rather than clamping.
class ClusterState {
 public:
  static ClusterState prior(const Hyperparameters& hyper);

  std::size_t n_vars() const { return m_.size(); }
  std::size_t count() const { return count_; }
  double lambda() const { return lambda_; }
  double nu() const { return nu_; }
  double mean(std::size_t d) const { return m_[d]; }
  double t(std::size_t d) const { return t_[d]; }
  double nu_s(std::size_t d) const;

  // m' = (lambda*m + x)/(lambda+1), lambda' = lambda+1, nu' = nu+1,
  // t' = t + x^2, per variable.
  void add(std::span<const double> x);

  // Exact inverse of add; requires count >= 1 and that x was incorporated.
  void remove(std::span<const double> x);

  ClusterState added(std::span<const double> x) const {
    ClusterState s = *this;
    s.add(x);
    return s;
  }
  ClusterState removed(std::span<const double> x) const {
    ClusterState s = *this;
    s.remove(x);
    return s;
  }

  // Sum over variables of the log density of a Student-t with location m,
  // dof nu and squared scale (1+lambda)*S/lambda evaluated at x.
  double predictive_log_density(std::span<const double> x) const;

  // Closed-form log marginal likelihood of the absorbed observations given
  // the prior this state was grown from; 0 when count == 0.
  double log_marginal_likelihood(const Hyperparameters& prior) const;

 private:
  double lambda_ = 0.0;
  double nu_ = 0.0;
  std::size_t count_ = 0;
  std::vector<double> m_;
  std::vector<double> t_;

  // Per-state evaluation cache; rebuilt lazily after add/remove. States are
  // exclusively owned per fit, so the mutable cache needs no synchronisation.
  mutable bool cache_ok_ = false;
  mutable double pred_const_ = 0.0;      // D*C - 0.5 * sum_d log(nu*S_d)
  mutable double pred_shape_ = 0.0;      // (nu + 1) / 2
  mutable double log_nu_s_sum_ = 0.0;    // sum_d log(nu*S_d)
  mutable std::vector<double> pred_scale_;  // lambda/((1+lambda)*nu*S_d)
  void refresh_cache() const;
};

// Log marginal likelihood of a batch of scalar observations summarised by
// (n, sum, sum of squares) under a scalar NIchi2 prior. Algebraically equal
// to growing a ClusterState sequentially; used on the scoring paths where
// only totals are kept.
double scalar_log_marginal(std::size_t n, double sum, double sumsq,
                           double mu0, double lambda0, double nu0, double s0);

}  // namespace sugs
