#pragma once

// Test-only numerical oracles, independent of the library's closed forms:
// adaptive Simpson quadrature and a brute-force evaluation of the
// normal-inverse-chi-squared marginal likelihood by 2-D integration over
// (mean, log variance).

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace oracle {

inline double simpson(const std::function<double(double)>& f, double a,
                      double fa, double m, double fm, double b, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_step(const std::function<double(double)>& f, double a,
                            double fa, double b, double fb, double m,
                            double fm, double whole, double tol, int depth) {
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = simpson(f, a, fa, lm, flm, m, fm);
  double right = simpson(f, m, fm, rm, frm, b, fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         adaptive_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

// Adaptive Simpson with an initial uniform split so narrow peaks inside a
// wide domain are not missed.
inline double integrate(const std::function<double(double)>& f, double a,
                        double b, double tol = 1e-10, int panels = 64) {
  double h = (b - a) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    double lo = a + p * h, hi = a + (p + 1) * h, mid = 0.5 * (lo + hi);
    double flo = f(lo), fhi = f(hi), fmid = f(mid);
    double whole = simpson(f, lo, flo, mid, fmid, hi, fhi);
    total += adaptive_step(f, lo, flo, hi, fhi, mid, fmid, whole,
                           tol / panels, 48);
  }
  return total;
}

// Integral of f over the whole real line through x = c + s*tan(u); handles
// heavy polynomial tails.
inline double integrate_real_line(const std::function<double(double)>& f,
                                  double center, double scale,
                                  double tol = 1e-10) {
  const double half_pi = 1.5707963267948966;
  auto g = [&](double u) {
    double t = std::tan(u);
    double x = center + scale * t;
    double sec2 = 1.0 + t * t;
    return f(x) * scale * sec2;
  };
  return integrate(g, -half_pi + 1e-12, half_pi - 1e-12, tol, 128);
}

inline double log_normal_pdf(double x, double mean, double var) {
  double d = x - mean;
  return -0.5 * (std::log(2.0 * 3.14159265358979323846 * var) + d * d / var);
}

// scaled inverse chi-squared density of var with dof nu and scale s:
// (nu*s/2)^(nu/2) / Gamma(nu/2) * var^-(nu/2+1) * exp(-nu*s/(2*var))
inline double log_inv_chi2_pdf(double var, double nu, double s) {
  double half_nu = 0.5 * nu;
  return half_nu * std::log(0.5 * nu * s) - std::lgamma(half_nu) -
         (half_nu + 1.0) * std::log(var) - 0.5 * nu * s / var;
}

// log integral of  prod_i N(x_i | mu, var) * N(mu | mu0, var/lambda0)
//                  * InvChi2(var | nu0, s0)  d mu d var
// by nested adaptive Simpson over (mu, y = log var).
inline double log_marginal_quadrature(std::span<const double> xs, double mu0,
                                      double lambda0, double nu0, double s0) {
  const std::size_t n = xs.size();
  double sum = 0.0, sumsq = 0.0;
  double lo_x = mu0, hi_x = mu0;
  for (double x : xs) {
    sum += x;
    sumsq += x * x;
    lo_x = std::min(lo_x, x);
    hi_x = std::max(hi_x, x);
  }
  double mean_x = n ? sum / n : mu0;
  double spread = 0.0;
  for (double x : xs) spread += (x - mean_x) * (x - mean_x);
  // rough posterior-scale guess, only used to centre the integration domain
  double var_guess = (nu0 * s0 + spread + 1e-3) / (nu0 + n);
  double y_lo = std::log(var_guess) - 30.0;
  double y_hi = std::log(var_guess) + 30.0;

  auto log_joint = [&](double mu, double var) {
    double acc = log_normal_pdf(mu, mu0, var / lambda0) +
                 log_inv_chi2_pdf(var, nu0, s0);
    for (double x : xs) acc += log_normal_pdf(x, mu, var);
    return acc;
  };

  // global shift from a coarse scan so exponentials stay representable
  double shift = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 60; ++i) {
    double y = y_lo + (y_hi - y_lo) * i / 60.0;
    double var = std::exp(y);
    double prec = (lambda0 + n) / var;
    double centre = (lambda0 * mu0 + sum) / (lambda0 + n);
    for (int j = -6; j <= 6; ++j) {
      double mu = centre + j / std::sqrt(prec);
      shift = std::max(shift, log_joint(mu, var));
    }
  }

  auto outer = [&](double y) {
    double var = std::exp(y);
    // the mu-integrand is proportional to a Gaussian with this precision
    double prec = (lambda0 + n) / var;
    double sd = 1.0 / std::sqrt(prec);
    double centre = (lambda0 * mu0 + sum) / (lambda0 + n);
    double lo = centre - 14.0 * sd;
    double hi = centre + 14.0 * sd;
    double inner = integrate(
        [&](double mu) { return std::exp(log_joint(mu, var) - shift); }, lo,
        hi, 1e-12, 32);
    return inner * var;  // Jacobian of y = log var
  };
  double value = integrate(outer, y_lo, y_hi, 1e-12, 96);
  return std::log(value) + shift;
}

// Student-t log density with location/scale2/dof, written independently of
// the library implementation.
inline double student_t_logpdf(double x, double location, double scale2,
                               double dof) {
  double z = (x - location) * (x - location) / (dof * scale2);
  return std::lgamma(0.5 * (dof + 1.0)) - std::lgamma(0.5 * dof) -
         0.5 * std::log(dof * 3.14159265358979323846 * scale2) -
         0.5 * (dof + 1.0) * std::log(1.0 + z);
}

}  // namespace oracle
