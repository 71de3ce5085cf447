#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace basisrisk::stats {

// All second moments here are population moments (divide by n, not n-1).
// That convention makes the variance-decomposition identities used by the
// index-insurance algebra hold exactly in-sample instead of only up to a
// (n-1)/n factor.

double mean(std::span<const double> x);
double variance(std::span<const double> x);         // population
double stddev(std::span<const double> x);
double covariance(std::span<const double> x, std::span<const double> y);
double correlation(std::span<const double> x, std::span<const double> y);

struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
};

// Simple OLS of y on x (with intercept). Errors if x has zero variance.
LinearFit simple_ols(std::span<const double> x, std::span<const double> y);

// Average-rank Spearman correlation.
double spearman(std::span<const double> x, std::span<const double> y);

// Ranks with ties sharing the average rank (1-based).
std::vector<double> average_ranks(std::span<const double> x);

// Solves a 3x3 linear system in place via Gaussian elimination with
// partial pivoting. Errors on a (near-)singular matrix.
void solve3(double a[3][3], double b[3], double out[3]);

// Standard normal density, distribution, and quantile. The quantile is
// Wichura's PPND16 rational approximation (double precision throughout),
// chosen over bisection so draws are cheap and bit-stable everywhere.
double norm_pdf(double x);
double norm_cdf(double x);
double norm_ppf(double p);  // errors outside (0,1)

}  // namespace basisrisk::stats
