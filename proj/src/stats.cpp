#include "basisrisk/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "basisrisk/errors.hpp"

namespace basisrisk::stats {

double mean(std::span<const double> x) {
  if (x.empty()) fail(ErrorKind::insufficient_data, "mean of empty sequence");
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
  double m = mean(x);
  double s = 0.0;
  for (double v : x) {
    double d = v - m;
    s += d * d;
  }
  return s / static_cast<double>(x.size());
}

double stddev(std::span<const double> x) { return std::sqrt(variance(x)); }

double covariance(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    fail(ErrorKind::validation, "covariance: length mismatch");
  if (x.empty()) fail(ErrorKind::insufficient_data, "covariance of empty sequence");
  double mx = mean(x), my = mean(y);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - mx) * (y[i] - my);
  return s / static_cast<double>(x.size());
}

double correlation(std::span<const double> x, std::span<const double> y) {
  double vx = variance(x), vy = variance(y);
  if (vx <= 0.0 || vy <= 0.0)
    fail(ErrorKind::degenerate, "correlation: zero-variance input");
  return covariance(x, y) / std::sqrt(vx * vy);
}

LinearFit simple_ols(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) fail(ErrorKind::validation, "ols: length mismatch");
  if (x.size() < 2) fail(ErrorKind::insufficient_data, "ols: need at least 2 points");
  double vx = variance(x);
  if (vx <= 0.0) fail(ErrorKind::degenerate, "ols: regressor has zero variance");
  LinearFit f;
  f.slope = covariance(x, y) / vx;
  f.intercept = mean(y) - f.slope * mean(x);
  return f;
}

std::vector<double> average_ranks(std::span<const double> x) {
  std::size_t n = x.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && x[idx[j + 1]] == x[idx[i]]) ++j;
    // tied block [i, j] shares the average of ranks i+1 .. j+1
    double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) fail(ErrorKind::validation, "spearman: length mismatch");
  if (x.size() < 2) fail(ErrorKind::insufficient_data, "spearman: need at least 2 points");
  auto rx = average_ranks(x);
  auto ry = average_ranks(y);
  return correlation(rx, ry);
}

void solve3(double a[3][3], double b[3], double out[3]) {
  int perm[3] = {0, 1, 2};
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::fabs(a[perm[r]][col]) > std::fabs(a[perm[piv]][col])) piv = r;
    std::swap(perm[col], perm[piv]);
    double p = a[perm[col]][col];
    if (std::fabs(p) < 1e-12)
      fail(ErrorKind::degenerate, "solve3: singular system");
    for (int r = col + 1; r < 3; ++r) {
      double f = a[perm[r]][col] / p;
      for (int c = col; c < 3; ++c) a[perm[r]][c] -= f * a[perm[col]][c];
      b[perm[r]] -= f * b[perm[col]];
    }
  }
  for (int row = 2; row >= 0; --row) {
    double s = b[perm[row]];
    for (int c = row + 1; c < 3; ++c) s -= a[perm[row]][c] * out[c];
    out[row] = s / a[perm[row]][row];
  }
}

double norm_pdf(double x) {
  static const double inv_sqrt_2pi = 0.3989422804014327;
  return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

double norm_cdf(double x) {
  // erfc form keeps precision in the lower tail where 1 - erf(x) cancels.
  static const double inv_sqrt2 = 0.7071067811865476;
  return 0.5 * std::erfc(-x * inv_sqrt2);
}

double norm_ppf(double p) {
  if (!(p > 0.0 && p < 1.0))
    fail(ErrorKind::domain, "norm_ppf: p must lie strictly in (0,1)");

  // Wichura (1988), algorithm AS 241, PPND16.
  static const double a[8] = {
      3.3871328727963666080e0, 1.3314166789178437745e2,
      1.9715909503065514427e3, 1.3731693765509461125e4,
      4.5921953931549871457e4, 6.7265770927008700853e4,
      3.3430575583588128105e4, 2.5090809287301226727e3};
  static const double b[8] = {
      1.0, 4.2313330701600911252e1, 6.8718700749205790830e2,
      5.3941960214247511077e3, 2.1213794301586595867e4,
      3.9307895800092710610e4, 2.8729085735721942674e4,
      5.2264952788528545610e3};
  static const double c[8] = {
      1.42343711074968357734e0, 4.63033784615654529590e0,
      5.76949722146069140550e0, 3.64784832476320460504e0,
      1.27045825245236838258e0, 2.41780725177450611770e-1,
      2.27238449892691845833e-2, 7.74545014278341407640e-4};
  static const double d[8] = {
      1.0, 2.05319162663775882187e0, 1.67638483018380384940e0,
      6.89767334985100004550e-1, 1.48103976427480074590e-1,
      1.51986665636164571966e-2, 5.47593808499534494600e-4,
      1.05075007164441684324e-9};
  static const double e[8] = {
      6.65790464350110377720e0, 5.46378491116411436990e0,
      1.78482653991729133580e0, 2.96560571828504891230e-1,
      2.65321895265761230930e-2, 1.24266094738807843860e-3,
      2.71155556874348757815e-5, 2.01033439929228813265e-7};
  static const double f[8] = {
      1.0, 5.99832206555887937690e-1, 1.36929880922735805310e-1,
      1.48753612908506148525e-2, 7.86869131145613259100e-4,
      1.84631831751005468180e-5, 1.42151175831644588870e-7,
      2.04426310338993978564e-15};

  auto ratpoly = [](const double* num, const double* den, double r) {
    double n = num[7];
    for (int i = 6; i >= 0; --i) n = n * r + num[i];
    double m = den[7];
    for (int i = 6; i >= 0; --i) m = m * r + den[i];
    return n / m;
  };

  double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    double r = 0.180625 - q * q;
    return q * ratpoly(a, b, r);
  }
  double r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double x;
  if (r <= 5.0) {
    x = ratpoly(c, d, r - 1.6);
  } else {
    x = ratpoly(e, f, r - 5.0);
  }
  return (q < 0.0) ? -x : x;
}

}  // namespace basisrisk::stats
