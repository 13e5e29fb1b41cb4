#include "rdlab/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rdlab {

MCEstimate summarize(std::span<const double> samples, std::size_t aborted) {
  MCEstimate e;
  e.n_samples = samples.size();
  e.n_aborted = aborted;
  if (samples.empty()) return e;
  double s = 0.0;
  for (double v : samples) s += v;
  e.mean = s / static_cast<double>(samples.size());
  if (samples.size() < 2) return e;
  double ss = 0.0;
  for (double v : samples) ss += (v - e.mean) * (v - e.mean);
  const double n = static_cast<double>(samples.size());
  e.std_error = std::sqrt(ss / (n - 1.0) / n);
  return e;
}

double unbiased_square_of_mean(double sum, double sum_sq, std::size_t n) {
  if (n < 2) throw std::invalid_argument("unbiased_square_of_mean: need n >= 2");
  const double dn = static_cast<double>(n);
  return (sum * sum - sum_sq) / (dn * (dn - 1.0));
}

LinearFit weighted_linear_fit(std::span<const double> x, std::span<const double> y,
                              std::span<const double> w) {
  if (x.size() != y.size() || x.size() != w.size() || x.size() < 2)
    throw std::invalid_argument("weighted_linear_fit: need >= 2 matching points");
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
  }
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += w[i] * (x[i] - mx) * (x[i] - mx);
    sxy += w[i] * (x[i] - mx) * (y[i] - my);
    syy += w[i] * (y[i] - my) * (y[i] - my);
  }
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.slope_se = std::sqrt(1.0 / sxx);
  double sse = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    sse += w[i] * r * r;
  }
  f.r2 = syy > 0 ? 1.0 - sse / syy : 1.0;
  // inflate by the reduced chi^2 when the scatter exceeds the stated variances
  if (x.size() > 2) f.slope_se *= std::sqrt(std::max(1.0, sse / static_cast<double>(x.size() - 2)));
  return f;
}

}  // namespace rdlab

namespace rdlab {

std::size_t allowed_exceedances(std::size_t n, double p, double alpha) {
  // P(X > k) accumulated from the pmf
  double pmf = std::pow(1.0 - p, static_cast<double>(n));
  double cdf = pmf;
  std::size_t k = 0;
  while (1.0 - cdf >= alpha && k < n) {
    pmf *= static_cast<double>(n - k) / static_cast<double>(k + 1) * p / (1.0 - p);
    ++k;
    cdf += pmf;
  }
  return k;
}

bool battery_pass(std::span<const double> z_scores, double hard_limit) {
  std::size_t over = 0;
  for (double z : z_scores) {
    if (!(z <= hard_limit)) return false;
    if (z > 3.0) ++over;
  }
  return over <= allowed_exceedances(z_scores.size());
}

}  // namespace rdlab
