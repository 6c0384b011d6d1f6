#include "fene/decay_fit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fene {

DecayFit fit_exponential_decay(const std::vector<double>& t,
                               const std::vector<double>& norm, double skip_fraction,
                               double noise_floor) {
  if (t.size() != norm.size())
    throw std::invalid_argument("fit: t and norm must have equal length");
  if (skip_fraction < 0 || skip_fraction >= 1)
    throw std::invalid_argument("fit: skip_fraction must lie in [0,1)");

  DecayFit out;
  const std::size_t n = t.size();
  const std::size_t first = (std::size_t)(skip_fraction * (double)n);

  std::vector<double> xs, ys;
  double vmax = 0;
  for (std::size_t i = first; i < n; ++i) {
    vmax = std::max(vmax, norm[i]);
    if (norm[i] > noise_floor) {
      xs.push_back(t[i]);
      ys.push_back(std::log(norm[i]));
    }
  }
  if (vmax <= noise_floor || xs.size() < 2) {
    out.below_noise_floor = true;
    return out;
  }

  const double m = (double)xs.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double det = m * sxx - sx * sx;
  if (det <= 0) {
    out.below_noise_floor = true;
    return out;
  }
  const double slope = (m * sxy - sx * sy) / det;
  out.rate = -slope;
  out.intercept = (sy - slope * sx) / m;
  out.n_used = (int)xs.size();

  double ss_res = 0, ss_tot = 0;
  const double ybar = sy / m;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double yhat = out.intercept + slope * xs[i];
    ss_res += (ys[i] - yhat) * (ys[i] - yhat);
    ss_tot += (ys[i] - ybar) * (ys[i] - ybar);
  }
  out.r_squared = (ss_tot > 0) ? 1.0 - ss_res / ss_tot : 1.0;
  return out;
}

}  // namespace fene
