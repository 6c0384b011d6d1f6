#pragma once
#include <vector>

namespace fene {

// Least-squares fit of log(norm) = intercept - rate * t. The leading
// skip_fraction of samples is dropped (transient), as are samples at or
// below the noise floor; if nothing usable remains the sentinel flag is set.
struct DecayFit {
  double rate = 0.0;
  double intercept = 0.0;  // log of the fitted amplitude
  double r_squared = 0.0;
  int n_used = 0;
  bool below_noise_floor = false;
};

DecayFit fit_exponential_decay(const std::vector<double>& t,
                               const std::vector<double>& norm,
                               double skip_fraction = 0.2,
                               double noise_floor = 1e-12);

}  // namespace fene
