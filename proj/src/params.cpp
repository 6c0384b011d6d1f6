#include "fene/params.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace fene {

void PhysicalParams::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument(msg); };
  if (!(gamma > 0.0 && gamma < 1.0))
    fail("gamma must lie in (0,1), got " + std::to_string(gamma));
  if (!(reynolds > 0.0)) fail("reynolds must be > 0");
  if (!(weissenberg > 0.0)) fail("weissenberg must be > 0");
  if (!(n_param > 0.0)) fail("n_param must be > 0");
  if (!(r_param > 0.0)) fail("r_param must be > 0");
  if (!(n_param * r_param * r_param > 2.0))
    fail("N*R^2 must exceed 2 (got " + std::to_string(n_param * r_param * r_param) +
         "), otherwise delta <= 1");
}

DerivedParams derive_params(const PhysicalParams& p) {
  p.validate();
  DerivedParams d;
  d.delta = 0.5 * p.n_param * p.r_param * p.r_param;
  d.alpha1 = p.gamma / p.reynolds;
  const double two_delta_over_n = 2.0 * d.delta / p.n_param;
  d.alpha2 = p.gamma * (1.0 - p.gamma) / (p.reynolds * p.weissenberg * p.weissenberg) *
             two_delta_over_n * two_delta_over_n;
  d.alpha3 = 1.0 / (4.0 * d.delta * p.weissenberg);
  d.alpha4 = std::numbers::pi * d.alpha2 * d.alpha2 /
             (8.0 * std::pow(d.delta, 4) * d.alpha1 * d.alpha3);
  d.a_eq = (d.delta + 1.0) / (std::numbers::pi * p.r_param * p.r_param);
  d.r_param = p.r_param;
  return d;
}

ConditionReport check_coefficient_condition(const DerivedParams& d, double c_product) {
  if (!(c_product > 0.0)) throw std::invalid_argument("c_product must be > 0");
  if (!(d.alpha2 > 0.0))
    throw std::invalid_argument("alpha2 must be > 0 (gamma=1 limit is outside the domain)");
  ConditionReport r;
  r.margin = d.alpha1 * d.alpha3 * d.delta * d.delta * d.r_param * d.r_param -
             2.0 * c_product * d.alpha2;
  r.satisfied = r.margin >= 0.0;
  return r;
}

}  // namespace fene
