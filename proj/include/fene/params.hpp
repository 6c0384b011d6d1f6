#pragma once
#include <stdexcept>

namespace fene {

// The five dimensionless material inputs. Valid iff 0<gamma<1, all others
// positive and n_param*r_param^2 > 2 (so delta > 1 and the stress quadrature
// converges).
struct PhysicalParams {
  double gamma = 0.5;
  double reynolds = 1.0;
  double weissenberg = 1.0;
  double n_param = 2.0;  // FENE spring parameter N
  double r_param = 2.0;  // maximum dumbbell extension R

  void validate() const;
};

// Closed-form derived constants:
//   alpha1 = gamma/Re
//   alpha2 = gamma(1-gamma)/(Re We^2) * (2 delta/N)^2
//   alpha3 = 1/(4 delta We)
//   delta  = N R^2 / 2
//   alpha4 = pi alpha2^2 / (8 delta^4 alpha1 alpha3)
//   a_eq   = (delta+1)/(pi R^2)
struct DerivedParams {
  double alpha1 = 0, alpha2 = 0, alpha3 = 0, alpha4 = 0;
  double delta = 0;
  double a_eq = 0;
  double r_param = 0;  // carried along for condition checks and mass targets
};

DerivedParams derive_params(const PhysicalParams& p);

struct ConditionReport {
  double margin = 0;  // alpha1*alpha3*delta^2*R^2 - 2*c_product*alpha2
  bool satisfied = false;
};

// Coefficient smallness condition for the energy estimate, with the
// non-constructive constant product exposed as a knob. Reported as a signed
// margin, not a hard gate.
ConditionReport check_coefficient_condition(const DerivedParams& d, double c_product);

}  // namespace fene
