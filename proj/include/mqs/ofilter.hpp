#pragma once
// Orthogonality filter: the POVM that accepts two-mode events whose
// photon-number difference |m - n| meets a threshold, its success
// probability, and filtered distances of the reduced cloning-arm states.

#include "mqs/loss.hpp"
#include "mqs/metrics.hpp"

namespace mqs {

struct FilterSpec {
  int kappa = 0;  // threshold on |m - n|, >= 0
};

struct FilterResult {
  DensityOperator rho;  // Pi rho Pi / p_filt
  double p_filt = 0.0;  // tr(Pi rho)
};

// Projects onto the acceptance set {|m,n>: |m-n| >= kappa} of a two-mode
// operator and renormalizes by the success probability. kappa = 0 accepts
// everything (p_filt = 1, state unchanged). Errors: empty acceptance set
// (kappa above every reachable difference); p_filt < 1e-12.
FilterResult apply_ofilter(const DensityOperator& rho, const FilterSpec& spec);

// Bures distance between the filtered reduced cloning-arm states for the
// two orthogonal seeds, at transmissivity eta.
DistanceResult filtered_distance(const Gain& gain, double eta,
                                 const FilterSpec& spec, int cutoff);

}  // namespace mqs
