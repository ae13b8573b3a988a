#include "mqs/ofilter.hpp"

#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

namespace mqs {

namespace {

// Below this success probability the renormalization 1/p_filt is meaningless.
constexpr double kEmptyTol = 1e-12;

// Acceptance indicator per basis index: |m - n| >= kappa.
std::vector<char> acceptance_set(const MultiModeBasis& basis, int kappa) {
  std::vector<char> keep(static_cast<std::size_t>(basis.dim()));
  for (long idx = 0; idx < basis.dim(); ++idx) {
    const int m = basis.occupation_of(idx, 0);
    const int n = basis.occupation_of(idx, 1);
    keep[static_cast<std::size_t>(idx)] = std::abs(m - n) >= kappa ? 1 : 0;
  }
  return keep;
}

}  // namespace

FilterResult apply_ofilter(const DensityOperator& rho, const FilterSpec& spec) {
  if (spec.kappa < 0)
    throw config_error("apply_ofilter: kappa must be non-negative, got " +
                       std::to_string(spec.kappa));
  if (rho.basis.num_modes() != 2)
    throw config_error("apply_ofilter: expected a two-mode operator, got " +
                       std::to_string(rho.basis.num_modes()) + " modes");
  if (spec.kappa == 0) return {rho, 1.0};  // the identity filter
  if (spec.kappa > rho.basis.cutoff)
    throw config_error(
        "apply_ofilter: empty acceptance region (kappa " +
        std::to_string(spec.kappa) +
        " exceeds every photon-number difference below cutoff " +
        std::to_string(rho.basis.cutoff) + ")");

  const std::vector<char> keep = acceptance_set(rho.basis, spec.kappa);
  FilterResult out{rho, 0.0};
  // Pi rho Pi with diagonal Pi: an entry survives iff both of its indices are
  // accepted; the surviving diagonal sums to the success probability.
  if (out.rho.is_blocked()) {
    for (auto& blk : out.rho.blocks) {
      const long n = static_cast<long>(blk.indices.size());
      for (long r = 0; r < n; ++r) {
        if (keep[static_cast<std::size_t>(blk.indices[r])]) {
          out.p_filt += blk.mat(r, r).real();
        } else {
          blk.mat.row(r).setZero();
          blk.mat.col(r).setZero();
        }
      }
    }
  } else {
    const long d = out.rho.basis.dim();
    for (long r = 0; r < d; ++r) {
      if (keep[static_cast<std::size_t>(r)]) {
        out.p_filt += out.rho.matrix(r, r).real();
      } else {
        out.rho.matrix.row(r).setZero();
        out.rho.matrix.col(r).setZero();
      }
    }
  }
  if (out.p_filt < kEmptyTol)
    throw config_error(
        "apply_ofilter: filtered to nothing (success probability " +
        std::to_string(out.p_filt) + " below 1e-12 at kappa " +
        std::to_string(spec.kappa) + ")");

  const double inv = 1.0 / out.p_filt;
  if (out.rho.is_blocked()) {
    for (auto& blk : out.rho.blocks) blk.mat *= inv;
  } else {
    out.rho.matrix *= inv;
  }
  out.rho.trace_deficit = 0.0;  // renormalized: the books close at exactly one
  return out;
}

DistanceResult filtered_distance(const Gain& gain, double eta,
                                 const FilterSpec& spec, int cutoff) {
  const FilterResult a =
      apply_ofilter(reduced_k1_lossy(gain, eta, cutoff, false), spec);
  const FilterResult b =
      apply_ofilter(reduced_k1_lossy(gain, eta, cutoff, true), spec);
  return bures(a.rho, b.rho);
}

}  // namespace mqs
