#pragma once
// Uhlmann fidelity and Bures distance on truncated density operators, with
// structure-aware fast paths, plus the closed-form lossy-superposition
// distances for coherent-state families and the cloner-specific distances.

#include "mqs/amplifiers.hpp"
#include "mqs/fock.hpp"

namespace mqs {

struct DistanceResult {
  double fidelity = 0.0;
  double bures = 0.0;
  std::string method;     // pure-overlap | commuting-diagonal | blockwise | hermitian-eig
  double residual = 0.0;  // negative-eigenvalue mass clipped along the way
};

// Uhlmann fidelity [tr sqrt(sqrt(rho) sigma sqrt(rho))]^2. Preconditions:
// same basis; traces within 1e-6 of each other (sub-unit traces from
// truncation are compared as-is, never renormalized). Dispatch: rank-one
// inputs use the pure overlap; diagonal inputs use (sum sqrt(p q))^2; a
// shared block structure is evaluated blockwise; otherwise a dense
// Hermitian eigendecomposition. Eigenvalues below -1e-9 are an integrity
// error, as is clipped negative mass above 1e-6.
DistanceResult fidelity(const DensityOperator& rho, const DensityOperator& sigma);

// sqrt(1 - sqrt(fidelity)) packaged with the fidelity itself.
DistanceResult bures(const DensityOperator& rho, const DensityOperator& sigma);

// Distance between the lossy images of the two coherent-state
// superpositions at reflectivity R: sqrt(1 - sqrt(1 - e^{-4 R |alpha|^2})).
double coherent_mqs_distance_closed(double R, double alpha_sq);
// Distance between the lossy component states |alpha>, |-alpha>:
// sqrt(1 - sqrt(e^{-4 T |alpha|^2})), T = 1 - R.
double component_distance_coherent(double R, double alpha_sq);

// Distance between the lossy universal-cloner outputs for orthogonal seeds.
// The seed direction only changes labels, never the value: the computation
// factorizes over the two squeezer pairs, so only pair-sized eigenproblems
// are solved and the two factor fidelities are multiplied.
DistanceResult universal_distance(const Gain& gain, double T1, double T2,
                                  const QubitDirection& basis, int cutoff);

enum class PcPair { macrostates, superpositions };

// Distance between lossy phase-covariant images under equal loss T on both
// polarization modes: either the two equatorial macrostates (seeds at
// phases 0 and pi) or the two odd/even superpositions.
DistanceResult pc_distance(const Gain& gain, double T, PcPair pair, int cutoff);

}  // namespace mqs
