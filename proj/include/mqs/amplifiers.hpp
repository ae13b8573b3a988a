#pragma once
// State generators: coherent states and their even/odd superpositions,
// phase-covariant amplifier macrostates and superpositions, two-mode
// squeezer outputs (spontaneous and one-photon-seeded), the four-mode
// universal-cloner output, and polarization-basis rotations.

#include "mqs/fock.hpp"

namespace mqs {

// g >= 0 with the derived hyperbolic factors kept alongside.
struct Gain {
  double g = 0.0;
  double C = 1.0;      // cosh g
  double Gamma = 0.0;  // tanh g

  Gain() = default;
  explicit Gain(double g_);
};

// Bloch direction (theta, phi); psi_perp is the antipodal qubit.
struct QubitDirection {
  double theta = 0.0;
  double phi = 0.0;

  QubitDirection() = default;
  QubitDirection(double theta_, double phi_);
  QubitDirection antipode() const;
};

enum class CatSign { plus, minus };

// Single-mode |alpha> truncated to the cutoff; requires |alpha|^2 <= cutoff/2.
PureState coherent_state(cxd alpha, int cutoff, const ModeLabel& mode = k1_H);

// Normalized (|alpha> + |-alpha>)/N (even Fock terms only) or the odd minus
// combination; alpha = 0 with the minus sign is the zero vector and rejected.
PureState cat_state(cxd alpha, CatSign sign, int cutoff,
                    const ModeLabel& mode = k1_H);

// Phase-covariant amplifier output for an equatorial seed with phase phi,
// on modes (k1,H),(k1,V):
//   (1/(sqrt(2) C^2)) sum_n Gamma^n sqrt(n+1) (|n+1,n> + e^{i phi}|n,n+1>).
PureState pc_amplified_state(const Gain& gain, double phi, int cutoff);
// Same, taking the seed direction; non-equatorial directions are rejected.
PureState pc_amplified_state(const Gain& gain, const QubitDirection& seed,
                             int cutoff);

// (pc(0) ± i pc(pi))/sqrt(2) with the global phase fixed so the result
// coincides entrywise with the circular-seed macrostate pc(∓pi/2); that
// identity is verified to 1e-10 at construction.
PureState pc_mqs(const Gain& gain, CatSign sign, int cutoff);

// Two-mode squeezer on (k1,psi),(k2,psi_perp), vacuum input:
//   (1/C) sum_n (s Gamma)^n |n,n>,  s = gamma_sign in {+1,-1}.
PureState tms_vacuum(const Gain& gain, int cutoff, int gamma_sign = +1);
// Same squeezer seeded with one photon in (k1,psi):
//   (1/C^2) sum_n (s Gamma)^n sqrt(n+1) |n+1,n>.
PureState tms_seeded(const Gain& gain, int cutoff, int gamma_sign = +1);

// Four-mode universal-cloner output for a one-photon seed in (k1,psi), on
// modes (k1,psi),(k1,psi_perp),(k2,psi),(k2,psi_perp):
//   (1/C^3) sum_{n,m} (s Gamma)^{n+m} (-1)^m sqrt(n+1) |n+1, m; m, n>.
// Built as tensor(tms_seeded, sign-flipped tms_vacuum) with modes reordered.
PureState universal_amplified_state(const Gain& gain, int cutoff,
                                    int gamma_sign = +1);

// Mean photon numbers from closed-form series, and gain inversion by
// bisection on them (tolerance 1e-10 on the mean).
double pc_total_mean(const Gain& gain);         // 1 + 4 sinh^2 g
double universal_total_mean(const Gain& gain);  // 1 + 6 sinh^2 g
double universal_k1_mean(const Gain& gain);     // 1 + 3 sinh^2 g
Gain pc_gain_for_mean(double nbar);
Gain universal_gain_for_mean(double nbar);

// Active one-qubit rotation W applied jointly to every spatial mode's
// polarization pair (pair = that spatial mode's two modes in list order).
// Exact within each fixed photon-number shell of a pair; amplitude pushed
// above the cutoff is added to the truncation deficit.
PureState basis_rotate(const PureState& state, const Eigen::Matrix2cd& w);
// Rotation taking direction `from` onto `to`, W = B(to) B(from)^dagger with
// B in SU(2), so B(H-direction) is the identity and the seed pattern of the
// cloner outputs is form-invariant.
PureState basis_rotate(const PureState& state, const QubitDirection& from,
                       const QubitDirection& to);
// The SU(2) column matrix [psi(d), psi_perp(d)] in (H,V) coordinates.
Eigen::Matrix2cd bloch_basis_matrix(const QubitDirection& d);

}  // namespace mqs
