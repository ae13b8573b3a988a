#pragma once
// Beam-splitter loss: the exact Kraus-sum channel, a Gauss hypergeometric
// series evaluator, and closed-form lossy density operators for the
// squeezer-pair and reduced single-arm states.

#include "mqs/amplifiers.hpp"
#include "mqs/fock.hpp"

namespace mqs {

struct Hyp2F1Params {
  double a = 0.0;
  double b = 0.0;
  double c = 1.0;
  double z = 0.0;
};

// Power series sum_k (a)_k (b)_k / (c)_k z^k / k!, summed until the next
// term drops below 1e-16 of the partial sum. Requires |z| < 1 and c not a
// non-positive integer; gives up after 1e5 terms.
double hyp2f1(const Hyp2F1Params& p);

// Photon loss of transmissivity T on one mode: rho -> sum_p K_p rho K_p^dag
// with K_p = R^{p/2} a^p T^{n/2} / sqrt(p!). Exactly trace-preserving on the
// truncated space; block-keyed inputs stay block-keyed (the Kraus terms move
// bra and ket together, so any conserved occupation label stays conserved).
DensityOperator apply_loss_kraus(const DensityOperator& rho,
                                 const ModeLabel& mode, double T);

// Reference construction for a lossy two-mode pure state: builds the exact
// channel output of |psi><psi| restricted to out_cutoff, summing source
// terms from the full extent of psi. With psi generated at a cutoff whose
// truncation deficit is delta, every output entry is exact to within delta.
DensityOperator lossy_pair_reference(const PureState& psi, double T1, double T2,
                                     int out_cutoff);

// Closed-form lossy squeezer-pair states on (k1,psi),(k2,psi_perp) with
// transmissivities T1, T2 and optional squeezing sign s (Gamma -> s Gamma),
// block-keyed by the conserved difference d = n1 - n2.
DensityOperator lossy_spontaneous(const Gain& gain, double T1, double T2,
                                  int cutoff, int gamma_sign = +1);
DensityOperator lossy_seeded(const Gain& gain, double T1, double T2,
                             int cutoff, int gamma_sign = +1);

// Lossy four-mode universal-cloner state: tensor of the seeded pair on
// ((k1,psi),(k2,psi_perp)) and the sign-flipped spontaneous pair on
// ((k1,psi_perp),(k2,psi)), assembled in canonical mode order and
// block-keyed by N_{k1} - N_{k2}.
DensityOperator lossy_universal(const Gain& gain, double T1, double T2,
                                int cutoff);

// Reduced lossy cloning-arm state on (k1,psi),(k1,psi_perp): diagonal with
// weights (u = Gamma^2 (1 - eta))
//   p(i,j) = eta^{i+j} (1-u)^{-3-i-j} / C^6
//            * ( i Gamma^{2(i+j-1)} + Gamma^{2(i+j)} (1 - eta) ),
// the first term absent at i = 0; stored as 1x1 blocks keyed by basis index.
// seed_perp swaps the roles of psi and psi_perp (transposed weights).
DensityOperator reduced_k1_lossy(const Gain& gain, double eta, int cutoff,
                                 bool seed_perp = false);

}  // namespace mqs
