#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "mqs/loss.hpp"

#include <cmath>
#include <complex>
#include <map>
#include <vector>

using namespace mqs;

namespace {

cxd ent(const DensityOperator& rho, std::vector<int> bra, std::vector<int> ket) {
  return rho.entry(rho.basis.index_of(bra), rho.basis.index_of(ket));
}

double hermiticity_defect(const DensityOperator& rho) {
  const MatrixXcd m = rho.to_dense();
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

double min_eigenvalue(const DensityOperator& rho) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(rho.to_dense());
  return es.eigenvalues().minCoeff();
}

// |psi><psi| stored block-keyed: support indices grouped by the label value.
DensityOperator blocked_projector(const PureState& psi, const BlockLabel& label) {
  std::map<long, std::vector<long>> groups;
  std::vector<int> occ(psi.basis.num_modes());
  for (long i = 0; i < psi.basis.dim(); ++i) {
    if (psi.amplitudes(i) == cxd(0.0, 0.0)) continue;
    psi.basis.occupation(i, occ);
    groups[label(occ)].push_back(i);
  }
  DensityOperator out;
  out.basis = psi.basis;
  out.block_label = label;
  out.block_label_name = label.name;
  out.trace_deficit = psi.truncation_deficit;
  for (auto& [v, idx] : groups) {
    DensityOperator::Block blk;
    blk.label = v;
    blk.indices = idx;
    const long n = static_cast<long>(idx.size());
    VectorXcd sub(n);
    for (long r = 0; r < n; ++r) sub(r) = psi.amplitudes(idx[r]);
    blk.mat = sub * sub.adjoint();
    out.blocks.push_back(std::move(blk));
  }
  return out;
}

const std::vector<ModeLabel> canonical{k1_psi, k1_psi_perp, k2_psi, k2_psi_perp};

}  // namespace

TEST_CASE("gauss series matches analytic values and terminating cases") {
  CHECK(hyp2f1({0.0, 3.1, 1.4, 0.7}) == 1.0);
  CHECK(hyp2f1({2.3, 1.9, 0.8, 0.0}) == 1.0);
  // 2F1(1,1;2;z) = -ln(1-z)/z on both signs of z.
  CHECK(std::abs(hyp2f1({1.0, 1.0, 2.0, 0.5}) - 2.0 * std::log(2.0)) < 1e-14);
  CHECK(std::abs(hyp2f1({1.0, 1.0, 2.0, -0.8}) - std::log(1.8) / 0.8) < 1e-14);
  // Negative-integer a truncates the series to a polynomial.
  {
    const double a = -3.0, b = 2.5, c = 1.7, z = 0.6;
    double direct = 0.0, term = 1.0;
    for (int k = 0; k <= 3; ++k) {
      direct += term;
      term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z;
    }
    CHECK(std::abs(hyp2f1({a, b, c, z}) - direct) < 1e-15);
  }
  // Negative non-integer c is fine; negative-integer c poles are rejected.
  CHECK(std::isfinite(hyp2f1({0.3, 0.7, -0.5, 0.2})));
  CHECK_THROWS_AS(hyp2f1({1.0, 1.0, 0.0, 0.5}), config_error);
  CHECK_THROWS_AS(hyp2f1({1.0, 1.0, -2.0, 0.5}), config_error);
  CHECK_THROWS_AS(hyp2f1({1.0, 1.0, 2.0, 1.0}), config_error);
  CHECK_THROWS_AS(hyp2f1({1.0, 1.0, 2.0, -1.0}), config_error);
  // Near the unit circle the tolerance is unreachable in the term budget.
  CHECK_THROWS_AS(hyp2f1({1.0, 1.0, 2.0, 0.9999999}), integrity_error);
}

TEST_CASE("loss channel preserves trace, hermiticity, and the deficit") {
  const auto rho = projector(pc_amplified_state(Gain(1.0), 0.7, 8));
  const auto out = apply_loss_kraus(rho, k1_H, 0.6);
  CHECK(std::abs(out.trace() - rho.trace()) < 1e-12);
  CHECK(hermiticity_defect(out) < 1e-14);
  CHECK(out.trace_deficit == rho.trace_deficit);
  CHECK(min_eigenvalue(out) > -1e-9);
}

TEST_CASE("loss channel endpoints are the identity and the mode eraser") {
  const auto rho = projector(tms_seeded(Gain(0.9), 6));
  CHECK(max_abs_diff(apply_loss_kraus(rho, k1_psi, 1.0), rho) == 0.0);

  const auto dark = apply_loss_kraus(rho, k1_psi, 0.0);
  CHECK(std::abs(dark.trace() - rho.trace()) < 1e-12);
  CHECK(mean_photon(dark, k1_psi) < 1e-15);
  // All surviving mass sits at zero occupation of the darkened mode.
  const auto arm = partial_trace(dark, {k1_psi});
  CHECK(std::abs(arm.entry(0, 0) - cxd(rho.trace(), 0.0)) < 1e-12);
}

TEST_CASE("loss channel composes as a beam-splitter cascade") {
  const auto rho = projector(tms_seeded(Gain(0.9), 8));
  const auto twice =
      apply_loss_kraus(apply_loss_kraus(rho, k1_psi, 0.8), k1_psi, 0.7);
  const auto once = apply_loss_kraus(rho, k1_psi, 0.8 * 0.7);
  CHECK(max_abs_diff(twice, once) < 1e-12);
}

TEST_CASE("loss channel dims a coherent state to the transmitted amplitude") {
  const cxd alpha(1.1, 0.4);
  const double T = 0.64;
  const auto rho = apply_loss_kraus(projector(coherent_state(alpha, 30)), k1_H, T);
  const auto dimmed = coherent_state(std::sqrt(T) * alpha, 30);
  const cxd overlap =
      dimmed.amplitudes.adjoint() * rho.matrix * dimmed.amplitudes;
  CHECK(std::abs(overlap - cxd(1.0, 0.0)) < 1e-10);
}

TEST_CASE("loss channel on block-keyed storage matches the dense path") {
  const auto dense = projector(tms_vacuum(Gain(0.8), 6));
  const auto label = photon_difference_label(dense.basis, "k1", "k2");
  const auto blocked = block_decompose(dense, label);
  REQUIRE(blocked.is_blocked());

  const auto out_d = apply_loss_kraus(dense, k1_psi, 0.55);
  const auto out_b = apply_loss_kraus(blocked, k1_psi, 0.55);
  CHECK(out_b.is_blocked());
  CHECK(out_b.block_label_name == label.name);
  CHECK(max_abs_diff(out_d, out_b) < 1e-15);
  CHECK(std::abs(out_b.trace() - out_d.trace()) < 1e-13);

  // Without the stored labeling functional the regrouping is ill-posed.
  DensityOperator stripped = blocked;
  stripped.block_label = BlockLabel{};
  CHECK_THROWS_AS(apply_loss_kraus(stripped, k1_psi, 0.55), config_error);
}

TEST_CASE("loss channel validates transmissivity and mode") {
  const auto rho = projector(tms_vacuum(Gain(0.5), 3));
  CHECK_THROWS_AS(apply_loss_kraus(rho, k1_psi, -0.1), config_error);
  CHECK_THROWS_AS(apply_loss_kraus(rho, k1_psi, 1.1), config_error);
  CHECK_THROWS_AS(apply_loss_kraus(rho, k1_H, 0.5), config_error);
}

TEST_CASE("pair reference at unit transmissivity restricts the projector") {
  const auto psi = tms_seeded(Gain(0.8), 12);
  const auto ref = lossy_pair_reference(psi, 1.0, 1.0, 8);
  const auto expected = projector(tms_seeded(Gain(0.8), 8));
  CHECK(max_abs_diff(ref, expected) == 0.0);
  CHECK(std::abs(ref.trace() + ref.trace_deficit - 1.0) < 1e-12);
}

TEST_CASE("pair reference agrees with sequential kraus maps on equal input") {
  const auto psi = tms_seeded(Gain(0.7), 8);
  const auto seq = apply_loss_kraus(
      apply_loss_kraus(projector(psi), k1_psi, 0.6), k2_psi_perp, 0.35);
  const auto ref = lossy_pair_reference(psi, 0.6, 0.35, 8);
  CHECK(max_abs_diff(seq, ref) < 1e-12);
}

TEST_CASE("pair reference validates its inputs") {
  const auto psi = tms_seeded(Gain(0.7), 6);
  CHECK_THROWS_AS(lossy_pair_reference(psi, -0.2, 0.5, 4), config_error);
  CHECK_THROWS_AS(lossy_pair_reference(psi, 0.5, 1.2, 4), config_error);
  CHECK_THROWS_AS(lossy_pair_reference(psi, 0.5, 0.5, 7), config_error);
  const auto four = universal_amplified_state(Gain(0.5), 3);
  CHECK_THROWS_AS(lossy_pair_reference(four, 0.5, 0.5, 3), config_error);
}

TEST_CASE("closed-form pair states match the exact channel output") {
  // Sources summed far past the output box, so the reference carries the
  // untruncated channel output to well below the comparison tolerance.
  const Gain gain(0.8);
  const double T1 = 0.7, T2 = 0.3;
  const int out = 8, headroom = 40;
  for (int s : {1, -1}) {
    CAPTURE(s);
    const auto seeded = lossy_seeded(gain, T1, T2, out, s);
    const auto seeded_ref =
        lossy_pair_reference(tms_seeded(gain, headroom, s), T1, T2, out);
    CHECK(max_abs_diff(seeded, seeded_ref) < 1e-12);

    const auto spont = lossy_spontaneous(gain, T1, T2, out, s);
    const auto spont_ref =
        lossy_pair_reference(tms_vacuum(gain, headroom, s), T1, T2, out);
    CHECK(max_abs_diff(spont, spont_ref) < 1e-12);
  }
}

TEST_CASE("loss channel reproduces pinned reference values") {
  const Gain gain(0.8);
  const auto seeded = apply_loss_kraus(
      apply_loss_kraus(projector(tms_seeded(gain, 10)), k1_psi, 0.7),
      k2_psi_perp, 0.3);
  CHECK(std::abs(seeded.trace() - 0.998168679565233) < 1e-12);
  CHECK(std::abs(ent(seeded, {1, 0}, {1, 0}) - 0.3199405859986706) < 1e-12);
  CHECK(std::abs(ent(seeded, {0, 0}, {0, 0}) - 0.1138758206786815) < 1e-12);
  CHECK(std::abs(ent(seeded, {2, 1}, {2, 1}) - 0.09082327152099835) < 1e-12);
  CHECK(std::abs(ent(seeded, {1, 0}, {3, 2}) - 0.07288416919396706) < 1e-12);
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(seeded.to_dense());
  CHECK(std::abs(es.eigenvalues().maxCoeff() - 0.427457686267545) < 1e-11);

  const auto spont = apply_loss_kraus(
      apply_loss_kraus(projector(tms_vacuum(gain, 10)), k1_psi, 0.7),
      k2_psi_perp, 0.3);
  CHECK(std::abs(spont.trace() - 0.999877474402528) < 1e-12);
  CHECK(std::abs(ent(spont, {0, 0}, {0, 0}) - 0.6161055665248567) < 1e-12);
  CHECK(std::abs(ent(spont, {1, 1}, {1, 1}) - 0.07570423609592625) < 1e-12);
  CHECK(std::abs(ent(spont, {1, 0}, {1, 0}) - 0.1467019666865036) < 1e-12);
  CHECK(std::abs(ent(spont, {2, 2}, {1, 1}) - 0.02753925977972487) < 1e-12);
  CHECK(std::abs(ent(spont, {1, 1}, {0, 0}) - 0.2066128720824993) < 1e-12);
  CHECK(std::abs(ent(spont, {3, 2}, {2, 1}) - 0.01480735858296111) < 1e-12);
}

TEST_CASE("squeezing sign flips entries with an odd seed-arm sum exactly") {
  const Gain gain(0.9);
  for (bool seeded : {false, true}) {
    CAPTURE(seeded);
    const auto plus = seeded ? lossy_seeded(gain, 0.6, 0.4, 6)
                             : lossy_spontaneous(gain, 0.6, 0.4, 6);
    const auto minus = seeded ? lossy_seeded(gain, 0.6, 0.4, 6, -1)
                              : lossy_spontaneous(gain, 0.6, 0.4, 6, -1);
    double worst = 0.0;
    std::vector<int> bra(2), ket(2);
    for (const auto& blk : plus.blocks)
      for (long r = 0; r < static_cast<long>(blk.indices.size()); ++r)
        for (long c = 0; c < static_cast<long>(blk.indices.size()); ++c) {
          plus.basis.occupation(blk.indices[r], bra);
          plus.basis.occupation(blk.indices[c], ket);
          const cxd expect = ((bra[0] + ket[0]) % 2 != 0 ? -1.0 : 1.0) *
                             blk.mat(r, c);
          worst = std::max(
              worst,
              std::abs(minus.entry(blk.indices[r], blk.indices[c]) - expect));
        }
    CHECK(worst == 0.0);
  }
  CHECK_THROWS_AS(lossy_spontaneous(Gain(0.5), 0.5, 0.5, 4, 0), config_error);
  CHECK_THROWS_AS(lossy_seeded(Gain(0.5), 0.5, 0.5, 4, 2), config_error);
}

TEST_CASE("closed-form pair states at the lossless and opaque endpoints") {
  const Gain gain(0.85);
  CHECK(max_abs_diff(lossy_seeded(gain, 1.0, 1.0, 7),
                     projector(tms_seeded(gain, 7))) < 1e-15);
  CHECK(max_abs_diff(lossy_spontaneous(gain, 1.0, 1.0, 7),
                     projector(tms_vacuum(gain, 7))) < 1e-15);

  for (bool seeded : {false, true}) {
    CAPTURE(seeded);
    const auto dark = seeded ? lossy_seeded(gain, 0.0, 0.0, 5)
                             : lossy_spontaneous(gain, 0.0, 0.0, 5);
    CHECK(std::abs(ent(dark, {0, 0}, {0, 0}) - 1.0) < 1e-14);
    CHECK(std::abs(dark.trace() - 1.0) < 1e-14);
    CHECK(dark.trace_deficit < 1e-12);
  }

  // Zero gain: the spontaneous pair is vacuum for any loss; the seeded pair
  // is a single photon through a beam splitter of transmissivity T1.
  const auto vac = lossy_spontaneous(Gain(0.0), 0.7, 0.4, 4);
  CHECK(std::abs(ent(vac, {0, 0}, {0, 0}) - 1.0) < 1e-15);
  CHECK(std::abs(vac.trace() - 1.0) < 1e-15);
  const auto one = lossy_seeded(Gain(0.0), 0.7, 0.9, 4);
  CHECK(std::abs(ent(one, {1, 0}, {1, 0}) - 0.7) < 1e-15);
  CHECK(std::abs(ent(one, {0, 0}, {0, 0}) - 0.3) < 1e-15);
  CHECK(std::abs(one.trace() - 1.0) < 1e-15);
}

TEST_CASE("closed-form pair states are positive difference-blocked operators") {
  const auto s = lossy_seeded(Gain(0.9), 0.5, 0.5, 6);
  CHECK(s.is_blocked());
  CHECK(s.block_label_name == "n[k1]-n[k2]");
  CHECK(s.blocks.size() == 13);  // every difference from -6 to 6
  for (size_t b = 1; b < s.blocks.size(); ++b)
    CHECK(s.blocks[b - 1].label < s.blocks[b].label);
  CHECK(ent(s, {2, 0}, {1, 2}) == cxd(0.0, 0.0));
  CHECK(hermiticity_defect(s) == 0.0);

  for (bool seeded : {false, true}) {
    CAPTURE(seeded);
    const auto rho = seeded ? lossy_seeded(Gain(0.8), 0.7, 0.3, 10)
                            : lossy_spontaneous(Gain(0.8), 0.7, 0.3, 10);
    CHECK(min_eigenvalue(rho) > -1e-9);
    CHECK(std::abs(rho.trace() + rho.trace_deficit - 1.0) < 1e-12);
  }

  CHECK_THROWS_AS(lossy_seeded(Gain(0.5), 0.5, 0.5, 0), config_error);
  CHECK_THROWS_AS(lossy_spontaneous(Gain(0.5), -0.1, 0.5, 4), config_error);
  CHECK_THROWS_AS(lossy_seeded(Gain(0.5), 0.5, 1.01, 4), config_error);
}

TEST_CASE("four-mode lossy state factorizes over the two squeezer pairs") {
  const Gain gain(0.6);
  const double T1 = 0.5, T2 = 0.8;

  // Local maps on distinct modes commute.
  {
    const auto rho = projector(universal_amplified_state(gain, 5));
    auto fwd = apply_loss_kraus(rho, k1_psi, T1);
    fwd = apply_loss_kraus(fwd, k1_psi_perp, T1);
    fwd = apply_loss_kraus(fwd, k2_psi, T2);
    fwd = apply_loss_kraus(fwd, k2_psi_perp, T2);
    auto rev = apply_loss_kraus(rho, k2_psi_perp, T2);
    rev = apply_loss_kraus(rev, k2_psi, T2);
    rev = apply_loss_kraus(rev, k1_psi_perp, T1);
    rev = apply_loss_kraus(rev, k1_psi, T1);
    CHECK(max_abs_diff(fwd, rev) < 1e-12);
  }

  // Sequential four-mode loss on block storage equals the tensor of the
  // per-pair channel outputs of the same truncated input.
  const auto basis = enumerate_basis(canonical, 8);
  const auto label = photon_difference_label(basis, "k1", "k2");
  {
    const auto rho =
        blocked_projector(universal_amplified_state(gain, 8), label);
    REQUIRE(rho.blocks.size() == 1);
    REQUIRE(rho.blocks[0].indices.size() == 72);
    auto seq = apply_loss_kraus(rho, k1_psi, T1);
    seq = apply_loss_kraus(seq, k1_psi_perp, T1);
    seq = apply_loss_kraus(seq, k2_psi, T2);
    seq = apply_loss_kraus(seq, k2_psi_perp, T2);

    const auto fact = tensor_blocked(
        lossy_pair_reference(tms_seeded(gain, 8), T1, T2, 8),
        relabel_modes(lossy_pair_reference(tms_vacuum(gain, 8, -1), T1, T2, 8),
                      {k1_psi_perp, k2_psi}),
        canonical, label);
    CHECK(max_abs_diff(seq, fact) < 1e-12);
  }

  // The assembled closed form carries the untruncated channel output.
  {
    const auto direct = lossy_universal(gain, T1, T2, 8);
    const auto fact_headroom = tensor_blocked(
        lossy_pair_reference(tms_seeded(gain, 40), T1, T2, 8),
        relabel_modes(
            lossy_pair_reference(tms_vacuum(gain, 40, -1), T1, T2, 8),
            {k1_psi_perp, k2_psi}),
        canonical, label);
    CHECK(max_abs_diff(direct, fact_headroom) < 1e-12);
    CHECK(std::abs(direct.trace() + direct.trace_deficit - 1.0) < 1e-12);
    CHECK(direct.block_label_name == "n[k1]-n[k2]");
  }

  // Lossless limit: the block-keyed projector itself.
  {
    const auto basis6 = enumerate_basis(canonical, 6);
    const auto label6 = photon_difference_label(basis6, "k1", "k2");
    const auto proj =
        blocked_projector(universal_amplified_state(gain, 6), label6);
    CHECK(max_abs_diff(lossy_universal(gain, 1.0, 1.0, 6), proj) < 1e-14);
  }
}

TEST_CASE("reduced arm state matches the traced and channel oracles") {
  // Lossless: partial trace of the four-mode projector, entry for entry.
  {
    const Gain gain(0.9);
    const auto basis = enumerate_basis(canonical, 10);
    const auto proj = blocked_projector(
        universal_amplified_state(gain, 10),
        photon_difference_label(basis, "k1", "k2"));
    const auto traced = partial_trace(proj, {k1_psi, k1_psi_perp});
    CHECK(max_abs_diff(reduced_k1_lossy(gain, 1.0, 10), traced) < 1e-13);
  }

  // Lossy: binomial damping of the lossless arm weights, fed through the
  // channel with enough source headroom to cover the comparison box.
  {
    const Gain gain(1.2);
    const double eta = 0.75;
    const int headroom = 80, box = 40;
    const double x = gain.Gamma * gain.Gamma;
    const double c6 = std::pow(gain.C, 6.0);
    DensityOperator diag;
    diag.basis = enumerate_basis({k1_psi, k1_psi_perp}, headroom);
    diag.block_label = BlockLabel{{headroom + 1, 1}, 0, "basis-index"};
    diag.block_label_name = diag.block_label.name;
    double captured = 0.0;
    for (long idx = 0; idx < diag.basis.dim(); ++idx) {
      const int a = static_cast<int>(idx / (headroom + 1));
      const int b = static_cast<int>(idx % (headroom + 1));
      const double w = a >= 1 ? a * std::pow(x, a + b - 1) / c6 : 0.0;
      captured += w;
      DensityOperator::Block blk;
      blk.label = idx;
      blk.indices = {idx};
      blk.mat = MatrixXcd::Constant(1, 1, w);
      diag.blocks.push_back(std::move(blk));
    }
    diag.trace_deficit = std::max(0.0, 1.0 - captured);
    const auto oracle = apply_loss_kraus(
        apply_loss_kraus(diag, k1_psi, eta), k1_psi_perp, eta);

    const auto reduced = reduced_k1_lossy(gain, eta, box);
    double worst = 0.0;
    for (int i = 0; i <= box; ++i)
      for (int j = 0; j <= box; ++j) {
        const long big = diag.basis.index_of(std::vector<int>{i, j});
        const long small = reduced.basis.index_of(std::vector<int>{i, j});
        worst = std::max(worst, std::abs(oracle.entry(big, big) -
                                         reduced.entry(small, small)));
      }
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("reduced arm state structure, symmetry, and endpoints") {
  // Swapping which polarization carried the seed transposes the weights.
  {
    const auto a = reduced_k1_lossy(Gain(1.1), 0.6, 8);
    const auto b = reduced_k1_lossy(Gain(1.1), 0.6, 8, true);
    double worst = 0.0;
    for (int i = 0; i <= 8; ++i)
      for (int j = 0; j <= 8; ++j)
        worst = std::max(
            worst, std::abs(ent(b, {i, j}, {i, j}) - ent(a, {j, i}, {j, i})));
    CHECK(worst == 0.0);
    CHECK(a.block_label_name == "basis-index");
    CHECK(a.blocks.size() == static_cast<size_t>(a.basis.dim()));
    CHECK(ent(a, {1, 0}, {0, 1}) == cxd(0.0, 0.0));
  }

  // Zero gain: the single seed photon through a beam splitter.
  {
    const auto rho = reduced_k1_lossy(Gain(0.0), 0.3, 3);
    CHECK(ent(rho, {1, 0}, {1, 0}) == cxd(0.3, 0.0));
    CHECK(ent(rho, {0, 0}, {0, 0}) == cxd(0.7, 0.0));
    CHECK(rho.trace() == 1.0);
    CHECK(rho.trace_deficit == 0.0);
  }

  // Truncation bookkeeping at a production-sized box.
  {
    const auto rho = reduced_k1_lossy(Gain(1.2), 0.75, 60);
    CHECK(rho.trace() > 1.0 - 1e-5);
    CHECK(rho.trace() <= 1.0 + 1e-12);
    CHECK(std::abs(rho.trace() + rho.trace_deficit - 1.0) < 1e-12);
  }

  // Mean photons across the arm match the closed-form series.
  {
    const Gain gain(1.2);
    const auto rho = reduced_k1_lossy(gain, 1.0, 60);
    const double total =
        mean_photon(rho, k1_psi) + mean_photon(rho, k1_psi_perp);
    CHECK(std::abs(total - universal_k1_mean(gain)) < 1e-6);
  }

  // The likeliest occupation at strong gain sits on the seeded polarization.
  {
    const auto rho = reduced_k1_lossy(Gain(1.5), 1.0, 30);
    double best = -1.0;
    std::vector<int> arg{-1, -1}, occ(2);
    for (long idx = 0; idx < rho.basis.dim(); ++idx) {
      const double p = rho.entry(idx, idx).real();
      if (p > best) {
        best = p;
        rho.basis.occupation(idx, occ);
        arg = occ;
      }
    }
    CHECK(arg == std::vector<int>{5, 0});
  }

  CHECK_THROWS_AS(reduced_k1_lossy(Gain(0.5), -0.1, 4), config_error);
  CHECK_THROWS_AS(reduced_k1_lossy(Gain(0.5), 1.1, 4), config_error);
  CHECK_THROWS_AS(reduced_k1_lossy(Gain(0.5), 0.5, 0), config_error);
}
