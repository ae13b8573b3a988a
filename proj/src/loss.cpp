#include "mqs/loss.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

namespace mqs {

double hyp2f1(const Hyp2F1Params& p) {
  if (!(std::abs(p.z) < 1.0))
    throw config_error("hyp2f1: series needs |z| < 1");
  if (p.c <= 0.0 && p.c == std::floor(p.c))
    throw config_error("hyp2f1: c must not be a non-positive integer");
  double sum = 1.0, term = 1.0;
  for (int k = 0; k < 100000; ++k) {
    term *= (p.a + k) * (p.b + k) / ((p.c + k) * (k + 1.0)) * p.z;
    sum += term;
    if (std::abs(term) < 1e-16 * std::abs(sum)) return sum;
  }
  throw integrity_error("hyp2f1: series did not converge within 1e5 terms");
}

namespace {

void check_transmissivity(double T, const char* what) {
  if (!(T >= 0.0 && T <= 1.0))
    throw config_error(std::string(what) + ": transmissivity outside [0, 1]");
}

// Kraus factor sqrt(C(n,p) R^p T^{n-p}) taking |n> to |n-p>.
struct LossWeights {
  int radix;
  std::vector<double> w;  // w[n*radix + p], 0 <= p <= n

  LossWeights(int cutoff, double T) : radix(cutoff + 1), w(radix * radix, 0.0) {
    const double R = 1.0 - T;
    std::vector<double> lf(radix + 1);
    for (int n = 0; n <= radix; ++n) lf[n] = std::lgamma(n + 1.0);
    for (int n = 0; n <= cutoff; ++n)
      for (int p = 0; p <= n; ++p)
        w[n * radix + p] =
            std::exp(0.5 * (lf[n] - lf[p] - lf[n - p])) *
            std::pow(R, 0.5 * p) * std::pow(T, 0.5 * (n - p));
  }

  double operator()(int n, int p) const { return w[n * radix + p]; }
};

}  // namespace

DensityOperator apply_loss_kraus(const DensityOperator& rho,
                                 const ModeLabel& mode, double T) {
  check_transmissivity(T, "apply_loss_kraus");
  const int mp = rho.basis.position_of(mode);
  if (mp < 0)
    throw config_error("apply_loss_kraus: mode " + to_string(mode) +
                       " not in basis");
  const int cutoff = rho.basis.cutoff;
  const long dim = rho.basis.dim();
  const LossWeights w(cutoff, T);
  long st = 1;
  for (int q = rho.basis.num_modes() - 1; q > mp; --q) st *= cutoff + 1;
  std::vector<int> dig(dim);
  for (long i = 0; i < dim; ++i) dig[i] = rho.basis.occupation_of(i, mp);

  DensityOperator out;
  out.basis = rho.basis;
  out.trace_deficit = rho.trace_deficit;

  if (!rho.is_blocked()) {
    out.matrix = MatrixXcd::Zero(dim, dim);
    for (long i = 0; i < dim; ++i)
      for (long j = 0; j < dim; ++j) {
        const cxd v = rho.matrix(i, j);
        if (v == cxd(0.0, 0.0)) continue;
        const int pm = std::min(dig[i], dig[j]);
        for (int p = 0; p <= pm; ++p)
          out.matrix(i - p * st, j - p * st) +=
              w(dig[i], p) * w(dig[j], p) * v;
      }
    return out;
  }

  const BlockLabel& label = rho.block_label;
  if (label.coeffs.empty())
    throw config_error(
        "apply_loss_kraus: block-keyed operator lacks its label functional");
  // Kraus terms move ket and bra together, so both land in the block whose
  // label is shifted by p times the lost mode's coefficient; regroup the
  // whole basis so every reachable label has a block.
  std::map<long, std::vector<long>> groups;
  std::vector<int> occ(rho.basis.num_modes());
  for (long i = 0; i < dim; ++i) {
    rho.basis.occupation(i, occ);
    groups[label(occ)].push_back(i);
  }
  out.block_label = label;
  out.block_label_name = label.name;
  out.blocks.reserve(groups.size());
  std::vector<int> blk_of(dim), pos_of(dim);
  for (auto& [v, idx] : groups) {
    DensityOperator::Block blk;
    blk.label = v;
    blk.indices = std::move(idx);
    blk.mat = MatrixXcd::Zero(blk.indices.size(), blk.indices.size());
    const int b = static_cast<int>(out.blocks.size());
    for (size_t pos = 0; pos < blk.indices.size(); ++pos) {
      blk_of[blk.indices[pos]] = b;
      pos_of[blk.indices[pos]] = static_cast<int>(pos);
    }
    out.blocks.push_back(std::move(blk));
  }
  for (const auto& src : rho.blocks) {
    const long n = static_cast<long>(src.indices.size());
    for (long r = 0; r < n; ++r)
      for (long c = 0; c < n; ++c) {
        const cxd v = src.mat(r, c);
        if (v == cxd(0.0, 0.0)) continue;
        const long i = src.indices[r], j = src.indices[c];
        const int pm = std::min(dig[i], dig[j]);
        for (int p = 0; p <= pm; ++p) {
          const long ti = i - p * st, tj = j - p * st;
          out.blocks[blk_of[ti]].mat(pos_of[ti], pos_of[tj]) +=
              w(dig[i], p) * w(dig[j], p) * v;
        }
      }
  }
  return out;
}

DensityOperator lossy_pair_reference(const PureState& psi, double T1, double T2,
                                     int out_cutoff) {
  check_transmissivity(T1, "lossy_pair_reference");
  check_transmissivity(T2, "lossy_pair_reference");
  if (psi.basis.num_modes() != 2)
    throw config_error("lossy_pair_reference: input must have two modes");
  const int nin = psi.basis.cutoff;
  if (out_cutoff < 0 || out_cutoff > nin)
    throw config_error(
        "lossy_pair_reference: output cutoff must not exceed the input's");
  const LossWeights w1(nin, T1), w2(nin, T2);
  const int r_in = nin + 1, r_out = out_cutoff + 1;
  auto amp = [&](int n, int m) { return psi.amplitudes(n * r_in + m); };

  DensityOperator out;
  out.basis = enumerate_basis(psi.basis.modes, out_cutoff);
  out.matrix = MatrixXcd::Zero(out.basis.dim(), out.basis.dim());
  for (int i = 0; i < r_out; ++i)
    for (int j = 0; j < r_out; ++j)
      for (int k = 0; k < r_out; ++k)
        for (int l = 0; l < r_out; ++l) {
          cxd sum(0.0, 0.0);
          for (int p1 = 0; i + p1 <= nin && k + p1 <= nin; ++p1)
            for (int p2 = 0; j + p2 <= nin && l + p2 <= nin; ++p2) {
              const cxd a = amp(i + p1, j + p2);
              if (a == cxd(0.0, 0.0)) continue;
              const cxd b = amp(k + p1, l + p2);
              if (b == cxd(0.0, 0.0)) continue;
              sum += a * std::conj(b) * w1(i + p1, p1) * w1(k + p1, p1) *
                     w2(j + p2, p2) * w2(l + p2, p2);
            }
          out.matrix(i * r_out + j, k * r_out + l) = sum;
        }
  // Mass the restriction discards: the input's own truncation plus whatever
  // the channel leaves above out_cutoff.
  out.trace_deficit = std::max(0.0, 1.0 - out.matrix.real().trace());
  return out;
}

namespace {

struct PairContext {
  double Gamma = 0.0;
  double prefactor = 1.0;  // 1/C^2 or 1/C^4
  double T1 = 1.0, T2 = 1.0, R1 = 0.0, R2 = 0.0, z = 0.0;
  int s = 1;
  std::vector<double> lf;

  PairContext(const Gain& gain, double T1_, double T2_, int s_, bool seeded,
              int cutoff)
      : Gamma(gain.Gamma),
        prefactor(1.0 / std::pow(gain.C, seeded ? 4.0 : 2.0)),
        T1(T1_),
        T2(T2_),
        R1(1.0 - T1_),
        R2(1.0 - T2_),
        z(gain.Gamma * gain.Gamma * (1.0 - T1_) * (1.0 - T2_)),
        s(s_) {
    lf.resize(2 * cutoff + 3);
    for (int n = 0; n < static_cast<int>(lf.size()); ++n)
      lf[n] = std::lgamma(n + 1.0);
  }

  double half_lbinom(int n, int k) const {
    return 0.5 * (lf[n] - lf[k] - lf[n - k]);
  }

  double apply_sign(double mag, int i, int k) const {
    return (s < 0 && (i + k) % 2 != 0) ? -mag : mag;
  }
};

// <i,j| rho |k,l> of the lossy spontaneous pair; requires i - j == k - l.
double spont_entry(const PairContext& cx, int i, int j, int k, int l) {
  double mag;
  if (i >= j) {
    const double f =
        hyp2f1({1.0 + i, 1.0 + k, 1.0 + (i - j), cx.z});
    mag = std::pow(cx.Gamma, i + k) * std::pow(cx.T1, 0.5 * (i + k)) *
          std::pow(cx.T2, 0.5 * (2 * j + k - i)) * std::pow(cx.R2, i - j) *
          std::exp(cx.half_lbinom(i, j) + cx.half_lbinom(k, l)) * f;
  } else {
    const double f =
        hyp2f1({1.0 + j, 1.0 + l, 1.0 + (j - i), cx.z});
    mag = std::pow(cx.Gamma, 2 * j + k - i) * std::pow(cx.T1, 0.5 * (i + k)) *
          std::pow(cx.T2, 0.5 * (2 * j + k - i)) * std::pow(cx.R1, j - i) *
          std::exp(cx.half_lbinom(j, i) + cx.half_lbinom(l, k)) * f;
  }
  return cx.apply_sign(mag * cx.prefactor, i, k);
}

// Same for the seeded pair.
double seeded_entry(const PairContext& cx, int i, int j, int k, int l) {
  double mag;
  if (i >= j + 1) {
    const double f = hyp2f1({1.0 + i, 1.0 + k, static_cast<double>(i - j), cx.z});
    mag = std::pow(cx.Gamma, i + k - 2) * std::pow(cx.T1, 0.5 * (i + k)) *
          std::pow(cx.T2, 0.5 * (2 * j + k - i)) *
          std::pow(cx.R2, i - j - 1) * (i - j) *
          std::exp(cx.half_lbinom(i, j) + cx.half_lbinom(k, l)) * f;
  } else {
    const double f =
        hyp2f1({2.0 + j, 2.0 + l, 2.0 + (j - i), cx.z});
    mag = std::pow(cx.Gamma, 2 * j + k - i) * std::pow(cx.T1, 0.5 * (i + k)) *
          std::pow(cx.T2, 0.5 * (2 * j + k - i)) *
          std::pow(cx.R1, j - i + 1) * (j + 1.0) * (l + 1.0) / (j - i + 1.0) *
          std::exp(cx.half_lbinom(j, i) + cx.half_lbinom(l, k)) * f;
  }
  return cx.apply_sign(mag * cx.prefactor, i, k);
}

DensityOperator build_lossy_pair(const Gain& gain, double T1, double T2,
                                 int cutoff, int s, bool seeded) {
  check_transmissivity(T1, "lossy pair state");
  check_transmissivity(T2, "lossy pair state");
  if (s != 1 && s != -1)
    throw config_error("lossy pair state: gamma_sign must be +1 or -1");
  if (cutoff < 1)
    throw config_error("lossy pair state: cutoff must be at least 1");
  const PairContext cx(gain, T1, T2, s, seeded, cutoff);

  DensityOperator out;
  out.basis = enumerate_basis({k1_psi, k2_psi_perp}, cutoff);
  const BlockLabel label = photon_difference_label(out.basis, "k1", "k2");
  out.block_label = label;
  out.block_label_name = label.name;

  std::map<long, std::vector<long>> groups;
  std::vector<int> occ(2);
  for (long idx = 0; idx < out.basis.dim(); ++idx) {
    out.basis.occupation(idx, occ);
    groups[label(occ)].push_back(idx);
  }
  out.blocks.reserve(groups.size());
  const int radix = cutoff + 1;
  for (auto& [v, idx] : groups) {
    DensityOperator::Block blk;
    blk.label = v;
    blk.indices = std::move(idx);
    const long n = static_cast<long>(blk.indices.size());
    blk.mat.resize(n, n);
    for (long r = 0; r < n; ++r) {
      const int i = static_cast<int>(blk.indices[r] / radix);
      const int j = static_cast<int>(blk.indices[r] % radix);
      for (long c = r; c < n; ++c) {
        const int k = static_cast<int>(blk.indices[c] / radix);
        const int l = static_cast<int>(blk.indices[c] % radix);
        const double e = seeded ? seeded_entry(cx, i, j, k, l)
                                : spont_entry(cx, i, j, k, l);
        blk.mat(r, c) = e;
        blk.mat(c, r) = e;  // real symmetric
      }
    }
    out.blocks.push_back(std::move(blk));
  }
  // The entries are exact (untruncated source sums), so the only missing
  // mass is what the channel leaves above the cutoff.
  out.trace_deficit = std::max(0.0, 1.0 - out.trace());
  return out;
}

}  // namespace

DensityOperator lossy_spontaneous(const Gain& gain, double T1, double T2,
                                  int cutoff, int gamma_sign) {
  return build_lossy_pair(gain, T1, T2, cutoff, gamma_sign, false);
}

DensityOperator lossy_seeded(const Gain& gain, double T1, double T2,
                             int cutoff, int gamma_sign) {
  return build_lossy_pair(gain, T1, T2, cutoff, gamma_sign, true);
}

DensityOperator lossy_universal(const Gain& gain, double T1, double T2,
                                int cutoff) {
  const auto seeded = lossy_seeded(gain, T1, T2, cutoff);
  const auto spont = relabel_modes(
      lossy_spontaneous(gain, T1, T2, cutoff, -1), {k1_psi_perp, k2_psi});
  const std::vector<ModeLabel> order{k1_psi, k1_psi_perp, k2_psi, k2_psi_perp};
  const auto basis = enumerate_basis(order, cutoff);
  return tensor_blocked(seeded, spont, order,
                        photon_difference_label(basis, "k1", "k2"));
}

DensityOperator reduced_k1_lossy(const Gain& gain, double eta, int cutoff,
                                 bool seed_perp) {
  check_transmissivity(eta, "reduced_k1_lossy");
  if (cutoff < 1)
    throw config_error("reduced_k1_lossy: cutoff must be at least 1");
  const double x = gain.Gamma * gain.Gamma;
  const double u = x * (1.0 - eta);
  const double c6 = std::pow(gain.C, 6.0);
  const int radix = cutoff + 1;

  DensityOperator out;
  out.basis = enumerate_basis({k1_psi, k1_psi_perp}, cutoff);
  out.block_label =
      BlockLabel{{radix, 1}, 0, "basis-index"};  // every index its own block
  out.block_label_name = out.block_label.name;
  out.blocks.reserve(out.basis.dim());
  double captured = 0.0;
  for (long idx = 0; idx < out.basis.dim(); ++idx) {
    const int a = static_cast<int>(idx / radix);
    const int b = static_cast<int>(idx % radix);
    const int i = seed_perp ? b : a;  // weight along the seeded polarization
    const int j = seed_perp ? a : b;
    double p = std::pow(x, i + j) * (1.0 - eta);
    if (i >= 1) p += i * std::pow(x, i + j - 1);
    p *= std::pow(eta, i + j) * std::pow(1.0 - u, -3.0 - (i + j)) / c6;
    captured += p;
    DensityOperator::Block blk;
    blk.label = idx;
    blk.indices = {idx};
    blk.mat = MatrixXcd::Constant(1, 1, p);
    out.blocks.push_back(std::move(blk));
  }
  out.trace_deficit = std::max(0.0, 1.0 - captured);
  return out;
}

}  // namespace mqs
