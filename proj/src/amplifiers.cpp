#include "mqs/amplifiers.hpp"

#include <cmath>
#include <map>
#include <numbers>

namespace mqs {

namespace {

constexpr double pi = std::numbers::pi;

double wrap_2pi(double phi) {
  const double tau = 2.0 * pi;
  double w = std::fmod(phi, tau);
  if (w < 0.0) w += tau;
  return w;
}

// sqrt(n!) ratios in log space; exact enough far beyond cutoff ~120.
double half_log_factorial(int n) { return 0.5 * std::lgamma(n + 1.0); }

void check_sign(int s, const char* what) {
  if (s != 1 && s != -1)
    throw config_error(std::string(what) + ": gamma_sign must be +1 or -1");
}

}  // namespace

Gain::Gain(double g_) : g(g_), C(std::cosh(g_)), Gamma(std::tanh(g_)) {
  if (!(g_ >= 0.0) || !std::isfinite(g_))
    throw config_error("gain must be a finite nonnegative number");
}

QubitDirection::QubitDirection(double theta_, double phi_)
    : theta(theta_), phi(wrap_2pi(phi_)) {
  if (!(theta_ >= 0.0 && theta_ <= pi))
    throw config_error("qubit direction needs theta in [0, pi]");
}

QubitDirection QubitDirection::antipode() const {
  return QubitDirection(pi - theta, phi + pi);
}

PureState coherent_state(cxd alpha, int cutoff, const ModeLabel& mode) {
  const double nbar = std::norm(alpha);
  if (nbar > cutoff / 2.0)
    throw config_error("coherent_state: |alpha|^2 exceeds cutoff/2 tail guard");
  PureState psi;
  psi.basis = enumerate_basis({mode}, cutoff);
  psi.amplitudes.resize(cutoff + 1);
  const double mag = std::abs(alpha);
  const double arg = std::arg(alpha);
  for (int n = 0; n <= cutoff; ++n) {
    const double logmag =
        -nbar / 2.0 + (n > 0 ? n * std::log(mag) : 0.0) - half_log_factorial(n);
    psi.amplitudes(n) = (mag == 0.0 && n > 0)
                            ? cxd(0.0, 0.0)
                            : std::polar(std::exp(logmag), n * arg);
  }
  psi.truncation_deficit =
      std::max(0.0, 1.0 - psi.amplitudes.squaredNorm());
  return psi;
}

PureState cat_state(cxd alpha, CatSign sign, int cutoff,
                    const ModeLabel& mode) {
  if (alpha == cxd(0.0, 0.0) && sign == CatSign::minus)
    throw config_error("cat_state: minus superposition of alpha = 0 vanishes");
  // |a> and |-a> amplitudes differ by (-1)^n, so one parity cancels exactly
  // and the other doubles; build that form directly so suppressed
  // amplitudes are exact zeros rather than rounding residue.
  PureState psi = coherent_state(alpha, cutoff, mode);
  const double overlap = std::exp(-2.0 * std::norm(alpha));
  const double norm_sq =
      sign == CatSign::plus ? 2.0 * (1.0 + overlap) : 2.0 * (1.0 - overlap);
  const double scale = 2.0 / std::sqrt(norm_sq);
  const int keep = sign == CatSign::plus ? 0 : 1;
  for (int n = 0; n <= cutoff; ++n) {
    if (n % 2 == keep)
      psi.amplitudes(n) *= scale;
    else
      psi.amplitudes(n) = cxd(0.0, 0.0);
  }
  psi.truncation_deficit =
      std::max(0.0, 1.0 - psi.amplitudes.squaredNorm());
  return psi;
}

PureState pc_amplified_state(const Gain& gain, double phi, int cutoff) {
  PureState psi;
  psi.basis = enumerate_basis({k1_H, k1_V}, cutoff);
  psi.amplitudes = VectorXcd::Zero(psi.basis.dim());
  const double pref = 1.0 / (std::sqrt(2.0) * gain.C * gain.C);
  const cxd phase = std::polar(1.0, phi);
  double captured = 0.0;
  std::vector<int> occ(2);
  for (int n = 0; n + 1 <= cutoff; ++n) {
    const double w = pref * std::pow(gain.Gamma, n) * std::sqrt(n + 1.0);
    occ = {n + 1, n};
    psi.amplitudes(psi.basis.index_of(occ)) = w;
    occ = {n, n + 1};
    psi.amplitudes(psi.basis.index_of(occ)) = w * phase;
    captured += 2.0 * w * w;
  }
  psi.truncation_deficit = std::max(0.0, 1.0 - captured);
  return psi;
}

PureState pc_amplified_state(const Gain& gain, const QubitDirection& seed,
                             int cutoff) {
  if (std::abs(seed.theta - pi / 2.0) > 1e-9)
    throw config_error(
        "pc_amplified_state: only equatorial seeds (theta = pi/2) are defined");
  return pc_amplified_state(gain, seed.phi, cutoff);
}

PureState pc_mqs(const Gain& gain, CatSign sign, int cutoff) {
  const auto plus = pc_amplified_state(gain, 0.0, cutoff);
  const auto minus = pc_amplified_state(gain, pi, cutoff);
  const cxd i_unit(0.0, 1.0);
  PureState psi;
  psi.basis = plus.basis;
  // Global phase chosen so the superposition lands entrywise on the
  // circular-seed macrostate; the identity itself is then asserted.
  if (sign == CatSign::plus) {
    psi.amplitudes = std::polar(1.0, -pi / 4.0) *
                     (plus.amplitudes + i_unit * minus.amplitudes) /
                     std::sqrt(2.0);
  } else {
    psi.amplitudes = std::polar(1.0, pi / 4.0) *
                     (plus.amplitudes - i_unit * minus.amplitudes) /
                     std::sqrt(2.0);
  }
  psi.truncation_deficit = plus.truncation_deficit;
  const auto circular = pc_amplified_state(
      gain, sign == CatSign::plus ? -pi / 2.0 : pi / 2.0, cutoff);
  const double mismatch =
      (psi.amplitudes - circular.amplitudes).cwiseAbs().maxCoeff();
  if (mismatch > 1e-10)
    throw integrity_error(
        "pc_mqs: superposition does not match the circular-seed macrostate");
  return psi;
}

PureState tms_vacuum(const Gain& gain, int cutoff, int gamma_sign) {
  check_sign(gamma_sign, "tms_vacuum");
  PureState psi;
  psi.basis = enumerate_basis({k1_psi, k2_psi_perp}, cutoff);
  psi.amplitudes = VectorXcd::Zero(psi.basis.dim());
  double captured = 0.0;
  std::vector<int> occ(2);
  for (int n = 0; n <= cutoff; ++n) {
    const double w = std::pow(gamma_sign * gain.Gamma, n) / gain.C;
    occ = {n, n};
    psi.amplitudes(psi.basis.index_of(occ)) = w;
    captured += w * w;
  }
  psi.truncation_deficit = std::max(0.0, 1.0 - captured);
  return psi;
}

PureState tms_seeded(const Gain& gain, int cutoff, int gamma_sign) {
  check_sign(gamma_sign, "tms_seeded");
  PureState psi;
  psi.basis = enumerate_basis({k1_psi, k2_psi_perp}, cutoff);
  psi.amplitudes = VectorXcd::Zero(psi.basis.dim());
  double captured = 0.0;
  std::vector<int> occ(2);
  for (int n = 0; n + 1 <= cutoff; ++n) {
    const double w = std::pow(gamma_sign * gain.Gamma, n) * std::sqrt(n + 1.0) /
                     (gain.C * gain.C);
    occ = {n + 1, n};
    psi.amplitudes(psi.basis.index_of(occ)) = w;
    captured += w * w;
  }
  psi.truncation_deficit = std::max(0.0, 1.0 - captured);
  return psi;
}

PureState universal_amplified_state(const Gain& gain, int cutoff,
                                    int gamma_sign) {
  check_sign(gamma_sign, "universal_amplified_state");
  const auto seeded = tms_seeded(gain, cutoff, gamma_sign);
  const auto spont = relabel_modes(tms_vacuum(gain, cutoff, -gamma_sign),
                                   {k1_psi_perp, k2_psi});
  return reorder_modes(tensor(seeded, spont),
                       {k1_psi, k1_psi_perp, k2_psi, k2_psi_perp});
}

double pc_total_mean(const Gain& gain) {
  const double sh = std::sinh(gain.g);
  return 1.0 + 4.0 * sh * sh;
}

double universal_total_mean(const Gain& gain) {
  const double sh = std::sinh(gain.g);
  return 1.0 + 6.0 * sh * sh;
}

double universal_k1_mean(const Gain& gain) {
  const double sh = std::sinh(gain.g);
  return 1.0 + 3.0 * sh * sh;
}

namespace {

template <typename MeanFn>
Gain invert_mean(double nbar, MeanFn mean, const char* what) {
  if (!(nbar >= 1.0))
    throw config_error(std::string(what) +
                       ": mean-photon target below the seed photon");
  double lo = 0.0, hi = 20.0;
  if (mean(Gain(hi)) < nbar)
    throw config_error(std::string(what) + ": mean-photon target out of range");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mean(Gain(mid)) < nbar ? lo : hi) = mid;
  }
  const Gain result(0.5 * (lo + hi));
  if (std::abs(mean(result) - nbar) > 1e-10)
    throw integrity_error(std::string(what) + ": bisection failed to converge");
  return result;
}

}  // namespace

Gain pc_gain_for_mean(double nbar) {
  return invert_mean(nbar, pc_total_mean, "pc_gain_for_mean");
}

Gain universal_gain_for_mean(double nbar) {
  return invert_mean(nbar, universal_total_mean, "universal_gain_for_mean");
}

Eigen::Matrix2cd bloch_basis_matrix(const QubitDirection& d) {
  const double c = std::cos(d.theta / 2.0), s = std::sin(d.theta / 2.0);
  const cxd e = std::polar(1.0, d.phi);
  Eigen::Matrix2cd b;
  b << c, -std::conj(e) * s, e * s, c;
  return b;
}

namespace {

// Transition amplitudes of the pair rotation a0^dag -> w00 a0^dag + w10 a1^dag,
// a1^dag -> w01 a0^dag + w11 a1^dag between same-shell occupations.
struct PairKernel {
  int cutoff;
  // k[(np*(N+1)+mp, n*(N+1)+m)] nonzero only when np+mp == n+m.
  MatrixXcd k;

  PairKernel(const Eigen::Matrix2cd& w, int n_max) : cutoff(n_max) {
    const int dim = (n_max + 1) * (n_max + 1);
    k = MatrixXcd::Zero(dim, dim);
    std::vector<std::vector<cxd>> wp(4);
    for (int e = 0; e < 4; ++e) {
      wp[e].resize(2 * n_max + 2);
      wp[e][0] = 1.0;
      const cxd base = w(e % 2, e / 2);  // wp[r + 2c][p] = w(r,c)^p
      for (int p = 1; p <= 2 * n_max + 1; ++p) wp[e][p] = wp[e][p - 1] * base;
    }
    std::vector<double> lfact(2 * n_max + 2);
    for (int n = 0; n <= 2 * n_max + 1; ++n) lfact[n] = std::lgamma(n + 1.0);
    auto lbinom = [&](int n, int p) {
      return lfact[n] - lfact[p] - lfact[n - p];
    };
    for (int n = 0; n <= n_max; ++n)
      for (int m = 0; m <= n_max; ++m) {
        const int s = n + m;
        for (int np = std::max(0, s - n_max); np <= std::min(n_max, s); ++np) {
          const int mp = s - np;
          cxd sum(0.0, 0.0);
          for (int p = std::max(0, np - m); p <= std::min(n, np); ++p) {
            const double logw = lbinom(n, p) + lbinom(m, np - p) +
                                0.5 * (lfact[np] + lfact[mp]) -
                                0.5 * (lfact[n] + lfact[m]);
            sum += std::exp(logw) * wp[0][p] * wp[1][n - p] * wp[2][np - p] *
                   wp[3][m - np + p];
          }
          k(np * (n_max + 1) + mp, n * (n_max + 1) + m) = sum;
        }
      }
  }
};

}  // namespace

PureState basis_rotate(const PureState& state, const Eigen::Matrix2cd& w) {
  if ((w.adjoint() * w - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() >
      1e-12)
    throw config_error("basis_rotate: rotation matrix is not unitary");

  // Each spatial label must contribute exactly one polarization pair, in
  // mode-list order.
  std::map<std::string, std::vector<int>> pairs;
  for (int p = 0; p < state.basis.num_modes(); ++p)
    pairs[state.basis.modes[p].spatial].push_back(p);
  for (const auto& [spatial, pos] : pairs)
    if (pos.size() != 2)
      throw config_error("basis_rotate: spatial mode " + spatial +
                         " lacks a polarization pair");

  const int n_max = state.basis.cutoff;
  const PairKernel kernel(w, n_max);
  const int radix = n_max + 1;
  const long dim = state.basis.dim();
  const int nm = state.basis.num_modes();

  VectorXcd amps = state.amplitudes;
  std::vector<long> stride(nm, 1);
  for (int p = nm - 2; p >= 0; --p) stride[p] = stride[p + 1] * radix;

  for (const auto& [spatial, pos] : pairs) {
    const long st0 = stride[pos[0]], st1 = stride[pos[1]];
    VectorXcd next = VectorXcd::Zero(dim);
    // Enumerate offsets with the pair's digits at zero.
    std::vector<long> offsets;
    std::vector<int> occ(nm);
    for (long base = 0; base < dim; ++base) {
      state.basis.occupation(base, occ);
      if (occ[pos[0]] == 0 && occ[pos[1]] == 0) offsets.push_back(base);
    }
    MatrixXcd block(radix, radix);
    for (const long off : offsets) {
      for (int n = 0; n < radix; ++n)
        for (int m = 0; m < radix; ++m)
          block(n, m) = amps(off + n * st0 + m * st1);
      VectorXcd flat(radix * radix);
      for (int n = 0; n < radix; ++n)
        for (int m = 0; m < radix; ++m) flat(n * radix + m) = block(n, m);
      const VectorXcd out = kernel.k * flat;
      for (int n = 0; n < radix; ++n)
        for (int m = 0; m < radix; ++m)
          next(off + n * st0 + m * st1) = out(n * radix + m);
    }
    amps = std::move(next);
  }

  PureState out;
  out.basis = state.basis;
  out.amplitudes = std::move(amps);
  out.truncation_deficit =
      state.truncation_deficit +
      std::max(0.0, state.amplitudes.squaredNorm() - out.amplitudes.squaredNorm());
  return out;
}

PureState basis_rotate(const PureState& state, const QubitDirection& from,
                       const QubitDirection& to) {
  return basis_rotate(
      state, bloch_basis_matrix(to) * bloch_basis_matrix(from).adjoint());
}

}  // namespace mqs
