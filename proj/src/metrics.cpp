#include "mqs/metrics.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "mqs/loss.hpp"

namespace mqs {
namespace {

constexpr double kTraceTol = 1e-6;     // allowed book-value mismatch
constexpr double kPurityTol = 1e-12;   // rank-one detection slack
constexpr double kDiagTol = 1e-13;     // off-diagonal mass for "diagonal"
constexpr double kResidualLimit = 1e-6;
constexpr long kDenseLimit = 2048;

double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

DistanceResult package(double fid, const char* method, double residual) {
  DistanceResult out;
  out.fidelity = clamp01(fid);
  out.bures = std::sqrt(std::max(0.0, 1.0 - std::sqrt(out.fidelity)));
  out.method = method;
  out.residual = residual;
  return out;
}

// tr(rho sigma) for Hermitian operands, iterating whichever side stores the
// fewer entries explicitly. A sum this size cannot resolve values below its
// own rounding noise, so anything within machine precision of the
// accumulated magnitude is reported as an exact zero; without that, a Bures
// distance near one would inherit the square root of the noise.
double overlap_trace(const DensityOperator& a, const DensityOperator& b) {
  double acc = 0.0, mag = 0.0;
  if (!a.is_blocked() && !b.is_blocked()) {
    acc = a.matrix.conjugate().cwiseProduct(b.matrix).sum().real();
    mag = a.matrix.cwiseAbs().cwiseProduct(b.matrix.cwiseAbs()).sum();
  } else {
    const DensityOperator& s = a.is_blocked() ? a : b;
    const DensityOperator& o = a.is_blocked() ? b : a;
    for (const auto& blk : s.blocks) {
      const long n = static_cast<long>(blk.indices.size());
      for (long r = 0; r < n; ++r)
        for (long c = 0; c < n; ++c) {
          const cxd v = blk.mat(r, c);
          if (v == cxd(0.0, 0.0)) continue;
          const cxd w = o.entry(blk.indices[r], blk.indices[c]);
          acc += (std::conj(v) * w).real();
          mag += std::abs(v) * std::abs(w);
        }
    }
  }
  constexpr double eps = std::numeric_limits<double>::epsilon();
  return std::abs(acc) <= 64.0 * eps * mag ? 0.0 : acc;
}

double purity(const DensityOperator& r) {
  if (!r.is_blocked()) return r.matrix.squaredNorm();
  double acc = 0.0;
  for (const auto& b : r.blocks) acc += b.mat.squaredNorm();
  return acc;
}

// A positive operator is rank one exactly when tr(rho^2) = (tr rho)^2.
bool rank_one(const DensityOperator& r, double tr) {
  return std::abs(purity(r) - tr * tr) <= kPurityTol * std::max(1.0, tr * tr);
}

bool is_diagonal(const DensityOperator& r) {
  if (!r.is_blocked()) {
    const long d = r.matrix.rows();
    for (long i = 0; i < d; ++i)
      for (long j = 0; j < d; ++j)
        if (i != j && std::abs(r.matrix(i, j)) > kDiagTol) return false;
    return true;
  }
  for (const auto& b : r.blocks) {
    const long n = b.mat.rows();
    for (long i = 0; i < n; ++i)
      for (long j = 0; j < n; ++j)
        if (i != j && std::abs(b.mat(i, j)) > kDiagTol) return false;
  }
  return true;
}

VectorXd diagonal_of(const DensityOperator& r) {
  if (!r.is_blocked()) return r.matrix.diagonal().real();
  VectorXd d = VectorXd::Zero(r.basis.dim());
  for (const auto& b : r.blocks)
    for (size_t p = 0; p < b.indices.size(); ++p)
      d(b.indices[p]) = b.mat(p, p).real();
  return d;
}

bool same_partition(const DensityOperator& a, const DensityOperator& b) {
  if (!a.is_blocked() || !b.is_blocked()) return false;
  if (a.blocks.size() != b.blocks.size()) return false;
  for (size_t i = 0; i < a.blocks.size(); ++i)
    if (a.blocks[i].label != b.blocks[i].label ||
        a.blocks[i].indices != b.blocks[i].indices)
      return false;
  return true;
}

MatrixXcd sqrt_psd(const MatrixXcd& m, double& residual) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(m);
  VectorXd lam = es.eigenvalues();
  // Eigenvalues below the solver's own resolution are noise whose square
  // roots would dominate the error; only genuinely negative mass counts
  // toward the residual.
  const double floor_ = static_cast<double>(lam.size()) *
                        std::numeric_limits<double>::epsilon() *
                        std::max(0.0, lam.maxCoeff());
  for (long i = 0; i < lam.size(); ++i)
    if (lam(i) < floor_) {
      if (lam(i) < 0.0) residual += -lam(i);
      lam(i) = 0.0;
    }
  return es.eigenvectors() * lam.cwiseSqrt().asDiagonal() *
         es.eigenvectors().adjoint();
}

// tr|sqrt(a) sqrt(b)|, the square root of the Uhlmann fidelity.
double root_overlap(const MatrixXcd& a, const MatrixXcd& b, double& residual) {
  const MatrixXcd prod = sqrt_psd(a, residual) * sqrt_psd(b, residual);
  Eigen::BDCSVD<MatrixXcd> svd(prod);
  return svd.singularValues().sum();
}

void check_residual(double residual) {
  if (residual > kResidualLimit)
    throw integrity_error("fidelity: clipped negative-eigenvalue mass " +
                          std::to_string(residual) + " exceeds 1e-6");
}

}  // namespace

DistanceResult fidelity(const DensityOperator& rho,
                        const DensityOperator& sigma) {
  if (!(rho.basis == sigma.basis))
    throw config_error("fidelity: operands live on different bases");
  const double tr_r = rho.trace(), tr_s = sigma.trace();
  // Books must agree: trace plus recorded deficit, so honestly truncated
  // operators with different in-box masses still compare.
  if (std::abs((tr_r + rho.trace_deficit) - (tr_s + sigma.trace_deficit)) >
      kTraceTol)
    throw config_error("fidelity: operand traces disagree beyond 1e-6");

  if (rank_one(rho, tr_r) || rank_one(sigma, tr_s))
    return package(std::max(0.0, overlap_trace(rho, sigma)), "pure-overlap",
                   0.0);

  double residual = 0.0;
  if (is_diagonal(rho) && is_diagonal(sigma)) {
    VectorXd p = diagonal_of(rho), q = diagonal_of(sigma);
    double s = 0.0;
    for (long i = 0; i < p.size(); ++i) {
      if (p(i) < 0.0) {
        residual += -p(i);
        p(i) = 0.0;
      }
      if (q(i) < 0.0) {
        residual += -q(i);
        q(i) = 0.0;
      }
      s += std::sqrt(p(i) * q(i));
    }
    check_residual(residual);
    return package(s * s, "commuting-diagonal", residual);
  }

  if (same_partition(rho, sigma)) {
    double s = 0.0;
    for (size_t b = 0; b < rho.blocks.size(); ++b)
      s += root_overlap(rho.blocks[b].mat, sigma.blocks[b].mat, residual);
    check_residual(residual);
    return package(s * s, "blockwise", residual);
  }

  const long dim = rho.basis.dim();
  if (dim > kDenseLimit)
    throw config_error(
        "fidelity: dense evaluation refused at dimension " +
        std::to_string(dim) +
        "; decompose both operands over a shared conserved label");
  const double s = root_overlap(rho.to_dense(), sigma.to_dense(), residual);
  check_residual(residual);
  return package(s * s, "hermitian-eig", residual);
}

DistanceResult bures(const DensityOperator& rho, const DensityOperator& sigma) {
  return fidelity(rho, sigma);
}

double coherent_mqs_distance_closed(double R, double alpha_sq) {
  if (!(R >= 0.0 && R <= 1.0))
    throw config_error("coherent_mqs_distance_closed: R outside [0, 1]");
  if (!(alpha_sq >= 0.0))
    throw config_error("coherent_mqs_distance_closed: |alpha|^2 negative");
  return std::sqrt(1.0 - std::sqrt(-std::expm1(-4.0 * R * alpha_sq)));
}

double component_distance_coherent(double R, double alpha_sq) {
  if (!(R >= 0.0 && R <= 1.0))
    throw config_error("component_distance_coherent: R outside [0, 1]");
  if (!(alpha_sq >= 0.0))
    throw config_error("component_distance_coherent: |alpha|^2 negative");
  // sqrt(1 - sqrt(F)) with F = e^{-4T|alpha|^2}, the attenuated overlap.
  return std::sqrt(-std::expm1(-2.0 * (1.0 - R) * alpha_sq));
}

DistanceResult universal_distance(const Gain& gain, double T1, double T2,
                                  const QubitDirection&, int cutoff) {
  // The seed direction only renames modes. With seed psi the two cloner
  // outputs factor over the same squeezer-pair split, one factor seeded and
  // one spontaneous on each side but in swapped order, and the leftover
  // sign flip conjugates both factors by one diagonal unitary. Fidelity
  // therefore multiplies into the square of a single pair fidelity.
  const DistanceResult pair =
      fidelity(lossy_seeded(gain, T1, T2, cutoff),
               lossy_spontaneous(gain, T1, T2, cutoff));
  DistanceResult out =
      package(pair.fidelity * pair.fidelity, "", 2.0 * pair.residual);
  out.method = pair.method;
  return out;
}

DistanceResult pc_distance(const Gain& gain, double T, PcPair pair,
                           int cutoff) {
  if (!(T >= 0.0 && T <= 1.0))
    throw config_error("pc_distance: transmissivity outside [0, 1]");
  PureState u, v;
  if (pair == PcPair::macrostates) {
    u = pc_amplified_state(gain, 0.0, cutoff);
    v = pc_amplified_state(gain, std::numbers::pi, cutoff);
  } else {
    u = pc_mqs(gain, CatSign::plus, cutoff);
    v = pc_mqs(gain, CatSign::minus, cutoff);
  }
  // Equal loss on both polarization modes preserves total parity entry by
  // entry, so the comparison stays blockwise in the two parity classes.
  const BlockLabel parity = total_parity_label(u.basis);
  DensityOperator ru = block_decompose(projector(u), parity);
  DensityOperator rv = block_decompose(projector(v), parity);
  for (const ModeLabel& mode : {k1_H, k1_V}) {
    ru = apply_loss_kraus(ru, mode, T);
    rv = apply_loss_kraus(rv, mode, T);
  }
  return fidelity(ru, rv);
}

}  // namespace mqs
