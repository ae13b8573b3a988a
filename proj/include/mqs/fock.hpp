#pragma once
// Truncated multi-mode Fock space: basis enumeration, pure states, density
// operators (dense or block-keyed by a conserved occupation functional),
// tensor products, partial traces, photon statistics, serialization.

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mqs {

using cxd = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

// Thrown on invalid parameters / malformed configuration (CLI exit code 2).
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Thrown when a numerical sanity bound is violated (CLI exit code 3).
struct integrity_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ModeLabel {
  std::string spatial;       // "k1" | "k2"
  std::string polarization;  // "psi" | "psi_perp" relative to a chosen basis; "H" | "V" for the computational pair
  friend bool operator==(const ModeLabel&, const ModeLabel&) = default;
};

std::string to_string(const ModeLabel& m);

// Canonical mode labels.
inline const ModeLabel k1_psi{"k1", "psi"};
inline const ModeLabel k1_psi_perp{"k1", "psi_perp"};
inline const ModeLabel k2_psi{"k2", "psi"};
inline const ModeLabel k2_psi_perp{"k2", "psi_perp"};
inline const ModeLabel k1_H{"k1", "H"};
inline const ModeLabel k1_V{"k1", "V"};
inline const ModeLabel k2_H{"k2", "H"};
inline const ModeLabel k2_V{"k2", "V"};

// Ordered mode list with a shared per-mode photon cutoff. Basis states are
// occupation tuples, indexed lexicographically (first mode most significant).
struct MultiModeBasis {
  std::vector<ModeLabel> modes;
  int cutoff = 0;

  int num_modes() const { return static_cast<int>(modes.size()); }
  long dim() const;
  long index_of(std::span<const int> occ) const;
  void occupation(long index, std::span<int> out) const;
  std::vector<int> occupation(long index) const;
  int occupation_of(long index, int mode_pos) const;
  int position_of(const ModeLabel& m) const;  // -1 when absent

  friend bool operator==(const MultiModeBasis&, const MultiModeBasis&) = default;
};

// Builds a basis; rejects dimensions above max_dim (guards accidental blowups).
MultiModeBasis enumerate_basis(std::vector<ModeLabel> modes, int cutoff,
                               long max_dim = 4000000);

struct PureState {
  MultiModeBasis basis;
  VectorXcd amplitudes;
  double truncation_deficit = 0.0;  // mass of the untruncated state above the cutoff

  double norm2() const { return amplitudes.squaredNorm(); }
};

// Occupation functional l(occ) = sum_i coeffs[i]*occ[i], reduced mod modulus
// when modulus > 0. Used as the conserved label for block-keyed storage.
struct BlockLabel {
  std::vector<long> coeffs;
  long modulus = 0;
  std::string name;

  long operator()(std::span<const int> occ) const;
};

// d = (photons in spatial mode a) - (photons in spatial mode b).
BlockLabel photon_difference_label(const MultiModeBasis& basis,
                                   const std::string& spatial_a,
                                   const std::string& spatial_b);
// Total photon parity (sum of occupations mod 2).
BlockLabel total_parity_label(const MultiModeBasis& basis);

// Hermitian PSD operator. Exactly one storage form is populated:
// dense `matrix`, or `blocks` keyed by a conserved label value, each block
// carrying the ascending global indices of its rows/columns.
struct DensityOperator {
  MultiModeBasis basis;
  MatrixXcd matrix;  // dense storage (empty when blocked)

  struct Block {
    long label = 0;
    std::vector<long> indices;
    MatrixXcd mat;
  };
  std::vector<Block> blocks;  // ascending by label
  std::string block_label_name;
  // The labeling functional itself, kept so channels acting on block-keyed
  // storage can regroup shifted indices; empty coeffs when dense.
  BlockLabel block_label;

  double trace_deficit = 0.0;

  bool is_blocked() const { return !blocks.empty(); }
  double trace() const;
  cxd entry(long i, long j) const;  // O(1) dense; block lookup otherwise (0 off-block)
  MatrixXcd to_dense() const;
};

DensityOperator projector(const PureState& psi);  // |psi><psi|, dense

// Mode order of the result: a's modes then b's.
DensityOperator tensor(const DensityOperator& a, const DensityOperator& b);
PureState tensor(const PureState& a, const PureState& b);

// Tensor product assembled directly into block-keyed storage on the given
// mode order, without materializing the dense product. Every target entry is
// a product of one entry of `a` and one of `b`.
DensityOperator tensor_blocked(const DensityOperator& a, const DensityOperator& b,
                               const std::vector<ModeLabel>& mode_order,
                               const BlockLabel& label);

// Trace over all modes not in `keep`; result modes follow the order of `keep`.
DensityOperator partial_trace(const DensityOperator& rho,
                              const std::vector<ModeLabel>& keep);

// Splits a dense operator into blocks of constant label value. Scans all
// entries: any |entry| > tol connecting different label values is an error
// (the label is not conserved by rho).
DensityOperator block_decompose(const DensityOperator& rho, const BlockLabel& label,
                                double tol = 1e-10);

double mean_photon(const DensityOperator& rho, const ModeLabel& mode);
double mean_photon(const PureState& psi, const ModeLabel& mode);

// Reindexes amplitudes onto a permuted mode order (same labels, new order).
PureState reorder_modes(const PureState& psi, const std::vector<ModeLabel>& new_order);
// Renames modes in place (no reindexing); new_labels pair off positionally.
PureState relabel_modes(const PureState& psi, const std::vector<ModeLabel>& new_labels);
DensityOperator relabel_modes(const DensityOperator& rho,
                              const std::vector<ModeLabel>& new_labels);
// Zero-pads into a larger cutoff (same modes).
PureState embed(const PureState& psi, int larger_cutoff);

// Largest |a - b| over all entries; operators may use different storages.
double max_abs_diff(const DensityOperator& a, const DensityOperator& b);

// Self-describing binary container: header (modes, cutoff, deficit, block
// structure) + upper-triangle complex entries per block, row-major.
void save_operator(const DensityOperator& rho, const std::string& path);
DensityOperator load_operator(const std::string& path);

}  // namespace mqs
