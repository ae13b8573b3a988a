#include "mqs/fock.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <utility>

namespace mqs {

namespace {

long checked_pow_dim(int radix, int nmodes, long max_dim) {
  long d = 1;
  for (int m = 0; m < nmodes; ++m) {
    if (d > max_dim / radix + 1) return max_dim + 1;  // saturate, caller reports
    d *= radix;
  }
  return d;
}

// O(1) entry lookup for either storage form.
struct EntryLookup {
  const DensityOperator* op;
  std::vector<int> block_of;   // -1 when index absent from every block
  std::vector<long> pos_of;

  explicit EntryLookup(const DensityOperator& rho) : op(&rho) {
    if (rho.is_blocked()) {
      const long dim = rho.basis.dim();
      block_of.assign(dim, -1);
      pos_of.assign(dim, 0);
      for (int b = 0; b < static_cast<int>(rho.blocks.size()); ++b) {
        const auto& idx = rho.blocks[b].indices;
        for (long p = 0; p < static_cast<long>(idx.size()); ++p) {
          block_of[idx[p]] = b;
          pos_of[idx[p]] = p;
        }
      }
    }
  }

  cxd at(long i, long j) const {
    if (!op->is_blocked()) return op->matrix(i, j);
    const int bi = block_of[i];
    if (bi < 0 || bi != block_of[j]) return cxd(0.0, 0.0);
    return op->blocks[bi].mat(pos_of[i], pos_of[j]);
  }
};

void require_same_basis(const MultiModeBasis& a, const MultiModeBasis& b,
                        const char* what) {
  if (!(a == b))
    throw config_error(std::string(what) + ": operands use different bases");
}

void require_unique_modes(const std::vector<ModeLabel>& modes) {
  for (size_t i = 0; i < modes.size(); ++i)
    for (size_t j = i + 1; j < modes.size(); ++j)
      if (modes[i] == modes[j])
        throw config_error("duplicate mode label: " + to_string(modes[i]));
}

}  // namespace

std::string to_string(const ModeLabel& m) {
  return m.spatial + ":" + m.polarization;
}

long MultiModeBasis::dim() const {
  long d = 1;
  for (size_t m = 0; m < modes.size(); ++m) d *= cutoff + 1;
  return d;
}

long MultiModeBasis::index_of(std::span<const int> occ) const {
  if (static_cast<int>(occ.size()) != num_modes())
    throw config_error("index_of: occupation tuple has wrong length");
  long idx = 0;
  for (int m = 0; m < num_modes(); ++m) {
    if (occ[m] < 0 || occ[m] > cutoff)
      throw config_error("index_of: occupation outside [0, cutoff]");
    idx = idx * (cutoff + 1) + occ[m];
  }
  return idx;
}

void MultiModeBasis::occupation(long index, std::span<int> out) const {
  for (int m = num_modes() - 1; m >= 0; --m) {
    out[m] = static_cast<int>(index % (cutoff + 1));
    index /= cutoff + 1;
  }
}

std::vector<int> MultiModeBasis::occupation(long index) const {
  std::vector<int> occ(num_modes());
  occupation(index, occ);
  return occ;
}

int MultiModeBasis::occupation_of(long index, int mode_pos) const {
  long stride = 1;
  for (int m = num_modes() - 1; m > mode_pos; --m) stride *= cutoff + 1;
  return static_cast<int>((index / stride) % (cutoff + 1));
}

int MultiModeBasis::position_of(const ModeLabel& m) const {
  for (int p = 0; p < num_modes(); ++p)
    if (modes[p] == m) return p;
  return -1;
}

MultiModeBasis enumerate_basis(std::vector<ModeLabel> modes, int cutoff,
                               long max_dim) {
  if (modes.empty()) throw config_error("enumerate_basis: empty mode list");
  if (cutoff < 0) throw config_error("enumerate_basis: negative cutoff");
  require_unique_modes(modes);
  const long dim = checked_pow_dim(cutoff + 1, static_cast<int>(modes.size()), max_dim);
  if (dim > max_dim)
    throw config_error("enumerate_basis: dimension exceeds guard of " +
                       std::to_string(max_dim) + " entries");
  return MultiModeBasis{std::move(modes), cutoff};
}

long BlockLabel::operator()(std::span<const int> occ) const {
  long v = 0;
  for (size_t m = 0; m < coeffs.size() && m < occ.size(); ++m)
    v += coeffs[m] * occ[m];
  if (modulus > 0) v = ((v % modulus) + modulus) % modulus;
  return v;
}

BlockLabel photon_difference_label(const MultiModeBasis& basis,
                                   const std::string& spatial_a,
                                   const std::string& spatial_b) {
  BlockLabel l;
  l.coeffs.assign(basis.num_modes(), 0);
  bool seen_a = false, seen_b = false;
  for (int m = 0; m < basis.num_modes(); ++m) {
    if (basis.modes[m].spatial == spatial_a) { l.coeffs[m] = +1; seen_a = true; }
    if (basis.modes[m].spatial == spatial_b) { l.coeffs[m] = -1; seen_b = true; }
  }
  if (!seen_a || !seen_b)
    throw config_error("photon_difference_label: spatial mode not in basis");
  l.modulus = 0;
  l.name = "n[" + spatial_a + "]-n[" + spatial_b + "]";
  return l;
}

BlockLabel total_parity_label(const MultiModeBasis& basis) {
  BlockLabel l;
  l.coeffs.assign(basis.num_modes(), 1);
  l.modulus = 2;
  l.name = "total_parity";
  return l;
}

double DensityOperator::trace() const {
  if (!is_blocked()) return matrix.diagonal().real().sum();
  double t = 0.0;
  for (const auto& b : blocks) t += b.mat.diagonal().real().sum();
  return t;
}

cxd DensityOperator::entry(long i, long j) const {
  if (!is_blocked()) return matrix(i, j);
  if (!block_label.coeffs.empty()) {
    // The functional pins down the only block that can hold (i, j).
    std::vector<int> occ(basis.num_modes());
    basis.occupation(i, occ);
    const long vi = block_label(occ);
    basis.occupation(j, occ);
    if (block_label(occ) != vi) return cxd(0.0, 0.0);
    auto bit = std::lower_bound(
        blocks.begin(), blocks.end(), vi,
        [](const Block& b, long v) { return b.label < v; });
    if (bit == blocks.end() || bit->label != vi) return cxd(0.0, 0.0);
    auto it = std::lower_bound(bit->indices.begin(), bit->indices.end(), i);
    if (it == bit->indices.end() || *it != i) return cxd(0.0, 0.0);
    auto jt = std::lower_bound(bit->indices.begin(), bit->indices.end(), j);
    if (jt == bit->indices.end() || *jt != j) return cxd(0.0, 0.0);
    return bit->mat(it - bit->indices.begin(), jt - bit->indices.begin());
  }
  for (const auto& b : blocks) {
    auto it = std::lower_bound(b.indices.begin(), b.indices.end(), i);
    if (it == b.indices.end() || *it != i) continue;
    auto jt = std::lower_bound(b.indices.begin(), b.indices.end(), j);
    if (jt == b.indices.end() || *jt != j) return cxd(0.0, 0.0);
    return b.mat(it - b.indices.begin(), jt - b.indices.begin());
  }
  return cxd(0.0, 0.0);
}

MatrixXcd DensityOperator::to_dense() const {
  const long dim = basis.dim();
  if (dim > 8192)
    throw config_error("to_dense: dimension " + std::to_string(dim) +
                       " too large for dense materialization");
  if (!is_blocked()) return matrix;
  MatrixXcd out = MatrixXcd::Zero(dim, dim);
  for (const auto& b : blocks)
    for (size_t r = 0; r < b.indices.size(); ++r)
      for (size_t c = 0; c < b.indices.size(); ++c)
        out(b.indices[r], b.indices[c]) = b.mat(r, c);
  return out;
}

DensityOperator projector(const PureState& psi) {
  DensityOperator rho;
  rho.basis = psi.basis;
  rho.matrix = psi.amplitudes * psi.amplitudes.adjoint();
  rho.trace_deficit = psi.truncation_deficit;
  return rho;
}

PureState tensor(const PureState& a, const PureState& b) {
  if (a.basis.cutoff != b.basis.cutoff)
    throw config_error("tensor: cutoffs differ");
  std::vector<ModeLabel> modes = a.basis.modes;
  modes.insert(modes.end(), b.basis.modes.begin(), b.basis.modes.end());
  require_unique_modes(modes);
  PureState out;
  out.basis = MultiModeBasis{std::move(modes), a.basis.cutoff};
  const long da = a.basis.dim(), db = b.basis.dim();
  out.amplitudes.resize(da * db);
  for (long i = 0; i < da; ++i)
    out.amplitudes.segment(i * db, db) = a.amplitudes(i) * b.amplitudes;
  out.truncation_deficit =
      1.0 - (1.0 - a.truncation_deficit) * (1.0 - b.truncation_deficit);
  return out;
}

DensityOperator tensor(const DensityOperator& a, const DensityOperator& b) {
  if (a.basis.cutoff != b.basis.cutoff)
    throw config_error("tensor: cutoffs differ");
  std::vector<ModeLabel> modes = a.basis.modes;
  modes.insert(modes.end(), b.basis.modes.begin(), b.basis.modes.end());
  require_unique_modes(modes);
  const MatrixXcd ma = a.to_dense(), mb = b.to_dense();
  const long da = ma.rows(), db = mb.rows();
  DensityOperator out;
  out.basis = MultiModeBasis{std::move(modes), a.basis.cutoff};
  out.matrix.resize(da * db, da * db);
  for (long i = 0; i < da; ++i)
    for (long j = 0; j < da; ++j)
      out.matrix.block(i * db, j * db, db, db) = ma(i, j) * mb;
  out.trace_deficit = 1.0 - (1.0 - a.trace_deficit) * (1.0 - b.trace_deficit);
  return out;
}

DensityOperator tensor_blocked(const DensityOperator& a, const DensityOperator& b,
                               const std::vector<ModeLabel>& mode_order,
                               const BlockLabel& label) {
  if (a.basis.cutoff != b.basis.cutoff)
    throw config_error("tensor_blocked: cutoffs differ");
  std::vector<ModeLabel> combined = a.basis.modes;
  combined.insert(combined.end(), b.basis.modes.begin(), b.basis.modes.end());
  require_unique_modes(combined);
  if (mode_order.size() != combined.size())
    throw config_error("tensor_blocked: mode_order has wrong length");
  require_unique_modes(mode_order);
  for (const auto& m : mode_order)
    if (std::find(combined.begin(), combined.end(), m) == combined.end())
      throw config_error("tensor_blocked: mode " + to_string(m) +
                         " not an operand mode");

  const MultiModeBasis basis = enumerate_basis(mode_order, a.basis.cutoff);
  const long dim = basis.dim();
  const int nm = basis.num_modes();

  // Positions of each result mode inside the operand bases.
  std::vector<int> a_pos(nm, -1), b_pos(nm, -1);
  for (int m = 0; m < nm; ++m) {
    a_pos[m] = a.basis.position_of(mode_order[m]);
    b_pos[m] = b.basis.position_of(mode_order[m]);
  }

  // Factor indices and label value per result index.
  std::vector<long> ia_of(dim), ib_of(dim);
  std::map<long, std::vector<long>> groups;
  {
    std::vector<int> occ(nm), occ_a(a.basis.num_modes()), occ_b(b.basis.num_modes());
    for (long I = 0; I < dim; ++I) {
      basis.occupation(I, occ);
      for (int m = 0; m < nm; ++m) {
        if (a_pos[m] >= 0) occ_a[a_pos[m]] = occ[m];
        else occ_b[b_pos[m]] = occ[m];
      }
      ia_of[I] = a.basis.index_of(occ_a);
      ib_of[I] = b.basis.index_of(occ_b);
      groups[label(occ)].push_back(I);
    }
  }

  long stored = 0;
  for (const auto& [v, idx] : groups)
    stored += static_cast<long>(idx.size()) * static_cast<long>(idx.size());
  if (stored > 300000000)
    throw config_error("tensor_blocked: block storage would hold " +
                       std::to_string(stored) + " entries");

  const EntryLookup la(a), lb(b);
  DensityOperator out;
  out.basis = basis;
  out.block_label_name = label.name;
  out.block_label = label;
  out.trace_deficit = 1.0 - (1.0 - a.trace_deficit) * (1.0 - b.trace_deficit);
  out.blocks.reserve(groups.size());
  for (auto& [v, idx] : groups) {
    DensityOperator::Block blk;
    blk.label = v;
    blk.indices = std::move(idx);
    const long n = static_cast<long>(blk.indices.size());
    blk.mat.resize(n, n);
    for (long r = 0; r < n; ++r) {
      const long I = blk.indices[r];
      for (long c = 0; c < n; ++c) {
        const long J = blk.indices[c];
        blk.mat(r, c) = la.at(ia_of[I], ia_of[J]) * lb.at(ib_of[I], ib_of[J]);
      }
    }
    out.blocks.push_back(std::move(blk));
  }
  return out;
}

DensityOperator partial_trace(const DensityOperator& rho,
                              const std::vector<ModeLabel>& keep) {
  if (keep.empty()) throw config_error("partial_trace: empty keep list");
  require_unique_modes(keep);
  std::vector<int> keep_pos;
  for (const auto& m : keep) {
    const int p = rho.basis.position_of(m);
    if (p < 0)
      throw config_error("partial_trace: mode " + to_string(m) + " not in basis");
    keep_pos.push_back(p);
  }
  const int nm = rho.basis.num_modes();
  std::vector<bool> kept(nm, false);
  for (int p : keep_pos) kept[p] = true;

  const MultiModeBasis kbasis = enumerate_basis(keep, rho.basis.cutoff);
  const long dim = rho.basis.dim();
  const int radix = rho.basis.cutoff + 1;

  // Per global index: index within the kept subspace and within the traced one.
  std::vector<long> kidx(dim), tidx(dim);
  {
    std::vector<int> occ(nm);
    for (long I = 0; I < dim; ++I) {
      rho.basis.occupation(I, occ);
      long k = 0;
      for (int p : keep_pos) k = k * radix + occ[p];
      long t = 0;
      for (int m = 0; m < nm; ++m)
        if (!kept[m]) t = t * radix + occ[m];
      kidx[I] = k;
      tidx[I] = t;
    }
  }

  DensityOperator out;
  out.basis = kbasis;
  out.matrix = MatrixXcd::Zero(kbasis.dim(), kbasis.dim());
  out.trace_deficit = rho.trace_deficit;

  if (rho.is_blocked()) {
    for (const auto& b : rho.blocks) {
      const long n = static_cast<long>(b.indices.size());
      for (long r = 0; r < n; ++r)
        for (long c = 0; c < n; ++c)
          if (tidx[b.indices[r]] == tidx[b.indices[c]])
            out.matrix(kidx[b.indices[r]], kidx[b.indices[c]]) += b.mat(r, c);
    }
  } else {
    std::map<long, std::vector<long>> by_traced;
    for (long I = 0; I < dim; ++I) by_traced[tidx[I]].push_back(I);
    for (const auto& [t, members] : by_traced)
      for (long gi : members)
        for (long gj : members)
          out.matrix(kidx[gi], kidx[gj]) += rho.entry(gi, gj);
  }
  return out;
}

DensityOperator block_decompose(const DensityOperator& rho, const BlockLabel& label,
                                double tol) {
  const long dim = rho.basis.dim();
  const int nm = rho.basis.num_modes();
  std::vector<long> lab(dim);
  std::map<long, std::vector<long>> groups;
  {
    std::vector<int> occ(nm);
    for (long I = 0; I < dim; ++I) {
      rho.basis.occupation(I, occ);
      lab[I] = label(occ);
      groups[lab[I]].push_back(I);
    }
  }

  // The label must be conserved: no significant weight may connect blocks.
  if (rho.is_blocked()) {
    for (const auto& b : rho.blocks) {
      const long n = static_cast<long>(b.indices.size());
      for (long r = 0; r < n; ++r)
        for (long c = 0; c < n; ++c)
          if (lab[b.indices[r]] != lab[b.indices[c]] &&
              std::abs(b.mat(r, c)) > tol)
            throw integrity_error(
                "block_decompose: label '" + label.name +
                "' not conserved (off-block entry " +
                std::to_string(std::abs(b.mat(r, c))) + ")");
    }
  } else {
    for (long i = 0; i < dim; ++i)
      for (long j = 0; j < dim; ++j)
        if (lab[i] != lab[j] && std::abs(rho.matrix(i, j)) > tol)
          throw integrity_error(
              "block_decompose: label '" + label.name +
              "' not conserved (off-block entry " +
              std::to_string(std::abs(rho.matrix(i, j))) + ")");
  }

  const EntryLookup look(rho);
  DensityOperator out;
  out.basis = rho.basis;
  out.block_label_name = label.name;
  out.block_label = label;
  out.trace_deficit = rho.trace_deficit;
  out.blocks.reserve(groups.size());
  for (auto& [v, idx] : groups) {
    DensityOperator::Block blk;
    blk.label = v;
    blk.indices = std::move(idx);
    const long n = static_cast<long>(blk.indices.size());
    blk.mat.resize(n, n);
    for (long r = 0; r < n; ++r)
      for (long c = 0; c < n; ++c)
        blk.mat(r, c) = look.at(blk.indices[r], blk.indices[c]);
    out.blocks.push_back(std::move(blk));
  }
  return out;
}

double mean_photon(const DensityOperator& rho, const ModeLabel& mode) {
  const int pos = rho.basis.position_of(mode);
  if (pos < 0)
    throw config_error("mean_photon: mode " + to_string(mode) + " not in basis");
  double n = 0.0;
  if (rho.is_blocked()) {
    for (const auto& b : rho.blocks)
      for (size_t r = 0; r < b.indices.size(); ++r)
        n += rho.basis.occupation_of(b.indices[r], pos) * b.mat(r, r).real();
  } else {
    for (long i = 0; i < rho.basis.dim(); ++i)
      n += rho.basis.occupation_of(i, pos) * rho.matrix(i, i).real();
  }
  return n;
}

double mean_photon(const PureState& psi, const ModeLabel& mode) {
  const int pos = psi.basis.position_of(mode);
  if (pos < 0)
    throw config_error("mean_photon: mode " + to_string(mode) + " not in basis");
  double n = 0.0;
  for (long i = 0; i < psi.basis.dim(); ++i)
    n += psi.basis.occupation_of(i, pos) * std::norm(psi.amplitudes(i));
  return n;
}

PureState reorder_modes(const PureState& psi, const std::vector<ModeLabel>& new_order) {
  if (new_order.size() != psi.basis.modes.size())
    throw config_error("reorder_modes: mode count mismatch");
  require_unique_modes(new_order);
  std::vector<int> old_pos;
  for (const auto& m : new_order) {
    const int p = psi.basis.position_of(m);
    if (p < 0)
      throw config_error("reorder_modes: mode " + to_string(m) + " not in basis");
    old_pos.push_back(p);
  }
  PureState out;
  out.basis = MultiModeBasis{new_order, psi.basis.cutoff};
  out.amplitudes = VectorXcd::Zero(psi.amplitudes.size());
  out.truncation_deficit = psi.truncation_deficit;
  const int nm = psi.basis.num_modes();
  std::vector<int> occ(nm), occ_new(nm);
  for (long I = 0; I < psi.basis.dim(); ++I) {
    psi.basis.occupation(I, occ);
    for (int m = 0; m < nm; ++m) occ_new[m] = occ[old_pos[m]];
    out.amplitudes(out.basis.index_of(occ_new)) = psi.amplitudes(I);
  }
  return out;
}

PureState relabel_modes(const PureState& psi, const std::vector<ModeLabel>& new_labels) {
  if (new_labels.size() != psi.basis.modes.size())
    throw config_error("relabel_modes: mode count mismatch");
  require_unique_modes(new_labels);
  PureState out = psi;
  out.basis.modes = new_labels;
  return out;
}

DensityOperator relabel_modes(const DensityOperator& rho,
                              const std::vector<ModeLabel>& new_labels) {
  if (new_labels.size() != rho.basis.modes.size())
    throw config_error("relabel_modes: mode count mismatch");
  require_unique_modes(new_labels);
  DensityOperator out = rho;
  out.basis.modes = new_labels;
  return out;
}

PureState embed(const PureState& psi, int larger_cutoff) {
  if (larger_cutoff < psi.basis.cutoff)
    throw config_error("embed: target cutoff smaller than source");
  PureState out;
  out.basis = enumerate_basis(psi.basis.modes, larger_cutoff);
  out.amplitudes = VectorXcd::Zero(out.basis.dim());
  out.truncation_deficit = psi.truncation_deficit;
  const int nm = psi.basis.num_modes();
  std::vector<int> occ(nm);
  for (long I = 0; I < psi.basis.dim(); ++I) {
    psi.basis.occupation(I, occ);
    out.amplitudes(out.basis.index_of(occ)) = psi.amplitudes(I);
  }
  return out;
}

double max_abs_diff(const DensityOperator& a, const DensityOperator& b) {
  require_same_basis(a.basis, b.basis, "max_abs_diff");
  const EntryLookup la(a), lb(b);
  const long dim = a.basis.dim();
  double worst = 0.0;
  for (long i = 0; i < dim; ++i)
    for (long j = 0; j < dim; ++j)
      worst = std::max(worst, std::abs(la.at(i, j) - lb.at(i, j)));
  return worst;
}

namespace {

constexpr char kMagic[8] = {'M', 'Q', 'S', 'O', 'P', '0', '1', '\n'};

void write_upper(std::ofstream& f, const MatrixXcd& m) {
  for (long i = 0; i < m.rows(); ++i)
    for (long j = i; j < m.cols(); ++j) {
      const double re = m(i, j).real(), im = m(i, j).imag();
      f.write(reinterpret_cast<const char*>(&re), sizeof re);
      f.write(reinterpret_cast<const char*>(&im), sizeof im);
    }
}

void read_upper(std::ifstream& f, MatrixXcd& m) {
  for (long i = 0; i < m.rows(); ++i)
    for (long j = i; j < m.cols(); ++j) {
      double re = 0, im = 0;
      f.read(reinterpret_cast<char*>(&re), sizeof re);
      f.read(reinterpret_cast<char*>(&im), sizeof im);
      m(i, j) = cxd(re, im);
      if (j > i) m(j, i) = std::conj(m(i, j));
    }
}

}  // namespace

void save_operator(const DensityOperator& rho, const std::string& path) {
  nlohmann::json header;
  header["modes"] = nlohmann::json::array();
  for (const auto& m : rho.basis.modes)
    header["modes"].push_back({m.spatial, m.polarization});
  header["cutoff"] = rho.basis.cutoff;
  header["trace_deficit"] = rho.trace_deficit;
  header["storage"] = rho.is_blocked() ? "blocked" : "dense";
  if (rho.is_blocked()) {
    header["block_label_name"] = rho.block_label_name;
    header["label_coeffs"] = rho.block_label.coeffs;
    header["label_modulus"] = rho.block_label.modulus;
    auto blocks = nlohmann::json::array();
    for (const auto& b : rho.blocks)
      blocks.push_back({{"label", b.label}, {"indices", b.indices}});
    header["blocks"] = std::move(blocks);
  }
  const std::string hs = header.dump();

  std::ofstream f(path, std::ios::binary);
  if (!f) throw config_error("save_operator: cannot open " + path);
  f.write(kMagic, sizeof kMagic);
  const std::uint64_t hlen = hs.size();
  f.write(reinterpret_cast<const char*>(&hlen), sizeof hlen);
  f.write(hs.data(), static_cast<std::streamsize>(hs.size()));
  if (rho.is_blocked()) {
    for (const auto& b : rho.blocks) write_upper(f, b.mat);
  } else {
    write_upper(f, rho.matrix);
  }
  if (!f) throw config_error("save_operator: write failed for " + path);
}

DensityOperator load_operator(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw config_error("load_operator: cannot open " + path);
  char magic[8];
  f.read(magic, sizeof magic);
  if (!f || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw config_error("load_operator: " + path + " is not an operator file");
  std::uint64_t hlen = 0;
  f.read(reinterpret_cast<char*>(&hlen), sizeof hlen);
  std::string hs(hlen, '\0');
  f.read(hs.data(), static_cast<std::streamsize>(hlen));
  if (!f) throw config_error("load_operator: truncated header in " + path);
  const auto header = nlohmann::json::parse(hs, nullptr, false);
  if (header.is_discarded())
    throw config_error("load_operator: malformed header in " + path);

  DensityOperator rho;
  std::vector<ModeLabel> modes;
  for (const auto& m : header.at("modes"))
    modes.push_back(ModeLabel{m.at(0).get<std::string>(), m.at(1).get<std::string>()});
  rho.basis = enumerate_basis(std::move(modes), header.at("cutoff").get<int>());
  rho.trace_deficit = header.at("trace_deficit").get<double>();
  if (header.at("storage").get<std::string>() == "blocked") {
    rho.block_label_name = header.at("block_label_name").get<std::string>();
    rho.block_label.name = rho.block_label_name;
    if (header.contains("label_coeffs")) {
      rho.block_label.coeffs = header.at("label_coeffs").get<std::vector<long>>();
      rho.block_label.modulus = header.at("label_modulus").get<long>();
    }
    for (const auto& bj : header.at("blocks")) {
      DensityOperator::Block b;
      b.label = bj.at("label").get<long>();
      b.indices = bj.at("indices").get<std::vector<long>>();
      const long n = static_cast<long>(b.indices.size());
      b.mat = MatrixXcd::Zero(n, n);
      read_upper(f, b.mat);
      rho.blocks.push_back(std::move(b));
    }
  } else {
    const long dim = rho.basis.dim();
    rho.matrix = MatrixXcd::Zero(dim, dim);
    read_upper(f, rho.matrix);
  }
  if (!f) throw config_error("load_operator: truncated payload in " + path);
  return rho;
}

}  // namespace mqs
