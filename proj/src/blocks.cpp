#include "polyalg/blocks.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <string>

#include <Eigen/Eigenvalues>

#include "polyalg/errors.hpp"
#include "polyalg/pla.hpp"
#include "polyalg/polarization.hpp"

namespace polyalg {

std::string BlockLabel::to_string() const {
  if (kind == BlockKind::mps) return "(k=" + std::to_string(k) + ", 2j=" + std::to_string(two_j) + ")";
  return "(2p=" + std::to_string(two_p) + ", N=" + std::to_string(shell) + ")";
}

Eigen::VectorXcd BlockSubspace::column(int c) const { return Eigen::VectorXcd(columns.col(c)); }

Occupation BlockSubspace::dominant_occupation(int c) const {
  double best = -1.0;
  Eigen::Index row = 0;
  for (SparseMatrix::InnerIterator it(columns, c); it; ++it) {
    if (std::abs(it.value()) > best + 1e-12) {
      best = std::abs(it.value());
      row = it.row();
    }
  }
  return basis->state(static_cast<std::size_t>(row));
}

Eigen::VectorXcd BlockSubspace::embed(const Eigen::VectorXcd& block_vector) const {
  return columns * block_vector;
}

Eigen::VectorXcd BlockSubspace::project(const Eigen::VectorXcd& fock_vector) const {
  return columns.adjoint() * fock_vector;
}

namespace {

SparseMatrix columns_from_dense(const std::vector<Eigen::VectorXcd>& cols, std::size_t rows) {
  std::vector<Eigen::Triplet<Complex>> trips;
  for (std::size_t c = 0; c < cols.size(); ++c) {
    for (Eigen::Index r = 0; r < cols[c].size(); ++r) {
      if (std::abs(cols[c](r)) > 1e-14) trips.emplace_back(static_cast<int>(r), static_cast<int>(c), cols[c](r));
    }
  }
  SparseMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols.size()));
  m.setFromTriplets(trips.begin(), trips.end());
  m.makeCompressed();
  return m;
}

BlockSubspace chain_block(const PlaGenerators& gen, int k, int two_j) {
  const int s = gen.spec.s;
  const Occupation ref = {two_j, k};
  const auto idx = gen.basis->index_of(ref);
  if (!idx) throw IndexError("mps_block: reference vector outside the cutoff");
  const std::size_t dim = gen.basis->size();
  std::vector<Eigen::VectorXcd> cols;
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dim));
  v(static_cast<Eigen::Index>(*idx)) = 1.0;
  cols.push_back(v);
  for (int kappa = 1; kappa <= two_j; ++kappa) {
    v = gen.Vplus[0].matrix() * v;
    const double norm = v.norm();
    if (norm == 0.0) throw ModelViolationError("mps_block: V+ chain terminated early");
    v /= norm;
    cols.push_back(v);
  }
  BlockSubspace b;
  b.label = BlockLabel::mps(k, two_j);
  b.basis = gen.basis;
  b.columns = columns_from_dense(cols, dim);
  b.dimension = two_j + 1;
  b.reference_index = 0;
  b.eigenvalue = (k + static_cast<double>(s) * two_j) / (s + 1.0);
  return b;
}

bool chain_fits(int s, int k, int two_j, int cutoff) { return k + s * two_j <= cutoff; }

}  // namespace

BlockSubspace mps_block(const PlaGenerators& gen, int k, int two_j) {
  if (gen.spec.n != 1) throw ValidationError("mps_block: requires n = 1 generators");
  if (k < 0 || k >= gen.spec.s || two_j < 0) throw IndexError("mps_block: need 0 <= k < s and 2j >= 0");
  if (!chain_fits(gen.spec.s, k, two_j, gen.basis->total_cutoff())) {
    throw IndexError("mps_block: block " + BlockLabel::mps(k, two_j).to_string() + " does not fit cutoff " +
                     std::to_string(gen.basis->total_cutoff()));
  }
  return chain_block(gen, k, two_j);
}

MpsDecomposition decompose_mps(const PlaGenerators& gen, bool log_clipped) {
  if (gen.spec.n != 1) throw ValidationError("decompose_mps: requires n = 1 generators");
  const int s = gen.spec.s;
  const int cutoff = gen.basis->total_cutoff();
  MpsDecomposition dec;
  for (int k = 0; k < s; ++k) {
    // The reference vector has k + 2j quanta; its chain tops out at k + s*2j.
    for (int two_j = 0; k + two_j <= cutoff; ++two_j) {
      if (chain_fits(s, k, two_j, cutoff)) {
        dec.blocks.push_back(chain_block(gen, k, two_j));
      } else {
        dec.clipped.push_back(BlockLabel::mps(k, two_j));
        if (log_clipped) {
          std::clog << "warning: block " << dec.clipped.back().to_string()
                    << " clipped by cutoff " << cutoff << ", dropped\n";
        }
      }
    }
  }
  return dec;
}

Report mps_partition_report(const PlaGenerators& gen, const MpsDecomposition& dec) {
  Report report("mps_partition");
  const int s = gen.spec.s;
  const int cutoff = gen.basis->total_cutoff();
  std::vector<int> owner(gen.basis->size(), 0);
  bool dims_ok = true;
  long total_dim = 0;
  double ortho = 0.0, nil = 0.0;
  for (const auto& b : dec.blocks) {
    dims_ok = dims_ok && b.dimension == b.label.two_j + 1 && b.columns.cols() == b.dimension;
    total_dim += b.dimension;
    for (int c = 0; c < b.columns.outerSize(); ++c)
      for (SparseMatrix::InnerIterator it(b.columns, c); it; ++it) ++owner[it.row()];
    ortho = std::max(ortho, orthonormality_defect(b));

    // V+ restricted to the block is nilpotent of index 2j+1.
    const Eigen::MatrixXcd vp = restrict_to_block(gen.Vplus[0], b).matrix;
    Eigen::MatrixXcd pw = Eigen::MatrixXcd::Identity(b.dimension, b.dimension);
    for (int p = 0; p < b.dimension - 1; ++p) pw = pw * vp;
    const bool last_nonzero = b.dimension == 1 || pw.cwiseAbs().maxCoeff() > 1e-8;
    pw = pw * vp;
    const double zero_power = pw.cwiseAbs().maxCoeff();
    if (!last_nonzero) nil = std::max(nil, 1.0);
    nil = std::max(nil, zero_power / std::max(1.0, vp.cwiseAbs().maxCoeff()));
  }
  report.add_condition("dimension_is_2j_plus_1", dims_ok);

  long covered_expected = 0;
  bool no_duplicates = true, coverage = true;
  for (std::size_t i = 0; i < gen.basis->size(); ++i) {
    const auto& o = gen.basis->state(i);
    const int n1 = o[1], n0 = o[0];
    const int k = n1 % s;
    const int two_j = n0 + (n1 - k) / s;
    const bool fits = chain_fits(s, k, two_j, cutoff);
    if (fits) ++covered_expected;
    no_duplicates = no_duplicates && owner[i] <= 1;
    coverage = coverage && (owner[i] == (fits ? 1 : 0));
  }
  report.add_condition("no_state_in_two_blocks", no_duplicates);
  report.add_condition("covers_untruncated_states", coverage && total_dim == covered_expected);
  report.add("columns_orthonormal", ortho, 1e-12);
  report.add("Vplus_nilpotent_index_2j_plus_1", nil, 1e-10);
  return report;
}

// ---------------------------------------------------------------------------

std::vector<BlockSubspace> decompose_polarization(const PolarizationOps& pol, int shell) {
  if (shell < 0 || shell > pol.basis->total_cutoff()) {
    throw ValidationError("decompose_polarization: shell outside [0, cutoff]");
  }
  const auto idx = pol.basis->shell_indices(shell);
  const auto d = static_cast<Eigen::Index>(idx.size());
  const auto offset = static_cast<Eigen::Index>(idx.front());
  const std::size_t full = pol.basis->size();
  auto shell_block = [&](const OperatorMatrix& op) {
    return Eigen::MatrixXcd(op.matrix().block(offset, offset, d, d));
  };
  const Eigen::MatrixXcd p2 = shell_block(pol.P2sq);
  const Eigen::MatrixXcd pplus = shell_block(pol.Pplus);
  const Eigen::MatrixXcd p0 = shell_block(pol.P0);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(p2);
  std::map<int, std::vector<Eigen::Index>> groups;
  for (Eigen::Index a = 0; a < d; ++a) {
    const double lam = es.eigenvalues()(a);
    const double p = 0.5 * (-1.0 + std::sqrt(std::max(0.0, 1.0 + 4.0 * lam)));
    const int two_p = static_cast<int>(std::lround(2.0 * p));
    const double expect = 0.25 * two_p * (two_p + 2);
    if (std::abs(lam - expect) > 1e-8 || two_p > shell || (shell - two_p) % 2 != 0) {
      throw SpectralAnomalyError("decompose_polarization: P^2 eigenvalue " + std::to_string(lam) +
                                 " is not p(p+1) for an admissible p in shell " + std::to_string(shell));
    }
    groups[two_p].push_back(a);
  }

  std::vector<BlockSubspace> out;
  for (const auto& [two_p, members] : groups) {
    Eigen::MatrixXcd U(d, static_cast<Eigen::Index>(members.size()));
    for (std::size_t c = 0; c < members.size(); ++c) U.col(c) = es.eigenvectors().col(members[c]);
    const int width = two_p + 1;
    if (static_cast<int>(members.size()) % width != 0) {
      throw SpectralAnomalyError("decompose_polarization: eigenspace dimension not a multiple of 2p+1");
    }
    const int mult = static_cast<int>(members.size()) / width;

    // Lowest-weight subspace W: P0 = -p inside the eigenspace.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ez(U.adjoint() * p0 * U);
    std::vector<Eigen::Index> low;
    for (Eigen::Index a = 0; a < ez.eigenvalues().size(); ++a) {
      if (std::abs(ez.eigenvalues()(a) + 0.5 * two_p) < 1e-8) low.push_back(a);
    }
    if (static_cast<int>(low.size()) != mult) {
      throw SpectralAnomalyError("decompose_polarization: lowest-weight multiplicity mismatch");
    }
    Eigen::MatrixXcd W(d, mult);
    for (int c = 0; c < mult; ++c) W.col(c) = U * ez.eigenvectors().col(low[c]);
    const Eigen::MatrixXcd proj = W * W.adjoint();

    // Deterministic seeds: project basis states in graded-lex order, Gram-Schmidt.
    std::vector<Eigen::VectorXcd> seeds;
    for (Eigen::Index a = 0; a < d && static_cast<int>(seeds.size()) < mult; ++a) {
      Eigen::VectorXcd v = proj.col(a);
      for (const auto& u : seeds) v -= u * u.dot(v);
      const double nrm = v.norm();
      if (nrm > 1e-6) seeds.push_back(v / nrm);
    }

    std::vector<Eigen::VectorXcd> cols;
    for (const auto& seed : seeds) {
      Eigen::VectorXcd v = seed;
      for (int m = 0; m <= two_p; ++m) {
        Eigen::VectorXcd full_v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(full));
        full_v.segment(offset, d) = v;
        cols.push_back(full_v);
        if (m < two_p) {
          v = pplus * v;
          v /= v.norm();
        }
      }
    }
    BlockSubspace b;
    b.label = BlockLabel::polarization(two_p, shell);
    b.basis = pol.basis;
    b.columns = columns_from_dense(cols, full);
    b.dimension = static_cast<int>(cols.size());
    b.multiplicity = mult;
    b.reference_index = 0;
    b.eigenvalue = 0.25 * two_p * (two_p + 2);
    out.push_back(std::move(b));
  }
  return out;
}

BlockSubspace polarization_sector(const PolarizationOps& pol, int two_p, int max_shell) {
  if (max_shell > pol.basis->total_cutoff()) throw ValidationError("polarization_sector: max_shell exceeds cutoff");
  BlockSubspace sector;
  sector.label = BlockLabel::polarization(two_p, max_shell);
  sector.basis = pol.basis;
  sector.eigenvalue = 0.25 * two_p * (two_p + 2);
  sector.multiplicity = 0;
  std::vector<Eigen::Triplet<Complex>> trips;
  int col = 0;
  for (int shell = two_p; shell <= max_shell; shell += 2) {
    for (const auto& b : decompose_polarization(pol, shell)) {
      if (b.label.two_p != two_p) continue;
      for (int c = 0; c < b.columns.outerSize(); ++c, ++col)
        for (SparseMatrix::InnerIterator it(b.columns, c); it; ++it)
          trips.emplace_back(static_cast<int>(it.row()), col, it.value());
      sector.multiplicity += b.multiplicity;
    }
  }
  if (col == 0) throw IndexError("polarization_sector: no states with this p below max_shell");
  sector.columns = SparseMatrix(static_cast<Eigen::Index>(pol.basis->size()), col);
  sector.columns.setFromTriplets(trips.begin(), trips.end());
  sector.columns.makeCompressed();
  sector.dimension = col;
  return sector;
}

RestrictedOperator restrict_to_block(const OperatorMatrix& op, const BlockSubspace& block) {
  if (!op.basis().same_space(*block.basis)) throw StructuralError("restrict: block and operator use different Fock spaces");
  const SparseMatrix image = op.matrix() * block.columns;  // op Pi
  RestrictedOperator r;
  r.matrix = Eigen::MatrixXcd(block.columns.adjoint() * image);
  const Eigen::MatrixXcd dense_image(image);
  const Eigen::MatrixXcd back = Eigen::MatrixXcd(block.columns) * r.matrix;
  r.leakage = (dense_image - back).norm();
  const double scale = std::max(1.0, dense_image.size() ? dense_image.cwiseAbs().maxCoeff() : 0.0);
  r.invariant = r.leakage <= 1e-10 * scale;
  return r;
}

double orthonormality_defect(const BlockSubspace& block) {
  const Eigen::MatrixXcd g = Eigen::MatrixXcd(block.columns.adjoint() * block.columns);
  return (g - Eigen::MatrixXcd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

nlohmann::ordered_json block_inventory_json(const std::vector<BlockSubspace>& blocks) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& b : blocks) {
    nlohmann::ordered_json j;
    nlohmann::ordered_json label;
    if (b.label.kind == BlockKind::mps) {
      label["kind"] = "mps";
      label["k"] = b.label.k;
      label["two_j"] = b.label.two_j;
    } else {
      label["kind"] = "polarization";
      label["p"] = b.label.p();
      label["shell"] = b.label.shell;
    }
    j["label"] = label;
    j["dimension"] = b.dimension;
    if (b.label.kind == BlockKind::polarization) j["multiplicity"] = b.multiplicity;
    j["reference_occupation"] = b.dominant_occupation(b.reference_index);
    j[b.label.kind == BlockKind::mps ? "r1" : "p_casimir"] = b.eigenvalue;
    arr.push_back(j);
  }
  return arr;
}

}  // namespace polyalg
