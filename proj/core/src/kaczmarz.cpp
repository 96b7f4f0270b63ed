#include "relproj/kaczmarz.hpp"

#include <string>

namespace relproj {

BlockSystem::BlockSystem(Matrix m, Vector b, std::vector<std::vector<std::size_t>> blocks)
    : m_(std::move(m)), b_(std::move(b)), blocks_(std::move(blocks)) {
  if (m_.rows() != b_.size()) {
    throw InputError("BlockSystem: matrix has " + std::to_string(m_.rows()) + " rows but rhs has length " +
                     std::to_string(b_.size()));
  }
  if (m_.rows() < 1 || m_.cols() < 1) throw InputError("BlockSystem: empty system");
  if (!m_.allFinite() || !b_.allFinite()) throw InputError("BlockSystem: non-finite entries");
  std::vector<int> seen(static_cast<std::size_t>(m_.rows()), 0);
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    if (blocks_[k].empty()) throw InputError("BlockSystem: block " + std::to_string(k) + " is empty");
    for (auto r : blocks_[k]) {
      if (r >= seen.size()) {
        throw InputError("BlockSystem: block " + std::to_string(k) + " names row " + std::to_string(r) +
                         " of a " + std::to_string(seen.size()) + "-row system");
      }
      if (seen[r]++) throw InputError("BlockSystem: row " + std::to_string(r) + " appears in more than one block");
    }
  }
  for (std::size_t r = 0; r < seen.size(); ++r) {
    if (!seen[r]) throw InputError("BlockSystem: row " + std::to_string(r) + " is not covered by any block");
  }
}

BlockSystem BlockSystem::singletons(Matrix m, Vector b) {
  std::vector<std::vector<std::size_t>> blocks;
  for (Index r = 0; r < m.rows(); ++r) blocks.push_back({static_cast<std::size_t>(r)});
  return BlockSystem(std::move(m), std::move(b), std::move(blocks));
}

Matrix BlockSystem::block_matrix(std::size_t block) const {
  const auto& rows = blocks_.at(block);
  Matrix out(static_cast<Index>(rows.size()), m_.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = m_.row(static_cast<Index>(rows[i]));
  return out;
}

Vector BlockSystem::block_rhs(std::size_t block) const {
  const auto& rows = blocks_.at(block);
  Vector out(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out(static_cast<Index>(i)) = b_(static_cast<Index>(rows[i]));
  return out;
}

std::vector<AffineSubspace> blocks_to_affine(const BlockSystem& sys) {
  std::vector<AffineSubspace> out;
  out.reserve(sys.blocks().size());
  for (std::size_t k = 0; k < sys.blocks().size(); ++k) {
    const Matrix mi = sys.block_matrix(k);
    const Vector bi = sys.block_rhs(k);
    const auto ls = least_squares(mi, bi);
    if (ls.residual_norm > 1e-8 * (1.0 + bi.norm())) {
      throw InputError("blocks_to_affine: block " + std::to_string(k) + " is inconsistent (residual " +
                       std::to_string(ls.residual_norm) + ")");
    }
    out.emplace_back(LinearSubspace::from_orthonormal(nullspace(mi)), ls.solution);
  }
  return out;
}

KaczmarzReport solve(const BlockSystem& sys, const Schedule& schedule, const Vector& x0, std::size_t n_steps,
                     TraceStorage storage) {
  const auto collection = blocks_to_affine(sys);
  const auto ls = least_squares(sys.matrix(), sys.rhs());

  KaczmarzReport report;
  report.lsq_residual = ls.residual_norm;
  report.consistent = ls.residual_norm <= 1e-8 * (1.0 + sys.rhs().norm());
  report.residuals.reserve(n_steps + 1);
  report.lsq_distance.reserve(n_steps + 1);
  report.trace = iterate(collection, schedule, x0, n_steps, storage, [&](std::size_t, const Vector& x) {
    report.residuals.push_back((sys.matrix() * x - sys.rhs()).norm());
    report.lsq_distance.push_back((x - ls.solution).norm());
  });
  return report;
}

}  // namespace relproj
