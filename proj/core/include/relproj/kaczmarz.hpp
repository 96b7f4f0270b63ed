#pragma once

#include <vector>

#include "relproj/engine.hpp"

namespace relproj {

/// A linear system M x = b whose rows are partitioned into blocks.
class BlockSystem {
 public:
  /// Validates that `blocks` partition {0, ..., p-1} with no empty block.
  BlockSystem(Matrix m, Vector b, std::vector<std::vector<std::size_t>> blocks);

  /// One block per row (classical Kaczmarz).
  static BlockSystem singletons(Matrix m, Vector b);

  const Matrix& matrix() const { return m_; }
  const Vector& rhs() const { return b_; }
  const std::vector<std::vector<std::size_t>>& blocks() const { return blocks_; }

  Matrix block_matrix(std::size_t block) const;
  Vector block_rhs(std::size_t block) const;

 private:
  Matrix m_;
  Vector b_;
  std::vector<std::vector<std::size_t>> blocks_;
};

/// {x : M_I x = b_I} for every block I, in canonical form. The translation
/// is the minimum-norm solution, which lies in the row space of M_I.
/// Throws InputError naming the block when a block subsystem is unsolvable.
std::vector<AffineSubspace> blocks_to_affine(const BlockSystem& sys);

struct KaczmarzReport {
  IterationTrace trace;
  std::vector<double> residuals;     // ||M x_n - b||
  std::vector<double> lsq_distance;  // ||x_n - x_LS||, x_LS the min-norm least-squares solution
  bool consistent;
  double lsq_residual;               // ||M x_LS - b||
};

KaczmarzReport solve(const BlockSystem& sys, const Schedule& schedule, const Vector& x0, std::size_t n_steps,
                     TraceStorage storage = TraceStorage::full);

}  // namespace relproj
