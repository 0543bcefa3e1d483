#pragma once

#include "mtm/distributions.hpp"

#include <Eigen/Dense>

#include <vector>

namespace mtm {

/// Disjoint blocks covering {0, ..., N-1}.
class Partition
{
public:
  Partition(std::vector<std::vector<State>> blocks, std::size_t n_states);

  static Partition singletons(std::size_t n_states);
  /// Blocks {j, N-1-j}; N must be even.
  static Partition pairing(std::size_t n_states);

  std::size_t block_count() const { return blocks_.size(); }
  std::size_t state_count() const { return block_of_.size(); }
  const std::vector<State>& block(std::size_t b) const { return blocks_[b]; }
  const std::vector<std::vector<State>>& blocks() const { return blocks_; }
  std::size_t block_of(State x) const;

private:
  std::vector<std::vector<State>> blocks_;
  std::vector<std::size_t> block_of_;
};

/// Block-level IMH design: block masses under target and proposal plus the
/// within-block target laws.
class StratifiedDesign
{
public:
  StratifiedDesign(FiniteDistribution target, FiniteDistribution proposal, Partition partition);

  const FiniteDistribution& target() const { return target_; }
  const FiniteDistribution& proposal() const { return proposal_; }
  const Partition& partition() const { return partition_; }
  const FiniteDistribution& block_proposal() const { return block_proposal_; }
  const Eigen::VectorXd& block_target() const { return block_target_; }
  /// pi(X_j) / T(X_j), infinite for blocks with no proposal mass.
  const Eigen::VectorXd& block_weights() const { return block_weights_; }
  const FiniteDistribution& within_block(std::size_t b) const { return within_[b]; }

private:
  FiniteDistribution target_;
  FiniteDistribution proposal_;
  Partition partition_;
  Eigen::VectorXd block_target_;
  FiniteDistribution block_proposal_;
  Eigen::VectorXd block_weights_;
  std::vector<FiniteDistribution> within_;
};

} // namespace mtm
