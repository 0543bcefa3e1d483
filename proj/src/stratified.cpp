#include "mtm/stratified.hpp"

#include "mtm/compensated_sum.hpp"

#include <limits>
#include <string>

namespace mtm {

namespace {
constexpr std::size_t kUnassigned = std::numeric_limits<std::size_t>::max();
}

Partition::Partition(std::vector<std::vector<State>> blocks, std::size_t n_states)
  : blocks_(std::move(blocks)), block_of_(n_states, kUnassigned)
{
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    if (blocks_[b].empty())
      throw InvalidConfiguration("partition block " + std::to_string(b) + " is empty");
    for (State x : blocks_[b]) {
      if (x >= n_states)
        throw InvalidConfiguration("partition state " + std::to_string(x) + " is outside the space");
      if (block_of_[x] != kUnassigned)
        throw InvalidConfiguration("partition blocks overlap at state " + std::to_string(x));
      block_of_[x] = b;
    }
  }
  for (State x = 0; x < n_states; ++x)
    if (block_of_[x] == kUnassigned)
      throw InvalidConfiguration("state " + std::to_string(x) + " is not covered by the partition");
}

Partition Partition::singletons(std::size_t n_states)
{
  std::vector<std::vector<State>> blocks(n_states);
  for (State x = 0; x < n_states; ++x)
    blocks[x] = {x};
  return Partition(std::move(blocks), n_states);
}

Partition Partition::pairing(std::size_t n_states)
{
  if (n_states == 0 || n_states % 2 != 0)
    throw InvalidConfiguration("pairing partition needs an even number of states");
  std::vector<std::vector<State>> blocks;
  for (State j = 0; j < n_states / 2; ++j)
    blocks.push_back({j, n_states - 1 - j});
  return Partition(std::move(blocks), n_states);
}

std::size_t Partition::block_of(State x) const
{
  if (x >= block_of_.size())
    throw InvalidConfiguration("state " + std::to_string(x) + " is not covered by the partition");
  return block_of_[x];
}

namespace {

Eigen::VectorXd block_sums(const Eigen::VectorXd& probs, const Partition& partition)
{
  Eigen::VectorXd sums(static_cast<Eigen::Index>(partition.block_count()));
  for (std::size_t b = 0; b < partition.block_count(); ++b) {
    CompensatedSum<> s;
    for (State x : partition.block(b))
      s += probs(static_cast<Eigen::Index>(x));
    sums(static_cast<Eigen::Index>(b)) = s.value();
  }
  return sums;
}

} // namespace

StratifiedDesign::StratifiedDesign(FiniteDistribution target, FiniteDistribution proposal, Partition partition)
  : target_(std::move(target)),
    proposal_(std::move(proposal)),
    partition_(std::move(partition)),
    block_target_(block_sums(target_.probs(), partition_)),
    block_proposal_(block_sums(proposal_.probs(), partition_))
{
  if (target_.size() != proposal_.size() || partition_.state_count() != target_.size())
    throw InvalidConfiguration("stratified design: target, proposal and partition sizes differ");
  const auto blocks = static_cast<Eigen::Index>(partition_.block_count());
  block_weights_.resize(blocks);
  for (Eigen::Index b = 0; b < blocks; ++b) {
    const double p = block_target_(b);
    const double t = block_proposal_(b);
    if (!(p > 0.0))
      throw InvalidConfiguration("stratified design: block " + std::to_string(b) + " has no target mass");
    block_weights_(b) = t > 0.0 ? p / t : std::numeric_limits<double>::infinity();
  }
  within_.reserve(partition_.block_count());
  for (std::size_t b = 0; b < partition_.block_count(); ++b) {
    Eigen::VectorXd restricted = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(target_.size()));
    for (State x : partition_.block(b))
      restricted(static_cast<Eigen::Index>(x)) = target_(x);
    within_.emplace_back(std::move(restricted));
  }
}

} // namespace mtm
