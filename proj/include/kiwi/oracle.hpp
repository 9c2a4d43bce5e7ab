#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "kiwi/miner.hpp"

namespace kiwi {

class InstanceTooLarge : public std::runtime_error {
public:
  InstanceTooLarge(std::uint64_t tuples, std::uint64_t limit);
  std::uint64_t tuples;
};

inline constexpr std::uint64_t oracle_tuple_limit = 10'000'000;

/// Number of ordered column tuples of every length in [min_cols, m]:
/// the sum of m!/(m-l)!. Saturates at UINT64_MAX.
std::uint64_t ordered_tuple_count(std::size_t m, std::size_t min_cols);

/// Exhaustive OPSM/GOPSM enumeration: every ordered tuple of length >= min_cols,
/// supported in the same way as the miner, then redundancy-filtered and finalized.
/// params.k, threads and spill_cap are ignored. Refuses instances above the limit.
std::vector<Cluster> exact_mine(const SequenceDatabase& db, const MiningParams& params,
                                std::uint64_t limit = oracle_tuple_limit);

}  // namespace kiwi
