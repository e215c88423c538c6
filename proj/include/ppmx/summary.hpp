#pragma once

#include <span>
#include <vector>

#include "ppmx/types.hpp"

namespace ppmx {

// Posterior co-clustering frequencies: entry (i,i') is the fraction of kept
// draws in which i and i' share a cluster.
Matrix cooccurrence(const std::vector<std::vector<int>>& draws);
Matrix cooccurrence_serial(const std::vector<std::vector<int>>& draws);

// Variation of information between two partitions (natural logs).
double vi_distance(std::span<const int> p1, std::span<const int> p2);

// Permutation-adjusted Rand index.
double adjusted_rand_index(std::span<const int> p1, std::span<const int> p2);

// The sampled partition minimizing average VI distance to all kept draws.
std::vector<int> point_estimate_partition(const std::vector<std::vector<int>>& draws);
std::vector<int> point_estimate_partition_serial(const std::vector<std::vector<int>>& draws);

// Relabel clusters in order of first appearance (0-based, gapless).
std::vector<int> canonical_labels(std::span<const int> p);

}  // namespace ppmx
