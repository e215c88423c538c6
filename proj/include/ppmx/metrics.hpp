#pragma once

#include <span>

#include "ppmx/types.hpp"

namespace ppmx {

// number of patients misassigned to their optimal treatment
int metric_mot(std::span<const int> recommended, std::span<const int> optimal);

struct PctDeltaMtu {
  double value = 0.0;
  bool defined = false;  // false when every patient has equal utilities across arms
};

// relative gain in treatment utility, T = 2; true_utilities is n x 2
PctDeltaMtu metric_pct_delta_mtu(std::span<const int> recommended, std::span<const int> optimal,
                                 const Matrix& true_utilities);

// number of patients whose outcome category was predicted exactly
int metric_npc(std::span<const int> predicted, std::span<const int> observed);

struct EsmResult {
  double value = 0.0;
  int empty_terms = 0;  // arms whose agreement subset was empty
};

// empirical summary measure: gain in response rate of the rule over
// randomization; outcomes are 0/1, arms coded 1/2
EsmResult metric_esm(std::span<const int> outcome, std::span<const int> received,
                     std::span<const int> recommended);

}  // namespace ppmx
