#include "ppmx/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace ppmx {

namespace {
void check_equal_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw std::invalid_argument(std::string(what) + ": length mismatch");
}
}  // namespace

int metric_mot(std::span<const int> recommended, std::span<const int> optimal) {
  check_equal_length(recommended.size(), optimal.size(), "metric_mot");
  int mot = 0;
  for (std::size_t i = 0; i < recommended.size(); ++i)
    if (recommended[i] != optimal[i]) ++mot;
  return mot;
}

PctDeltaMtu metric_pct_delta_mtu(std::span<const int> recommended, std::span<const int> optimal,
                                 const Matrix& true_utilities) {
  check_equal_length(recommended.size(), optimal.size(), "metric_pct_delta_mtu");
  if (true_utilities.cols() != 2)
    throw std::invalid_argument("metric_pct_delta_mtu: defined for T = 2 arms");
  if (true_utilities.rows() != static_cast<Eigen::Index>(recommended.size()))
    throw std::invalid_argument("metric_pct_delta_mtu: utility row count mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < recommended.size(); ++i) {
    double gap = std::abs(true_utilities(i, 0) - true_utilities(i, 1));
    den += gap;
    num += (recommended[i] == optimal[i] ? 1.0 : -1.0) * gap;
  }
  PctDeltaMtu out;
  if (den == 0.0) return out;
  out.value = num / den;
  out.defined = true;
  return out;
}

int metric_npc(std::span<const int> predicted, std::span<const int> observed) {
  check_equal_length(predicted.size(), observed.size(), "metric_npc");
  int npc = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i)
    if (predicted[i] == observed[i]) ++npc;
  return npc;
}

EsmResult metric_esm(std::span<const int> outcome, std::span<const int> received,
                     std::span<const int> recommended) {
  check_equal_length(outcome.size(), received.size(), "metric_esm");
  check_equal_length(outcome.size(), recommended.size(), "metric_esm");
  const double n = static_cast<double>(outcome.size());
  if (n == 0) throw std::invalid_argument("metric_esm: empty input");
  EsmResult out;
  double overall = 0.0;
  for (int y : outcome) overall += y;
  overall /= n;
  double esm = -overall;
  for (int arm = 1; arm <= 2; ++arm) {
    long long rec_count = 0, agree = 0, agree_resp = 0;
    for (std::size_t i = 0; i < outcome.size(); ++i) {
      if (recommended[i] == arm) ++rec_count;
      if (recommended[i] == arm && received[i] == arm) {
        ++agree;
        agree_resp += outcome[i];
      }
    }
    if (agree == 0) {
      if (rec_count > 0) ++out.empty_terms;
      continue;
    }
    esm += (static_cast<double>(agree_resp) / agree) * (rec_count / n);
  }
  out.value = esm;
  return out;
}

}  // namespace ppmx
