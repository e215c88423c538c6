#include "ppmx/summary.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace ppmx {

namespace {

void check_nonempty(const std::vector<std::vector<int>>& draws) {
  if (draws.empty()) throw std::invalid_argument("partition summary: no kept draws");
}

// counts of the contingency table between two partitions
struct Contingency {
  std::vector<long long> row, col;
  std::map<std::pair<int, int>, long long> cells;
  long long n = 0;
};

Contingency contingency(std::span<const int> p1, std::span<const int> p2) {
  if (p1.size() != p2.size())
    throw std::invalid_argument("partitions must cover the same units");
  Contingency t;
  t.n = static_cast<long long>(p1.size());
  int c1 = *std::max_element(p1.begin(), p1.end()) + 1;
  int c2 = *std::max_element(p2.begin(), p2.end()) + 1;
  t.row.assign(c1, 0);
  t.col.assign(c2, 0);
  for (std::size_t i = 0; i < p1.size(); ++i) {
    ++t.row[p1[i]];
    ++t.col[p2[i]];
    ++t.cells[{p1[i], p2[i]}];
  }
  return t;
}

}  // namespace

Matrix cooccurrence_serial(const std::vector<std::vector<int>>& draws) {
  check_nonempty(draws);
  const int n = static_cast<int>(draws[0].size());
  Matrix m = Matrix::Zero(n, n);
  for (const auto& e : draws) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= i; ++j)
        if (e[i] == e[j]) m(i, j) += 1.0;
  }
  m /= static_cast<double>(draws.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j) m(j, i) = m(i, j);
  return m;
}

Matrix cooccurrence(const std::vector<std::vector<int>>& draws) {
  check_nonempty(draws);
  const int n = static_cast<int>(draws[0].size());
  const int s = static_cast<int>(draws.size());
  Matrix m = Matrix::Zero(n, n);
#pragma omp parallel
  {
    Matrix local = Matrix::Zero(n, n);
#pragma omp for schedule(static) nowait
    for (int d = 0; d < s; ++d) {
      const auto& e = draws[d];
      for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j)
          if (e[i] == e[j]) local(i, j) += 1.0;
    }
#pragma omp critical
    m += local;
  }
  m /= static_cast<double>(s);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j) m(j, i) = m(i, j);
  return m;
}

double vi_distance(std::span<const int> p1, std::span<const int> p2) {
  Contingency t = contingency(p1, p2);
  const double n = static_cast<double>(t.n);
  double h1 = 0.0, h2 = 0.0, mi = 0.0;
  for (long long c : t.row)
    if (c > 0) h1 -= (c / n) * std::log(c / n);
  for (long long c : t.col)
    if (c > 0) h2 -= (c / n) * std::log(c / n);
  for (const auto& [rc, c] : t.cells) {
    double pij = c / n;
    mi += pij * std::log(n * c / (static_cast<double>(t.row[rc.first]) * t.col[rc.second]));
  }
  return std::max(0.0, h1 + h2 - 2.0 * mi);
}

double adjusted_rand_index(std::span<const int> p1, std::span<const int> p2) {
  Contingency t = contingency(p1, p2);
  auto choose2 = [](long long m) { return 0.5 * m * (m - 1); };
  double sum_ij = 0.0, sum_i = 0.0, sum_j = 0.0;
  for (const auto& [rc, c] : t.cells) sum_ij += choose2(c);
  for (long long c : t.row) sum_i += choose2(c);
  for (long long c : t.col) sum_j += choose2(c);
  double total = choose2(t.n);
  double expected = sum_i * sum_j / total;
  double maxi = 0.5 * (sum_i + sum_j);
  if (maxi == expected) return 1.0;  // both trivial partitions
  return (sum_ij - expected) / (maxi - expected);
}

std::vector<int> canonical_labels(std::span<const int> p) {
  std::vector<int> out(p.size());
  std::vector<int> remap(p.size(), -1);
  int next = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (remap[p[i]] < 0) remap[p[i]] = next++;
    out[i] = remap[p[i]];
  }
  return out;
}

namespace {

// dedupe canonicalized draws; returns unique partitions and their counts
std::pair<std::vector<std::vector<int>>, std::vector<int>> unique_draws(
    const std::vector<std::vector<int>>& draws) {
  std::map<std::vector<int>, int> counts;
  for (const auto& e : draws) ++counts[canonical_labels(e)];
  std::vector<std::vector<int>> uniq;
  std::vector<int> w;
  uniq.reserve(counts.size());
  for (auto& [part, c] : counts) {
    uniq.push_back(part);
    w.push_back(c);
  }
  return {std::move(uniq), std::move(w)};
}

std::vector<int> point_estimate_impl(const std::vector<std::vector<int>>& draws, bool parallel) {
  check_nonempty(draws);
  auto [uniq, w] = unique_draws(draws);
  const int u = static_cast<int>(uniq.size());
  std::vector<double> score(u, 0.0);
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (int i = 0; i < u; ++i) {
    double s = 0.0;
    for (int j = 0; j < u; ++j) {
      if (i == j) continue;
      s += w[j] * vi_distance(uniq[i], uniq[j]);
    }
    score[i] = s;
  }
  int best = 0;
  for (int i = 1; i < u; ++i)
    if (score[i] < score[best]) best = i;
  return uniq[best];
}

}  // namespace

std::vector<int> point_estimate_partition(const std::vector<std::vector<int>>& draws) {
  return point_estimate_impl(draws, true);
}

std::vector<int> point_estimate_partition_serial(const std::vector<std::vector<int>>& draws) {
  return point_estimate_impl(draws, false);
}

}  // namespace ppmx
