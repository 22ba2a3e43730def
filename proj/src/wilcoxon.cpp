#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "fmtree/eval.hpp"

namespace fmtree {

namespace {

// Average ranks of |d| (1-based), doubled so ties stay integral.
std::vector<long> doubled_ranks(const std::vector<double>& abs_d, long& tie_term) {
  const std::size_t n = abs_d.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return abs_d[a] < abs_d[b]; });
  std::vector<long> ranks(n);
  tie_term = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && abs_d[order[j + 1]] == abs_d[order[i]]) ++j;
    // positions i..j share the mean of ranks i+1..j+1; doubled: i+j+2
    const long r2 = static_cast<long>(i + j + 2);
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r2;
    const long t = static_cast<long>(j - i + 1);
    tie_term += t * t * t - t;
    i = j + 1;
  }
  return ranks;
}

} // namespace

WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b, double alpha) {
  if (a.size() != b.size()) throw EvalError("wilcoxon: samples have different lengths");
  if (a.size() < 5) throw EvalError("wilcoxon: need at least 5 paired observations");
  if (!(alpha > 0.0 && alpha < 1.0)) throw EvalError("wilcoxon: alpha must lie in (0,1)");

  std::vector<double> abs_d;
  std::vector<bool> positive;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    if (!std::isfinite(d)) throw EvalError("wilcoxon: non-finite difference");
    if (d == 0.0) continue;
    abs_d.push_back(std::abs(d));
    positive.push_back(d > 0.0);
  }

  WilcoxonResult res;
  res.nonzero = abs_d.size();
  if (abs_d.empty()) return res;

  long tie_term = 0;
  const auto ranks = doubled_ranks(abs_d, tie_term);
  long w2 = 0;  // doubled W+
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    if (positive[i]) w2 += ranks[i];
  }
  res.w_plus = 0.5 * static_cast<double>(w2);
  const double n = static_cast<double>(res.nonzero);

  if (res.nonzero <= kExactWilcoxonLimit) {
    // Null distribution over all 2^n sign assignments, accumulated by sum.
    const long total = std::accumulate(ranks.begin(), ranks.end(), 0L);
    std::vector<double> count(static_cast<std::size_t>(total) + 1, 0.0);
    count[0] = 1.0;
    long reach = 0;
    for (long r : ranks) {
      for (long s = reach; s >= 0; --s) count[static_cast<std::size_t>(s + r)] += count[static_cast<std::size_t>(s)];
      reach += r;
    }
    const double outcomes = std::ldexp(1.0, static_cast<int>(res.nonzero));
    double lower = 0.0, upper = 0.0;
    for (long s = 0; s <= total; ++s) {
      if (s <= w2) lower += count[static_cast<std::size_t>(s)];
      if (s >= w2) upper += count[static_cast<std::size_t>(s)];
    }
    res.p_value = std::min(1.0, 2.0 * std::min(lower, upper) / outcomes);
    res.exact = true;
  } else {
    const double mean = n * (n + 1.0) / 4.0;
    const double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - static_cast<double>(tie_term) / 48.0;
    const double z = std::max(0.0, std::abs(res.w_plus - mean) - 0.5) / std::sqrt(var);
    res.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
    res.exact = false;
  }
  res.same = res.p_value > alpha;
  return res;
}

} // namespace fmtree
