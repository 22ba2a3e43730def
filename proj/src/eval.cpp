#include "fmtree/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

namespace fmtree {

double mre(double actual, double predicted) {
  if (!(actual > 0.0)) throw EvalError("mre: actual value must be positive");
  if (!std::isfinite(predicted)) throw EvalError("mre: predicted value must be finite");
  return std::abs(actual - predicted) / actual;
}

std::vector<double> mre_vector(std::span<const double> actual, std::span<const double> predicted) {
  if (actual.size() != predicted.size()) throw EvalError("actual and predicted lengths differ");
  std::vector<double> out(actual.size());
  for (std::size_t i = 0; i < actual.size(); ++i) out[i] = mre(actual[i], predicted[i]);
  return out;
}

namespace {

void require_non_empty(std::span<const double> v, const char* what) {
  if (v.empty()) throw EvalError(std::string(what) + ": empty input");
}

double median_sorted(std::span<const double> s) {
  const std::size_t n = s.size();
  return n % 2 == 1 ? s[n / 2] : 0.5 * (s[n / 2 - 1] + s[n / 2]);
}

} // namespace

double mmre(std::span<const double> mres) {
  require_non_empty(mres, "mmre");
  return std::accumulate(mres.begin(), mres.end(), 0.0) / static_cast<double>(mres.size());
}

double mdmre(std::span<const double> mres) {
  require_non_empty(mres, "mdmre");
  std::vector<double> s(mres.begin(), mres.end());
  std::sort(s.begin(), s.end());
  return median_sorted(s);
}

double pred(std::span<const double> mres, double level) {
  require_non_empty(mres, "pred");
  const auto hits = std::count_if(mres.begin(), mres.end(), [&](double v) { return v <= level; });
  return 100.0 * static_cast<double>(hits) / static_cast<double>(mres.size());
}

BoxplotSummary boxplot_summary(std::span<const double> values) {
  require_non_empty(values, "boxplot_summary");
  std::vector<double> s(values.begin(), values.end());
  std::sort(s.begin(), s.end());
  const std::size_t n = s.size();

  BoxplotSummary b;
  b.min = s.front();
  b.max = s.back();
  b.median = median_sorted(s);
  // Tukey hinges: medians of the lower and upper halves, each including the
  // overall median when n is odd.
  const std::size_t half = (n + 1) / 2;
  b.q1 = median_sorted(std::span<const double>(s).first(half));
  b.q3 = median_sorted(std::span<const double>(s).last(half));

  const double lo_fence = b.q1 - 1.5 * b.iqr();
  const double hi_fence = b.q3 + 1.5 * b.iqr();
  b.whisker_low = b.q1;
  b.whisker_high = b.q3;
  for (double v : s) {
    if (v < lo_fence || v > hi_fence) {
      b.outliers.push_back(v);
      continue;
    }
    b.whisker_low = std::min(b.whisker_low, v);
    b.whisker_high = std::max(b.whisker_high, v);
  }
  return b;
}

EvalReport evaluate(std::span<const double> actual, std::span<const double> predicted) {
  EvalReport r;
  r.mres = mre_vector(actual, predicted);
  require_non_empty(r.mres, "evaluate");
  r.mmre = mmre(r.mres);
  r.mdmre = mdmre(r.mres);
  r.pred25 = pred(r.mres, 0.25);
  r.pred50 = pred(r.mres, 0.5);
  r.abs_residuals.resize(actual.size());
  for (std::size_t i = 0; i < actual.size(); ++i) r.abs_residuals[i] = std::abs(actual[i] - predicted[i]);
  r.boxplot = boxplot_summary(r.abs_residuals);
  return r;
}

std::string measure_name(Measure m) {
  switch (m) {
  case Measure::Mmre: return "MMRE";
  case Measure::Mdmre: return "MdMRE";
  case Measure::Pred25: return "Pred(0.25)";
  case Measure::Pred50: return "Pred(0.5)";
  }
  return "?";
}

double measure_value(Measure m, std::span<const double> mres) {
  switch (m) {
  case Measure::Mmre: return mmre(mres);
  case Measure::Mdmre: return mdmre(mres);
  case Measure::Pred25: return pred(mres, 0.25);
  case Measure::Pred50: return pred(mres, 0.5);
  }
  throw EvalError("unknown measure");
}

bool lower_is_better(Measure m) { return m == Measure::Mmre || m == Measure::Mdmre; }

std::vector<WtlRow> win_tie_loss(const MethodMres& mre_by_method, std::span<const Measure> measures, double alpha) {
  const std::size_t m = mre_by_method.size();
  if (m < 2) throw EvalError("win_tie_loss needs at least two methods");
  if (measures.empty()) throw EvalError("win_tie_loss needs at least one measure");
  const std::size_t n = mre_by_method.front().second.size();
  for (const auto& [name, v] : mre_by_method) {
    if (v.size() != n) throw EvalError("MRE vector of '" + name + "' is not aligned with the others");
  }

  std::vector<WtlRow> rows(m);
  for (std::size_t i = 0; i < m; ++i) rows[i].method = mre_by_method[i].first;

  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const auto& a = mre_by_method[i].second;
      const auto& b = mre_by_method[j].second;
      const bool same = wilcoxon_signed_rank(a, b, alpha).same;
      for (Measure e : measures) {
        const double ea = measure_value(e, a);
        const double eb = measure_value(e, b);
        const bool a_better = lower_is_better(e) ? ea < eb : ea > eb;
        const bool b_better = lower_is_better(e) ? eb < ea : eb > ea;
        if (same || (!a_better && !b_better)) {
          ++rows[i].tie;
          ++rows[j].tie;
        } else if (a_better) {
          ++rows[i].win;
          ++rows[j].loss;
        } else {
          ++rows[j].win;
          ++rows[i].loss;
        }
      }
    }
  }

  for (auto& r : rows) {
    r.rank = 1 + static_cast<int>(std::count_if(rows.begin(), rows.end(), [&](const WtlRow& o) {
               return o.win - o.loss > r.win - r.loss;
             }));
  }
  return rows;
}

// --- JSON / text ------------------------------------------------------------

nlohmann::json to_json(const BoxplotSummary& b) {
  return {{"min", b.min},
          {"q1", b.q1},
          {"median", b.median},
          {"q3", b.q3},
          {"max", b.max},
          {"whisker_low", b.whisker_low},
          {"whisker_high", b.whisker_high},
          {"outliers", b.outliers}};
}

nlohmann::json to_json(const EvalReport& r) {
  return {{"mmre", r.mmre},   {"mdmre", r.mdmre}, {"pred25", r.pred25},
          {"pred50", r.pred50}, {"mres", r.mres},   {"abs_residuals", r.abs_residuals},
          {"boxplot", to_json(r.boxplot)}};
}

nlohmann::json to_json(const std::vector<WtlRow>& table) {
  auto arr = nlohmann::json::array();
  for (const auto& r : table) {
    arr.push_back({{"method", r.method},
                   {"win", r.win},
                   {"tie", r.tie},
                   {"loss", r.loss},
                   {"win_minus_loss", r.win - r.loss},
                   {"rank", r.rank}});
  }
  return arr;
}

std::string render_metrics_table(const std::vector<std::pair<std::string, EvalReport>>& reports) {
  std::ostringstream os;
  os << std::left << std::setw(12) << "Model" << std::right << std::setw(10) << "MMRE" << std::setw(10) << "MdMRE"
     << std::setw(12) << "Pred(0.25)" << std::setw(11) << "Pred(0.5)" << "\n";
  os << std::fixed << std::setprecision(1);
  for (const auto& [name, r] : reports) {
    std::ostringstream p25, p50;
    p25 << std::fixed << std::setprecision(1) << r.pred25 << "%";
    p50 << std::fixed << std::setprecision(1) << r.pred50 << "%";
    os << std::left << std::setw(12) << name << std::right << std::setw(10) << 100.0 * r.mmre << std::setw(10)
       << 100.0 * r.mdmre << std::setw(12) << p25.str() << std::setw(11) << p50.str() << "\n";
  }
  return os.str();
}

std::string render_wtl_table(const std::vector<WtlRow>& table) {
  std::ostringstream os;
  os << std::left << std::setw(12) << "Method" << std::right << std::setw(6) << "Win" << std::setw(6) << "Tie"
     << std::setw(6) << "Loss" << std::setw(10) << "Win-Loss" << std::setw(7) << "Rank" << "\n";
  for (const auto& r : table) {
    os << std::left << std::setw(12) << r.method << std::right << std::setw(6) << r.win << std::setw(6) << r.tie
       << std::setw(6) << r.loss << std::setw(10) << (r.win - r.loss) << std::setw(7) << r.rank << "\n";
  }
  return os.str();
}

} // namespace fmtree
