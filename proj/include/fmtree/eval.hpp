#pragma once

#include <array>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

namespace fmtree {

class EvalError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// --- accuracy measures ----------------------------------------------------

/// |actual - predicted| / actual
double mre(double actual, double predicted);

/// MRE per project; actuals and predictions aligned.
std::vector<double> mre_vector(std::span<const double> actual, std::span<const double> predicted);

double mmre(std::span<const double> mres);
/// Median; mean of the two central values for even length.
double mdmre(std::span<const double> mres);
/// Percentage of entries with MRE <= level.
double pred(std::span<const double> mres, double level);

/// Tukey five-number summary with 1.5 IQR whiskers.
struct BoxplotSummary {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  double whisker_low = 0.0;
  double whisker_high = 0.0;
  std::vector<double> outliers;

  double iqr() const { return q3 - q1; }
};

BoxplotSummary boxplot_summary(std::span<const double> values);

struct EvalReport {
  double mmre = 0.0;
  double mdmre = 0.0;
  double pred25 = 0.0;
  double pred50 = 0.0;
  std::vector<double> mres;
  std::vector<double> abs_residuals;
  BoxplotSummary boxplot;
};

EvalReport evaluate(std::span<const double> actual, std::span<const double> predicted);

// --- significance and ranking ---------------------------------------------

struct WilcoxonResult {
  bool same = true;
  double p_value = 1.0;
  double w_plus = 0.0;
  std::size_t nonzero = 0;
  bool exact = true;
};

inline constexpr double kDefaultAlpha = 0.05;
inline constexpr std::size_t kExactWilcoxonLimit = 12;

/// Two-sided paired signed-rank test on a - b. Zero differences are dropped
/// and tied ranks averaged. Exact null distribution by enumeration up to 12
/// non-zero differences, otherwise the normal approximation with continuity
/// and tie corrections. `same` is p > alpha.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b,
                                    double alpha = kDefaultAlpha);

enum class Measure { Mmre, Mdmre, Pred25, Pred50 };

inline constexpr std::array<Measure, 4> kAllMeasures{Measure::Mmre, Measure::Mdmre, Measure::Pred25,
                                                     Measure::Pred50};

std::string measure_name(Measure m);
double measure_value(Measure m, std::span<const double> mres);
bool lower_is_better(Measure m);

struct WtlRow {
  std::string method;
  int win = 0;
  int tie = 0;
  int loss = 0;
  int rank = 0;
};

using MethodMres = std::vector<std::pair<std::string, std::vector<double>>>;

/// Pairwise win-tie-loss over every unordered method pair and measure. A
/// pair whose MRE vectors the Wilcoxon test cannot separate ties on every
/// measure; otherwise the better measure value wins. Ranks follow
/// descending win - loss; equal differences share a rank.
std::vector<WtlRow> win_tie_loss(const MethodMres& mre_by_method, std::span<const Measure> measures,
                                 double alpha = kDefaultAlpha);

// --- rendering ------------------------------------------------------------

nlohmann::json to_json(const BoxplotSummary& b);
nlohmann::json to_json(const EvalReport& r);
nlohmann::json to_json(const std::vector<WtlRow>& table);

/// Columns: Model, MMRE, MdMRE, Pred(0.25), Pred(0.5); MMRE/MdMRE in percent.
std::string render_metrics_table(const std::vector<std::pair<std::string, EvalReport>>& reports);
/// Columns: Method, Win, Tie, Loss, Win-Loss, Rank.
std::string render_wtl_table(const std::vector<WtlRow>& table);

/// Static SVG with one box per model: whiskers, median line and outlier dots.
std::string render_boxplot_svg(const std::vector<std::pair<std::string, BoxplotSummary>>& boxes,
                               const std::string& title = "Absolute residuals");

} // namespace fmtree
