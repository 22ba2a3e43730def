#include "fmtree/data.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <unordered_set>

#include "fmtree/random.hpp"
#include "fmtree/special_functions.hpp"

namespace fmtree {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return out;
}

std::optional<double> parse_number(std::string_view text) {
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::string format_number(double v) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

std::string row_error(std::string_view what, std::size_t row) {
  std::ostringstream os;
  os << what << " at row " << row;
  return os.str();
}

void check_project(const Project& p, std::size_t row) {
  if (p.id.empty()) throw DataError(row_error("empty id", row));
  if (!(p.effort_ph > 0.0)) throw DataError(row_error("non-positive effort", row));
  if (!(p.size_ucp > 0.0)) throw DataError(row_error("non-positive size", row));
}

} // namespace

std::string_view to_string(SourceLabel label) {
  switch (label) {
  case SourceLabel::Ind1: return "Ind1";
  case SourceLabel::Ind2: return "Ind2";
  case SourceLabel::Edu: return "Edu";
  case SourceLabel::Mixed: return "mixed";
  case SourceLabel::Synthetic: return "synthetic";
  }
  return "mixed";
}

SourceLabel source_label_from_string(std::string_view name) {
  const auto n = lower(name);
  if (n == "ind1") return SourceLabel::Ind1;
  if (n == "ind2") return SourceLabel::Ind2;
  if (n == "edu") return SourceLabel::Edu;
  if (n == "mixed") return SourceLabel::Mixed;
  if (n == "synthetic") return SourceLabel::Synthetic;
  throw DataError("unknown source label '" + std::string(name) + "'");
}

Dataset::Dataset(std::vector<Project> projects, SourceLabel label)
    : projects_(std::move(projects)), label_(label) {
  if (projects_.empty()) throw DataError("dataset is empty");
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < projects_.size(); ++i) {
    check_project(projects_[i], i + 1);
    if (!seen.insert(projects_[i].id).second) {
      throw DataError(row_error("duplicate id '" + projects_[i].id + "'", i + 1));
    }
  }
}

void SourceProfile::validate() const {
  if (!(sd_effort > 0.0)) throw DataError("profile sd_effort must be positive");
  if (!(min_effort > 0.0)) throw DataError("profile min_effort must be positive");
  if (!(min_effort <= mean_effort && mean_effort <= max_effort)) {
    throw DataError("profile must satisfy min <= mean <= max");
  }
  if (!std::isfinite(skewness)) throw DataError("profile skewness must be finite");
}

SourceProfile profile_by_name(std::string_view name) {
  const auto n = lower(name);
  if (n == "ind1") return kInd1Profile;
  if (n == "ind2") return kInd2Profile;
  if (n == "edu") return kEduProfile;
  throw DataError("unknown profile '" + std::string(name) + "' (expected ind1, ind2 or edu)");
}

Dataset parse_dataset(std::string_view csv_text, SourceLabel label) {
  static constexpr std::array<std::string_view, 5> kColumns{"id", "size_ucp", "productivity",
                                                            "complexity", "effort_ph"};
  std::vector<Project> projects;
  std::unordered_set<std::string> seen;
  std::array<std::size_t, 5> col{};
  std::size_t field_count = 0;
  bool have_header = false;

  std::size_t row = 0;
  std::size_t pos = 0;
  while (pos <= csv_text.size()) {
    auto nl = csv_text.find('\n', pos);
    if (nl == std::string_view::npos) nl = csv_text.size();
    const auto line = trim(csv_text.substr(pos, nl - pos));
    pos = nl + 1;
    ++row;
    if (line.empty()) continue;

    const auto fields = split_fields(line);
    if (!have_header) {
      field_count = fields.size();
      for (std::size_t c = 0; c < kColumns.size(); ++c) {
        const auto it = std::find_if(fields.begin(), fields.end(),
                                     [&](std::string_view f) { return lower(f) == kColumns[c]; });
        if (it == fields.end()) {
          throw DataError("missing column '" + std::string(kColumns[c]) + "' in header");
        }
        col[c] = static_cast<std::size_t>(it - fields.begin());
      }
      have_header = true;
      continue;
    }

    if (fields.size() != field_count) {
      throw DataError(row_error("expected " + std::to_string(field_count) + " fields, found " +
                                    std::to_string(fields.size()),
                                row));
    }
    Project p;
    p.id = std::string(fields[col[0]]);
    std::array<double*, 4> targets{&p.size_ucp, &p.productivity, &p.complexity, &p.effort_ph};
    for (std::size_t c = 1; c < kColumns.size(); ++c) {
      const auto v = parse_number(fields[col[c]]);
      if (!v) {
        throw DataError(row_error("non-numeric " + std::string(kColumns[c]) + " '" +
                                      std::string(fields[col[c]]) + "'",
                                  row));
      }
      *targets[c - 1] = *v;
    }
    check_project(p, row);
    if (!seen.insert(p.id).second) throw DataError(row_error("duplicate id '" + p.id + "'", row));
    projects.push_back(std::move(p));
  }
  if (!have_header) throw DataError("missing header row");
  if (projects.empty()) throw DataError("dataset has no data rows");
  return Dataset(std::move(projects), label);
}

std::string render_csv(const Dataset& dataset) {
  std::string out = "id,size_ucp,productivity,complexity,effort_ph\n";
  for (const auto& p : dataset) {
    out += p.id;
    for (double v : {p.size_ucp, p.productivity, p.complexity, p.effort_ph}) {
      out += ',';
      out += format_number(v);
    }
    out += '\n';
  }
  return out;
}

nlohmann::json to_json(const Dataset& dataset) {
  auto arr = nlohmann::json::array();
  for (const auto& p : dataset) {
    arr.push_back({{"id", p.id},
                   {"size_ucp", p.size_ucp},
                   {"productivity", p.productivity},
                   {"complexity", p.complexity},
                   {"effort_ph", p.effort_ph}});
  }
  return arr;
}

Dataset dataset_from_json(const nlohmann::json& j, SourceLabel label) {
  if (!j.is_array()) throw DataError("dataset JSON must be an array of project records");
  std::vector<Project> projects;
  projects.reserve(j.size());
  std::size_t row = 0;
  for (const auto& rec : j) {
    ++row;
    try {
      Project p;
      p.id = rec.at("id").get<std::string>();
      p.size_ucp = rec.at("size_ucp").get<double>();
      p.productivity = rec.at("productivity").get<double>();
      p.complexity = rec.at("complexity").get<double>();
      p.effort_ph = rec.at("effort_ph").get<double>();
      projects.push_back(std::move(p));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(row_error(std::string("malformed record (") + e.what() + ")", row));
    }
  }
  return Dataset(std::move(projects), label);
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  const auto text = ss.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '[') {
    return dataset_from_json(nlohmann::json::parse(text));
  }
  return parse_dataset(text);
}

HoldoutSplit split_holdout(const Dataset& dataset, std::size_t train_count, std::uint64_t seed) {
  if (train_count == 0 || train_count >= dataset.size()) {
    throw DataError("train_count must lie in [1, " + std::to_string(dataset.size() - 1) +
                    "], got " + std::to_string(train_count));
  }
  Rng rng(seed);
  const auto order = random_permutation(dataset.size(), rng);
  std::vector<bool> in_train(dataset.size(), false);
  for (std::size_t i = 0; i < train_count; ++i) in_train[order[i]] = true;

  std::vector<Project> train, test;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    (in_train[i] ? train : test).push_back(dataset[i]);
  }
  return {Dataset(std::move(train), dataset.source_label()),
          Dataset(std::move(test), dataset.source_label())};
}

Eigen::RowVector3d feature_row(const Project& p) {
  return {p.size_ucp, p.productivity, p.complexity};
}

Eigen::MatrixXd feature_matrix(const Dataset& dataset) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(dataset.size()), 3);
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) = feature_row(dataset[i]);
  }
  return x;
}

Eigen::VectorXd effort_vector(const Dataset& dataset) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(dataset.size()));
  for (std::size_t i = 0; i < dataset.size(); ++i) y(static_cast<Eigen::Index>(i)) = dataset[i].effort_ph;
  return y;
}

SampleMoments sample_moments(const Eigen::Ref<const Eigen::VectorXd>& x) {
  SampleMoments m;
  const double n = static_cast<double>(x.size());
  if (x.size() == 0) return m;
  m.mean = x.mean();
  m.min = x.minCoeff();
  m.max = x.maxCoeff();
  if (x.size() < 2) return m;
  const Eigen::ArrayXd c = x.array() - m.mean;
  const double m2 = c.square().mean();
  const double m3 = c.cube().mean();
  m.sd = std::sqrt(c.square().sum() / (n - 1.0));
  if (x.size() > 2 && m2 > 0.0) {
    const double g1 = m3 / std::pow(m2, 1.5);
    m.skewness = std::sqrt(n * (n - 1.0)) / (n - 2.0) * g1;
  }
  return m;
}

// --- synthetic generation ---------------------------------------------------

namespace {

// Standardized (mean 0, variance 1) shape with the requested skewness.
// Shifted log-normal for clearly positive skew; otherwise a first-order
// Cornish-Fisher transform of the normal.
class SkewedShape {
public:
  explicit SkewedShape(double skew) {
    if (skew >= kLogNormalMinSkew) {
      lognormal_ = true;
      // skew = (w + 2) sqrt(w - 1), w = exp(sigma^2); increasing in w.
      double lo = 1.0, hi = 2.0;
      while ((hi + 2.0) * std::sqrt(hi - 1.0) < skew) hi *= 2.0;
      for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        ((mid + 2.0) * std::sqrt(mid - 1.0) < skew ? lo : hi) = mid;
      }
      const double w = 0.5 * (lo + hi);
      sigma_ = std::sqrt(std::log(w));
      offset_ = std::sqrt(w);
      scale_ = std::sqrt(w * (w - 1.0));
    } else {
      a_ = skew / 6.0;
      scale_ = std::sqrt(1.0 + 2.0 * a_ * a_);
    }
  }

  double operator()(double z) const {
    if (lognormal_) return (std::exp(sigma_ * z) - offset_) / scale_;
    return (z + a_ * (z * z - 1.0)) / scale_;
  }

private:
  static constexpr double kLogNormalMinSkew = 0.05;
  bool lognormal_ = false;
  double sigma_ = 0.0, offset_ = 0.0, scale_ = 1.0, a_ = 0.0;
};

struct LocationScale {
  double location;
  double scale;
};

// Finds location/scale such that clamp(location + scale * shape(Z), min, max)
// has the profile's mean and sd, using a fixed normal quadrature grid.
LocationScale calibrate_clamped(const SourceProfile& profile, const SkewedShape& shape) {
  constexpr int kGrid = 4001;
  constexpr double kSpan = 8.0;
  Eigen::ArrayXd z = Eigen::ArrayXd::LinSpaced(kGrid, -kSpan, kSpan);
  Eigen::ArrayXd w = (-0.5 * z.square()).exp();
  w /= w.sum();
  const Eigen::ArrayXd h = z.unaryExpr([&](double v) { return shape(v); });

  LocationScale ls{profile.mean_effort, profile.sd_effort};
  for (int it = 0; it < 2000; ++it) {
    const Eigen::ArrayXd x = (ls.location + ls.scale * h).max(profile.min_effort).min(profile.max_effort);
    const double mean = (w * x).sum();
    const double sd = std::sqrt((w * (x - mean).square()).sum());
    if (!(sd > 0.0)) {
      ls.scale *= 2.0;
      continue;
    }
    const double mean_gap = profile.mean_effort - mean;
    const double sd_ratio = profile.sd_effort / sd;
    ls.location += mean_gap;
    ls.scale *= sd_ratio;
    if (std::abs(mean_gap) < 1e-10 * profile.mean_effort && std::abs(sd_ratio - 1.0) < 1e-12) break;
  }
  return ls;
}

double clamp(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

std::string synthetic_id(std::string_view prefix, std::size_t i) {
  std::ostringstream os;
  os << prefix << '-';
  os.width(4);
  os.fill('0');
  os << (i + 1);
  return os.str();
}

} // namespace

Dataset generate_synthetic(const SourceProfile& profile, std::size_t n, std::uint64_t seed) {
  profile.validate();
  if (n < 2) throw DataError("generate_synthetic needs n >= 2");

  const SkewedShape shape(profile.skewness);
  const auto ls = calibrate_clamped(profile, shape);
  Rng rng(seed);

  // Stratified inverse-CDF sampling: one normal quantile per probability
  // stratum keeps the sample moments close to the calibrated ones.
  std::vector<double> efforts(n);
  for (std::size_t i = 0; i < n; ++i) {
    double u = (static_cast<double>(i) + rng.uniform()) / static_cast<double>(n);
    u = clamp(u, 1e-12, 1.0 - 1e-12);
    efforts[i] = clamp(ls.location + ls.scale * shape(normal_quantile(u)), profile.min_effort,
                       profile.max_effort);
  }
  rng.shuffle(efforts);

  std::vector<Project> projects;
  projects.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Project p;
    p.id = synthetic_id("syn", i);
    p.effort_ph = efforts[i];
    p.productivity = 10.0 + 25.0 * rng.uniform();
    p.complexity = static_cast<double>(1 + rng.uniform_index(5));
    const double ratio = clamp(p.productivity * std::exp(0.1 * rng.normal()), 10.0, 35.0);
    p.size_ucp = p.effort_ph / ratio;
    projects.push_back(std::move(p));
  }
  return Dataset(std::move(projects), SourceLabel::Synthetic);
}

Dataset generate_piecewise_benchmark(std::size_t n, std::uint64_t seed) {
  if (n < 2) throw DataError("generate_piecewise_benchmark needs n >= 2");
  constexpr double kKnee = 250.0;
  Rng rng(seed);
  std::vector<Project> projects;
  projects.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Project p;
    p.id = synthetic_id("pw", i);
    p.size_ucp = 40.0 + 560.0 * rng.uniform();
    p.productivity = 10.0 + 25.0 * rng.uniform();
    p.complexity = static_cast<double>(1 + rng.uniform_index(5));
    double effort = 12.0 * std::min(p.size_ucp, kKnee) + 30.0 * p.productivity + 80.0 * p.complexity;
    if (p.size_ucp > kKnee) effort += 4000.0 + 42.0 * (p.size_ucp - kKnee);
    p.effort_ph = std::max(1.0, effort * (1.0 + 0.05 * rng.normal()));
    projects.push_back(std::move(p));
  }
  return Dataset(std::move(projects), SourceLabel::Synthetic);
}

} // namespace fmtree
