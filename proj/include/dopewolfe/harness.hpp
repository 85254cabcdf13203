#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dopewolfe/combinatorics.hpp"
#include "dopewolfe/errors.hpp"
#include "dopewolfe/features.hpp"
#include "dopewolfe/metrics.hpp"
#include "dopewolfe/plackett_luce.hpp"
#include "dopewolfe/solver.hpp"

namespace dopewolfe {

// ---------------------------------------------------------------------------
// Feature ingestion
// ---------------------------------------------------------------------------

struct FeatureLoadOptions {
  bool normalize = false;  // scale all rows by 1 / max row norm after loading
};

namespace detail {
inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      fields.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return fields;
}

inline double parse_double_field(std::string_view field, const std::string& where) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end)
    throw validation_error(where + ": malformed number '" + std::string(field) + "'");
  if (!std::isfinite(value))
    throw validation_error(where + ": non-finite value '" + std::string(field) + "'");
  return value;
}

inline long parse_int_field(std::string_view field, const std::string& where) {
  long value = 0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end)
    throw validation_error(where + ": malformed integer '" + std::string(field) + "'");
  return value;
}
}  // namespace detail

/// Reads `item_id,f_0..f_{d-1}` or `item_id,list_id,f_0..` CSV (header
/// required; the list column is recognized by its name). Rows are grouped by
/// list_id ascending, preserving file order within a list.
inline ItemFeatureMatrix load_features(const std::string& path, FeatureLoadOptions options = {}) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open feature file: " + path);

  std::string line;
  long line_no = 0;
  if (!std::getline(in, line)) throw validation_error(path + ": empty feature file");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = detail::split_csv_line(line);
  if (header.empty() || header[0] != "item_id")
    throw validation_error(path + ":1: header must start with 'item_id'");
  const bool has_list = header.size() > 1 && header[1] == "list_id";
  const int d = static_cast<int>(header.size()) - (has_list ? 2 : 1);
  if (d < 1) throw validation_error(path + ":1: no feature columns in header");

  struct Row {
    std::string item_id;
    long list_id;
    long file_order;
    Eigen::VectorXd features;
  };
  std::vector<Row> rows;
  std::map<std::string, long> first_seen;  // item_id -> line number

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(line_no);
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != header.size())
      throw validation_error(where + ": expected " + std::to_string(header.size()) +
                             " fields, got " + std::to_string(fields.size()));
    Row row;
    row.item_id = std::string(fields[0]);
    if (const auto [it, inserted] = first_seen.emplace(row.item_id, line_no); !inserted)
      throw validation_error(where + ": duplicate item_id '" + row.item_id + "' (first at line " +
                             std::to_string(it->second) + ")");
    row.list_id = has_list ? detail::parse_int_field(fields[1], where) : 0;
    row.file_order = line_no;
    row.features.resize(d);
    for (int f = 0; f < d; ++f)
      row.features[f] = detail::parse_double_field(fields[(has_list ? 2 : 1) + f], where);
    rows.push_back(std::move(row));
  }
  if (rows.size() < 2) throw validation_error(path + ": at least 2 items required");

  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.list_id < b.list_id; });

  Eigen::MatrixXd matrix(rows.size(), d);
  std::vector<std::string> ids;
  std::vector<int> list_sizes;
  ids.reserve(rows.size());
  long current_list = rows.front().list_id;
  int count = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].list_id != current_list) {
      list_sizes.push_back(count);
      current_list = rows[i].list_id;
      count = 0;
    }
    matrix.row(static_cast<long>(i)) = rows[i].features;
    ids.push_back(rows[i].item_id);
    ++count;
  }
  list_sizes.push_back(count);

  ItemFeatureMatrix features(std::move(matrix), std::move(list_sizes), std::move(ids));
  if (options.normalize) features.normalize_to_unit_ball();
  return features;
}

/// One float per line.
inline Eigen::VectorXd load_vector(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open vector file: " + path);
  std::vector<double> values;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    values.push_back(
        detail::parse_double_field(line, path + ":" + std::to_string(line_no)));
  }
  if (values.empty()) throw validation_error(path + ": empty vector file");
  return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<long>(values.size()));
}

// ---------------------------------------------------------------------------
// Experiment configuration
// ---------------------------------------------------------------------------

enum class Policy { dopewolfe, uniform };
enum class SelectionMode { sample_from_design, top_mass };

inline const char* to_string(Policy p) { return p == Policy::dopewolfe ? "dopewolfe" : "uniform"; }
inline const char* to_string(SelectionMode s) {
  return s == SelectionMode::sample_from_design ? "sample-from-design" : "top-mass";
}

inline Policy parse_policy(std::string_view text) {
  if (text == "dopewolfe") return Policy::dopewolfe;
  if (text == "uniform") return Policy::uniform;
  throw validation_error("unknown policy '" + std::string(text) + "'");
}
inline SelectionMode parse_selection(std::string_view text) {
  if (text == "sample-from-design") return SelectionMode::sample_from_design;
  if (text == "top-mass") return SelectionMode::top_mass;
  throw validation_error("unknown selection mode '" + std::string(text) + "'");
}
inline LikelihoodMode parse_likelihood(std::string_view text) {
  if (text == "kwise") return LikelihoodMode::kwise;
  if (text == "pairwise_broken") return LikelihoodMode::pairwise_broken;
  throw validation_error("unknown likelihood mode '" + std::string(text) + "'");
}
inline GainKind parse_gain(std::string_view text) {
  if (text == "linear") return GainKind::linear;
  if (text == "exponential") return GainKind::exponential;
  throw validation_error("unknown gain '" + std::string(text) + "'");
}
inline LmoMode parse_lmo_mode(std::string_view text) {
  if (text == "randomized") return LmoMode::randomized;
  if (text == "full") return LmoMode::full;
  throw validation_error("unknown LMO mode '" + std::string(text) + "'");
}

struct MetricConfig {
  int ndcg_k = 0;  // 0 = full list
  GainSpec gain{GainKind::exponential, 0.1};
};

struct ExperimentConfig {
  std::string features_path;
  bool normalize = false;
  std::vector<int> subset_sizes{2};   // K values
  std::vector<int> sample_sizes;      // T values
  int trials = 1;
  std::vector<Policy> policies{Policy::dopewolfe, Policy::uniform};
  SelectionMode selection = SelectionMode::sample_from_design;
  SolverConfig solver;
  MleConfig mle;
  MetricConfig metric;
  std::uint64_t master_seed = 0;
  std::string theta_star_path;  // empty: random unit-norm Gaussian per trial
  bool sequential = false;

  void validate(const ItemFeatureMatrix& features) const {
    if (trials < 1) throw validation_error("experiment: trials must be >= 1");
    if (subset_sizes.empty()) throw validation_error("experiment: no K values");
    if (sample_sizes.empty()) throw validation_error("experiment: no sample sizes T");
    if (policies.empty()) throw validation_error("experiment: no policies");
    for (int k : subset_sizes) {
      if (k < 2) throw validation_error("experiment: K must be >= 2");
      if (k > features.min_list_size())
        throw validation_error("experiment: K = " + std::to_string(k) +
                               " exceeds the smallest list size " +
                               std::to_string(features.min_list_size()));
    }
    for (int t : sample_sizes)
      if (t < 1) throw validation_error("experiment: every T must be >= 1");
    if (metric.ndcg_k < 0) throw validation_error("experiment: ndcg_k must be >= 0");
    solver.validate();
    mle.validate();
  }
};

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

struct TrialRow {
  std::string policy;
  int K = 0;
  int T = 0;
  int trial = 0;
  double ranking_loss = 0.0;
  double ndcg = 0.0;
  double solve_seconds = 0.0;
  double fit_seconds = 0.0;
};

struct AggregateRow {
  std::string policy;
  int K = 0;
  int T = 0;
  double mean_loss = 0.0;
  double se_loss = 0.0;
  double mean_ndcg = 0.0;
  double se_ndcg = 0.0;
};

struct ResultsTable {
  std::vector<TrialRow> rows;

  /// Mean and standard error (sample stdev / sqrt(n); 0 for n = 1) per
  /// (policy, K, T) group, recomputed from the trial rows.
  std::vector<AggregateRow> aggregates() const {
    std::map<std::tuple<std::string, int, int>, std::vector<const TrialRow*>> groups;
    for (const auto& row : rows) groups[{row.policy, row.K, row.T}].push_back(&row);
    std::vector<AggregateRow> result;
    result.reserve(groups.size());
    for (const auto& [key, members] : groups) {
      AggregateRow agg;
      agg.policy = std::get<0>(key);
      agg.K = std::get<1>(key);
      agg.T = std::get<2>(key);
      const double n = static_cast<double>(members.size());
      for (const TrialRow* row : members) {
        agg.mean_loss += row->ranking_loss / n;
        agg.mean_ndcg += row->ndcg / n;
      }
      if (members.size() > 1) {
        double var_loss = 0.0, var_ndcg = 0.0;
        for (const TrialRow* row : members) {
          var_loss += (row->ranking_loss - agg.mean_loss) * (row->ranking_loss - agg.mean_loss);
          var_ndcg += (row->ndcg - agg.mean_ndcg) * (row->ndcg - agg.mean_ndcg);
        }
        agg.se_loss = std::sqrt(var_loss / (n - 1.0)) / std::sqrt(n);
        agg.se_ndcg = std::sqrt(var_ndcg / (n - 1.0)) / std::sqrt(n);
      }
      result.push_back(std::move(agg));
    }
    return result;
  }
};

// ---------------------------------------------------------------------------
// Experiment loop
// ---------------------------------------------------------------------------

namespace detail {

constexpr std::uint64_t kTagDesign = 1;
constexpr std::uint64_t kTagThetaStar = 2;
constexpr std::uint64_t kTagFeedback = 3;

struct PreparedDesign {
  std::vector<uint128> support;       // ascending index
  std::vector<double> cumulative;     // running weight sums over support
  std::vector<Subset> subsets;        // unranked support, same order
  std::vector<std::size_t> by_mass;   // support positions, weight desc then index asc
  double total_weight = 0.0;
  double solve_seconds = 0.0;
};

inline PreparedDesign prepare_design(const SolveResult& solved, double seconds) {
  PreparedDesign prepared;
  prepared.solve_seconds = seconds;
  for (const auto& [index, weight] : solved.design.weights) {
    prepared.support.push_back(index);
    prepared.total_weight += weight;
    prepared.cumulative.push_back(prepared.total_weight);
    prepared.subsets.push_back(solved.design.collection.unrank(index));
  }
  prepared.by_mass.resize(prepared.support.size());
  std::iota(prepared.by_mass.begin(), prepared.by_mass.end(), std::size_t{0});
  const auto& weights = solved.design.weights;
  std::sort(prepared.by_mass.begin(), prepared.by_mass.end(),
            [&](std::size_t a, std::size_t b) {
              const double wa = weights.at(prepared.support[a]);
              const double wb = weights.at(prepared.support[b]);
              if (wa != wb) return wa > wb;
              return prepared.support[a] < prepared.support[b];
            });
  return prepared;
}

inline Eigen::VectorXd draw_unit_theta(int d, Rng& rng) {
  Eigen::VectorXd theta(d);
  for (;;) {
    for (int i = 0; i < d; ++i) theta[i] = gaussian(rng);
    const double norm = theta.norm();
    if (norm > 1e-12) return theta / norm;
  }
}

inline std::string annotate_cell(const std::string& what, int trial, int t, Policy policy) {
  return what + " [trial " + std::to_string(trial) + ", T " + std::to_string(t) + ", policy " +
         to_string(policy) + "]";
}

}  // namespace detail

/// Ranking quality of theta_hat against the order induced by theta_star.
/// The loss pools pairs across lists (fraction of incorrectly ordered
/// within-list pairs, ties in true score excluded); NDCG is averaged per
/// list. Cutoff 0 means the full list.
inline EvaluationReport evaluate_ranking(const Eigen::VectorXd& theta_hat,
                                         const Eigen::VectorXd& theta_star,
                                         const ItemFeatureMatrix& features,
                                         const MetricConfig& metric) {
  const auto permutations = induced_permutation(theta_hat, features);
  const Eigen::VectorXd true_scores = features.rows() * theta_star;

  EvaluationReport report;
  report.gain = metric.gain;
  std::uint64_t misordered = 0, comparable = 0;
  double ndcg_sum = 0.0;
  for (int m = 0; m < features.list_count(); ++m) {
    const int n = features.list_size(m);
    std::vector<double> scores(n);
    for (int i = 0; i < n; ++i) scores[i] = true_scores[features.list_offset(m) + i];

    std::uint64_t list_bad = 0, list_pairs = 0;
    const auto& perm = permutations[m];
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) {
        const double sa = scores[perm[a]], sb = scores[perm[b]];
        if (sa == sb) continue;
        ++list_pairs;
        if (sa < sb) ++list_bad;
      }
    misordered += list_bad;
    comparable += list_pairs;
    report.per_list_loss.push_back(
        list_pairs == 0 ? 0.0 : static_cast<double>(list_bad) / static_cast<double>(list_pairs));

    const int cutoff = metric.ndcg_k == 0 ? n : metric.ndcg_k;
    const double ndcg = ndcg_at_k(perm, scores, cutoff, metric.gain);
    report.per_list_ndcg.push_back(ndcg);
    ndcg_sum += ndcg;
    report.ndcg_cutoff = cutoff;
  }
  report.ranking_loss =
      comparable == 0 ? 0.0 : static_cast<double>(misordered) / static_cast<double>(comparable);
  report.ndcg = ndcg_sum / features.list_count();
  return report;
}

/// Full synthetic-feedback loop: per (policy, K) solve the design once; per
/// trial draw theta*, and for each T elicit T subsets, simulate rankings,
/// fit the model, and score it. Every (trial, T, policy, K) cell consumes
/// its own derived RNG stream, so results are independent of threading and
/// of which other cells run.
inline ResultsTable run_experiment(const ExperimentConfig& config,
                                   const ItemFeatureMatrix& features) {
  config.validate(features);
  const int d = features.dim();

  Eigen::VectorXd theta_star_file;
  if (!config.theta_star_path.empty()) {
    theta_star_file = load_vector(config.theta_star_path);
    if (theta_star_file.size() != d)
      throw validation_error("theta* file has dimension " +
                             std::to_string(theta_star_file.size()) + ", expected " +
                             std::to_string(d));
  }

  // Designs are independent of trials, so solve once per (policy, K).
  std::map<std::pair<int, int>, detail::PreparedDesign> designs;
  std::map<int, SubsetCollection> collections;
  for (int k : config.subset_sizes) {
    collections.emplace(k, SubsetCollection(features.list_sizes(), k));
    for (Policy policy : config.policies) {
      if (policy != Policy::dopewolfe) continue;
      SolverConfig solver = config.solver;
      solver.seed = derive_seed(config.master_seed,
                                {detail::kTagDesign, static_cast<std::uint64_t>(policy),
                                 static_cast<std::uint64_t>(k)});
      const auto t0 = std::chrono::steady_clock::now();
      SolveResult solved = solve(features, collections.at(k), std::nullopt, solver);
      const double seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      designs.emplace(std::make_pair(static_cast<int>(policy), k),
                      detail::prepare_design(solved, seconds));
    }
  }

  auto run_trial = [&](int trial) {
    std::vector<TrialRow> rows;
    Eigen::VectorXd theta_star =
        config.theta_star_path.empty()
            ? [&] {
                Rng rng = make_rng(config.master_seed,
                                   {detail::kTagThetaStar, static_cast<std::uint64_t>(trial)});
                return detail::draw_unit_theta(d, rng);
              }()
            : theta_star_file;

    for (Policy policy : config.policies) {
      for (int k : config.subset_sizes) {
        const SubsetCollection& collection = collections.at(k);
        const detail::PreparedDesign* design = nullptr;
        if (policy == Policy::dopewolfe)
          design = &designs.at(std::make_pair(static_cast<int>(policy), k));

        for (int t_size : config.sample_sizes) {
          try {
            Rng rng = make_rng(config.master_seed,
                               {detail::kTagFeedback, static_cast<std::uint64_t>(trial),
                                static_cast<std::uint64_t>(t_size),
                                static_cast<std::uint64_t>(policy),
                                static_cast<std::uint64_t>(k)});

            std::vector<RankingObservation> observations;
            observations.reserve(t_size);
            for (int i = 0; i < t_size; ++i) {
              Subset subset;
              if (policy == Policy::uniform) {
                subset = collection.unrank(uniform_below_u128(rng, collection.cardinality()));
              } else if (config.selection == SelectionMode::sample_from_design) {
                const double u = uniform_real01(rng) * design->total_weight;
                const auto it =
                    std::upper_bound(design->cumulative.begin(), design->cumulative.end(), u);
                const std::size_t pos = std::min<std::size_t>(
                    it - design->cumulative.begin(), design->support.size() - 1);
                subset = design->subsets[pos];
              } else {  // top-mass, cycling when T exceeds the support size
                subset = design->subsets[design->by_mass[i % design->by_mass.size()]];
              }
              observations.push_back(sample_ranking(theta_star, features, subset, rng));
            }

            const auto fit_start = std::chrono::steady_clock::now();
            const FitResult fit = fit_mle(observations, features, config.mle);
            const double fit_seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - fit_start)
                    .count();

            const EvaluationReport report =
                evaluate_ranking(fit.theta, theta_star, features, config.metric);
            rows.push_back({to_string(policy), k, t_size, trial, report.ranking_loss,
                            report.ndcg, design ? design->solve_seconds : 0.0, fit_seconds});
          } catch (const validation_error& e) {
            throw validation_error(detail::annotate_cell(e.what(), trial, t_size, policy));
          } catch (const numerical_error& e) {
            throw numerical_error(detail::annotate_cell(e.what(), trial, t_size, policy));
          }
        }
      }
    }
    return rows;
  };

  std::vector<std::vector<TrialRow>> slots(config.trials);
  unsigned workers = config.sequential ? 1 : std::thread::hardware_concurrency();
  workers = std::min<unsigned>(std::max<unsigned>(workers, 1),
                               static_cast<unsigned>(config.trials));
  if (workers <= 1) {
    for (int trial = 0; trial < config.trials; ++trial) slots[trial] = run_trial(trial);
  } else {
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (;;) {
          const int trial = next.fetch_add(1);
          if (trial >= config.trials) return;
          try {
            slots[trial] = run_trial(trial);
          } catch (...) {
            const std::lock_guard<std::mutex> lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
            return;
          }
        }
      });
    for (auto& thread : pool) thread.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  ResultsTable table;
  for (auto& slot : slots)
    table.rows.insert(table.rows.end(), slot.begin(), slot.end());
  std::sort(table.rows.begin(), table.rows.end(), [](const TrialRow& a, const TrialRow& b) {
    return std::tie(a.policy, a.K, a.T, a.trial) < std::tie(b.policy, b.K, b.T, b.trial);
  });
  return table;
}

inline ResultsTable run_experiment(const ExperimentConfig& config) {
  return run_experiment(config,
                        load_features(config.features_path, FeatureLoadOptions{config.normalize}));
}

// ---------------------------------------------------------------------------
// Emission
// ---------------------------------------------------------------------------

enum class ResultsFormat { csv, json };

inline ResultsFormat parse_results_format(std::string_view text) {
  if (text == "csv") return ResultsFormat::csv;
  if (text == "json") return ResultsFormat::json;
  throw validation_error("unknown results format '" + std::string(text) + "'");
}

namespace detail {
inline std::string format_double(double value) {
  std::ostringstream out;
  out << std::setprecision(17) << value;
  return out.str();
}

inline std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write to: " + path);
  return out;
}
}  // namespace detail

/// CSV: trial rows at `path`, aggregates at `path + ".agg"`. JSON: both in
/// one document at `path`.
inline void emit_results(const ResultsTable& table, ResultsFormat format,
                         const std::string& path) {
  const auto aggregates = table.aggregates();
  if (format == ResultsFormat::csv) {
    auto out = detail::open_for_write(path);
    out << "policy,K,T,trial,ranking_loss,ndcg,solve_seconds,fit_seconds\n";
    for (const auto& row : table.rows)
      out << row.policy << ',' << row.K << ',' << row.T << ',' << row.trial << ','
          << detail::format_double(row.ranking_loss) << ',' << detail::format_double(row.ndcg)
          << ',' << detail::format_double(row.solve_seconds) << ','
          << detail::format_double(row.fit_seconds) << '\n';
    if (!out) throw io_error("write failure: " + path);

    auto agg_out = detail::open_for_write(path + ".agg");
    agg_out << "policy,K,T,mean_loss,se_loss,mean_ndcg,se_ndcg\n";
    for (const auto& agg : aggregates)
      agg_out << agg.policy << ',' << agg.K << ',' << agg.T << ','
              << detail::format_double(agg.mean_loss) << ','
              << detail::format_double(agg.se_loss) << ','
              << detail::format_double(agg.mean_ndcg) << ','
              << detail::format_double(agg.se_ndcg) << '\n';
    if (!agg_out) throw io_error("write failure: " + path + ".agg");
    return;
  }

  nlohmann::json doc;
  doc["rows"] = nlohmann::json::array();
  for (const auto& row : table.rows)
    doc["rows"].push_back({{"policy", row.policy},
                           {"K", row.K},
                           {"T", row.T},
                           {"trial", row.trial},
                           {"ranking_loss", row.ranking_loss},
                           {"ndcg", row.ndcg},
                           {"solve_seconds", row.solve_seconds},
                           {"fit_seconds", row.fit_seconds}});
  doc["aggregates"] = nlohmann::json::array();
  for (const auto& agg : aggregates)
    doc["aggregates"].push_back({{"policy", agg.policy},
                                 {"K", agg.K},
                                 {"T", agg.T},
                                 {"mean_loss", agg.mean_loss},
                                 {"se_loss", agg.se_loss},
                                 {"mean_ndcg", agg.mean_ndcg},
                                 {"se_ndcg", agg.se_ndcg}});
  auto out = detail::open_for_write(path);
  out << doc.dump(2) << '\n';
  if (!out) throw io_error("write failure: " + path);
}

/// Design CSV: `subset_index,item_ids,weight`, heaviest first (ties toward
/// the lower index), item ids semicolon-separated.
inline void write_design_csv(const DesignDistribution& design, const ItemFeatureMatrix& features,
                             const std::string& path) {
  std::vector<std::pair<uint128, double>> entries(design.weights.begin(), design.weights.end());
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  auto out = detail::open_for_write(path);
  out << "subset_index,item_ids,weight\n";
  for (const auto& [index, weight] : entries) {
    const Subset subset = design.collection.unrank(index);
    out << to_string(index) << ',';
    for (std::size_t i = 0; i < subset.items.size(); ++i) {
      if (i > 0) out << ';';
      out << features.item_id(features.global_index(subset.list_id, subset.items[i]));
    }
    out << ',' << detail::format_double(weight) << '\n';
  }
  if (!out) throw io_error("write failure: " + path);
}

}  // namespace dopewolfe
