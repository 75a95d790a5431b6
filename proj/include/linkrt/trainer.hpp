#pragma once

// Sampling-based training and evaluation loops. Training draws random-size
// source/target samples, times the join per pair at a random threshold, and
// fits all model families on the same samples. Evaluation times the join on
// the full given tables at per-run thresholds and reports per-family RMSE
// between predicted and measured runtimes.
//
// All random draws come from a single seeded generator in a fixed order, so
// sample parameters replay bit-exactly; only the timings vary.

#include <cstdint>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "linkrt/costmodel.hpp"
#include "linkrt/kb.hpp"
#include "linkrt/ls.hpp"
#include "linkrt/measures.hpp"
#include "linkrt/rng.hpp"

namespace linkrt {

struct TrainingProtocol {
  std::size_t n_source = 15;
  std::size_t n_target = 15;
  std::size_t repetitions = 3;
  double theta_low = 0.5;
  double theta_high = 1.0;
  std::size_t size_low = 50;
  std::size_t size_high = 400;
  std::uint64_t seed = 0;
};

/// One timed training run; the result size is a free byproduct used by the
/// planner's cardinality model.
struct SampleRun {
  TrainingSample sample;
  std::size_t result_size = 0;
};

struct CollectResult {
  std::vector<SampleRun> runs;
  std::vector<std::string> warnings;
};

namespace detail {

inline void check_protocol(const TrainingProtocol& p) {
  if (p.n_source < 1 || p.n_target < 1 || p.repetitions < 1)
    throw std::invalid_argument("protocol: counts must be >= 1");
  if (!(p.theta_low > 0.0) || p.theta_low > p.theta_high || p.theta_high > 1.0)
    throw std::invalid_argument("protocol: need 0 < theta_low <= theta_high <= 1");
  if (p.size_low < 1 || p.size_low > p.size_high)
    throw std::invalid_argument("protocol: need 1 <= size_low <= size_high");
}

}  // namespace detail

/// Runs the training protocol: n_source x n_target table-sample pairs, each
/// timed as the mean of `repetitions` joins after one untimed warm-up run.
inline CollectResult collect_runs(MeasureKind measure, const ResourceTable& source,
                                  const ResourceTable& target, const std::string& p_s,
                                  const std::string& p_t, const TrainingProtocol& protocol) {
  detail::check_protocol(protocol);
  if (source.empty() || target.empty())
    throw std::invalid_argument("collect_runs: empty table");

  CollectResult result;
  auto clip = [&result](const char* side, std::size_t lo, std::size_t hi, std::size_t table)
      -> std::pair<std::size_t, std::size_t> {
    if (hi > table) {
      result.warnings.push_back(std::string("size_high clipped to ") + side + " table size " +
                                std::to_string(table));
      hi = table;
    }
    if (lo > hi) lo = hi;
    return {lo, hi};
  };
  const auto [s_lo, s_hi] = clip("source", protocol.size_low, protocol.size_high, source.size());
  const auto [t_lo, t_hi] = clip("target", protocol.size_low, protocol.size_high, target.size());

  // Fixed draw order: source sizes, target sizes, source seeds, target
  // seeds, then thetas row-major over the pair grid.
  Rng rng(protocol.seed);
  std::vector<std::size_t> s_sizes(protocol.n_source), t_sizes(protocol.n_target);
  for (auto& v : s_sizes) v = s_lo + std::size_t(uniform_u64(rng, s_hi - s_lo + 1));
  for (auto& v : t_sizes) v = t_lo + std::size_t(uniform_u64(rng, t_hi - t_lo + 1));
  std::vector<std::uint64_t> s_seeds(protocol.n_source), t_seeds(protocol.n_target);
  for (auto& v : s_seeds) v = rng();
  for (auto& v : t_seeds) v = rng();
  std::vector<double> thetas(protocol.n_source * protocol.n_target);
  for (auto& v : thetas) v = uniform_in(rng, protocol.theta_low, protocol.theta_high);

  std::vector<ResourceTable> s_tables, t_tables;
  s_tables.reserve(protocol.n_source);
  t_tables.reserve(protocol.n_target);
  for (std::size_t i = 0; i < protocol.n_source; ++i)
    s_tables.push_back(sample_table(source, s_sizes[i], s_seeds[i]));
  for (std::size_t j = 0; j < protocol.n_target; ++j)
    t_tables.push_back(sample_table(target, t_sizes[j], t_seeds[j]));

  result.runs.reserve(thetas.size());
  for (std::size_t i = 0; i < protocol.n_source; ++i) {
    for (std::size_t j = 0; j < protocol.n_target; ++j) {
      const double theta = thetas[i * protocol.n_target + j];
      const Mapping warm = atomic_join(measure, s_tables[i], t_tables[j], p_s, p_t, theta);
      const double ms = measure_runtime(measure, s_tables[i], t_tables[j], p_s, p_t, theta,
                                        protocol.repetitions);
      result.runs.push_back({TrainingSample{s_sizes[i], t_sizes[j], theta, ms}, warm.size()});
    }
  }
  return result;
}

/// collect_runs projected to the fitting input.
inline std::vector<TrainingSample> collect_samples(MeasureKind measure, const ResourceTable& source,
                                                   const ResourceTable& target, const std::string& p_s,
                                                   const std::string& p_t,
                                                   const TrainingProtocol& protocol) {
  const CollectResult r = collect_runs(measure, source, target, p_s, p_t, protocol);
  std::vector<TrainingSample> out;
  out.reserve(r.runs.size());
  for (const auto& run : r.runs) out.push_back(run.sample);
  return out;
}

/// Fits every family on the same samples.
inline std::map<ModelFamily, std::pair<RuntimeModel, FitReport>> train_all(
    const std::vector<TrainingSample>& samples, const std::string& trained_on = "") {
  std::map<ModelFamily, std::pair<RuntimeModel, FitReport>> out;
  out.emplace(ModelFamily::linear, fit_linear(samples));
  out.emplace(ModelFamily::exp, fit_exp(samples));
  out.emplace(ModelFamily::mixed, fit_mixed(samples));
  for (auto& [family, fitted] : out) fitted.first.trained_on = trained_on;
  return out;
}

struct EvaluationRecord {
  std::string spec_text;
  double expected_ms = 0.0;  // raw model prediction, may be negative
  double executed_ms = 0.0;  // mean over protocol.repetitions
  ModelFamily family = ModelFamily::linear;
};

/// Times the join on the full tables n_runs times at per-run thresholds and
/// records every model's raw prediction next to the measurement.
inline std::pair<std::vector<EvaluationRecord>, std::map<ModelFamily, double>> evaluate_models(
    const std::map<ModelFamily, RuntimeModel>& models, MeasureKind measure,
    const ResourceTable& source, const ResourceTable& target, const std::string& p_s,
    const std::string& p_t, std::size_t n_runs, const TrainingProtocol& protocol) {
  detail::check_protocol(protocol);
  if (n_runs < 1) throw std::invalid_argument("evaluate_models: n_runs must be >= 1");
  if (source.empty() || target.empty())
    throw std::invalid_argument("evaluate_models: empty table");

  Rng rng(protocol.seed);
  std::vector<double> thetas(n_runs);
  for (auto& v : thetas) v = uniform_in(rng, protocol.theta_low, protocol.theta_high);

  std::vector<EvaluationRecord> records;
  records.reserve(n_runs * models.size());
  std::map<ModelFamily, std::vector<double>> expected, executed;
  // One untimed run absorbs first-touch effects before measurements start.
  atomic_join(measure, source, target, p_s, p_t, thetas[0]);
  for (std::size_t r = 0; r < n_runs; ++r) {
    const double theta = thetas[r];
    const double ms =
        measure_runtime(measure, source, target, p_s, p_t, theta, protocol.repetitions);
    const std::string spec_text =
        unparse(LinkSpec{AtomicSpec{measure, p_s, p_t, theta}});
    for (const auto& [family, model] : models) {
      const double pred = predict(model, source.size(), target.size(), theta);
      records.push_back({spec_text, pred, ms, family});
      expected[family].push_back(pred);
      executed[family].push_back(ms);
    }
  }
  std::map<ModelFamily, double> errors;
  for (const auto& [family, preds] : expected)
    errors[family] = rmse(preds, executed.at(family));
  return {std::move(records), std::move(errors)};
}

/// CSV with header `s_size,t_size,theta,runtime_ms`.
inline void write_samples_csv(const std::vector<TrainingSample>& samples, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "s_size,t_size,theta,runtime_ms\n";
  for (const auto& s : samples)
    out << s.s_size << "," << s.t_size << "," << detail::format_score(s.theta) << ","
        << detail::format_score(s.runtime_ms) << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

/// CSV with header `spec,family,expected_ms,executed_ms`; the spec field is
/// quoted because the spec syntax contains commas.
inline void write_evaluation_csv(const std::vector<EvaluationRecord>& records,
                                 const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "spec,family,expected_ms,executed_ms\n";
  for (const auto& r : records)
    out << "\"" << r.spec_text << "\"," << family_name(r.family) << ","
        << detail::format_score(r.expected_ms) << "," << detail::format_score(r.executed_ms)
        << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace linkrt
