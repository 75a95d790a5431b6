#pragma once

// Plan construction and execution. The canonical planner mirrors the spec
// tree step for step. The cost-based planner may instead run only one child
// of an AND and realize the other as a per-pair filter (both orders tried),
// picking the alternative with the lowest estimated cost under a runtime
// model. MINUS optimizes its left subtree the same way but always
// materializes the right side; OR is always canonical. Every plan executes
// to exactly the mapping of eval_semantics.

#include <array>
#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "linkrt/costmodel.hpp"
#include "linkrt/kb.hpp"
#include "linkrt/ls.hpp"
#include "linkrt/measures.hpp"
#include "linkrt/rng.hpp"
#include "linkrt/trainer.hpp"

namespace linkrt {

struct RunStep {
  AtomicSpec spec;
};

enum class FilterMode {
  threshold,     // epsilon filter: keep score >= tau
  measure_keep,  // keep f(s,t) >= tau, score unchanged (Table 1 filter row)
  and_rewrite,   // keep f(s,t) >= tau, score becomes min(score, f(s,t))
};

struct FilterStep {
  FilterMode mode = FilterMode::threshold;
  std::optional<FilterExpr> f;  // empty for threshold mode
  double tau = 0.0;
  std::size_t input = 0;
};

struct MergeStep {
  SpecOp op = SpecOp::And;
  std::size_t left = 0;
  std::size_t right = 0;
};

struct PlanStep {
  std::variant<RunStep, FilterStep, MergeStep> step;
};

struct PlanDecision {
  std::string node;    // spec text of the AND node the choice was made at
  std::string chosen;  // canonical | filter-right | filter-left
  double chosen_cost = 0.0;
  std::vector<std::pair<std::string, double>> rejected;
};

struct Plan {
  std::vector<PlanStep> steps;
  double estimated_cost_ms = 0.0;
  std::vector<PlanDecision> decisions;
};

/// Cardinality estimates and per-entry processing costs for planning.
/// Size predictions use the linear family over (1, |S|, |T|, theta).
struct SizeModel {
  struct MeasureCost {
    std::array<double, 4> size_coeff{0.0, 0.0, 0.0, 0.0};
    double pair_cost_ms = 0.0;  // one similarity evaluation
  };
  std::map<MeasureKind, MeasureCost> measures;
  double entry_cost_ms = 0.0;  // one mapping entry through a merge or filter

  /// Predicted result size of an atomic join, clamped to [0, |S|*|T|].
  double predict_size(MeasureKind kind, std::size_t s_size, std::size_t t_size,
                      double theta) const {
    auto it = measures.find(kind);
    if (it == measures.end())
      throw std::invalid_argument("size model has no entry for measure " +
                                  std::string(measure_name(kind)));
    const auto& c = it->second.size_coeff;
    const double raw = c[0] + c[1] * double(s_size) + c[2] * double(t_size) + c[3] * theta;
    const double cap = double(s_size) * double(t_size);
    return std::min(std::max(raw, 0.0), cap);
  }

  double pair_cost(MeasureKind kind) const {
    auto it = measures.find(kind);
    if (it == measures.end())
      throw std::invalid_argument("size model has no entry for measure " +
                                  std::string(measure_name(kind)));
    return it->second.pair_cost_ms;
  }
};

/// Least-squares size coefficients from training runs (result sizes are
/// byproducts of the timing runs).
inline std::array<double, 4> fit_size_coeffs(const std::vector<SampleRun>& runs) {
  if (runs.empty()) throw std::invalid_argument("fit_size_coeffs: need at least one run");
  Eigen::MatrixXd a(runs.size(), 4);
  Eigen::VectorXd b(runs.size());
  for (std::size_t i = 0; i < runs.size(); ++i) {
    a(i, 0) = 1.0;
    a(i, 1) = double(runs[i].sample.s_size);
    a(i, 2) = double(runs[i].sample.t_size);
    a(i, 3) = runs[i].sample.theta;
    b(i) = double(runs[i].result_size);
  }
  const Eigen::VectorXd x = detail::min_norm_solve(a, b);
  return {x(0), x(1), x(2), x(3)};
}

namespace detail {

inline std::vector<std::string> synthetic_strings(std::size_t count, std::size_t length,
                                                  std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::string> out(count);
  for (auto& s : out) {
    s.resize(length);
    for (auto& ch : s) {
      const std::uint64_t d = uniform_u64(rng, 27);
      ch = d == 26 ? ' ' : char('a' + d);
    }
  }
  return out;
}

}  // namespace detail

/// Mean cost of one similarity evaluation, timed over 10,000 calls on
/// synthetic 20-character strings.
inline double calibrate_pair_cost(MeasureKind kind) {
  const auto strings = detail::synthetic_strings(100, 20, 0x5eed);
  static volatile double sink = 0.0;
  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < 10000; ++i)
    sink = sink + similarity(kind, strings[i % 100], strings[(i * 7 + 13) % 100]);
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / 10000.0;
}

/// Mean cost of pushing one entry through a merge, timed on a synthetic
/// 10,000-entry mapping.
inline double calibrate_entry_cost() {
  Mapping m;
  for (std::size_t i = 0; i < 10000; ++i)
    m.set("s" + std::to_string(i), "t" + std::to_string(i), 0.5);
  static volatile std::size_t sink = 0;
  const auto t0 = std::chrono::steady_clock::now();
  const Mapping merged = merge_or(m, m);
  const auto t1 = std::chrono::steady_clock::now();
  sink = sink + merged.size();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / 10000.0;
}

/// Fits size coefficients per measure and calibrates the cost constants.
inline SizeModel build_size_model(const std::map<MeasureKind, std::vector<SampleRun>>& runs) {
  SizeModel model;
  for (const auto& [kind, kind_runs] : runs) {
    SizeModel::MeasureCost mc;
    mc.size_coeff = fit_size_coeffs(kind_runs);
    mc.pair_cost_ms = calibrate_pair_cost(kind);
    model.measures.emplace(kind, mc);
  }
  model.entry_cost_ms = calibrate_entry_cost();
  return model;
}

inline void write_size_model(const SizeModel& model, const std::string& path) {
  KvFile kv;
  for (MeasureKind kind : kAllMeasures) {
    auto it = model.measures.find(kind);
    if (it == model.measures.end()) continue;
    const std::string base(measure_name(kind));
    for (std::size_t i = 0; i < 4; ++i)
      kv.set(base + ".size_coeff." + std::to_string(i),
             detail::format_g17(it->second.size_coeff[i]));
    kv.set(base + ".pair_cost_ms", detail::format_g17(it->second.pair_cost_ms));
  }
  kv.set("entry_cost_ms", detail::format_g17(model.entry_cost_ms));
  write_kv(kv, path);
}

inline SizeModel read_size_model(const std::string& path) {
  const KvFile kv = read_kv(path);
  SizeModel model;
  for (MeasureKind kind : kAllMeasures) {
    const std::string base(measure_name(kind));
    if (!kv.find(base + ".pair_cost_ms")) continue;
    SizeModel::MeasureCost mc;
    for (std::size_t i = 0; i < 4; ++i) {
      const std::string key = base + ".size_coeff." + std::to_string(i);
      mc.size_coeff[i] = detail::parse_double(kv.get(key), key);
    }
    mc.pair_cost_ms = detail::parse_double(kv.get(base + ".pair_cost_ms"), "pair_cost_ms");
    model.measures.emplace(kind, mc);
  }
  model.entry_cost_ms = detail::parse_double(kv.get("entry_cost_ms"), "entry_cost_ms");
  return model;
}

namespace detail {

// Appends a node's filter steps (measure filter and/or threshold) after the
// terminal step and returns the new terminal index.
inline std::size_t append_node_filter(std::vector<PlanStep>& steps, const Filter& filter,
                                      std::size_t input) {
  std::size_t term = input;
  if (filter.f) {
    steps.push_back(PlanStep{FilterStep{FilterMode::measure_keep, filter.f, filter.tau, term}});
    term = steps.size() - 1;
  } else if (filter.tau > 0.0) {
    steps.push_back(PlanStep{FilterStep{FilterMode::threshold, std::nullopt, filter.tau, term}});
    term = steps.size() - 1;
  }
  return term;
}

inline std::size_t build_canonical(std::vector<PlanStep>& steps, const LinkSpec& spec) {
  if (spec.is_atomic()) {
    steps.push_back(PlanStep{RunStep{spec.atomic()}});
    return steps.size() - 1;
  }
  const ComplexSpec& c = spec.complex();
  const std::size_t left = build_canonical(steps, *c.left);
  const std::size_t right = build_canonical(steps, *c.right);
  steps.push_back(PlanStep{MergeStep{c.op, left, right}});
  return append_node_filter(steps, c.filter, steps.size() - 1);
}

}  // namespace detail

/// Post-order literal plan: one Run per leaf, one Merge per operator, one
/// Filter per non-trivial filter.
inline Plan canonical_plan(const LinkSpec& spec) {
  Plan plan;
  detail::build_canonical(plan.steps, spec);
  return plan;
}

namespace detail {

struct SubPlan {
  std::vector<PlanStep> steps;
  double cost = 0.0;
  double est_size = 0.0;
};

// Appends `tail` to `head`, shifting step references, and returns the offset.
inline std::size_t splice(std::vector<PlanStep>& head, std::vector<PlanStep> tail) {
  const std::size_t offset = head.size();
  for (PlanStep& s : tail) {
    if (auto* f = std::get_if<FilterStep>(&s.step)) f->input += offset;
    if (auto* m = std::get_if<MergeStep>(&s.step)) {
      m->left += offset;
      m->right += offset;
    }
    head.push_back(std::move(s));
  }
  return offset;
}

class HeliosBuilder {
 public:
  HeliosBuilder(const std::map<MeasureKind, RuntimeModel>& models, const SizeModel& sizes,
                std::size_t s_size, std::size_t t_size)
      : models_(models), sizes_(sizes), s_size_(s_size), t_size_(t_size) {}

  SubPlan build(const LinkSpec& spec, bool allow_rewrites) {
    if (spec.is_atomic()) return atomic_plan(spec.atomic());
    const ComplexSpec& c = spec.complex();
    switch (c.op) {
      case SpecOp::Or: {
        SubPlan left = build(*c.left, allow_rewrites);
        SubPlan right = build(*c.right, allow_rewrites);
        SubPlan out = merge_plans(SpecOp::Or, std::move(left), std::move(right));
        finish_node(out, c.filter);
        return out;
      }
      case SpecOp::Minus: {
        SubPlan left = build(*c.left, allow_rewrites);
        SubPlan right = build(*c.right, false);  // difference needs the full right mapping
        SubPlan out = merge_plans(SpecOp::Minus, std::move(left), std::move(right));
        finish_node(out, c.filter);
        return out;
      }
      case SpecOp::And:
        break;
    }
    SubPlan out = and_plan(c, allow_rewrites);
    finish_node(out, c.filter);
    return out;
  }

  std::vector<PlanDecision> take_decisions() { return std::move(decisions_); }

 private:
  double leaf_cost(const AtomicSpec& a) const {
    auto it = models_.find(a.measure);
    if (it == models_.end())
      throw std::invalid_argument("no runtime model for measure " +
                                  std::string(measure_name(a.measure)));
    // Negative predictions are clamped before any cost comparison.
    return std::max(predict(it->second, s_size_, t_size_, a.theta), 0.0);
  }

  SubPlan atomic_plan(const AtomicSpec& a) const {
    SubPlan p;
    p.steps.push_back(PlanStep{RunStep{a}});
    p.cost = leaf_cost(a);
    p.est_size = sizes_.predict_size(a.measure, s_size_, t_size_, a.theta);
    return p;
  }

  double merged_size(SpecOp op, double left, double right) const {
    switch (op) {
      case SpecOp::And: return std::min(left, right);
      case SpecOp::Or: return std::min(left + right, double(s_size_) * double(t_size_));
      case SpecOp::Minus: return left;
    }
    throw std::logic_error("merged_size: bad enum value");
  }

  SubPlan merge_plans(SpecOp op, SubPlan left, SubPlan right) const {
    SubPlan out;
    out.steps = std::move(left.steps);
    const std::size_t left_term = out.steps.size() - 1;
    splice(out.steps, std::move(right.steps));
    const std::size_t right_term = out.steps.size() - 1;
    out.steps.push_back(PlanStep{MergeStep{op, left_term, right_term}});
    out.cost = left.cost + right.cost +
               (left.est_size + right.est_size) * sizes_.entry_cost_ms;
    out.est_size = merged_size(op, left.est_size, right.est_size);
    return out;
  }

  // Runs one child, realizes the other (atomic) as a per-pair filter.
  SubPlan rewrite_plan(SubPlan run_side, const AtomicSpec& suppressed) const {
    SubPlan out;
    out.steps = std::move(run_side.steps);
    out.steps.push_back(PlanStep{FilterStep{
        FilterMode::and_rewrite,
        FilterExpr{suppressed.measure, suppressed.source_prop, suppressed.target_prop},
        suppressed.theta, out.steps.size() - 1}});
    out.cost = run_side.cost + run_side.est_size * sizes_.pair_cost(suppressed.measure);
    const double suppressed_size =
        sizes_.predict_size(suppressed.measure, s_size_, t_size_, suppressed.theta);
    out.est_size = std::min(run_side.est_size, suppressed_size);
    return out;
  }

  SubPlan and_plan(const ComplexSpec& c, bool allow_rewrites) {
    SubPlan left = build(*c.left, allow_rewrites);
    SubPlan right = build(*c.right, allow_rewrites);
    if (!allow_rewrites) return merge_plans(SpecOp::And, std::move(left), std::move(right));

    std::vector<std::pair<std::string, SubPlan>> alternatives;
    alternatives.emplace_back(
        "canonical", merge_plans(SpecOp::And, SubPlan(left), SubPlan(right)));
    if (c.right->is_atomic())
      alternatives.emplace_back("filter-right", rewrite_plan(SubPlan(left), c.right->atomic()));
    if (c.left->is_atomic())
      alternatives.emplace_back("filter-left", rewrite_plan(SubPlan(right), c.left->atomic()));

    std::size_t best = 0;
    for (std::size_t i = 1; i < alternatives.size(); ++i)
      if (alternatives[i].second.cost < alternatives[best].second.cost) best = i;

    PlanDecision decision;
    decision.node = unparse(LinkSpec{c});
    decision.chosen = alternatives[best].first;
    decision.chosen_cost = alternatives[best].second.cost;
    for (std::size_t i = 0; i < alternatives.size(); ++i)
      if (i != best)
        decision.rejected.emplace_back(alternatives[i].first, alternatives[i].second.cost);
    decisions_.push_back(std::move(decision));
    return std::move(alternatives[best].second);
  }

  void finish_node(SubPlan& p, const Filter& filter) const {
    const std::size_t before = p.steps.size();
    append_node_filter(p.steps, filter, before - 1);
    if (p.steps.size() == before) return;
    const auto& fs = std::get<FilterStep>(p.steps.back().step);
    p.cost += p.est_size * (fs.mode == FilterMode::threshold
                                ? sizes_.entry_cost_ms
                                : sizes_.pair_cost(fs.f->measure));
  }

  const std::map<MeasureKind, RuntimeModel>& models_;
  const SizeModel& sizes_;
  std::size_t s_size_;
  std::size_t t_size_;
  std::vector<PlanDecision> decisions_;
};

}  // namespace detail

/// Cost-based plan under one runtime model family. Needs a model and a size
/// model entry for every leaf measure.
inline Plan helios_plan(const LinkSpec& spec, const std::map<MeasureKind, RuntimeModel>& models,
                        const SizeModel& size_model, const ResourceTable& source,
                        const ResourceTable& target) {
  detail::HeliosBuilder builder(models, size_model, source.size(), target.size());
  detail::SubPlan sub = builder.build(spec, true);
  Plan plan;
  plan.steps = std::move(sub.steps);
  plan.estimated_cost_ms = sub.cost;
  plan.decisions = builder.take_decisions();
  return plan;
}

/// Runs a plan in step order; returns the terminal mapping and per-step
/// wall-clock milliseconds.
inline std::pair<Mapping, std::vector<double>> execute_plan(const Plan& plan,
                                                            const ResourceTable& source,
                                                            const ResourceTable& target) {
  if (plan.steps.empty()) throw std::invalid_argument("execute_plan: empty plan");
  std::vector<Mapping> results(plan.steps.size());
  std::vector<double> step_ms(plan.steps.size(), 0.0);
  for (std::size_t k = 0; k < plan.steps.size(); ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    const PlanStep& ps = plan.steps[k];
    if (const auto* run = std::get_if<RunStep>(&ps.step)) {
      const AtomicSpec& a = run->spec;
      results[k] = atomic_join(a.measure, source, target, a.source_prop, a.target_prop, a.theta);
    } else if (const auto* fs = std::get_if<FilterStep>(&ps.step)) {
      if (fs->input >= k) throw std::invalid_argument("execute_plan: forward step reference");
      const Mapping& in = results[fs->input];
      if (fs->mode == FilterMode::and_rewrite) {
        Mapping out;
        for (const auto& [key, r] : in) {
          const Resource* s = source.find(key.first);
          const Resource* t = target.find(key.second);
          if (!s || !t) throw std::invalid_argument("execute_plan: unknown resource id");
          const double f =
              record_similarity(fs->f->measure, *s, *t, fs->f->source_prop, fs->f->target_prop);
          if (f >= fs->tau) out.set(key.first, key.second, std::min(r, f));
        }
        results[k] = std::move(out);
      } else {
        results[k] = apply_filter(Filter{fs->f, fs->tau}, in, source, target);
      }
    } else {
      const auto& ms = std::get<MergeStep>(ps.step);
      if (ms.left >= k || ms.right >= k)
        throw std::invalid_argument("execute_plan: forward step reference");
      results[k] = merge_op(ms.op, results[ms.left], results[ms.right]);
    }
    const auto t1 = std::chrono::steady_clock::now();
    step_ms[k] = std::chrono::duration<double, std::milli>(t1 - t0).count();
  }
  return {std::move(results.back()), std::move(step_ms)};
}

/// One numbered line per step; filters show their expression or the epsilon
/// symbol, references are 1-based step numbers.
inline std::string plan_to_string(const Plan& plan) {
  std::string out;
  for (std::size_t k = 0; k < plan.steps.size(); ++k) {
    out += std::to_string(k + 1) + ": ";
    const PlanStep& ps = plan.steps[k];
    if (const auto* run = std::get_if<RunStep>(&ps.step)) {
      const AtomicSpec& a = run->spec;
      out += "RUN " + std::string(measure_name(a.measure)) + "(x." + a.source_prop + ",y." +
             a.target_prop + ")|" + detail::format_score(a.theta);
    } else if (const auto* fs = std::get_if<FilterStep>(&ps.step)) {
      out += "FILTER (";
      if (fs->f)
        out += std::string(measure_name(fs->f->measure)) + "(x." + fs->f->source_prop + ",y." +
               fs->f->target_prop + ")";
      else
        out += "ε";
      out += ", " + detail::format_score(fs->tau) + ") <- " + std::to_string(fs->input + 1);
    } else {
      const auto& ms = std::get<MergeStep>(ps.step);
      out += "MERGE " + std::string(op_name(ms.op)) + " <- " + std::to_string(ms.left + 1) +
             ", " + std::to_string(ms.right + 1);
    }
    out += "\n";
  }
  return out;
}

/// Measure/property combination available to the random generator.
struct AtomicTemplate {
  MeasureKind measure;
  std::string source_prop;
  std::string target_prop;
};

namespace detail {

inline LinkSpecPtr random_spec_node(Rng& rng, std::size_t depth,
                                    const std::vector<AtomicTemplate>& templates) {
  if (depth == 0) {
    const AtomicTemplate& t = templates[uniform_u64(rng, templates.size())];
    const double theta = uniform_in(rng, 0.5, 1.0);
    return make_atomic(t.measure, t.source_prop, t.target_prop, theta);
  }
  // Draw order: operator, filter threshold, deep side, shallow depth, then
  // children left to right.
  static constexpr SpecOp kOps[] = {SpecOp::And, SpecOp::Or, SpecOp::Minus};
  const SpecOp op = kOps[uniform_u64(rng, 3)];
  const double tau = uniform_in(rng, 0.2, 1.0);
  const bool deep_left = uniform_u64(rng, 2) == 0;
  const std::size_t other_depth = std::size_t(uniform_u64(rng, depth));  // in [0, depth-1]
  const std::size_t left_depth = deep_left ? depth - 1 : other_depth;
  const std::size_t right_depth = deep_left ? other_depth : depth - 1;
  LinkSpecPtr left = random_spec_node(rng, left_depth, templates);
  LinkSpecPtr right = random_spec_node(rng, right_depth, templates);
  return make_complex(op, std::move(left), std::move(right), Filter{std::nullopt, tau});
}

}  // namespace detail

/// Random specification of exactly the given operator depth; deterministic
/// per seed. Leaf thresholds lie in [0.5, 1], filter thresholds in [0.2, 1].
inline LinkSpecPtr random_spec(std::size_t depth, const std::vector<AtomicTemplate>& templates,
                               std::uint64_t seed) {
  if (templates.empty()) throw std::invalid_argument("random_spec: need at least one template");
  Rng rng(seed);
  return detail::random_spec_node(rng, depth, templates);
}

}  // namespace linkrt
