// End-to-end acceptance checks, one numbered criterion per function. Each
// prints a single [PASS]/[FAIL] line plus diagnostics on stdout; the exit
// code is the number of failed criteria.
//
//   acceptance        run everything
//   acceptance N      run criterion N only
//
// Criterion 1 asserts a published reference coefficient vector that is not a
// least-squares solution of its own input system; the fit provably cannot
// reach it. It is expected to fail and its diagnostics show why. The correct
// minimum-norm solution is cross-checked against an independent SVD oracle in
// criterion 2 and in the unit tests.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "linkrt/linkrt.hpp"
#include "support/oracles.hpp"

using namespace linkrt;

namespace {

struct Criterion {
  int number;
  const char* title;
  double budget_s;  // 0 = no budget
  std::function<bool(std::string&)> run;
};

ResourceTable salad_table(std::size_t n, std::uint64_t seed, const char* prefix) {
  static const char* kWords[] = {"amber", "basil", "cedar", "delta", "ember", "flint",
                                 "grove", "hazel", "iris",  "jade",  "kelp",  "larch",
                                 "maple", "nutmeg", "olive", "pearl", "quartz", "rowan"};
  Rng rng(seed);
  ResourceTable t;
  std::vector<std::string> titles;
  for (std::size_t i = 0; i < n; ++i) {
    std::string title;
    if (!titles.empty() && uniform_u64(rng, 3) == 0) {
      title = titles[uniform_u64(rng, titles.size())];  // repeat for guaranteed hits
      if (uniform_u64(rng, 2) == 0) title += " " + std::string(kWords[uniform_u64(rng, 18)]);
    } else {
      const std::size_t words = 1 + uniform_u64(rng, 4);
      for (std::size_t w = 0; w < words; ++w) {
        if (w) title += ' ';
        title += kWords[uniform_u64(rng, 18)];
      }
    }
    titles.push_back(title);
    t.add_value(prefix + std::to_string(i), "title", title);
  }
  return t;
}

std::vector<TrainingSample> spread_samples(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<TrainingSample> out;
  for (std::size_t i = 0; i < n; ++i) {
    TrainingSample s;
    s.s_size = 20 + uniform_u64(rng, 480);
    s.t_size = 20 + uniform_u64(rng, 480);
    s.theta = uniform_in(rng, 0.5, 1.0);
    s.runtime_ms = 1.0;
    out.push_back(s);
  }
  return out;
}

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

// --------------------------------------------------------------- criterion 1

bool criterion_worked_example(std::string& log) {
  const std::vector<TrainingSample> samples{{458, 512, 0.5, 67.0},
                                            {458, 404, 0.9, 4.0},
                                            {358, 317, 0.6, 4.0},
                                            {58, 512, 0.7, 1.0}};
  const std::vector<double> reference{-1.028, 0.009, 0.010, 9.821, -9.053};
  const auto [model, report] = fit_exp(samples);

  char buf[256];
  log += "  fitted   :";
  for (double c : model.coefficients) {
    std::snprintf(buf, sizeof buf, " %.8f", c);
    log += buf;
  }
  log += "\n  reference:";
  for (double c : reference) {
    std::snprintf(buf, sizeof buf, " %.8f", c);
    log += buf;
  }
  double max_diff = 0.0;
  for (std::size_t i = 0; i < 5; ++i)
    max_diff = std::max(max_diff, std::abs(model.coefficients[i] - reference[i]));
  std::snprintf(buf, sizeof buf, "\n  max |fitted - reference| = %.6f (tolerance 0.02)", max_diff);
  log += buf;

  // Residual of the reference vector on the log-space system it claims to
  // solve: a true least-squares solution of this underdetermined system
  // interpolates (residual 0), so a large value means the reference vector
  // does not solve the stated inputs.
  double ref_residual = 0.0;
  for (const auto& s : samples) {
    const double pred = reference[0] + reference[1] * double(s.s_size) +
                        reference[2] * double(s.t_size) + reference[3] * s.theta +
                        reference[4] * s.theta * s.theta;
    const double r = pred - std::log(std::max(s.runtime_ms, 1.0));
    ref_residual += r * r;
  }
  std::snprintf(buf, sizeof buf,
                "\n  log-space residual: fitted %.3e, reference %.3f (an exact solution has 0)",
                report.loss, ref_residual);
  log += buf;
  return max_diff <= 2e-2;
}

// --------------------------------------------------------------- criterion 2

bool criterion_oracle_equivalence(std::string& log) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> rows_of(1, 10);
  std::uniform_real_distribution<double> runtime_of(0.0, 50.0);
  std::size_t systems = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int m = rows_of(rng);
    const bool use_exp = trial % 2 == 1;
    std::vector<TrainingSample> samples;
    oracle::Matrix a;
    std::vector<double> b;
    for (int i = 0; i < m; ++i) {
      TrainingSample s;
      s.s_size = 1 + std::uniform_int_distribution<std::size_t>(0, 600)(rng);
      s.t_size = 1 + std::uniform_int_distribution<std::size_t>(0, 600)(rng);
      s.theta = std::uniform_real_distribution<double>(0.05, 1.0)(rng);
      s.runtime_ms = runtime_of(rng);
      samples.push_back(s);
      if (use_exp) {
        a.push_back({1.0, double(s.s_size), double(s.t_size), s.theta, s.theta * s.theta});
        b.push_back(std::log(std::max(s.runtime_ms, 1.0)));
      } else {
        a.push_back({1.0, double(s.s_size), double(s.t_size), s.theta});
        b.push_back(s.runtime_ms);
      }
    }
    const auto [model, report] = use_exp ? fit_exp(samples) : fit_linear(samples);
    const std::vector<double> want = oracle::pinv_solve(a, b);
    for (std::size_t i = 0; i < want.size(); ++i)
      worst = std::max(worst, std::abs(model.coefficients[i] - want[i]));
    ++systems;
  }
  char buf[128];
  std::snprintf(buf, sizeof buf, "  %zu systems, worst |fit - oracle| = %.3e (tolerance 1e-8)",
                systems, worst);
  log += buf;
  return worst <= 1e-8;
}

// --------------------------------------------------------------- criterion 3

bool criterion_recovery(std::string& log) {
  bool ok = true;
  char buf[160];

  const std::vector<double> lin_truth{2.0, 0.05, 0.015, 4.0};  // nonnegative on the sample range
  auto lin_samples = spread_samples(30, 31);
  for (auto& s : lin_samples)
    s.runtime_ms = lin_truth[0] + lin_truth[1] * double(s.s_size) +
                   lin_truth[2] * double(s.t_size) + lin_truth[3] * s.theta;
  const auto [lin, lin_rep] = fit_linear(lin_samples);
  double lin_err = 0.0;
  for (std::size_t i = 0; i < 4; ++i)
    lin_err = std::max(lin_err, std::abs(lin.coefficients[i] - lin_truth[i]));
  std::snprintf(buf, sizeof buf, "  linear: max coefficient error %.3e (tolerance 1e-6)\n",
                lin_err);
  log += buf;
  ok = ok && lin_err <= 1e-6;

  const std::vector<double> exp_truth{-0.5, 0.003, 0.002, 3.0, -2.0};
  auto exp_samples = spread_samples(30, 32);
  for (auto& s : exp_samples)
    s.runtime_ms = std::exp(exp_truth[0] + exp_truth[1] * double(s.s_size) +
                            exp_truth[2] * double(s.t_size) + exp_truth[3] * s.theta +
                            exp_truth[4] * s.theta * s.theta);
  const auto [exp_m, exp_rep] = fit_exp(exp_samples);
  double exp_err = 0.0;
  for (std::size_t i = 0; i < 5; ++i)
    exp_err = std::max(exp_err, std::abs(exp_m.coefficients[i] - exp_truth[i]));
  std::snprintf(buf, sizeof buf, "  exp: max log-space coefficient error %.3e (tolerance 1e-6)\n",
                exp_err);
  log += buf;
  ok = ok && exp_err <= 1e-6;

  const std::vector<double> mix_truth{0.5, 3.0, 2.0, 1.0, 4.0, -1.5, 0.8};
  auto mix_samples = spread_samples(50, 33);
  double max_s = 0.0, max_t = 0.0;
  for (const auto& s : mix_samples) {
    max_s = std::max(max_s, double(s.s_size));
    max_t = std::max(max_t, double(s.t_size));
  }
  for (auto& s : mix_samples) {
    const double u = double(s.s_size) / max_s, v = double(s.t_size) / max_t;
    const double e = std::exp(mix_truth[5] * s.theta + mix_truth[6] * s.theta * s.theta);
    s.runtime_ms =
        mix_truth[0] + (mix_truth[1] + mix_truth[2] * u + mix_truth[3] * v + mix_truth[4] * u * v) * e;
  }
  const auto [mix, mix_rep] = fit_mixed(mix_samples);
  std::snprintf(buf, sizeof buf,
                "  mixed: final loss %.3e after %d iterations (tolerance 1e-6, truth loss 0)\n",
                mix_rep.loss, mix_rep.iterations);
  log += buf;
  ok = ok && mix_rep.loss <= 1e-6;

  bool monotone = true;
  for (std::size_t i = 1; i < mix_rep.accepted_losses.size(); ++i)
    monotone = monotone && mix_rep.accepted_losses[i] <= mix_rep.accepted_losses[i - 1];
  std::snprintf(buf, sizeof buf, "  mixed: %zu accepted losses, nonincreasing: %s",
                mix_rep.accepted_losses.size(), monotone ? "yes" : "NO");
  log += buf;
  return ok && monotone;
}

// --------------------------------------------------------------- criterion 4

bool criterion_gradient(std::string& log) {
  std::mt19937_64 rng(44);
  std::uniform_real_distribution<double> coeff(-2.0, 2.0);
  double worst = 0.0;
  std::size_t points = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto samples = spread_samples(5, 400 + trial);
    RuntimeModel m;
    m.family = ModelFamily::mixed;
    for (const auto& s : samples) {
      m.scale_s = std::max(m.scale_s, double(s.s_size));
      m.scale_t = std::max(m.scale_t, double(s.t_size));
    }
    std::vector<double> p(7);
    for (double& c : p) c = coeff(rng);
    const Eigen::MatrixXd jac = mixed_jacobian(p, samples, m.scale_s, m.scale_t);
    const double h = 1e-6;
    for (std::size_t j = 0; j < 7; ++j) {
      std::vector<double> plus = p, minus = p;
      plus[j] += h;
      minus[j] -= h;
      for (std::size_t i = 0; i < samples.size(); ++i) {
        m.coefficients = plus;
        const double fp = predict(m, samples[i].s_size, samples[i].t_size, samples[i].theta);
        m.coefficients = minus;
        const double fm = predict(m, samples[i].s_size, samples[i].t_size, samples[i].theta);
        const double fd = (fp - fm) / (2.0 * h);
        const double an = jac(long(i), long(j));
        worst = std::max(worst, std::abs(an - fd) / std::max(1.0, std::abs(an)));
      }
    }
    points += samples.size();
  }
  char buf[128];
  std::snprintf(buf, sizeof buf,
                "  %zu points x 7 partials, worst relative error %.3e (tolerance 1e-5)", points,
                worst);
  log += buf;
  return points >= 100 && worst < 1e-5;
}

// --------------------------------------------------------------- criterion 5

bool criterion_join_equivalence(std::string& log) {
  const double thetas[] = {0.5, 0.7, 0.9, 1.0};
  std::vector<ResourceTable> tables;
  for (std::uint64_t i = 0; i < 20; ++i)
    tables.push_back(salad_table(200, 500 + i, i % 2 ? "t" : "s"));

  std::size_t joins = 0, bad = 0;
  double worst = 0.0;
  for (std::size_t i = 0; i < tables.size(); ++i) {
    const ResourceTable& s = tables[i];
    const ResourceTable& t = tables[(i + 1) % tables.size()];
    for (MeasureKind kind : kAllMeasures) {
      for (double theta : thetas) {
        const Mapping fast = atomic_join(kind, s, t, "title", "title", theta);
        const Mapping slow = naive_join(kind, s, t, "title", "title", theta);
        ++joins;
        if (fast.size() != slow.size()) {
          ++bad;
          continue;
        }
        bool pairs_equal = true;
        for (const auto& [key, score] : slow) {
          if (!fast.contains(key.first, key.second)) {
            pairs_equal = false;
            break;
          }
          worst = std::max(worst, std::abs(fast.score(key.first, key.second) - score));
        }
        if (!pairs_equal || worst > 1e-12) ++bad;
      }
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "  %zu joins over 20 tables of 200, mismatching joins: %zu, worst score "
                "difference %.1e (tolerance 1e-12)",
                joins, bad, worst);
  log += buf;
  return bad == 0;
}

// --------------------------------------------------------------- criterion 6

bool criterion_plan_equivalence(std::string& log) {
  const std::string dir = LINKRT_DATA_DIR;
  const ResourceTable s =
      sample_table(load_table(dir + "/synth_source.tsv", TableFormat::tsv), 50, 7);
  const ResourceTable t =
      sample_table(load_table(dir + "/synth_target.tsv", TableFormat::tsv), 50, 8);

  // One contrived but valid model per family, deliberately disagreeing on
  // which measures are expensive so the planners diverge.
  std::map<ModelFamily, std::map<MeasureKind, RuntimeModel>> families;
  for (MeasureKind kind : kAllMeasures) {
    RuntimeModel lin;
    lin.family = ModelFamily::linear;
    lin.coefficients = {1.0, 0.002, 0.001, kind == MeasureKind::levenshtein ? 40.0 : -0.5};
    families[ModelFamily::linear].emplace(kind, lin);

    RuntimeModel ex;
    ex.family = ModelFamily::exp;
    ex.coefficients = {kind == MeasureKind::trigrams ? 3.0 : 0.1, 0.001, 0.001, 1.0, -1.0};
    families[ModelFamily::exp].emplace(kind, ex);

    RuntimeModel mix;
    mix.family = ModelFamily::mixed;
    mix.coefficients = {0.2, 1.0, kind == MeasureKind::cosine ? 30.0 : 2.0, 2.0, 1.0, 0.5, -0.5};
    mix.scale_s = 50.0;
    mix.scale_t = 50.0;
    families[ModelFamily::mixed].emplace(kind, mix);
  }
  SizeModel sizes;
  for (MeasureKind kind : kAllMeasures) {
    SizeModel::MeasureCost c;
    c.size_coeff = {2.0, 0.1, 0.1, -3.0};
    c.pair_cost_ms = kind == MeasureKind::levenshtein ? 8e-4 : 2e-4;
    sizes.measures.emplace(kind, c);
  }
  sizes.entry_cost_ms = 1e-5;

  const std::vector<AtomicTemplate> templates{
      {MeasureKind::jaccard, "title", "title"},
      {MeasureKind::trigrams, "title", "title"},
      {MeasureKind::levenshtein, "title", "title"},
      {MeasureKind::overlap, "description", "description"},
      {MeasureKind::cosine, "description", "title"}};

  std::size_t specs = 0, mismatches = 0, rewrites = 0;
  for (std::uint64_t i = 0; i < 100; ++i) {
    const LinkSpecPtr spec = random_spec(i % 4, templates, 9000 + i);
    ++specs;
    const Mapping truth = eval_semantics(*spec, s, t);
    const auto [canon, c_ms] = execute_plan(canonical_plan(*spec), s, t);
    if (!(canon == truth)) {
      ++mismatches;
      log += "  canonical mismatch: " + unparse(*spec) + "\n";
      continue;
    }
    for (const auto& [family, models] : families) {
      const Plan plan = helios_plan(*spec, models, sizes, s, t);
      for (const auto& d : plan.decisions)
        if (d.chosen != "canonical") ++rewrites;
      const auto [mapping, h_ms] = execute_plan(plan, s, t);
      if (!(mapping == truth)) {
        ++mismatches;
        log += "  mismatch under " + std::string(family_name(family)) + ": " + unparse(*spec) +
               "\n";
      }
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "  %zu specs x 3 families on 50x50 tables, rewrites chosen: %zu, mismatches: %zu",
                specs, rewrites, mismatches);
  log += buf;
  return mismatches == 0 && rewrites > 0;
}

// --------------------------------------------------------------- criterion 7

bool criterion_plan_shapes(std::string& log) {
  const char* spec_text =
      "MINUS(AND(levenshtein(x.description,y.description)|0.5045,"
      "trigrams(x.title,y.name)|0.4871)|0.2925,"
      "OR(levenshtein(x.description,y.description)|0.5045,"
      "trigrams(x.title,y.name)|0.4871)|0.2925)>=0.2925";
  const LinkSpecPtr spec = parse_ls(spec_text);
  const ResourceTable s = salad_table(40, 71, "s");
  const ResourceTable t = salad_table(40, 72, "t");

  SizeModel sizes;
  for (MeasureKind kind : kAllMeasures) {
    SizeModel::MeasureCost c;
    c.size_coeff = {0.0, 0.05, 0.05, 0.0};
    c.pair_cost_ms = 1e-4;
    sizes.measures.emplace(kind, c);
  }
  sizes.entry_cost_ms = 1e-6;

  auto constant = [](double ms) {
    RuntimeModel m;
    m.family = ModelFamily::linear;
    m.coefficients = {ms, 0.0, 0.0, 0.0};
    return m;
  };

  // Model A: levenshtein is ruinously expensive, so the AND child collapses
  // into running trigrams and filtering by levenshtein per pair.
  std::map<MeasureKind, RuntimeModel> expensive_lev;
  for (MeasureKind kind : kAllMeasures)
    expensive_lev.emplace(kind, constant(kind == MeasureKind::levenshtein ? 1000.0 : 1.0));
  const Plan rewrite = helios_plan(*spec, expensive_lev, sizes, s, t);
  const std::string rewrite_text = plan_to_string(rewrite);
  const bool shape_a =
      rewrite_text.find("1: RUN trigrams(x.title,y.name)|0.4871\n"
                        "2: FILTER (levenshtein(x.description,y.description), 0.5045) <- 1\n"
                        "3: FILTER (ε, 0.2925) <- 2\n") == 0 &&
      rewrite.decisions.size() == 1 && rewrite.decisions[0].chosen == "filter-left";
  log += "  expensive-levenshtein plan starts with: " +
         rewrite_text.substr(0, rewrite_text.find('\n')) + " ...\n";
  log += std::string("  filter-rewrite shape: ") + (shape_a ? "yes" : "NO") + "\n";

  // Model B: leaves are nearly free while per-pair filtering is costly, so
  // every node stays canonical.
  std::map<MeasureKind, RuntimeModel> cheap_leaves;
  for (MeasureKind kind : kAllMeasures) cheap_leaves.emplace(kind, constant(0.001));
  SizeModel costly_filter = sizes;
  for (auto& [kind, cost] : costly_filter.measures) cost.pair_cost_ms = 100.0;
  const Plan canonical = helios_plan(*spec, cheap_leaves, costly_filter, s, t);
  const std::string canonical_text = plan_to_string(canonical);
  const bool shape_b = canonical_text.find("MERGE AND") != std::string::npos &&
                       canonical.decisions.size() == 1 &&
                       canonical.decisions[0].chosen == "canonical" &&
                       canonical.steps.size() == 10;
  log += std::string("  cheap-leaves plan keeps the canonical AND: ") + (shape_b ? "yes" : "NO") +
         "\n";

  // Both plans must still compute the same mapping as the semantics.
  const Mapping truth = eval_semantics(*spec, s, t);
  const bool equal = execute_plan(rewrite, s, t).first == truth &&
                     execute_plan(canonical, s, t).first == truth;
  log += std::string("  both plans execute to the reference mapping: ") + (equal ? "yes" : "NO");
  return shape_a && shape_b && equal;
}

// --------------------------------------------------------------- criterion 8

bool criterion_rmse(std::string& log) {
  const double zero = rmse({1.0, 2.0, 3.0}, {1.0, 2.0, 3.0});
  const double three = rmse({0.0}, {3.0});
  const double frac = rmse({1.0, 2.0, 3.0}, {2.0, 4.0, 6.0});
  char buf[160];
  std::snprintf(buf, sizeof buf, "  rmse values: %.17g, %.17g, %.17g (want 0, 3, sqrt(14/3))",
                zero, three, frac);
  log += buf;
  return zero == 0.0 && close(three, 3.0, 1e-12) &&
         close(frac, std::sqrt(14.0 / 3.0), 1e-12);
}

// --------------------------------------------------------------- criterion 9

bool criterion_pipeline(std::string& log) {
  const std::string dir = LINKRT_DATA_DIR;
  const ResourceTable source = load_table(dir + "/synth_source.tsv", TableFormat::tsv);
  const ResourceTable target = load_table(dir + "/synth_target.tsv", TableFormat::tsv);
  char buf[200];
  std::snprintf(buf, sizeof buf, "  corpus: %zu + %zu resources\n", source.size(), target.size());
  log += buf;

  const auto [s_train, s_test] = split_halves(source, 91);
  const auto [t_train, t_test] = split_halves(target, 92);

  TrainingProtocol protocol;
  protocol.seed = 42;
  const CollectResult first =
      collect_runs(MeasureKind::jaccard, s_train, t_train, "title", "title", protocol);
  std::vector<TrainingSample> samples;
  for (const auto& r : first.runs) samples.push_back(r.sample);
  const auto fitted = train_all(samples, "acceptance");

  bool finite = true;
  std::map<ModelFamily, RuntimeModel> models;
  for (const auto& [family, pair] : fitted) {
    models.emplace(family, pair.first);
    for (double c : pair.first.coefficients) finite = finite && std::isfinite(c);
    std::snprintf(buf, sizeof buf, "  %s training loss %.6g\n",
                  std::string(family_name(family)).c_str(), pair.second.loss);
    log += buf;
    finite = finite && std::isfinite(pair.second.loss);
  }

  const auto [records, errors] = evaluate_models(models, MeasureKind::jaccard, s_test, t_test,
                                                 "title", "title", 20, protocol);
  for (const auto& [family, err] : errors) {
    std::snprintf(buf, sizeof buf, "  %s evaluation RMSE %.6g ms\n",
                  std::string(family_name(family)).c_str(), err);
    log += buf;
    finite = finite && std::isfinite(err);
  }

  // Determinism replay: drawing again with the same seed reproduces every
  // sample parameter bit for bit, and refitting the same samples reproduces
  // every coefficient bit for bit. Timings are the only thing that may move.
  const CollectResult second =
      collect_runs(MeasureKind::jaccard, s_train, t_train, "title", "title", protocol);
  bool replay = first.runs.size() == second.runs.size() && first.runs.size() == 225;
  for (std::size_t i = 0; replay && i < first.runs.size(); ++i)
    replay = first.runs[i].sample.s_size == second.runs[i].sample.s_size &&
             first.runs[i].sample.t_size == second.runs[i].sample.t_size &&
             first.runs[i].sample.theta == second.runs[i].sample.theta &&
             first.runs[i].result_size == second.runs[i].result_size;
  const auto refitted = train_all(samples, "acceptance");
  bool refit_identical = true;
  for (ModelFamily family : kAllFamilies)
    refit_identical = refit_identical &&
                      refitted.at(family).first.coefficients ==
                          fitted.at(family).first.coefficients;
  std::snprintf(buf, sizeof buf,
                "  finite fits: %s, sample replay (225 runs): %s, refit bit-identical: %s",
                finite ? "yes" : "NO", replay ? "yes" : "NO", refit_identical ? "yes" : "NO");
  log += buf;
  return finite && replay && refit_identical;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "worked-example coefficient reproduction", 1.0, criterion_worked_example},
      {2, "minimum-norm oracle equivalence", 5.0, criterion_oracle_equivalence},
      {3, "generate-then-fit recovery", 10.0, criterion_recovery},
      {4, "mixed-model gradient check", 0.0, criterion_gradient},
      {5, "indexed join equals naive join", 60.0, criterion_join_equivalence},
      {6, "semantics, canonical and cost-based plans agree", 120.0, criterion_plan_equivalence},
      {7, "contrived models reproduce both plan shapes", 0.0, criterion_plan_shapes},
      {8, "rmse reference values", 0.0, criterion_rmse},
      {9, "full pipeline on the bundled corpus", 300.0, criterion_pipeline},
  };

  int only = 0;
  if (argc > 1) {
    only = std::atoi(argv[1]);
    if (only < 1 || only > int(criteria.size())) {
      std::cerr << "usage: acceptance [1-" << criteria.size() << "]\n";
      return 2;
    }
  }

  int failures = 0;
  for (const auto& c : criteria) {
    if (only != 0 && c.number != only) continue;
    std::string log;
    bool ok = false;
    double elapsed = 0.0;
    try {
      const auto t0 = std::chrono::steady_clock::now();
      ok = c.run(log);
      elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (c.budget_s > 0.0 && elapsed > c.budget_s) {
        ok = false;
        log += "\n  over budget: " + std::to_string(elapsed) + " s > " +
               std::to_string(c.budget_s) + " s";
      }
    } catch (const std::exception& e) {
      ok = false;
      log += std::string("\n  exception: ") + e.what();
    }
    std::printf("[%s] criterion %d: %s (%.2f s)\n", ok ? "PASS" : "FAIL", c.number, c.title,
                elapsed);
    if (!log.empty()) std::printf("%s\n", log.c_str());
    if (!ok) ++failures;
  }
  return failures;
}
