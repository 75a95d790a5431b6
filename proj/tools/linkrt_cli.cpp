// linkrt command line: the train / evaluate / plan / bench pipeline.
//
//   train     run the sampling protocol on a dataset pair, fit all model
//             families per measure, write model files and sample CSVs
//   evaluate  time joins on the full tables and report per-family RMSE
//             between predicted and measured runtimes
//   plan      show canonical and cost-based plans for a specification under
//             every trained model family
//   bench     execute random specifications under every strategy and verify
//             all of them produce identical mappings
//
// The default seed is 42; the LINKRT_SEED environment variable overrides it
// and an explicit --seed overrides both.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "linkrt/linkrt.hpp"

namespace {

using namespace linkrt;

TableFormat resolve_format(const std::string& path, const std::string& format) {
  if (format == "ntriples") return TableFormat::ntriples;
  if (format == "tsv") return TableFormat::tsv;
  if (format != "auto") throw std::runtime_error("unknown format: " + format);
  const std::string ext = std::filesystem::path(path).extension().string();
  if (ext == ".nt" || ext == ".ntriples") return TableFormat::ntriples;
  if (ext == ".tsv") return TableFormat::tsv;
  throw std::runtime_error("cannot infer format of " + path + "; pass --format");
}

ResourceTable load(const std::string& path, const std::string& format) {
  return load_table(path, resolve_format(path, format));
}

std::vector<MeasureKind> resolve_measures(const std::vector<std::string>& names) {
  std::vector<MeasureKind> out;
  for (const auto& name : names) {
    if (name == "all") {
      out.assign(std::begin(kAllMeasures), std::end(kAllMeasures));
      return out;
    }
    out.push_back(measure_from_name(name));
  }
  return out;
}

std::string model_path(const std::string& dir, MeasureKind measure, ModelFamily family) {
  return dir + "/" + std::string(measure_name(measure)) + "." + std::string(family_name(family)) +
         ".model";
}

/// Loads every <measure>.<family>.model present in the directory for one
/// family; at least one must exist.
std::map<MeasureKind, RuntimeModel> load_family_models(const std::string& dir, ModelFamily family) {
  std::map<MeasureKind, RuntimeModel> out;
  for (MeasureKind measure : kAllMeasures) {
    const std::string path = model_path(dir, measure, family);
    if (!std::filesystem::exists(path)) continue;
    out.emplace(measure, read_model_file(path).first);
  }
  if (out.empty())
    throw std::runtime_error("no " + std::string(family_name(family)) + " model files in " + dir);
  return out;
}

struct CommonOpts {
  std::string source;
  std::string target;
  std::string format = "auto";
  std::string source_prop = "title";
  std::string target_prop = "title";
  std::uint64_t seed = 42;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool tables_required) {
  auto* src = cmd->add_option("--source", o.source, "Source table path");
  auto* tgt = cmd->add_option("--target", o.target, "Target table path");
  if (tables_required) {
    src->required();
    tgt->required();
  }
  cmd->add_option("--format", o.format, "Table format: auto, ntriples, tsv")
      ->capture_default_str();
  cmd->add_option("--source-prop", o.source_prop, "Source property")->capture_default_str();
  cmd->add_option("--target-prop", o.target_prop, "Target property")->capture_default_str();
  cmd->add_option("--seed", o.seed, "Random seed")->envname("LINKRT_SEED")->capture_default_str();
}

void add_protocol(CLI::App* cmd, TrainingProtocol& p) {
  cmd->add_option("--n-source", p.n_source, "Source samples")->capture_default_str();
  cmd->add_option("--n-target", p.n_target, "Target samples")->capture_default_str();
  cmd->add_option("--repetitions", p.repetitions, "Timed repetitions per run")
      ->capture_default_str();
  cmd->add_option("--theta-low", p.theta_low, "Threshold range low")->capture_default_str();
  cmd->add_option("--theta-high", p.theta_high, "Threshold range high")->capture_default_str();
  cmd->add_option("--size-low", p.size_low, "Sample size low")->capture_default_str();
  cmd->add_option("--size-high", p.size_high, "Sample size high")->capture_default_str();
}

int run_train(const CommonOpts& common, const TrainingProtocol& protocol_in,
              const std::vector<std::string>& measure_names, const std::string& out_dir) {
  TrainingProtocol protocol = protocol_in;
  protocol.seed = common.seed;
  const ResourceTable source = load(common.source, common.format);
  const ResourceTable target = load(common.target, common.format);
  std::filesystem::create_directories(out_dir);

  std::map<MeasureKind, std::vector<SampleRun>> all_runs;
  for (MeasureKind measure : resolve_measures(measure_names)) {
    const CollectResult collected =
        collect_runs(measure, source, target, common.source_prop, common.target_prop, protocol);
    for (const auto& w : collected.warnings)
      std::cerr << "warning: " << measure_name(measure) << ": " << w << "\n";
    std::vector<TrainingSample> samples;
    samples.reserve(collected.runs.size());
    for (const auto& r : collected.runs) samples.push_back(r.sample);
    write_samples_csv(samples, out_dir + "/" + std::string(measure_name(measure)) +
                                   ".samples.csv");

    const std::string metadata = "measure=" + std::string(measure_name(measure)) +
                                 ";samples=" + std::to_string(samples.size()) +
                                 ";warmup=1;seed=" + std::to_string(protocol.seed);
    const auto fitted = train_all(samples, metadata);
    for (const auto& [family, pair] : fitted) {
      const auto& [model, report] = pair;
      write_model_file(model, report.loss, model_path(out_dir, measure, family));
      std::cout << measure_name(measure) << " " << family_name(family)
                << ": loss " << report.loss << (report.converged ? "" : " (not converged)")
                << "\n";
    }
    all_runs.emplace(measure, collected.runs);
  }
  write_size_model(build_size_model(all_runs), out_dir + "/sizes.model");
  std::cout << "models written to " << out_dir << "\n";
  return 0;
}

int run_evaluate(const CommonOpts& common, const TrainingProtocol& protocol_in,
                 const std::vector<std::string>& measure_names, const std::string& models_dir,
                 const std::string& out_dir, std::size_t n_runs, bool plot_data) {
  TrainingProtocol protocol = protocol_in;
  protocol.seed = common.seed;
  const ResourceTable source = load(common.source, common.format);
  const ResourceTable target = load(common.target, common.format);
  std::filesystem::create_directories(out_dir);

  for (MeasureKind measure : resolve_measures(measure_names)) {
    std::map<ModelFamily, RuntimeModel> models;
    for (ModelFamily family : kAllFamilies)
      models.emplace(family, read_model_file(model_path(models_dir, measure, family)).first);

    const auto [records, errors] =
        evaluate_models(models, measure, source, target, common.source_prop, common.target_prop,
                        n_runs, protocol);
    const std::string base = out_dir + "/" + std::string(measure_name(measure));
    write_evaluation_csv(records, base + ".evaluation.csv");

    std::map<ModelFamily, double> mean_expected, mean_executed;
    std::map<ModelFamily, std::size_t> counts;
    for (const auto& r : records) {
      mean_expected[r.family] += r.expected_ms;
      mean_executed[r.family] += r.executed_ms;
      ++counts[r.family];
    }
    std::string table = "| Model | Expected (ms) | Execution (ms) | RMSE |\n"
                        "|---|---|---|---|\n";
    for (ModelFamily family : kAllFamilies) {
      const double n = double(counts.at(family));
      char row[160];
      std::snprintf(row, sizeof row, "| %s | %.3f | %.3f | %.3f |\n",
                    std::string(family_name(family)).c_str(), mean_expected.at(family) / n,
                    mean_executed.at(family) / n, errors.at(family));
      table += row;
    }
    std::ofstream md(base + ".rmse.md");
    if (!md) throw std::runtime_error("cannot write " + base + ".rmse.md");
    md << "# " << measure_name(measure) << " on " << source.size() << "x" << target.size()
       << " (" << n_runs << " runs)\n\n" << table;
    std::cout << "== " << measure_name(measure) << " ==\n" << table;

    if (plot_data) {
      // One row per run: run index, theta, measured, then per-family raw
      // predictions in family order.
      std::ofstream dat(base + ".evaluation.dat");
      if (!dat) throw std::runtime_error("cannot write " + base + ".evaluation.dat");
      dat << "# run theta executed_ms expected_linear expected_exp expected_mixed\n";
      const std::size_t families = counts.size();
      for (std::size_t run = 0; run * families < records.size(); ++run) {
        const auto& first = records[run * families];
        const std::size_t bar = first.spec_text.rfind('|');
        dat << run << " " << first.spec_text.substr(bar + 1) << " " << first.executed_ms;
        for (std::size_t f = 0; f < families; ++f)
          dat << " " << records[run * families + f].expected_ms;
        dat << "\n";
      }
    }
  }
  return 0;
}

int run_plan(const CommonOpts& common, const std::string& spec_text, const std::string& models_dir,
             bool execute) {
  const LinkSpecPtr spec = parse_ls(spec_text);
  const ResourceTable source = load(common.source, common.format);
  const ResourceTable target = load(common.target, common.format);
  const SizeModel sizes = read_size_model(models_dir + "/sizes.model");

  const Plan canonical = canonical_plan(*spec);
  std::cout << "== canonical ==\n" << plan_to_string(canonical);

  std::map<ModelFamily, Plan> plans;
  std::map<ModelFamily, std::string> rendered;
  for (ModelFamily family : kAllFamilies) {
    const auto models = load_family_models(models_dir, family);
    Plan plan = helios_plan(*spec, models, sizes, source, target);
    rendered[family] = plan_to_string(plan);
    std::cout << "== " << family_name(family) << " (estimated "
              << plan.estimated_cost_ms << " ms) ==\n" << rendered[family];
    for (const auto& d : plan.decisions) {
      std::cout << "   chose " << d.chosen << " (" << d.chosen_cost << " ms) over";
      for (std::size_t i = 0; i < d.rejected.size(); ++i)
        std::cout << (i ? ", " : " ") << d.rejected[i].first << " (" << d.rejected[i].second
                  << " ms)";
      std::cout << " at " << d.node << "\n";
    }
    plans.emplace(family, std::move(plan));
  }

  std::set<std::string> distinct;
  for (const auto& [family, text] : rendered) distinct.insert(text);
  if (distinct.size() > 1) {
    std::cout << "plans differ between model families\n";
  } else {
    std::cout << "all model families produce the same plan\n";
  }

  if (execute) {
    const auto [reference, ref_ms] = execute_plan(canonical, source, target);
    double total = 0.0;
    for (double ms : ref_ms) total += ms;
    std::cout << "canonical: " << reference.size() << " pairs in " << total << " ms\n";
    for (const auto& [family, plan] : plans) {
      const auto [mapping, step_ms] = execute_plan(plan, source, target);
      total = 0.0;
      for (double ms : step_ms) total += ms;
      std::cout << family_name(family) << ": " << mapping.size() << " pairs in " << total
                << " ms\n";
      if (!(mapping == reference)) {
        std::cerr << "error: " << family_name(family)
                  << " plan mapping differs from canonical\n";
        return 1;
      }
    }
  }
  return 0;
}

int run_bench(const CommonOpts& common, const std::string& models_dir, std::size_t count,
              std::size_t max_depth, std::size_t sample_size) {
  ResourceTable source = load(common.source, common.format);
  ResourceTable target = load(common.target, common.format);
  if (sample_size > 0) {
    if (source.size() > sample_size) source = sample_table(source, sample_size, common.seed);
    if (target.size() > sample_size) target = sample_table(target, sample_size, common.seed + 1);
  }
  const SizeModel sizes = read_size_model(models_dir + "/sizes.model");
  std::map<ModelFamily, std::map<MeasureKind, RuntimeModel>> models;
  for (ModelFamily family : kAllFamilies) models[family] = load_family_models(models_dir, family);

  std::vector<AtomicTemplate> templates;
  for (MeasureKind measure : kAllMeasures) {
    if (!models.at(ModelFamily::linear).count(measure)) continue;
    templates.push_back({measure, common.source_prop, common.target_prop});
  }
  if (templates.empty()) throw std::runtime_error("no measures with trained models");

  Rng rng(common.seed);
  std::map<std::string, double> totals;
  std::size_t mismatches = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t depth = std::size_t(uniform_u64(rng, max_depth + 1));
    const LinkSpecPtr spec = random_spec(depth, templates, rng());

    const auto [reference, canon_ms] = execute_plan(canonical_plan(*spec), source, target);
    for (double ms : canon_ms) totals["canonical"] += ms;

    for (ModelFamily family : kAllFamilies) {
      const Plan plan = helios_plan(*spec, models.at(family), sizes, source, target);
      const auto [mapping, step_ms] = execute_plan(plan, source, target);
      for (double ms : step_ms) totals[std::string(family_name(family))] += ms;
      if (!(mapping == reference)) {
        ++mismatches;
        std::cerr << "mismatch under " << family_name(family) << ": " << unparse(*spec) << "\n";
      }
    }

    // Brute-force oracle on small sub-tables.
    const ResourceTable s_sub =
        source.size() > 30 ? sample_table(source, 30, common.seed + 100 + i) : source;
    const ResourceTable t_sub =
        target.size() > 30 ? sample_table(target, 30, common.seed + 200 + i) : target;
    const Mapping oracle = eval_semantics(*spec, s_sub, t_sub);
    const auto [sub_map, sub_ms] = execute_plan(canonical_plan(*spec), s_sub, t_sub);
    if (!(sub_map == oracle)) {
      ++mismatches;
      std::cerr << "semantics mismatch: " << unparse(*spec) << "\n";
    }
  }

  std::cout << count << " specifications on " << source.size() << "x" << target.size()
            << " tables\n";
  for (const auto& [strategy, ms] : totals)
    std::cout << "  " << strategy << ": " << ms << " ms total\n";
  if (mismatches > 0) {
    std::cerr << "error: " << mismatches << " mapping mismatches\n";
    return 1;
  }
  std::cout << "all strategies produced identical mappings\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Link discovery runtime estimation toolkit"};
  app.require_subcommand(1);
  // --config may appear after the subcommand name; fallthrough routes it here.
  app.fallthrough();
  app.set_config("--config", "", "INI config file, one section per subcommand");
  app.allow_config_extras(false);

  CommonOpts train_common, eval_common, plan_common, bench_common;
  TrainingProtocol train_protocol, eval_protocol;
  std::vector<std::string> train_measures{"all"}, eval_measures{"all"};
  std::string train_out = "out";
  std::string eval_models = "out", eval_out = "out";
  std::size_t eval_runs = 100;
  bool eval_plot = false;
  std::string plan_spec, plan_models = "out";
  bool plan_execute = false;
  std::string bench_models = "out";
  std::size_t bench_count = 100, bench_depth = 3, bench_sample = 100;

  CLI::App* train = app.add_subcommand("train", "Collect samples and fit runtime models");
  add_common(train, train_common, true);
  add_protocol(train, train_protocol);
  train->add_option("--measure", train_measures, "Measures to train (or 'all')")
      ->capture_default_str();
  train->add_option("--out", train_out, "Output directory")->capture_default_str();

  CLI::App* evaluate = app.add_subcommand("evaluate", "Compare predictions against timings");
  add_common(evaluate, eval_common, true);
  add_protocol(evaluate, eval_protocol);
  evaluate->add_option("--measure", eval_measures, "Measures to evaluate (or 'all')")
      ->capture_default_str();
  evaluate->add_option("--models", eval_models, "Directory with trained models")
      ->capture_default_str();
  evaluate->add_option("--out", eval_out, "Output directory")->capture_default_str();
  evaluate->add_option("--runs", eval_runs, "Evaluation runs")->capture_default_str();
  evaluate->add_flag("--plot-data", eval_plot, "Also write gnuplot-ready .dat files");

  CLI::App* plan = app.add_subcommand("plan", "Show plans for a specification");
  add_common(plan, plan_common, true);
  plan->add_option("--spec", plan_spec, "Link specification text")->required();
  plan->add_option("--models", plan_models, "Directory with trained models")
      ->capture_default_str();
  plan->add_flag("--execute", plan_execute, "Execute all plans and compare mappings");

  CLI::App* bench = app.add_subcommand("bench", "Random-specification strategy comparison");
  add_common(bench, bench_common, true);
  bench->add_option("--models", bench_models, "Directory with trained models")
      ->capture_default_str();
  bench->add_option("--count", bench_count, "Number of random specifications")
      ->capture_default_str();
  bench->add_option("--depth", bench_depth, "Maximum operator depth")->capture_default_str();
  bench->add_option("--sample-size", bench_sample,
                    "Sample tables down to this size first (0 keeps them whole)")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed())
      return run_train(train_common, train_protocol, train_measures, train_out);
    if (evaluate->parsed())
      return run_evaluate(eval_common, eval_protocol, eval_measures, eval_models, eval_out,
                          eval_runs, eval_plot);
    if (plan->parsed()) return run_plan(plan_common, plan_spec, plan_models, plan_execute);
    if (bench->parsed())
      return run_bench(bench_common, bench_models, bench_count, bench_depth, bench_sample);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
