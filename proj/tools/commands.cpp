#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "common.hpp"
#include "tabadm/data.hpp"
#include "tabadm/detectors.hpp"
#include "tabadm/errors.hpp"
#include "tabadm/metrics.hpp"
#include "tabadm/model.hpp"
#include "tabadm/ranks.hpp"
#include "tabadm/scorer.hpp"
#include "tabadm/trainer.hpp"

namespace tabadm::cli {
namespace {

using nlohmann::json;

// Inference noise must not reuse the training stream: every command that both
// trains and scores derives the score seed from the train seed by this offset.
constexpr std::uint64_t kScoreSeedOffset = 100000;

TrainConfig to_train_config(const TabadmOptions& o, std::uint64_t seed) {
  TrainConfig c;
  c.steps = o.steps;
  c.batch_size = o.batch;
  c.reject_count = o.reject;
  c.learning_rate = o.lr;
  c.weight_decay = o.weight_decay;
  c.timesteps = o.timesteps;
  c.beta_start = o.beta_start;
  c.beta_end = o.beta_end;
  c.seed = seed;
  return c;
}

ModelConfig to_model_config(const TabadmOptions& o, Index input_dim) {
  ModelConfig m;
  m.input_dim = input_dim;
  m.hidden = o.hidden;
  m.time_embed_dim = o.time_embed_dim;
  return m;
}

json tabadm_config_json(const TabadmOptions& o, Index input_dim) {
  ModelConfig m = to_model_config(o, input_dim);
  m.resolve();
  const double lr = o.lr == 0.0 ? learning_rate_for(input_dim) : o.lr;
  return json{{"steps", o.steps},
              {"batch", o.batch},
              {"reject", o.reject},
              {"timesteps", o.timesteps},
              {"hidden", m.hidden},
              {"time_embed_dim", o.time_embed_dim},
              {"learning_rate", lr},
              {"weight_decay", o.weight_decay},
              {"beta_start", o.beta_start},
              {"beta_end", o.beta_end}};
}

ProgressFn stderr_progress(std::string tag, Index every, Index total) {
  if (every <= 0) return {};
  return [tag = std::move(tag), every, total](Index step,
                                              const StepDiagnostics& diag) {
    if (step % every == 0 || step == total)
      std::cerr << tag << " step " << step << "/" << total << "  t=" << diag.t
                << "  kept-loss " << fmt(diag.mean_kept_loss) << "\n";
  };
}

struct FitScore {
  double aucroc = 0.0;
  double ap = 0.0;
};

// Labels never reach the trainer: this is the one place experiments hand data
// to TabADM, and only the feature matrix crosses the line.
FitScore run_tabadm(const Dataset& train_ds, const Dataset& test_ds,
                    const TabadmOptions& opt, std::uint64_t seed, int threads,
                    const std::string& tag, Index progress_every) {
  const Normalizer norm = fit_normalizer(train_ds.X);
  const Matrix xn = apply_normalizer(norm, train_ds.X);
  const TrainResult result =
      train(xn, to_train_config(opt, seed), to_model_config(opt, train_ds.dim()),
            norm, nullptr, stderr_progress(tag, progress_every, opt.steps));
  const ScoreRun run =
      score_set(result.checkpoint, test_ds.X, seed + kScoreSeedOffset, threads);
  FitScore fs;
  fs.aucroc = aucroc(run.scores, test_ds.labels);
  fs.ap = average_precision(run.scores, test_ds.labels);
  return fs;
}

FitScore run_reference(const std::string& method, const Dataset& train_ds,
                       const Dataset& test_ds, Index knn_k, Index hbos_bins) {
  const Normalizer norm = fit_normalizer(train_ds.X);
  const Matrix train_x = apply_normalizer(norm, train_ds.X);
  const Matrix test_x = apply_normalizer(norm, test_ds.X);
  std::vector<double> scores;
  if (method == "knn")
    scores = knn_score(train_x, test_x, knn_k);
  else if (method == "hbos")
    scores = hbos_score(train_x, test_x, hbos_bins);
  else
    throw ConfigError("unknown method '" + method + "'");
  FitScore fs;
  fs.aucroc = aucroc(scores, test_ds.labels);
  fs.ap = average_precision(scores, test_ds.labels);
  return fs;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

json metric_json(const std::vector<double>& per_seed) {
  return json{{"mean", mean_of(per_seed)}, {"per_seed", per_seed}};
}

std::vector<double> column_of(const Dataset& ds, const std::string& name,
                              const std::string& path) {
  for (Index j = 0; j < ds.dim(); ++j) {
    if (ds.feature_names[static_cast<std::size_t>(j)] == name) {
      std::vector<double> out(static_cast<std::size_t>(ds.n()));
      for (Index i = 0; i < ds.n(); ++i)
        out[static_cast<std::size_t>(i)] = ds.X(i, j);
      return out;
    }
  }
  throw ConfigError("column '" + name + "' not found in " + path);
}

}  // namespace

void cmd_train(const TrainArgs& args) {
  const Dataset ds = load_csv(args.data, args.label_col);
  const Normalizer norm = fit_normalizer(ds.X);
  const Matrix xn = apply_normalizer(norm, ds.X);

  TrainConfig tc = to_train_config(args.tab, args.seed);
  EvalHook hook;
  const EvalHook* hook_ptr = nullptr;
  if (!args.trace_data.empty()) {
    if (args.trace_every <= 0)
      throw ConfigError("--trace-every must be > 0 when --trace-data is given");
    const Dataset trace = load_csv(args.trace_data, args.trace_label_col);
    hook.x = trace.X;
    hook.labels = trace.labels;
    hook.noise_seed = args.seed + kScoreSeedOffset;
    hook_ptr = &hook;
    tc.eval_every = args.trace_every;
  } else if (!args.trace_out.empty()) {
    throw ConfigError("--trace-out requires --trace-data");
  }

  const TrainResult result =
      train(xn, tc, to_model_config(args.tab, ds.dim()), norm, hook_ptr,
            stderr_progress("[train]", args.progress_every, args.tab.steps));
  save_checkpoint(result.checkpoint, args.out);
  std::cerr << "[train] n=" << ds.n() << " d=" << ds.dim() << " steps="
            << args.tab.steps << " -> " << args.out << "\n";

  if (!args.trace_out.empty()) {
    std::ostringstream csv;
    csv << "step,aucroc,ap\n";
    for (const TracePoint& tp : result.trace)
      csv << tp.step << "," << fmt(tp.aucroc) << "," << fmt(tp.ap) << "\n";
    write_text_file(args.trace_out, csv.str());
    std::cerr << "[train] trace (" << result.trace.size() << " points) -> "
              << args.trace_out << "\n";
  }
}

void cmd_score(const ScoreArgs& args) {
  const Checkpoint ck = load_checkpoint(args.model);
  const Dataset ds = load_csv(args.data, args.label_col);
  const ScoreRun run =
      score_set(ck, ds.X, args.seed, args.threads, args.fresh_noise);

  std::ostringstream csv;
  csv << "row_index,score";
  if (ds.has_labels()) csv << ",label";
  csv << "\n";
  for (std::size_t i = 0; i < run.scores.size(); ++i) {
    csv << i << "," << fmt(run.scores[i]);
    if (ds.has_labels()) csv << "," << ds.labels[i];
    csv << "\n";
  }
  write_text_file(args.out, csv.str());
  std::cerr << "[score] " << run.scores.size() << " samples (noise seed "
            << args.seed << ") -> " << args.out << "\n";
}

void cmd_eval(const EvalArgs& args) {
  std::vector<double> scores;
  std::vector<int> labels;
  if (!args.labels.empty()) {
    scores = column_of(load_csv(args.scores), "score", args.scores);
    labels = load_csv(args.labels, args.label_col).labels;
  } else {
    const Dataset s = load_csv(args.scores, "label");
    scores = column_of(s, "score", args.scores);
    labels = s.labels;
  }
  if (scores.size() != labels.size())
    throw ConfigError("score/label row counts differ: " +
                      std::to_string(scores.size()) + " vs " +
                      std::to_string(labels.size()));

  const MetricResult m = evaluate(scores, labels);
  const json j{{"format_version", 1},
               {"aucroc", m.aucroc},
               {"ap", m.ap},
               {"n_pos", m.n_pos},
               {"n_neg", m.n_neg}};
  if (args.out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    write_json_file(args.out, j);
    std::cerr << "[eval] AUCROC " << fmt(m.aucroc) << "  AP " << fmt(m.ap)
              << " -> " << args.out << "\n";
  }
}

void cmd_bench(const BenchArgs& args) {
  if (args.data.empty())
    throw ConfigError("bench: at least one --data file is required");
  if (args.repeats < 1) throw ConfigError("bench: --repeats must be >= 1");

  std::vector<std::string> methods;
  for (const std::string& m : args.methods) {
    if (m != "tabadm" && m != "knn" && m != "hbos")
      throw ConfigError("unknown method '" + m +
                        "' (choose from tabadm, knn, hbos)");
    if (std::find(methods.begin(), methods.end(), m) == methods.end())
      methods.push_back(m);
  }
  if (methods.empty()) throw ConfigError("bench: no methods selected");

  json root;
  if (std::filesystem::exists(args.out)) {
    root = read_json_file(args.out);
    if (root.value("format_version", 0) != 1)
      throw ConfigError(args.out + ": unsupported results format_version");
  } else {
    root = json{{"format_version", 1}, {"datasets", json::object()}};
  }

  for (const std::string& path : args.data) {
    const std::string name = dataset_name(path);
    Dataset ds = load_csv(path, args.label_col);
    if (args.truncate > 0 && ds.n() > args.truncate)
      ds = stratified_truncate(ds, args.truncate, args.seed_base);

    std::map<std::string, std::vector<double>> auc;
    std::map<std::string, std::vector<double>> ap;
    std::vector<std::uint64_t> seeds;
    for (int rep = 0; rep < args.repeats; ++rep) {
      const std::uint64_t seed = args.seed_base + static_cast<std::uint64_t>(rep);
      seeds.push_back(seed);
      const SplitResult split = stratified_split(ds, args.train_frac, seed);
      for (const std::string& method : methods) {
        FitScore fs;
        if (method == "tabadm") {
          fs = run_tabadm(split.train, split.test, args.tab, seed, args.threads,
                          "[bench " + name + " seed " + std::to_string(seed) + "]",
                          args.progress_every);
        } else {
          fs = run_reference(method, split.train, split.test, args.knn_k,
                             args.hbos_bins);
        }
        auc[method].push_back(fs.aucroc);
        ap[method].push_back(fs.ap);
        std::cerr << "[bench] " << name << " seed " << seed << " " << method
                  << "  AUCROC " << fmt(fs.aucroc) << "  AP " << fmt(fs.ap)
                  << "\n";
      }
    }

    json& entry = root["datasets"][name];
    entry["path"] = path;
    entry["n"] = ds.n();
    entry["dim"] = ds.dim();
    entry["anomaly_rate"] = ds.anomaly_rate();
    entry["train_frac"] = args.train_frac;
    entry["seeds"] = seeds;
    if (!entry.contains("methods")) entry["methods"] = json::object();
    for (const std::string& method : methods) {
      json m;
      if (method == "tabadm")
        m["config"] = tabadm_config_json(args.tab, ds.dim());
      else if (method == "knn")
        m["config"] = json{{"k", args.knn_k}};
      else
        m["config"] = json{{"bins", args.hbos_bins}};
      m["aucroc"] = metric_json(auc[method]);
      m["ap"] = metric_json(ap[method]);
      entry["methods"][method] = std::move(m);
    }

    for (const std::string& method : methods)
      std::cerr << "[bench] " << name << " " << method << "  mean AUCROC "
                << fmt(mean_of(auc[method])) << "  mean AP "
                << fmt(mean_of(ap[method])) << "  (" << args.repeats
                << " seeds)\n";
  }

  write_json_file(args.out, root);
  std::cerr << "[bench] results -> " << args.out << "\n";
}

void cmd_exp_contamination(const ContaminationArgs& args) {
  if (args.repeats < 1) throw ConfigError("--repeats must be >= 1");
  if (args.ratios.empty()) throw ConfigError("--ratios must not be empty");
  for (double c : args.ratios)
    if (!(c >= 0.0 && c < 1.0))
      throw ConfigError("contamination ratio must lie in [0, 1), got " +
                        fmt(c));

  const Dataset ds = load_csv(args.data, args.label_col);
  const std::string name = dataset_name(args.data);

  const std::size_t n_ratios = args.ratios.size();
  std::vector<std::vector<double>> auc(n_ratios), ap(n_ratios),
      achieved(n_ratios);
  std::vector<std::uint64_t> seeds;
  for (int rep = 0; rep < args.repeats; ++rep) {
    const std::uint64_t seed = args.seed_base + static_cast<std::uint64_t>(rep);
    seeds.push_back(seed);
    const SplitResult split = stratified_split(ds, args.train_frac, seed);
    for (std::size_t i = 0; i < n_ratios; ++i) {
      const double c = args.ratios[i];
      const ContaminationResult cont =
          build_contaminated(split.train, c, split.test, args.test_ratio, seed);
      const double got = static_cast<double>(cont.train_anomalies) /
                         static_cast<double>(cont.train.n());
      // Keep-all-inliers top-up can undershoot by at most one sample's worth.
      if (got > c + 1e-12 ||
          (c - got) * static_cast<double>(cont.train.n()) > 1.0 + 1e-9)
        throw std::runtime_error("contamination off target: requested " +
                                 fmt(c) + ", achieved " + fmt(got));
      const FitScore fs = run_tabadm(
          cont.train, cont.test, args.tab, seed, args.threads,
          "[contamination " + name + " seed " + std::to_string(seed) + " c=" +
              fmt(c) + "]",
          args.progress_every);
      auc[i].push_back(fs.aucroc);
      ap[i].push_back(fs.ap);
      achieved[i].push_back(got);
      std::cerr << "[contamination] " << name << " seed " << seed << " c="
                << fmt(c) << " (train " << cont.train.n() << " rows, "
                << cont.train_anomalies << " anomalies)  AUCROC "
                << fmt(fs.aucroc) << "  AP " << fmt(fs.ap) << "\n";
    }
  }

  json series = json::array();
  std::ostringstream csv;
  csv << "ratio,achieved_ratio,aucroc,ap\n";
  for (std::size_t i = 0; i < n_ratios; ++i) {
    series.push_back(json{{"ratio", args.ratios[i]},
                          {"achieved_ratio", metric_json(achieved[i])},
                          {"aucroc", metric_json(auc[i])},
                          {"ap", metric_json(ap[i])}});
    csv << fmt(args.ratios[i]) << "," << fmt(mean_of(achieved[i])) << ","
        << fmt(mean_of(auc[i])) << "," << fmt(mean_of(ap[i])) << "\n";
    std::cerr << "[contamination] " << name << " c=" << fmt(args.ratios[i])
              << "  mean AUCROC " << fmt(mean_of(auc[i])) << "  mean AP "
              << fmt(mean_of(ap[i])) << "\n";
  }

  const json j{{"format_version", 1},
               {"experiment", "contamination"},
               {"dataset", name},
               {"path", args.data},
               {"n", ds.n()},
               {"dim", ds.dim()},
               {"train_frac", args.train_frac},
               {"test_ratio", args.test_ratio},
               {"seeds", seeds},
               {"config", tabadm_config_json(args.tab, ds.dim())},
               {"series", series}};
  write_json_file(args.out_json, j);
  write_text_file(args.out_csv, csv.str());
  std::cerr << "[contamination] -> " << args.out_json << ", " << args.out_csv
            << "\n";
}

void cmd_exp_rejection(const RejectionArgs& args) {
  if (args.repeats < 1) throw ConfigError("--repeats must be >= 1");
  if (args.m_values.empty()) throw ConfigError("--m-values must not be empty");
  for (Index m : args.m_values)
    if (m < 0 || m >= args.tab.batch)
      throw ConfigError("rejection count " + std::to_string(m) +
                        " must satisfy 0 <= m < batch size " +
                        std::to_string(args.tab.batch));

  const Dataset ds = load_csv(args.data, args.label_col);
  const std::string name = dataset_name(args.data);

  const std::size_t n_m = args.m_values.size();
  std::vector<std::vector<double>> auc(n_m), ap(n_m);
  std::vector<std::uint64_t> seeds;
  for (int rep = 0; rep < args.repeats; ++rep) {
    const std::uint64_t seed = args.seed_base + static_cast<std::uint64_t>(rep);
    seeds.push_back(seed);
    const SplitResult split = stratified_split(ds, args.train_frac, seed);
    for (std::size_t i = 0; i < n_m; ++i) {
      TabadmOptions opt = args.tab;
      opt.reject = args.m_values[i];
      const FitScore fs = run_tabadm(
          split.train, split.test, opt, seed, args.threads,
          "[rejection " + name + " seed " + std::to_string(seed) + " m=" +
              std::to_string(opt.reject) + "]",
          args.progress_every);
      auc[i].push_back(fs.aucroc);
      ap[i].push_back(fs.ap);
      std::cerr << "[rejection] " << name << " seed " << seed << " m="
                << opt.reject << "  AUCROC " << fmt(fs.aucroc) << "  AP "
                << fmt(fs.ap) << "\n";
    }
  }

  json series = json::array();
  std::ostringstream csv;
  csv << "m,aucroc,ap\n";
  for (std::size_t i = 0; i < n_m; ++i) {
    series.push_back(json{{"m", args.m_values[i]},
                          {"aucroc", metric_json(auc[i])},
                          {"ap", metric_json(ap[i])}});
    csv << args.m_values[i] << "," << fmt(mean_of(auc[i])) << ","
        << fmt(mean_of(ap[i])) << "\n";
    std::cerr << "[rejection] " << name << " m=" << args.m_values[i]
              << "  mean AUCROC " << fmt(mean_of(auc[i])) << "  mean AP "
              << fmt(mean_of(ap[i])) << "\n";
  }

  const json j{{"format_version", 1},
               {"experiment", "rejection"},
               {"dataset", name},
               {"path", args.data},
               {"n", ds.n()},
               {"dim", ds.dim()},
               {"train_frac", args.train_frac},
               {"m_values", args.m_values},
               {"seeds", seeds},
               {"config", tabadm_config_json(args.tab, ds.dim())},
               {"series", series}};
  write_json_file(args.out_json, j);
  write_text_file(args.out_csv, csv.str());
  std::cerr << "[rejection] -> " << args.out_json << ", " << args.out_csv
            << "\n";
}

void cmd_ranks(const RanksArgs& args) {
  if (args.metric != "aucroc" && args.metric != "ap")
    throw ConfigError("--metric must be 'aucroc' or 'ap'");
  if (!(args.tau_step > 0.0)) throw ConfigError("--tau-step must be > 0");
  if (!(args.tau_max >= 0.0 && args.tau_max <= 70.0))
    throw ConfigError("--tau-max must lie in [0, 70]");

  const json root = read_json_file(args.results);
  if (root.value("format_version", 0) != 1)
    throw ConfigError(args.results + ": unsupported results format_version");
  if (!root.contains("datasets") || !root["datasets"].is_object() ||
      root["datasets"].empty())
    throw ConfigError(args.results + ": no datasets recorded");

  std::vector<std::string> methods = args.methods;
  if (methods.empty()) {
    std::set<std::string> all;
    for (const auto& [ds_name, entry] : root["datasets"].items())
      for (const auto& [m, value] : entry.at("methods").items()) {
        (void)value;
        all.insert(m);
      }
    methods.assign(all.begin(), all.end());
  } else {
    std::sort(methods.begin(), methods.end());
    methods.erase(std::unique(methods.begin(), methods.end()), methods.end());
  }
  if (methods.empty()) throw ConfigError(args.results + ": no methods recorded");

  RankTable table;
  table.methods = methods;
  for (const auto& [ds_name, entry] : root["datasets"].items()) {
    table.datasets.push_back(ds_name);
    table.dims.push_back(entry.at("dim").get<Index>());
  }
  table.scores.resize(static_cast<Index>(table.datasets.size()),
                      static_cast<Index>(methods.size()));
  for (std::size_t i = 0; i < table.datasets.size(); ++i) {
    const json& entry = root["datasets"][table.datasets[i]];
    for (std::size_t m = 0; m < methods.size(); ++m) {
      if (!entry.at("methods").contains(methods[m]))
        throw ConfigError("dataset '" + table.datasets[i] +
                          "' has no results for method '" + methods[m] + "'");
      table.scores(static_cast<Index>(i), static_cast<Index>(m)) =
          entry["methods"][methods[m]].at(args.metric).at("mean").get<double>();
    }
  }

  std::ostringstream csv;
  csv << "tau,n_datasets";
  for (const std::string& m : methods) csv << "," << m;
  csv << "\n";
  int emitted = 0;
  for (Index k = 0;; ++k) {
    const double tau = static_cast<double>(k) * args.tau_step;
    if (tau > args.tau_max + 1e-9) break;
    const double t = std::min(tau, args.tau_max);
    if (subgroup_size(table, t) == 0) {
      std::cerr << "[ranks] tau=" << fmt(t)
                << ": empty dataset subgroup, series ends here\n";
      break;
    }
    const std::vector<double> avg = rank_by_percentile(table, t);
    csv << fmt(t) << "," << subgroup_size(table, t);
    for (double a : avg) csv << "," << fmt(a);
    csv << "\n";
    ++emitted;
  }
  if (emitted == 0)
    throw ConfigError("dataset subgroup is already empty at tau=0");
  write_text_file(args.out, csv.str());
  std::cerr << "[ranks] " << emitted << " rows (" << args.metric << ") -> "
            << args.out << "\n";
}

}  // namespace tabadm::cli
