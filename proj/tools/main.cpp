#include <exception>
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "tabadm/errors.hpp"

namespace {

void add_tabadm_options(CLI::App* cmd, tabadm::cli::TabadmOptions& o) {
  cmd->add_option("--steps", o.steps, "Training steps")->capture_default_str();
  cmd->add_option("--batch", o.batch, "Batch size k")->capture_default_str();
  cmd->add_option("--reject", o.reject,
                  "Highest-loss samples dropped per batch (m)")
      ->capture_default_str();
  cmd->add_option("--timesteps", o.timesteps, "Diffusion chain length T")
      ->capture_default_str();
  cmd->add_option("--hidden", o.hidden,
                  "FC width (0 = pick from feature count)")
      ->capture_default_str();
  cmd->add_option("--time-embed-dim", o.time_embed_dim,
                  "Sinusoidal time embedding size")
      ->capture_default_str();
  cmd->add_option("--lr", o.lr, "Learning rate (0 = pick from feature count)")
      ->capture_default_str();
  cmd->add_option("--weight-decay", o.weight_decay, "Coupled L2 weight decay")
      ->capture_default_str();
  cmd->add_option("--beta-start", o.beta_start,
                  "First beta of the linear schedule")
      ->capture_default_str();
  cmd->add_option("--beta-end", o.beta_end, "Last beta of the linear schedule")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "tabadm: unsupervised tabular anomaly detection with a denoising "
      "diffusion density model"};
  app.require_subcommand(1);

  tabadm::cli::TrainArgs train_args;
  auto* train_cmd = app.add_subcommand(
      "train", "Fit a model on a CSV and write a checkpoint");
  train_cmd->add_option("--data", train_args.data, "Training CSV")->required();
  train_cmd->add_option("--label-col", train_args.label_col,
                        "Label column to strip (training is unsupervised)");
  train_cmd->add_option("--out", train_args.out, "Checkpoint output path")
      ->required();
  train_cmd->add_option("--seed", train_args.seed, "Training seed")
      ->capture_default_str();
  train_cmd
      ->add_option("--progress-every", train_args.progress_every,
                   "Progress cadence in steps (0 = quiet)")
      ->capture_default_str();
  add_tabadm_options(train_cmd, train_args.tab);
  train_cmd->add_option("--trace-data", train_args.trace_data,
                        "Labeled CSV scored periodically during training");
  train_cmd
      ->add_option("--trace-label-col", train_args.trace_label_col,
                   "Label column of the trace CSV")
      ->capture_default_str();
  train_cmd->add_option("--trace-every", train_args.trace_every,
                        "Trace cadence in steps");
  train_cmd->add_option("--trace-out", train_args.trace_out,
                        "Trace CSV output path (step,aucroc,ap)");
  train_cmd->callback([&train_args] { tabadm::cli::cmd_train(train_args); });

  tabadm::cli::ScoreArgs score_args;
  auto* score_cmd = app.add_subcommand(
      "score", "Score a CSV against a checkpoint (higher = more anomalous)");
  score_cmd->add_option("--model", score_args.model, "Checkpoint path")
      ->required();
  score_cmd->add_option("--data", score_args.data, "Test CSV")->required();
  score_cmd->add_option("--label-col", score_args.label_col,
                        "Label column, echoed into the output");
  score_cmd->add_option("--out", score_args.out, "Score CSV output path")
      ->required();
  score_cmd->add_option("--seed", score_args.seed, "Inference noise seed")
      ->capture_default_str();
  score_cmd->add_option("--threads", score_args.threads, "Scoring threads")
      ->capture_default_str();
  score_cmd->add_flag("--fresh-noise", score_args.fresh_noise,
                      "Per-sample noise instead of one shared matrix");
  score_cmd->callback([&score_args] { tabadm::cli::cmd_score(score_args); });

  tabadm::cli::EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand(
      "eval", "Compute AUCROC/AP from a score CSV (JSON to stdout or --out)");
  eval_cmd->add_option("--scores", eval_args.scores, "Score CSV")->required();
  eval_cmd->add_option("--labels", eval_args.labels,
                       "Separate labeled CSV (default: label column in the "
                       "score file)");
  eval_cmd
      ->add_option("--label-col", eval_args.label_col,
                   "Label column of the --labels file")
      ->capture_default_str();
  eval_cmd->add_option("--out", eval_args.out, "Metrics JSON output path");
  eval_cmd->callback([&eval_args] { tabadm::cli::cmd_eval(eval_args); });

  tabadm::cli::BenchArgs bench_args;
  auto* bench_cmd = app.add_subcommand(
      "bench",
      "Repeated stratified 70/30 benchmark of tabadm/knn/hbos on CSV datasets");
  bench_cmd->add_option("--data", bench_args.data, "Dataset CSVs")->required();
  bench_cmd->add_option("--label-col", bench_args.label_col, "Label column")
      ->capture_default_str();
  bench_cmd->add_option("--methods", bench_args.methods, "Methods to run")
      ->capture_default_str();
  bench_cmd->add_option("--repeats", bench_args.repeats, "Seeded repetitions")
      ->capture_default_str();
  bench_cmd
      ->add_option("--seed-base", bench_args.seed_base,
                   "First seed; repeats use seed-base .. seed-base+repeats-1")
      ->capture_default_str();
  bench_cmd->add_option("--train-frac", bench_args.train_frac,
                        "Training fraction of each split")
      ->capture_default_str();
  bench_cmd
      ->add_option("--truncate", bench_args.truncate,
                   "Stratified row cap applied before splitting (0 = off)")
      ->capture_default_str();
  bench_cmd->add_option("--knn-k", bench_args.knn_k, "KNN neighbor count")
      ->capture_default_str();
  bench_cmd->add_option("--hbos-bins", bench_args.hbos_bins,
                        "HBOS bins per feature")
      ->capture_default_str();
  bench_cmd->add_option("--threads", bench_args.threads, "Scoring threads")
      ->capture_default_str();
  bench_cmd
      ->add_option("--progress-every", bench_args.progress_every,
                   "Training progress cadence (0 = quiet)")
      ->capture_default_str();
  add_tabadm_options(bench_cmd, bench_args.tab);
  bench_cmd->add_option("--out", bench_args.out, "Results JSON (upserted)")
      ->capture_default_str();
  bench_cmd->callback([&bench_args] { tabadm::cli::cmd_bench(bench_args); });

  tabadm::cli::ContaminationArgs contamination_args;
  auto* contamination_cmd = app.add_subcommand(
      "exp-contamination",
      "Sweep training contamination ratios against a fixed-ratio test set");
  contamination_cmd
      ->add_option("--data", contamination_args.data, "Dataset CSV")
      ->required();
  contamination_cmd
      ->add_option("--label-col", contamination_args.label_col, "Label column")
      ->capture_default_str();
  contamination_cmd
      ->add_option("--ratios", contamination_args.ratios,
                   "Training contamination ratios")
      ->capture_default_str();
  contamination_cmd
      ->add_option("--test-ratio", contamination_args.test_ratio,
                   "Fixed test-set contamination ratio")
      ->capture_default_str();
  contamination_cmd
      ->add_option("--repeats", contamination_args.repeats,
                   "Seeded repetitions")
      ->capture_default_str();
  contamination_cmd
      ->add_option("--seed-base", contamination_args.seed_base, "First seed")
      ->capture_default_str();
  contamination_cmd
      ->add_option("--train-frac", contamination_args.train_frac,
                   "Training fraction of each split")
      ->capture_default_str();
  contamination_cmd
      ->add_option("--threads", contamination_args.threads, "Scoring threads")
      ->capture_default_str();
  contamination_cmd
      ->add_option("--progress-every", contamination_args.progress_every,
                   "Training progress cadence (0 = quiet)")
      ->capture_default_str();
  add_tabadm_options(contamination_cmd, contamination_args.tab);
  contamination_cmd
      ->add_option("--out", contamination_args.out_json, "Results JSON path")
      ->capture_default_str();
  contamination_cmd
      ->add_option("--csv", contamination_args.out_csv, "Series CSV path")
      ->capture_default_str();
  contamination_cmd->callback([&contamination_args] {
    tabadm::cli::cmd_exp_contamination(contamination_args);
  });

  tabadm::cli::RejectionArgs rejection_args;
  auto* rejection_cmd = app.add_subcommand(
      "exp-rejection", "Sweep the per-batch rejection count m");
  rejection_cmd->add_option("--data", rejection_args.data, "Dataset CSV")
      ->required();
  rejection_cmd
      ->add_option("--label-col", rejection_args.label_col, "Label column")
      ->capture_default_str();
  rejection_cmd
      ->add_option("--m-values", rejection_args.m_values,
                   "Rejection counts to sweep")
      ->capture_default_str();
  rejection_cmd
      ->add_option("--repeats", rejection_args.repeats, "Seeded repetitions")
      ->capture_default_str();
  rejection_cmd
      ->add_option("--seed-base", rejection_args.seed_base, "First seed")
      ->capture_default_str();
  rejection_cmd
      ->add_option("--train-frac", rejection_args.train_frac,
                   "Training fraction of each split")
      ->capture_default_str();
  rejection_cmd
      ->add_option("--threads", rejection_args.threads, "Scoring threads")
      ->capture_default_str();
  rejection_cmd
      ->add_option("--progress-every", rejection_args.progress_every,
                   "Training progress cadence (0 = quiet)")
      ->capture_default_str();
  add_tabadm_options(rejection_cmd, rejection_args.tab);
  rejection_cmd
      ->add_option("--out", rejection_args.out_json, "Results JSON path")
      ->capture_default_str();
  rejection_cmd
      ->add_option("--csv", rejection_args.out_csv, "Series CSV path")
      ->capture_default_str();
  rejection_cmd->callback(
      [&rejection_args] { tabadm::cli::cmd_exp_rejection(rejection_args); });

  tabadm::cli::RanksArgs ranks_args;
  auto* ranks_cmd = app.add_subcommand(
      "ranks",
      "Average method ranks vs dimension-percentile cutoff from a results "
      "JSON");
  ranks_cmd->add_option("--results", ranks_args.results, "Results JSON")
      ->required();
  ranks_cmd->add_option("--metric", ranks_args.metric, "aucroc or ap")
      ->capture_default_str();
  ranks_cmd->add_option("--methods", ranks_args.methods,
                        "Methods to rank (default: all in the file)");
  ranks_cmd->add_option("--tau-max", ranks_args.tau_max, "Largest percentile")
      ->capture_default_str();
  ranks_cmd->add_option("--tau-step", ranks_args.tau_step, "Percentile step")
      ->capture_default_str();
  ranks_cmd->add_option("--out", ranks_args.out, "Series CSV path")
      ->capture_default_str();
  ranks_cmd->callback([&ranks_args] { tabadm::cli::cmd_ranks(ranks_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const tabadm::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
