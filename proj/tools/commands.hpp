#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tabadm/types.hpp"

namespace tabadm::cli {

/// TabADM hyperparameters shared by every command that trains a model.
/// Zero values for hidden/lr mean "resolve from the feature count".
struct TabadmOptions {
  Index steps = 50000;
  Index batch = 8;
  Index reject = 1;
  Index timesteps = 100;
  Index hidden = 0;
  Index time_embed_dim = 64;
  double lr = 0.0;
  double weight_decay = 1e-4;
  double beta_start = 1e-4;
  double beta_end = 0.02;
};

struct TrainArgs {
  std::string data;
  std::string label_col;
  std::string out;
  std::uint64_t seed = 0;
  Index progress_every = 1000;
  TabadmOptions tab;
  // Optional metric trace against a labeled hold-out set.
  std::string trace_data;
  std::string trace_label_col = "label";
  Index trace_every = 0;
  std::string trace_out;
};

struct ScoreArgs {
  std::string model;
  std::string data;
  std::string label_col;
  std::string out;
  std::uint64_t seed = 1;
  int threads = 1;
  bool fresh_noise = false;
};

struct EvalArgs {
  std::string scores;
  std::string labels;  // optional second file; default: label column in scores
  std::string label_col = "label";
  std::string out;  // empty = stdout
};

struct BenchArgs {
  std::vector<std::string> data;
  std::string label_col = "label";
  std::vector<std::string> methods = {"tabadm", "knn", "hbos"};
  int repeats = 5;
  std::uint64_t seed_base = 1;
  double train_frac = 0.7;
  Index truncate = 0;  // stratified row cap before splitting, 0 = off
  Index knn_k = 5;
  Index hbos_bins = 10;
  int threads = 1;
  Index progress_every = 5000;
  TabadmOptions tab;
  std::string out = "results.json";
};

struct ContaminationArgs {
  std::string data;
  std::string label_col = "label";
  std::vector<double> ratios = {0.0, 0.02, 0.04, 0.06, 0.08, 0.10};
  double test_ratio = 0.10;
  int repeats = 5;
  std::uint64_t seed_base = 1;
  double train_frac = 0.7;
  int threads = 1;
  Index progress_every = 5000;
  TabadmOptions tab;
  std::string out_json = "contamination.json";
  std::string out_csv = "contamination.csv";
};

struct RejectionArgs {
  std::string data;
  std::string label_col = "label";
  std::vector<Index> m_values = {0, 1, 4, 7};
  int repeats = 5;
  std::uint64_t seed_base = 1;
  double train_frac = 0.7;
  int threads = 1;
  Index progress_every = 5000;
  TabadmOptions tab;
  std::string out_json = "rejection.json";
  std::string out_csv = "rejection.csv";
};

struct RanksArgs {
  std::string results;
  std::string metric = "aucroc";
  std::vector<std::string> methods;  // empty = every method in the file
  double tau_max = 70.0;
  double tau_step = 1.0;
  std::string out = "ranks.csv";
};

void cmd_train(const TrainArgs& args);
void cmd_score(const ScoreArgs& args);
void cmd_eval(const EvalArgs& args);
void cmd_bench(const BenchArgs& args);
void cmd_exp_contamination(const ContaminationArgs& args);
void cmd_exp_rejection(const RejectionArgs& args);
void cmd_ranks(const RanksArgs& args);

}  // namespace tabadm::cli
