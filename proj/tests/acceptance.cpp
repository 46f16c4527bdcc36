// Acceptance suite: one self-contained check per release criterion, each
// printing a single [PASS]/[FAIL] line. Criteria 1-5 need the benchmark
// datasets as CSVs (see README: data/ layout, or --data-dir / TABADM_DATA_DIR);
// criteria 6-9 are self-contained. The exit code is the number of failures.
//
// Usage: acceptance [--criteria 1,2,9] [--data-dir DIR] [--cli PATH]

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tabadm/data.hpp"
#include "tabadm/diffusion.hpp"
#include "tabadm/metrics.hpp"
#include "tabadm/model.hpp"
#include "tabadm/rng.hpp"
#include "tabadm/scorer.hpp"
#include "tabadm/trainer.hpp"

namespace {

namespace fs = std::filesystem;

using tabadm::Dataset;
using tabadm::Index;
using tabadm::Matrix;
using tabadm::ModelConfig;
using tabadm::ModelParams;
using tabadm::Rng;
using tabadm::TrainConfig;
using tabadm::Vector;

constexpr std::uint64_t kScoreSeedOffset = 100000;  // matches the CLI harness

struct Options {
  std::string cli = TABADM_CLI_PATH;
  std::string data_dir;
  std::set<int> criteria;  // empty = all
};

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string resolve_data_dir(const Options& opts) {
  if (!opts.data_dir.empty()) return opts.data_dir;
  if (const char* env = std::getenv("TABADM_DATA_DIR"); env && *env)
    return env;
  return TABADM_DATA_DIR_DEFAULT;
}

std::optional<Dataset> load_dataset(const Options& opts,
                                    const std::string& name,
                                    std::string& missing_detail) {
  const fs::path path = fs::path(resolve_data_dir(opts)) / (name + ".csv");
  if (!fs::exists(path)) {
    missing_detail = "dataset not found: " + path.string() +
                     " (convert it per the README and point --data-dir or "
                     "TABADM_DATA_DIR at it)";
    return std::nullopt;
  }
  return tabadm::load_csv(path.string(), "label");
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(4);
  ss << v;
  return ss.str();
}

struct FitScore {
  double aucroc = 0.0;
  double ap = 0.0;
};

// Same recipe as the CLI's bench path: normalizer fitted on the training
// features only, labels never visible to the trainer, scoring noise seeded at
// a fixed offset from the training seed.
FitScore fit_and_score(const Dataset& train_ds, const Dataset& test_ds,
                       Index steps, Index reject, std::uint64_t seed) {
  const auto norm = tabadm::fit_normalizer(train_ds.X);
  TrainConfig tc;
  tc.steps = steps;
  tc.reject_count = reject;
  tc.seed = seed;
  ModelConfig mc;  // hidden and lr resolve from the feature count
  const auto result =
      tabadm::train(tabadm::apply_normalizer(norm, train_ds.X), tc, mc, norm);
  const auto run =
      tabadm::score_set(result.checkpoint, test_ds.X, seed + kScoreSeedOffset);
  FitScore fs;
  fs.aucroc = tabadm::aucroc(run.scores, test_ds.labels);
  fs.ap = tabadm::average_precision(run.scores, test_ds.labels);
  return fs;
}

// Mean metrics over seeded 70/30 stratified splits.
FitScore bench_mean(const Dataset& ds, Index steps, Index reject, int repeats) {
  std::vector<double> auc, ap;
  for (int rep = 0; rep < repeats; ++rep) {
    const std::uint64_t seed = 1 + static_cast<std::uint64_t>(rep);
    const auto split = tabadm::stratified_split(ds, 0.7, seed);
    const FitScore fs = fit_and_score(split.train, split.test, steps, reject,
                                      seed);
    auc.push_back(fs.aucroc);
    ap.push_back(fs.ap);
    std::cerr << "  seed " << seed << ": AUCROC " << fmt(fs.aucroc) << ", AP "
              << fmt(fs.ap) << "\n";
  }
  return {mean_of(auc), mean_of(ap)};
}

Outcome reproduction_criterion(const Options& opts, const std::string& name,
                               Index steps, double min_auc, double min_ap) {
  std::string missing;
  const auto ds = load_dataset(opts, name, missing);
  if (!ds) return {false, missing};
  const FitScore m = bench_mean(*ds, steps, 1, 5);
  std::ostringstream detail;
  detail << name << " mean AUCROC " << fmt(m.aucroc) << " (need >= "
         << fmt(min_auc) << ")";
  if (min_ap > 0.0)
    detail << ", mean AP " << fmt(m.ap) << " (need >= " << fmt(min_ap) << ")";
  detail << " over 5 seeds, " << steps << " steps";
  const bool pass = m.aucroc >= min_auc && (min_ap <= 0.0 || m.ap >= min_ap);
  return {pass, detail.str()};
}

Outcome criterion_1(const Options& opts) {
  return reproduction_criterion(opts, "musk", 10000, 0.99, 0.95);
}

Outcome criterion_2(const Options& opts) {
  return reproduction_criterion(opts, "ionosphere", 50000, 0.85, 0.0);
}

Outcome criterion_3(const Options& opts) {
  return reproduction_criterion(opts, "glass", 50000, 0.70, 0.0);
}

Outcome criterion_4(const Options& opts) {
  std::string missing;
  const auto musk = load_dataset(opts, "musk", missing);
  if (!musk) return {false, missing};
  const auto letter = load_dataset(opts, "letter", missing);
  if (!letter) return {false, missing};

  std::cerr << " musk m=0\n";
  const FitScore musk_m0 = bench_mean(*musk, 50000, 0, 5);
  std::cerr << " musk m=1\n";
  const FitScore musk_m1 = bench_mean(*musk, 50000, 1, 5);
  std::cerr << " letter m=1\n";
  const FitScore letter_m1 = bench_mean(*letter, 50000, 1, 5);
  std::cerr << " letter m=7\n";
  const FitScore letter_m7 = bench_mean(*letter, 50000, 7, 5);

  const double gain = musk_m1.ap - musk_m0.ap;
  const bool pass = gain >= 0.10 && letter_m7.aucroc <= letter_m1.aucroc;
  std::ostringstream detail;
  detail << "musk AP m=1 " << fmt(musk_m1.ap) << " vs m=0 " << fmt(musk_m0.ap)
         << " (gain " << fmt(gain) << ", need >= 0.10); letter AUCROC m=7 "
         << fmt(letter_m7.aucroc) << " <= m=1 " << fmt(letter_m1.aucroc);
  return {pass, detail.str()};
}

Outcome criterion_5(const Options& opts) {
  std::string missing;
  const auto ds = load_dataset(opts, "satellite", missing);
  if (!ds) return {false, missing};

  const auto sweep_mean = [&](double ratio) {
    std::vector<double> auc;
    for (int rep = 0; rep < 5; ++rep) {
      const std::uint64_t seed = 1 + static_cast<std::uint64_t>(rep);
      const auto split = tabadm::stratified_split(*ds, 0.7, seed);
      const auto built = tabadm::build_contaminated(split.train, ratio,
                                                    split.test, 0.10, seed);
      const FitScore fs =
          fit_and_score(built.train, built.test, 50000, 1, seed);
      auc.push_back(fs.aucroc);
      std::cerr << "  c=" << fmt(ratio) << " seed " << seed << ": AUCROC "
                << fmt(fs.aucroc) << "\n";
    }
    return mean_of(auc);
  };

  const double clean = sweep_mean(0.0);
  const double dirty = sweep_mean(0.10);
  const double drop = clean - dirty;
  std::ostringstream detail;
  detail << "satellite mean AUCROC c=0: " << fmt(clean) << ", c=0.10: "
         << fmt(dirty) << " (drop " << fmt(drop) << ", need >= 0.02)";
  return {drop >= 0.02, detail.str()};
}

Outcome criterion_6(const Options&) {
  ModelConfig cfg;
  cfg.input_dim = 3;
  cfg.hidden = 8;
  cfg.time_embed_dim = 4;
  Rng rng(4242);
  ModelParams p = tabadm::init_params(cfg, rng);
  const Matrix x = rng.gaussian(3, 5);
  const Matrix target = rng.gaussian(3, 5);
  const Index t = 7;

  const auto loss_of = [&]() {
    const Matrix out = tabadm::forward(cfg, p, x, t);
    return 0.5 * (out - target).squaredNorm();
  };
  tabadm::ForwardTape tape;
  const Matrix out = tabadm::forward(cfg, p, x, t, &tape);
  const ModelParams grads = tabadm::backward(cfg, p, tape, out - target);

  std::vector<std::pair<double*, const double*>> entries;
  const auto collect = [&entries](Matrix& w, const Matrix& g) {
    for (Index r = 0; r < w.rows(); ++r)
      for (Index c = 0; c < w.cols(); ++c) entries.emplace_back(&w(r, c), &g(r, c));
  };
  const auto collect_v = [&entries](Vector& b, const Vector& g) {
    for (Index i = 0; i < b.size(); ++i) entries.emplace_back(&b[i], &g[i]);
  };
  collect(p.w_in, grads.w_in);
  collect(p.w_t1, grads.w_t1);
  collect(p.w_t2, grads.w_t2);
  collect(p.w_r1, grads.w_r1);
  collect(p.w_r2, grads.w_r2);
  collect(p.w_out, grads.w_out);
  collect_v(p.b_in, grads.b_in);
  collect_v(p.b_t1, grads.b_t1);
  collect_v(p.b_t2, grads.b_t2);
  collect_v(p.b_r1, grads.b_r1);
  collect_v(p.b_r2, grads.b_r2);
  collect_v(p.b_out, grads.b_out);

  const double h = 1e-5;
  int passed = 0;
  double worst = 0.0;
  Rng pick(7);
  for (int probe = 0; probe < 100; ++probe) {
    auto [entry, analytic] = entries[pick.uniform_index(entries.size())];
    const double saved = *entry;
    *entry = saved + h;
    const double up = loss_of();
    *entry = saved - h;
    const double down = loss_of();
    *entry = saved;
    const double fd = (up - down) / (2.0 * h);
    // Relative error with an absolute floor; the finite difference itself
    // carries ~1e-10 of cancellation noise.
    const double rel = std::abs(fd - *analytic) /
                       std::max(std::abs(fd) + std::abs(*analytic), 1e-4);
    worst = std::max(worst, rel);
    if (rel < 1e-4) ++passed;
  }
  std::ostringstream detail;
  detail << passed << "/100 finite-difference probes under 1e-4 relative "
         << "error (worst " << fmt(worst) << ")";
  return {passed == 100, detail.str()};
}

double auc_oracle(const std::vector<double>& s, const std::vector<int>& y) {
  std::uint64_t u2 = 0, pos = 0, neg = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] == 1)
      ++pos;
    else
      ++neg;
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] != 0) continue;
      if (s[i] > s[j])
        u2 += 2;
      else if (s[i] == s[j])
        u2 += 1;
    }
  }
  return static_cast<double>(u2) /
         (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
}

double ap_oracle(const std::vector<double>& s, const std::vector<int>& y) {
  std::uint64_t n_pos = 0;
  for (int v : y) n_pos += v == 1 ? 1 : 0;
  std::vector<double> thresholds = s;
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                   thresholds.end());
  std::uint64_t tp = 0, fp = 0;
  double ap = 0.0;
  for (double v : thresholds) {
    std::uint64_t gp = 0, gn = 0;
    for (std::size_t i = 0; i < s.size(); ++i)
      if (s[i] == v) (y[i] == 1 ? gp : gn)++;
    tp += gp;
    fp += gn;
    if (gp > 0)
      ap += (static_cast<double>(gp) / static_cast<double>(n_pos)) *
            (static_cast<double>(tp) / static_cast<double>(tp + fp));
  }
  return ap;
}

Outcome criterion_7(const Options&) {
  Rng rng(2718);
  int exact = 0;
  int ties = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 2 + rng.uniform_index(19);
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng.uniform_index(6)) / 4.0;
      y[i] = static_cast<int>(rng.uniform_index(2));
    }
    y[0] = 1;
    y[n - 1] = 0;
    const bool ok = tabadm::aucroc(s, y) == auc_oracle(s, y) &&
                    tabadm::average_precision(s, y) == ap_oracle(s, y);
    exact += ok ? 1 : 0;
    std::vector<double> sorted = s;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      ++ties;
  }
  std::ostringstream detail;
  detail << exact << "/200 instances exactly match both brute-force oracles ("
         << ties << " contained ties)";
  return {exact == 200 && ties > 100, detail.str()};
}

Outcome criterion_8(const Options&) {
  Rng rng(99);
  double worst = 0.0;
  bool structure_ok = true;

  for (Index T : {1, 2, 5, 100, 500}) {
    const auto sched = tabadm::linear_schedule(T, 1e-4, 0.02);
    double prev = 1.0;
    for (Index i = 0; i < T; ++i) {
      const double ab = sched.alpha_bar[i];
      structure_ok = structure_ok && ab > 0.0 && ab < 1.0 && ab < prev;
      prev = ab;
    }
  }

  const auto sched = tabadm::linear_schedule(100, 1e-4, 0.02);
  for (int rep = 0; rep < 100; ++rep) {
    const Index t = 1 + static_cast<Index>(rng.uniform_index(100));
    const Vector x1 = rng.gaussian(1, 6).row(0).transpose();
    const Vector x2 = rng.gaussian(1, 6).row(0).transpose();
    const Vector e1 = rng.gaussian(1, 6).row(0).transpose();
    const Vector e2 = rng.gaussian(1, 6).row(0).transpose();
    const double a = 2.0 * rng.uniform() - 1.0;
    const double b = 2.0 * rng.uniform() - 1.0;
    const Vector lhs = tabadm::noise(a * x1 + b * x2, t, a * e1 + b * e2, sched);
    const Vector rhs =
        a * tabadm::noise(x1, t, e1, sched) + b * tabadm::noise(x2, t, e2, sched);
    worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());

    structure_ok = structure_ok && tabadm::sample_loss(x1, x1) == 0.0 &&
                   tabadm::sample_loss(x1, x2) > 0.0;
  }

  std::ostringstream detail;
  detail << "alpha_bar strictly decreasing in (0,1) for T in {1,2,5,100,500}; "
         << "noise() superposition max deviation " << fmt(worst)
         << "; sample_loss zero iff equal";
  return {structure_ok && worst < 1e-12, detail.str()};
}

Outcome criterion_9(const Options& opts) {
  const fs::path dir = fs::temp_directory_path() / "tabadm_acceptance";
  fs::create_directories(dir);

  // Synthetic dataset: a tight cluster plus a ring of labeled outliers.
  Dataset ds;
  ds.feature_names = {"f0", "f1"};
  ds.X.resize(60, 2);
  Rng rng(3);
  const double pi = std::acos(-1.0);
  for (Index i = 0; i < 60; ++i) {
    ds.X.row(i) = 0.25 * rng.gaussian(1, 2).row(0);
    if (i >= 48) {
      const double angle = 2.0 * pi * static_cast<double>(i - 48) / 12.0;
      ds.X(i, 0) += 3.0 * std::cos(angle);
      ds.X(i, 1) += 3.0 * std::sin(angle);
    }
    ds.labels.push_back(i >= 48 ? 1 : 0);
  }
  const std::string csv = (dir / "determinism.csv").string();
  tabadm::save_csv(ds, csv, "label");

  const auto run_bench = [&](const std::string& out) {
    fs::remove(out);
    const std::string cmd = '"' + opts.cli + "\" bench --data " + csv +
                            " --repeats 2 --steps 300 --hidden 16"
                            " --time-embed-dim 8 --timesteps 20"
                            " --progress-every 0 --out " + out + " > " +
                            (dir / "bench.log").string() + " 2>&1";
    const int rc = std::system(cmd.c_str());
    return rc != -1 && WIFEXITED(rc) && WEXITSTATUS(rc) == 0;
  };
  const std::string out1 = (dir / "run1.json").string();
  const std::string out2 = (dir / "run2.json").string();
  if (!run_bench(out1) || !run_bench(out2))
    return {false, "bench invocation failed (see " +
                       (dir / "bench.log").string() + ")"};

  const auto slurp = [](const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
  };
  const std::string s1 = slurp(out1);
  const std::string s2 = slurp(out2);
  if (s1.empty()) return {false, "bench produced an empty results file"};
  if (s1 != s2) return {false, "the two bench runs differ byte-wise"};
  return {true, "two identical bench invocations produced byte-identical "
                "results JSON (" + std::to_string(s1.size()) + " bytes)"};
}

using CriterionFn = std::function<Outcome(const Options&)>;

const std::vector<std::pair<int, CriterionFn>> kCriteria = {
    {1, criterion_1}, {2, criterion_2}, {3, criterion_3},
    {4, criterion_4}, {5, criterion_5}, {6, criterion_6},
    {7, criterion_7}, {8, criterion_8}, {9, criterion_9},
};

int usage(int code) {
  std::cerr << "usage: acceptance [--criteria 1,2,9] [--data-dir DIR] "
               "[--cli PATH]\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  Options opts;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    const auto next = [&]() -> const char* {
      if (i + 1 >= argc) {
        std::cerr << arg << " needs a value\n";
        std::exit(usage(2));
      }
      return argv[++i];
    };
    if (arg == "--criteria") {
      std::stringstream ss(next());
      std::string tok;
      while (std::getline(ss, tok, ',')) {
        try {
          const int c = std::stoi(tok);
          if (c < 1 || c > 9) throw std::out_of_range("criterion");
          opts.criteria.insert(c);
        } catch (const std::exception&) {
          std::cerr << "bad criterion '" << tok << "' (expected 1..9)\n";
          return usage(2);
        }
      }
    } else if (arg == "--data-dir") {
      opts.data_dir = next();
    } else if (arg == "--cli") {
      opts.cli = next();
    } else if (arg == "--help" || arg == "-h") {
      return usage(0);
    } else {
      std::cerr << "unknown argument: " << arg << "\n";
      return usage(2);
    }
  }

  int failures = 0;
  int selected = 0;
  for (const auto& [id, fn] : kCriteria) {
    if (!opts.criteria.empty() && !opts.criteria.count(id)) continue;
    ++selected;
    std::cerr << "--- criterion " << id << " ---\n";
    Outcome outcome;
    try {
      outcome = fn(opts);
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (outcome.pass ? "[PASS]" : "[FAIL]") << " C" << id << ": "
              << outcome.detail << "\n";
    failures += outcome.pass ? 0 : 1;
  }
  std::cout << (selected - failures) << "/" << selected
            << " acceptance criteria passed\n";
  return failures;
}
