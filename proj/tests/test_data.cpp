#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <string>

#include <json.hpp>

#include "tabadm/data.hpp"
#include "tabadm/errors.hpp"
#include "tabadm/rng.hpp"

using tabadm::ConfigError;
using tabadm::Dataset;
using tabadm::Index;
using tabadm::Matrix;
using tabadm::Rng;
using tabadm::Vector;

namespace {

namespace fs = std::filesystem;

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "tabadm_data_tests";
  fs::create_directories(dir);
  return dir;
}

std::string write_file(const std::string& name, const std::string& content) {
  const auto path = (scratch_dir() / name).string();
  std::ofstream(path) << content;
  return path;
}

void expect_error_containing(const std::function<void()>& fn,
                             const std::string& fragment) {
  try {
    fn();
    FAIL_CHECK("expected ConfigError containing '" << fragment << "'");
  } catch (const ConfigError& e) {
    CHECK_MESSAGE(std::string(e.what()).find(fragment) != std::string::npos,
                  "message was: " << e.what());
  }
}

// n_in inliers then n_out outliers, 2 features, distinctive values per row.
Dataset labeled_dataset(Index n_in, Index n_out) {
  Dataset ds;
  ds.feature_names = {"a", "b"};
  ds.X.resize(n_in + n_out, 2);
  ds.labels.resize(static_cast<std::size_t>(n_in + n_out));
  for (Index i = 0; i < n_in + n_out; ++i) {
    ds.X(i, 0) = static_cast<double>(i);
    ds.X(i, 1) = static_cast<double>(-i);
    ds.labels[static_cast<std::size_t>(i)] = i < n_in ? 0 : 1;
  }
  return ds;
}

}  // namespace

TEST_CASE("load_csv parses values, labels and feature names") {
  const auto path = write_file("basic.csv",
                               "f1,f2,label\n"
                               "1.5,2.5,0\n"
                               "3.25,-4,1\n"
                               "0,0.125,0\n");
  const Dataset ds = tabadm::load_csv(path, "label");
  REQUIRE(ds.n() == 3);
  REQUIRE(ds.dim() == 2);
  CHECK(ds.feature_names == std::vector<std::string>{"f1", "f2"});
  CHECK(ds.X(0, 0) == 1.5);
  CHECK(ds.X(1, 1) == -4.0);
  CHECK(ds.X(2, 1) == 0.125);
  CHECK(ds.labels == std::vector<int>{0, 1, 0});
  CHECK(ds.anomaly_rate() == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("the label column may sit anywhere and is optional") {
  const auto path = write_file("middle.csv",
                               "f1,y,f2\n"
                               "1,0,2\n"
                               "3,1,4\n");
  const Dataset ds = tabadm::load_csv(path, "y");
  CHECK(ds.dim() == 2);
  CHECK(ds.X(1, 0) == 3.0);
  CHECK(ds.X(1, 1) == 4.0);
  CHECK(ds.labels == std::vector<int>{0, 1});

  const Dataset unlabeled = tabadm::load_csv(path);
  CHECK(unlabeled.dim() == 3);
  CHECK_FALSE(unlabeled.has_labels());
  CHECK(unlabeled.anomaly_rate() == 0.0);
}

TEST_CASE("blank lines are skipped, whitespace is trimmed") {
  const auto path = write_file("spacey.csv",
                               "x , y\n"
                               " 1 , 2 \n"
                               "\n"
                               "3,4\n");
  const Dataset ds = tabadm::load_csv(path);
  REQUIRE(ds.n() == 2);
  CHECK(ds.feature_names == std::vector<std::string>{"x", "y"});
  CHECK(ds.X(1, 0) == 3.0);
}

TEST_CASE("CSV errors name the offending cell") {
  expect_error_containing(
      [&] {
        tabadm::load_csv(write_file("blank.csv", "a,b\n1,\n"), "");
      },
      "blank cell at data row 1, column 'b'");
  expect_error_containing(
      [&] {
        tabadm::load_csv(write_file("alpha.csv", "a,b\n1,2\nx,3\n"), "");
      },
      "non-numeric cell at data row 2, column 'a'");
  expect_error_containing(
      [&] { tabadm::load_csv(write_file("ragged.csv", "a,b\n1,2,3\n"), ""); },
      "data row 1 has 3 cells, expected 2");
  expect_error_containing(
      [&] { tabadm::load_csv(write_file("badlab.csv", "a,y\n1,2\n"), "y"); },
      "label must be 0 or 1 at data row 1");
  expect_error_containing(
      [&] { tabadm::load_csv(write_file("nolab.csv", "a,b\n1,2\n"), "y"); },
      "label column 'y' not found");
  expect_error_containing(
      [&] { tabadm::load_csv(write_file("empty.csv", ""), ""); },
      "empty file");
  expect_error_containing(
      [&] { tabadm::load_csv(write_file("norows.csv", "a,b\n"), ""); },
      "no data rows");
  CHECK_THROWS_AS(tabadm::load_csv((scratch_dir() / "missing.csv").string()),
                  ConfigError);
}

TEST_CASE("save/load round trip preserves exact doubles and labels") {
  Dataset ds;
  ds.feature_names = {"u", "v", "w"};
  Rng rng(314);
  ds.X = rng.gaussian(20, 3);
  ds.X(0, 0) = 1e-300;          // exercise extreme exponents
  ds.X(1, 1) = 12345678.90625;  // exactly representable
  for (int i = 0; i < 20; ++i) ds.labels.push_back(i % 3 == 0 ? 1 : 0);

  const auto path = (scratch_dir() / "roundtrip.csv").string();
  tabadm::save_csv(ds, path, "label");
  const Dataset back = tabadm::load_csv(path, "label");
  REQUIRE(back.n() == ds.n());
  REQUIRE(back.dim() == ds.dim());
  CHECK(back.feature_names == ds.feature_names);
  CHECK((back.X - ds.X).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.labels == ds.labels);
}

TEST_CASE("normalizer maps the train range onto [-1, 1] without clamping") {
  Matrix train(2, 1);
  train << 2.0, 6.0;
  const auto norm = tabadm::fit_normalizer(train);
  CHECK(norm.min[0] == 2.0);
  CHECK(norm.max[0] == 6.0);

  Matrix probe(4, 1);
  probe << 4.0, 2.0, 6.0, 8.0;
  const Matrix out = tabadm::apply_normalizer(norm, probe);
  CHECK(out(0, 0) == 0.0);
  CHECK(out(1, 0) == -1.0);
  CHECK(out(2, 0) == 1.0);
  CHECK(out(3, 0) == 2.0);  // outside the train range, deliberately unclamped
}

TEST_CASE("constant features normalize to zero everywhere") {
  Matrix train(3, 2);
  train << 5.0, 1.0, 5.0, 2.0, 5.0, 3.0;
  const auto norm = tabadm::fit_normalizer(train);
  Matrix probe(2, 2);
  probe << 5.0, 1.0, 99.0, 3.0;
  const Matrix out = tabadm::apply_normalizer(norm, probe);
  CHECK(out(0, 0) == 0.0);
  CHECK(out(1, 0) == 0.0);  // even off-value inputs collapse to 0
  CHECK(out(0, 1) == -1.0);
  CHECK(out(1, 1) == 1.0);
}

TEST_CASE("normalizer validation") {
  CHECK_THROWS_AS(tabadm::fit_normalizer(Matrix(0, 3)), ConfigError);
  Matrix train(2, 2);
  train << 0, 1, 2, 3;
  const auto norm = tabadm::fit_normalizer(train);
  CHECK_THROWS_AS(tabadm::apply_normalizer(norm, Matrix::Zero(1, 3)),
                  std::invalid_argument);
}

TEST_CASE("stratified split at 0.7 sends 70/7 of 100/10 to train") {
  const Dataset ds = labeled_dataset(100, 10);
  const auto split = tabadm::stratified_split(ds, 0.7, 5);
  CHECK(split.train.n() == 77);
  CHECK(split.test.n() == 33);

  int train_out = 0;
  for (int y : split.train.labels) train_out += y;
  int test_out = 0;
  for (int y : split.test.labels) test_out += y;
  CHECK(train_out == 7);
  CHECK(test_out == 3);
}

TEST_CASE("splits are deterministic, disjoint and exhaustive") {
  const Dataset ds = labeled_dataset(40, 8);
  const auto a = tabadm::stratified_split(ds, 0.7, 11);
  const auto b = tabadm::stratified_split(ds, 0.7, 11);
  CHECK(a.train_rows == b.train_rows);
  CHECK(a.test_rows == b.test_rows);

  const auto c = tabadm::stratified_split(ds, 0.7, 12);
  CHECK(a.train_rows != c.train_rows);

  std::set<Index> seen;
  for (Index r : a.train_rows) seen.insert(r);
  for (Index r : a.test_rows) {
    CHECK(seen.count(r) == 0);
    seen.insert(r);
  }
  CHECK(seen.size() == 48);

  // Selected rows keep source order, so features line up with labels.
  for (std::size_t i = 1; i < a.train_rows.size(); ++i)
    CHECK(a.train_rows[i - 1] < a.train_rows[i]);
  for (Index i = 0; i < a.train.n(); ++i)
    CHECK(a.train.X(i, 0) == static_cast<double>(a.train_rows[
              static_cast<std::size_t>(i)]));
}

TEST_CASE("every nonempty class lands at least one test sample") {
  const Dataset ds = labeled_dataset(9, 1);
  const auto split = tabadm::stratified_split(ds, 0.9, 3);
  int test_out = 0;
  for (int y : split.test.labels) test_out += y;
  CHECK(test_out == 1);  // the lone outlier cannot be swallowed by train
}

TEST_CASE("split validation") {
  Dataset unlabeled;
  unlabeled.feature_names = {"a"};
  unlabeled.X = Matrix::Zero(5, 1);
  CHECK_THROWS_AS(tabadm::stratified_split(unlabeled, 0.7, 1), ConfigError);
  const Dataset ds = labeled_dataset(5, 2);
  CHECK_THROWS_AS(tabadm::stratified_split(ds, 0.0, 1), ConfigError);
  CHECK_THROWS_AS(tabadm::stratified_split(ds, 1.0, 1), ConfigError);
}

TEST_CASE("stratified truncation preserves the anomaly rate") {
  const Dataset ds = labeled_dataset(100, 10);
  const Dataset cut = tabadm::stratified_truncate(ds, 55, 7);
  CHECK(cut.n() == 55);
  int outliers = 0;
  for (int y : cut.labels) outliers += y;
  CHECK(outliers == 5);  // llround(55 * 10 / 110)

  // Small enough datasets pass through untouched, labels not required.
  Dataset plain;
  plain.feature_names = {"a"};
  plain.X = Matrix::Zero(4, 1);
  CHECK(tabadm::stratified_truncate(plain, 10, 1).n() == 4);
  CHECK_THROWS_AS(tabadm::stratified_truncate(plain, 2, 1), ConfigError);
  CHECK_THROWS_AS(tabadm::stratified_truncate(ds, 0, 1), ConfigError);
}

TEST_CASE("contamination builder hits the requested training ratio") {
  const Dataset train_pool = labeled_dataset(900, 150);
  const Dataset test_pool = labeled_dataset(180, 30);

  const auto res = tabadm::build_contaminated(train_pool, 0.10, test_pool,
                                              0.10, 99);
  CHECK(res.train_anomalies == 100);  // floor(0.1/0.9 * 900)
  CHECK(res.train.n() == 1000);
  CHECK(res.train.anomaly_rate() == doctest::Approx(0.10));
  CHECK(res.test_anomalies == 20);  // floor(0.1/0.9 * 180)
  CHECK(res.test.n() == 200);

  const auto clean = tabadm::build_contaminated(train_pool, 0.0, test_pool,
                                                0.10, 99);
  CHECK(clean.train_anomalies == 0);
  CHECK(clean.train.n() == 900);
  for (int y : clean.train.labels) CHECK(y == 0);
}

TEST_CASE("the test side is pinned while the train ratio sweeps") {
  const Dataset train_pool = labeled_dataset(300, 60);
  const Dataset test_pool = labeled_dataset(90, 20);

  const auto a = tabadm::build_contaminated(train_pool, 0.0, test_pool, 0.1, 4);
  const auto b = tabadm::build_contaminated(train_pool, 0.08, test_pool, 0.1, 4);
  const auto c = tabadm::build_contaminated(train_pool, 0.16, test_pool, 0.1, 4);

  CHECK(a.test.n() == b.test.n());
  CHECK((a.test.X - b.test.X).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.test.X - c.test.X).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.test.labels == b.test.labels);
  CHECK(a.test.labels == c.test.labels);

  // Larger ratios strictly add anomalies.
  CHECK(a.train_anomalies < b.train_anomalies);
  CHECK(b.train_anomalies < c.train_anomalies);
}

TEST_CASE("contamination shortfalls and bad ratios are errors") {
  const Dataset small_pool = labeled_dataset(100, 3);
  const Dataset test_pool = labeled_dataset(20, 5);
  expect_error_containing(
      [&] {
        tabadm::build_contaminated(small_pool, 0.10, test_pool, 0.1, 1);
      },
      "needs 11 anomalies but has only 3");
  CHECK_THROWS_AS(
      tabadm::build_contaminated(small_pool, 1.0, test_pool, 0.1, 1),
      ConfigError);
  CHECK_THROWS_AS(
      tabadm::build_contaminated(small_pool, -0.1, test_pool, 0.1, 1),
      ConfigError);

  Dataset unlabeled;
  unlabeled.feature_names = {"a"};
  unlabeled.X = Matrix::Zero(5, 1);
  CHECK_THROWS_AS(
      tabadm::build_contaminated(unlabeled, 0.0, test_pool, 0.1, 1),
      ConfigError);
}

TEST_CASE("select keeps requested order and carries labels") {
  const Dataset ds = labeled_dataset(4, 2);
  const Dataset picked = ds.select({5, 0, 2});
  REQUIRE(picked.n() == 3);
  CHECK(picked.X(0, 0) == 5.0);
  CHECK(picked.X(1, 0) == 0.0);
  CHECK(picked.X(2, 0) == 2.0);
  CHECK(picked.labels == std::vector<int>{1, 0, 0});
}

TEST_CASE("split manifests are valid JSON with both row lists") {
  const auto path = (scratch_dir() / "manifest.json").string();
  tabadm::write_split_manifest(path, {0, 2, 4}, {1, 3});
  nlohmann::json j;
  std::ifstream(path) >> j;
  CHECK(j["train_rows"] == nlohmann::json({0, 2, 4}));
  CHECK(j["test_rows"] == nlohmann::json({1, 3}));
}
