#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tabadm/errors.hpp"
#include "tabadm/trainer.hpp"

namespace tabadm {
namespace {

using nlohmann::json;

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json matrix_to_json(const Matrix& m) {
  json out = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

Vector vector_from_json(const json& j, const char* field) {
  if (!j.is_array())
    throw ConfigError(std::string("checkpoint: '") + field +
                      "' must be an array");
  Vector v(static_cast<Index>(j.size()));
  Index i = 0;
  for (const auto& e : j) v[i++] = e.get<double>();
  return v;
}

Matrix matrix_from_json(const json& j, const char* field) {
  if (!j.is_array() || j.empty() || !j.front().is_array())
    throw ConfigError(std::string("checkpoint: '") + field +
                      "' must be a 2-d array");
  const auto rows = static_cast<Index>(j.size());
  const auto cols = static_cast<Index>(j.front().size());
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (static_cast<Index>(row.size()) != cols)
      throw ConfigError(std::string("checkpoint: ragged rows in '") + field +
                        "'");
    for (Index c = 0; c < cols; ++c)
      m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

const json& require(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end())
    throw ConfigError(std::string("checkpoint: missing field '") + key + "'");
  return *it;
}

}  // namespace

void save_checkpoint(const Checkpoint& ck, const std::string& path) {
  json j;
  j["format_version"] = ck.format_version;

  j["model"] = {{"input_dim", ck.model.input_dim},
                {"hidden", ck.model.hidden},
                {"time_embed_dim", ck.model.time_embed_dim},
                {"leaky_slope", ck.model.leaky_slope}};

  j["train_config"] = {{"batch_size", ck.train_config.batch_size},
                       {"reject_count", ck.train_config.reject_count},
                       {"steps", ck.train_config.steps},
                       {"learning_rate", ck.train_config.learning_rate},
                       {"weight_decay", ck.train_config.weight_decay},
                       {"timesteps", ck.train_config.timesteps},
                       {"beta_start", ck.train_config.beta_start},
                       {"beta_end", ck.train_config.beta_end},
                       {"seed", ck.train_config.seed},
                       {"eval_every", ck.train_config.eval_every}};

  j["schedule"] = {{"timesteps", ck.schedule.timesteps()},
                   {"beta", vector_to_json(ck.schedule.beta)},
                   {"alpha_bar", vector_to_json(ck.schedule.alpha_bar)}};

  j["normalizer"] = {{"min", vector_to_json(ck.normalizer.min)},
                     {"max", vector_to_json(ck.normalizer.max)}};

  const ModelParams& p = ck.params;
  j["params"] = {
      {"w_in", matrix_to_json(p.w_in)},   {"b_in", vector_to_json(p.b_in)},
      {"w_t1", matrix_to_json(p.w_t1)},   {"b_t1", vector_to_json(p.b_t1)},
      {"w_t2", matrix_to_json(p.w_t2)},   {"b_t2", vector_to_json(p.b_t2)},
      {"w_r1", matrix_to_json(p.w_r1)},   {"b_r1", vector_to_json(p.b_r1)},
      {"w_r2", matrix_to_json(p.w_r2)},   {"b_r2", vector_to_json(p.b_r2)},
      {"w_out", matrix_to_json(p.w_out)}, {"b_out", vector_to_json(p.b_out)}};

  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open checkpoint file for writing: " + path);
  out << j.dump(2) << '\n';
  if (!out) throw ConfigError("failed to write checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open checkpoint file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("checkpoint is not valid JSON: " + path + " (" +
                      e.what() + ")");
  }

  Checkpoint ck;
  ck.format_version = require(j, "format_version").get<int>();
  if (ck.format_version != kCheckpointFormatVersion)
    throw ConfigError("unsupported checkpoint format_version " +
                      std::to_string(ck.format_version) + " (expected " +
                      std::to_string(kCheckpointFormatVersion) + ")");

  {
    const json& m = require(j, "model");
    ck.model.input_dim = require(m, "input_dim").get<Index>();
    ck.model.hidden = require(m, "hidden").get<Index>();
    ck.model.time_embed_dim = require(m, "time_embed_dim").get<Index>();
    ck.model.leaky_slope = require(m, "leaky_slope").get<double>();
  }
  {
    const json& t = require(j, "train_config");
    ck.train_config.batch_size = require(t, "batch_size").get<Index>();
    ck.train_config.reject_count = require(t, "reject_count").get<Index>();
    ck.train_config.steps = require(t, "steps").get<Index>();
    ck.train_config.learning_rate = require(t, "learning_rate").get<double>();
    ck.train_config.weight_decay = require(t, "weight_decay").get<double>();
    ck.train_config.timesteps = require(t, "timesteps").get<Index>();
    ck.train_config.beta_start = require(t, "beta_start").get<double>();
    ck.train_config.beta_end = require(t, "beta_end").get<double>();
    ck.train_config.seed = require(t, "seed").get<std::uint64_t>();
    ck.train_config.eval_every = require(t, "eval_every").get<Index>();
  }
  {
    const json& s = require(j, "schedule");
    ck.schedule.beta = vector_from_json(require(s, "beta"), "schedule.beta");
    ck.schedule.alpha_bar =
        vector_from_json(require(s, "alpha_bar"), "schedule.alpha_bar");
    const auto t = require(s, "timesteps").get<Index>();
    if (t != ck.schedule.beta.size() || t != ck.schedule.alpha_bar.size())
      throw ConfigError("checkpoint: schedule arrays disagree with timesteps");
    ck.schedule.alpha = Vector::Ones(t) - ck.schedule.beta;
  }
  {
    const json& n = require(j, "normalizer");
    ck.normalizer.min = vector_from_json(require(n, "min"), "normalizer.min");
    ck.normalizer.max = vector_from_json(require(n, "max"), "normalizer.max");
  }
  {
    const json& p = require(j, "params");
    ck.params.w_in = matrix_from_json(require(p, "w_in"), "w_in");
    ck.params.b_in = vector_from_json(require(p, "b_in"), "b_in");
    ck.params.w_t1 = matrix_from_json(require(p, "w_t1"), "w_t1");
    ck.params.b_t1 = vector_from_json(require(p, "b_t1"), "b_t1");
    ck.params.w_t2 = matrix_from_json(require(p, "w_t2"), "w_t2");
    ck.params.b_t2 = vector_from_json(require(p, "b_t2"), "b_t2");
    ck.params.w_r1 = matrix_from_json(require(p, "w_r1"), "w_r1");
    ck.params.b_r1 = vector_from_json(require(p, "b_r1"), "b_r1");
    ck.params.w_r2 = matrix_from_json(require(p, "w_r2"), "w_r2");
    ck.params.b_r2 = vector_from_json(require(p, "b_r2"), "b_r2");
    ck.params.w_out = matrix_from_json(require(p, "w_out"), "w_out");
    ck.params.b_out = vector_from_json(require(p, "b_out"), "b_out");
  }
  return ck;
}

}  // namespace tabadm
