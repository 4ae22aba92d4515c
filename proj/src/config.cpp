/*
 * Copyright 2025 The ivsid Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "ivsid/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>

namespace ivsid::config {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed,
                const std::string& where) {
  if (!j.is_object())
    throw std::invalid_argument("config: '" + where + "' must be an object");
  for (const auto& [key, _] : j.items())
    if (allowed.find(key) == allowed.end())
      throw std::invalid_argument("config: unknown key '" + key + "' in " +
                                  where);
}

template <class T>
T get_or(const json& j, const char* key, const T& fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<T>();
}

}  // namespace

ExperimentConfig config_from_json(const json& j, bool check_paths) {
  check_keys(j, {"dataset", "model", "train", "uq", "seeds", "output_dir"},
             "config");
  ExperimentConfig c;

  const json& d = j.at("dataset");
  check_keys(d,
             {"name", "csv", "u_column", "y_column", "normalization", "split",
              "window"},
             "dataset");
  c.dataset.name = d.at("name").get<std::string>();
  c.dataset.csv = d.at("csv").get<std::string>();
  c.dataset.u_column = get_or<std::string>(d, "u_column", "u");
  c.dataset.y_column = get_or<std::string>(d, "y_column", "y");
  c.dataset.normalization = data::norm_method_from_string(
      get_or<std::string>(d, "normalization", "z-score"));
  const auto sp = d.at("split").get<std::vector<int>>();
  if (sp.size() != 3)
    throw std::invalid_argument(
        "config: dataset.split needs train/val/test percentages");
  c.dataset.split = {sp[0], sp[1], sp[2]};
  c.dataset.window = d.at("window").get<int>();
  if (c.dataset.window < 2)
    throw std::invalid_argument("config: dataset.window must be >= 2");

  const json& m = j.at("model");
  check_keys(m, {"kind", "hidden", "activation", "regressor"}, "model");
  c.model.kind = model::model_kind_from_string(m.at("kind").get<std::string>());
  c.model.hidden = m.at("hidden").get<std::vector<int>>();
  if (c.model.hidden.empty())
    throw std::invalid_argument("config: model.hidden must not be empty");
  c.model.activation = interval::activation_from_string(
      get_or<std::string>(m, "activation", "tanh"));
  const json& r = m.at("regressor");
  check_keys(r, {"n_x", "n_d", "n_y"}, "model.regressor");
  c.model.regressor = {r.at("n_x").get<int>(), r.at("n_d").get<int>(),
                       r.at("n_y").get<int>()};
  c.model.regressor.validate();

  if (j.contains("train")) {
    const json& t = j.at("train");
    check_keys(t, {"epochs", "batch", "lr"}, "train");
    c.train.epochs = get_or(t, "epochs", c.train.epochs);
    c.train.batch = get_or(t, "batch", c.train.batch);
    c.train.lr = get_or(t, "lr", c.train.lr);
  }
  if (c.train.epochs < 1 || c.train.batch < 1 || !(c.train.lr > 0.0))
    throw std::invalid_argument("config: bad train block");

  if (j.contains("uq")) {
    const json& u = j.at("uq");
    check_keys(u,
               {"alphas", "lambda", "r_h", "r_o", "epochs", "batch", "lr",
                "freeze_recurrent"},
               "uq");
    c.uq.alphas = get_or(u, "alphas", c.uq.alphas);
    c.uq.lambda = get_or(u, "lambda", c.uq.lambda);
    c.uq.r_h = get_or(u, "r_h", c.uq.r_h);
    c.uq.r_o = get_or(u, "r_o", c.uq.r_o);
    c.uq.epochs = get_or(u, "epochs", c.uq.epochs);
    c.uq.batch = get_or(u, "batch", c.uq.batch);
    c.uq.lr = get_or(u, "lr", c.uq.lr);
    c.uq.freeze_recurrent = get_or(u, "freeze_recurrent", false);
  }
  for (double a : c.uq.alphas)
    if (!(a > 0.0 && a < 1.0))
      throw std::invalid_argument(
          "config: uq.alphas must lie strictly inside (0,1)");
  if (!(c.uq.lambda >= 0.0) || !(c.uq.r_h >= 0.0 && c.uq.r_h <= 1.0) ||
      !(c.uq.r_o >= 0.0 && c.uq.r_o <= 1.0) || c.uq.epochs < 0 ||
      c.uq.batch < 1 || !(c.uq.lr > 0.0))
    throw std::invalid_argument("config: bad uq block");

  c.seeds = get_or(j, "seeds", c.seeds);
  if (c.seeds.empty())
    throw std::invalid_argument("config: seeds must not be empty");
  c.output_dir = get_or<std::string>(j, "output_dir", "out");

  if (check_paths && !std::filesystem::exists(c.dataset.csv))
    throw std::invalid_argument("config: dataset csv '" + c.dataset.csv +
                                "' does not exist");
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw std::invalid_argument("config: cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config: bad JSON in '" + path +
                                "': " + e.what());
  }
  return config_from_json(j);
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["dataset"] = {{"name", c.dataset.name},
                  {"csv", c.dataset.csv},
                  {"u_column", c.dataset.u_column},
                  {"y_column", c.dataset.y_column},
                  {"normalization",
                   data::norm_method_name(c.dataset.normalization)},
                  {"split", c.dataset.split},
                  {"window", c.dataset.window}};
  j["model"] = {{"kind", model::model_kind_name(c.model.kind)},
                {"hidden", c.model.hidden},
                {"activation", interval::activation_name(c.model.activation)},
                {"regressor",
                 {{"n_x", c.model.regressor.n_x},
                  {"n_d", c.model.regressor.n_d},
                  {"n_y", c.model.regressor.n_y}}}};
  j["train"] = {{"epochs", c.train.epochs},
                {"batch", c.train.batch},
                {"lr", c.train.lr}};
  j["uq"] = {{"alphas", c.uq.alphas},
             {"lambda", c.uq.lambda},
             {"r_h", c.uq.r_h},
             {"r_o", c.uq.r_o},
             {"epochs", c.uq.epochs},
             {"batch", c.uq.batch},
             {"lr", c.uq.lr},
             {"freeze_recurrent", c.uq.freeze_recurrent}};
  j["seeds"] = c.seeds;
  j["output_dir"] = c.output_dir;
  return j;
}

}  // namespace ivsid::config
