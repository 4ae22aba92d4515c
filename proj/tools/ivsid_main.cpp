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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ivsid/checkpoint.hpp"
#include "ivsid/config.hpp"
#include "ivsid/dataset.hpp"
#include "ivsid/kernels.hpp"
#include "ivsid/log.hpp"
#include "ivsid/metrics.hpp"
#include "ivsid/model.hpp"
#include "ivsid/train.hpp"
#include "ivsid/uq.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ivsid;

namespace {

struct Variant {
  std::string name;
  model::ModelKind kind;
  ivmodel::TrickKind trick;
};

Variant parse_variant(const std::string& s) {
  if (s == "ilstm1") return {s, model::ModelKind::Lstm, ivmodel::TrickKind::Relu};
  if (s == "ilstm2") return {s, model::ModelKind::Lstm, ivmodel::TrickKind::Abs};
  if (s == "inode1") return {s, model::ModelKind::Node, ivmodel::TrickKind::Relu};
  if (s == "inode2") return {s, model::ModelKind::Node, ivmodel::TrickKind::Abs};
  throw std::invalid_argument(
      "unknown variant '" + s + "' (expected ilstm1|ilstm2|inode1|inode2)");
}

int alpha_pct(double alpha) {
  return static_cast<int>(std::lround(alpha * 100));
}

struct Prepared {
  data::SeriesDataset train_ds, val_ds, test_ds;
  data::WindowedBatch train, val, test;
  data::NormInfo norm;
};

Prepared prepare_data(const config::ExperimentConfig& cfg) {
  auto raw = data::load_csv(cfg.dataset.csv, cfg.dataset.u_column,
                            cfg.dataset.y_column, cfg.dataset.name);
  const auto sizes = data::split_sizes(raw.length(), cfg.dataset.split);
  auto normed = data::normalize_with_prefix(raw, cfg.dataset.normalization,
                                            sizes.train);
  auto parts = data::split(normed, cfg.dataset.split);
  Prepared p;
  p.norm = *parts[0].norm;
  p.train = data::window(parts[0], cfg.dataset.window);
  p.val = data::window(parts[1], cfg.dataset.window);
  p.test = data::window(parts[2], cfg.dataset.window);
  p.train_ds = std::move(parts[0]);
  p.val_ds = std::move(parts[1]);
  p.test_ds = std::move(parts[2]);
  return p;
}

std::string out_dir(const config::ExperimentConfig& cfg,
                    const std::string& override_dir) {
  const std::string dir = override_dir.empty() ? cfg.output_dir : override_dir;
  fs::create_directories(dir);
  return dir;
}

std::string crisp_path(const std::string& dir, uint64_t seed) {
  return dir + "/crisp_s" + std::to_string(seed) + ".json";
}

std::string inn_path(const std::string& dir, const std::string& variant,
                     double alpha, uint64_t seed) {
  return dir + "/inn_" + variant + "_a" + std::to_string(alpha_pct(alpha)) +
         "_s" + std::to_string(seed) + ".json";
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

void write_split_csv(const std::string& path, const data::SeriesDataset& ds) {
  std::ostringstream ss;
  ss << "u,y\n";
  char buf[64];
  for (int i = 0; i < ds.length(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", ds.u[i], ds.y[i]);
    ss << buf;
  }
  write_text(path, ss.str());
}

// Flattened de-normalized metric inputs over the predicted positions.
struct FlatEval {
  std::vector<double> lower, upper, center, target;
};

FlatEval flatten(const ivmodel::PiBatch& pi, const data::WindowedBatch& wb,
                 const data::NormInfo& norm) {
  FlatEval f;
  for (int m = 0; m < wb.count(); ++m)
    for (int k = pi.warmup; k < wb.window(); ++k) {
      f.lower.push_back(
          data::denormalize_value(norm.method, norm.y, pi.lo(m, k)));
      f.upper.push_back(
          data::denormalize_value(norm.method, norm.y, pi.hi(m, k)));
      f.center.push_back(
          data::denormalize_value(norm.method, norm.y, pi.center(m, k)));
      f.target.push_back(
          data::denormalize_value(norm.method, norm.y, wb.y(m, k)));
    }
  return f;
}

double denorm_series_range(const data::SeriesDataset& ds,
                           const data::NormInfo& norm) {
  double lo = data::denormalize_value(norm.method, norm.y, ds.y[0]);
  double hi = lo;
  for (double v : ds.y) {
    const double d = data::denormalize_value(norm.method, norm.y, v);
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  return hi - lo;
}

void cmd_prepare(const config::ExperimentConfig& cfg,
                 const std::string& override_dir) {
  const std::string dir = out_dir(cfg, override_dir);
  const Prepared p = prepare_data(cfg);
  const int total =
      p.train_ds.length() + p.val_ds.length() + p.test_ds.length();

  json manifest;
  manifest["schema_version"] = 1;
  manifest["dataset"] = cfg.dataset.name;
  manifest["K"] = total;
  manifest["normalization"] = {
      {"method", data::norm_method_name(p.norm.method)},
      {"fit_prefix", p.norm.fit_prefix},
      {"u", {{"a", p.norm.u.a}, {"b", p.norm.u.b}}},
      {"y", {{"a", p.norm.y.a}, {"b", p.norm.y.b}}}};
  manifest["split_percent"] = cfg.dataset.split;
  manifest["split_sizes"] = {{"train", p.train_ds.length()},
                             {"val", p.val_ds.length()},
                             {"test", p.test_ds.length()}};
  manifest["N"] = cfg.dataset.window;
  manifest["windows"] = {{"train", p.train.count()},
                         {"val", p.val.count()},
                         {"test", p.test.count()}};
  write_text(dir + "/manifest.json", manifest.dump(1) + "\n");
  write_split_csv(dir + "/train.csv", p.train_ds);
  write_split_csv(dir + "/val.csv", p.val_ds);
  write_split_csv(dir + "/test.csv", p.test_ds);
  log::info("prepared " + cfg.dataset.name + ": K=" + std::to_string(total) +
            " train_windows=" + std::to_string(p.train.count()));
  std::cout << dir << "/manifest.json\n";
}

void cmd_train_base(const config::ExperimentConfig& cfg, uint64_t seed,
                    const std::string& override_dir) {
  const std::string dir = out_dir(cfg, override_dir);
  const Prepared p = prepare_data(cfg);

  Rng rng(seed);
  model::ModelParams init =
      cfg.model.kind == model::ModelKind::Node
          ? model::make_node(cfg.model.regressor, cfg.model.hidden,
                             cfg.model.activation, rng)
          : model::make_lstm(cfg.model.regressor, cfg.model.hidden, rng);

  train::CrispTrainConfig tc;
  tc.epochs = cfg.train.epochs;
  tc.batch = cfg.train.batch;
  tc.adam.lr = cfg.train.lr;
  tc.seed = seed;
  auto res = train::train_mse(init, p.train, p.val, tc);

  const auto rc = model::crisp_rollout(res.params, p.test, false);
  std::vector<double> pred, target;
  for (int m = 0; m < p.test.count(); ++m)
    for (int k = rc.warmup; k < p.test.window(); ++k) {
      pred.push_back(
          data::denormalize_value(p.norm.method, p.norm.y, rc.ypred(m, k)));
      target.push_back(
          data::denormalize_value(p.norm.method, p.norm.y, p.test.y(m, k)));
    }
  const double test_rmse = metrics::rmse(pred, target);

  const std::string path = crisp_path(dir, seed);
  ckpt::save_crisp(path, {res.params, p.norm, cfg.dataset.name, seed});

  json m;
  m["seed"] = seed;
  m["test_rmse"] = test_rmse;
  m["best_epoch"] = res.best_epoch;
  m["best_val_mse"] = res.best_val;
  m["epochs"] = cfg.train.epochs;
  write_text(dir + "/crisp_s" + std::to_string(seed) + "_metrics.json",
             m.dump(1) + "\n");
  log::info("trained " + std::string(model::model_kind_name(cfg.model.kind)) +
            " seed=" + std::to_string(seed) +
            " test_rmse=" + std::to_string(test_rmse));
  std::cout << path << "\n";
}

void cmd_train_inn(const config::ExperimentConfig& cfg, uint64_t seed,
                   double alpha, const std::string& variant_name,
                   const std::string& override_dir) {
  const Variant v = parse_variant(variant_name);
  if (v.kind != cfg.model.kind)
    throw std::invalid_argument(
        "variant '" + v.name + "' does not match the configured model kind '" +
        model::model_kind_name(cfg.model.kind) + "'");
  const std::string dir = out_dir(cfg, override_dir);
  const std::string cpath = crisp_path(dir, seed);
  if (!fs::exists(cpath))
    throw std::invalid_argument("missing crisp checkpoint '" + cpath +
                                "' (run train-base first)");
  const auto crisp = ckpt::load_crisp(cpath);
  const Prepared p = prepare_data(cfg);

  uq::UQTrainConfig uc;
  uc.alpha = alpha;
  uc.lambda = cfg.uq.lambda;
  uc.epochs = cfg.uq.epochs;
  uc.batch = cfg.uq.batch;
  uc.r_h = cfg.uq.r_h;
  uc.r_o = cfg.uq.r_o;
  uc.trick = v.trick;
  uc.freeze_recurrent = cfg.uq.freeze_recurrent;
  uc.seed = seed;
  uc.adam.lr = cfg.uq.lr;

  const std::string ipath = inn_path(dir, v.name, alpha, seed);
  std::ofstream logfile(ipath + ".log.jsonl");
  auto res = uq::train_inn(crisp.params, p.train, p.val, uc, &logfile);

  ckpt::InnCheckpoint ic;
  ic.delta = std::move(res.delta);
  ic.crisp_sha256 = ckpt::file_sha256(cpath);
  ic.crisp_path = cpath;
  ic.alpha = alpha;
  ic.lambda = cfg.uq.lambda;
  ic.r_h = cfg.uq.r_h;
  ic.r_o = cfg.uq.r_o;
  ic.seed = seed;
  ckpt::save_inn(ipath, ic);
  log::info("trained " + v.name + " alpha=" + std::to_string(alpha) +
            " seed=" + std::to_string(seed) +
            " best_epoch=" + std::to_string(res.best_epoch));
  std::cout << ipath << "\n";
}

metrics::UQReport evaluate_variant(const config::ExperimentConfig& cfg,
                                   const Variant& v, double alpha,
                                   const std::string& dir, bool svg) {
  const Prepared p = prepare_data(cfg);
  const double range = denorm_series_range(p.test_ds, p.norm);

  std::vector<metrics::SeedMetrics> per_seed;
  for (uint64_t seed : cfg.seeds) {
    const std::string cpath = crisp_path(dir, seed);
    const std::string ipath = inn_path(dir, v.name, alpha, seed);
    if (!fs::exists(cpath) || !fs::exists(ipath))
      throw std::invalid_argument("missing checkpoint for seed " +
                                  std::to_string(seed) + " (expected '" +
                                  cpath + "' and '" + ipath + "')");
    const auto crisp = ckpt::load_crisp(cpath);
    const auto inn = ckpt::load_inn(ipath);
    if (inn.crisp_sha256 != ckpt::file_sha256(cpath))
      throw std::invalid_argument(
          "checkpoint mismatch: '" + ipath +
          "' was trained against a different crisp checkpoint than '" + cpath +
          "'");
    if (alpha_pct(inn.alpha) != alpha_pct(alpha))
      throw std::invalid_argument("checkpoint mismatch: '" + ipath +
                                  "' carries a different target coverage");
    if (crisp.params.kind != cfg.model.kind)
      throw std::invalid_argument("checkpoint mismatch: '" + cpath +
                                  "' model kind differs from the config");

    const auto pi =
        ivmodel::interval_forward_batch(crisp.params, inn.delta, p.test);
    const FlatEval f = flatten(pi, p.test, p.norm);
    metrics::SeedMetrics sm;
    sm.seed = seed;
    sm.rmse = metrics::rmse(f.center, f.target);
    sm.picp = metrics::picp(f.lower, f.upper, f.target);
    sm.pinaw = metrics::pinaw_with_range(f.lower, f.upper, range);
    per_seed.push_back(sm);

    const auto ivm = ivmodel::wrap(crisp.params, inn.delta);
    const auto maps = metrics::elasticity(
        crisp.params, ivm, metrics::ElasticityGranularity::PerEntry);
    for (const auto& m : maps) {
      std::string tname = m.name;
      for (auto& ch : tname)
        if (ch == '.') ch = '_';
      const std::string base = dir + "/elasticity_" + v.name + "_a" +
                               std::to_string(alpha_pct(alpha)) + "_s" +
                               std::to_string(seed) + "_" + tname;
      std::ostringstream ss;
      metrics::write_elasticity_csv(ss, m);
      write_text(base + ".csv", ss.str());
      if (svg) write_text(base + ".svg", metrics::render_heatmap_svg(m));
    }
  }

  const auto report =
      metrics::aggregate(cfg.dataset.name, v.name, alpha, per_seed);

  json j;
  j["schema_version"] = 1;
  j["dataset"] = report.dataset;
  j["variant"] = report.variant;
  j["alpha"] = report.alpha;
  j["n_seeds"] = report.n_seeds;
  j["single_seed"] = report.n_seeds == 1;
  json ps = json::array();
  for (const auto& s : report.per_seed)
    ps.push_back({{"seed", s.seed},
                  {"rmse", s.rmse},
                  {"picp", s.picp},
                  {"pinaw", s.pinaw}});
  j["per_seed"] = std::move(ps);
  j["aggregate"] = {
      {"rmse", {{"mean", report.rmse.mean}, {"std", report.rmse.stddev}}},
      {"picp", {{"mean", report.picp.mean}, {"std", report.picp.stddev}}},
      {"pinaw", {{"mean", report.pinaw.mean}, {"std", report.pinaw.stddev}}}};

  const std::string base =
      dir + "/report_" + v.name + "_a" + std::to_string(alpha_pct(alpha));
  write_text(base + ".json", j.dump(1) + "\n");

  std::ostringstream seeds_csv;
  seeds_csv << "seed,rmse,picp,pinaw\n";
  for (const auto& s : report.per_seed)
    seeds_csv << s.seed << ',' << s.rmse << ',' << s.picp << ',' << s.pinaw
              << '\n';
  write_text(base + "_seeds.csv", seeds_csv.str());

  std::ostringstream box;
  metrics::write_boxplot_csv(box, report);
  write_text(base + "_boxplot.csv", box.str());
  return report;
}

void print_report(const metrics::UQReport& r) {
  std::cout << r.dataset << " " << r.variant << " alpha=" << r.alpha
            << " seeds=" << r.n_seeds << "  PICP " << r.picp.mean << " (+-"
            << r.picp.stddev << ")  PINAW " << r.pinaw.mean << " (+-"
            << r.pinaw.stddev << ")  RMSE " << r.rmse.mean << " (+-"
            << r.rmse.stddev << ")\n";
}

void cmd_reproduce(const std::vector<std::string>& config_paths,
                   const std::string& override_dir, bool svg) {
  for (const auto& path : config_paths) {
    const auto cfg = config::load_config(path);
    const std::string dir = out_dir(cfg, override_dir);
    log::info("reproduce: " + cfg.dataset.name + " (" + path + ")");
    cmd_prepare(cfg, dir);
    for (uint64_t seed : cfg.seeds) cmd_train_base(cfg, seed, dir);
    const std::vector<std::string> variants =
        cfg.model.kind == model::ModelKind::Node
            ? std::vector<std::string>{"inode1", "inode2"}
            : std::vector<std::string>{"ilstm1", "ilstm2"};
    for (const auto& vname : variants)
      for (double alpha : cfg.uq.alphas) {
        for (uint64_t seed : cfg.seeds)
          cmd_train_inn(cfg, seed, alpha, vname, dir);
        const auto report =
            evaluate_variant(cfg, parse_variant(vname), alpha, dir, svg);
        print_report(report);
      }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interval LSTM / NODE system identification toolkit"};
  app.require_subcommand(1);

  std::string config_path, override_dir, variant = "inode2", kernels;
  uint64_t seed = 1;
  double alpha = 0.9;
  bool svg = false;
  std::vector<std::string> config_paths;

  app.add_option("--kernels", kernels,
                 "force kernel variant: scalar|avx2|auto");

  auto* prepare = app.add_subcommand("prepare", "normalize, split and window");
  prepare->add_option("--config", config_path, "experiment config")->required();
  prepare->add_option("--out", override_dir, "output directory override");

  auto* tbase = app.add_subcommand("train-base", "train the crisp model");
  tbase->add_option("--config", config_path)->required();
  tbase->add_option("--seed", seed, "rng seed")->required();
  tbase->add_option("--out", override_dir);

  auto* tinn = app.add_subcommand("train-inn", "train interval radii");
  tinn->add_option("--config", config_path)->required();
  tinn->add_option("--seed", seed)->required();
  tinn->add_option("--alpha", alpha, "target coverage")->required();
  tinn->add_option("--variant", variant, "ilstm1|ilstm2|inode1|inode2")
      ->required();
  tinn->add_option("--out", override_dir);

  auto* eval = app.add_subcommand("evaluate", "aggregate metrics across seeds");
  eval->add_option("--config", config_path)->required();
  eval->add_option("--alpha", alpha)->required();
  eval->add_option("--variant", variant)->required();
  eval->add_option("--out", override_dir);
  eval->add_flag("--svg", svg, "also render elasticity heatmaps as SVG");

  auto* rep =
      app.add_subcommand("reproduce", "full pipeline for every config given");
  rep->add_option("--config", config_paths, "experiment configs")->required();
  rep->add_option("--out", override_dir);
  rep->add_flag("--svg", svg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (!kernels.empty()) kern::select(kernels);
    if (app.got_subcommand(prepare))
      cmd_prepare(config::load_config(config_path), override_dir);
    else if (app.got_subcommand(tbase))
      cmd_train_base(config::load_config(config_path), seed, override_dir);
    else if (app.got_subcommand(tinn))
      cmd_train_inn(config::load_config(config_path), seed, alpha, variant,
                    override_dir);
    else if (app.got_subcommand(eval)) {
      const auto cfg = config::load_config(config_path);
      const auto report = evaluate_variant(cfg, parse_variant(variant), alpha,
                                           out_dir(cfg, override_dir), svg);
      print_report(report);
    } else if (app.got_subcommand(rep)) {
      cmd_reproduce(config_paths, override_dir, svg);
    }
    return 0;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return 2;
  }
}
