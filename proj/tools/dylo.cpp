// Copyright (c) 2026 The dylo Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// dylo: generate data, train, evaluate, detect and benchmark from the shell.
//
// Exit codes: 0 success, 1 usage, 2 bad input data or files, 3 anything else.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "draw.hpp"
#include "dylo/bench.hpp"
#include "dylo/checkpoint.hpp"
#include "dylo/config.hpp"
#include "dylo/dataset.hpp"
#include "dylo/errors.hpp"
#include "dylo/eval.hpp"
#include "dylo/image.hpp"
#include "dylo/preprocess.hpp"
#include "dylo/synth.hpp"
#include "dylo/train.hpp"

namespace fs = std::filesystem;

namespace {

using namespace dylo;

enum Exit { kOk = 0, kUsage = 1, kData = 2, kRuntime = 3 };

std::string read_text(const fs::path& p) {
  const auto bytes = read_file(p);
  return std::string(bytes.begin(), bytes.end());
}

void print_line(std::FILE* f, const char* fmt, auto... args) {
  std::fprintf(f, fmt, args...);
  std::fputc('\n', f);
}

// ---- gen-data

struct GenArgs {
  fs::path spec;
  fs::path out;
};

int run_gen(const GenArgs& a) {
  const GenSpec spec = gen_spec_from_json(read_text(a.spec));
  const DatasetManifest m = gen_dataset(spec, a.out);
  print_line(stdout, "wrote %zu images (%zu train, %zu test) to %s", m.entries.size(),
             m.count(Split::train), m.count(Split::test), a.out.string().c_str());
  print_line(stdout, "manifest: %s", (a.out / "manifest.json").string().c_str());
  return kOk;
}

// ---- train

struct TrainArgs {
  fs::path data;
  fs::path config;
  fs::path out;
  fs::path grid;
  fs::path log;
  int workers = 0;  // 0: use the grid file's value
  bool quiet = false;
};

TrainData load_train_data(const DatasetManifest& m) {
  TrainData d;
  d.train = load_samples(m, Split::train);
  d.val = load_samples(m, Split::test);
  d.class_names = m.class_names;
  if (d.train.empty()) throw DataError("manifest has no train entries");
  if (d.val.empty()) throw DataError("manifest has no test entries to validate on");
  return d;
}

int run_train(const TrainArgs& a) {
  RunConfig rc = run_config_from_json(read_text(a.config));
  const DatasetManifest manifest = load_manifest(a.data);
  const int classes = static_cast<int>(manifest.class_names.size());
  if (rc.declared_classes && *rc.declared_classes != classes) {
    throw ConfigError("config declares " + std::to_string(*rc.declared_classes) +
                      " classes but the manifest's strategy has " + std::to_string(classes));
  }
  rc.model.num_classes = classes;
  rc.model.validate();
  const TrainData data = load_train_data(manifest);

  TrainOptions opts;
  opts.loss = rc.loss;
  opts.eval = rc.eval;
  opts.augment = rc.augment;

  TrainConfig chosen = rc.train;
  if (!a.grid.empty()) {
    const GridSpec grid = grid_spec_from_json(read_text(a.grid));
    const int workers = a.workers > 0 ? a.workers : grid.workers;
    std::mutex io;
    auto trial = [&](const TrainConfig& c) {
      Detectorf m(rc.model);
      const TrainResult r = train_loop(m, data, c, opts);
      const EpochLog& best = r.log.at(static_cast<std::size_t>(r.best_epoch - 1));
      if (!a.quiet) {
        std::lock_guard lock(io);
        print_line(stderr, "trial lr=%g wd=%g batch=%d: val mAP %.4f val loss %.4f",
                   c.learning_rate, c.weight_decay, c.batch_size, r.best_map, best.val_loss);
      }
      return TrialOutcome{r.best_map, best.val_loss};
    };
    const GridResult gr = grid_search(grid.expand(rc.train), grid.budget_epochs, trial, workers);
    chosen = gr.best;
    chosen.max_epochs = rc.train.max_epochs;
    print_line(stdout, "grid: %zu trials, best lr=%g wd=%g batch=%d (val mAP %.4f)",
               gr.trials.size(), chosen.learning_rate, chosen.weight_decay, chosen.batch_size,
               gr.trials[gr.best_index].outcome.val_map);
  }

  if (!a.quiet) {
    opts.on_epoch = [](const EpochLog& e) {
      print_line(stderr, "epoch %3d  lr %.3g  train %.5f  val %.5f  mAP %.4f", e.epoch, e.lr,
                 e.train_loss, e.val_loss, e.val_map);
    };
  }
  Detectorf model(rc.model);
  const TrainResult r = train_loop(model, data, chosen, opts);

  CheckpointMeta meta;
  meta.epoch = r.best_epoch;
  meta.best_map = r.best_map;
  meta.seed = chosen.seed;
  meta.class_names = manifest.class_names;
  save_checkpoint(model, meta, a.out);

  fs::path log = a.log;
  if (log.empty()) log = fs::path(a.out).replace_extension(".csv");
  write_text(log, epoch_log_csv(r.log));

  print_line(stdout, "trained %zu epochs%s; best val mAP %.4f at epoch %d", r.log.size(),
             r.early_stopped ? " (early stop)" : "", r.best_map, r.best_epoch);
  if (r.dropped_targets > 0) {
    print_line(stdout, "note: %zu boxes shared a grid cell with a larger box and were not trained on",
               r.dropped_targets);
  }
  print_line(stdout, "checkpoint: %s", a.out.string().c_str());
  print_line(stdout, "epoch log: %s", log.string().c_str());
  return kOk;
}

// ---- eval

struct EvalArgs {
  fs::path ckpt;
  fs::path data;
  fs::path out;
  fs::path config;
  std::string split = "test";
};

EvalConfig eval_config(const fs::path& config) {
  if (config.empty()) return {};
  return run_config_from_json(read_text(config)).eval;
}

void check_classes(const CheckpointMeta& meta, const DatasetManifest& m) {
  if (meta.class_names != m.class_names) {
    throw DataError("checkpoint classes do not match the manifest's labeling strategy");
  }
}

int run_eval(const EvalArgs& a) {
  const LoadedCheckpoint ck = load_checkpoint(a.ckpt);
  const DatasetManifest m = load_manifest(a.data);
  check_classes(ck.meta, m);
  const Split split = a.split == "train" ? Split::train : Split::test;
  const auto samples = load_samples(m, split);
  if (samples.empty()) throw DataError("manifest has no " + a.split + " entries");
  const MetricsReport report = evaluate(ck.model, samples, m.class_names, eval_config(a.config));

  fs::path out = a.out;
  if (out.empty()) out = fs::path(a.ckpt).replace_extension(".eval.json");
  const bool as_json = out.extension() == ".json";
  write_text(out, as_json ? report.to_json() : report.to_table());
  std::fputs(report.to_table().c_str(), stdout);
  print_line(stdout, "report: %s", out.string().c_str());
  return kOk;
}

// ---- detect

struct DetectArgs {
  fs::path ckpt;
  fs::path image;
  fs::path out;
  fs::path config;
  std::optional<double> conf;
};

int run_detect(const DetectArgs& a) {
  const LoadedCheckpoint ck = load_checkpoint(a.ckpt);
  const Image img = read_pnm(a.image);
  const EvalConfig ec = eval_config(a.config);
  const ModelConfig& mc = ck.model.config();
  const Letterbox lb = Letterbox::fit(img.width, img.height, mc.input_size);

  std::vector<DetBox> boxes;
  for (const auto& d : detect(ck.model, preprocess(img, mc), ec, a.conf.value_or(ec.conf_thresh))) {
    boxes.push_back(lb.unmap_box(d));
  }
  for (const auto& b : boxes) {
    const auto id = static_cast<std::size_t>(b.class_id);
    const std::string name =
        id < ck.meta.class_names.size() ? ck.meta.class_names[id] : std::to_string(b.class_id);
    print_line(stdout, "%s %.4f %.1f %.1f %.1f %.1f", name.c_str(), b.score, b.x1(), b.y1(),
               b.x2(), b.y2());
  }
  if (!a.out.empty()) write_pnm(a.out, tools::draw_boxes(img, boxes));
  return kOk;
}

// ---- bench

struct BenchArgs {
  fs::path ckpt;
  std::string scenario = "all";
  int n = 20;
  int warmup = 5;
  std::uint64_t seed = 0;
  fs::path json;
};

int run_bench(const BenchArgs& a) {
  std::vector<Scenario> scenarios;
  if (a.scenario == "all") {
    scenarios = {Scenario::simple, Scenario::complex, Scenario::multi_target, Scenario::high_res};
  } else {
    const auto s = parse_scenario(a.scenario);
    if (!s) throw ArgumentError("unknown scenario '" + a.scenario + "'");
    scenarios = {*s};
  }
  const LoadedCheckpoint ck = load_checkpoint(a.ckpt);
  std::vector<BenchRow> rows;
  for (Scenario s : scenarios) rows.push_back(bench_latency(ck.model, s, a.n, a.warmup, a.seed));
  std::fputs(bench_table(rows).c_str(), stdout);
  if (!a.json.empty()) write_text(a.json, bench_json(rows));
  return kOk;
}

int classify(const std::exception& e) {
  // Problems with files the user handed us are data errors; the rest are ours.
  if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const ParseError*>(&e) ||
      dynamic_cast<const AnnotationError*>(&e) || dynamic_cast<const StrategyError*>(&e) ||
      dynamic_cast<const DataError*>(&e) || dynamic_cast<const CheckpointError*>(&e) ||
      dynamic_cast<const ConfigError*>(&e)) {
    return kData;
  }
  return kRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dylo: desk-scale defect detector"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  GenArgs gen;
  auto* g = app.add_subcommand("gen-data", "Generate a synthetic labelled dataset");
  g->add_option("--spec", gen.spec, "generator spec (JSON)")->required();
  g->add_option("--out", gen.out, "output directory")->required();

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train a detector and write a checkpoint");
  t->add_option("--data", tr.data, "dataset manifest (JSON)")->required();
  t->add_option("--config", tr.config, "run config (JSON)")->required();
  t->add_option("--out", tr.out, "checkpoint path")->required();
  t->add_option("--grid", tr.grid, "grid search spec (JSON)");
  t->add_option("--log", tr.log, "epoch log CSV (default: checkpoint path with .csv)");
  t->add_option("--workers", tr.workers, "grid search worker threads")->check(CLI::NonNegativeNumber);
  t->add_flag("--quiet", tr.quiet, "no per-epoch progress on stderr");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset split");
  e->add_option("--ckpt", ev.ckpt, "checkpoint")->required();
  e->add_option("--data", ev.data, "dataset manifest (JSON)")->required();
  e->add_option("--out", ev.out, "report file; .json writes JSON, anything else the table");
  e->add_option("--config", ev.config, "run config whose eval section sets thresholds");
  e->add_option("--split", ev.split, "train or test")->check(CLI::IsMember({"train", "test"}));

  DetectArgs de;
  auto* d = app.add_subcommand("detect", "Run the detector on one image");
  d->add_option("--ckpt", de.ckpt, "checkpoint")->required();
  d->add_option("--image", de.image, "PPM or PGM image")->required();
  d->add_option("--out", de.out, "annotated PPM output");
  d->add_option("--config", de.config, "run config whose eval section sets thresholds");
  d->add_option("--conf", de.conf, "score threshold")->check(CLI::Range(0.0, 1.0));

  BenchArgs be;
  auto* b = app.add_subcommand("bench", "Measure detection latency per scenario");
  b->add_option("--ckpt", be.ckpt, "checkpoint")->required();
  b->add_option("--scenario", be.scenario, "simple, complex, multi_target, high_res or all")
      ->check(CLI::IsMember({"simple", "complex", "multi_target", "high_res", "all"}));
  b->add_option("--n", be.n, "timed images");
  b->add_option("--warmup", be.warmup, "untimed warmup runs");
  b->add_option("--seed", be.seed, "image generator seed");
  b->add_option("--json", be.json, "also write the rows as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForAllHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    app.exit(ex);
    return kUsage;
  }

  try {
    if (g->parsed()) return run_gen(gen);
    if (t->parsed()) return run_train(tr);
    if (e->parsed()) return run_eval(ev);
    if (d->parsed()) return run_detect(de);
    if (b->parsed()) return run_bench(be);
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "dylo: error: %s\n", ex.what());
    return classify(ex);
  }
  return kUsage;
}
