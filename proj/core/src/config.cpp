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


#include "dylo/config.hpp"

#include <nlohmann/json.hpp>

#include "dylo/errors.hpp"

namespace dylo {

using nlohmann::json;

namespace {

json parse_doc(const std::string& text, const char* what) {
  try {
    json doc = json::parse(text);
    if (!doc.is_object()) throw ConfigError(std::string(what) + ": expected an object");
    return doc;
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string(what) + ": invalid JSON: " + e.what());
  }
}

template <typename T>
T get_as(const json& v, const std::string& where) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("bad value for '" + where + "'");
  }
}

[[noreturn]] void unknown(const std::string& section, const std::string& key) {
  throw ConfigError("unknown key '" + key + "' in " + section);
}

void read_model(const json& j, RunConfig& rc) {
  ModelConfig& m = rc.model;
  for (const auto& [k, v] : j.items()) {
    const std::string w = "model." + k;
    if (k == "input_size") m.input_size = get_as<int>(v, w);
    else if (k == "input_channels") m.input_channels = get_as<int>(v, w);
    else if (k == "num_classes") rc.declared_classes = m.num_classes = get_as<int>(v, w);
    else if (k == "strides") m.strides = get_as<std::vector<int>>(v, w);
    else if (k == "width") m.width = get_as<int>(v, w);
    else if (k == "resc2net_n") m.resc2net_n = get_as<int>(v, w);
    else if (k == "sppf_kernels") m.sppf_kernels = get_as<std::vector<int>>(v, w);
    else if (k == "pconv_ratio") {
      const auto r = get_as<std::vector<int>>(v, w);
      if (r.size() != 2) throw ConfigError("model.pconv_ratio must be [num, den]");
      m.pconv_ratio = Ratio{r[0], r[1]};
    } else if (k == "seed") m.seed = get_as<std::uint64_t>(v, w);
    else unknown("model", k);
  }
}

void read_train(const json& j, TrainConfig& t) {
  for (const auto& [k, v] : j.items()) {
    const std::string w = "train." + k;
    if (k == "learning_rate") t.learning_rate = get_as<double>(v, w);
    else if (k == "batch_size") t.batch_size = get_as<int>(v, w);
    else if (k == "weight_decay") t.weight_decay = get_as<double>(v, w);
    else if (k == "max_epochs") t.max_epochs = get_as<int>(v, w);
    else if (k == "decay_factor") t.decay_factor = get_as<double>(v, w);
    else if (k == "plateau_patience") t.plateau_patience = get_as<int>(v, w);
    else if (k == "stop_patience") t.stop_patience = get_as<int>(v, w);
    else if (k == "seed") t.seed = get_as<std::uint64_t>(v, w);
    else if (k == "augment") t.augment = get_as<std::vector<std::string>>(v, w);
    else if (k == "augment_prob") t.augment_prob = get_as<double>(v, w);
    else unknown("train", k);
  }
  for (const auto& op : t.augment) {
    if (!parse_aug_op(op)) throw ConfigError("train.augment: unknown op '" + op + "'");
  }
}

void read_loss(const json& j, LossWeights& l) {
  for (const auto& [k, v] : j.items()) {
    const std::string w = "loss." + k;
    if (k == "lambda_box") l.lambda_box = get_as<double>(v, w);
    else if (k == "lambda_obj") l.lambda_obj = get_as<double>(v, w);
    else if (k == "lambda_cls") l.lambda_cls = get_as<double>(v, w);
    else if (k == "neg_weight") l.neg_weight = get_as<double>(v, w);
    else unknown("loss", k);
  }
}

void read_eval(const json& j, EvalConfig& e) {
  for (const auto& [k, v] : j.items()) {
    const std::string w = "eval." + k;
    if (k == "match_iou") e.match_iou = get_as<double>(v, w);
    else if (k == "nms_iou") e.nms_iou = get_as<double>(v, w);
    else if (k == "conf_thresh") e.conf_thresh = get_as<double>(v, w);
    else if (k == "ap_conf_thresh") e.ap_conf_thresh = get_as<double>(v, w);
    else unknown("eval", k);
  }
  for (double v : {e.match_iou, e.nms_iou, e.conf_thresh, e.ap_conf_thresh}) {
    if (!(v >= 0 && v <= 1)) throw ConfigError("eval thresholds must lie in [0, 1]");
  }
}

void read_augment(const json& j, AugmentParams& a) {
  for (const auto& [k, v] : j.items()) {
    const std::string w = "augment." + k;
    if (k == "max_rotate_deg") a.max_rotate_deg = get_as<double>(v, w);
    else if (k == "min_scale") a.min_scale = get_as<double>(v, w);
    else if (k == "max_scale") a.max_scale = get_as<double>(v, w);
    else if (k == "max_translate") a.max_translate = get_as<double>(v, w);
    else if (k == "max_brightness") a.max_brightness = get_as<double>(v, w);
    else if (k == "max_contrast") a.max_contrast = get_as<double>(v, w);
    else if (k == "min_crop") a.min_crop = get_as<double>(v, w);
    else unknown("augment", k);
  }
  if (!(a.min_scale > 0 && a.min_scale <= a.max_scale)) throw ConfigError("augment scale range");
  if (!(a.min_crop > 0 && a.min_crop <= 1)) throw ConfigError("augment.min_crop must lie in (0, 1]");
}

const json& section(const json& v, const std::string& name) {
  if (!v.is_object()) throw ConfigError("section '" + name + "' must be an object");
  return v;
}

}  // namespace

RunConfig run_config_from_json(const std::string& text) {
  const json doc = parse_doc(text, "config");
  RunConfig rc;
  for (const auto& [k, v] : doc.items()) {
    if (k == "model") read_model(section(v, k), rc);
    else if (k == "train") read_train(section(v, k), rc.train);
    else if (k == "loss") read_loss(section(v, k), rc.loss);
    else if (k == "eval") read_eval(section(v, k), rc.eval);
    else if (k == "augment") read_augment(section(v, k), rc.augment);
    else unknown("config", k);
  }
  rc.model.validate();
  rc.train.validate();
  rc.loss.validate();
  return rc;
}

std::string run_config_to_json(const RunConfig& rc) {
  const ModelConfig& m = rc.model;
  const TrainConfig& t = rc.train;
  json doc = {
      {"model",
       {{"input_size", m.input_size},
        {"input_channels", m.input_channels},
        {"num_classes", m.num_classes},
        {"strides", m.strides},
        {"width", m.width},
        {"resc2net_n", m.resc2net_n},
        {"sppf_kernels", m.sppf_kernels},
        {"pconv_ratio", {m.pconv_ratio.num, m.pconv_ratio.den}},
        {"seed", m.seed}}},
      {"train",
       {{"learning_rate", t.learning_rate},
        {"batch_size", t.batch_size},
        {"weight_decay", t.weight_decay},
        {"max_epochs", t.max_epochs},
        {"decay_factor", t.decay_factor},
        {"plateau_patience", t.plateau_patience},
        {"stop_patience", t.stop_patience},
        {"seed", t.seed},
        {"augment", t.augment},
        {"augment_prob", t.augment_prob}}},
      {"loss",
       {{"lambda_box", rc.loss.lambda_box},
        {"lambda_obj", rc.loss.lambda_obj},
        {"lambda_cls", rc.loss.lambda_cls},
        {"neg_weight", rc.loss.neg_weight}}},
      {"eval",
       {{"match_iou", rc.eval.match_iou},
        {"nms_iou", rc.eval.nms_iou},
        {"conf_thresh", rc.eval.conf_thresh},
        {"ap_conf_thresh", rc.eval.ap_conf_thresh}}},
      {"augment",
       {{"max_rotate_deg", rc.augment.max_rotate_deg},
        {"min_scale", rc.augment.min_scale},
        {"max_scale", rc.augment.max_scale},
        {"max_translate", rc.augment.max_translate},
        {"max_brightness", rc.augment.max_brightness},
        {"max_contrast", rc.augment.max_contrast},
        {"min_crop", rc.augment.min_crop}}}};
  return doc.dump(2) + "\n";
}

std::vector<TrainConfig> GridSpec::expand(const TrainConfig& base) const {
  if (learning_rate.empty() && weight_decay.empty() && batch_size.empty()) {
    return default_grid(base);
  }
  const std::vector<double> lrs = learning_rate.empty() ? std::vector{base.learning_rate} : learning_rate;
  const std::vector<double> wds = weight_decay.empty() ? std::vector{base.weight_decay} : weight_decay;
  const std::vector<int> bss = batch_size.empty() ? std::vector{base.batch_size} : batch_size;
  std::vector<TrainConfig> out;
  for (double lr : lrs) {
    for (double wd : wds) {
      for (int bs : bss) {
        TrainConfig c = base;
        c.learning_rate = lr;
        c.weight_decay = wd;
        c.batch_size = bs;
        out.push_back(c);
      }
    }
  }
  return out;
}

GridSpec grid_spec_from_json(const std::string& text) {
  const json doc = parse_doc(text, "grid");
  GridSpec g;
  for (const auto& [k, v] : doc.items()) {
    if (k == "budget_epochs") g.budget_epochs = get_as<int>(v, k);
    else if (k == "workers") g.workers = get_as<int>(v, k);
    else if (k == "learning_rate") g.learning_rate = get_as<std::vector<double>>(v, k);
    else if (k == "weight_decay") g.weight_decay = get_as<std::vector<double>>(v, k);
    else if (k == "batch_size") g.batch_size = get_as<std::vector<int>>(v, k);
    else unknown("grid", k);
  }
  if (g.budget_epochs < 1) throw ConfigError("grid.budget_epochs must be >= 1");
  if (g.workers < 1) throw ConfigError("grid.workers must be >= 1");
  return g;
}

}  // namespace dylo
