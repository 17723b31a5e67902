#include "impact/eval/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "impact/core/error.hpp"
#include "impact/core/random.hpp"
#include "impact/core/text.hpp"
#include "impact/dataset/augment.hpp"
#include "impact/dataset/event_file.hpp"

namespace impact::eval {

namespace fs = std::filesystem;

void write_data_dir(const DataSet& data, const fs::path& dir) {
  if (data.events.size() != data.labels.size()) throw InvalidParameter("labels must run parallel to events");
  std::error_code ec;
  fs::create_directories(dir / "events", ec);
  if (ec) throw IoError("cannot create " + (dir / "events").string() + ": " + ec.message());
  dataset::Manifest manifest;
  for (std::size_t i = 0; i < data.events.size(); ++i) {
    dataset::write_event_file(data.events[i], dir / "events" / (data.events[i].event_id + ".csv"));
    manifest.push_back({data.events[i].event_id, data.labels[i], std::nullopt, std::nullopt, "", ""});
  }
  dataset::write_manifest_file(manifest, dir / "manifest.csv");
}

DataSet load_data_dir(const fs::path& dir, const TriggerConfig& window) {
  const auto manifest = dataset::read_manifest_file(dir / "manifest.csv");
  std::set<std::string> listed;
  DataSet data;
  for (const auto& row : manifest) {
    dataset::check_identifier(row.event_id, "event_id");
    if (!listed.insert(row.event_id).second) throw InvalidParameter("manifest lists " + row.event_id + " twice");
    KinematicEvent e = dataset::parse_event_file(dir / "events" / (row.event_id + ".csv"), window);
    if (e.event_id != row.event_id) {
      throw SchemaError("file for " + row.event_id + " carries event_id " + e.event_id);
    }
    row.label.validate();
    data.events.push_back(std::move(e));
    data.labels.push_back(row.label);
  }
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir / "events", ec)) {
    if (entry.path().extension() != ".csv") continue;
    if (!listed.contains(entry.path().stem().string())) {
      throw StructuralError(entry.path().filename().string() + " is not listed in the manifest");
    }
  }
  if (ec) throw IoError("cannot list " + (dir / "events").string() + ": " + ec.message());
  return data;
}

std::vector<LabeledWindow> make_windows(const DataSet& data, const ProcessingConfig& processing,
                                        const dataset::SplitSpec* split) {
  std::vector<LabeledWindow> out;
  out.reserve(data.events.size());
  for (std::size_t i = 0; i < data.events.size(); ++i) {
    out.push_back({data.events[i].event_id, normalize(build_window(data.events[i], processing), processing),
                   data.labels[i], Partition::Unassigned});
  }
  if (split) dataset::apply_split(out, *split);
  return out;
}

std::vector<LabeledWindow> select_partition(std::span<const LabeledWindow> windows, Partition p) {
  std::vector<LabeledWindow> out;
  for (const auto& w : windows) {
    if (w.partition == p) out.push_back(w);
  }
  return out;
}

std::vector<LabeledWindow> training_set(std::span<const LabeledWindow> windows, const dataset::SplitSpec& split,
                                        const PipelineConfig& cfg) {
  auto originals = select_partition(windows, Partition::Train);
  if (originals.empty()) throw InvalidParameter("the split leaves no training events");
  if (!(split.augment_train && cfg.augment)) return originals;
  return dataset::expand_training_set(originals, cfg.augmentation);
}

ClassWeights weights_for(std::span<const LabeledWindow> train, const PipelineConfig& cfg) {
  if (!cfg.class_weighting) return {1.0, 1.0};
  return dataset::class_weights(train);
}

std::string content_id(std::string_view prefix, std::string_view text) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(std::span<const char>(text.data(), text.size()))));
  return std::string(prefix) + "-" + buf;
}

mignet::MiGNetModel train_mignet(std::span<const LabeledWindow> train, const PipelineConfig& cfg,
                                 const mignet::EpochCallback& on_epoch) {
  auto model = mignet::MiGNetModel::initialize(cfg.architecture, derive_seed(cfg.seed, 1), cfg.conv_init_gain);
  mignet::TrainConfig tc = cfg.training;
  tc.seed = derive_seed(cfg.seed, 2);
  tc.class_weights = weights_for(train, cfg);
  mignet::train(model, train, tc, on_epoch);
  return model;
}

SvmTraining train_svm_pipeline(std::span<const LabeledWindow> train, const PipelineConfig& cfg) {
  for (const auto& w : train) {
    if (w.partition == Partition::Test) throw ContaminationError("test window " + w.id + " in a training set");
  }
  const auto x = svm::extract_all(train, cfg.processing);
  std::vector<EventClass> labels;
  for (const auto& w : train) labels.push_back(w.label.value);
  svm::SelectionConfig sc = cfg.selection;
  sc.seed = derive_seed(cfg.seed, 3);
  SvmTraining out;
  out.selection = svm::sequential_forward_selection(x, labels, sc);
  if (out.selection.selected.empty()) {
    throw SolverError("feature selection found no feature that beats the majority-class baseline");
  }
  out.model = svm::train_svm(x, labels, cfg.selection.svm, out.selection.selected);
  return out;
}

LoadedModel load_any_model(const fs::path& path) {
  const std::string text = dataset::read_text_file(path);
  LoadedModel m;
  if (text.starts_with("mignet-model")) {
    m.kind = "mignet";
    m.mignet = mignet::load_model(path);
  } else if (text.starts_with("svm-model")) {
    m.kind = "svm";
    m.svm = svm::parse_svm(text);
  } else {
    throw FormatError(path.string() + " is neither a mignet nor an svm model file");
  }
  m.id = content_id(m.kind, text);
  return m;
}

dataset::PredictionRecord predict_any(const LoadedModel& model, const LabeledWindow& window,
                                      const PipelineConfig& cfg) {
  if (model.mignet) {
    const auto p = mignet::predict(*model.mignet, window.window, cfg.tie_rule);
    return {p.label, p.score};
  }
  const auto p = svm::predict_svm(*model.svm, svm::extract_features(window.window, cfg.processing));
  return {p.label, p.decision};
}

Classifier classifier_for(const LoadedModel& model, const PipelineConfig& cfg) {
  return [&model, cfg](const LabeledWindow& w) { return predict_any(model, w, cfg).label; };
}

namespace {

std::vector<mignet::ConvSpec> repeat_to(const std::vector<mignet::ConvSpec>& base, std::size_t n,
                                        mignet::ConvSpec fallback) {
  std::vector<mignet::ConvSpec> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(i < base.size() ? base[i] : base.empty() ? fallback : base.back());
  }
  return out;
}

}  // namespace

SweepResult run_sweep(std::span<const LabeledWindow> train_originals, const PipelineConfig& cfg,
                      const std::function<void(const SweepRow&)>& on_row) {
  for (const auto& w : train_originals) {
    if (w.partition == Partition::Test) throw ContaminationError("test window " + w.id + " offered to the sweep");
    if (w.label.source == LabelSource::Augmented) throw InvalidParameter("the sweep takes originals only");
  }
  std::vector<dataset::SplitItem> items;
  for (const auto& w : train_originals) items.push_back({w.id, w.label.value});
  dataset::SplitRequest req;
  req.test_fraction = cfg.sweep_validation_fraction;
  const auto inner = dataset::make_split(items, req, derive_seed(cfg.seed, 4));

  std::vector<LabeledWindow> fit, validation;
  for (auto w : train_originals) {
    if (inner.is_test(w.id)) {
      w.partition = Partition::Test;
      validation.push_back(std::move(w));
    } else {
      w.partition = Partition::Train;
      fit.push_back(std::move(w));
    }
  }
  if (fit.empty() || validation.empty()) throw InvalidParameter("too few events to hold out a validation set");
  if (cfg.augment) fit = dataset::expand_training_set(fit, cfg.augmentation);

  PipelineConfig trial = cfg;
  trial.training.epochs = cfg.sweep_epochs;
  SweepResult result;
  auto score = [&](const std::string& stage, const mignet::Architecture& arch) {
    trial.architecture = arch;
    const auto model = train_mignet(fit, trial);
    std::size_t right = 0;
    for (const auto& w : validation) right += mignet::predict(model, w.window, cfg.tie_rule).label == w.label.value;
    SweepRow row{stage, arch.descriptor(), static_cast<double>(right) / static_cast<double>(validation.size())};
    result.rows.push_back(row);
    if (on_row) on_row(row);
    return row.validation_accuracy;
  };
  auto stage = [&](const std::string& name, const std::vector<mignet::Architecture>& candidates) {
    double best = -1.0;
    mignet::Architecture winner = candidates.front();
    for (const auto& arch : candidates) {
      const double acc = score(name, arch);
      if (acc > best) {
        best = acc;
        winner = arch;
      }
    }
    return winner;
  };

  mignet::Architecture current = cfg.architecture;
  std::vector<mignet::Architecture> candidates;
  for (auto n : cfg.sweep_conv1d_counts) {
    auto a = current;
    a.conv1d = repeat_to(cfg.architecture.conv1d, n, {16, 1, 7});
    candidates.push_back(a);
  }
  current = stage("conv1d", candidates);
  candidates.clear();
  for (auto n : cfg.sweep_conv2d_counts) {
    auto a = current;
    a.conv2d = repeat_to(cfg.architecture.conv2d, n, {32, 3, 3});
    candidates.push_back(a);
  }
  current = stage("conv2d", candidates);
  candidates.clear();
  for (auto head : {mignet::Head::GlobalAveragePooling, mignet::Head::FlattenDense}) {
    auto a = current;
    a.head = head;
    candidates.push_back(a);
  }
  result.best = stage("head", candidates);
  return result;
}

std::string format_sweep(const SweepResult& result) {
  std::string out = "stage,descriptor,validation_accuracy\n";
  for (const auto& r : result.rows) out += r.stage + "," + r.descriptor + "," + format_exact(r.validation_accuracy) + "\n";
  out += "# best=" + result.best.descriptor() + "\n";
  return out;
}

}  // namespace impact::eval
