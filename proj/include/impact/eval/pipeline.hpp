#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "impact/dataset/package.hpp"
#include "impact/dataset/split.hpp"
#include "impact/eval/config.hpp"
#include "impact/eval/report.hpp"
#include "impact/mignet/model.hpp"
#include "impact/svm/svm.hpp"

namespace impact::eval {

/// Events with their labels, in manifest (event id) order.
struct DataSet {
  std::vector<KinematicEvent> events;
  std::vector<Label> labels;
};

/// Data directory layout: <dir>/manifest.csv and <dir>/events/<event_id>.csv.
void write_data_dir(const DataSet& data, const std::filesystem::path& dir);
/// Every manifest row must have its event file and every event file a row.
DataSet load_data_dir(const std::filesystem::path& dir, const TriggerConfig& window = {});

/// Normalized windows, partitioned by `split` when given.
std::vector<LabeledWindow> make_windows(const DataSet& data, const ProcessingConfig& processing,
                                        const dataset::SplitSpec* split = nullptr);

std::vector<LabeledWindow> select_partition(std::span<const LabeledWindow> windows, Partition p);

/// Train-partition originals, expanded when both the split and the config
/// ask for augmentation.
std::vector<LabeledWindow> training_set(std::span<const LabeledWindow> windows, const dataset::SplitSpec& split,
                                        const PipelineConfig& cfg);

/// Inverse-frequency weights of the set, or (1, 1) with weighting off.
ClassWeights weights_for(std::span<const LabeledWindow> train, const PipelineConfig& cfg);

/// "<prefix>-" followed by the FNV-1a hash of the text.
std::string content_id(std::string_view prefix, std::string_view text);

mignet::MiGNetModel train_mignet(std::span<const LabeledWindow> train, const PipelineConfig& cfg,
                                 const mignet::EpochCallback& on_epoch = {});

struct SvmTraining {
  svm::SvmModel model;
  svm::SelectionResult selection;
};

SvmTraining train_svm_pipeline(std::span<const LabeledWindow> train, const PipelineConfig& cfg);

/// A saved model of either kind.
struct LoadedModel {
  std::string kind;  // mignet or svm
  std::string id;
  std::optional<mignet::MiGNetModel> mignet;
  std::optional<svm::SvmModel> svm;
};

LoadedModel load_any_model(const std::filesystem::path& path);
Classifier classifier_for(const LoadedModel& model, const PipelineConfig& cfg);
/// Label and p(TrueImpact) (mignet) or decision value (svm).
dataset::PredictionRecord predict_any(const LoadedModel& model, const LabeledWindow& window, const PipelineConfig& cfg);

struct SweepRow {
  std::string stage;  // conv1d, conv2d or head
  std::string descriptor;
  double validation_accuracy = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  mignet::Architecture best;
};

/// Greedy search: the number of 1D blocks first, then 2D blocks, then the
/// head, each stage keeping the winner of the previous one (first listed on
/// ties). Candidates train for sweep_epochs on part of the training
/// originals and are scored on the rest; test windows are never touched.
SweepResult run_sweep(std::span<const LabeledWindow> train_originals, const PipelineConfig& cfg,
                      const std::function<void(const SweepRow&)>& on_row = {});

std::string format_sweep(const SweepResult& result);

}  // namespace impact::eval
