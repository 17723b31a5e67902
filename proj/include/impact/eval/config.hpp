#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "impact/core/kinematics.hpp"
#include "impact/core/window.hpp"
#include "impact/dataset/augment.hpp"
#include "impact/mignet/model.hpp"
#include "impact/sim/rule.hpp"
#include "impact/svm/selection.hpp"

namespace impact::eval {

/// Every tunable of the pipeline. Parsed from "key = value" lines; '#'
/// starts a comment. Unknown keys are rejected.
struct PipelineConfig {
  std::uint64_t seed = 42;

  // simulate
  int n_true = 423;
  int n_false = 600;
  TriggerConfig trigger;

  // windows
  ProcessingConfig processing;

  // split
  std::size_t test_true = 65;
  std::size_t test_false = 100;

  // augmentation and weighting
  bool augment = true;
  dataset::AugmentConfig augmentation;
  bool class_weighting = true;

  // mignet
  mignet::Architecture architecture;
  double conv_init_gain = mignet::kDefaultConvInitGain;
  mignet::TrainConfig training;
  mignet::TieRule tie_rule = mignet::TieRule::NonContact;

  // svm
  svm::SelectionConfig selection;

  // rule classifier
  sim::SeparabilityRule rule;

  // sweep (greedy architecture search)
  std::vector<std::size_t> sweep_conv1d_counts{1, 2, 3, 4};
  std::vector<std::size_t> sweep_conv2d_counts{1, 2};
  std::size_t sweep_epochs = 5;
  double sweep_validation_fraction = 0.2;

  /// Throws InvalidParameter on any out-of-range value.
  void validate() const;
};

/// Applies the lines of `text` on top of `base`.
PipelineConfig parse_config(std::string_view text, PipelineConfig base = {});
PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base = {});

/// Every key with its value, one per line in a fixed order. parse_config of
/// the result reproduces the config.
std::string format_config(const PipelineConfig& cfg);

/// FNV-1a of format_config(), as 16 hex digits.
std::string config_hash(const PipelineConfig& cfg);

}  // namespace impact::eval
