#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "impact/core/kinematics.hpp"
#include "impact/core/window.hpp"
#include "impact/mignet/layers.hpp"
#include "impact/mignet/tensor.hpp"

namespace impact::mignet {

/// Output index of each class.
inline constexpr std::size_t kTrueImpactIndex = 0;
inline constexpr std::size_t kNonContactIndex = 1;

inline std::size_t class_index(EventClass c) {
  return c == EventClass::TrueImpact ? kTrueImpactIndex : kNonContactIndex;
}

struct ConvSpec {
  std::size_t filters = 0;
  std::size_t kernel_h = 1;
  std::size_t kernel_w = 1;

  bool operator==(const ConvSpec&) const = default;
};

enum class Head { GlobalAveragePooling, FlattenDense };

/// Layer layout. Row convolutions (kernel_h = 1, weights shared across the six
/// sensor rows) come first; the 2D stage then mixes rows.
struct Architecture {
  std::vector<ConvSpec> conv1d{{16, 1, 7}, {32, 1, 5}};
  std::vector<ConvSpec> conv2d{{32, 3, 3}};
  Head head = Head::GlobalAveragePooling;
  std::size_t rows = kWindowRows;
  std::size_t cols = 200;
  std::size_t classes = 2;

  void validate() const;

  /// Compact text form, e.g.
  /// "conv1d=16x7,32x5 conv2d=32x3x3 head=gap input=6x200 classes=2".
  std::string descriptor() const;
  static Architecture parse(const std::string& descriptor);

  bool operator==(const Architecture&) const = default;
};

/// Geometry of every conv block in order.
std::vector<ConvGeometry> conv_geometries(const Architecture& arch);

inline constexpr double kDefaultConvInitGain = 6.0;

/// Parameters in a fixed order: (weight, bias) for each conv block, then the
/// dense weight [features, classes] and bias [classes].
class MiGNetModel {
 public:
  /// Fan-in scaled uniform weights, zero biases. Conv limits are the He limit
  /// times conv_gain: normalized inputs are small and sparse, and at unit gain
  /// the pooled features start near zero and training at lr 0.01 crawls.
  static MiGNetModel initialize(const Architecture& arch, std::uint64_t seed,
                                double conv_gain = kDefaultConvInitGain);
  /// Every parameter zero.
  static MiGNetModel zeros(const Architecture& arch);
  /// Throws StructuralError if the tensors do not match the architecture.
  static MiGNetModel from_parameters(const Architecture& arch, std::uint64_t seed, std::vector<Tensor> params);

  const Architecture& architecture() const noexcept { return arch_; }
  std::uint64_t seed() const noexcept { return seed_; }

  const std::vector<Tensor>& parameters() const noexcept { return params_; }
  /// Mutable access invalidates outstanding forward caches.
  std::vector<Tensor>& mutable_parameters();

  /// Changes whenever parameters may have changed.
  std::uint64_t state_id() const noexcept { return state_id_; }

  std::size_t parameter_count() const;
  std::vector<std::string> parameter_names() const;

  bool operator==(const MiGNetModel& o) const { return arch_ == o.arch_ && seed_ == o.seed_ && params_ == o.params_; }

 private:
  MiGNetModel(Architecture arch, std::uint64_t seed);

  Architecture arch_;
  std::uint64_t seed_ = 0;
  std::vector<Tensor> params_;
  std::uint64_t state_id_ = 0;
};

struct ForwardCache {
  std::uint64_t model_state = 0;
  std::vector<ConvCache> convs;
  std::vector<double> features;  // dense input
  std::vector<double> probabilities;
  std::vector<double> scratch_a, scratch_b;
};

struct ForwardResult {
  std::vector<double> probabilities;
  ForwardCache cache;
};

/// Window must be normalized and match the architecture's input size.
ForwardResult forward(const MiGNetModel& model, const ProcessedWindow& window);
/// Same pipeline on a raw rows x cols input, for tests and tooling.
ForwardResult forward(const MiGNetModel& model, std::span<const double> input);
/// Reuses the cache's buffers; returns the probabilities held in the cache.
const std::vector<double>& forward_into(const MiGNetModel& model, std::span<const double> input, ForwardCache& cache);

/// Clamp floor for p(label).
inline constexpr double kProbabilityFloor = 1e-12;

/// -w(label) * log p(label). Increments clamp_count() when p(label) had to be
/// raised to kProbabilityFloor.
double weighted_cross_entropy(std::span<const double> probabilities, EventClass label, const ClassWeights& weights);
std::uint64_t clamp_count();

using Gradients = std::vector<Tensor>;

Gradients zero_gradients(const MiGNetModel& model);

/// Gradient of the weighted loss for one example. Throws InvalidState when the
/// cache came from a different parameter state.
Gradients backward(const MiGNetModel& model, const ForwardCache& cache, EventClass label, const ClassWeights& weights);
/// As backward(), scaling the gradient by `scale` and adding it into `into`.
void backward_accumulate(const MiGNetModel& model, const ForwardCache& cache, EventClass label,
                         const ClassWeights& weights, double scale, Gradients& into);

struct TrainConfig {
  double lr = 0.01;
  double momentum = 0.9;
  std::size_t batch_size = 32;
  std::size_t epochs = 20;
  ClassWeights class_weights;
  std::uint64_t seed = 42;

  void validate() const;
};

/// v <- momentum * v - lr * g; theta <- theta + v.
void sgd_step(MiGNetModel& model, const Gradients& gradients, Gradients& velocity, const TrainConfig& cfg);

struct TrainResult {
  std::vector<double> epoch_loss;  // mean weighted loss per example, per epoch
  std::size_t updates = 0;
};

/// Called after each epoch with (epoch index, mean loss).
using EpochCallback = std::function<void(std::size_t, double)>;

/// Mini-batch SGD with momentum. Shuffling is seeded by cfg.seed.
/// Throws ContaminationError if any window belongs to the test partition.
TrainResult train(MiGNetModel& model, std::span<const LabeledWindow> train_set, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

enum class TieRule { NonContact, TrueImpact };

struct Prediction {
  EventClass label = EventClass::NonContact;
  double score = 0.0;  // p(TrueImpact)
};

/// Argmax of the forward probabilities; an exact 0.5 tie goes to `tie`.
/// Throws InvalidParameter for an unnormalized window.
Prediction predict(const MiGNetModel& model, const ProcessedWindow& window, TieRule tie = TieRule::NonContact);

/// Text container: magic line, descriptor, seed, then one block per tensor
/// with values printed to 17 significant digits (exact round trip).
void save_model(const MiGNetModel& model, const std::filesystem::path& path);
MiGNetModel load_model(const std::filesystem::path& path);
/// Also rejects a file whose descriptor differs from `expected`.
MiGNetModel load_model(const std::filesystem::path& path, const Architecture& expected);

}  // namespace impact::mignet
