#include "impact/mignet/model.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "impact/core/error.hpp"
#include "impact/core/random.hpp"

namespace impact::mignet {

namespace {

std::atomic<std::uint64_t> g_next_state{1};
std::atomic<std::uint64_t> g_clamps{0};

std::uint64_t next_state() { return g_next_state.fetch_add(1, std::memory_order_relaxed); }

std::vector<std::vector<std::size_t>> parameter_shapes(const Architecture& arch) {
  std::vector<std::vector<std::size_t>> shapes;
  std::size_t channels = 1;
  for (const auto& g : conv_geometries(arch)) {
    shapes.push_back({g.kernel_h, g.kernel_w, g.in_channels, g.out_channels});
    shapes.push_back({g.out_channels});
    channels = g.out_channels;
  }
  const std::size_t features =
      arch.head == Head::GlobalAveragePooling ? channels : arch.rows * arch.cols * channels;
  shapes.push_back({features, arch.classes});
  shapes.push_back({arch.classes});
  return shapes;
}

std::string conv_list(const std::vector<ConvSpec>& specs, bool two_d) {
  std::string s;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(specs[i].filters) + 'x';
    if (two_d) s += std::to_string(specs[i].kernel_h) + 'x';
    s += std::to_string(specs[i].kernel_w);
  }
  return s.empty() ? "none" : s;
}

std::vector<std::size_t> split_dims(const std::string& text) {
  std::vector<std::size_t> dims;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, 'x')) {
    if (part.empty() || part.size() > 9 || part.find_first_not_of("0123456789") != std::string::npos) {
      throw FormatError("bad dimension list '" + text + "'");
    }
    dims.push_back(std::stoul(part));
  }
  return dims;
}

std::vector<ConvSpec> parse_conv_list(const std::string& text, bool two_d) {
  std::vector<ConvSpec> specs;
  if (text == "none") return specs;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto d = split_dims(item);
    if (two_d && d.size() == 3) {
      specs.push_back({d[0], d[1], d[2]});
    } else if (!two_d && d.size() == 2) {
      specs.push_back({d[0], 1, d[1]});
    } else {
      throw FormatError("bad convolution spec '" + item + "'");
    }
  }
  return specs;
}

}  // namespace

void Architecture::validate() const {
  if (conv1d.empty() && conv2d.empty()) throw InvalidParameter("architecture needs at least one conv layer");
  for (const auto& c : conv1d) {
    if (c.filters == 0 || c.kernel_w == 0 || c.kernel_h != 1) throw InvalidParameter("bad 1D conv layer");
  }
  for (const auto& c : conv2d) {
    if (c.filters == 0 || c.kernel_w == 0 || c.kernel_h == 0) throw InvalidParameter("bad 2D conv layer");
  }
  if (rows == 0 || cols == 0 || classes < 2) throw InvalidParameter("bad input/output geometry");
}

std::string Architecture::descriptor() const {
  return "conv1d=" + conv_list(conv1d, false) + " conv2d=" + conv_list(conv2d, true) +
         " head=" + (head == Head::GlobalAveragePooling ? "gap" : "flatten") + " input=" + std::to_string(rows) +
         'x' + std::to_string(cols) + " classes=" + std::to_string(classes);
}

Architecture Architecture::parse(const std::string& descriptor) {
  Architecture arch;
  std::stringstream ss(descriptor);
  std::string token;
  bool seen[5] = {};
  while (ss >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) throw FormatError("descriptor token '" + token + "' lacks '='");
    const std::string key = token.substr(0, eq);
    const std::string value = token.substr(eq + 1);
    if (key == "conv1d") {
      arch.conv1d = parse_conv_list(value, false);
      seen[0] = true;
    } else if (key == "conv2d") {
      arch.conv2d = parse_conv_list(value, true);
      seen[1] = true;
    } else if (key == "head") {
      if (value == "gap") {
        arch.head = Head::GlobalAveragePooling;
      } else if (value == "flatten") {
        arch.head = Head::FlattenDense;
      } else {
        throw FormatError("unknown head '" + value + "'");
      }
      seen[2] = true;
    } else if (key == "input") {
      const auto d = split_dims(value);
      if (d.size() != 2) throw FormatError("input must be RxC");
      arch.rows = d[0];
      arch.cols = d[1];
      seen[3] = true;
    } else if (key == "classes") {
      const auto d = split_dims(value);
      if (d.size() != 1) throw FormatError("classes must be a single count");
      arch.classes = d[0];
      seen[4] = true;
    } else {
      throw FormatError("unknown descriptor key '" + key + "'");
    }
  }
  for (bool s : seen) {
    if (!s) throw FormatError("incomplete architecture descriptor '" + descriptor + "'");
  }
  try {
    arch.validate();
  } catch (const InvalidParameter& e) {
    throw FormatError(e.what());
  }
  return arch;
}

std::vector<ConvGeometry> conv_geometries(const Architecture& arch) {
  std::vector<ConvGeometry> out;
  std::size_t channels = 1;
  auto add = [&](const ConvSpec& c) {
    out.push_back({arch.rows, arch.cols, channels, c.filters, c.kernel_h, c.kernel_w});
    channels = c.filters;
  };
  for (const auto& c : arch.conv1d) add(c);
  for (const auto& c : arch.conv2d) add(c);
  return out;
}

MiGNetModel::MiGNetModel(Architecture arch, std::uint64_t seed)
    : arch_(std::move(arch)), seed_(seed), state_id_(next_state()) {
  arch_.validate();
  for (auto& shape : parameter_shapes(arch_)) params_.emplace_back(std::move(shape));
}

MiGNetModel MiGNetModel::initialize(const Architecture& arch, std::uint64_t seed, double conv_gain) {
  if (!(conv_gain > 0.0) || !std::isfinite(conv_gain)) throw InvalidParameter("conv init gain must be > 0");
  MiGNetModel model(arch, seed);
  Rng rng(seed);
  const std::size_t n_conv = arch.conv1d.size() + arch.conv2d.size();
  for (std::size_t i = 0; i < model.params_.size(); i += 2) {
    Tensor& w = model.params_[i];
    const auto& shape = w.shape();
    const bool is_conv = i / 2 < n_conv;
    const std::size_t fan_in = is_conv ? shape[0] * shape[1] * shape[2] : shape[0];
    const double gain = is_conv ? conv_gain : 1.0;
    const double limit = gain * std::sqrt((is_conv ? 6.0 : 3.0) / static_cast<double>(fan_in));
    for (double& v : w.data()) v = rng.uniform(-limit, limit);
  }
  return model;
}

MiGNetModel MiGNetModel::zeros(const Architecture& arch) { return MiGNetModel(arch, 0); }

MiGNetModel MiGNetModel::from_parameters(const Architecture& arch, std::uint64_t seed, std::vector<Tensor> params) {
  MiGNetModel model(arch, seed);
  if (params.size() != model.params_.size()) {
    throw StructuralError("expected " + std::to_string(model.params_.size()) + " parameter tensors, got " +
                          std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i].same_shape(model.params_[i])) {
      throw StructuralError("parameter " + std::to_string(i) + " has shape " + params[i].shape_string() +
                            ", expected " + model.params_[i].shape_string());
    }
  }
  model.params_ = std::move(params);
  return model;
}

std::vector<Tensor>& MiGNetModel::mutable_parameters() {
  state_id_ = next_state();
  return params_;
}

std::size_t MiGNetModel::parameter_count() const {
  return std::accumulate(params_.begin(), params_.end(), std::size_t{0},
                         [](std::size_t n, const Tensor& t) { return n + t.size(); });
}

std::vector<std::string> MiGNetModel::parameter_names() const {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < arch_.conv1d.size(); ++i) {
    names.push_back("conv1d." + std::to_string(i) + ".weight");
    names.push_back("conv1d." + std::to_string(i) + ".bias");
  }
  for (std::size_t i = 0; i < arch_.conv2d.size(); ++i) {
    names.push_back("conv2d." + std::to_string(i) + ".weight");
    names.push_back("conv2d." + std::to_string(i) + ".bias");
  }
  names.push_back("dense.weight");
  names.push_back("dense.bias");
  return names;
}

ForwardResult forward(const MiGNetModel& model, const ProcessedWindow& window) {
  const Architecture& arch = model.architecture();
  if (!window.normalized()) throw InvalidParameter("classifier input must be normalized");
  if (window.rows() != arch.rows || window.cols() != arch.cols) {
    throw StructuralError("window is " + std::to_string(window.rows()) + "x" + std::to_string(window.cols()) +
                          ", model expects " + std::to_string(arch.rows) + "x" + std::to_string(arch.cols));
  }
  return forward(model, window.data());
}

ForwardResult forward(const MiGNetModel& model, std::span<const double> input) {
  ForwardResult result;
  result.probabilities = forward_into(model, input, result.cache);
  return result;
}

const std::vector<double>& forward_into(const MiGNetModel& model, std::span<const double> input, ForwardCache& cache) {
  const Architecture& arch = model.architecture();
  if (input.size() != arch.rows * arch.cols) throw StructuralError("input size does not match the architecture");
  const auto geoms = conv_geometries(arch);
  const auto& params = model.parameters();

  cache.model_state = model.state_id();
  cache.convs.resize(geoms.size());

  std::vector<double>& act = cache.scratch_a;
  std::vector<double>& next = cache.scratch_b;
  act.assign(input.begin(), input.end());
  for (std::size_t l = 0; l < geoms.size(); ++l) {
    conv_relu_forward(geoms[l], act, params[2 * l], params[2 * l + 1], cache.convs[l], next);
    act.swap(next);
  }
  const std::size_t channels = geoms.back().out_channels;
  if (arch.head == Head::GlobalAveragePooling) {
    cache.features = global_average_pool(act, arch.rows * arch.cols, channels);
  } else {
    cache.features.assign(act.begin(), act.end());
  }
  const std::size_t d = 2 * geoms.size();
  cache.probabilities = softmax(dense_forward(cache.features, params[d], params[d + 1]));
  return cache.probabilities;
}

double weighted_cross_entropy(std::span<const double> probabilities, EventClass label, const ClassWeights& weights) {
  double p = probabilities[class_index(label)];
  if (p < kProbabilityFloor) {
    g_clamps.fetch_add(1, std::memory_order_relaxed);
    p = kProbabilityFloor;
  }
  return -weights.of(label) * std::log(p);
}

std::uint64_t clamp_count() { return g_clamps.load(std::memory_order_relaxed); }

Gradients zero_gradients(const MiGNetModel& model) {
  Gradients g;
  for (const Tensor& t : model.parameters()) g.emplace_back(t.shape());
  return g;
}

Gradients backward(const MiGNetModel& model, const ForwardCache& cache, EventClass label, const ClassWeights& weights) {
  Gradients g = zero_gradients(model);
  backward_accumulate(model, cache, label, weights, 1.0, g);
  return g;
}

void backward_accumulate(const MiGNetModel& model, const ForwardCache& cache, EventClass label,
                         const ClassWeights& weights, double scale, Gradients& into) {
  if (cache.model_state != model.state_id()) {
    throw InvalidState("forward cache does not belong to the current model parameters");
  }
  const Architecture& arch = model.architecture();
  const auto geoms = conv_geometries(arch);
  const auto& params = model.parameters();
  if (into.size() != params.size()) throw StructuralError("gradient buffer does not match the model");

  // d(-w log p_y)/d logits = w (p - onehot(y))
  const double w = weights.of(label) * scale;
  std::vector<double> d_logits(cache.probabilities);
  d_logits[class_index(label)] -= 1.0;
  for (double& v : d_logits) v *= w;

  const std::size_t d = 2 * geoms.size();
  std::vector<double> d_features;
  dense_backward(cache.features, d_logits, params[d], into[d], into[d + 1], &d_features);

  std::vector<double> d_act = arch.head == Head::GlobalAveragePooling
                                  ? global_average_pool_backward(d_features, arch.rows * arch.cols)
                                  : std::move(d_features);
  std::vector<double> d_in;
  for (std::size_t l = geoms.size(); l-- > 0;) {
    conv_relu_backward(geoms[l], cache.convs[l], d_act, params[2 * l], into[2 * l], into[2 * l + 1],
                       l > 0 ? &d_in : nullptr);
    if (l > 0) d_act.swap(d_in);
  }
}

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw InvalidParameter("learning rate must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw InvalidParameter("momentum must lie in [0, 1)");
  if (batch_size < 1) throw InvalidParameter("batch size must be >= 1");
  if (!(class_weights.w_true > 0.0) || !(class_weights.w_false > 0.0)) {
    throw InvalidParameter("class weights must be > 0");
  }
}

void sgd_step(MiGNetModel& model, const Gradients& gradients, Gradients& velocity, const TrainConfig& cfg) {
  auto& params = model.mutable_parameters();
  if (gradients.size() != params.size() || velocity.size() != params.size()) {
    throw StructuralError("gradient/velocity buffers do not match the model");
  }
  for (std::size_t t = 0; t < params.size(); ++t) {
    auto theta = params[t].data();
    auto g = gradients[t].data();
    auto v = velocity[t].data();
    if (g.size() != theta.size() || v.size() != theta.size()) throw StructuralError("gradient shape mismatch");
    for (std::size_t i = 0; i < theta.size(); ++i) {
      v[i] = cfg.momentum * v[i] - cfg.lr * g[i];
      theta[i] += v[i];
    }
  }
}

TrainResult train(MiGNetModel& model, std::span<const LabeledWindow> train_set, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
  cfg.validate();
  if (train_set.empty()) throw InvalidParameter("training set is empty");
  for (const auto& item : train_set) {
    if (item.partition == Partition::Test) {
      throw ContaminationError("test-split window '" + item.id + "' offered to training");
    }
    if (!item.window.normalized()) throw InvalidParameter("training window '" + item.id + "' is not normalized");
  }

  Rng rng(cfg.seed);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Gradients grads = zero_gradients(model);
  Gradients velocity = zero_gradients(model);
  ForwardCache cache;

  TrainResult result;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      const double scale = 1.0 / static_cast<double>(end - start);
      for (Tensor& g : grads) g.fill(0.0);
      for (std::size_t k = start; k < end; ++k) {
        const LabeledWindow& item = train_set[order[k]];
        if (item.window.rows() != model.architecture().rows || item.window.cols() != model.architecture().cols) {
          throw StructuralError("training window '" + item.id + "' does not match the model input size");
        }
        const auto& probs = forward_into(model, item.window.data(), cache);
        loss_sum += weighted_cross_entropy(probs, item.label.value, cfg.class_weights);
        backward_accumulate(model, cache, item.label.value, cfg.class_weights, scale, grads);
      }
      sgd_step(model, grads, velocity, cfg);
      ++result.updates;
    }
    for (const Tensor& t : model.parameters()) {
      if (!t.all_finite()) throw SolverError("training diverged (non-finite parameters) in epoch " + std::to_string(epoch));
    }
    const double mean_loss = loss_sum / static_cast<double>(order.size());
    result.epoch_loss.push_back(mean_loss);
    if (on_epoch) on_epoch(epoch, mean_loss);
  }
  return result;
}

Prediction predict(const MiGNetModel& model, const ProcessedWindow& window, TieRule tie) {
  if (!window.normalized()) throw InvalidParameter("predict expects a normalized window");
  const auto probs = forward(model, window).probabilities;
  const double p_true = probs[kTrueImpactIndex];
  const double p_false = probs[kNonContactIndex];
  Prediction out;
  out.score = p_true;
  if (p_true > p_false) {
    out.label = EventClass::TrueImpact;
  } else if (p_false > p_true) {
    out.label = EventClass::NonContact;
  } else {
    out.label = tie == TieRule::TrueImpact ? EventClass::TrueImpact : EventClass::NonContact;
  }
  return out;
}

void save_model(const MiGNetModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write model file " + path.string());
  const auto names = model.parameter_names();
  const auto& params = model.parameters();
  out << "mignet-model 1\n";
  out << "descriptor " << model.architecture().descriptor() << '\n';
  out << "seed " << model.seed() << '\n';
  out << "tensors " << params.size() << '\n';
  char buf[32];
  for (std::size_t t = 0; t < params.size(); ++t) {
    out << "tensor " << names[t] << ' ' << params[t].shape_string() << '\n';
    const auto data = params[t].data();
    for (std::size_t i = 0; i < data.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", data[i]);
      out << buf << ((i % 8 == 7 || i + 1 == data.size()) ? '\n' : ' ');
    }
  }
  out << "end\n";
  if (!out) throw IoError("failed writing model file " + path.string());
}

MiGNetModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file " + path.string());
  std::string line;
  auto expect_line = [&](const std::string& prefix) {
    if (!std::getline(in, line) || line.rfind(prefix, 0) != 0) {
      throw FormatError("model file " + path.string() + ": expected '" + prefix + "'");
    }
    return line.substr(prefix.size());
  };
  if (expect_line("mignet-model ") != "1") throw FormatError("unsupported model file version");
  const Architecture arch = Architecture::parse(expect_line("descriptor "));
  std::uint64_t seed = 0;
  std::size_t count = 0;
  try {
    seed = std::stoull(expect_line("seed "));
    count = std::stoul(expect_line("tensors "));
  } catch (const std::logic_error&) {
    throw FormatError("model file " + path.string() + ": bad seed or tensor count");
  }

  const MiGNetModel shape_ref = MiGNetModel::zeros(arch);
  const auto names = shape_ref.parameter_names();
  if (count != names.size()) throw FormatError("tensor count does not match the descriptor");
  std::vector<Tensor> params;
  for (std::size_t t = 0; t < count; ++t) {
    std::istringstream head(expect_line("tensor "));
    std::string name, shape;
    head >> name >> shape;
    if (name != names[t] || shape != shape_ref.parameters()[t].shape_string()) {
      throw FormatError("tensor '" + name + "' " + shape + " does not match the descriptor");
    }
    std::vector<double> values(shape_ref.parameters()[t].size());
    for (double& v : values) {
      std::string tok;
      if (!(in >> tok)) throw FormatError("model file truncated in tensor " + name);
      char* end = nullptr;
      v = std::strtod(tok.c_str(), &end);
      if (end != tok.c_str() + tok.size() || !std::isfinite(v)) throw FormatError("bad value '" + tok + "'");
    }
    std::getline(in, line);  // rest of the last value line
    params.emplace_back(shape_ref.parameters()[t].shape(), std::move(values));
  }
  if (!std::getline(in, line) || line != "end") throw FormatError("model file missing end marker");
  return MiGNetModel::from_parameters(arch, seed, std::move(params));
}

MiGNetModel load_model(const std::filesystem::path& path, const Architecture& expected) {
  MiGNetModel model = load_model(path);
  if (!(model.architecture() == expected)) {
    throw FormatError("model architecture '" + model.architecture().descriptor() + "' differs from expected '" +
                      expected.descriptor() + "'");
  }
  return model;
}

}  // namespace impact::mignet
