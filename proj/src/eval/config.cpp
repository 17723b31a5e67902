#include "impact/eval/config.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>

#include "impact/core/error.hpp"
#include "impact/core/random.hpp"
#include "impact/core/text.hpp"
#include "impact/dataset/event_file.hpp"

namespace impact::eval {

namespace {

using Getter = std::function<std::string(const PipelineConfig&)>;
using Setter = std::function<void(PipelineConfig&, std::string_view)>;

struct Field {
  const char* key;
  Getter get;
  Setter set;
};

[[noreturn]] void bad(std::string_view key, std::string_view value, std::string_view expected) {
  throw InvalidParameter("config key " + std::string(key) + ": '" + std::string(value) + "' is not " +
                         std::string(expected));
}

double to_real(std::string_view key, std::string_view v) {
  const auto d = parse_number(v);
  if (!d || !std::isfinite(*d)) bad(key, v, "a finite number");
  return *d;
}

long long to_int(std::string_view key, std::string_view v) {
  const auto i = parse_integer(v);
  if (!i) bad(key, v, "an integer");
  return *i;
}

std::size_t to_count(std::string_view key, std::string_view v) {
  const auto i = to_int(key, v);
  if (i < 0) bad(key, v, "a non-negative integer");
  return static_cast<std::size_t>(i);
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true") return true;
  if (v == "false") return false;
  bad(key, v, "true or false");
}

std::string real(double v) { return format_exact(v); }
std::string boolean(bool v) { return v ? "true" : "false"; }

std::string count_list(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

std::vector<std::size_t> to_count_list(std::string_view key, std::string_view v) {
  std::vector<std::size_t> out;
  for (auto part : split(v, ',')) out.push_back(to_count(key, trim(part)));
  return out;
}

// Replaces one token of the architecture descriptor and re-parses it.
void set_arch_token(PipelineConfig& c, std::string_view key, std::string_view value) {
  std::stringstream ss(c.architecture.descriptor());
  std::string token, rebuilt;
  while (ss >> token) {
    if (token.starts_with(std::string(key) + "=")) token = std::string(key) + "=" + std::string(value);
    rebuilt += (rebuilt.empty() ? "" : " ") + token;
  }
  try {
    c.architecture = mignet::Architecture::parse(rebuilt);
  } catch (const FormatError& e) {
    throw InvalidParameter(std::string("config key ") + std::string(key) + ": " + e.what());
  }
}

std::string arch_token(const PipelineConfig& c, std::string_view key) {
  std::stringstream ss(c.architecture.descriptor());
  std::string token;
  while (ss >> token) {
    if (token.starts_with(std::string(key) + "=")) return token.substr(key.size() + 1);
  }
  return {};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"seed", [](const PipelineConfig& c) { return std::to_string(c.seed); },
       [](PipelineConfig& c, std::string_view v) {
         const auto i = to_int("seed", v);
         if (i < 0) bad("seed", v, "a non-negative integer");
         c.seed = static_cast<std::uint64_t>(i);
       }},
      {"n_true", [](const PipelineConfig& c) { return std::to_string(c.n_true); },
       [](PipelineConfig& c, std::string_view v) { c.n_true = static_cast<int>(to_count("n_true", v)); }},
      {"n_false", [](const PipelineConfig& c) { return std::to_string(c.n_false); },
       [](PipelineConfig& c, std::string_view v) { c.n_false = static_cast<int>(to_count("n_false", v)); }},
      {"threshold_g", [](const PipelineConfig& c) { return real(c.trigger.threshold_g); },
       [](PipelineConfig& c, std::string_view v) { c.trigger.threshold_g = to_real("threshold_g", v); }},
      {"pre_ms", [](const PipelineConfig& c) { return real(c.trigger.pre_ms); },
       [](PipelineConfig& c, std::string_view v) { c.trigger.pre_ms = to_real("pre_ms", v); }},
      {"post_ms", [](const PipelineConfig& c) { return real(c.trigger.post_ms); },
       [](PipelineConfig& c, std::string_view v) { c.trigger.post_ms = to_real("post_ms", v); }},
      {"lin_rate_hz", [](const PipelineConfig& c) { return real(c.trigger.lin_rate_hz); },
       [](PipelineConfig& c, std::string_view v) { c.trigger.lin_rate_hz = to_real("lin_rate_hz", v); }},
      {"ang_rate_hz", [](const PipelineConfig& c) { return real(c.trigger.ang_rate_hz); },
       [](PipelineConfig& c, std::string_view v) { c.trigger.ang_rate_hz = to_real("ang_rate_hz", v); }},
      {"trigger_mode",
       [](const PipelineConfig& c) { return std::string(c.trigger.mode == TriggerMode::AnyAxis ? "any_axis" : "magnitude"); },
       [](PipelineConfig& c, std::string_view v) {
         if (v == "any_axis") {
           c.trigger.mode = TriggerMode::AnyAxis;
         } else if (v == "magnitude") {
           c.trigger.mode = TriggerMode::Magnitude;
         } else {
           bad("trigger_mode", v, "any_axis or magnitude");
         }
       }},
      {"angular_mode",
       [](const PipelineConfig& c) {
         return std::string(c.processing.angular_mode == AngularMode::Acceleration ? "acceleration" : "velocity");
       },
       [](PipelineConfig& c, std::string_view v) {
         if (v == "acceleration") {
           c.processing.angular_mode = AngularMode::Acceleration;
         } else if (v == "velocity") {
           c.processing.angular_mode = AngularMode::Velocity;
         } else {
           bad("angular_mode", v, "acceleration or velocity");
         }
       }},
      {"lowpass_cutoff_hz", [](const PipelineConfig& c) { return real(c.processing.lowpass_cutoff_hz); },
       [](PipelineConfig& c, std::string_view v) { c.processing.lowpass_cutoff_hz = to_real("lowpass_cutoff_hz", v); }},
      {"grid_rate_hz", [](const PipelineConfig& c) { return real(c.processing.grid_rate_hz); },
       [](PipelineConfig& c, std::string_view v) { c.processing.grid_rate_hz = to_real("grid_rate_hz", v); }},
      {"angular_accel_full_scale", [](const PipelineConfig& c) { return real(c.processing.angular_accel_full_scale); },
       [](PipelineConfig& c, std::string_view v) {
         c.processing.angular_accel_full_scale = to_real("angular_accel_full_scale", v);
       }},
      {"test_true", [](const PipelineConfig& c) { return std::to_string(c.test_true); },
       [](PipelineConfig& c, std::string_view v) { c.test_true = to_count("test_true", v); }},
      {"test_false", [](const PipelineConfig& c) { return std::to_string(c.test_false); },
       [](PipelineConfig& c, std::string_view v) { c.test_false = to_count("test_false", v); }},
      {"augment", [](const PipelineConfig& c) { return boolean(c.augment); },
       [](PipelineConfig& c, std::string_view v) { c.augment = to_bool("augment", v); }},
      {"augment_classes",
       [](const PipelineConfig& c) { return std::string(dataset::augment_classes_name(c.augmentation.classes)); },
       [](PipelineConfig& c, std::string_view v) { c.augmentation.classes = dataset::parse_augment_classes(v); }},
      {"augment_min_shift_ms", [](const PipelineConfig& c) { return std::to_string(c.augmentation.min_shift_ms); },
       [](PipelineConfig& c, std::string_view v) {
         c.augmentation.min_shift_ms = static_cast<int>(to_int("augment_min_shift_ms", v));
       }},
      {"augment_max_shift_ms", [](const PipelineConfig& c) { return std::to_string(c.augmentation.max_shift_ms); },
       [](PipelineConfig& c, std::string_view v) {
         c.augmentation.max_shift_ms = static_cast<int>(to_int("augment_max_shift_ms", v));
       }},
      {"class_weighting", [](const PipelineConfig& c) { return boolean(c.class_weighting); },
       [](PipelineConfig& c, std::string_view v) { c.class_weighting = to_bool("class_weighting", v); }},
      {"conv1d", [](const PipelineConfig& c) { return arch_token(c, "conv1d"); },
       [](PipelineConfig& c, std::string_view v) { set_arch_token(c, "conv1d", v); }},
      {"conv2d", [](const PipelineConfig& c) { return arch_token(c, "conv2d"); },
       [](PipelineConfig& c, std::string_view v) { set_arch_token(c, "conv2d", v); }},
      {"head", [](const PipelineConfig& c) { return arch_token(c, "head"); },
       [](PipelineConfig& c, std::string_view v) { set_arch_token(c, "head", v); }},
      {"conv_init_gain", [](const PipelineConfig& c) { return real(c.conv_init_gain); },
       [](PipelineConfig& c, std::string_view v) { c.conv_init_gain = to_real("conv_init_gain", v); }},
      {"lr", [](const PipelineConfig& c) { return real(c.training.lr); },
       [](PipelineConfig& c, std::string_view v) { c.training.lr = to_real("lr", v); }},
      {"momentum", [](const PipelineConfig& c) { return real(c.training.momentum); },
       [](PipelineConfig& c, std::string_view v) { c.training.momentum = to_real("momentum", v); }},
      {"batch_size", [](const PipelineConfig& c) { return std::to_string(c.training.batch_size); },
       [](PipelineConfig& c, std::string_view v) { c.training.batch_size = to_count("batch_size", v); }},
      {"epochs", [](const PipelineConfig& c) { return std::to_string(c.training.epochs); },
       [](PipelineConfig& c, std::string_view v) { c.training.epochs = to_count("epochs", v); }},
      {"tie_rule",
       [](const PipelineConfig& c) {
         return std::string(c.tie_rule == mignet::TieRule::NonContact ? "noncontact" : "trueimpact");
       },
       [](PipelineConfig& c, std::string_view v) {
         if (v == "noncontact") {
           c.tie_rule = mignet::TieRule::NonContact;
         } else if (v == "trueimpact") {
           c.tie_rule = mignet::TieRule::TrueImpact;
         } else {
           bad("tie_rule", v, "noncontact or trueimpact");
         }
       }},
      {"svm_kernel", [](const PipelineConfig& c) { return std::string(svm::kernel_name(c.selection.svm.kernel)); },
       [](PipelineConfig& c, std::string_view v) { c.selection.svm.kernel = svm::parse_kernel(v); }},
      {"svm_c", [](const PipelineConfig& c) { return real(c.selection.svm.C); },
       [](PipelineConfig& c, std::string_view v) { c.selection.svm.C = to_real("svm_c", v); }},
      {"svm_gamma", [](const PipelineConfig& c) { return real(c.selection.svm.gamma); },
       [](PipelineConfig& c, std::string_view v) { c.selection.svm.gamma = to_real("svm_gamma", v); }},
      {"svm_tol", [](const PipelineConfig& c) { return real(c.selection.svm.tol); },
       [](PipelineConfig& c, std::string_view v) { c.selection.svm.tol = to_real("svm_tol", v); }},
      {"sfs_folds", [](const PipelineConfig& c) { return std::to_string(c.selection.k_folds); },
       [](PipelineConfig& c, std::string_view v) { c.selection.k_folds = to_count("sfs_folds", v); }},
      {"sfs_max_features", [](const PipelineConfig& c) { return std::to_string(c.selection.max_features); },
       [](PipelineConfig& c, std::string_view v) { c.selection.max_features = to_count("sfs_max_features", v); }},
      {"rule_min_fwhm_ms", [](const PipelineConfig& c) { return real(c.rule.min_fwhm_ms); },
       [](PipelineConfig& c, std::string_view v) { c.rule.min_fwhm_ms = to_real("rule_min_fwhm_ms", v); }},
      {"rule_min_angular_fraction", [](const PipelineConfig& c) { return real(c.rule.min_angular_fraction); },
       [](PipelineConfig& c, std::string_view v) {
         c.rule.min_angular_fraction = to_real("rule_min_angular_fraction", v);
       }},
      {"sweep_conv1d_counts", [](const PipelineConfig& c) { return count_list(c.sweep_conv1d_counts); },
       [](PipelineConfig& c, std::string_view v) { c.sweep_conv1d_counts = to_count_list("sweep_conv1d_counts", v); }},
      {"sweep_conv2d_counts", [](const PipelineConfig& c) { return count_list(c.sweep_conv2d_counts); },
       [](PipelineConfig& c, std::string_view v) { c.sweep_conv2d_counts = to_count_list("sweep_conv2d_counts", v); }},
      {"sweep_epochs", [](const PipelineConfig& c) { return std::to_string(c.sweep_epochs); },
       [](PipelineConfig& c, std::string_view v) { c.sweep_epochs = to_count("sweep_epochs", v); }},
      {"sweep_validation_fraction", [](const PipelineConfig& c) { return real(c.sweep_validation_fraction); },
       [](PipelineConfig& c, std::string_view v) {
         c.sweep_validation_fraction = to_real("sweep_validation_fraction", v);
       }},
  };
  return table;
}

}  // namespace

void PipelineConfig::validate() const {
  if (n_true < 0 || n_false < 0) throw InvalidParameter("n_true and n_false must be >= 0");
  trigger.validate();
  if (!(processing.lowpass_cutoff_hz > 0.0)) throw InvalidParameter("lowpass_cutoff_hz must be > 0");
  if (!(processing.grid_rate_hz > 0.0)) throw InvalidParameter("grid_rate_hz must be > 0");
  if (!(processing.angular_accel_full_scale > 0.0)) throw InvalidParameter("angular_accel_full_scale must be > 0");
  augmentation.validate();
  architecture.validate();
  const auto cols = static_cast<std::size_t>(std::llround(trigger.window_ms() * processing.grid_rate_hz / 1000.0));
  if (architecture.cols != cols) {
    throw InvalidParameter("architecture input width " + std::to_string(architecture.cols) +
                           " does not match the " + std::to_string(cols) + "-column window");
  }
  if (!(conv_init_gain > 0.0)) throw InvalidParameter("conv_init_gain must be > 0");
  training.validate();
  selection.validate();
  if (!(rule.min_fwhm_ms >= 0.0) || !(rule.min_angular_fraction >= 0.0)) {
    throw InvalidParameter("rule thresholds must be >= 0");
  }
  for (auto n : sweep_conv1d_counts) {
    if (n == 0) throw InvalidParameter("sweep_conv1d_counts entries must be >= 1");
  }
  if (sweep_conv1d_counts.empty() || sweep_conv2d_counts.empty()) throw InvalidParameter("sweep lists may not be empty");
  if (sweep_epochs == 0) throw InvalidParameter("sweep_epochs must be >= 1");
  if (!(sweep_validation_fraction > 0.0 && sweep_validation_fraction < 1.0)) {
    throw InvalidParameter("sweep_validation_fraction must lie in (0, 1)");
  }
}

PipelineConfig parse_config(std::string_view text, PipelineConfig base) {
  LineReader in(text);
  while (auto raw = in.next()) {
    auto line = *raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw InvalidParameter("config line " + std::to_string(in.line_number()) + " has no '='");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    bool found = false;
    for (const auto& f : fields()) {
      if (key == f.key) {
        f.set(base, value);
        found = true;
        break;
      }
    }
    if (!found) throw InvalidParameter("unknown config key '" + std::string(key) + "'");
  }
  base.validate();
  return base;
}

PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base) {
  return parse_config(dataset::read_text_file(path), std::move(base));
}

std::string format_config(const PipelineConfig& cfg) {
  std::string out;
  for (const auto& f : fields()) out += std::string(f.key) + " = " + f.get(cfg) + "\n";
  return out;
}

std::string config_hash(const PipelineConfig& cfg) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(format_config(cfg))));
  return buf;
}

}  // namespace impact::eval
