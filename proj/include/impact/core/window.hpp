#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "impact/core/kinematics.hpp"

namespace impact {

inline constexpr std::size_t kWindowRows = 6;

enum class AngularMode { Velocity, Acceleration };

struct ProcessingConfig {
  AngularMode angular_mode = AngularMode::Acceleration;
  double lowpass_cutoff_hz = 300.0;
  /// Output grid; must divide both sensor rates.
  double grid_rate_hz = 1000.0;
  /// Normalization divisor for derived angular acceleration rows (rad/s^2).
  double angular_accel_full_scale = 20000.0;
};

/// The fixed-size classifier input: rows are lin x,y,z then angular x,y,z on a
/// common grid, one column per grid step.
class ProcessedWindow {
 public:
  ProcessedWindow() = default;
  ProcessedWindow(std::size_t cols, std::size_t trigger_col, std::array<Unit, kWindowRows> units);

  std::size_t rows() const noexcept { return kWindowRows; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t trigger_col() const noexcept { return trigger_col_; }

  double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  /// Row-major rows x cols.
  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  const std::array<Unit, kWindowRows>& channel_units() const noexcept { return units_; }

  bool normalized() const noexcept { return normalized_; }
  /// Divisor applied to each row by normalize(); 1 before normalization.
  const std::array<double, kWindowRows>& row_scale() const noexcept { return scale_; }

  void mark_normalized(const std::array<double, kWindowRows>& scale) {
    scale_ = scale;
    normalized_ = true;
  }

  bool operator==(const ProcessedWindow&) const = default;

 private:
  std::size_t cols_ = 0;
  std::size_t trigger_col_ = 0;
  std::vector<double> data_;
  std::array<Unit, kWindowRows> units_{};
  std::array<double, kWindowRows> scale_{1, 1, 1, 1, 1, 1};
  bool normalized_ = false;
};

/// Converts a raw event into its processed window. Linear rows are the raw
/// samples; angular rows are low-passed, differentiated in acceleration mode,
/// then decimated onto the grid.
ProcessedWindow build_window(const KinematicEvent& event, const ProcessingConfig& cfg = {});

/// Divides rows by their full scale and saturates at +-1. Throws InvalidState
/// when the window is already normalized.
ProcessedWindow normalize(const ProcessedWindow& window, const ProcessingConfig& cfg = {});

/// Which side of a train/test split a window belongs to.
enum class Partition { Unassigned, Train, Test };

/// A window with its ground truth and provenance.
struct LabeledWindow {
  std::string id;
  ProcessedWindow window;
  Label label;
  Partition partition = Partition::Unassigned;

  bool operator==(const LabeledWindow&) const = default;
};

}  // namespace impact
