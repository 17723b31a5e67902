#include "impact/core/window.hpp"

#include <algorithm>
#include <cmath>

#include "impact/core/error.hpp"
#include "impact/core/signal.hpp"

namespace impact {

ProcessedWindow::ProcessedWindow(std::size_t cols, std::size_t trigger_col,
                                 std::array<Unit, kWindowRows> units)
    : cols_(cols), trigger_col_(trigger_col), data_(kWindowRows * cols, 0.0), units_(units) {
  if (trigger_col >= cols && cols > 0) throw InvalidParameter("trigger column outside window");
}

ProcessedWindow build_window(const KinematicEvent& event, const ProcessingConfig& cfg) {
  event.validate();
  const TriggerConfig& trig = event.trigger;
  if (!(cfg.lowpass_cutoff_hz > 0.0)) throw InvalidParameter("lowpass_cutoff_hz must be > 0");

  const double grid = cfg.grid_rate_hz;
  const std::size_t cols = static_cast<std::size_t>(std::llround(trig.window_ms() * grid / 1000.0));
  const std::size_t trigger_col = static_cast<std::size_t>(std::llround(trig.pre_ms * grid / 1000.0));
  const Unit ang_unit = cfg.angular_mode == AngularMode::Acceleration ? Unit::RadPerSec2 : Unit::DegPerSec;

  ProcessedWindow window(cols, trigger_col, {Unit::G, Unit::G, Unit::G, ang_unit, ang_unit, ang_unit});

  auto place = [&](std::size_t row, const ChannelSeries& s) {
    if (s.size() != cols) {
      throw StructuralError("channel resampled to " + std::to_string(s.size()) + " columns, expected " +
                            std::to_string(cols));
    }
    std::copy(s.samples.begin(), s.samples.end(), window.row(row).begin());
  };

  for (std::size_t a = 0; a < 3; ++a) {
    place(a, decimate(event.lin_acc[a], grid));

    ChannelSeries ang = lowpass_filter(event.ang_vel[a], cfg.lowpass_cutoff_hz);
    if (cfg.angular_mode == AngularMode::Acceleration) ang = differentiate(ang);
    place(3 + a, decimate(ang, grid));
  }
  return window;
}

ProcessedWindow normalize(const ProcessedWindow& window, const ProcessingConfig& cfg) {
  if (window.normalized()) throw InvalidState("window is already normalized");
  if (!(cfg.angular_accel_full_scale > 0.0)) throw InvalidParameter("angular_accel_full_scale must be > 0");

  std::array<double, kWindowRows> scale{};
  ProcessedWindow out = window;
  for (std::size_t r = 0; r < kWindowRows; ++r) {
    switch (window.channel_units()[r]) {
      case Unit::G: scale[r] = kLinearFullScaleG; break;
      case Unit::DegPerSec: scale[r] = kAngularFullScaleDps; break;
      case Unit::RadPerSec2: scale[r] = cfg.angular_accel_full_scale; break;
    }
    for (double& v : out.row(r)) v = std::clamp(v / scale[r], -1.0, 1.0);
  }
  out.mark_normalized(scale);
  return out;
}

}  // namespace impact
