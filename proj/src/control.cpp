#include "pcgrasp/control.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pcgrasp/error.hpp"

namespace pcgrasp {

void ControlConfig::validate() const {
  if (!(tau_grasp > 200.0 && tau_grasp < 10000.0))
    throw ConfigError("control.tau_grasp_mm = " + std::to_string(tau_grasp) +
                      " is outside the valid range (200, 10000) mm");
  if (neutral != 90) throw ConfigError("control.neutral must be 90");
  if (v_close == neutral) throw ConfigError("control.v_close must differ from the neutral command 90");
  if (!(dwell >= 0.0)) throw ConfigError("control.dwell_s must be >= 0");
  if (!(frame_period > 0.0)) throw ConfigError("control.frame_period_s must be > 0");
}

std::uint32_t ControlConfig::dwell_frames() const {
  // 3.0 / 0.1 evaluates to 29.999999999999996; the slack absorbs that.
  return static_cast<std::uint32_t>(std::max(0.0, std::ceil(dwell / frame_period - 1e-9)));
}

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::idle: return "idle";
    case Phase::dwelling: return "dwelling";
    case Phase::closing: return "closing";
    case Phase::holding: return "holding";
    case Phase::releasing: return "releasing";
  }
  return "idle";
}

ControllerState ControllerState::initial(const ControlConfig& cfg, bool motor_enabled) {
  ControllerState s;
  s.last_command = cfg.neutral;
  s.motor_enabled = motor_enabled;
  return s;
}

int command_for(Phase phase, const ControlConfig& cfg) {
  switch (phase) {
    case Phase::closing: return cfg.v_close;
    case Phase::releasing: return cfg.release_command();
    default: return cfg.neutral;
  }
}

namespace {

ControlStep emit(ControllerState s, const ControlConfig& cfg) {
  s.last_command = command_for(s.phase, cfg);
  return {s, s.last_command};
}

ControllerState reset_dwell(ControllerState s) {
  s.dwell_count = 0;
  s.dwell_elapsed = 0.0;
  return s;
}

}  // namespace

ControlStep step_vision(const ControllerState& state, std::optional<double> distance,
                        const ControlConfig& cfg) {
  ControllerState s = state;
  if (!s.motor_enabled) {
    s = reset_dwell(s);
    s.phase = Phase::idle;
    return emit(s, cfg);
  }

  const bool near = distance && *distance < cfg.tau_grasp;
  switch (s.phase) {
    case Phase::closing:
    case Phase::holding:
      return emit(s, cfg);
    case Phase::releasing:
      // Re-arm only after the target has left the trigger range.
      if (!near) s.phase = Phase::idle;
      return emit(s, cfg);
    case Phase::idle:
    case Phase::dwelling:
      break;
  }

  if (!near) {
    s = reset_dwell(s);
    s.phase = Phase::idle;
    return emit(s, cfg);
  }
  ++s.dwell_count;
  s.dwell_elapsed = std::min(cfg.dwell, s.dwell_count * cfg.frame_period);
  s.phase = s.dwell_count >= cfg.dwell_frames() ? Phase::closing : Phase::dwelling;
  return emit(s, cfg);
}

ControlStep release(const ControllerState& state, const ControlConfig& cfg) {
  ControllerState s = reset_dwell(state);
  s.phase = Phase::releasing;
  return emit(s, cfg);
}

ControlStep settle(const ControllerState& state, const ControlConfig& cfg) {
  ControllerState s = state;
  if (s.phase == Phase::closing) s.phase = Phase::holding;
  return emit(s, cfg);
}

void ForceTriggerConfig::validate() const {
  if (dead_zone < 0) throw ConfigError("force dead zone must be >= 0");
}

bool step_force(int reading, const ForceTriggerConfig& cfg) {
  return reading - cfg.baseline > cfg.dead_zone;
}

ControlStep step_button(ButtonEvent event, const ControllerState& state, const ControlConfig& cfg) {
  ControllerState s = state;
  if (!s.motor_enabled) {
    s = reset_dwell(s);
    s.phase = Phase::idle;
    return emit(s, cfg);
  }
  switch (event) {
    case ButtonEvent::grasp_pressed:
      s = reset_dwell(s);
      s.phase = Phase::closing;
      break;
    case ButtonEvent::release_pressed:
      s = reset_dwell(s);
      s.phase = Phase::releasing;
      break;
    case ButtonEvent::none:
      break;
  }
  return emit(s, cfg);
}

}  // namespace pcgrasp
