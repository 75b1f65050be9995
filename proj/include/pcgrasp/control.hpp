#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

namespace pcgrasp {

struct ControlConfig {
  double tau_grasp = 400.0;  ///< trigger distance, mm; valid range is open (200, 10000)
  int v_close = 110;         ///< closing command, servo units
  int neutral = 90;          ///< stationary command
  double dwell = 3.0;        ///< seconds between proximity and actuation
  double frame_period = 0.1; ///< seconds per frame

  void validate() const;
  /// neutral - (v_close - neutral): the mirror of the closing command.
  int release_command() const { return 2 * neutral - v_close; }
  /// Whole frames of proximity needed before closing (0 when dwell is 0).
  std::uint32_t dwell_frames() const;
};

enum class Phase { idle, dwelling, closing, holding, releasing };

std::string_view to_string(Phase phase);

struct ControllerState {
  Phase phase = Phase::idle;
  double dwell_elapsed = 0.0;  ///< seconds, clamped to [0, dwell]
  std::uint32_t dwell_count = 0;
  int last_command = 90;
  bool motor_enabled = true;

  static ControllerState initial(const ControlConfig& cfg, bool motor_enabled = true);
};

struct ControlStep {
  ControllerState state;
  int command = 90;
};

/// One vision-mode frame. Below tau the dwell counter runs; once it covers
/// the dwell the phase becomes closing and the command latches at v_close
/// until release() is applied. A missing target or a distance >= tau resets
/// an unlatched controller. A disabled motor always yields neutral.
ControlStep step_vision(const ControllerState& state, std::optional<double> distance,
                        const ControlConfig& cfg);

/// Explicit release: closing or holding becomes releasing.
ControlStep release(const ControllerState& state, const ControlConfig& cfg);

/// The hand reached closure and the motor stops: closing becomes holding.
/// Holding stays latched (vision frames do not re-arm it) and emits neutral.
ControlStep settle(const ControllerState& state, const ControlConfig& cfg);

struct ForceTriggerConfig {
  int dead_zone = 5;  ///< ADC counts
  int baseline = 0;   ///< resting ADC reading

  void validate() const;
};

/// True when the reading exceeds the baseline by more than the dead zone.
bool step_force(int reading, const ForceTriggerConfig& cfg);

enum class ButtonEvent { none, grasp_pressed, release_pressed };

/// Push-button mode: grasp closes, release reverses, none keeps the phase
/// and re-emits its command.
ControlStep step_button(ButtonEvent event, const ControllerState& state, const ControlConfig& cfg);

/// Command implied by a phase.
int command_for(Phase phase, const ControlConfig& cfg);

}  // namespace pcgrasp
