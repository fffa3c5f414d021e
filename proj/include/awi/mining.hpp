#pragma once

#include <vector>

#include "awi/types.hpp"

namespace awi {

// Parameters for attribute mining from robot logs. The grasp rule marks
// frame t when the gripper was commanded to close but the jaws did not close
// by more than |delta| within d frames; the press rule marks frames where a
// motion command produced no displacement along the commanded direction.
struct MiningConfig {
    int d = 10;                        // lookahead frames for the jaw-gap test
    double delta = -0.05;              // meters; gap change threshold (negative)
    int smooth_width = 5;              // box filter width, odd
    double smooth_threshold = 0.5;     // re-threshold after smoothing, in (0,1]
    int press_force_window = 3;        // frames of lookahead for the press test
    double press_motion_epsilon = 0.002;   // meters
    double press_command_epsilon = 0.005;  // meters

    void validate() const;
};

// Box-filter a boolean sequence and re-threshold. Windows shrink at the
// sequence ends, so blocky sequences with runs >= width pass through
// unchanged.
std::vector<bool> smooth_boolean_sequence(const std::vector<bool>& seq, int width,
                                          double threshold);

// Grasp attribute: g_t = close_command_t AND (gap_{t+d} - gap_t > delta),
// smoothed. Lookahead past the end clamps to the last frame.
std::vector<bool> mine_grasp_attribute(const RobotLog& log, const MiningConfig& cfg);

// Press attribute: a motion command of magnitude > press_command_epsilon
// whose projected displacement over the next press_force_window frames stays
// below press_motion_epsilon, smoothed.
std::vector<bool> mine_press_attribute(const RobotLog& log, const MiningConfig& cfg);

// Assemble (ee position | attributes as 0/1) per frame.
AttributedTrajectory log_to_attributed_trajectory(
    const RobotLog& log, const std::vector<std::vector<bool>>& attribute_sequences);

}  // namespace awi
