#include "awi/mining.hpp"

#include <algorithm>
#include <cmath>

#include "awi/errors.hpp"

namespace awi {

void MiningConfig::validate() const {
    if (d < 1) throw InvalidInput("mining: d must be >= 1");
    if (smooth_width < 1 || smooth_width % 2 == 0)
        throw InvalidInput("mining: smooth_width must be odd and positive");
    if (!(smooth_threshold > 0.0 && smooth_threshold <= 1.0))
        throw InvalidInput("mining: smooth_threshold must be in (0,1]");
    if (press_force_window < 1) throw InvalidInput("mining: press_force_window must be >= 1");
}

std::vector<bool> smooth_boolean_sequence(const std::vector<bool>& seq, int width,
                                          double threshold) {
    const int t_len = static_cast<int>(seq.size());
    const int radius = width / 2;
    std::vector<bool> out(seq.size());
    for (int t = 0; t < t_len; ++t) {
        const int lo = std::max(0, t - radius);
        const int hi = std::min(t_len - 1, t + radius);
        int count = 0;
        for (int i = lo; i <= hi; ++i) count += seq[static_cast<std::size_t>(i)] ? 1 : 0;
        const double mean = static_cast<double>(count) / (hi - lo + 1);
        out[static_cast<std::size_t>(t)] = mean >= threshold;
    }
    return out;
}

std::vector<bool> mine_grasp_attribute(const RobotLog& log, const MiningConfig& cfg) {
    cfg.validate();
    log.validate();
    const int t_len = log.length();
    std::vector<bool> raw(static_cast<std::size_t>(t_len));
    for (int t = 0; t < t_len; ++t) {
        const bool commanded = log.actions[static_cast<std::size_t>(t)].gripper_close_command;
        const int ahead = std::min(t + cfg.d, t_len - 1);  // clamp past the end
        const double gap_now = log.states[static_cast<std::size_t>(t)].gripper_gap;
        const double gap_later = log.states[static_cast<std::size_t>(ahead)].gripper_gap;
        raw[static_cast<std::size_t>(t)] = commanded && (gap_later - gap_now > cfg.delta);
    }
    return smooth_boolean_sequence(raw, cfg.smooth_width, cfg.smooth_threshold);
}

std::vector<bool> mine_press_attribute(const RobotLog& log, const MiningConfig& cfg) {
    cfg.validate();
    log.validate();
    const int t_len = log.length();
    std::vector<bool> raw(static_cast<std::size_t>(t_len));
    for (int t = 0; t < t_len; ++t) {
        const Vec3 cmd = log.actions[static_cast<std::size_t>(t)].delta_ee;
        const double cmd_norm = cmd.norm();
        if (cmd_norm <= cfg.press_command_epsilon) continue;
        const int ahead = std::min(t + cfg.press_force_window, t_len - 1);
        const Vec3 moved = log.states[static_cast<std::size_t>(ahead)].ee_position -
                           log.states[static_cast<std::size_t>(t)].ee_position;
        const double along = moved.dot(cmd / cmd_norm);
        raw[static_cast<std::size_t>(t)] = along < cfg.press_motion_epsilon;
    }
    return smooth_boolean_sequence(raw, cfg.smooth_width, cfg.smooth_threshold);
}

AttributedTrajectory log_to_attributed_trajectory(
    const RobotLog& log, const std::vector<std::vector<bool>>& attribute_sequences) {
    log.validate();
    const std::size_t t_len = static_cast<std::size_t>(log.length());
    for (const auto& seq : attribute_sequences)
        if (seq.size() != t_len)
            throw InvalidInput("attribute sequence length differs from log length");

    AttributedTrajectory traj;
    traj.points.reserve(t_len);
    for (std::size_t t = 0; t < t_len; ++t) {
        AttributedWaypoint p;
        p.position = log.states[t].ee_position;
        p.attributes.reserve(attribute_sequences.size());
        for (const auto& seq : attribute_sequences)
            p.attributes.push_back(seq[t] ? 1.0 : 0.0);
        traj.points.push_back(std::move(p));
    }
    return traj;
}

}  // namespace awi
