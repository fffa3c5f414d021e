#include "awi/primitives.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "awi/errors.hpp"

namespace awi {

const char* to_string(PrimitiveKind k) {
    switch (k) {
        case PrimitiveKind::FreeSpace: return "free_space";
        case PrimitiveKind::GraspAndCarry: return "grasp_and_carry";
        case PrimitiveKind::ReleaseThenMove: return "release_then_move";
        case PrimitiveKind::Carry: return "carry";
    }
    return "?";
}

PrimitiveKind dispatch_primitive(bool start_held, bool end_held) {
    if (!start_held && !end_held) return PrimitiveKind::FreeSpace;
    if (!start_held && end_held) return PrimitiveKind::GraspAndCarry;
    if (start_held && !end_held) return PrimitiveKind::ReleaseThenMove;
    return PrimitiveKind::Carry;
}

namespace {
bool held_attr(const AttributedWaypoint& w) {
    if (w.attributes.empty()) throw InvalidInput("waypoint has no attribute channel");
    return w.attributes[0] >= 0.5;
}
}  // namespace

PrimitiveCommand make_command(const AttributedWaypoint& start, const AttributedWaypoint& end) {
    return {start, end, dispatch_primitive(held_attr(start), held_attr(end))};
}

GraspEstimate localize_nearest_object(const DepthImage& depth, const LocalizeConfig& cfg) {
    const int w = depth.width, h = depth.height;

    // 1) Background mask, 2) floor depth = median of the foreground.
    std::vector<double> foreground;
    foreground.reserve(depth.depths.size());
    for (double d : depth.depths)
        if (std::isfinite(d) && d <= cfg.background_depth) foreground.push_back(d);
    if (foreground.empty()) throw NoObjectError("localize: image is all background");
    const std::size_t mid = foreground.size() / 2;
    std::nth_element(foreground.begin(), foreground.begin() + static_cast<std::ptrdiff_t>(mid),
                     foreground.end());
    const double floor_depth = foreground[mid];

    // 3) Object mask: closer to the camera than the floor by the margin.
    std::vector<char> mask(static_cast<std::size_t>(w) * h, 0);
    for (int v = 0; v < h; ++v)
        for (int u = 0; u < w; ++u) {
            const double d = depth.at(u, v);
            if (std::isfinite(d) && d <= cfg.background_depth &&
                floor_depth - d >= cfg.floor_margin)
                mask[static_cast<std::size_t>(v) * w + u] = 1;
        }

    // 4) 4-connected components.
    std::vector<int> label(static_cast<std::size_t>(w) * h, -1);
    struct Component {
        double sum_u = 0, sum_v = 0;
        int count = 0;
    };
    std::vector<Component> comps;
    for (int v = 0; v < h; ++v) {
        for (int u = 0; u < w; ++u) {
            const std::size_t idx = static_cast<std::size_t>(v) * w + u;
            if (!mask[idx] || label[idx] >= 0) continue;
            const int id = static_cast<int>(comps.size());
            comps.push_back({});
            std::deque<std::pair<int, int>> queue{{u, v}};
            label[idx] = id;
            while (!queue.empty()) {
                const auto [cu, cv] = queue.front();
                queue.pop_front();
                comps[static_cast<std::size_t>(id)].sum_u += cu;
                comps[static_cast<std::size_t>(id)].sum_v += cv;
                comps[static_cast<std::size_t>(id)].count += 1;
                const int nu[4] = {cu - 1, cu + 1, cu, cu};
                const int nv[4] = {cv, cv, cv - 1, cv + 1};
                for (int n = 0; n < 4; ++n) {
                    if (nu[n] < 0 || nu[n] >= w || nv[n] < 0 || nv[n] >= h) continue;
                    const std::size_t nidx = static_cast<std::size_t>(nv[n]) * w + nu[n];
                    if (mask[nidx] && label[nidx] < 0) {
                        label[nidx] = id;
                        queue.emplace_back(nu[n], nv[n]);
                    }
                }
            }
        }
    }
    if (comps.empty()) throw NoObjectError("localize: no above-floor pixels");

    // 5) Component with centroid nearest the principal point.
    int best = -1;
    double best_dist = std::numeric_limits<double>::infinity();
    bool any_large = false;
    for (std::size_t i = 0; i < comps.size(); ++i) {
        if (comps[i].count < cfg.min_blob_pixels) continue;
        any_large = true;
        const double cu = comps[i].sum_u / comps[i].count;
        const double cv = comps[i].sum_v / comps[i].count;
        const double dist = std::hypot(cu - depth.cx, cv - depth.cy);
        if (dist < best_dist) {
            best_dist = dist;
            best = static_cast<int>(i);
        }
    }
    if (!any_large) throw NoiseError("localize: all blobs below minimum size");

    const double centroid_u = comps[static_cast<std::size_t>(best)].sum_u /
                              comps[static_cast<std::size_t>(best)].count;
    const double centroid_v = comps[static_cast<std::size_t>(best)].sum_v /
                              comps[static_cast<std::size_t>(best)].count;

    // 6) Depth at the component pixel nearest the centroid, back-projected.
    int pu = -1, pv = -1;
    double pdist = std::numeric_limits<double>::infinity();
    for (int v = 0; v < h; ++v)
        for (int u = 0; u < w; ++u) {
            if (label[static_cast<std::size_t>(v) * w + u] != best) continue;
            const double dd = std::hypot(u - centroid_u, v - centroid_v);
            if (dd < pdist) {
                pdist = dd;
                pu = u;
                pv = v;
            }
        }
    const double zc = depth.at(pu, pv);
    const Vec3 cam_point{(centroid_u - depth.cx) / depth.fx * zc,
                         (centroid_v - depth.cy) / depth.fy * zc, zc};
    GraspEstimate est;
    est.object_position = depth.camera_position + depth.camera_rotation * cam_point;
    est.component_pixel_count = comps[static_cast<std::size_t>(best)].count;
    est.ground_plane_depth = floor_depth;
    return est;
}

void Episode::apply(const SimAction& action) {
    RobotState s;
    s.joint_angles.assign(state.joint_angles.begin(), state.joint_angles.end());
    s.gripper_gap = state.gripper_gap;
    s.ee_position = ee_position(state, *cfg);
    log.states.push_back(std::move(s));
    log.actions.push_back({action.delta_ee, action.gripper_closure >= 0.5});
    state = step(state, action, *cfg);
}

void Episode::seal() {
    RobotState s;
    s.joint_angles.assign(state.joint_angles.begin(), state.joint_angles.end());
    s.gripper_gap = state.gripper_gap;
    s.ee_position = ee_position(state, *cfg);
    log.states.push_back(std::move(s));
    log.actions.push_back({Vec3{0, 0, 0}, false});
}

MotionResult move_straight(Episode& ep, const Vec3& destination, double gripper_closure,
                           double tolerance, int max_steps) {
    MotionResult res;
    const Vec3 dest = ep.state.scene.workspace.clamp(destination);
    for (int i = 0; i < max_steps; ++i) {
        const Vec3 to_go = dest - ep.ee();
        if (to_go.norm() <= tolerance) {
            res.arrived = true;
            return res;
        }
        ep.apply({to_go, gripper_closure});
        res.steps += 1;
    }
    res.arrived = (dest - ep.ee()).norm() <= tolerance;
    return res;
}

bool grasp_in_episode(Episode& ep, const Vec3& target_hint, const GraspConfig& cfg) {
    std::optional<Vec3> estimate;

    // Approach: hover above the current reference, re-localizing every step.
    // Estimates far from the reference are other objects and get ignored.
    for (int i = 0; i < cfg.approach_budget; ++i) {
        const DepthImage img = render_depth(ep.state, *ep.cfg);
        try {
            const GraspEstimate e = localize_nearest_object(img, cfg.localize);
            const Vec3 ref = estimate ? *estimate : target_hint;
            if (horizontal_distance(e.object_position, ref) <= cfg.estimate_gate)
                estimate = e.object_position;
        } catch (const NoObjectError&) {
        } catch (const NoiseError&) {
        }
        // Without an estimate, fly toward the hint but stay high enough for
        // the camera to keep the floor and object in view.
        const Vec3 hover =
            estimate ? *estimate + Vec3{0, 0, cfg.approach_height}
                     : Vec3{target_hint.x, target_hint.y,
                            std::max(target_hint.z, cfg.approach_height)};
        const Vec3 to_go = hover - ep.ee();
        if (to_go.norm() <= cfg.arrive_tolerance && estimate) break;
        if (to_go.norm() <= cfg.arrive_tolerance && !estimate) {
            // Reached the hint without ever seeing an object; give the camera
            // one more chance from here before giving up.
            const DepthImage here = render_depth(ep.state, *ep.cfg);
            try {
                const GraspEstimate e = localize_nearest_object(here, cfg.localize);
                if (horizontal_distance(e.object_position, target_hint) <= cfg.estimate_gate)
                    estimate = e.object_position;
            } catch (const std::exception&) {
            }
            if (!estimate) return false;
        }
        if (to_go.norm() > cfg.arrive_tolerance) ep.apply({to_go, 0.0});
    }
    if (!estimate) return false;

    // Descend with the estimate frozen; the camera is too close to the floor
    // for a reliable median once the gripper drops.
    const Vec3 grasp_point{estimate->x, estimate->y, estimate->z + cfg.descend_offset};
    move_straight(ep, grasp_point, 0.0, 0.003, cfg.descend_budget);

    // Close, then lift.
    ep.apply({Vec3{0, 0, 0}, 1.0});
    const Vec3 lifted = ep.ee() + Vec3{0, 0, cfg.lift_height};
    move_straight(ep, lifted, 1.0, cfg.arrive_tolerance, 40);
    return ep.state.attached_object.has_value();
}

std::pair<SimState, bool> run_grasp_primitive(const SimState& state, const Vec3& target_hint,
                                              const SimConfig& sim_cfg,
                                              const GraspConfig& cfg) {
    Episode ep(state, sim_cfg);
    const bool ok = grasp_in_episode(ep, target_hint, cfg);
    return {std::move(ep.state), ok};
}

FreeSpaceResult run_free_space(const SimState& state, const Vec3& destination,
                               const SimConfig& sim_cfg, double tolerance, int max_steps) {
    Episode ep(state, sim_cfg);
    const MotionResult m = move_straight(ep, destination, 0.0, tolerance, max_steps);
    return {std::move(ep.state), m.arrived, m.steps};
}

SimState run_release(const SimState& state, const SimConfig& sim_cfg) {
    Episode ep(state, sim_cfg);
    ep.apply({Vec3{0, 0, 0}, 0.0});
    return std::move(ep.state);
}

CarryResult run_carry(const SimState& state, const Vec3& destination,
                      const SimConfig& sim_cfg, double tolerance, int max_steps) {
    Episode ep(state, sim_cfg);
    CarryResult res;
    res.had_load = state.attached_object.has_value();
    const MotionResult m = move_straight(ep, destination, 1.0, tolerance, max_steps);
    res.arrived = m.arrived;
    res.state = std::move(ep.state);
    return res;
}

ExecutionResult execute_waypoints(const SimState& state,
                                  std::vector<AttributedWaypoint> waypoints,
                                  const SimConfig& sim_cfg, const GraspConfig& grasp_cfg) {
    if (waypoints.empty()) throw InvalidInput("execute_waypoints: no waypoints");
    for (auto& w : waypoints) w.position = state.scene.workspace.clamp(w.position);

    Episode ep(state, sim_cfg);
    ExecutionResult result;

    const auto segment_budget = [&](const Vec3& from, const Vec3& to) {
        return static_cast<int>((to - from).norm() / sim_cfg.arm.max_ee_step * 2.0) + 50;
    };

    // Reach the first waypoint in free space.
    {
        const int budget = segment_budget(ep.ee(), waypoints.front().position);
        const MotionResult m =
            move_straight(ep, waypoints.front().position, 0.0, 0.005, budget);
        if (!m.arrived)
            result.segments.push_back({-1, PrimitiveKind::FreeSpace, false, "timeout"});
    }

    for (std::size_t i = 0; i + 1 < waypoints.size(); ++i) {
        const PrimitiveCommand cmd = make_command(waypoints[i], waypoints[i + 1]);
        SegmentOutcome outcome;
        outcome.segment = static_cast<int>(i);
        outcome.primitive = cmd.primitive;
        const int budget = segment_budget(ep.ee(), cmd.end.position);
        switch (cmd.primitive) {
            case PrimitiveKind::FreeSpace: {
                const MotionResult m =
                    move_straight(ep, cmd.end.position, 0.0, 0.005, budget);
                if (!m.arrived) {
                    outcome.ok = false;
                    outcome.note = "timeout";
                }
                break;
            }
            case PrimitiveKind::GraspAndCarry: {
                const bool grasped = grasp_in_episode(ep, cmd.start.position, grasp_cfg);
                if (!grasped) {
                    outcome.ok = false;
                    outcome.note = "grasp failed";
                }
                const MotionResult m = move_straight(ep, cmd.end.position,
                                                     grasped ? 1.0 : 0.0, 0.005, budget);
                if (!m.arrived) {
                    outcome.ok = false;
                    outcome.note += outcome.note.empty() ? "timeout" : "; timeout";
                }
                break;
            }
            case PrimitiveKind::ReleaseThenMove: {
                ep.apply({Vec3{0, 0, 0}, 0.0});
                const MotionResult m =
                    move_straight(ep, cmd.end.position, 0.0, 0.005, budget);
                if (!m.arrived) {
                    outcome.ok = false;
                    outcome.note = "timeout";
                }
                break;
            }
            case PrimitiveKind::Carry: {
                if (!ep.state.attached_object) {
                    outcome.ok = false;
                    outcome.note = "no load";
                }
                const MotionResult m =
                    move_straight(ep, cmd.end.position, 1.0, 0.005, budget);
                if (!m.arrived) {
                    outcome.ok = false;
                    outcome.note += outcome.note.empty() ? "timeout" : "; timeout";
                }
                break;
            }
        }
        result.segments.push_back(std::move(outcome));
    }

    ep.seal();
    result.final_state = std::move(ep.state);
    result.log = std::move(ep.log);
    return result;
}

}  // namespace awi
