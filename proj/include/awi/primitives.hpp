#pragma once

#include <optional>
#include <string>
#include <vector>

#include "awi/sim.hpp"
#include "awi/types.hpp"

namespace awi {

// The four motor primitives; which one runs between two waypoints is fully
// determined by the thresholded first attribute of each endpoint.
enum class PrimitiveKind : std::uint8_t {
    FreeSpace,        // (0,0): straight-line motion, gripper open
    GraspAndCarry,    // (0,1): grasp near the start, carry to the end
    ReleaseThenMove,  // (1,0): open in place, then straight-line to the end
    Carry,            // (1,1): straight-line motion keeping the gripper closed
};

const char* to_string(PrimitiveKind k);

PrimitiveKind dispatch_primitive(bool start_held, bool end_held);

struct PrimitiveCommand {
    AttributedWaypoint start;
    AttributedWaypoint end;
    PrimitiveKind primitive = PrimitiveKind::FreeSpace;
};

PrimitiveCommand make_command(const AttributedWaypoint& start, const AttributedWaypoint& end);

// Output of depth-image object localization.
struct GraspEstimate {
    Vec3 object_position;          // world frame; z is the blob's surface height
    int component_pixel_count = 0;
    double ground_plane_depth = 0; // camera-frame depth of the floor
};

struct LocalizeConfig {
    double background_depth = 1.0;   // mask out anything deeper
    double floor_margin = 0.01;      // meters above the floor to count as object
    int min_blob_pixels = 4;         // reject smaller components as noise
};

// Steps: background mask, floor from the median depth, above-floor mask,
// 4-connected components, centroid-nearest-to-center selection, pinhole
// back-projection of the centroid depth.
GraspEstimate localize_nearest_object(const DepthImage& depth,
                                      const LocalizeConfig& cfg = {});

struct GraspConfig {
    double approach_height = 0.15;   // hover this far above the estimate
    double descend_offset = 0.03;    // stop the EE this far above the estimated z
    double lift_height = 0.15;
    double estimate_gate = 0.08;     // accept estimates this close to the reference
    double arrive_tolerance = 0.005; // meters
    int approach_budget = 120;       // steps
    int descend_budget = 60;
    LocalizeConfig localize;
};

// An in-progress episode: the simulator state plus the log built alongside.
// Every apply() records (state-before, action) so log index t matches the
// step_count stamped on attach events.
struct Episode {
    SimState state;
    RobotLog log;
    const SimConfig* cfg = nullptr;

    Episode(SimState s, const SimConfig& c) : state(std::move(s)), cfg(&c) {}

    Vec3 ee() const { return ee_position(state, *cfg); }
    void apply(const SimAction& action);
    // Append the terminal state with a rest action so states/actions stay
    // aligned and the final pose is part of the log.
    void seal();
};

struct MotionResult {
    bool arrived = false;
    int steps = 0;
};

// Straight-line stepping toward the destination at the given gripper
// closure; stops within tolerance or when the budget runs out.
MotionResult move_straight(Episode& ep, const Vec3& destination, double gripper_closure,
                           double tolerance, int max_steps);

bool grasp_in_episode(Episode& ep, const Vec3& target_hint, const GraspConfig& cfg = {});

// Spec-shaped wrappers returning fresh states.
std::pair<SimState, bool> run_grasp_primitive(const SimState& state, const Vec3& target_hint,
                                              const SimConfig& sim_cfg,
                                              const GraspConfig& cfg = {});
struct FreeSpaceResult {
    SimState state;
    bool arrived = false;  // false = step budget exhausted
    int steps = 0;
};
FreeSpaceResult run_free_space(const SimState& state, const Vec3& destination,
                               const SimConfig& sim_cfg, double tolerance = 0.005,
                               int max_steps = 400);
SimState run_release(const SimState& state, const SimConfig& sim_cfg);
struct CarryResult {
    SimState state;
    bool arrived = false;
    bool had_load = false;  // false flags a carry issued with nothing attached
};
CarryResult run_carry(const SimState& state, const Vec3& destination,
                      const SimConfig& sim_cfg, double tolerance = 0.005,
                      int max_steps = 400);

struct SegmentOutcome {
    int segment = 0;
    PrimitiveKind primitive = PrimitiveKind::FreeSpace;
    bool ok = true;
    std::string note;
};

struct ExecutionResult {
    SimState final_state;
    RobotLog log;
    std::vector<SegmentOutcome> segments;

    bool all_ok() const {
        for (const auto& s : segments)
            if (!s.ok) return false;
        return true;
    }
};

// Threshold attributes at 0.5, map consecutive waypoint pairs onto primitives
// and run them in order. Primitive failures are recorded and execution
// continues with the remaining waypoints.
ExecutionResult execute_waypoints(const SimState& state,
                                  std::vector<AttributedWaypoint> waypoints,
                                  const SimConfig& sim_cfg, const GraspConfig& grasp_cfg = {});

}  // namespace awi
