#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <vector>

#include "awi/types.hpp"

namespace awi {

// Yaw-pitch-pitch 3R chain: a base yaw joint, then two pitch joints. At the
// zero pose all three links point along +x from the arm base.
struct ArmModel {
    std::array<double, 3> link_lengths{0.1, 0.3, 0.3};
    std::array<std::array<double, 2>, 3> joint_limits{
        {{-3.05, 3.05}, {-1.7, 1.7}, {-2.9, 2.9}}};
    double max_ee_step = 0.02;  // meters per control step

    double reach() const { return link_lengths[1] + link_lengths[2]; }
};

struct IkConfig {
    double damping = 0.05;     // DLS lambda
    int max_iterations = 200;
    double step_clamp = 0.2;   // radians per iteration per joint
    double tolerance = 1e-4;   // meters
};

struct CameraConfig {
    int width = 64, height = 64;
    double fx = 100.0, fy = 100.0, cx = 32.0, cy = 32.0;
    double mount_height = 0.05;  // camera sits this far above the EE, looking down
};

// Gripper geometry: closing attaches the nearest object whose top point is
// within grasp_radius horizontally and whose top sits between slightly above
// the EE and finger_length below it.
struct GripperConfig {
    double gap_max = 0.08;
    double slew_rate = 0.08;         // meters of jaw travel per step
    double grasp_radius = 0.03;      // horizontal attach radius
    double finger_length = 0.05;     // vertical attach window below the EE
    double vertical_slack = 0.01;    // tolerated EE dip below the object top
    double squeeze = 0.9;            // held gap = object size * squeeze
};

struct SimConfig {
    ArmModel arm;
    IkConfig ik;
    CameraConfig camera;
    GripperConfig gripper;
};

struct AttachEvent {
    int step = 0;       // step_count at the time the causing action executed
    bool attach = true; // false = detach
    int object_id = 0;
};

struct SimState {
    std::array<double, 3> joint_angles{0, 0, 0};
    double gripper_gap = 0.08;
    Scene scene;
    std::optional<int> attached_object;
    Vec3 grab_offset;  // object center relative to the EE while attached
    int step_count = 0;
    std::vector<AttachEvent> truth_attach_events;
};

struct SimAction {
    Vec3 delta_ee;
    double gripper_closure = 0.0;  // 0 = open, 1 = fully closed
};

struct DepthImage {
    int width = 0, height = 0;
    std::vector<double> depths;  // row-major z-depth, meters; +inf = no hit
    double fx = 0, fy = 0, cx = 0, cy = 0;
    Vec3 camera_position;
    Mat3 camera_rotation;  // columns = camera axes in world; +z looks out

    double at(int u, int v) const {
        return depths[static_cast<std::size_t>(v) * width + u];
    }
};

Vec3 forward_kinematics(const ArmModel& arm, const std::array<double, 3>& joint_angles);

// Analytic Jacobian columns d(EE)/d(joint).
std::array<Vec3, 3> arm_jacobian(const ArmModel& arm,
                                 const std::array<double, 3>& joint_angles);

// Damped-least-squares IK. Throws UnreachableError for targets outside the
// reachable set and ConvergenceError when iterations run out.
std::array<double, 3> inverse_kinematics(const ArmModel& arm, const Vec3& target,
                                         const std::array<double, 3>& initial_angles,
                                         const IkConfig& ik = {});

// Best-effort variant used by the stepper: never throws, returns the closest
// configuration found.
std::array<double, 3> ik_best_effort(const ArmModel& arm, const Vec3& target,
                                     const std::array<double, 3>& initial_angles,
                                     const IkConfig& ik);

// True when the target (world frame, relative to arm_base already removed)
// lies inside the reachable set with the given clearance.
bool reachable(const ArmModel& arm, const Vec3& target_local, double margin = 0.0);

// Initial state: gripper open, EE driven to a home point above the workspace
// center.
SimState make_initial_state(const Scene& scene, const SimConfig& cfg);

Vec3 ee_position(const SimState& state, const SimConfig& cfg);

// One control step: clip the EE delta, drive joints by IK, slew the gripper,
// apply the attach/detach rules, advance step_count. Never faults.
SimState step(const SimState& state, const SimAction& action, const SimConfig& cfg);

// Per-frame ground-truth attachment labels derived from the recorded events:
// label[t] is true when an object is held at the end of step t.
std::vector<bool> attachment_labels(const std::vector<AttachEvent>& events, int length);

// Eye-in-hand depth render by analytic ray casting (ground plane, spheres,
// boxes). The parallel version splits rows across OpenMP threads and is
// bit-identical to the serial reference.
DepthImage render_depth_serial(const SimState& state, const SimConfig& cfg);
DepthImage render_depth(const SimState& state, const SimConfig& cfg);

// 16-bit PGM, millimeters, for debugging; no-hit pixels saturate.
void save_depth_pgm(const DepthImage& image, const std::filesystem::path& path);

}  // namespace awi
