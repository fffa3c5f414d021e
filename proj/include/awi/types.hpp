#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "awi/geometry.hpp"

namespace awi {

// A 3D end-effector position plus k attribute channels in [0,1]. Attributes
// stay continuous through learning and are thresholded at 0.5 only when a
// waypoint is handed to the executor.
struct AttributedWaypoint {
    Vec3 position;
    std::vector<double> attributes;  // each in [0,1]

    AttributedWaypoint() = default;
    AttributedWaypoint(Vec3 p, std::vector<double> a)
        : position(p), attributes(std::move(a)) {}

    bool operator==(const AttributedWaypoint& o) const = default;

    int k() const { return static_cast<int>(attributes.size()); }
    int dim() const { return 3 + k(); }

    double channel(int i) const {
        return i < 3 ? position[i] : attributes[static_cast<std::size_t>(i - 3)];
    }
    void set_channel(int i, double v) {
        if (i < 3)
            position[i] = v;
        else
            attributes[static_cast<std::size_t>(i - 3)] = v;
    }

    void validate() const;
};

// Dense time series of attributed waypoints; the supervision signal mined
// from robot logs and the output of waypoint interpolation.
struct AttributedTrajectory {
    std::vector<AttributedWaypoint> points;             // length >= 1
    std::optional<std::vector<double>> timestamps;      // strictly increasing

    bool operator==(const AttributedTrajectory& o) const = default;

    int length() const { return static_cast<int>(points.size()); }
    int k() const { return points.empty() ? 0 : points.front().k(); }

    void validate() const;
};

struct RobotState {
    std::vector<double> joint_angles;  // radians
    double gripper_gap = 0.0;          // meters, >= 0
    Vec3 ee_position;

    bool operator==(const RobotState& o) const = default;
};

struct RobotAction {
    Vec3 delta_ee;                     // commanded EE displacement, meters
    bool gripper_close_command = false;

    bool operator==(const RobotAction& o) const = default;
};

// Raw per-step record of one episode; states[t] is the state the action
// actions[t] was taken from.
struct RobotLog {
    std::vector<RobotState> states;
    std::vector<RobotAction> actions;

    bool operator==(const RobotLog& o) const = default;

    int length() const { return static_cast<int>(states.size()); }
    void validate() const;
};

enum class ShapeKind : std::uint8_t { Sphere, Box };

struct SceneObject {
    int id = 0;
    ShapeKind shape = ShapeKind::Sphere;
    double size = 0.04;  // sphere diameter / cube edge, meters
    Vec3 position;       // center; rests at z = size/2 at spawn

    bool operator==(const SceneObject& o) const = default;

    double half_height() const { return size * 0.5; }
    Vec3 top() const { return position + Vec3{0, 0, half_height()}; }
};

struct Bin {
    int id = 0;
    Vec3 center;
    Vec3 extent;  // full box dimensions

    bool operator==(const Bin& o) const = default;

    bool contains_xy(const Vec3& p) const {
        return std::abs(p.x - center.x) <= extent.x * 0.5 &&
               std::abs(p.y - center.y) <= extent.y * 0.5;
    }
};

// One task instance: objects, bins, arm base, and the workspace box.
struct Scene {
    std::vector<SceneObject> objects;
    std::vector<Bin> bins;
    Vec3 arm_base{0.0, 0.0, 0.2};
    Box3 workspace{{0.1, -0.3, 0.0}, {0.6, 0.3, 0.4}};

    bool operator==(const Scene& o) const = default;

    void validate() const;
    const SceneObject* find_object(int id) const;
    const Bin* find_bin(int id) const;
};

// Fixed-length encoding of a Scene: per object slot a one-hot id plus the
// object position, then per bin slot the bin center. Slot index = entity id.
struct SceneDescriptor {
    std::vector<double> vector;

    bool operator==(const SceneDescriptor& o) const = default;

    int dim() const { return static_cast<int>(vector.size()); }
};

struct DescriptorLayout {
    int max_objects = 6;
    int max_bins = 6;

    bool operator==(const DescriptorLayout& o) const = default;

    int object_slot_dim() const { return max_objects + 3; }  // one-hot + position
    int object_slot_offset(int id) const { return id * object_slot_dim(); }
    int bin_slot_offset(int id) const {
        return max_objects * object_slot_dim() + id * 3;
    }
    int dim() const { return max_objects * object_slot_dim() + max_bins * 3; }
};

enum class SampleOrigin : std::uint8_t { Task, Synthesized };

inline const char* to_string(SampleOrigin o) {
    return o == SampleOrigin::Task ? "task" : "synthesized";
}

// Ten descriptor frames subsampled uniformly in time from one execution.
// Each frame = scene descriptor of the demo instance + the demonstrator's
// 3+k end-effector state at that instant.
struct DemonstrationClip {
    static constexpr int kFrames = 10;

    std::vector<std::vector<double>> frames;  // exactly kFrames rows
    AttributedTrajectory source_trajectory;
    SampleOrigin origin = SampleOrigin::Task;

    bool operator==(const DemonstrationClip& o) const = default;

    int frame_dim() const {
        return frames.empty() ? 0 : static_cast<int>(frames.front().size());
    }
    void validate() const;
};

// One training sample: demo clip, descriptor of the instance to act in, and
// the ground-truth attributed trajectory for that instance.
struct Sample {
    DemonstrationClip demo;
    SceneDescriptor instance_descriptor;
    AttributedTrajectory target;
    SampleOrigin origin = SampleOrigin::Task;
    int task_id = -1;  // -1 for synthesized samples

    bool operator==(const Sample& o) const = default;

    void validate() const;
};

}  // namespace awi
