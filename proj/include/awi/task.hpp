#pragma once

#include <variant>
#include <vector>

#include "awi/primitives.hpp"
#include "awi/rng.hpp"
#include "awi/sim.hpp"
#include "awi/types.hpp"

namespace awi {

struct PickPlaceTask {
    int object_id = 0;
    int bin_id = 0;

    bool operator==(const PickPlaceTask&) const = default;
};

struct ReachTask {
    std::vector<Vec3> points;  // 1..3 targets visited in order

    bool operator==(const ReachTask&) const = default;
};

using Task = std::variant<PickPlaceTask, ReachTask>;

// The 4-object / 4-bin pick-and-place family: task id = object*4 + bin.
inline constexpr int kFamilyObjects = 4;
inline constexpr int kFamilyBins = 4;
inline constexpr int kFamilyTasks = kFamilyObjects * kFamilyBins;

PickPlaceTask family_task(int task_id);
int family_task_id(const PickPlaceTask& task);

// Random resting placements for this family's objects and bins, mutually
// separated and inset from the workspace walls so everything stays reachable.
struct SceneSamplerConfig {
    int objects = kFamilyObjects;
    int bins = kFamilyBins;
    double object_size_min = 0.04;
    double object_size_max = 0.05;
    double bin_width = 0.10;
    double wall_margin = 0.05;      // inset from workspace x/y walls
    double min_separation = 0.12;   // center-to-center, all entity pairs
    int max_attempts = 2000;
};

Scene sample_scene(Rng& rng, const SceneSamplerConfig& cfg = {});

// Canonical 5-waypoint solution built from ground-truth positions: approach
// above the object, lifted grasp point, carry above the bin, release, retreat.
std::vector<AttributedWaypoint> oracle_predict(const Scene& scene, const Task& task);

// Success predicates used for dataset generation and evaluation.
bool task_success(const Task& task, const SimState& final_state, const SimConfig& cfg);

struct ExpertEpisode {
    RobotLog log;
    SimState final_state;
    bool success = false;
};

// Scripted expert: oracle waypoints executed through the motor primitives.
// Throws InvalidInput for tasks that reference missing scene entities.
ExpertEpisode generate_expert_episode(const Task& task, const Scene& scene,
                                      const SimConfig& cfg, const GraspConfig& grasp_cfg = {});

}  // namespace awi
