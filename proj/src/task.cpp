#include "awi/task.hpp"

#include <algorithm>
#include <cmath>

#include "awi/errors.hpp"

namespace awi {

PickPlaceTask family_task(int task_id) {
    if (task_id < 0 || task_id >= kFamilyTasks) throw InvalidInput("task id out of range");
    return {task_id / kFamilyBins, task_id % kFamilyBins};
}

int family_task_id(const PickPlaceTask& task) {
    return task.object_id * kFamilyBins + task.bin_id;
}

Scene sample_scene(Rng& rng, const SceneSamplerConfig& cfg) {
    Scene scene;
    const Box3& ws = scene.workspace;
    const double lo_x = ws.min.x + cfg.wall_margin, hi_x = ws.max.x - cfg.wall_margin;
    const double lo_y = ws.min.y + cfg.wall_margin, hi_y = ws.max.y - cfg.wall_margin;

    std::vector<Vec3> placed;
    const auto place = [&]() -> Vec3 {
        for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
            const Vec3 p{rng.uniform(lo_x, hi_x), rng.uniform(lo_y, hi_y), 0.0};
            bool ok = true;
            for (const auto& q : placed)
                if (horizontal_distance(p, q) < cfg.min_separation) {
                    ok = false;
                    break;
                }
            if (ok) {
                placed.push_back(p);
                return p;
            }
        }
        throw ConvergenceError("scene sampling: could not place entity");
    };

    for (int i = 0; i < cfg.objects; ++i) {
        SceneObject o;
        o.id = i;
        o.shape = (i % 2 == 0) ? ShapeKind::Sphere : ShapeKind::Box;
        o.size = rng.uniform(cfg.object_size_min, cfg.object_size_max);
        const Vec3 p = place();
        o.position = {p.x, p.y, o.half_height()};
        scene.objects.push_back(o);
    }
    for (int i = 0; i < cfg.bins; ++i) {
        Bin b;
        b.id = i;
        const Vec3 p = place();
        b.center = {p.x, p.y, 0.01};
        b.extent = {cfg.bin_width, cfg.bin_width, 0.02};
        scene.bins.push_back(b);
    }
    scene.validate();
    return scene;
}

namespace {

AttributedWaypoint wp(const Vec3& p, double attr) { return {p, {attr}}; }

std::vector<AttributedWaypoint> oracle_pick_place(const Scene& scene,
                                                  const PickPlaceTask& task) {
    const SceneObject* obj = scene.find_object(task.object_id);
    const Bin* bin = scene.find_bin(task.bin_id);
    if (!obj || !bin) throw InvalidInput("oracle: task references missing entities");

    const double z_top = obj->top().z;
    const double hover_z = z_top + 0.15;
    const double carry_z = z_top + 0.18;  // where the grasp primitive leaves the EE
    return {
        wp({obj->position.x, obj->position.y, hover_z}, 0.0),
        wp({obj->position.x, obj->position.y, carry_z}, 1.0),
        wp({bin->center.x, bin->center.y, carry_z}, 1.0),
        wp({bin->center.x, bin->center.y, carry_z}, 0.0),
        wp({bin->center.x, bin->center.y, std::min(carry_z + 0.05,
                                                   scene.workspace.max.z)}, 0.0),
    };
}

std::vector<AttributedWaypoint> oracle_reach(const Scene& scene, const ReachTask& task) {
    if (task.points.empty() || task.points.size() > 3)
        throw InvalidInput("oracle: reach task needs 1..3 points");
    std::vector<AttributedWaypoint> out;
    for (const auto& p : task.points) out.push_back(wp(scene.workspace.clamp(p), 0.0));
    while (out.size() < 5) out.push_back(out.back());
    return out;
}

}  // namespace

std::vector<AttributedWaypoint> oracle_predict(const Scene& scene, const Task& task) {
    return std::visit(
        [&](const auto& t) {
            using T = std::decay_t<decltype(t)>;
            if constexpr (std::is_same_v<T, PickPlaceTask>)
                return oracle_pick_place(scene, t);
            else
                return oracle_reach(scene, t);
        },
        task);
}

bool task_success(const Task& task, const SimState& final_state, const SimConfig& cfg) {
    if (const auto* pp = std::get_if<PickPlaceTask>(&task)) {
        const SceneObject* obj = final_state.scene.find_object(pp->object_id);
        const Bin* bin = final_state.scene.find_bin(pp->bin_id);
        if (!obj || !bin) return false;
        if (final_state.attached_object && *final_state.attached_object == pp->object_id)
            return false;  // still in the gripper
        const bool resting = std::abs(obj->position.z - obj->half_height()) < 1e-6;
        return resting && bin->contains_xy(obj->position);
    }
    const auto& reach = std::get<ReachTask>(task);
    return distance(ee_position(final_state, cfg), reach.points.back()) <= 0.01;
}

ExpertEpisode generate_expert_episode(const Task& task, const Scene& scene,
                                      const SimConfig& cfg, const GraspConfig& grasp_cfg) {
    const auto waypoints = oracle_predict(scene, task);
    const SimState start = make_initial_state(scene, cfg);
    ExecutionResult exec = execute_waypoints(start, waypoints, cfg, grasp_cfg);
    ExpertEpisode ep;
    ep.success = task_success(task, exec.final_state, cfg);
    ep.log = std::move(exec.log);
    ep.final_state = std::move(exec.final_state);
    return ep;
}

}  // namespace awi
