#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "awi/types.hpp"

namespace awi {

using json = nlohmann::json;

json to_json(const Vec3& v);
json to_json(const AttributedWaypoint& w);
json to_json(const AttributedTrajectory& t);
json to_json(const RobotLog& l);
json to_json(const Scene& s);
json to_json(const DemonstrationClip& c);
json to_json(const Sample& s);

Vec3 vec3_from_json(const json& j);
AttributedWaypoint waypoint_from_json(const json& j);
AttributedTrajectory trajectory_from_json(const json& j);
RobotLog robot_log_from_json(const json& j);
Scene scene_from_json(const json& j);
DemonstrationClip clip_from_json(const json& j);
Sample sample_from_json(const json& j);

// JSONL files: one JSON object per line. Loaders throw ParseError carrying
// the 1-based line number of the offending record.
void save_dataset(const std::vector<Sample>& samples, const std::filesystem::path& path);
std::vector<Sample> load_dataset(const std::filesystem::path& path);

void save_trajectories(const std::vector<AttributedTrajectory>& ts,
                       const std::filesystem::path& path);
std::vector<AttributedTrajectory> load_trajectories(const std::filesystem::path& path);

void save_robot_logs(const std::vector<RobotLog>& logs, const std::filesystem::path& path);
std::vector<RobotLog> load_robot_logs(const std::filesystem::path& path);

void save_scene(const Scene& scene, const std::filesystem::path& path);
Scene load_scene(const std::filesystem::path& path);

}  // namespace awi
