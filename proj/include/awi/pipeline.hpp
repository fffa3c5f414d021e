#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "awi/augment.hpp"
#include "awi/infer.hpp"
#include "awi/mining.hpp"
#include "awi/sdtw.hpp"
#include "awi/serialize.hpp"
#include "awi/sim.hpp"
#include "awi/task.hpp"

namespace awi {

struct DatasetConfig {
    int episodes_per_task = 100;
    int pairings_per_trajectory = 10;
    int heldout_count = 2;
    int expert_retry_limit = 25;
};

// Everything one run needs, loadable from a sectioned JSON document. Unknown
// keys are rejected; absent keys keep the module defaults.
struct PipelineConfig {
    std::uint64_t seed = 0;
    SimConfig sim;
    SceneSamplerConfig scene;
    GraspConfig grasp;
    MiningConfig mining;
    AdmConfig adm;
    SynthesisConfig synthesis;
    int synth_count = 0;
    SdtwConfig sdtw;
    int samples_per_segment = 10;
    TrainConfig train;
    EvalConfig eval;
    DatasetConfig dataset;

    // Resolved view of every field, sorted keys; hashing this ties metrics
    // files to the exact configuration.
    json canonical() const;
};

PipelineConfig config_from_json(const json& j);
PipelineConfig load_config(const std::filesystem::path& path);

std::string config_hash(const PipelineConfig& cfg);

// FNV-1a 64-bit over a string, hex-encoded.
std::string fnv1a_hex(const std::string& data);

struct TaskManifest {
    std::vector<int> train_task_ids;
    std::vector<int> heldout_task_ids;
    int episodes_per_task = 0;
    int pairings_per_trajectory = 0;
    int sample_count = 0;
    std::uint64_t seed = 0;
    std::string config_hash;
};

void save_manifest(const TaskManifest& m, const std::filesystem::path& path);
TaskManifest load_manifest(const std::filesystem::path& path);

// Split the 16-task family into train/held-out via a seeded shuffle.
std::pair<std::vector<int>, std::vector<int>> split_tasks(std::uint64_t seed,
                                                          int heldout_count);

// Expert episodes for every training task, attribute mining, and arbitrary
// same-task demo/trajectory pairing. Writes samples.jsonl + manifest.json
// under out_dir. Returns the metrics object.
json cmd_gen_dataset(const PipelineConfig& cfg, const std::filesystem::path& out_dir,
                     bool parallel);

json cmd_mine(const PipelineConfig& cfg, const std::filesystem::path& logs_in,
              const std::filesystem::path& trajectories_out);

json cmd_augment(const PipelineConfig& cfg, const std::filesystem::path& samples_in,
                 const std::filesystem::path& samples_out, bool parallel);

json cmd_train(const PipelineConfig& cfg, const std::filesystem::path& dataset_path,
               const std::filesystem::path& model_out,
               const std::optional<std::filesystem::path>& loss_csv, bool parallel);

json cmd_eval(const PipelineConfig& cfg,
              const std::optional<std::filesystem::path>& model_path,
              const std::vector<int>& task_ids, bool parallel);

json cmd_execute(const PipelineConfig& cfg, const std::filesystem::path& waypoints_path,
                 const std::filesystem::path& scene_path,
                 const std::filesystem::path& log_out);

// Wrap a command's metrics object with provenance and write JSON (+ CSV rows
// when given). wall_time_s is the only field expected to differ across
// identical re-runs.
void write_metrics_json(const std::filesystem::path& path, const std::string& command,
                        const std::string& cfg_hash, std::uint64_t seed,
                        double wall_time_s, const json& metrics);

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

std::vector<AttributedWaypoint> load_waypoints(const std::filesystem::path& path);
void save_waypoints(const std::vector<AttributedWaypoint>& waypoints,
                    const std::filesystem::path& path);

}  // namespace awi
