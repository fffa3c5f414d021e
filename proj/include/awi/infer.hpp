#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "awi/mining.hpp"
#include "awi/sdtw.hpp"
#include "awi/task.hpp"
#include "awi/types.hpp"

namespace awi {

// Fully-connected trunk (two tanh layers) with two affine output heads, one
// for task-driven samples and one for synthesized trajectories. Inputs are
// the ten flattened demo frames followed by the instance descriptor.
struct ModelArch {
    int demo_frames = DemonstrationClip::kFrames;
    int frame_dim = 0;
    int descriptor_dim = 0;
    int k = 1;
    int hidden = 256;

    bool operator==(const ModelArch&) const = default;

    int input_dim() const { return demo_frames * frame_dim + descriptor_dim; }
    int waypoint_dim() const { return 3 + k; }
    int output_dim() const { return kTotalWaypoints * waypoint_dim(); }
};

struct WaypointPrediction {
    std::vector<AttributedWaypoint> task_head;   // 15 waypoints, raw outputs
    std::vector<AttributedWaypoint> synth_head;  // 15 waypoints, raw outputs

    // The finest (5-waypoint) group of the task head: what gets executed.
    std::vector<AttributedWaypoint> execution_waypoints() const;
};

class PredictorModel {
  public:
    ModelArch arch;
    std::vector<double> params;

    static PredictorModel initialize(const ModelArch& arch, std::uint64_t seed);

    WaypointPrediction predict(const DemonstrationClip& demo,
                               const SceneDescriptor& instance) const;

    // Forward for one flattened input; fills the activation cache reused by
    // backward(). Returns the raw output vector of the requested head.
    struct Cache {
        std::vector<double> input, a1, a2;
    };
    std::vector<double> forward(std::vector<double> input, SampleOrigin head,
                                Cache& cache) const;

    // Accumulate d(loss)/d(params) into grad given d(loss)/d(output) for the
    // head that produced the output; the other head's entries are untouched.
    void backward(const Cache& cache, SampleOrigin head,
                  const std::vector<double>& dout, std::vector<double>& grad) const;

    std::vector<double> flatten_input(const DemonstrationClip& demo,
                                      const SceneDescriptor& instance) const;

    // Parameter block offsets into params.
    std::size_t w1_off() const;
    std::size_t b1_off() const;
    std::size_t w2_off() const;
    std::size_t b2_off() const;
    std::size_t head_w_off(SampleOrigin head) const;
    std::size_t head_b_off(SampleOrigin head) const;
    std::size_t param_count() const;
};

void save_model(const PredictorModel& model, const std::filesystem::path& path);
PredictorModel load_model(const std::filesystem::path& path);

struct TrainConfig {
    double learning_rate = 5e-4;
    int batch_size = 30;
    int iterations = 50000;
    std::uint64_t seed = 0;
    SdtwConfig sdtw;
    int samples_per_segment = 10;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    bool parallel = true;

    void validate() const;
};

struct TrainResult {
    std::vector<double> loss_curve;  // mean batch loss per iteration
    bool loss_decreased = false;     // final 10% window mean < initial 10% window mean
};

// Minibatch Adam through the multi-resolution SDTW loss. Per-sample work can
// run on OpenMP threads; gradients accumulate into per-sample slots and
// reduce in batch order, so results do not depend on the thread count.
// Throws ConvergenceError if the loss turns non-finite.
TrainResult train(PredictorModel& model, const std::vector<Sample>& dataset,
                  const TrainConfig& cfg);

struct EvalConfig {
    int episodes_per_task = 20;
    std::uint64_t seed = 0;
    bool parallel = true;
    int demo_retry_limit = 25;
    SceneSamplerConfig scene;
    MiningConfig mining;
    GraspConfig grasp;
};

struct TaskEval {
    int task_id = 0;
    int episodes = 0;
    int successes = 0;
    double success_rate = 0.0;
    double standard_error = 0.0;
};

struct EvalResult {
    std::vector<TaskEval> per_task;
    double mean_success = 0.0;
};

// Held-out evaluation: per episode, a fresh demo instance solved by the
// scripted expert provides the clip; the model (or the oracle, when model is
// null) predicts waypoints for a second fresh instance, and the primitives
// execute them.
EvalResult evaluate(const PredictorModel* model, const std::vector<int>& task_ids,
                    const EvalConfig& cfg, const SimConfig& sim_cfg);

}  // namespace awi
