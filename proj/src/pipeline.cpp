#include "awi/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>

#include "awi/dataset.hpp"
#include "awi/descriptor.hpp"
#include "awi/errors.hpp"

namespace awi {

namespace {

void check_keys(const json& j, const std::string& section,
                const std::set<std::string>& allowed) {
    if (!j.is_object()) throw InvalidInput("config section '" + section + "' must be an object");
    for (const auto& [key, _] : j.items())
        if (!allowed.contains(key))
            throw InvalidInput("config: unknown key '" + key + "' in section '" + section + "'");
}

template <typename T>
void read(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

json PipelineConfig::canonical() const {
    return json{
        {"seed", seed},
        {"sim",
         {{"max_ee_step", sim.arm.max_ee_step},
          {"gap_max", sim.gripper.gap_max},
          {"gripper_slew", sim.gripper.slew_rate},
          {"grasp_radius", sim.gripper.grasp_radius},
          {"finger_length", sim.gripper.finger_length},
          {"camera_mount_height", sim.camera.mount_height},
          {"scene",
           {{"objects", scene.objects},
            {"bins", scene.bins},
            {"object_size_min", scene.object_size_min},
            {"object_size_max", scene.object_size_max},
            {"bin_width", scene.bin_width},
            {"wall_margin", scene.wall_margin},
            {"min_separation", scene.min_separation}}},
          {"grasp",
           {{"approach_height", grasp.approach_height},
            {"descend_offset", grasp.descend_offset},
            {"lift_height", grasp.lift_height},
            {"estimate_gate", grasp.estimate_gate}}}}},
        {"mining",
         {{"d", mining.d},
          {"delta", mining.delta},
          {"smooth_width", mining.smooth_width},
          {"smooth_threshold", mining.smooth_threshold},
          {"press_force_window", mining.press_force_window},
          {"press_motion_epsilon", mining.press_motion_epsilon},
          {"press_command_epsilon", mining.press_command_epsilon}}},
        {"augment",
         {{"adm_probability", adm.apply_probability},
          {"alpha_min", adm.alpha_min},
          {"alpha_max", adm.alpha_max},
          {"synth_count", synth_count},
          {"points_min", synthesis.points_min},
          {"points_max", synthesis.points_max}}},
        {"sdtw",
         {{"gamma", sdtw.gamma},
          {"attribute_weight", sdtw.attribute_weight},
          {"samples_per_segment", samples_per_segment}}},
        {"train",
         {{"learning_rate", train.learning_rate},
          {"batch_size", train.batch_size},
          {"iterations", train.iterations}}},
        {"eval",
         {{"episodes_per_task", eval.episodes_per_task},
          {"demo_retry_limit", eval.demo_retry_limit}}},
        {"dataset",
         {{"episodes_per_task", dataset.episodes_per_task},
          {"pairings_per_trajectory", dataset.pairings_per_trajectory},
          {"heldout_count", dataset.heldout_count},
          {"expert_retry_limit", dataset.expert_retry_limit}}}};
}

PipelineConfig config_from_json(const json& j) {
    PipelineConfig cfg;
    check_keys(j, "<root>",
               {"seed", "sim", "mining", "augment", "sdtw", "train", "eval", "dataset"});
    read(j, "seed", cfg.seed);
    if (j.contains("sim")) {
        const json& s = j.at("sim");
        check_keys(s, "sim",
                   {"max_ee_step", "gap_max", "gripper_slew", "grasp_radius",
                    "finger_length", "camera_mount_height", "scene", "grasp"});
        read(s, "max_ee_step", cfg.sim.arm.max_ee_step);
        read(s, "gap_max", cfg.sim.gripper.gap_max);
        read(s, "gripper_slew", cfg.sim.gripper.slew_rate);
        read(s, "grasp_radius", cfg.sim.gripper.grasp_radius);
        read(s, "finger_length", cfg.sim.gripper.finger_length);
        read(s, "camera_mount_height", cfg.sim.camera.mount_height);
        if (s.contains("scene")) {
            const json& sc = s.at("scene");
            check_keys(sc, "sim.scene",
                       {"objects", "bins", "object_size_min", "object_size_max",
                        "bin_width", "wall_margin", "min_separation"});
            read(sc, "objects", cfg.scene.objects);
            read(sc, "bins", cfg.scene.bins);
            read(sc, "object_size_min", cfg.scene.object_size_min);
            read(sc, "object_size_max", cfg.scene.object_size_max);
            read(sc, "bin_width", cfg.scene.bin_width);
            read(sc, "wall_margin", cfg.scene.wall_margin);
            read(sc, "min_separation", cfg.scene.min_separation);
        }
        if (s.contains("grasp")) {
            const json& g = s.at("grasp");
            check_keys(g, "sim.grasp",
                       {"approach_height", "descend_offset", "lift_height", "estimate_gate"});
            read(g, "approach_height", cfg.grasp.approach_height);
            read(g, "descend_offset", cfg.grasp.descend_offset);
            read(g, "lift_height", cfg.grasp.lift_height);
            read(g, "estimate_gate", cfg.grasp.estimate_gate);
        }
    }
    if (j.contains("mining")) {
        const json& m = j.at("mining");
        check_keys(m, "mining",
                   {"d", "delta", "smooth_width", "smooth_threshold", "press_force_window",
                    "press_motion_epsilon", "press_command_epsilon"});
        read(m, "d", cfg.mining.d);
        read(m, "delta", cfg.mining.delta);
        read(m, "smooth_width", cfg.mining.smooth_width);
        read(m, "smooth_threshold", cfg.mining.smooth_threshold);
        read(m, "press_force_window", cfg.mining.press_force_window);
        read(m, "press_motion_epsilon", cfg.mining.press_motion_epsilon);
        read(m, "press_command_epsilon", cfg.mining.press_command_epsilon);
        cfg.mining.validate();
    }
    if (j.contains("augment")) {
        const json& a = j.at("augment");
        check_keys(a, "augment",
                   {"adm_probability", "alpha_min", "alpha_max", "synth_count", "points_min",
                    "points_max"});
        read(a, "adm_probability", cfg.adm.apply_probability);
        read(a, "alpha_min", cfg.adm.alpha_min);
        read(a, "alpha_max", cfg.adm.alpha_max);
        read(a, "synth_count", cfg.synth_count);
        read(a, "points_min", cfg.synthesis.points_min);
        read(a, "points_max", cfg.synthesis.points_max);
        cfg.adm.validate();
    }
    if (j.contains("sdtw")) {
        const json& s = j.at("sdtw");
        check_keys(s, "sdtw", {"gamma", "attribute_weight", "samples_per_segment"});
        read(s, "gamma", cfg.sdtw.gamma);
        read(s, "attribute_weight", cfg.sdtw.attribute_weight);
        read(s, "samples_per_segment", cfg.samples_per_segment);
        cfg.sdtw.validate();
    }
    if (j.contains("train")) {
        const json& t = j.at("train");
        check_keys(t, "train", {"learning_rate", "batch_size", "iterations"});
        read(t, "learning_rate", cfg.train.learning_rate);
        read(t, "batch_size", cfg.train.batch_size);
        read(t, "iterations", cfg.train.iterations);
    }
    if (j.contains("eval")) {
        const json& e = j.at("eval");
        check_keys(e, "eval", {"episodes_per_task", "demo_retry_limit"});
        read(e, "episodes_per_task", cfg.eval.episodes_per_task);
        read(e, "demo_retry_limit", cfg.eval.demo_retry_limit);
    }
    if (j.contains("dataset")) {
        const json& d = j.at("dataset");
        check_keys(d, "dataset",
                   {"episodes_per_task", "pairings_per_trajectory", "heldout_count",
                    "expert_retry_limit"});
        read(d, "episodes_per_task", cfg.dataset.episodes_per_task);
        read(d, "pairings_per_trajectory", cfg.dataset.pairings_per_trajectory);
        read(d, "heldout_count", cfg.dataset.heldout_count);
        read(d, "expert_retry_limit", cfg.dataset.expert_retry_limit);
    }

    // Derived sections share the primitive settings.
    cfg.synthesis.scene = cfg.scene;
    cfg.train.sdtw = cfg.sdtw;
    cfg.train.samples_per_segment = cfg.samples_per_segment;
    cfg.train.seed = cfg.seed;
    cfg.adm.rng_seed = cfg.seed;
    cfg.eval.seed = cfg.seed;
    cfg.eval.scene = cfg.scene;
    cfg.eval.mining = cfg.mining;
    cfg.eval.grasp = cfg.grasp;
    return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ParseError(1, "malformed config JSON");
    return config_from_json(j);
}

std::string fnv1a_hex(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string config_hash(const PipelineConfig& cfg) { return fnv1a_hex(cfg.canonical().dump()); }

std::pair<std::vector<int>, std::vector<int>> split_tasks(std::uint64_t seed,
                                                          int heldout_count) {
    std::vector<int> ids(kFamilyTasks);
    std::iota(ids.begin(), ids.end(), 0);
    Rng rng(seed, 0xBEEF);
    for (int i = kFamilyTasks - 1; i > 0; --i) {
        const auto j = rng.uniform_index(static_cast<std::uint64_t>(i + 1));
        std::swap(ids[static_cast<std::size_t>(i)], ids[j]);
    }
    std::vector<int> heldout(ids.end() - heldout_count, ids.end());
    ids.resize(ids.size() - static_cast<std::size_t>(heldout_count));
    std::sort(ids.begin(), ids.end());
    std::sort(heldout.begin(), heldout.end());
    return {ids, heldout};
}

void save_manifest(const TaskManifest& m, const std::filesystem::path& path) {
    json tasks = json::array();
    for (int id : m.train_task_ids) {
        const PickPlaceTask t = family_task(id);
        tasks.push_back(json{{"id", id}, {"object", t.object_id}, {"bin", t.bin_id}});
    }
    json j{{"train_task_ids", m.train_task_ids},
           {"heldout_task_ids", m.heldout_task_ids},
           {"episodes_per_task", m.episodes_per_task},
           {"pairings_per_trajectory", m.pairings_per_trajectory},
           {"sample_count", m.sample_count},
           {"seed", m.seed},
           {"config_hash", m.config_hash},
           {"tasks", std::move(tasks)}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << j.dump(2) << '\n';
}

TaskManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ParseError(1, "malformed manifest JSON");
    TaskManifest m;
    m.train_task_ids = j.at("train_task_ids").get<std::vector<int>>();
    m.heldout_task_ids = j.at("heldout_task_ids").get<std::vector<int>>();
    m.episodes_per_task = j.at("episodes_per_task").get<int>();
    m.pairings_per_trajectory = j.at("pairings_per_trajectory").get<int>();
    m.sample_count = j.at("sample_count").get<int>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.config_hash = j.at("config_hash").get<std::string>();
    return m;
}

namespace {

struct TaskEpisode {
    Scene scene;
    RobotLog log;
    AttributedTrajectory trajectory;  // mined
    bool ok = false;
};

TaskEpisode make_task_episode(const PickPlaceTask& task, const PipelineConfig& cfg,
                              std::uint64_t stream) {
    Rng rng(cfg.seed, stream);
    TaskEpisode ep;
    for (int attempt = 0; attempt < cfg.dataset.expert_retry_limit; ++attempt) {
        ep.scene = sample_scene(rng, cfg.scene);
        ExpertEpisode expert = generate_expert_episode(task, ep.scene, cfg.sim, cfg.grasp);
        if (!expert.success) continue;
        const auto grasp_bits = mine_grasp_attribute(expert.log, cfg.mining);
        ep.trajectory = log_to_attributed_trajectory(expert.log, {grasp_bits});
        ep.log = std::move(expert.log);
        ep.ok = true;
        return ep;
    }
    return ep;
}

}  // namespace

json cmd_gen_dataset(const PipelineConfig& cfg, const std::filesystem::path& out_dir,
                     bool parallel) {
    std::filesystem::create_directories(out_dir);
    const auto [train_ids, heldout_ids] = split_tasks(cfg.seed, cfg.dataset.heldout_count);

    const int episodes = cfg.dataset.episodes_per_task;
    const int n_tasks = static_cast<int>(train_ids.size());
    std::vector<TaskEpisode> episodes_flat(
        static_cast<std::size_t>(n_tasks) * static_cast<std::size_t>(episodes));

    const auto gen_one = [&](int flat) {
        const int ti = flat / episodes;
        const int e = flat % episodes;
        const int task_id = train_ids[static_cast<std::size_t>(ti)];
        episodes_flat[static_cast<std::size_t>(flat)] = make_task_episode(
            family_task(task_id), cfg,
            0x100000ULL + static_cast<std::uint64_t>(task_id) * 65536 +
                static_cast<std::uint64_t>(e));
    };
    const int total = n_tasks * episodes;
    if (parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int i = 0; i < total; ++i) gen_one(i);
    } else {
        for (int i = 0; i < total; ++i) gen_one(i);
    }

    int failed_episodes = 0;
    for (const auto& ep : episodes_flat)
        if (!ep.ok) ++failed_episodes;
    if (failed_episodes > 0)
        throw ConvergenceError("gen-dataset: " + std::to_string(failed_episodes) +
                               " episodes failed past the retry limit");

    // Arbitrary same-task pairing: demo from episode A, trajectory and
    // instance from episode B.
    std::vector<Sample> samples;
    samples.reserve(static_cast<std::size_t>(total) *
                    static_cast<std::size_t>(cfg.dataset.pairings_per_trajectory));
    for (int ti = 0; ti < n_tasks; ++ti) {
        const int task_id = train_ids[static_cast<std::size_t>(ti)];
        for (int b = 0; b < episodes; ++b) {
            Rng pair_rng(cfg.seed, 0x200000ULL + static_cast<std::uint64_t>(task_id) * 65536 +
                                       static_cast<std::uint64_t>(b));
            const auto& target_ep =
                episodes_flat[static_cast<std::size_t>(ti) * episodes + b];
            const SceneDescriptor instance = scene_to_descriptor(target_ep.scene);
            for (int p = 0; p < cfg.dataset.pairings_per_trajectory; ++p) {
                const int a = static_cast<int>(
                    pair_rng.uniform_index(static_cast<std::uint64_t>(episodes)));
                const auto& demo_ep = episodes_flat[static_cast<std::size_t>(ti) * episodes + a];
                Sample s;
                s.demo = make_demonstration_clip(scene_to_descriptor(demo_ep.scene),
                                                 demo_ep.trajectory, SampleOrigin::Task);
                s.instance_descriptor = instance;
                s.target = target_ep.trajectory;
                s.origin = SampleOrigin::Task;
                s.task_id = task_id;
                samples.push_back(std::move(s));
            }
        }
    }

    save_dataset(samples, out_dir / "samples.jsonl");
    TaskManifest manifest;
    manifest.train_task_ids = train_ids;
    manifest.heldout_task_ids = heldout_ids;
    manifest.episodes_per_task = episodes;
    manifest.pairings_per_trajectory = cfg.dataset.pairings_per_trajectory;
    manifest.sample_count = static_cast<int>(samples.size());
    manifest.seed = cfg.seed;
    manifest.config_hash = config_hash(cfg);
    save_manifest(manifest, out_dir / "manifest.json");

    return json{{"train_tasks", train_ids},
                {"heldout_tasks", heldout_ids},
                {"episodes_per_task", episodes},
                {"samples", manifest.sample_count}};
}

json cmd_mine(const PipelineConfig& cfg, const std::filesystem::path& logs_in,
              const std::filesystem::path& trajectories_out) {
    const auto logs = load_robot_logs(logs_in);
    std::vector<AttributedTrajectory> trajectories;
    trajectories.reserve(logs.size());
    std::size_t grasp_frames = 0, total_frames = 0;
    for (const auto& log : logs) {
        const auto bits = mine_grasp_attribute(log, cfg.mining);
        for (bool b : bits) grasp_frames += b ? 1 : 0;
        total_frames += bits.size();
        trajectories.push_back(log_to_attributed_trajectory(log, {bits}));
    }
    save_trajectories(trajectories, trajectories_out);
    return json{{"logs", logs.size()},
                {"frames", total_frames},
                {"grasp_frames", grasp_frames}};
}

json cmd_augment(const PipelineConfig& cfg, const std::filesystem::path& samples_in,
                 const std::filesystem::path& samples_out, bool parallel) {
    auto samples = load_dataset(samples_in);
    const std::size_t before = samples.size();
    auto mixed = adm_augment_batch(samples, cfg.adm, parallel);
    int mixed_count = 0;
    for (std::size_t i = 0; i < samples.size(); ++i)
        if (!(mixed[i] == samples[i])) ++mixed_count;
    if (cfg.synth_count > 0) {
        auto synth =
            synthesize_trajectories(cfg.synth_count, cfg.synthesis, cfg.sim,
                                    mix_seed(cfg.seed, 0x5EED), parallel);
        mixed.insert(mixed.end(), std::make_move_iterator(synth.begin()),
                     std::make_move_iterator(synth.end()));
    }
    save_dataset(mixed, samples_out);
    return json{{"input_samples", before},
                {"adm_mixed", mixed_count},
                {"synthesized", cfg.synth_count},
                {"output_samples", mixed.size()}};
}

json cmd_train(const PipelineConfig& cfg, const std::filesystem::path& dataset_path,
               const std::filesystem::path& model_out,
               const std::optional<std::filesystem::path>& loss_csv, bool parallel) {
    const auto samples = load_dataset(dataset_path);
    if (samples.empty()) throw InvalidInput("train: dataset is empty");

    ModelArch arch;
    arch.frame_dim = samples.front().demo.frame_dim();
    arch.descriptor_dim = samples.front().instance_descriptor.dim();
    arch.k = samples.front().target.k();
    PredictorModel model = PredictorModel::initialize(arch, cfg.seed);

    TrainConfig tc = cfg.train;
    tc.parallel = parallel;
    const TrainResult res = train(model, samples, tc);
    save_model(model, model_out);

    if (loss_csv) {
        std::vector<std::vector<double>> rows;
        rows.reserve(res.loss_curve.size());
        for (std::size_t i = 0; i < res.loss_curve.size(); ++i)
            rows.push_back({static_cast<double>(i), res.loss_curve[i]});
        write_csv(*loss_csv, {"iteration", "loss"}, rows);
    }

    const std::size_t nc = res.loss_curve.size();
    return json{{"samples", samples.size()},
                {"iterations", nc},
                {"initial_loss", res.loss_curve.front()},
                {"final_loss", res.loss_curve.back()},
                {"loss_decreased", res.loss_decreased}};
}

json cmd_eval(const PipelineConfig& cfg,
              const std::optional<std::filesystem::path>& model_path,
              const std::vector<int>& task_ids, bool parallel) {
    std::optional<PredictorModel> model;
    if (model_path) model = load_model(*model_path);
    EvalConfig ec = cfg.eval;
    ec.parallel = parallel;
    const EvalResult res = evaluate(model ? &*model : nullptr, task_ids, ec, cfg.sim);
    json per_task = json::array();
    for (const auto& te : res.per_task)
        per_task.push_back(json{{"task_id", te.task_id},
                                {"episodes", te.episodes},
                                {"successes", te.successes},
                                {"success_rate", te.success_rate},
                                {"standard_error", te.standard_error}});
    return json{{"mode", model ? "model" : "oracle"},
                {"per_task", std::move(per_task)},
                {"mean_success", res.mean_success}};
}

json cmd_execute(const PipelineConfig& cfg, const std::filesystem::path& waypoints_path,
                 const std::filesystem::path& scene_path,
                 const std::filesystem::path& log_out) {
    const auto waypoints = load_waypoints(waypoints_path);
    const Scene scene = load_scene(scene_path);
    const SimState start = make_initial_state(scene, cfg.sim);
    const ExecutionResult exec = execute_waypoints(start, waypoints, cfg.sim, cfg.grasp);
    save_robot_logs({exec.log}, log_out);
    json segments = json::array();
    for (const auto& s : exec.segments)
        segments.push_back(json{{"segment", s.segment},
                                {"primitive", to_string(s.primitive)},
                                {"ok", s.ok},
                                {"note", s.note}});
    return json{{"waypoints", waypoints.size()},
                {"success", exec.all_ok()},
                {"steps", exec.log.length()},
                {"segments", std::move(segments)}};
}

void write_metrics_json(const std::filesystem::path& path, const std::string& command,
                        const std::string& cfg_hash, std::uint64_t seed,
                        double wall_time_s, const json& metrics) {
    json j{{"command", command},
           {"config_hash", cfg_hash},
           {"seed", seed},
           {"wall_time_s", wall_time_s},
           {"metrics", metrics}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << j.dump(2) << '\n';
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i)
        out << header[i] << (i + 1 < header.size() ? "," : "\n");
    out.precision(17);
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << row[i] << (i + 1 < row.size() ? "," : "\n");
    }
}

std::vector<AttributedWaypoint> load_waypoints(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ParseError(1, "malformed waypoints JSON");
    if (!j.is_array()) throw InvalidInput("waypoints file must be a JSON array");
    std::vector<AttributedWaypoint> out;
    for (const auto& w : j) out.push_back(waypoint_from_json(w));
    return out;
}

void save_waypoints(const std::vector<AttributedWaypoint>& waypoints,
                    const std::filesystem::path& path) {
    json j = json::array();
    for (const auto& w : waypoints) j.push_back(to_json(w));
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << j.dump(2) << '\n';
}

}  // namespace awi
