// Command-line front end: dataset generation, mining, augmentation,
// training, execution and evaluation wired into reproducible pipelines.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#ifdef _OPENMP
#include <omp.h>
#endif

#include "awi/errors.hpp"
#include "awi/pipeline.hpp"

namespace fs = std::filesystem;

namespace {

struct GlobalOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    int jobs = 0;  // 0 keeps the OpenMP default
    std::string out_dir = ".";
};

awi::PipelineConfig resolve_config(const GlobalOptions& g) {
    awi::PipelineConfig cfg;
    if (!g.config_path.empty()) cfg = awi::load_config(g.config_path);
    if (g.seed) {
        awi::json j = cfg.canonical();
        j["seed"] = *g.seed;
        cfg = awi::config_from_json(j);
    }
    return cfg;
}

int error_exit(const std::string& kind, const std::string& message, int code) {
    awi::json err{{"error", kind}, {"message", message}};
    std::cerr << err.dump() << std::endl;
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"attributed-waypoint imitation pipelines"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    GlobalOptions g;
    app.add_option("--config", g.config_path, "pipeline config JSON")
        ->envname("AWI_CONFIG");
    auto* seed_opt = app.add_option("--seed", g.seed, "override the config seed")
                         ->envname("AWI_SEED");
    app.add_option("--jobs", g.jobs, "worker threads (0 = library default)")
        ->envname("AWI_JOBS");
    app.add_option("--out", g.out_dir, "output directory")->envname("AWI_OUT");
    (void)seed_opt;

    std::string in_path, model_path, scene_path, waypoints_path, data_dir;
    std::vector<int> heldout_tasks;
    bool oracle = false;

    auto* gen = app.add_subcommand("gen-dataset", "expert episodes -> paired samples");

    auto* mine = app.add_subcommand("mine", "robot logs -> attributed trajectories");
    mine->add_option("--in", in_path, "RobotLog JSONL")->required();
    double mine_d = -1, mine_delta = 0, mine_smooth = -1;
    mine->add_option("--d", mine_d, "jaw-gap lookahead frames");
    mine->add_option("--delta", mine_delta, "jaw-gap change threshold (m)");
    mine->add_option("--smooth-width", mine_smooth, "box smoothing width");

    auto* augment = app.add_subcommand("augment", "mixup + trajectory synthesis");
    augment->add_option("--in", in_path, "samples JSONL")->required();
    double adm_prob = -1, alpha_min = -1, alpha_max = -1;
    int synth_count = -1;
    augment->add_option("--adm-prob", adm_prob, "mixup application probability");
    augment->add_option("--alpha-min", alpha_min, "blend ratio lower bound");
    augment->add_option("--alpha-max", alpha_max, "blend ratio upper bound");
    augment->add_option("--synth-count", synth_count, "synthesized samples to add");

    auto* train = app.add_subcommand("train", "fit the waypoint predictor");
    train->add_option("--data", in_path, "training samples JSONL")->required();
    double lr = -1;
    int batch_size = -1, iters = -1;
    double sdtw_gamma = -1;
    train->add_option("--lr", lr, "learning rate");
    train->add_option("--batch-size", batch_size, "minibatch size");
    train->add_option("--iters", iters, "training iterations");
    train->add_option("--sdtw-gamma", sdtw_gamma, "softmin temperature");

    auto* eval = app.add_subcommand("eval", "held-out task success rates");
    eval->add_option("--model", model_path, "model checkpoint JSON");
    eval->add_flag("--oracle", oracle, "evaluate the oracle predictor instead");
    eval->add_option("--data", data_dir, "dataset dir (held-out tasks from manifest)");
    eval->add_option("--heldout-tasks", heldout_tasks, "explicit task ids");
    int episodes = -1;
    eval->add_option("--episodes", episodes, "episodes per task");

    auto* execute = app.add_subcommand("execute", "run waypoints through the primitives");
    execute->add_option("--waypoints", waypoints_path, "waypoint JSON file")->required();
    execute->add_option("--scene", scene_path, "scene JSON file")->required();

    CLI11_PARSE(app, argc, argv);

#ifdef _OPENMP
    if (g.jobs > 0) omp_set_num_threads(g.jobs);
#endif
    const bool parallel = g.jobs != 1;

    try {
        awi::PipelineConfig cfg = resolve_config(g);

        // Per-subcommand flag overrides fold into the resolved config so the
        // config hash always reflects what actually ran.
        awi::json patch = cfg.canonical();
        if (mine->parsed()) {
            if (mine_d >= 0) patch["mining"]["d"] = static_cast<int>(mine_d);
            if (mine->count("--delta") > 0) patch["mining"]["delta"] = mine_delta;
            if (mine_smooth >= 0) patch["mining"]["smooth_width"] = static_cast<int>(mine_smooth);
        }
        if (augment->parsed()) {
            if (adm_prob >= 0) patch["augment"]["adm_probability"] = adm_prob;
            if (alpha_min >= 0) patch["augment"]["alpha_min"] = alpha_min;
            if (alpha_max >= 0) patch["augment"]["alpha_max"] = alpha_max;
            if (synth_count >= 0) patch["augment"]["synth_count"] = synth_count;
        }
        if (train->parsed()) {
            if (lr > 0) patch["train"]["learning_rate"] = lr;
            if (batch_size > 0) patch["train"]["batch_size"] = batch_size;
            if (iters > 0) patch["train"]["iterations"] = iters;
            if (sdtw_gamma > 0) patch["sdtw"]["gamma"] = sdtw_gamma;
        }
        if (eval->parsed() && episodes > 0) patch["eval"]["episodes_per_task"] = episodes;
        cfg = awi::config_from_json(patch);

        const fs::path out_dir = g.out_dir;
        fs::create_directories(out_dir);
        const std::string hash = awi::config_hash(cfg);
        const auto t0 = std::chrono::steady_clock::now();
        awi::json metrics;
        std::string command;

        if (gen->parsed()) {
            command = "gen-dataset";
            metrics = awi::cmd_gen_dataset(cfg, out_dir, parallel);
        } else if (mine->parsed()) {
            command = "mine";
            metrics = awi::cmd_mine(cfg, in_path, out_dir / "trajectories.jsonl");
        } else if (augment->parsed()) {
            command = "augment";
            metrics = awi::cmd_augment(cfg, in_path, out_dir / "samples.jsonl", parallel);
        } else if (train->parsed()) {
            command = "train";
            metrics = awi::cmd_train(cfg, in_path, out_dir / "model.json",
                                     out_dir / "loss_curve.csv", parallel);
        } else if (eval->parsed()) {
            command = "eval";
            std::vector<int> tasks = heldout_tasks;
            if (tasks.empty() && !data_dir.empty())
                tasks = awi::load_manifest(fs::path(data_dir) / "manifest.json")
                            .heldout_task_ids;
            if (tasks.empty())
                return error_exit("invalid-input",
                                  "eval needs --heldout-tasks or --data with a manifest", 2);
            if (!oracle && model_path.empty())
                return error_exit("invalid-input", "eval needs --model or --oracle", 2);
            metrics = awi::cmd_eval(
                cfg, oracle ? std::nullopt : std::make_optional<fs::path>(model_path),
                tasks, parallel);
            // CSV mirror of the per-task table.
            std::vector<std::vector<double>> rows;
            for (const auto& te : metrics.at("per_task"))
                rows.push_back({te.at("task_id").get<double>(),
                                te.at("success_rate").get<double>(),
                                te.at("standard_error").get<double>()});
            awi::write_csv(out_dir / "eval.csv", {"task_id", "success_rate", "standard_error"},
                           rows);
        } else if (execute->parsed()) {
            command = "execute";
            metrics = awi::cmd_execute(cfg, waypoints_path, scene_path,
                                       out_dir / "episode_log.jsonl");
        }

        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        awi::write_metrics_json(out_dir / (command + "_metrics.json"), command, hash,
                                cfg.seed, wall, metrics);
        std::cout << metrics.dump(2) << std::endl;
        return 0;
    } catch (const awi::InvalidInput& e) {
        return error_exit("invalid-input", e.what(), 2);
    } catch (const awi::ParseError& e) {
        return error_exit("parse-error", e.what(), 2);
    } catch (const std::filesystem::filesystem_error& e) {
        return error_exit("io-error", e.what(), 2);
    } catch (const std::exception& e) {
        const std::string what = e.what();
        // Missing files surface as runtime errors naming the path.
        const int code = what.find("cannot open") != std::string::npos ? 2 : 1;
        return error_exit("error", what, code);
    }
}
