#include "awi/augment.hpp"

#include <cmath>

#include "awi/dataset.hpp"
#include "awi/descriptor.hpp"
#include "awi/errors.hpp"
#include "awi/mining.hpp"
#include "awi/primitives.hpp"

namespace awi {

void AdmConfig::validate() const {
    if (!(alpha_min > 0.0 && alpha_min <= alpha_max && alpha_max <= 1.0))
        throw InvalidInput("adm: need 0 < alpha_min <= alpha_max <= 1");
    if (apply_probability < 0.0 || apply_probability > 1.0)
        throw InvalidInput("adm: apply_probability must be in [0,1]");
}

Sample adm_mix(const Sample& sample, const Sample& other, double alpha) {
    if (sample.demo.frame_dim() != other.demo.frame_dim())
        throw InvalidInput("adm_mix: demo frame dimensions differ");
    if (sample.instance_descriptor.dim() != other.instance_descriptor.dim())
        throw InvalidInput("adm_mix: instance descriptor dimensions differ");

    Sample out = sample;  // target, origin, task id all preserved
    const auto& frozen = other.demo.frames.front();
    for (auto& frame : out.demo.frames)
        for (std::size_t i = 0; i < frame.size(); ++i)
            frame[i] = alpha * frame[i] + (1.0 - alpha) * frozen[i];
    for (std::size_t i = 0; i < out.instance_descriptor.vector.size(); ++i)
        out.instance_descriptor.vector[i] =
            alpha * out.instance_descriptor.vector[i] +
            (1.0 - alpha) * other.instance_descriptor.vector[i];
    return out;
}

std::vector<Sample> adm_augment_batch(const std::vector<Sample>& samples,
                                      const AdmConfig& cfg, bool parallel) {
    cfg.validate();
    if (samples.size() < 2 && cfg.apply_probability > 0.0)
        throw InvalidInput("adm: need at least 2 samples to mix");

    std::vector<Sample> out(samples.size());
    const int n = static_cast<int>(samples.size());
    const auto process = [&](int i) {
        Rng rng(cfg.rng_seed, static_cast<std::uint64_t>(i));
        const auto& s = samples[static_cast<std::size_t>(i)];
        if (!rng.bernoulli(cfg.apply_probability)) {
            out[static_cast<std::size_t>(i)] = s;
            return;
        }
        std::uint64_t j = rng.uniform_index(static_cast<std::uint64_t>(n - 1));
        if (j >= static_cast<std::uint64_t>(i)) ++j;  // uniform over others
        const double alpha = rng.uniform(cfg.alpha_min, cfg.alpha_max);
        out[static_cast<std::size_t>(i)] = adm_mix(s, samples[j], alpha);
    };
    if (parallel) {
#pragma omp parallel for schedule(static)
        for (int i = 0; i < n; ++i) process(i);
    } else {
        for (int i = 0; i < n; ++i) process(i);
    }
    return out;
}

namespace {

Sample synthesize_one(const SynthesisConfig& cfg, const SimConfig& sim_cfg, Rng& rng) {
    const Scene scene = sample_scene(rng, cfg.scene);
    const Box3& ws = scene.workspace;

    const int n_points =
        cfg.points_min + static_cast<int>(rng.uniform_index(
                             static_cast<std::uint64_t>(cfg.points_max - cfg.points_min + 1)));
    std::vector<Vec3> points;
    for (int p = 0; p < n_points; ++p) {
        bool placed = false;
        for (int attempt = 0; attempt < cfg.max_point_retries; ++attempt) {
            const Vec3 cand{rng.uniform(ws.min.x, ws.max.x), rng.uniform(ws.min.y, ws.max.y),
                            rng.uniform(ws.min.z, ws.max.z)};
            if (reachable(sim_cfg.arm, cand - scene.arm_base, cfg.reach_margin)) {
                points.push_back(cand);
                placed = true;
                break;
            }
        }
        if (!placed)
            throw ConvergenceError("synthesize: could not sample a reachable point");
    }

    Episode ep(make_initial_state(scene, sim_cfg), sim_cfg);
    for (const auto& p : points) {
        const int budget =
            static_cast<int>((p - ep.ee()).norm() / sim_cfg.arm.max_ee_step * 2.0) + 50;
        move_straight(ep, p, 0.0, 0.005, budget);
    }
    ep.seal();

    // Free-space motion: the attribute channel is identically zero.
    AttributedTrajectory traj = log_to_attributed_trajectory(
        ep.log, {std::vector<bool>(static_cast<std::size_t>(ep.log.length()), false)});

    const SceneDescriptor desc = scene_to_descriptor(scene);
    Sample s;
    s.demo = make_demonstration_clip(desc, traj, SampleOrigin::Synthesized);
    s.instance_descriptor = desc;
    s.target = std::move(traj);
    s.origin = SampleOrigin::Synthesized;
    s.task_id = -1;
    return s;
}

}  // namespace

std::vector<Sample> synthesize_trajectories(int count, const SynthesisConfig& cfg,
                                            const SimConfig& sim_cfg, std::uint64_t seed,
                                            bool parallel) {
    std::vector<Sample> out(static_cast<std::size_t>(count));
    const auto make = [&](int i) {
        Rng rng(seed, static_cast<std::uint64_t>(i));
        out[static_cast<std::size_t>(i)] = synthesize_one(cfg, sim_cfg, rng);
    };
    if (parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int i = 0; i < count; ++i) make(i);
    } else {
        for (int i = 0; i < count; ++i) make(i);
    }
    return out;
}

}  // namespace awi
