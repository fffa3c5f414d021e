// Serial vs OpenMP timings for the three data-parallel kernels: batch
// multi-resolution SDTW, depth rendering, and expert episode generation.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "awi/augment.hpp"
#include "awi/infer.hpp"
#include "awi/pipeline.hpp"
#include "awi/rng.hpp"
#include "awi/sdtw.hpp"
#include "awi/sim.hpp"
#include "awi/task.hpp"

using namespace awi;

namespace {

double time_of(const std::function<void()>& fn, int repeats) {
    double best = 1e100;
    for (int r = 0; r < repeats; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const double dt =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (dt < best) best = dt;
    }
    return best;
}

void report(const std::string& name, double serial_s, double parallel_s) {
    std::printf("%-28s serial %9.4f s   omp %9.4f s   speedup %5.2fx\n", name.c_str(),
                serial_s, parallel_s, serial_s / parallel_s);
}

AttributedTrajectory random_trajectory(Rng& rng, int length) {
    AttributedTrajectory t;
    for (int i = 0; i < length; ++i)
        t.points.push_back({{rng.uniform(0.1, 0.6), rng.uniform(-0.3, 0.3),
                             rng.uniform(0.0, 0.4)},
                            {rng.uniform01()}});
    return t;
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("threads: %d\n", omp_get_max_threads());
#endif

    // Batch SDTW: 256 items, 15 waypoints vs a 120-point target.
    {
        Rng rng(7);
        const int batch = 256;
        std::vector<std::vector<AttributedWaypoint>> preds;
        std::vector<AttributedTrajectory> targets;
        for (int i = 0; i < batch; ++i) {
            preds.push_back(random_trajectory(rng, kTotalWaypoints).points);
            targets.push_back(random_trajectory(rng, 120));
        }
        std::vector<MultiresolutionItem> items;
        for (int i = 0; i < batch; ++i)
            items.push_back({preds[static_cast<std::size_t>(i)],
                             &targets[static_cast<std::size_t>(i)]});
        const SdtwConfig cfg;
        const double ts = time_of(
            [&] { multiresolution_loss_batch(items, cfg, 10, false); }, 3);
        const double tp = time_of(
            [&] { multiresolution_loss_batch(items, cfg, 10, true); }, 3);
        report("sdtw multires batch(256)", ts, tp);
    }

    // Depth rendering: 512 renders of a sampled scene.
    {
        Rng rng(11);
        const SimConfig cfg;
        const Scene scene = sample_scene(rng);
        const SimState state = make_initial_state(scene, cfg);
        const int frames = 512;
        const double ts = time_of(
            [&] {
                for (int i = 0; i < frames; ++i) render_depth_serial(state, cfg);
            },
            3);
        const double tp = time_of(
            [&] {
                for (int i = 0; i < frames; ++i) render_depth(state, cfg);
            },
            3);
        report("depth render x512", ts, tp);
    }

    // Expert episodes through gen-dataset, 2 tasks x 8 episodes.
    {
        PipelineConfig cfg;
        cfg.seed = 3;
        cfg.dataset.episodes_per_task = 8;
        cfg.dataset.pairings_per_trajectory = 2;
        cfg.dataset.heldout_count = 14;  // keep only 2 training tasks
        const std::filesystem::path dir_s = "/tmp/awi_bench_serial";
        const std::filesystem::path dir_p = "/tmp/awi_bench_parallel";
        const double ts = time_of([&] { cmd_gen_dataset(cfg, dir_s, false); }, 1);
        const double tp = time_of([&] { cmd_gen_dataset(cfg, dir_p, true); }, 1);
        report("gen-dataset 2x8 episodes", ts, tp);
    }
    return 0;
}
