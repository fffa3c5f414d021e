#pragma once

#include <cstdint>
#include <vector>

#include "awi/sim.hpp"
#include "awi/task.hpp"
#include "awi/types.hpp"

namespace awi {

// Asymmetric demonstration mixup: blend a sample's moving demo frames with
// the frozen first frame of another sample's demo, blend the instance
// descriptors, keep the target trajectory untouched.
struct AdmConfig {
    double alpha_min = 0.3;
    double alpha_max = 1.0;
    double apply_probability = 0.5;
    std::uint64_t rng_seed = 0;

    void validate() const;
};

Sample adm_mix(const Sample& sample, const Sample& other, double alpha);

// Each sample independently: with apply_probability, replaced by adm_mix
// against a uniformly chosen other sample at alpha ~ U[alpha_min, alpha_max];
// otherwise passed through. Per-sample RNG streams derive from
// (rng_seed, index), so the parallel path is bit-identical to the serial one.
std::vector<Sample> adm_augment_batch(const std::vector<Sample>& samples,
                                      const AdmConfig& cfg, bool parallel = false);

// Free-space training samples: 1..3 uniform workspace points visited by the
// arm; the resulting trajectory is paired with itself (demo, instance and
// target all from the same execution). Attributes are identically zero.
struct SynthesisConfig {
    int points_min = 1;
    int points_max = 3;
    double reach_margin = 0.005;  // clearance required of sampled points
    int max_point_retries = 200;
    SceneSamplerConfig scene;     // context the motion happens in
};

std::vector<Sample> synthesize_trajectories(int count, const SynthesisConfig& cfg,
                                            const SimConfig& sim_cfg, std::uint64_t seed,
                                            bool parallel = false);

}  // namespace awi
