#pragma once

#include <vector>

#include "awi/types.hpp"

namespace awi {

// Indices of n frames subsampled uniformly in time from a length-T series;
// first and last frames always included.
std::vector<int> uniform_frame_indices(int length, int count);

// Build the 10-frame clip for one executed trajectory: each frame is the
// (static) scene descriptor of the demo instance concatenated with the
// demonstrator's 3+k state at that instant.
DemonstrationClip make_demonstration_clip(const SceneDescriptor& demo_scene,
                                          const AttributedTrajectory& trajectory,
                                          SampleOrigin origin);

}  // namespace awi
