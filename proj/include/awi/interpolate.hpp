#pragma once

#include <span>
#include <vector>

#include "awi/types.hpp"

namespace awi {

// Densify a waypoint list into a polyline with (n-1)*samples_per_segment + 1
// points. Every channel, attributes included, is interpolated linearly.
// A single waypoint yields a single-point trajectory.
AttributedTrajectory interpolate_waypoints(std::span<const AttributedWaypoint> waypoints,
                                           int samples_per_segment);

// Sparse linear map from dense points back to waypoints: dense point i equals
// (1-frac)*waypoints[left] + frac*waypoints[left+1]. Used to chain loss
// gradients from dense trajectories onto the predicted waypoints.
struct DensePointSupport {
    int left;     // index of the bracketing waypoint on the left
    double frac;  // in [0,1]; frac == 0 means the point sits on `left`
};

std::vector<DensePointSupport> interpolation_supports(int waypoint_count,
                                                      int samples_per_segment);

}  // namespace awi
