#pragma once

#include <vector>

#include "awi/rng.hpp"
#include "awi/sdtw.hpp"
#include "awi/types.hpp"

namespace awi::testutil {

inline AttributedWaypoint wp(double x, double y, double z, double a) {
    return {{x, y, z}, {a}};
}

inline AttributedTrajectory random_trajectory(Rng& rng, int length, int k = 1) {
    AttributedTrajectory t;
    for (int i = 0; i < length; ++i) {
        AttributedWaypoint p;
        p.position = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        for (int c = 0; c < k; ++c) p.attributes.push_back(rng.uniform01());
        t.points.push_back(std::move(p));
    }
    return t;
}

inline std::vector<AttributedWaypoint> random_waypoints(Rng& rng, int n, int k = 1) {
    return random_trajectory(rng, n, k).points;
}

// Brute-force soft-DTW: -gamma * logsumexp over every monotone alignment
// path, computed independently of the DP implementation.
double sdtw_path_enumeration(const AttributedTrajectory& pred,
                             const AttributedTrajectory& target, const SdtwConfig& cfg);

// Classic hard-min DTW, an independent DP.
double hard_dtw(const AttributedTrajectory& pred, const AttributedTrajectory& target,
                const SdtwConfig& cfg);

}  // namespace awi::testutil
