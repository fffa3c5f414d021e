#include "awi/interpolate.hpp"

#include "awi/errors.hpp"

namespace awi {

AttributedTrajectory interpolate_waypoints(std::span<const AttributedWaypoint> waypoints,
                                           int samples_per_segment) {
    if (waypoints.empty()) throw InvalidInput("interpolate: empty waypoint list");
    if (samples_per_segment < 1)
        throw InvalidInput("interpolate: samples_per_segment must be >= 1");
    const int k = waypoints.front().k();
    for (const auto& w : waypoints)
        if (w.k() != k) throw InvalidInput("interpolate: attribute counts differ");

    AttributedTrajectory out;
    const int n = static_cast<int>(waypoints.size());
    out.points.reserve(static_cast<std::size_t>((n - 1) * samples_per_segment + 1));
    for (int s = 0; s + 1 < n; ++s) {
        const auto& a = waypoints[static_cast<std::size_t>(s)];
        const auto& b = waypoints[static_cast<std::size_t>(s + 1)];
        for (int u = 0; u < samples_per_segment; ++u) {
            const double f = static_cast<double>(u) / samples_per_segment;
            AttributedWaypoint p;
            p.position = a.position * (1.0 - f) + b.position * f;
            p.attributes.resize(static_cast<std::size_t>(k));
            for (int c = 0; c < k; ++c)
                p.attributes[static_cast<std::size_t>(c)] =
                    (1.0 - f) * a.attributes[static_cast<std::size_t>(c)] +
                    f * b.attributes[static_cast<std::size_t>(c)];
            out.points.push_back(std::move(p));
        }
    }
    out.points.push_back(waypoints.back());
    return out;
}

std::vector<DensePointSupport> interpolation_supports(int waypoint_count,
                                                      int samples_per_segment) {
    if (waypoint_count < 1) throw InvalidInput("interpolation_supports: need n >= 1");
    if (samples_per_segment < 1)
        throw InvalidInput("interpolation_supports: samples_per_segment must be >= 1");
    std::vector<DensePointSupport> s;
    s.reserve(static_cast<std::size_t>((waypoint_count - 1) * samples_per_segment + 1));
    for (int seg = 0; seg + 1 < waypoint_count; ++seg)
        for (int u = 0; u < samples_per_segment; ++u)
            s.push_back({seg, static_cast<double>(u) / samples_per_segment});
    // Final dense point coincides with the last waypoint. For n == 1 this is
    // the only entry; left must stay a valid index.
    s.push_back({waypoint_count > 1 ? waypoint_count - 2 : 0,
                 waypoint_count > 1 ? 1.0 : 0.0});
    return s;
}

}  // namespace awi
