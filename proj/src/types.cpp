#include "awi/types.hpp"

#include <cmath>

#include "awi/errors.hpp"

namespace awi {

void AttributedWaypoint::validate() const {
    if (!position.finite()) throw InvalidInput("waypoint position must be finite");
    for (double a : attributes) {
        if (!std::isfinite(a) || a < 0.0 || a > 1.0)
            throw InvalidInput("waypoint attribute outside [0,1]");
    }
}

void AttributedTrajectory::validate() const {
    if (points.empty()) throw InvalidInput("trajectory must have at least one point");
    const int k0 = points.front().k();
    for (const auto& p : points) {
        p.validate();
        if (p.k() != k0) throw InvalidInput("trajectory attribute count not uniform");
    }
    if (timestamps) {
        if (timestamps->size() != points.size())
            throw InvalidInput("timestamps length differs from points length");
        for (std::size_t i = 1; i < timestamps->size(); ++i) {
            if (!((*timestamps)[i] > (*timestamps)[i - 1]))
                throw InvalidInput("timestamps must be strictly increasing");
        }
    }
}

void RobotLog::validate() const {
    if (states.size() != actions.size())
        throw InvalidInput("log states/actions lengths differ");
    if (states.size() < 2) throw InvalidInput("log shorter than 2 frames");
    for (const auto& s : states) {
        if (s.gripper_gap < 0.0) throw InvalidInput("gripper gap must be >= 0");
    }
}

void Scene::validate() const {
    std::vector<int> seen;
    for (const auto& o : objects) {
        if (!workspace.contains(o.position))
            throw InvalidInput("object outside workspace");
        for (int id : seen)
            if (id == o.id) throw InvalidInput("duplicate object id");
        seen.push_back(o.id);
    }
    seen.clear();
    for (const auto& b : bins) {
        for (int id : seen)
            if (id == b.id) throw InvalidInput("duplicate bin id");
        seen.push_back(b.id);
    }
}

const SceneObject* Scene::find_object(int id) const {
    for (const auto& o : objects)
        if (o.id == id) return &o;
    return nullptr;
}

const Bin* Scene::find_bin(int id) const {
    for (const auto& b : bins)
        if (b.id == id) return &b;
    return nullptr;
}

void DemonstrationClip::validate() const {
    if (static_cast<int>(frames.size()) != kFrames)
        throw InvalidInput("demonstration clip must have exactly 10 frames");
    const std::size_t d = frames.front().size();
    for (const auto& f : frames)
        if (f.size() != d) throw InvalidInput("clip frame dimensions not uniform");
    source_trajectory.validate();
}

void Sample::validate() const {
    demo.validate();
    target.validate();
    if (origin != demo.origin)
        throw InvalidInput("sample origin inconsistent with demo origin");
}

}  // namespace awi
