#include "awi/dataset.hpp"

#include <cmath>

#include "awi/errors.hpp"

namespace awi {

std::vector<int> uniform_frame_indices(int length, int count) {
    if (length < 1 || count < 1) throw InvalidInput("uniform_frame_indices: bad sizes");
    std::vector<int> idx(static_cast<std::size_t>(count));
    if (count == 1) return idx;  // {0}
    for (int f = 0; f < count; ++f)
        idx[static_cast<std::size_t>(f)] = static_cast<int>(
            std::lround(static_cast<double>(f) * (length - 1) / (count - 1)));
    return idx;
}

DemonstrationClip make_demonstration_clip(const SceneDescriptor& demo_scene,
                                          const AttributedTrajectory& trajectory,
                                          SampleOrigin origin) {
    trajectory.validate();
    DemonstrationClip clip;
    clip.origin = origin;
    clip.source_trajectory = trajectory;
    const auto idx = uniform_frame_indices(trajectory.length(), DemonstrationClip::kFrames);
    for (int i : idx) {
        const auto& p = trajectory.points[static_cast<std::size_t>(i)];
        std::vector<double> frame;
        frame.reserve(demo_scene.vector.size() + static_cast<std::size_t>(p.dim()));
        frame.insert(frame.end(), demo_scene.vector.begin(), demo_scene.vector.end());
        frame.push_back(p.position.x);
        frame.push_back(p.position.y);
        frame.push_back(p.position.z);
        frame.insert(frame.end(), p.attributes.begin(), p.attributes.end());
        clip.frames.push_back(std::move(frame));
    }
    return clip;
}

}  // namespace awi
