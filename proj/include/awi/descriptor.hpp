#pragma once

#include "awi/types.hpp"

namespace awi {

// Deterministic fixed-length encoding of a scene. Object slot i (i = object
// id) holds [one-hot id | position]; bin slot j holds the bin center. Absent
// slots stay zero. Throws CapacityError when an id exceeds the layout.
SceneDescriptor scene_to_descriptor(const Scene& scene,
                                    const DescriptorLayout& layout = {});

}  // namespace awi
