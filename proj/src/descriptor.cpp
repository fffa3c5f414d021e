#include "awi/descriptor.hpp"

#include "awi/errors.hpp"

namespace awi {

SceneDescriptor scene_to_descriptor(const Scene& scene, const DescriptorLayout& layout) {
    SceneDescriptor d;
    d.vector.assign(static_cast<std::size_t>(layout.dim()), 0.0);
    for (const auto& o : scene.objects) {
        if (o.id < 0 || o.id >= layout.max_objects)
            throw CapacityError("object id " + std::to_string(o.id) +
                                " exceeds descriptor capacity");
        const int base = layout.object_slot_offset(o.id);
        d.vector[static_cast<std::size_t>(base + o.id)] = 1.0;
        for (int c = 0; c < 3; ++c)
            d.vector[static_cast<std::size_t>(base + layout.max_objects + c)] =
                o.position[c];
    }
    for (const auto& b : scene.bins) {
        if (b.id < 0 || b.id >= layout.max_bins)
            throw CapacityError("bin id " + std::to_string(b.id) +
                                " exceeds descriptor capacity");
        const int base = layout.bin_slot_offset(b.id);
        for (int c = 0; c < 3; ++c)
            d.vector[static_cast<std::size_t>(base + c)] = b.center[c];
    }
    return d;
}

}  // namespace awi
