#pragma once

#include <span>
#include <vector>

#include "awi/types.hpp"

namespace awi {

// Softmin temperature and cost shaping for soft dynamic time warping.
// Attribute channels enter the squared-Euclidean cost scaled by
// attribute_weight; positions are always unit weight.
struct SdtwConfig {
    double gamma = 0.001;
    double attribute_weight = 1.0;

    void validate() const;
};

struct Matrix {
    int rows = 0, cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

    double& operator()(int i, int j) { return data[static_cast<std::size_t>(i) * cols + j]; }
    double operator()(int i, int j) const {
        return data[static_cast<std::size_t>(i) * cols + j];
    }
};

// Forward value plus both gradients: the expected alignment matrix E
// (pred-length x target-length) and d(value)/d(pred points).
struct SdtwResult {
    double value = 0.0;
    Matrix alignment_gradient;  // E, rows = pred length, cols = target length
    Matrix input_gradient;      // rows = pred length, cols = 3+k
};

// -gamma * log sum_i exp(-v_i / gamma), max-shifted. Tends to min(values) as
// gamma -> 0. Values at or above the infinity sentinel stay out of the shift.
double softmin(std::span<const double> values, double gamma);

// Sentinel standing in for +inf in the DP boundary; large enough that
// exp((finite - sentinel)/gamma) underflows to zero for every gamma in use.
inline constexpr double kSdtwInfinity = 1e30;

// Squared-Euclidean cell cost with attribute channels scaled by cfg.
double sdtw_cell_cost(const AttributedWaypoint& a, const AttributedWaypoint& b,
                      const SdtwConfig& cfg);

// r[i,j] = cost(i,j) + softmin(r[i-1,j], r[i,j-1], r[i-1,j-1]), full-sequence
// alignment boundary (r[0,0] = 0, first row/column infinite).
double sdtw_forward(const AttributedTrajectory& pred, const AttributedTrajectory& target,
                    const SdtwConfig& cfg);

SdtwResult sdtw_backward(const AttributedTrajectory& pred,
                         const AttributedTrajectory& target, const SdtwConfig& cfg);

// Training loss over the five waypoint resolutions. `waypoints` holds exactly
// 15 entries laid out as heads of 1, 2, 3, 4 and 5 waypoints; the loss is the
// mean of the five SDTW values, each computed on the head's interpolated
// dense trajectory, and gradients chain back through the interpolation.
inline constexpr int kResolutionHeads = 5;
inline constexpr int kTotalWaypoints = 15;  // 1+2+3+4+5

int resolution_offset(int head);  // start index of head h in the 15-waypoint layout

struct MultiresolutionResult {
    double loss = 0.0;
    Matrix waypoint_gradient;            // 15 x (3+k)
    std::array<double, kResolutionHeads> head_losses{};
};

MultiresolutionResult multiresolution_loss(std::span<const AttributedWaypoint> waypoints,
                                           const AttributedTrajectory& target,
                                           const SdtwConfig& cfg, int samples_per_segment);

// Batch evaluation of the multi-resolution loss. Each item is independent;
// the parallel path distributes items across OpenMP threads and writes into
// per-item slots, so results are identical to the serial path bit for bit.
struct MultiresolutionItem {
    std::span<const AttributedWaypoint> waypoints;
    const AttributedTrajectory* target = nullptr;
};

std::vector<MultiresolutionResult> multiresolution_loss_batch(
    std::span<const MultiresolutionItem> items, const SdtwConfig& cfg,
    int samples_per_segment, bool parallel);

}  // namespace awi
