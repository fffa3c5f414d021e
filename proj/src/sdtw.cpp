#include "awi/sdtw.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "awi/errors.hpp"
#include "awi/interpolate.hpp"

namespace awi {

void SdtwConfig::validate() const {
    if (!(gamma > 0.0)) throw InvalidInput("sdtw: gamma must be > 0");
    if (attribute_weight < 0.0) throw InvalidInput("sdtw: attribute_weight must be >= 0");
}

double softmin(std::span<const double> values, double gamma) {
    if (values.empty()) throw InvalidInput("softmin: empty value list");
    if (!(gamma > 0.0)) throw InvalidInput("softmin: gamma must be > 0");
    double lo = values[0];
    for (double v : values) lo = std::min(lo, v);
    if (lo >= kSdtwInfinity) return kSdtwInfinity;
    double sum = 0.0;
    for (double v : values) sum += std::exp(-(v - lo) / gamma);
    return lo - gamma * std::log(sum);
}

namespace {

// exp(x) for the DP transition weights: arguments are <= 0 and anything
// below -50 contributes < 2e-22, orders of magnitude under every tolerance
// in use, so skip the libm call.
inline double exp_weight(double x) {
    if (x < -50.0) return 0.0;
    if (x == 0.0) return 1.0;
    return std::exp(x);
}

inline double softmin3(double a, double b, double c, double gamma) {
    double lo = std::min(a, std::min(b, c));
    if (lo >= kSdtwInfinity) return kSdtwInfinity;
    const double sum = exp_weight(-(a - lo) / gamma) + exp_weight(-(b - lo) / gamma) +
                       exp_weight(-(c - lo) / gamma);
    return sum == 1.0 ? lo : lo - gamma * std::log(sum);
}

void check_pair(const AttributedTrajectory& pred, const AttributedTrajectory& target) {
    if (pred.points.empty() || target.points.empty())
        throw InvalidInput("sdtw: trajectories must be non-empty");
    if (pred.points.front().dim() != target.points.front().dim())
        throw InvalidInput("sdtw: dimensionality mismatch");
}

// R matrix of the forward recursion, (n+1) x (m+1), boundary included.
Matrix forward_dp(const AttributedTrajectory& pred, const AttributedTrajectory& target,
                  const SdtwConfig& cfg) {
    const int n = pred.length(), m = target.length();
    Matrix r(n + 1, m + 1);
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= m; ++j) r(i, j) = kSdtwInfinity;
    r(0, 0) = 0.0;
    for (int i = 1; i <= n; ++i) {
        for (int j = 1; j <= m; ++j) {
            const double d = sdtw_cell_cost(pred.points[static_cast<std::size_t>(i - 1)],
                                            target.points[static_cast<std::size_t>(j - 1)], cfg);
            r(i, j) = d + softmin3(r(i - 1, j), r(i, j - 1), r(i - 1, j - 1), cfg.gamma);
        }
    }
    return r;
}

}  // namespace

double sdtw_cell_cost(const AttributedWaypoint& a, const AttributedWaypoint& b,
                      const SdtwConfig& cfg) {
    double d = 0.0;
    for (int c = 0; c < 3; ++c) {
        const double diff = a.position[c] - b.position[c];
        d += diff * diff;
    }
    const int k = a.k();
    for (int c = 0; c < k; ++c) {
        const double diff = a.attributes[static_cast<std::size_t>(c)] -
                            b.attributes[static_cast<std::size_t>(c)];
        d += cfg.attribute_weight * diff * diff;
    }
    return d;
}

double sdtw_forward(const AttributedTrajectory& pred, const AttributedTrajectory& target,
                    const SdtwConfig& cfg) {
    cfg.validate();
    check_pair(pred, target);
    const Matrix r = forward_dp(pred, target, cfg);
    return r(pred.length(), target.length());
}

SdtwResult sdtw_backward(const AttributedTrajectory& pred,
                         const AttributedTrajectory& target, const SdtwConfig& cfg) {
    cfg.validate();
    check_pair(pred, target);
    const int n = pred.length(), m = target.length();
    const double gamma = cfg.gamma;

    Matrix r = forward_dp(pred, target, cfg);

    // Backward recursion over a padded grid. Row n+1 / column m+1 act as the
    // virtual terminal cell with zero cost; unreachable pads sit at -inf so
    // their transition weights underflow to exactly zero.
    const double neg_inf = -std::numeric_limits<double>::infinity();
    Matrix rp(n + 2, m + 2);
    Matrix dp(n + 2, m + 2);
    for (int i = 0; i <= n + 1; ++i)
        for (int j = 0; j <= m + 1; ++j) {
            rp(i, j) = neg_inf;
            dp(i, j) = 0.0;
        }
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= m; ++j) {
            rp(i, j) = r(i, j);
            dp(i, j) = sdtw_cell_cost(pred.points[static_cast<std::size_t>(i - 1)],
                                      target.points[static_cast<std::size_t>(j - 1)], cfg);
        }
    rp(n + 1, m + 1) = r(n, m);

    Matrix e(n + 2, m + 2);
    e(n + 1, m + 1) = 1.0;
    for (int j = m; j >= 1; --j) {
        for (int i = n; i >= 1; --i) {
            const double a = exp_weight((rp(i + 1, j) - rp(i, j) - dp(i + 1, j)) / gamma);
            const double b = exp_weight((rp(i, j + 1) - rp(i, j) - dp(i, j + 1)) / gamma);
            const double c =
                exp_weight((rp(i + 1, j + 1) - rp(i, j) - dp(i + 1, j + 1)) / gamma);
            e(i, j) = a * e(i + 1, j) + b * e(i, j + 1) + c * e(i + 1, j + 1);
        }
    }

    SdtwResult out;
    out.value = r(n, m);
    out.alignment_gradient = Matrix(n, m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) out.alignment_gradient(i, j) = e(i + 1, j + 1);

    const int dim = pred.points.front().dim();
    const int k = dim - 3;
    out.input_gradient = Matrix(n, dim);
    for (int i = 0; i < n; ++i) {
        const auto& x = pred.points[static_cast<std::size_t>(i)];
        for (int j = 0; j < m; ++j) {
            const double w = out.alignment_gradient(i, j);
            if (w == 0.0) continue;
            const auto& y = target.points[static_cast<std::size_t>(j)];
            for (int c = 0; c < 3; ++c)
                out.input_gradient(i, c) += w * 2.0 * (x.position[c] - y.position[c]);
            for (int c = 0; c < k; ++c)
                out.input_gradient(i, 3 + c) +=
                    w * 2.0 * cfg.attribute_weight *
                    (x.attributes[static_cast<std::size_t>(c)] -
                     y.attributes[static_cast<std::size_t>(c)]);
        }
    }
    return out;
}

int resolution_offset(int head) {
    // heads of size 1..5 packed consecutively
    static constexpr int offsets[kResolutionHeads] = {0, 1, 3, 6, 10};
    return offsets[head];
}

MultiresolutionResult multiresolution_loss(std::span<const AttributedWaypoint> waypoints,
                                           const AttributedTrajectory& target,
                                           const SdtwConfig& cfg, int samples_per_segment) {
    if (static_cast<int>(waypoints.size()) != kTotalWaypoints)
        throw InvalidInput("multiresolution_loss: expected exactly 15 waypoints");
    const int dim = waypoints.front().dim();

    MultiresolutionResult out;
    out.waypoint_gradient = Matrix(kTotalWaypoints, dim);

    for (int head = 0; head < kResolutionHeads; ++head) {
        const int count = head + 1;
        const int offset = resolution_offset(head);
        const auto head_span = waypoints.subspan(static_cast<std::size_t>(offset),
                                                 static_cast<std::size_t>(count));
        const AttributedTrajectory dense =
            interpolate_waypoints(head_span, samples_per_segment);
        const SdtwResult res = sdtw_backward(dense, target, cfg);
        out.head_losses[static_cast<std::size_t>(head)] = res.value;
        out.loss += res.value / kResolutionHeads;

        const auto supports = interpolation_supports(count, samples_per_segment);
        for (std::size_t t = 0; t < supports.size(); ++t) {
            const auto [left, frac] = supports[t];
            for (int c = 0; c < dim; ++c) {
                const double g =
                    res.input_gradient(static_cast<int>(t), c) / kResolutionHeads;
                out.waypoint_gradient(offset + left, c) += (1.0 - frac) * g;
                if (frac > 0.0)
                    out.waypoint_gradient(offset + left + 1, c) += frac * g;
            }
        }
    }
    return out;
}

std::vector<MultiresolutionResult> multiresolution_loss_batch(
    std::span<const MultiresolutionItem> items, const SdtwConfig& cfg,
    int samples_per_segment, bool parallel) {
    std::vector<MultiresolutionResult> results(items.size());
    const int count = static_cast<int>(items.size());
    if (parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int i = 0; i < count; ++i)
            results[static_cast<std::size_t>(i)] =
                multiresolution_loss(items[static_cast<std::size_t>(i)].waypoints,
                                     *items[static_cast<std::size_t>(i)].target, cfg,
                                     samples_per_segment);
    } else {
        for (int i = 0; i < count; ++i)
            results[static_cast<std::size_t>(i)] =
                multiresolution_loss(items[static_cast<std::size_t>(i)].waypoints,
                                     *items[static_cast<std::size_t>(i)].target, cfg,
                                     samples_per_segment);
    }
    return results;
}

}  // namespace awi
