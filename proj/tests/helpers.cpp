#include "helpers.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace awi::testutil {

namespace {

void enumerate_paths(const Matrix& cost, int i, int j, double acc,
                     std::vector<double>& path_costs) {
    acc += cost(i, j);
    if (i == cost.rows - 1 && j == cost.cols - 1) {
        path_costs.push_back(acc);
        return;
    }
    if (i + 1 < cost.rows) enumerate_paths(cost, i + 1, j, acc, path_costs);
    if (j + 1 < cost.cols) enumerate_paths(cost, i, j + 1, acc, path_costs);
    if (i + 1 < cost.rows && j + 1 < cost.cols)
        enumerate_paths(cost, i + 1, j + 1, acc, path_costs);
}

Matrix cost_matrix(const AttributedTrajectory& pred, const AttributedTrajectory& target,
                   const SdtwConfig& cfg) {
    Matrix cost(pred.length(), target.length());
    for (int i = 0; i < pred.length(); ++i)
        for (int j = 0; j < target.length(); ++j)
            cost(i, j) = sdtw_cell_cost(pred.points[static_cast<std::size_t>(i)],
                                        target.points[static_cast<std::size_t>(j)], cfg);
    return cost;
}

}  // namespace

double sdtw_path_enumeration(const AttributedTrajectory& pred,
                             const AttributedTrajectory& target, const SdtwConfig& cfg) {
    const Matrix cost = cost_matrix(pred, target, cfg);
    std::vector<double> path_costs;
    enumerate_paths(cost, 0, 0, 0.0, path_costs);
    const double lo = *std::min_element(path_costs.begin(), path_costs.end());
    double sum = 0.0;
    for (double c : path_costs) sum += std::exp(-(c - lo) / cfg.gamma);
    return lo - cfg.gamma * std::log(sum);
}

double hard_dtw(const AttributedTrajectory& pred, const AttributedTrajectory& target,
                const SdtwConfig& cfg) {
    const Matrix cost = cost_matrix(pred, target, cfg);
    const int n = cost.rows, m = cost.cols;
    Matrix dp(n + 1, m + 1);
    const double inf = 1e300;
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= m; ++j) dp(i, j) = inf;
    dp(0, 0) = 0.0;
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= m; ++j)
            dp(i, j) = cost(i - 1, j - 1) +
                       std::min({dp(i - 1, j), dp(i, j - 1), dp(i - 1, j - 1)});
    return dp(n, m);
}

}  // namespace awi::testutil
