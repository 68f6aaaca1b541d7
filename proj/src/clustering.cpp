#include "flsim/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace flsim {

namespace {

std::vector<int> region_query(const std::vector<FeaturePoint>& points, int center,
                              double epsilon) {
    std::vector<int> neighbors;
    for (int j = 0; j < static_cast<int>(points.size()); ++j)
        if ((points[j] - points[center]).norm() <= epsilon) neighbors.push_back(j);
    return neighbors;
}

}  // namespace

ClusterLabels dbscan(const std::vector<FeaturePoint>& points, double epsilon,
                     int min_pts) {
    if (points.empty()) throw EmptyInput();
    if (epsilon <= 0.0) throw InvalidEpsilon();
    if (min_pts < 1) throw Error("min_pts must be >= 1");

    const int n = static_cast<int>(points.size());
    ClusterLabels labels(n, -1);
    std::vector<bool> visited(n, false);
    int next_cluster = 0;

    for (int i = 0; i < n; ++i) {
        if (visited[i]) continue;
        visited[i] = true;
        std::vector<int> seeds = region_query(points, i, epsilon);
        if (static_cast<int>(seeds.size()) < min_pts) continue;  // noise or future border

        const int cluster = next_cluster++;
        labels[i] = cluster;
        for (std::size_t s = 0; s < seeds.size(); ++s) {
            const int j = seeds[s];
            if (!visited[j]) {
                visited[j] = true;
                std::vector<int> expansion = region_query(points, j, epsilon);
                if (static_cast<int>(expansion.size()) >= min_pts)
                    seeds.insert(seeds.end(), expansion.begin(), expansion.end());
            }
            if (labels[j] == -1) labels[j] = cluster;
        }
    }
    return labels;
}

double calinski_harabasz(const std::vector<FeaturePoint>& points,
                         const ClusterLabels& labels) {
    if (points.empty()) throw EmptyInput();
    if (points.size() != labels.size())
        throw Error("labels must match points one to one");

    // Noise becomes its own cluster before scoring.
    int max_label = -1;
    for (int l : labels) max_label = std::max(max_label, l);
    const int noise_label = max_label + 1;

    std::map<int, std::vector<int>> clusters;
    for (int i = 0; i < static_cast<int>(points.size()); ++i)
        clusters[labels[i] == -1 ? noise_label : labels[i]].push_back(i);

    const int k = static_cast<int>(clusters.size());
    const int n = static_cast<int>(points.size());
    if (k < 2) throw DegenerateClustering();

    FeaturePoint overall = FeaturePoint::Zero();
    for (const auto& p : points) overall += p;
    overall /= static_cast<double>(n);

    double within = 0.0;
    double between = 0.0;
    for (const auto& [label, members] : clusters) {
        FeaturePoint centroid = FeaturePoint::Zero();
        for (int i : members) centroid += points[i];
        centroid /= static_cast<double>(members.size());
        for (int i : members) within += (points[i] - centroid).squaredNorm();
        between += members.size() * (centroid - overall).squaredNorm();
    }

    if (within == 0.0) return std::numeric_limits<double>::infinity();
    return (between / (k - 1)) / (within / (n - k));
}

EpsilonChoice select_epsilon(const std::vector<FeaturePoint>& points,
                             const std::vector<double>& grid, int min_pts) {
    if (grid.empty()) throw EmptyGrid();
    std::vector<double> candidates = grid;
    std::sort(candidates.begin(), candidates.end());

    EpsilonChoice best{candidates.front(), true};
    double best_score = -std::numeric_limits<double>::infinity();
    for (double epsilon : candidates) {
        const ClusterLabels labels = dbscan(points, epsilon, min_pts);
        int max_label = -1;
        bool any_noise = false;
        for (int l : labels) {
            max_label = std::max(max_label, l);
            any_noise = any_noise || l == -1;
        }
        const int cluster_count = max_label + 1 + (any_noise ? 1 : 0);
        if (cluster_count < 2) continue;

        const double score = calinski_harabasz(points, labels);
        if (score > best_score) {
            best_score = score;
            best = {epsilon, false};
        }
    }
    return best;
}

std::vector<double> default_epsilon_grid(const std::vector<FeaturePoint>& points) {
    std::vector<double> distances;
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j)
            distances.push_back((points[i] - points[j]).norm());
    if (distances.empty()) return {1.0};
    std::sort(distances.begin(), distances.end());

    const auto percentile = [&](double p) {
        const auto idx = static_cast<std::size_t>(p * (distances.size() - 1));
        return distances[idx];
    };
    const double lo = std::max(percentile(0.05), 1e-9);
    const double hi = std::max(percentile(0.95), lo);
    if (hi <= lo) return {lo};

    std::vector<double> grid;
    constexpr int kGridSize = 20;
    for (int i = 0; i < kGridSize; ++i)
        grid.push_back(lo * std::pow(hi / lo, i / static_cast<double>(kGridSize - 1)));
    return grid;
}

std::vector<FeaturePoint> standardize(const std::vector<FeaturePoint>& points) {
    if (points.empty()) return {};
    FeaturePoint mean = FeaturePoint::Zero();
    for (const auto& p : points) mean += p;
    mean /= static_cast<double>(points.size());

    FeaturePoint variance = FeaturePoint::Zero();
    for (const auto& p : points) variance += (p - mean).cwiseProduct(p - mean);
    variance /= static_cast<double>(points.size());

    std::vector<FeaturePoint> scaled(points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
        for (int d = 0; d < 2; ++d) {
            const double sd = std::sqrt(variance(d));
            scaled[i](d) = sd > 0.0 ? (points[i](d) - mean(d)) / sd : points[i](d) - mean(d);
        }
    return scaled;
}

}  // namespace flsim
