#pragma once

#include "flsim/types.hpp"

#include <Eigen/Dense>

#include <vector>

namespace flsim {

struct InvalidEpsilon : Error {
    InvalidEpsilon() : Error("epsilon must be positive") {}
};

struct EmptyInput : Error {
    EmptyInput() : Error("clustering needs at least one point") {}
};

struct DegenerateClustering : Error {
    DegenerateClustering() : Error("need at least two clusters to score") {}
};

struct EmptyGrid : Error {
    EmptyGrid() : Error("epsilon grid must be nonempty") {}
};

// Behavioral feature of one client: (training time EMA, missed-round EMA).
using FeaturePoint = Eigen::Vector2d;

// Per-point cluster label; -1 marks noise. Non-noise labels form the
// contiguous range 0..k-1.
using ClusterLabels = std::vector<int>;

// Density-based clustering with Euclidean distance and inclusive epsilon
// boundary. A core point has at least min_pts neighbors (itself included);
// border points join the first core cluster that reaches them. Deterministic
// given input order.
ClusterLabels dbscan(const std::vector<FeaturePoint>& points, double epsilon,
                     int min_pts);

// Ratio of between-cluster to within-cluster dispersion, each normalized by
// its degrees of freedom. Noise points are treated as one extra cluster.
// Returns +infinity when the within-cluster dispersion is zero.
double calinski_harabasz(const std::vector<FeaturePoint>& points,
                         const ClusterLabels& labels);

struct EpsilonChoice {
    double epsilon = 0.0;
    // Set when no grid candidate produced more than one cluster; epsilon is
    // then the smallest grid value.
    bool single_cluster_fallback = false;
};

// Grid search for the epsilon maximizing the Calinski-Harabasz score.
// Candidates that collapse everything into a single cluster are skipped;
// ties break toward the smaller epsilon.
EpsilonChoice select_epsilon(const std::vector<FeaturePoint>& points,
                             const std::vector<double>& grid, int min_pts = 2);

// 20 log-spaced candidates between the 5th and 95th percentile of pairwise
// distances.
std::vector<double> default_epsilon_grid(const std::vector<FeaturePoint>& points);

// Per-dimension z-score; a zero-variance dimension is centered only.
std::vector<FeaturePoint> standardize(const std::vector<FeaturePoint>& points);

}  // namespace flsim
