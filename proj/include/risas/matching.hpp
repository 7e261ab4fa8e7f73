#pragma once

#include <optional>
#include <span>
#include <vector>

#include "risas/core.hpp"

namespace risas {

struct Match {
    std::size_t index_a = 0;
    std::size_t index_b = 0;
    double distance = 0.0;
    double ratio = 0.0;
    std::optional<bool> correct;

    bool operator==(const Match&) const = default;
};

struct EvalConfig {
    /// Correctness radius for the reprojection check, meters.
    double d_min = 0.05;
    /// NNDR threshold used for the single reported match set.
    double match_ratio = 0.8;
    /// Thresholds for the precision/recall sweep, strictly increasing in (0, 1].
    std::vector<double> ratio_sweep = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};

    void validate() const;
    bool operator==(const EvalConfig&) const = default;
};

double descriptor_distance(std::span<const double> a, std::span<const double> b);

/// One-directional NNDR matching a -> b. Ties resolve to the lower index.
std::vector<Match> nndr_match(std::span<const std::vector<double>> desc_a,
                              std::span<const std::vector<double>> desc_b,
                              double ratio_max);

bool is_correct(const Point3& p_a, const Point3& p_b, const Pose& b_to_a, double d_min);

/// Sets `correct` on every match. The pose maps frame-b points into frame a.
void label_correct(std::span<Match> matches, std::span<const Point3> points_a,
                   std::span<const Point3> points_b, const Pose& b_to_a, double d_min);

/// Points of `a` that have at least one geometric partner in `b`.
std::size_t count_correspondences(std::span<const Point3> points_a,
                                  std::span<const Point3> points_b, const Pose& b_to_a,
                                  double d_min);

double inlier_percentage(std::span<const Match> matches);

struct PrPoint {
    double ratio = 0.0;
    double precision = 1.0;
    double recall = 0.0;
    std::size_t returned = 0;
    std::size_t correct = 0;
    /// No matches were returned; precision is 1 by convention.
    bool degenerate = false;
};

struct PrCurve {
    std::vector<PrPoint> points;
    std::size_t correspondences = 0;
};

PrCurve pr_curve(std::span<const std::vector<double>> desc_a,
                 std::span<const std::vector<double>> desc_b,
                 std::span<const Point3> points_a, std::span<const Point3> points_b,
                 const Pose& b_to_a, const EvalConfig& config);

}  // namespace risas
