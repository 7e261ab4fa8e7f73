#include "risas/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace risas {

void EvalConfig::validate() const {
    if (!(d_min > 0.0))
        throw Error(ErrorCode::InvalidArgument, "d_min must be positive");
    if (!(match_ratio > 0.0 && match_ratio <= 1.0))
        throw Error(ErrorCode::InvalidArgument, "match_ratio must lie in (0, 1]");
    double prev = 0.0;
    for (double r : ratio_sweep) {
        if (!(r > prev && r <= 1.0))
            throw Error(ErrorCode::InvalidArgument,
                        "ratio_sweep must be strictly increasing in (0, 1]");
        prev = r;
    }
}

double descriptor_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw Error(ErrorCode::DimensionMismatch, "descriptor dimensions differ");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return std::sqrt(sum);
}

std::vector<Match> nndr_match(std::span<const std::vector<double>> desc_a,
                              std::span<const std::vector<double>> desc_b,
                              double ratio_max) {
    std::vector<Match> out;
    if (desc_a.empty() || desc_b.empty())
        return out;
    const std::size_t dim = desc_a.front().size();
    for (const auto& d : desc_a)
        if (d.size() != dim)
            throw Error(ErrorCode::DimensionMismatch, "descriptor dimensions differ");
    for (const auto& d : desc_b)
        if (d.size() != dim)
            throw Error(ErrorCode::DimensionMismatch, "descriptor dimensions differ");

    for (std::size_t i = 0; i < desc_a.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        double second = std::numeric_limits<double>::infinity();
        std::size_t best_j = 0;
        for (std::size_t j = 0; j < desc_b.size(); ++j) {
            const double d = descriptor_distance(desc_a[i], desc_b[j]);
            if (d < best) {
                second = best;
                best = d;
                best_j = j;
            } else if (d < second) {
                second = d;
            }
        }
        double ratio = 0.0;
        if (desc_b.size() > 1)
            ratio = second > 0.0 ? best / second : 1.0;
        if (ratio <= ratio_max)
            out.push_back({i, best_j, best, ratio, std::nullopt});
    }
    return out;
}

bool is_correct(const Point3& p_a, const Point3& p_b, const Pose& b_to_a, double d_min) {
    return (p_a - transform(p_b, b_to_a)).norm() <= d_min;
}

void label_correct(std::span<Match> matches, std::span<const Point3> points_a,
                   std::span<const Point3> points_b, const Pose& b_to_a, double d_min) {
    for (Match& m : matches) {
        if (m.index_a >= points_a.size() || m.index_b >= points_b.size())
            throw Error(ErrorCode::OutOfBounds, "match index outside keypoint list");
        m.correct = is_correct(points_a[m.index_a], points_b[m.index_b], b_to_a, d_min);
    }
}

std::size_t count_correspondences(std::span<const Point3> points_a,
                                  std::span<const Point3> points_b, const Pose& b_to_a,
                                  double d_min) {
    std::vector<Point3> mapped;
    mapped.reserve(points_b.size());
    for (const Point3& p : points_b)
        mapped.push_back(transform(p, b_to_a));
    std::size_t count = 0;
    for (const Point3& p : points_a) {
        if (std::any_of(mapped.begin(), mapped.end(),
                        [&](const Point3& q) { return (p - q).norm() <= d_min; }))
            ++count;
    }
    return count;
}

double inlier_percentage(std::span<const Match> matches) {
    if (matches.empty())
        return 0.0;
    const auto correct = std::count_if(matches.begin(), matches.end(), [](const Match& m) {
        return m.correct.value_or(false);
    });
    return static_cast<double>(correct) / static_cast<double>(matches.size());
}

PrCurve pr_curve(std::span<const std::vector<double>> desc_a,
                 std::span<const std::vector<double>> desc_b,
                 std::span<const Point3> points_a, std::span<const Point3> points_b,
                 const Pose& b_to_a, const EvalConfig& config) {
    config.validate();
    PrCurve curve;
    curve.correspondences = count_correspondences(points_a, points_b, b_to_a, config.d_min);

    // Every threshold's match set is the ratio <= r subset of the full set.
    std::vector<Match> all = nndr_match(desc_a, desc_b, 1.0);
    label_correct(all, points_a, points_b, b_to_a, config.d_min);

    for (double r : config.ratio_sweep) {
        PrPoint pt;
        pt.ratio = r;
        for (const Match& m : all) {
            if (m.ratio > r)
                continue;
            ++pt.returned;
            if (*m.correct)
                ++pt.correct;
        }
        if (pt.returned == 0) {
            pt.degenerate = true;
            pt.precision = 1.0;
        } else {
            pt.precision = static_cast<double>(pt.correct) / static_cast<double>(pt.returned);
        }
        pt.recall = curve.correspondences == 0
                        ? 0.0
                        : static_cast<double>(pt.correct) /
                              static_cast<double>(curve.correspondences);
        curve.points.push_back(pt);
    }
    return curve;
}

}  // namespace risas
