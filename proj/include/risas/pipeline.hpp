#pragma once

#include <string>
#include <vector>

#include "risas/descriptor.hpp"
#include "risas/detector.hpp"
#include "risas/io.hpp"
#include "risas/matching.hpp"
#include "risas/surface.hpp"

namespace risas {

/// Every tunable constant of the pipeline in one place.
struct PipelineConfig {
    DetectorParams detector;
    DescriptorParams descriptor;
    EvalConfig eval;
    int normal_window = 11;
    double normal_max_distance = 0.1;
    int n_s = 4;

    NormalParams normal_params() const;
    void validate() const;
    bool operator==(const PipelineConfig&) const = default;
};

io::Json to_json(const PipelineConfig& config);

/// Keys missing from `j` keep their value from `base`.
PipelineConfig config_from_json(const io::Json& j, const PipelineConfig& base = {});

/// Detector and descriptor output for one frame, with the intermediates.
struct FrameFeatures {
    NormalImage normals;
    AngleLabels labels;
    MainNormal main;
    DotProductImage dp;
    std::vector<Keypoint> keypoints;
    DescribeResult described;
    /// Non-fatal problems, e.g. a frame without any valid normal.
    std::vector<std::string> warnings;

    std::vector<std::vector<double>> descriptor_vectors() const;
    std::vector<Point3> descriptor_points() const;
};

/// Normals, main normal and dot-product image only.
FrameFeatures compute_surface(const RgbdFrame& frame, const PipelineConfig& config);

FrameFeatures detect_features(const RgbdFrame& frame, const PipelineConfig& config);

FrameFeatures extract_features(const RgbdFrame& frame, const PipelineConfig& config);

struct PipelineReport {
    std::size_t keypoints_a = 0;
    std::size_t keypoints_b = 0;
    std::size_t described_a = 0;
    std::size_t described_b = 0;
    std::size_t rejected_isotropic_a = 0;
    std::size_t rejected_isotropic_b = 0;
    std::size_t rejected_other_a = 0;
    std::size_t rejected_other_b = 0;
    std::size_t matched = 0;
    std::size_t correct = 0;
    double inlier_percentage = 0.0;
    std::vector<Match> matches;
    PrCurve pr;
    std::vector<std::string> errors;
    /// False when a frame could not be processed and matching was skipped.
    bool complete = true;
};

/// Detect, describe, match at eval.match_ratio, label under the pose that
/// maps frame-b points into frame a, and sweep the PR curve.
PipelineReport run_pipeline(const PipelineConfig& config, const RgbdFrame& frame_a,
                            const RgbdFrame& frame_b, const Pose& b_to_a);

io::Json to_json(const PipelineReport& report);

}  // namespace risas
