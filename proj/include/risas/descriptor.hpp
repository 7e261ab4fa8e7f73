#pragma once

#include <span>
#include <string>
#include <vector>

#include "risas/core.hpp"
#include "risas/detector.hpp"
#include "risas/surface.hpp"

namespace risas {

struct DescriptorParams {
    int n_pie = 8;
    int n_bin = 8;
    int n_vec = 2;
    /// Normals with |<n_k, n_i>| >= rho_bar share one label.
    double rho_bar = 0.9;
    /// Eigenvalue closeness ratio for orientation.
    double gamma = 0.8;
    /// Background cut-off around the keypoint, meters.
    double t_bg = 0.1;

    // Empirical constants of the initial support radius,
    // R = (offset + gain * min(cap, max(0.2, s_max) / max(0.2, s_min))) * s.
    double radius_offset = -5.0;
    double radius_gain = 25.0;
    double radius_ratio_cap = 3.0;
    double radius_min = 5.0;

    int min_inliers = 10;

    int dimension() const { return n_pie * n_bin * (n_vec + 1); }
    void validate() const;
    bool operator==(const DescriptorParams&) const = default;
};

/// Depth-derived scale: 1 up to 2 m, falling linearly to 0.2 at 8 m.
double estimate_scale(double depth);

struct ScaleRange {
    double s_min = 1.0;
    double s_max = 1.0;
};

/// Extreme scales over all valid depth pixels of the frame.
ScaleRange scale_range(const RgbdFrame& frame);

double initial_radius(double s, double s_max, double s_min,
                      const DescriptorParams& params = {});

struct PixelCoord {
    int u = 0;
    int v = 0;
    bool operator==(const PixelCoord&) const = default;
};

struct SupportPatch {
    Keypoint keypoint;
    double scale = 1.0;
    double radius_initial = 0.0;
    double radius_refined = 0.0;
    /// Ellipsoid semi-axes along camera x, y, z, meters.
    Eigen::Vector3d semi_axes = Eigen::Vector3d::Zero();
    std::vector<PixelCoord> pixels_2d;
    std::vector<Point3> points_3d;
};

/// Gathers the depth-scaled, background-filtered, ellipsoid-refined patch.
/// Throws TooFewPoints when fewer than params.min_inliers points survive.
SupportPatch select_support(const RgbdFrame& frame, const Keypoint& kp,
                            const DescriptorParams& params, const ScaleRange& range);

SupportPatch select_support(const RgbdFrame& frame, const Keypoint& kp,
                            const DescriptorParams& params = {});

enum class OrientationBranch { Principal, PlaneNormal, Rejected };

struct Orientation {
    OrientationBranch branch = OrientationBranch::Rejected;
    /// Descending eigenvalues of the patch covariance.
    Eigen::Vector3d eigenvalues = Eigen::Vector3d::Zero();
    Eigen::Vector3d direction = Eigen::Vector3d::Zero();
    double theta = 0.0;

    bool rejected() const { return branch == OrientationBranch::Rejected; }
};

/// 3-D dominant direction of a point set, before projection.
Orientation principal_direction(std::span<const Point3> points, double gamma);

/// Direction plus its image-plane angle against the u axis. Throws
/// DegenerateDirection when the direction is along the optical axis.
Orientation dominant_orientation(const SupportPatch& patch, const CameraIntrinsics& k,
                                 const DescriptorParams& params = {});

/// 0-based sector of the offset (du, dv) measured from theta.
int spatial_sector(double du, double dv, double theta, int n_pie);

/// 0-based equal-cardinality rank groups; ties keep input order.
std::vector<int> rank_groups(std::span<const double> values, int groups);

struct Descriptor {
    Keypoint keypoint;
    double theta = 0.0;
    std::vector<double> bins;
    bool empty = true;
};

/// Flat bin index of (spatial, intensity, normal) labels, all 0-based.
inline int bin_index(int sector, int intensity, int normal, const DescriptorParams& p) {
    return (sector * p.n_bin + intensity) * (p.n_vec + 1) + normal;
}

Descriptor build_descriptor(const RgbdFrame& frame, const NormalImage& nimg,
                            const SupportPatch& patch, double theta,
                            const DescriptorParams& params = {});

enum class RejectReason {
    TooFewPoints,
    Isotropic,
    DegenerateDirection,
    NoKeypointNormal,
    EmptyDescriptor,
};

const char* to_string(RejectReason reason);

struct Rejection {
    std::size_t keypoint_index = 0;
    RejectReason reason = RejectReason::TooFewPoints;
};

struct DescribeResult {
    std::vector<Descriptor> descriptors;
    /// Index into the input keypoint list for each descriptor.
    std::vector<std::size_t> source_index;
    std::vector<Rejection> rejections;

    std::size_t rejected(RejectReason reason) const;
};

DescribeResult describe_frame(const RgbdFrame& frame, const NormalImage& nimg,
                              std::span<const Keypoint> keypoints,
                              const DescriptorParams& params = {});

}  // namespace risas
