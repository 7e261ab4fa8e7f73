#include "risas/descriptor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include <Eigen/Eigenvalues>

namespace risas {

void DescriptorParams::validate() const {
    if (n_pie < 2 || n_bin < 2 || n_vec < 1)
        throw Error(ErrorCode::InvalidArgument, "descriptor bin counts out of range");
    if (!(rho_bar > 0.0 && rho_bar < 1.0))
        throw Error(ErrorCode::InvalidArgument, "rho_bar must lie in (0, 1)");
    if (!(gamma > 0.0 && gamma < 1.0))
        throw Error(ErrorCode::InvalidArgument, "gamma must lie in (0, 1)");
    if (!(t_bg > 0.0))
        throw Error(ErrorCode::InvalidArgument, "t_bg must be positive");
    if (min_inliers < 3)
        throw Error(ErrorCode::InvalidArgument, "min_inliers must be >= 3");
}

double estimate_scale(double depth) {
    return std::max(0.2, (3.8 - 0.4 * std::max(2.0, depth)) / 3.0);
}

ScaleRange scale_range(const RgbdFrame& frame) {
    double d_min = std::numeric_limits<double>::infinity();
    double d_max = 0.0;
    for (double d : frame.depth.pixels()) {
        if (!(d > 0.0) || !std::isfinite(d))
            continue;
        d_min = std::min(d_min, d);
        d_max = std::max(d_max, d);
    }
    if (!(d_max > 0.0))
        return {};
    return {estimate_scale(d_max), estimate_scale(d_min)};
}

double initial_radius(double s, double s_max, double s_min,
                      const DescriptorParams& params) {
    const double ratio = std::max(0.2, s_max) / std::max(0.2, s_min);
    const double r =
        (params.radius_offset + params.radius_gain * std::min(params.radius_ratio_cap, ratio)) * s;
    return std::max(params.radius_min, r);
}

namespace {

struct Gathered {
    std::vector<PixelCoord> pixels;
    std::vector<Point3> points;
};

// Valid-depth pixels within `radius` of the keypoint that lie closer than
// t_bg to it in 3-D, in scanline order.
Gathered gather_inliers(const RgbdFrame& frame, const Keypoint& kp, double radius,
                        double t_bg) {
    Gathered out;
    const int r = static_cast<int>(std::floor(radius));
    const double r_sq = radius * radius;
    const double t_sq = t_bg * t_bg;
    for (int dv = -r; dv <= r; ++dv) {
        for (int du = -r; du <= r; ++du) {
            if (du * du + dv * dv > r_sq)
                continue;
            const int u = kp.u + du, v = kp.v + dv;
            if (!frame.depth.contains(u, v) || !frame.valid_depth(u, v))
                continue;
            const Point3 p = backproject(u, v, frame.depth(u, v), frame.intrinsics);
            if ((p - kp.position).squaredNorm() >= t_sq)
                continue;
            out.pixels.push_back({u, v});
            out.points.push_back(p);
        }
    }
    return out;
}

}  // namespace

SupportPatch select_support(const RgbdFrame& frame, const Keypoint& kp,
                            const DescriptorParams& params, const ScaleRange& range) {
    params.validate();
    if (!(kp.depth > 0.0))
        throw Error(ErrorCode::InvalidDepth, "keypoint has no valid depth");

    SupportPatch patch;
    patch.keypoint = kp;
    patch.scale = estimate_scale(kp.depth);
    patch.radius_initial = initial_radius(patch.scale, range.s_max, range.s_min, params);

    Gathered initial = gather_inliers(frame, kp, patch.radius_initial, params.t_bg);
    if (static_cast<int>(initial.points.size()) < params.min_inliers)
        throw Error(ErrorCode::TooFewPoints, "too few inliers in the initial patch");

    // Axis-aligned ellipsoid centred on the keypoint; semi-axes are twice the
    // RMS offset along each camera axis.
    Eigen::Vector3d second_moment = Eigen::Vector3d::Zero();
    for (const Point3& p : initial.points)
        second_moment += (p - kp.position).cwiseAbs2();
    second_moment /= static_cast<double>(initial.points.size());
    patch.semi_axes = 2.0 * second_moment.cwiseSqrt();

    const Vec2 centre{static_cast<double>(kp.u), static_cast<double>(kp.v)};
    double refined = 0.0;
    for (int axis = 0; axis < 3; ++axis) {
        for (double sign : {-1.0, 1.0}) {
            const Point3 end =
                kp.position + sign * patch.semi_axes(axis) * Eigen::Vector3d::Unit(axis);
            if (!(end.z() > 0.0))
                continue;
            refined = std::max(refined, (project(end, frame.intrinsics) - centre).norm());
        }
    }
    patch.radius_refined = refined;

    Gathered final_set = gather_inliers(frame, kp, patch.radius_refined, params.t_bg);
    if (static_cast<int>(final_set.points.size()) < params.min_inliers)
        throw Error(ErrorCode::TooFewPoints, "too few inliers in the refined patch");
    patch.pixels_2d = std::move(final_set.pixels);
    patch.points_3d = std::move(final_set.points);
    return patch;
}

SupportPatch select_support(const RgbdFrame& frame, const Keypoint& kp,
                            const DescriptorParams& params) {
    return select_support(frame, kp, params, scale_range(frame));
}

namespace {

// Fixed sign: positive z, then positive x, then positive y.
Eigen::Vector3d canonical_sign(const Eigen::Vector3d& d) {
    constexpr double eps = 1e-12;
    for (int axis : {2, 0, 1}) {
        if (d(axis) > eps)
            return d;
        if (d(axis) < -eps)
            return -d;
    }
    return d;
}

}  // namespace

Orientation principal_direction(std::span<const Point3> points, double gamma) {
    if (points.size() < 3)
        throw Error(ErrorCode::TooFewPoints, "orientation needs at least 3 points");

    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (const Point3& p : points)
        mean += p;
    mean /= static_cast<double>(points.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const Point3& p : points) {
        const Eigen::Vector3d d = p - mean;
        cov.noalias() += d * d.transpose();
    }
    cov /= static_cast<double>(points.size());

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
    // Eigen sorts ascending; e1 >= e2 >= e3.
    const double e1 = solver.eigenvalues()(2);
    const double e2 = solver.eigenvalues()(1);
    const double e3 = solver.eigenvalues()(0);
    const Eigen::Vector3d v1 = solver.eigenvectors().col(2);
    const Eigen::Vector3d v2 = solver.eigenvectors().col(1);

    Orientation out;
    out.eigenvalues = {e1, e2, e3};
    if (e2 > gamma * e1 && e3 > gamma * e1) {
        out.branch = OrientationBranch::Rejected;
        return out;
    }
    if (e2 > gamma * e1) {
        out.branch = OrientationBranch::PlaneNormal;
        out.direction = canonical_sign(v1.cross(v2).normalized());
    } else {
        out.branch = OrientationBranch::Principal;
        out.direction = canonical_sign(v1);
    }
    return out;
}

Orientation dominant_orientation(const SupportPatch& patch, const CameraIntrinsics& k,
                                 const DescriptorParams& params) {
    if (static_cast<int>(patch.points_3d.size()) < params.min_inliers)
        throw Error(ErrorCode::TooFewPoints, "patch too small for orientation");
    Orientation out = principal_direction(patch.points_3d, params.gamma);
    if (out.rejected())
        return out;
    const Vec2 d2 = project_direction(out.direction, k);
    out.theta = std::atan2(d2.y(), d2.x());
    return out;
}

int spatial_sector(double du, double dv, double theta, int n_pie) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double angle = std::fmod(std::atan2(dv, du) - theta, two_pi);
    if (angle < 0.0)
        angle += two_pi;
    const int sector = static_cast<int>(angle / (two_pi / n_pie));
    return std::clamp(sector, 0, n_pie - 1);
}

std::vector<int> rank_groups(std::span<const double> values, int groups) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<int> out(n, 0);
    for (std::size_t rank = 0; rank < n; ++rank)
        out[order[rank]] = static_cast<int>(rank * static_cast<std::size_t>(groups) / n);
    return out;
}

Descriptor build_descriptor(const RgbdFrame& frame, const NormalImage& nimg,
                            const SupportPatch& patch, double theta,
                            const DescriptorParams& params) {
    params.validate();
    const Keypoint& kp = patch.keypoint;
    Descriptor out;
    out.keypoint = kp;
    out.theta = theta;
    out.bins.assign(static_cast<std::size_t>(params.dimension()), 0.0);

    if (!nimg.valid(kp.u, kp.v))
        throw Error(ErrorCode::InvalidArgument, "keypoint has no valid normal");
    const Eigen::Vector3d& n_k = nimg(kp.u, kp.v);

    std::vector<int> sectors;
    std::vector<double> intensities;
    std::vector<double> rho;
    for (const PixelCoord& px : patch.pixels_2d) {
        // The keypoint itself has no spatial sector.
        if ((px.u == kp.u && px.v == kp.v) || !nimg.valid(px.u, px.v))
            continue;
        sectors.push_back(spatial_sector(px.u - kp.u, px.v - kp.v, theta, params.n_pie));
        intensities.push_back(frame.gray(px.u, px.v));
        rho.push_back(std::abs(n_k.dot(nimg(px.u, px.v))));
    }
    if (sectors.empty())
        return out;

    const std::vector<int> intensity_label = rank_groups(intensities, params.n_bin);

    std::vector<int> normal_label(rho.size(), params.n_vec);
    std::vector<std::size_t> below;
    std::vector<double> below_rho;
    for (std::size_t i = 0; i < rho.size(); ++i) {
        if (rho[i] < params.rho_bar) {
            below.push_back(i);
            below_rho.push_back(rho[i]);
        }
    }
    const std::vector<int> below_label = rank_groups(below_rho, params.n_vec);
    for (std::size_t j = 0; j < below.size(); ++j)
        normal_label[below[j]] = below_label[j];

    for (std::size_t i = 0; i < sectors.size(); ++i)
        out.bins[bin_index(sectors[i], intensity_label[i], normal_label[i], params)] += 1.0;
    const double total = static_cast<double>(sectors.size());
    for (double& b : out.bins)
        b /= total;
    out.empty = false;
    return out;
}

const char* to_string(RejectReason reason) {
    switch (reason) {
        case RejectReason::TooFewPoints: return "too-few-points";
        case RejectReason::Isotropic: return "isotropic";
        case RejectReason::DegenerateDirection: return "degenerate-direction";
        case RejectReason::NoKeypointNormal: return "no-keypoint-normal";
        case RejectReason::EmptyDescriptor: return "empty-descriptor";
    }
    return "unknown";
}

std::size_t DescribeResult::rejected(RejectReason reason) const {
    return static_cast<std::size_t>(
        std::count_if(rejections.begin(), rejections.end(),
                      [&](const Rejection& r) { return r.reason == reason; }));
}

DescribeResult describe_frame(const RgbdFrame& frame, const NormalImage& nimg,
                              std::span<const Keypoint> keypoints,
                              const DescriptorParams& params) {
    params.validate();
    DescribeResult result;
    if (keypoints.empty())
        return result;
    const ScaleRange range = scale_range(frame);

    for (std::size_t i = 0; i < keypoints.size(); ++i) {
        const Keypoint& kp = keypoints[i];
        auto reject = [&](RejectReason reason) { result.rejections.push_back({i, reason}); };
        if (!nimg.valid(kp.u, kp.v)) {
            reject(RejectReason::NoKeypointNormal);
            continue;
        }
        try {
            const SupportPatch patch = select_support(frame, kp, params, range);
            const Orientation orientation =
                dominant_orientation(patch, frame.intrinsics, params);
            if (orientation.rejected()) {
                reject(RejectReason::Isotropic);
                continue;
            }
            Descriptor d = build_descriptor(frame, nimg, patch, orientation.theta, params);
            if (d.empty) {
                reject(RejectReason::EmptyDescriptor);
                continue;
            }
            result.descriptors.push_back(std::move(d));
            result.source_index.push_back(i);
        } catch (const Error& e) {
            switch (e.code()) {
                case ErrorCode::TooFewPoints:
                case ErrorCode::InvalidDepth:
                    reject(RejectReason::TooFewPoints);
                    break;
                case ErrorCode::DegenerateDirection:
                    reject(RejectReason::DegenerateDirection);
                    break;
                default:
                    throw;
            }
        }
    }
    return result;
}

}  // namespace risas
