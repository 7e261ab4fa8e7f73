#include "risas/core.hpp"

#include <cmath>

namespace risas {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "invalid-argument";
        case ErrorCode::InvalidDepth: return "invalid-depth";
        case ErrorCode::OutOfBounds: return "out-of-bounds";
        case ErrorCode::DegenerateDirection: return "degenerate-direction";
        case ErrorCode::DimensionMismatch: return "dimension-mismatch";
        case ErrorCode::EmptyFrame: return "empty-frame";
        case ErrorCode::TooFewPoints: return "too-few-points";
        case ErrorCode::EmptyScene: return "empty-scene";
        case ErrorCode::FileNotFound: return "file-not-found";
        case ErrorCode::UnsupportedBitDepth: return "unsupported-bit-depth";
        case ErrorCode::ParseError: return "parse-error";
    }
    return "unknown";
}

void CameraIntrinsics::validate() const {
    if (!(fx > 0.0) || !(fy > 0.0))
        throw Error(ErrorCode::InvalidArgument, "focal lengths must be positive");
    if (width <= 0 || height <= 0)
        throw Error(ErrorCode::InvalidArgument, "image size must be positive");
    if (!(cx >= 0.0 && cx < width && cy >= 0.0 && cy < height))
        throw Error(ErrorCode::InvalidArgument,
                    "principal point outside the image");
}

void RgbdFrame::validate() const {
    intrinsics.validate();
    if (!gray.same_size(depth))
        throw Error(ErrorCode::DimensionMismatch,
                    "gray and depth images differ in size");
    if (gray.width() != intrinsics.width || gray.height() != intrinsics.height)
        throw Error(ErrorCode::DimensionMismatch,
                    "image size does not match intrinsics");
    for (double d : depth.pixels()) {
        if (std::isfinite(d) && d < 0.0)
            throw Error(ErrorCode::InvalidDepth, "negative depth value");
    }
}

Pose Pose::make(const Eigen::Matrix3d& rotation,
                const Eigen::Vector3d& translation) {
    Pose pose{rotation, translation};
    pose.validate();
    return pose;
}

void Pose::validate(double tol) const {
    const double ortho =
        (rotation.transpose() * rotation - Eigen::Matrix3d::Identity())
            .cwiseAbs()
            .maxCoeff();
    if (!(ortho <= tol))
        throw Error(ErrorCode::InvalidArgument, "rotation is not orthonormal");
    if (!(std::abs(rotation.determinant() - 1.0) <= tol))
        throw Error(ErrorCode::InvalidArgument, "rotation determinant is not +1");
    if (!translation.allFinite())
        throw Error(ErrorCode::InvalidArgument, "translation is not finite");
}

Pose Pose::inverse() const {
    Pose inv;
    inv.rotation = rotation.transpose();
    inv.translation = -(inv.rotation * translation);
    return inv;
}

Pose Pose::operator*(const Pose& other) const {
    Pose out;
    out.rotation = rotation * other.rotation;
    out.translation = rotation * other.translation + translation;
    return out;
}

Eigen::Matrix3d rot_x(double radians) {
    return Eigen::AngleAxisd(radians, Eigen::Vector3d::UnitX()).toRotationMatrix();
}

Eigen::Matrix3d rot_y(double radians) {
    return Eigen::AngleAxisd(radians, Eigen::Vector3d::UnitY()).toRotationMatrix();
}

Eigen::Matrix3d rot_z(double radians) {
    return Eigen::AngleAxisd(radians, Eigen::Vector3d::UnitZ()).toRotationMatrix();
}

Point3 backproject(double u, double v, double depth, const CameraIntrinsics& k) {
    if (!(depth > 0.0) || !std::isfinite(depth))
        throw Error(ErrorCode::InvalidDepth, "depth must be positive");
    if (!(u >= 0.0 && v >= 0.0 && u <= k.width - 1 && v <= k.height - 1))
        throw Error(ErrorCode::OutOfBounds, "pixel outside image");
    return {(u - k.cx) * depth / k.fx, (v - k.cy) * depth / k.fy, depth};
}

Vec2 project(const Point3& p, const CameraIntrinsics& k) {
    if (!(p.z() > 0.0))
        throw Error(ErrorCode::InvalidDepth, "point behind the camera");
    return {k.fx * p.x() / p.z() + k.cx, k.fy * p.y() / p.z() + k.cy};
}

Vec2 project_direction(const Eigen::Vector3d& dir, const CameraIntrinsics& k) {
    const double len = dir.norm();
    if (!(len > 0.0))
        throw Error(ErrorCode::DegenerateDirection, "zero direction");
    const Eigen::Vector3d unit = dir / len;
    if (std::hypot(unit.x(), unit.y()) < 1e-9)
        throw Error(ErrorCode::DegenerateDirection,
                    "direction parallel to the optical axis");
    const Vec2 img{k.fx * unit.x(), k.fy * unit.y()};
    return img.normalized();
}

Point3 transform(const Point3& p, const Pose& pose) {
    return pose.rotation * p + pose.translation;
}

}  // namespace risas
