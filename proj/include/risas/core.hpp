#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace risas {

enum class ErrorCode {
    InvalidArgument,
    InvalidDepth,
    OutOfBounds,
    DegenerateDirection,
    DimensionMismatch,
    EmptyFrame,
    TooFewPoints,
    EmptyScene,
    FileNotFound,
    UnsupportedBitDepth,
    ParseError,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

using Point3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;

/// Dense row-major image. Pixel (u, v) is column u, row v.
template <typename T>
class Image {
public:
    Image() = default;
    Image(int width, int height, const T& fill = T{})
        : width_(width), height_(height),
          data_(static_cast<std::size_t>(width) * height, fill) {
        if (width < 0 || height < 0)
            throw Error(ErrorCode::InvalidArgument, "negative image size");
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    bool contains(int u, int v) const noexcept {
        return u >= 0 && v >= 0 && u < width_ && v < height_;
    }

    T& operator()(int u, int v) { return data_[index(u, v)]; }
    const T& operator()(int u, int v) const { return data_[index(u, v)]; }

    T& at(int u, int v) {
        check(u, v);
        return data_[index(u, v)];
    }
    const T& at(int u, int v) const {
        check(u, v);
        return data_[index(u, v)];
    }

    std::span<T> pixels() noexcept { return data_; }
    std::span<const T> pixels() const noexcept { return data_; }

    template <typename U>
    bool same_size(const Image<U>& other) const noexcept {
        return width_ == other.width() && height_ == other.height();
    }

    bool operator==(const Image&) const = default;

private:
    std::size_t index(int u, int v) const noexcept {
        return static_cast<std::size_t>(v) * width_ + u;
    }
    void check(int u, int v) const {
        if (!contains(u, v))
            throw Error(ErrorCode::OutOfBounds, "pixel outside image");
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<T> data_;
};

/// Pinhole intrinsics. Defaults are the usual 640x480 Kinect values.
struct CameraIntrinsics {
    double fx = 525.0;
    double fy = 525.0;
    double cx = 319.5;
    double cy = 239.5;
    int width = 640;
    int height = 480;

    /// Throws InvalidArgument when the invariants do not hold.
    void validate() const;

    bool operator==(const CameraIntrinsics&) const = default;
};

/// Registered grayscale + metric depth pair. Depth 0 marks an invalid pixel.
struct RgbdFrame {
    Image<double> gray;
    Image<double> depth;
    CameraIntrinsics intrinsics;

    int width() const noexcept { return gray.width(); }
    int height() const noexcept { return gray.height(); }

    bool valid_depth(int u, int v) const { return depth(u, v) > 0.0; }

    /// Checks matching dimensions and depth sanity.
    void validate() const;
};

/// Rigid transform p -> R p + t.
struct Pose {
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();

    static Pose identity() { return {}; }

    /// Builds a pose and checks that the rotation is proper orthonormal.
    static Pose make(const Eigen::Matrix3d& rotation,
                     const Eigen::Vector3d& translation);

    Pose inverse() const;

    /// Composition: (a * b)(p) = a(b(p)).
    Pose operator*(const Pose& other) const;

    void validate(double tol = 1e-9) const;
};

Eigen::Matrix3d rot_x(double radians);
Eigen::Matrix3d rot_y(double radians);
Eigen::Matrix3d rot_z(double radians);

Point3 backproject(double u, double v, double depth, const CameraIntrinsics& k);

/// Forward pinhole map. Requires p.z() > 0.
Vec2 project(const Point3& p, const CameraIntrinsics& k);

/// Unit image-plane direction of a 3-D direction, ignoring translation.
Vec2 project_direction(const Eigen::Vector3d& dir, const CameraIntrinsics& k);

Point3 transform(const Point3& p, const Pose& pose);

}  // namespace risas
