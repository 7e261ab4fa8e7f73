#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "risas/core.hpp"

namespace risas {

enum class TextureKind { Constant, Checkerboard, Perlin };

/// Intensity as a function of the object-local surface point. Lengths are
/// meters.
struct Texture {
    TextureKind kind = TextureKind::Checkerboard;
    double cell = 0.05;
    double dark = 40.0;
    double light = 200.0;
    double value = 128.0;
    /// Amplitude of gradient-noise detail added on top of the base pattern.
    double detail = 0.0;
    double noise_scale = 0.02;
    std::uint32_t seed = 1;

    double sample(const Eigen::Vector3d& local) const;
};

/// Improved Perlin gradient noise in [-1, 1].
class PerlinNoise {
public:
    explicit PerlinNoise(std::uint32_t seed);
    double operator()(double x, double y, double z) const;

private:
    std::vector<int> perm_;
};

enum class PrimitiveType { Plane, Box, Sphere, Wedge };

/// Geometry in a local frame placed by `pose` (local -> world).
///   plane:  z = 0, extent size.x by size.y (0 means unbounded)
///   box:    full extents size
///   sphere: radius size.x
///   wedge:  triangular prism, base z = 0 of width size.x, length size.y
///           along y, ridge at z = -size.z
struct Primitive {
    PrimitiveType type = PrimitiveType::Plane;
    Pose pose;
    Eigen::Vector3d size = Eigen::Vector3d::Zero();
    std::optional<Texture> texture;

    /// Nearest positive ray parameter in world coordinates, if any.
    std::optional<double> intersect(const Eigen::Vector3d& origin,
                                    const Eigen::Vector3d& dir) const;

    /// Residual of the implicit surface equation at a world point; zero on
    /// the surface.
    double surface_residual(const Eigen::Vector3d& world) const;
};

struct SceneSpec {
    std::vector<Primitive> primitives;
    Texture texture;
    /// Camera -> world.
    Pose camera_pose;
    CameraIntrinsics intrinsics;
    double noise = 0.0;
    std::uint32_t noise_seed = 0;
};

/// Ray-casts every pixel centre; unhit pixels get depth 0 and intensity 0.
/// Throws EmptyScene when nothing is visible.
RgbdFrame render(const SceneSpec& spec);

struct FramePair {
    RgbdFrame a;
    RgbdFrame b;
    /// Maps frame-b camera coordinates into frame-a camera coordinates.
    Pose b_to_a;
};

/// Renders from camera_pose and from camera_pose * relative_pose.
FramePair render_pair(const SceneSpec& spec, const Pose& relative_pose);

enum class IlluminationKind { Square, SquareRoot, Cube, CubeRoot, Gamma };

struct IlluminationMap {
    IlluminationKind kind = IlluminationKind::Square;
    double gamma = 1.0;

    /// Strictly increasing map of [0, 1] onto itself.
    double operator()(double x) const;
};

/// i -> 255 * map(i / 255), rounded to whole counts when `quantize` is set.
RgbdFrame relight(const RgbdFrame& frame, const IlluminationMap& map,
                  bool quantize = true);

}  // namespace risas
