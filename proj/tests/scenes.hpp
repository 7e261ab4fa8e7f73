#pragma once

// Synthetic scenes shared by the unit and acceptance suites.

#include <cmath>
#include <numbers>
#include <random>

#include "risas/core.hpp"
#include "risas/synth.hpp"

namespace risas::testing {

inline double deg(double d) { return d * std::numbers::pi / 180.0; }

inline CameraIntrinsics small_intrinsics(int width = 64, int height = 48) {
    CameraIntrinsics k;
    k.width = width;
    k.height = height;
    k.cx = (width - 1) / 2.0;
    k.cy = (height - 1) / 2.0;
    return k;
}

inline Texture constant_texture(double value = 128.0) {
    Texture t;
    t.kind = TextureKind::Constant;
    t.value = value;
    return t;
}

/// Checkerboard with continuous detail so that intensities are distinct.
inline Texture detailed_checker(double cell = 0.04, std::uint32_t seed = 3) {
    Texture t;
    t.kind = TextureKind::Checkerboard;
    t.cell = cell;
    t.detail = 25.0;
    t.noise_scale = 0.015;
    t.seed = seed;
    return t;
}

inline Primitive plane_at(double z, const Eigen::Matrix3d& rotation = Eigen::Matrix3d::Identity()) {
    Primitive p;
    p.type = PrimitiveType::Plane;
    p.pose.rotation = rotation;
    p.pose.translation = {0.0, 0.0, z};
    return p;
}

inline SceneSpec single_plane(double z, const Texture& texture,
                              const CameraIntrinsics& k = CameraIntrinsics{}) {
    SceneSpec s;
    s.intrinsics = k;
    s.texture = texture;
    s.primitives = {plane_at(z)};
    return s;
}

/// Wedge, box and sphere in front of a Perlin backdrop. `offset` pushes the
/// whole scene away from the camera and `size` scales the objects.
inline SceneSpec object_scene(double offset = 0.0, double size = 1.0) {
    SceneSpec s;
    s.texture = detailed_checker(0.04 * size);

    Primitive back = plane_at(2.0 + offset, rot_y(0.15));
    Texture perlin;
    perlin.kind = TextureKind::Perlin;
    perlin.noise_scale = 0.05;
    perlin.seed = 7;
    back.texture = perlin;

    Primitive wedge;
    wedge.type = PrimitiveType::Wedge;
    wedge.pose.translation = {-0.15 * size, 0.0, 1.3 + offset};
    wedge.pose.rotation = rot_z(0.3);
    wedge.size = Eigen::Vector3d(0.6, 0.5, 0.25) * size;

    Primitive box;
    box.type = PrimitiveType::Box;
    box.pose.translation = {0.35 * size, 0.1 * size, 1.2 + offset};
    box.pose.rotation = rot_y(0.5) * rot_x(0.3);
    box.size = Eigen::Vector3d::Constant(0.25 * size);

    Primitive sphere;
    sphere.type = PrimitiveType::Sphere;
    sphere.pose.translation = {0.25 * size, -0.3 * size, 1.5 + offset};
    sphere.size = {0.15 * size, 0.0, 0.0};

    s.primitives = {back, wedge, box, sphere};
    return s;
}

/// The far variant of object_scene: every surface beyond 2.4 m, where the
/// depth-derived scale and the background ball bound the support patch.
inline SceneSpec far_object_scene() { return object_scene(1.2, 1.6); }

/// Checkerboard wedge filling most of the view, ridge vertical, over a
/// checkerboard backdrop.
inline SceneSpec wedge_scene() {
    SceneSpec s;
    s.texture = detailed_checker(0.05, 11);
    Primitive back = plane_at(2.2, rot_x(0.1));
    back.texture = detailed_checker(0.08, 12);
    Primitive wedge;
    wedge.type = PrimitiveType::Wedge;
    wedge.pose.translation = {0.0, 0.0, 1.4};
    wedge.size = {0.9, 0.7, 0.3};
    s.primitives = {back, wedge};
    return s;
}

/// Textured box face-on at 0.7 m, optionally with a 2 m backdrop.
inline SceneSpec box_scene(bool with_backdrop) {
    SceneSpec s;
    s.texture = detailed_checker(0.03, 21);
    Primitive box;
    box.type = PrimitiveType::Box;
    box.pose.translation = {0.0, 0.0, 0.7 + 0.1};
    box.pose.rotation = rot_y(0.35);
    box.size = {0.2, 0.2, 0.2};
    s.primitives = {box};
    if (with_backdrop) {
        Primitive back = plane_at(2.0);
        back.texture = detailed_checker(0.1, 22);
        s.primitives.push_back(back);
    }
    return s;
}

/// Smooth random image: an L-shaped step plus a few Gaussian blobs.
inline Image<double> random_texture_patch(std::mt19937& rng, int size) {
    std::uniform_real_distribution<double> pos(2.0, size - 3.0), amp(-80.0, 80.0),
        width(1.0, 3.0);
    Image<double> img(size, size, 128.0);
    const int corner_u = static_cast<int>(pos(rng)), corner_v = static_cast<int>(pos(rng));
    const double corner_amp = amp(rng);
    for (int v = 0; v < size; ++v)
        for (int u = 0; u < size; ++u)
            if (u >= corner_u && v >= corner_v)
                img(u, v) += corner_amp;
    for (int b = 0; b < 4; ++b) {
        const double bu = pos(rng), bv = pos(rng), a = amp(rng), s = width(rng);
        for (int v = 0; v < size; ++v)
            for (int u = 0; u < size; ++u)
                img(u, v) += a * std::exp(-0.5 * ((u - bu) * (u - bu) + (v - bv) * (v - bv)) / (s * s));
    }
    return img;
}

}  // namespace risas::testing
