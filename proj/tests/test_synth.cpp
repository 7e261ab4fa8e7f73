#include <doctest.h>

#include <random>

#include "risas/synth.hpp"
#include "scenes.hpp"

using namespace risas;
using namespace risas::testing;

TEST_CASE("constant plane renders constant depth and intensity") {
    const RgbdFrame f = render(single_plane(1.25, constant_texture(77.0), small_intrinsics()));
    for (int v = 0; v < f.height(); ++v)
        for (int u = 0; u < f.width(); ++u) {
            CHECK(f.depth(u, v) == doctest::Approx(1.25).epsilon(1e-12));
            CHECK(f.gray(u, v) == 77.0);
        }
}

TEST_CASE("tilted plane depth matches the analytic intersection") {
    SceneSpec s = single_plane(2.0, constant_texture(), small_intrinsics(80, 60));
    s.primitives[0].pose.rotation = rot_y(deg(45));
    const RgbdFrame f = render(s);
    const Eigen::Vector3d n(std::sin(deg(45)), 0.0, std::cos(deg(45)));
    const Eigen::Vector3d p0(0, 0, 2.0);
    const CameraIntrinsics& k = f.intrinsics;
    std::mt19937 rng(1);
    std::uniform_int_distribution<int> pu(0, 79), pv(0, 59);
    for (int i = 0; i < 100; ++i) {
        const int u = pu(rng), v = pv(rng);
        const Eigen::Vector3d ray((u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0);
        const double expected = n.dot(p0) / n.dot(ray);
        CHECK(std::abs(f.depth(u, v) - expected) < 1e-9);
    }
}

TEST_CASE("sphere is nearest at its centre pixel") {
    SceneSpec s = single_plane(3.0, constant_texture(), small_intrinsics(65, 49));
    Primitive sphere;
    sphere.type = PrimitiveType::Sphere;
    sphere.pose.translation = {0.0, 0.0, 1.0};
    sphere.size = {0.12, 0.0, 0.0};
    s.primitives.push_back(sphere);
    const RgbdFrame f = render(s);
    CHECK(f.depth(32, 24) == doctest::Approx(0.88).epsilon(1e-12));
    for (double d : f.depth.pixels())
        CHECK(d >= f.depth(32, 24));
}

TEST_CASE("rendered points lie on the hit surface") {
    SceneSpec s = object_scene();
    s.intrinsics = small_intrinsics(120, 90);
    s.intrinsics.fx = s.intrinsics.fy = 100.0;
    const RgbdFrame f = render(s);
    for (int v = 0; v < f.height(); v += 3)
        for (int u = 0; u < f.width(); u += 3) {
            if (f.depth(u, v) <= 0.0)
                continue;
            const Point3 p = backproject(u, v, f.depth(u, v), f.intrinsics);
            double best = 1e9;
            for (const Primitive& prim : s.primitives)
                best = std::min(best, std::abs(prim.surface_residual(p)));
            CHECK(best < 1e-9);
        }
}

TEST_CASE("empty scene is an error") {
    SceneSpec s;
    s.intrinsics = small_intrinsics();
    try {
        render(s);
        FAIL("expected empty scene");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EmptyScene);
    }
    // Plane behind the camera.
    s.primitives = {plane_at(-1.0)};
    CHECK_THROWS_AS(render(s), Error);
}

TEST_CASE("unhit pixels are invalid") {
    SceneSpec s;
    s.intrinsics = small_intrinsics(64, 48);
    s.texture = constant_texture(90.0);
    Primitive sphere;
    sphere.type = PrimitiveType::Sphere;
    sphere.pose.translation = {0.0, 0.0, 2.0};
    sphere.size = {0.1, 0.0, 0.0};
    s.primitives = {sphere};
    const RgbdFrame f = render(s);
    CHECK(f.depth(0, 0) == 0.0);
    CHECK(f.gray(0, 0) == 0.0);
    CHECK(f.depth(32, 24) > 0.0);
}

TEST_CASE("identity pair renders identical frames") {
    SceneSpec s = object_scene();
    s.intrinsics = small_intrinsics(80, 60);
    const FramePair p = render_pair(s, Pose::identity());
    CHECK(p.a.gray == p.b.gray);
    CHECK(p.a.depth == p.b.depth);
}

TEST_CASE("moving the camera forward shortens depth") {
    SceneSpec s = single_plane(2.0, detailed_checker(), small_intrinsics(64, 48));
    const FramePair p = render_pair(s, Pose::make(Eigen::Matrix3d::Identity(), {0.0, 0.0, 0.8}));
    for (int v = 0; v < 48; ++v)
        for (int u = 0; u < 64; ++u)
            CHECK(p.b.depth(u, v) == doctest::Approx(1.2).epsilon(1e-12));
    // A frame-b point maps into frame a 0.8 m further away.
    const Point3 pb = backproject(10, 10, p.b.depth(10, 10), p.b.intrinsics);
    CHECK(transform(pb, p.b_to_a).z() == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("rolled pair is consistent with the relative pose") {
    SceneSpec s = object_scene();
    s.intrinsics = small_intrinsics(120, 90);
    s.intrinsics.fx = s.intrinsics.fy = 100.0;
    const Pose rel = Pose::make(rot_z(deg(30)), Eigen::Vector3d::Zero());
    const FramePair p = render_pair(s, rel);
    CHECK(p.b_to_a.rotation == rel.rotation);
    // Frame-b points, carried through b_to_a and the first camera, land on
    // the scene surfaces.
    int checked = 0;
    for (int v = 0; v < 90; v += 3)
        for (int u = 0; u < 120; u += 3) {
            if (p.b.depth(u, v) <= 0.0)
                continue;
            const Point3 pa = transform(backproject(u, v, p.b.depth(u, v), p.b.intrinsics), p.b_to_a);
            const Point3 world = transform(pa, s.camera_pose);
            double best = 1e9;
            for (const Primitive& prim : s.primitives)
                best = std::min(best, std::abs(prim.surface_residual(world)));
            CHECK(best < 1e-9);
            ++checked;
        }
    CHECK(checked > 500);
}

TEST_CASE("texture is attached to the surface") {
    // Intensities follow the object, so a pure roll moves them with it.
    SceneSpec s = single_plane(1.0, detailed_checker(0.05, 9), small_intrinsics(65, 65));
    // Keep cell boundaries off the pixel grid.
    s.primitives[0].pose.translation = {0.013, 0.007, 1.0};
    const FramePair p = render_pair(s, Pose::make(rot_z(deg(90)), Eigen::Vector3d::Zero()));
    // A 90 deg roll about the centre pixel permutes pixel centres exactly.
    for (int v = 0; v < 65; v += 4)
        for (int u = 0; u < 65; u += 4) {
            const Point3 pa = transform(backproject(u, v, p.b.depth(u, v), p.b.intrinsics), p.b_to_a);
            const Vec2 uv = project(pa, p.a.intrinsics);
            const int iu = static_cast<int>(std::lround(uv.x())), iv = static_cast<int>(std::lround(uv.y()));
            REQUIRE(std::abs(uv.x() - iu) < 1e-9);
            REQUIRE(std::abs(uv.y() - iv) < 1e-9);
            CHECK(p.b.gray(u, v) == doctest::Approx(p.a.gray(iu, iv)).epsilon(1e-9));
        }
}

TEST_CASE("illumination maps") {
    const IlluminationMap sq{IlluminationKind::Square, 1.0};
    const IlluminationMap root{IlluminationKind::SquareRoot, 1.0};
    const IlluminationMap cube{IlluminationKind::Cube, 1.0};
    const IlluminationMap cbrt{IlluminationKind::CubeRoot, 1.0};
    for (const auto& m : {sq, root, cube, cbrt}) {
        CHECK(m(0.0) == 0.0);
        CHECK(m(1.0) == 1.0);
        for (int i = 1; i <= 100; ++i)
            CHECK(m(i / 100.0) > m((i - 1) / 100.0));
    }

    RgbdFrame f{Image<double>(256, 1, 0.0), Image<double>(256, 1, 1.0), small_intrinsics(256, 1)};
    for (int u = 0; u < 256; ++u)
        f.gray(u, 0) = u;
    const RgbdFrame s = relight(f, sq);
    CHECK(s.gray(255, 0) == 255.0);
    CHECK(s.gray(0, 0) == 0.0);
    CHECK(s.gray(128, 0) == 64.0);
    CHECK(s.depth == f.depth);
    const RgbdFrame back = relight(relight(f, sq, false), root, false);
    for (int u = 0; u < 256; ++u)
        CHECK(std::abs(back.gray(u, 0) - u) <= 1e-9);
    const RgbdFrame back_q = relight(relight(f, root), sq);
    for (int u = 0; u < 256; ++u)
        CHECK(std::abs(back_q.gray(u, 0) - u) <= 1.0);

    CHECK_THROWS_AS(relight(f, IlluminationMap{IlluminationKind::Gamma, 0.0}), Error);
}

TEST_CASE("sensor noise is seeded") {
    SceneSpec s = single_plane(1.0, detailed_checker(), small_intrinsics());
    s.noise = 0.002;
    s.noise_seed = 4;
    const RgbdFrame a = render(s), b = render(s);
    CHECK(a.depth == b.depth);
    const RgbdFrame clean = render(single_plane(1.0, detailed_checker(), small_intrinsics()));
    CHECK_FALSE(a.depth == clean.depth);
}
