#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "risas/core.hpp"
#include "scenes.hpp"

using namespace risas;
using risas::testing::deg;

TEST_CASE("backproject maps pixels through the pinhole model") {
    const CameraIntrinsics k;
    const Point3 axis = backproject(k.cx, k.cy, 1.0, k);
    CHECK(axis.x() == 0.0);
    CHECK(axis.y() == 0.0);
    CHECK(axis.z() == 1.0);

    const Point3 off = backproject(k.cx + 105.0, k.cy, 2.0, k);
    CHECK(off.x() == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(off.y() == 0.0);
    CHECK(off.z() == 2.0);

    // (100 - 319.5) * 1.5 / 525 and (80 - 239.5) * 1.5 / 525.
    const Point3 p = backproject(100, 80, 1.5, k);
    CHECK(p.x() == doctest::Approx(-0.627142857142857).epsilon(1e-12));
    CHECK(p.y() == doctest::Approx(-0.455714285714286).epsilon(1e-12));
    CHECK(p.z() == 1.5);
}

TEST_CASE("backproject rejects bad input") {
    const CameraIntrinsics k;
    CHECK_THROWS_AS(backproject(10, 10, 0.0, k), Error);
    try {
        backproject(10, 10, -1.0, k);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidDepth);
    }
    try {
        backproject(640, 10, 1.0, k);
        FAIL("expected out-of-bounds");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::OutOfBounds);
    }
}

TEST_CASE("backproject then project recovers the pixel") {
    const CameraIntrinsics k;
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(0.0, 639.0), v(0.0, 479.0), d(0.3, 8.0);
    for (int i = 0; i < 1000; ++i) {
        const double pu = u(rng), pv = v(rng);
        const Vec2 back = project(backproject(pu, pv, d(rng), k), k);
        CHECK(std::abs(back.x() - pu) < 1e-6);
        CHECK(std::abs(back.y() - pv) < 1e-6);
    }
}

TEST_CASE("project_direction") {
    CameraIntrinsics k;
    Vec2 d = project_direction({1, 0, 0}, k);
    CHECK(d.x() == doctest::Approx(1.0));
    CHECK(d.y() == doctest::Approx(0.0));

    d = project_direction({0, 1, 0.5}, k);
    CHECK(d.x() == doctest::Approx(0.0));
    CHECK(d.y() == doctest::Approx(1.0));

    k.fx = 2.0 * k.fy;
    d = project_direction({1, 1, 0}, k);
    CHECK(d.x() == doctest::Approx(2.0 / std::sqrt(5.0)).epsilon(1e-12));
    CHECK(d.y() == doctest::Approx(1.0 / std::sqrt(5.0)).epsilon(1e-12));

    try {
        project_direction({1e-12, 0, 1}, k);
        FAIL("expected degenerate direction");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DegenerateDirection);
    }
}

TEST_CASE("transform") {
    const Point3 p{0.3, -0.2, 1.7};
    CHECK((transform(p, Pose::identity()) - p).norm() == 0.0);

    const Point3 q = transform({1, 0, 0}, Pose::make(rot_z(deg(90)), Eigen::Vector3d::Zero()));
    CHECK(q.x() == doctest::Approx(0.0));
    CHECK(q.y() == doctest::Approx(1.0));
    CHECK(q.z() == doctest::Approx(0.0));

    const double c = std::cos(deg(30)), s = std::sin(deg(30));
    const double r[3][3] = {{c, 0, s}, {0, 1, 0}, {-s, 0, c}};
    const double t[3] = {0.05, 0, 0};
    const auto expected = oracle::rigid_apply(r, t, {0.2, 0.1, 1.0});
    const Point3 got = transform({0.2, 0.1, 1.0}, Pose::make(rot_y(deg(30)), {0.05, 0, 0}));
    for (int i = 0; i < 3; ++i)
        CHECK(got(i) == doctest::Approx(expected[i]).epsilon(1e-14));
}

TEST_CASE("pose inverse undoes the transform") {
    std::mt19937 rng(9);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
        const Pose a = Pose::make(q.normalized().toRotationMatrix(), {n(rng), n(rng), n(rng)});
        const Point3 p{n(rng), n(rng), n(rng)};
        CHECK((transform(transform(p, a), a.inverse()) - p).norm() < 1e-9);
        CHECK((transform(p, a * a.inverse()) - p).norm() < 1e-9);
    }
}

TEST_CASE("pose validation") {
    Eigen::Matrix3d bad = Eigen::Matrix3d::Identity();
    bad(0, 0) = -1.0;  // reflection
    CHECK_THROWS_AS(Pose::make(bad, Eigen::Vector3d::Zero()), Error);
    bad = 1.01 * Eigen::Matrix3d::Identity();
    CHECK_THROWS_AS(Pose::make(bad, Eigen::Vector3d::Zero()), Error);
}

TEST_CASE("intrinsics and frame validation") {
    CameraIntrinsics k;
    CHECK_NOTHROW(k.validate());
    k.cx = 640;
    CHECK_THROWS_AS(k.validate(), Error);
    k = CameraIntrinsics{};
    k.fy = 0;
    CHECK_THROWS_AS(k.validate(), Error);

    RgbdFrame f{Image<double>(4, 3), Image<double>(4, 2), testing::small_intrinsics(4, 3)};
    try {
        f.validate();
        FAIL("expected mismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DimensionMismatch);
    }
}
