#include <doctest.h>

#include <random>

#include "risas/matching.hpp"
#include "scenes.hpp"

using namespace risas;
using risas::testing::deg;

namespace {

std::vector<std::vector<double>> random_descriptors(std::mt19937& rng, std::size_t n,
                                                    std::size_t dim = 192) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::vector<std::vector<double>> out(n, std::vector<double>(dim));
    for (auto& d : out) {
        double sum = 0.0;
        for (double& x : d)
            sum += (x = uni(rng));
        for (double& x : d)
            x /= sum;
    }
    return out;
}

// Points spaced far beyond the correctness radius.
std::vector<Point3> grid_points(std::size_t n) {
    std::vector<Point3> out;
    for (std::size_t i = 0; i < n; ++i)
        out.push_back(Point3(0.3 * static_cast<double>(i % 7), 0.3 * static_cast<double>(i / 7), 2.0));
    return out;
}

}  // namespace

TEST_CASE("descriptor distance") {
    const std::vector<double> a{0.0, 3.0}, b{4.0, 0.0};
    CHECK(descriptor_distance(a, b) == 5.0);
    CHECK(descriptor_distance(a, a) == 0.0);
    CHECK_THROWS_AS(descriptor_distance(a, std::vector<double>{1.0}), Error);
}

TEST_CASE("identical descriptor lists match one-to-one") {
    std::mt19937 rng(1);
    const auto d = random_descriptors(rng, 30);
    const auto m = nndr_match(d, d, 0.8);
    REQUIRE(m.size() == 30);
    for (std::size_t i = 0; i < m.size(); ++i) {
        CHECK(m[i].index_a == i);
        CHECK(m[i].index_b == i);
        CHECK(m[i].distance == 0.0);
        CHECK(m[i].ratio == 0.0);
    }
}

TEST_CASE("ratio of nearest to second nearest") {
    const std::vector<std::vector<double>> a{{0.0}};
    const std::vector<std::vector<double>> b{{0.5}, {0.1}, {0.9}};
    auto m = nndr_match(a, b, 0.8);
    REQUIRE(m.size() == 1);
    CHECK(m[0].index_b == 1);
    CHECK(m[0].distance == doctest::Approx(0.1));
    CHECK(m[0].ratio == doctest::Approx(0.2));
    CHECK(nndr_match(a, b, 0.19).empty());
    // Boundary is inclusive.
    CHECK(nndr_match(a, b, m[0].ratio).size() == 1);
}

TEST_CASE("matching edge cases") {
    const std::vector<std::vector<double>> none;
    const std::vector<std::vector<double>> one{{1.0, 0.0}};
    CHECK(nndr_match(none, one, 0.8).empty());
    CHECK(nndr_match(one, none, 0.8).empty());

    // A single candidate always passes.
    const std::vector<std::vector<double>> far{{0.0, 5.0}};
    const auto m = nndr_match(one, far, 0.1);
    REQUIRE(m.size() == 1);
    CHECK(m[0].ratio == 0.0);

    // Two identical candidates: ratio 1, lower index wins.
    const std::vector<std::vector<double>> twins{{1.0, 0.0}, {1.0, 0.0}};
    const auto t = nndr_match(one, twins, 1.0);
    REQUIRE(t.size() == 1);
    CHECK(t[0].index_b == 0);
    CHECK(t[0].ratio == 1.0);
    CHECK(nndr_match(one, twins, 0.99).empty());

    const std::vector<std::vector<double>> wide{{1.0, 0.0, 0.0}};
    try {
        nndr_match(one, wide, 0.8);
        FAIL("expected mismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DimensionMismatch);
    }
}

TEST_CASE("a permuted copy is matched back through the permutation") {
    std::mt19937 rng(2);
    const auto a = random_descriptors(rng, 20);
    std::vector<std::size_t> perm(20);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::vector<double>> b(20);
    for (std::size_t i = 0; i < 20; ++i)
        b[perm[i]] = a[i];
    const auto m = nndr_match(a, b, 0.8);
    REQUIRE(m.size() == 20);
    for (const Match& x : m)
        CHECK(x.index_b == perm[x.index_a]);
}

TEST_CASE("match correctness under the relative pose") {
    const Pose rot = Pose::make(rot_z(deg(90)), Eigen::Vector3d::Zero());
    CHECK(is_correct({0, 1, 2}, {1, 0, 2}, rot, 0.05));
    CHECK(is_correct({0.03, 1, 2}, {1, 0, 2}, rot, 0.05));
    CHECK_FALSE(is_correct({0.06, 1, 2}, {1, 0, 2}, rot, 0.05));
    CHECK(is_correct({0.05, 0, 0}, {0, 0, 0}, Pose::identity(), 0.05));

    const Pose shift = Pose::make(Eigen::Matrix3d::Identity(), {0.0, 0.0, -0.8});
    CHECK(is_correct({0.1, 0.2, 1.2}, {0.1, 0.2, 2.0}, shift, 0.05));

    std::vector<Match> m{{0, 0, 0.0, 0.0, std::nullopt}, {1, 0, 0.0, 0.0, std::nullopt}};
    const std::vector<Point3> pa{{0, 1, 2}, {5, 5, 5}}, pb{{1, 0, 2}};
    label_correct(m, pa, pb, rot, 0.05);
    CHECK(*m[0].correct);
    CHECK_FALSE(*m[1].correct);
    CHECK(inlier_percentage(m) == 0.5);

    std::vector<Match> bad{{2, 0, 0.0, 0.0, std::nullopt}};
    CHECK_THROWS_AS(label_correct(bad, pa, pb, rot, 0.05), Error);
}

TEST_CASE("inlier percentage") {
    CHECK(inlier_percentage({}) == 0.0);
    std::vector<Match> m(4);
    m[0].correct = true;
    m[1].correct = true;
    m[2].correct = true;
    m[3].correct = false;
    CHECK(inlier_percentage(m) == 0.75);
}

TEST_CASE("precision-recall on identical frames is perfect") {
    std::mt19937 rng(3);
    const auto d = random_descriptors(rng, 25);
    const auto p = grid_points(25);
    const PrCurve c = pr_curve(d, d, p, p, Pose::identity(), EvalConfig{});
    CHECK(c.correspondences == 25);
    REQUIRE(c.points.size() == 10);
    for (const PrPoint& pt : c.points) {
        CHECK(pt.precision == 1.0);
        CHECK(pt.recall == 1.0);
        CHECK_FALSE(pt.degenerate);
    }
}

TEST_CASE("random descriptors give chance-level precision") {
    std::mt19937 rng(4);
    const std::size_t n = 10;
    const auto p = grid_points(n);
    std::size_t returned = 0, correct = 0;
    for (int trial = 0; trial < 2000; ++trial) {
        const auto a = random_descriptors(rng, n, 16);
        const auto b = random_descriptors(rng, n, 16);
        const PrCurve c = pr_curve(a, b, p, p, Pose::identity(), EvalConfig{});
        returned += c.points.back().returned;
        correct += c.points.back().correct;
    }
    CHECK(returned == 2000 * n);
    const double precision = static_cast<double>(correct) / static_cast<double>(returned);
    CHECK(std::abs(precision - 1.0 / n) < 0.01);
}

TEST_CASE("an empty threshold is a degenerate point") {
    const std::vector<std::vector<double>> a{{0.0}}, b{{0.5}, {0.6}};
    const std::vector<Point3> pa{{0, 0, 1}}, pb{{0, 0, 1}, {1, 0, 1}};
    EvalConfig cfg;
    cfg.ratio_sweep = {0.01, 1.0};
    const PrCurve c = pr_curve(a, b, pa, pb, Pose::identity(), cfg);
    CHECK(c.points[0].degenerate);
    CHECK(c.points[0].returned == 0);
    CHECK(c.points[0].precision == 1.0);
    CHECK(c.points[0].recall == 0.0);
    CHECK(c.points[1].returned == 1);
    CHECK(c.points[1].recall == 1.0);
}

TEST_CASE("returned sets are nested in the threshold") {
    std::mt19937 rng(5);
    const auto a = random_descriptors(rng, 40, 8);
    const auto b = random_descriptors(rng, 40, 8);
    const auto p = grid_points(40);
    const PrCurve c = pr_curve(a, b, p, p, Pose::identity(), EvalConfig{});
    for (std::size_t i = 1; i < c.points.size(); ++i) {
        CHECK(c.points[i - 1].returned <= c.points[i].returned);
        CHECK(c.points[i - 1].correct <= c.points[i].correct);
        CHECK(c.points[i - 1].recall <= c.points[i].recall);
    }
    for (double r : EvalConfig{}.ratio_sweep) {
        const auto lo = nndr_match(a, b, r);
        const auto hi = nndr_match(a, b, std::min(1.0, r + 0.1));
        for (const Match& m : lo)
            CHECK(std::find(hi.begin(), hi.end(), m) != hi.end());
    }
}

TEST_CASE("correctness labels are invariant to a common rigid motion") {
    std::mt19937 rng(6);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const Pose rel = Pose::make(
            Eigen::Quaterniond(g(rng), g(rng), g(rng), g(rng)).normalized().toRotationMatrix(),
            {uni(rng), uni(rng), uni(rng)});
        const Pose motion = Pose::make(
            Eigen::Quaterniond(g(rng), g(rng), g(rng), g(rng)).normalized().toRotationMatrix(),
            {uni(rng), uni(rng), uni(rng)});
        const Point3 pb(uni(rng), uni(rng), 2.0 + uni(rng));
        const Point3 pa = transform(pb, rel) + 0.06 * Eigen::Vector3d(uni(rng), uni(rng), uni(rng));
        // Move both frames by the same motion; the relative pose conjugates.
        const Pose rel2 = motion * rel * motion.inverse();
        CHECK(is_correct(pa, pb, rel, 0.05) ==
              is_correct(transform(pa, motion), transform(pb, motion), rel2, 0.05));
    }
}

TEST_CASE("matching is deterministic and ordered by the first list") {
    std::mt19937 rng(7);
    const auto a = random_descriptors(rng, 50, 12);
    const auto b = random_descriptors(rng, 60, 12);
    const auto m1 = nndr_match(a, b, 0.9);
    const auto m2 = nndr_match(a, b, 0.9);
    CHECK(m1 == m2);
    for (std::size_t i = 1; i < m1.size(); ++i)
        CHECK(m1[i - 1].index_a < m1[i].index_a);
}

TEST_CASE("eval config validation") {
    EvalConfig c;
    CHECK_NOTHROW(c.validate());
    c.ratio_sweep = {0.5, 0.4};
    CHECK_THROWS_AS(c.validate(), Error);
    c = EvalConfig{};
    c.d_min = 0.0;
    CHECK_THROWS_AS(c.validate(), Error);
}
