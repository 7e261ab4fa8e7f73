#include "risas/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

namespace risas {

PerlinNoise::PerlinNoise(std::uint32_t seed) : perm_(512) {
    std::vector<int> p(256);
    std::iota(p.begin(), p.end(), 0);
    std::mt19937 rng(seed);
    std::shuffle(p.begin(), p.end(), rng);
    for (int i = 0; i < 512; ++i)
        perm_[i] = p[i & 255];
}

namespace {

double fade(double t) { return t * t * t * (t * (t * 6.0 - 15.0) + 10.0); }

double lerp(double t, double a, double b) { return a + t * (b - a); }

double grad(int hash, double x, double y, double z) {
    const int h = hash & 15;
    const double u = h < 8 ? x : y;
    const double v = h < 4 ? y : (h == 12 || h == 14 ? x : z);
    return ((h & 1) ? -u : u) + ((h & 2) ? -v : v);
}

}  // namespace

double PerlinNoise::operator()(double x, double y, double z) const {
    const double fx = std::floor(x), fy = std::floor(y), fz = std::floor(z);
    const int X = static_cast<int>(fx) & 255;
    const int Y = static_cast<int>(fy) & 255;
    const int Z = static_cast<int>(fz) & 255;
    x -= fx;
    y -= fy;
    z -= fz;
    const double u = fade(x), v = fade(y), w = fade(z);
    const auto& p = perm_;
    const int A = p[X] + Y, AA = p[A] + Z, AB = p[A + 1] + Z;
    const int B = p[X + 1] + Y, BA = p[B] + Z, BB = p[B + 1] + Z;
    const double r = lerp(
        w,
        lerp(v, lerp(u, grad(p[AA], x, y, z), grad(p[BA], x - 1, y, z)),
             lerp(u, grad(p[AB], x, y - 1, z), grad(p[BB], x - 1, y - 1, z))),
        lerp(v, lerp(u, grad(p[AA + 1], x, y, z - 1), grad(p[BA + 1], x - 1, y, z - 1)),
             lerp(u, grad(p[AB + 1], x, y - 1, z - 1), grad(p[BB + 1], x - 1, y - 1, z - 1))));
    return std::clamp(r, -1.0, 1.0);
}

double Texture::sample(const Eigen::Vector3d& local) const {
    double base = value;
    if (kind == TextureKind::Checkerboard) {
        const long parity = static_cast<long>(std::floor(local.x() / cell)) +
                            static_cast<long>(std::floor(local.y() / cell)) +
                            static_cast<long>(std::floor(local.z() / cell));
        base = (parity & 1L) ? light : dark;
    }
    const bool noisy = kind == TextureKind::Perlin || detail != 0.0;
    if (noisy) {
        thread_local std::map<std::uint32_t, PerlinNoise> cache;
        auto it = cache.find(seed);
        if (it == cache.end())
            it = cache.emplace(seed, PerlinNoise(seed)).first;
        const PerlinNoise& noise = it->second;
        const Eigen::Vector3d q = local / noise_scale;
        double n = 0.0, amp = 1.0, freq = 1.0, norm = 0.0;
        for (int octave = 0; octave < 3; ++octave) {
            n += amp * noise(q.x() * freq + 17.1 * octave, q.y() * freq,
                                q.z() * freq);
            norm += amp;
            amp *= 0.5;
            freq *= 2.0;
        }
        n /= norm;
        if (kind == TextureKind::Perlin)
            base = 0.5 * (dark + light) + 0.5 * (light - dark) * n * 2.0;
        else
            base += detail * n;
    }
    return std::clamp(base, 0.0, 255.0);
}

namespace {

struct HalfSpace {
    Eigen::Vector3d normal;
    double offset;  // normal . x <= offset inside
};

std::vector<HalfSpace> box_faces(const Eigen::Vector3d& size) {
    std::vector<HalfSpace> out;
    for (int axis = 0; axis < 3; ++axis) {
        out.push_back({Eigen::Vector3d::Unit(axis), 0.5 * size(axis)});
        out.push_back({-Eigen::Vector3d::Unit(axis), 0.5 * size(axis)});
    }
    return out;
}

std::vector<HalfSpace> wedge_faces(const Eigen::Vector3d& size) {
    const double w = size.x(), l = size.y(), h = size.z();
    std::vector<HalfSpace> out;
    out.push_back({Eigen::Vector3d::UnitZ(), 0.0});
    out.push_back({Eigen::Vector3d::UnitY(), 0.5 * l});
    out.push_back({-Eigen::Vector3d::UnitY(), 0.5 * l});
    const Eigen::Vector3d left = Eigen::Vector3d(-h, 0.0, -0.5 * w).normalized();
    const Eigen::Vector3d right = Eigen::Vector3d(h, 0.0, -0.5 * w).normalized();
    out.push_back({left, left.dot(Eigen::Vector3d(-0.5 * w, 0.0, 0.0))});
    out.push_back({right, right.dot(Eigen::Vector3d(0.5 * w, 0.0, 0.0))});
    return out;
}

std::optional<double> intersect_convex(const std::vector<HalfSpace>& faces,
                                       const Eigen::Vector3d& o, const Eigen::Vector3d& d) {
    double t_enter = -std::numeric_limits<double>::infinity();
    double t_exit = std::numeric_limits<double>::infinity();
    for (const HalfSpace& f : faces) {
        const double denom = f.normal.dot(d);
        const double num = f.offset - f.normal.dot(o);
        if (denom == 0.0) {
            if (num < 0.0)
                return std::nullopt;
            continue;
        }
        const double t = num / denom;
        if (denom < 0.0)
            t_enter = std::max(t_enter, t);
        else
            t_exit = std::min(t_exit, t);
    }
    if (t_enter > t_exit || !(t_enter > 0.0))
        return std::nullopt;
    return t_enter;
}

double convex_residual(const std::vector<HalfSpace>& faces, const Eigen::Vector3d& p) {
    // Distance to the nearest face plane; zero for points on the surface.
    double best = std::numeric_limits<double>::infinity();
    for (const HalfSpace& f : faces)
        best = std::min(best, std::abs(f.normal.dot(p) - f.offset));
    return best;
}

}  // namespace

std::optional<double> Primitive::intersect(const Eigen::Vector3d& origin,
                                           const Eigen::Vector3d& dir) const {
    const Eigen::Matrix3d rt = pose.rotation.transpose();
    const Eigen::Vector3d o = rt * (origin - pose.translation);
    const Eigen::Vector3d d = rt * dir;
    switch (type) {
        case PrimitiveType::Plane: {
            if (d.z() == 0.0)
                return std::nullopt;
            const double t = -o.z() / d.z();
            if (!(t > 0.0))
                return std::nullopt;
            const Eigen::Vector3d p = o + t * d;
            if (size.x() > 0.0 && std::abs(p.x()) > 0.5 * size.x())
                return std::nullopt;
            if (size.y() > 0.0 && std::abs(p.y()) > 0.5 * size.y())
                return std::nullopt;
            return t;
        }
        case PrimitiveType::Sphere: {
            const double r = size.x();
            const double a = d.squaredNorm();
            const double b = o.dot(d);
            const double c = o.squaredNorm() - r * r;
            const double disc = b * b - a * c;
            if (disc < 0.0)
                return std::nullopt;
            const double sq = std::sqrt(disc);
            double t = (-b - sq) / a;
            if (!(t > 0.0))
                t = (-b + sq) / a;
            if (!(t > 0.0))
                return std::nullopt;
            return t;
        }
        case PrimitiveType::Box:
            return intersect_convex(box_faces(size), o, d);
        case PrimitiveType::Wedge:
            return intersect_convex(wedge_faces(size), o, d);
    }
    return std::nullopt;
}

double Primitive::surface_residual(const Eigen::Vector3d& world) const {
    const Eigen::Vector3d p = pose.rotation.transpose() * (world - pose.translation);
    switch (type) {
        case PrimitiveType::Plane: return std::abs(p.z());
        case PrimitiveType::Sphere: return std::abs(p.norm() - size.x());
        case PrimitiveType::Box: return convex_residual(box_faces(size), p);
        case PrimitiveType::Wedge: return convex_residual(wedge_faces(size), p);
    }
    return std::numeric_limits<double>::infinity();
}

RgbdFrame render(const SceneSpec& spec) {
    const CameraIntrinsics& k = spec.intrinsics;
    k.validate();
    RgbdFrame frame{Image<double>(k.width, k.height, 0.0),
                    Image<double>(k.width, k.height, 0.0), k};

    std::mt19937 rng(spec.noise_seed);
    std::normal_distribution<double> gauss(0.0, spec.noise > 0.0 ? spec.noise : 1.0);

    const Eigen::Matrix3d& rot = spec.camera_pose.rotation;
    const Eigen::Vector3d& origin = spec.camera_pose.translation;
    std::size_t hits = 0;
    for (int v = 0; v < k.height; ++v) {
        for (int u = 0; u < k.width; ++u) {
            // z component 1 makes the ray parameter equal the camera depth.
            const Eigen::Vector3d ray_cam((u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0);
            const Eigen::Vector3d dir = rot * ray_cam;
            double best = std::numeric_limits<double>::infinity();
            const Primitive* hit = nullptr;
            for (const Primitive& prim : spec.primitives) {
                const auto t = prim.intersect(origin, dir);
                if (t && *t < best) {
                    best = *t;
                    hit = &prim;
                }
            }
            if (!hit)
                continue;
            ++hits;
            const Eigen::Vector3d world = origin + best * dir;
            const Eigen::Vector3d local =
                hit->pose.rotation.transpose() * (world - hit->pose.translation);
            const Texture& tex = hit->texture ? *hit->texture : spec.texture;
            frame.gray(u, v) = tex.sample(local);
            double depth = best;
            if (spec.noise > 0.0)
                depth = std::max(0.0, depth + gauss(rng));
            frame.depth(u, v) = depth;
        }
    }
    if (hits == 0)
        throw Error(ErrorCode::EmptyScene, "no primitive is visible");
    return frame;
}

FramePair render_pair(const SceneSpec& spec, const Pose& relative_pose) {
    SceneSpec second = spec;
    second.camera_pose = spec.camera_pose * relative_pose;
    return {render(spec), render(second), relative_pose};
}

double IlluminationMap::operator()(double x) const {
    x = std::clamp(x, 0.0, 1.0);
    switch (kind) {
        case IlluminationKind::Square: return x * x;
        case IlluminationKind::SquareRoot: return std::sqrt(x);
        case IlluminationKind::Cube: return x * x * x;
        case IlluminationKind::CubeRoot: return std::cbrt(x);
        case IlluminationKind::Gamma: return std::pow(x, gamma);
    }
    return x;
}

RgbdFrame relight(const RgbdFrame& frame, const IlluminationMap& map, bool quantize) {
    if (map.kind == IlluminationKind::Gamma && !(map.gamma > 0.0))
        throw Error(ErrorCode::InvalidArgument, "gamma must be positive");
    RgbdFrame out = frame;
    for (double& i : out.gray.pixels()) {
        const double mapped = 255.0 * map(i / 255.0);
        i = quantize ? std::round(mapped) : mapped;
    }
    return out;
}

}  // namespace risas
