#include "risas/surface.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Eigenvalues>

namespace risas {

namespace {

const Eigen::Vector3d kInvalidNormal = Eigen::Vector3d::Constant(
    std::numeric_limits<double>::quiet_NaN());

double rad_to_deg(double r) { return r * 180.0 / std::numbers::pi; }

}  // namespace

NormalImage::NormalImage(int width, int height)
    : normals_(width, height, kInvalidNormal) {}

void NormalImage::invalidate(int u, int v) { normals_(u, v) = kInvalidNormal; }

std::size_t NormalImage::valid_count() const {
    return static_cast<std::size_t>(std::count_if(
        normals_.pixels().begin(), normals_.pixels().end(),
        [](const Eigen::Vector3d& n) { return !std::isnan(n.x()); }));
}

NormalImage estimate_normals(const RgbdFrame& frame, const NormalParams& params) {
    if (params.window < 3 || params.window % 2 == 0)
        throw Error(ErrorCode::InvalidArgument, "normal window must be odd and >= 3");

    const int w = frame.width();
    const int h = frame.height();
    const auto& k = frame.intrinsics;
    NormalImage out(w, h);

    // Back-project once; NaN marks invalid depth.
    Image<Eigen::Vector3d> cloud(w, h, kInvalidNormal);
    for (int v = 0; v < h; ++v)
        for (int u = 0; u < w; ++u)
            if (frame.valid_depth(u, v))
                cloud(u, v) = backproject(u, v, frame.depth(u, v), k);

    const int half = params.window / 2;
    const int min_count = static_cast<int>(
        std::ceil(params.min_valid_fraction * params.window * params.window));
    const double max_sq = params.max_neighbor_distance * params.max_neighbor_distance;

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver;
    for (int v = 0; v < h; ++v) {
        for (int u = 0; u < w; ++u) {
            const Eigen::Vector3d& c = cloud(u, v);
            if (std::isnan(c.x()))
                continue;

            Eigen::Vector3d sum = Eigen::Vector3d::Zero();
            Eigen::Matrix3d sum_sq = Eigen::Matrix3d::Zero();
            int count = 0;
            const int v0 = std::max(0, v - half), v1 = std::min(h - 1, v + half);
            const int u0 = std::max(0, u - half), u1 = std::min(w - 1, u + half);
            for (int y = v0; y <= v1; ++y) {
                for (int x = u0; x <= u1; ++x) {
                    const Eigen::Vector3d& p = cloud(x, y);
                    if (std::isnan(p.x()))
                        continue;
                    const Eigen::Vector3d d = p - c;
                    if (d.squaredNorm() >= max_sq)
                        continue;
                    sum += d;
                    sum_sq.noalias() += d * d.transpose();
                    ++count;
                }
            }
            if (count < min_count)
                continue;

            const Eigen::Vector3d mean = sum / count;
            const Eigen::Matrix3d cov = sum_sq / count - mean * mean.transpose();
            solver.compute(cov);
            if (solver.info() != Eigen::Success)
                continue;
            const Eigen::Vector3d ev = solver.eigenvalues();
            // Collinear or coincident points do not define a plane.
            if (!(ev(2) > 0.0) || ev(1) <= 1e-12 * ev(2))
                continue;
            Eigen::Vector3d n = solver.eigenvectors().col(0).normalized();
            if (n.z() > 0.0)
                n = -n;
            out.set(u, v, n);
        }
    }
    return out;
}

int angle_sector(double angle_deg, int n_s) {
    // Right-open sectors: a boundary angle belongs to the upper sector. The
    // slack absorbs acos round-off so that e.g. 90 deg lands on the boundary.
    const double width = 180.0 / n_s;
    const int sector = static_cast<int>(std::floor(angle_deg / width + 1e-9)) + 1;
    return std::clamp(sector, 1, n_s);
}

LabelTriple label_normal(const Eigen::Vector3d& n, int n_s) {
    LabelTriple out{};
    for (int axis = 0; axis < 3; ++axis) {
        const double angle = rad_to_deg(std::acos(std::clamp(n(axis), -1.0, 1.0)));
        out[axis] = angle_sector(angle, n_s);
    }
    return out;
}

AngleLabels label_angles(const NormalImage& nimg, int n_s) {
    if (n_s < 2)
        throw Error(ErrorCode::InvalidArgument, "sector count must be >= 2");
    AngleLabels out{Image<LabelTriple>(nimg.width(), nimg.height(), LabelTriple{0, 0, 0}),
                    n_s};
    for (int v = 0; v < nimg.height(); ++v)
        for (int u = 0; u < nimg.width(); ++u)
            if (nimg.valid(u, v))
                out.labels(u, v) = label_normal(nimg(u, v), n_s);
    return out;
}

Eigen::Vector3d main_normal_vector(const LabelTriple& triple, int n_s) {
    const double width = std::numbers::pi / n_s;
    Eigen::Vector3d dir;
    for (int axis = 0; axis < 3; ++axis)
        dir(axis) = std::cos((triple[axis] - 0.5) * width);
    const double len = dir.norm();
    if (!(len > 0.0))
        throw Error(ErrorCode::DegenerateDirection, "main normal has zero length");
    return dir / len;
}

MainNormal main_normal(const AngleLabels& labels) {
    const int n_s = labels.n_s;
    std::vector<std::array<std::size_t, 3>> hist(n_s + 1, {0, 0, 0});
    std::size_t valid = 0;
    for (const LabelTriple& t : labels.labels.pixels()) {
        if (t[0] == 0)
            continue;
        ++valid;
        for (int axis = 0; axis < 3; ++axis)
            ++hist[t[axis]][axis];
    }
    if (valid == 0)
        throw Error(ErrorCode::EmptyFrame, "no valid normals to vote on");

    MainNormal out;
    for (int axis = 0; axis < 3; ++axis) {
        int best = 1;
        for (int s = 2; s <= n_s; ++s)
            if (hist[s][axis] > hist[best][axis])
                best = s;
        out.label_triple[axis] = best;
    }
    out.vector = main_normal_vector(out.label_triple, n_s);
    return out;
}

DotProductImage dot_product_image(const NormalImage& nimg, const MainNormal& main) {
    DotProductImage out{Image<std::int16_t>(nimg.width(), nimg.height(),
                                            DotProductImage::kInvalid)};
    for (int v = 0; v < nimg.height(); ++v) {
        for (int u = 0; u < nimg.width(); ++u) {
            if (!nimg.valid(u, v))
                continue;
            const double dot = std::min(1.0, std::abs(nimg(u, v).dot(main.vector)));
            out.values(u, v) = static_cast<std::int16_t>(std::lround(255.0 * dot));
        }
    }
    return out;
}

}  // namespace risas
