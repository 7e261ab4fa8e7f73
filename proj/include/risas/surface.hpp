#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "risas/core.hpp"

namespace risas {

struct NormalParams {
    int window = 11;
    /// Fraction of the window that must hold usable neighbours.
    double min_valid_fraction = 0.3;
    /// Neighbours farther than this from the centre point (meters) are not
    /// part of the local surface.
    double max_neighbor_distance = 0.1;
};

/// Per-pixel unit normals. Invalid pixels hold NaN.
class NormalImage {
public:
    NormalImage() = default;
    NormalImage(int width, int height);

    int width() const noexcept { return normals_.width(); }
    int height() const noexcept { return normals_.height(); }

    bool valid(int u, int v) const { return !std::isnan(normals_(u, v).x()); }
    const Eigen::Vector3d& operator()(int u, int v) const { return normals_(u, v); }
    void set(int u, int v, const Eigen::Vector3d& n) { normals_(u, v) = n; }
    void invalidate(int u, int v);

    std::size_t valid_count() const;

private:
    Image<Eigen::Vector3d> normals_;
};

using LabelTriple = std::array<int, 3>;

/// Quantized angles between each normal and the camera x, y, z axes.
/// Labels are 1..n_s; 0 marks an invalid pixel.
struct AngleLabels {
    Image<LabelTriple> labels;
    int n_s = 4;

    bool valid(int u, int v) const { return labels(u, v)[0] != 0; }
};

struct MainNormal {
    LabelTriple label_triple{};
    Eigen::Vector3d vector = Eigen::Vector3d::Zero();
};

/// |<n, main>| scaled to 0..255. Invalid pixels hold kInvalid.
struct DotProductImage {
    static constexpr std::int16_t kInvalid = -1;

    Image<std::int16_t> values;

    bool valid(int u, int v) const { return values(u, v) != kInvalid; }
};

NormalImage estimate_normals(const RgbdFrame& frame, const NormalParams& params = {});

/// Sector index ceil(angle / (180 / n_s)) clamped to [1, n_s].
int angle_sector(double angle_deg, int n_s);

LabelTriple label_normal(const Eigen::Vector3d& n, int n_s);

AngleLabels label_angles(const NormalImage& nimg, int n_s = 4);

MainNormal main_normal(const AngleLabels& labels);

/// Unit vector from the midpoint angles of the given sectors.
Eigen::Vector3d main_normal_vector(const LabelTriple& triple, int n_s);

DotProductImage dot_product_image(const NormalImage& nimg, const MainNormal& main);

}  // namespace risas
