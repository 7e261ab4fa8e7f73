#pragma once

#include <vector>

#include "risas/core.hpp"
#include "risas/surface.hpp"

namespace risas {

struct DetectorParams {
    /// Weight of the appearance channel; 1 - tau goes to the shape channel.
    double tau = 0.8;
    double window_sigma = 2.0;
    double harris_k = 0.04;
    int nms_radius = 4;
    int max_keypoints = 1000;
    /// Fraction of the frame's maximum response a keypoint must reach.
    double response_floor = 0.01;

    void validate() const;
    bool operator==(const DetectorParams&) const = default;
};

struct Keypoint {
    int u = 0;
    int v = 0;
    double response = 0.0;
    double depth = 0.0;
    Point3 position = Point3::Zero();

    bool operator==(const Keypoint&) const = default;
};

/// Second-moment matrix entries (xx, xy, yy) per pixel.
struct StructureTensor {
    Image<double> xx;
    Image<double> xy;
    Image<double> yy;
};

/// Sobel gradients (scaled to unit-step derivatives) of one channel.
/// Pixels flagged in `invalid` contribute zero gradient wherever their
/// 3x3 neighbourhood touches them.
void sobel(const Image<double>& img, const Image<unsigned char>* invalid,
           Image<double>& gx, Image<double>& gy);

/// Separable Gaussian blur truncated at 3 sigma, replicated borders.
Image<double> gaussian_blur(const Image<double>& img, double sigma);

StructureTensor structure_tensor(const Image<double>& img,
                                 const Image<unsigned char>* invalid, double sigma);

/// det(M) - k trace(M)^2 with M = tau M_gray + (1 - tau) M_shape.
Image<double> blended_response(const StructureTensor& gray_tensor,
                               const StructureTensor& shape_tensor, double tau,
                               double harris_k);

Image<double> blended_response(const RgbdFrame& frame, const DotProductImage& dp,
                               const DetectorParams& params);

/// Threshold, non-maximum suppression and top-K selection over a response map.
std::vector<Keypoint> select_keypoints(const Image<double>& response,
                                       const RgbdFrame& frame,
                                       const DetectorParams& params);

std::vector<Keypoint> detect(const RgbdFrame& frame, const DotProductImage& dp,
                             const DetectorParams& params);

}  // namespace risas
