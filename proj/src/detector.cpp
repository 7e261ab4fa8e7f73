#include "risas/detector.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace risas {

void DetectorParams::validate() const {
    if (!(tau >= 0.0 && tau <= 1.0))
        throw Error(ErrorCode::InvalidArgument, "tau must lie in [0, 1]");
    if (!(window_sigma > 0.0))
        throw Error(ErrorCode::InvalidArgument, "window_sigma must be positive");
    if (nms_radius < 1)
        throw Error(ErrorCode::InvalidArgument, "nms_radius must be >= 1");
    if (max_keypoints < 0)
        throw Error(ErrorCode::InvalidArgument, "max_keypoints must be >= 0");
    if (!(response_floor >= 0.0 && response_floor <= 1.0))
        throw Error(ErrorCode::InvalidArgument, "response_floor must lie in [0, 1]");
}

namespace {

int clamp_index(int i, int n) { return std::clamp(i, 0, n - 1); }

int kernel_radius(double sigma) { return static_cast<int>(std::ceil(3.0 * sigma)); }

}  // namespace

void sobel(const Image<double>& img, const Image<unsigned char>* invalid,
           Image<double>& gx, Image<double>& gy) {
    const int w = img.width(), h = img.height();
    gx = Image<double>(w, h, 0.0);
    gy = Image<double>(w, h, 0.0);
    for (int v = 0; v < h; ++v) {
        for (int u = 0; u < w; ++u) {
            double s[3][3];
            bool usable = true;
            for (int dy = -1; dy <= 1 && usable; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const int x = clamp_index(u + dx, w), y = clamp_index(v + dy, h);
                    if (invalid && (*invalid)(x, y)) {
                        usable = false;
                        break;
                    }
                    s[dy + 1][dx + 1] = img(x, y);
                }
            }
            if (!usable)
                continue;
            gx(u, v) = ((s[0][2] + 2.0 * s[1][2] + s[2][2]) -
                        (s[0][0] + 2.0 * s[1][0] + s[2][0])) / 8.0;
            gy(u, v) = ((s[2][0] + 2.0 * s[2][1] + s[2][2]) -
                        (s[0][0] + 2.0 * s[0][1] + s[0][2])) / 8.0;
        }
    }
}

Image<double> gaussian_blur(const Image<double>& img, double sigma) {
    const int r = kernel_radius(sigma);
    std::vector<double> kernel(2 * r + 1);
    for (int i = -r; i <= r; ++i)
        kernel[i + r] = std::exp(-0.5 * i * i / (sigma * sigma));
    const double norm = std::accumulate(kernel.begin(), kernel.end(), 0.0);
    for (double& k : kernel)
        k /= norm;

    const int w = img.width(), h = img.height();
    Image<double> tmp(w, h, 0.0), out(w, h, 0.0);
    for (int v = 0; v < h; ++v)
        for (int u = 0; u < w; ++u) {
            double acc = 0.0;
            for (int i = -r; i <= r; ++i)
                acc += kernel[i + r] * img(clamp_index(u + i, w), v);
            tmp(u, v) = acc;
        }
    for (int v = 0; v < h; ++v)
        for (int u = 0; u < w; ++u) {
            double acc = 0.0;
            for (int i = -r; i <= r; ++i)
                acc += kernel[i + r] * tmp(u, clamp_index(v + i, h));
            out(u, v) = acc;
        }
    return out;
}

StructureTensor structure_tensor(const Image<double>& img,
                                 const Image<unsigned char>* invalid, double sigma) {
    Image<double> gx, gy;
    sobel(img, invalid, gx, gy);
    const int w = img.width(), h = img.height();
    Image<double> xx(w, h), xy(w, h), yy(w, h);
    for (int v = 0; v < h; ++v)
        for (int u = 0; u < w; ++u) {
            xx(u, v) = gx(u, v) * gx(u, v);
            xy(u, v) = gx(u, v) * gy(u, v);
            yy(u, v) = gy(u, v) * gy(u, v);
        }
    return {gaussian_blur(xx, sigma), gaussian_blur(xy, sigma), gaussian_blur(yy, sigma)};
}

Image<double> blended_response(const StructureTensor& gray_tensor,
                               const StructureTensor& shape_tensor, double tau,
                               double harris_k) {
    if (!gray_tensor.xx.same_size(shape_tensor.xx))
        throw Error(ErrorCode::DimensionMismatch, "tensor sizes differ");
    const int w = gray_tensor.xx.width(), h = gray_tensor.xx.height();
    Image<double> out(w, h, 0.0);
    for (int v = 0; v < h; ++v)
        for (int u = 0; u < w; ++u) {
            const double a = tau * gray_tensor.xx(u, v) + (1.0 - tau) * shape_tensor.xx(u, v);
            const double b = tau * gray_tensor.xy(u, v) + (1.0 - tau) * shape_tensor.xy(u, v);
            const double c = tau * gray_tensor.yy(u, v) + (1.0 - tau) * shape_tensor.yy(u, v);
            const double trace = a + c;
            out(u, v) = (a * c - b * b) - harris_k * trace * trace;
        }
    return out;
}

Image<double> blended_response(const RgbdFrame& frame, const DotProductImage& dp,
                               const DetectorParams& params) {
    params.validate();
    if (!frame.gray.same_size(dp.values))
        throw Error(ErrorCode::DimensionMismatch,
                    "dot-product image does not match the frame");
    const int w = frame.width(), h = frame.height();
    Image<double> shape(w, h, 0.0);
    Image<unsigned char> invalid(w, h, 0);
    for (int v = 0; v < h; ++v)
        for (int u = 0; u < w; ++u) {
            if (dp.valid(u, v))
                shape(u, v) = dp.values(u, v);
            else
                invalid(u, v) = 1;
        }
    const StructureTensor gray_tensor =
        structure_tensor(frame.gray, nullptr, params.window_sigma);
    const StructureTensor shape_tensor =
        structure_tensor(shape, &invalid, params.window_sigma);
    return blended_response(gray_tensor, shape_tensor, params.tau, params.harris_k);
}

std::vector<Keypoint> select_keypoints(const Image<double>& response,
                                       const RgbdFrame& frame,
                                       const DetectorParams& params) {
    params.validate();
    if (!response.same_size(frame.depth))
        throw Error(ErrorCode::DimensionMismatch, "response map does not match the frame");

    const int w = response.width(), h = response.height();
    // Borders see replicated pixels through the Sobel and Gaussian stencils.
    const int margin = kernel_radius(params.window_sigma) + 1;
    double max_response = 0.0;
    for (int v = margin; v < h - margin; ++v)
        for (int u = margin; u < w - margin; ++u)
            max_response = std::max(max_response, response(u, v));
    if (!(max_response > 0.0))
        return {};
    const double threshold = params.response_floor * max_response;

    const int r = params.nms_radius;
    const int r_sq = r * r;
    std::vector<Keypoint> candidates;
    for (int v = margin; v < h - margin; ++v) {
        for (int u = margin; u < w - margin; ++u) {
            const double value = response(u, v);
            if (!(value > 0.0) || value < threshold || !frame.valid_depth(u, v))
                continue;
            bool is_max = true;
            for (int dy = -r; dy <= r && is_max; ++dy)
                for (int dx = -r; dx <= r; ++dx) {
                    if (dx * dx + dy * dy > r_sq || !response.contains(u + dx, v + dy))
                        continue;
                    if (response(u + dx, v + dy) > value) {
                        is_max = false;
                        break;
                    }
                }
            if (!is_max)
                continue;
            Keypoint kp;
            kp.u = u;
            kp.v = v;
            kp.response = value;
            kp.depth = frame.depth(u, v);
            kp.position = backproject(u, v, kp.depth, frame.intrinsics);
            candidates.push_back(kp);
        }
    }

    // Candidates are in scanline order, so stable_sort breaks ties by it.
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Keypoint& a, const Keypoint& b) {
                         return a.response > b.response;
                     });

    std::vector<Keypoint> kept;
    for (const Keypoint& c : candidates) {
        if (static_cast<int>(kept.size()) >= params.max_keypoints)
            break;
        const bool clear = std::none_of(kept.begin(), kept.end(), [&](const Keypoint& k) {
            const int du = k.u - c.u, dv = k.v - c.v;
            return du * du + dv * dv <= r_sq;
        });
        if (clear)
            kept.push_back(c);
    }
    return kept;
}

std::vector<Keypoint> detect(const RgbdFrame& frame, const DotProductImage& dp,
                             const DetectorParams& params) {
    return select_keypoints(blended_response(frame, dp, params), frame, params);
}

}  // namespace risas
