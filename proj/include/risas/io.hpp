#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "risas/core.hpp"
#include "risas/descriptor.hpp"
#include "risas/detector.hpp"
#include "risas/matching.hpp"
#include "risas/surface.hpp"
#include "risas/synth.hpp"

namespace risas::io {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

// PNG ----------------------------------------------------------------------

/// 8-bit gray, gray+alpha, RGB or RGBA; colour is reduced with BT.601 luma.
Image<double> read_gray_png(const fs::path& path);

/// 16-bit single-channel depth in millimeters, returned in meters.
Image<double> read_depth_png(const fs::path& path);

/// Intensities are rounded and clamped to 0..255.
void write_gray_png(const fs::path& path, const Image<double>& gray);

/// Meters rounded to whole millimeters; invalid depth is written as 0.
void write_depth_png(const fs::path& path, const Image<double>& depth);

/// round(0.299 r + 0.587 g + 0.114 b).
std::uint8_t luma(std::uint8_t r, std::uint8_t g, std::uint8_t b);

// JSON ---------------------------------------------------------------------

Json read_json(const fs::path& path);
void write_text(const fs::path& path, const std::string& text);

Json to_json(const CameraIntrinsics& k);
CameraIntrinsics intrinsics_from_json(const Json& j);

Json to_json(const Pose& pose);
Pose pose_from_json(const Json& j);

Json to_json(const Texture& t);
Texture texture_from_json(const Json& j);

Json to_json(const SceneSpec& spec);
SceneSpec scene_from_json(const Json& j);

Json to_json(std::span<const Keypoint> keypoints);
/// Positions are re-derived by back-projection through `k`.
std::vector<Keypoint> keypoints_from_json(const Json& j, const CameraIntrinsics& k);

// Frames ---------------------------------------------------------------------

RgbdFrame load_frame(const fs::path& color, const fs::path& depth,
                     const CameraIntrinsics& intrinsics);
RgbdFrame load_frame(const fs::path& color, const fs::path& depth,
                     const fs::path& intrinsics);

// Descriptor file ------------------------------------------------------------

/// Little-endian: "RISD", u32 count, u32 dim, then per record
/// f32 u, f32 v, f32 depth, f32 theta, dim x f32 bins.
void write_descriptors(const fs::path& path, std::span<const Descriptor> descriptors);
std::vector<Descriptor> read_descriptors(const fs::path& path,
                                         const CameraIntrinsics& k);

// Tables ---------------------------------------------------------------------

std::string matches_csv(std::span<const Match> matches);
std::string pr_csv(const PrCurve& curve);
std::string pr_svg(const PrCurve& curve);

/// Writes I_dp and the three angle-label channels as 8-bit PNGs.
void dump_intermediates(const fs::path& dir, const AngleLabels& labels,
                        const DotProductImage& dp, const std::string& prefix = "");

}  // namespace risas::io
