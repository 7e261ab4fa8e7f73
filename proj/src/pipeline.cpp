#include "risas/pipeline.hpp"

namespace risas {

NormalParams PipelineConfig::normal_params() const {
    NormalParams p;
    p.window = normal_window;
    p.max_neighbor_distance = normal_max_distance;
    return p;
}

void PipelineConfig::validate() const {
    detector.validate();
    descriptor.validate();
    eval.validate();
    if (normal_window < 3 || normal_window % 2 == 0)
        throw Error(ErrorCode::InvalidArgument, "normal_window must be odd and >= 3");
    if (!(normal_max_distance > 0.0))
        throw Error(ErrorCode::InvalidArgument, "normal_max_distance must be positive");
    if (n_s < 2)
        throw Error(ErrorCode::InvalidArgument, "n_s must be >= 2");
}

io::Json to_json(const PipelineConfig& c) {
    using io::Json;
    return Json{
        {"detector",
         Json{{"tau", c.detector.tau},
              {"window_sigma", c.detector.window_sigma},
              {"harris_k", c.detector.harris_k},
              {"nms_radius", c.detector.nms_radius},
              {"max_keypoints", c.detector.max_keypoints},
              {"response_floor", c.detector.response_floor}}},
        {"descriptor",
         Json{{"n_pie", c.descriptor.n_pie},
              {"n_bin", c.descriptor.n_bin},
              {"n_vec", c.descriptor.n_vec},
              {"rho_bar", c.descriptor.rho_bar},
              {"gamma", c.descriptor.gamma},
              {"t_bg", c.descriptor.t_bg},
              {"radius_offset", c.descriptor.radius_offset},
              {"radius_gain", c.descriptor.radius_gain},
              {"radius_ratio_cap", c.descriptor.radius_ratio_cap},
              {"radius_min", c.descriptor.radius_min},
              {"min_inliers", c.descriptor.min_inliers}}},
        {"eval",
         Json{{"d_min", c.eval.d_min},
              {"match_ratio", c.eval.match_ratio},
              {"ratio_sweep", c.eval.ratio_sweep}}},
        {"normal_window", c.normal_window},
        {"normal_max_distance", c.normal_max_distance},
        {"n_s", c.n_s},
    };
}

namespace {

template <typename T>
void read_into(const io::Json& j, const char* key, T& out) {
    if (!j.contains(key))
        return;
    try {
        out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("bad config value ") + key + ": " + e.what());
    }
}

}  // namespace

PipelineConfig config_from_json(const io::Json& j, const PipelineConfig& base) {
    if (!j.is_object())
        throw Error(ErrorCode::ParseError, "config must be a JSON object");
    PipelineConfig c = base;
    if (j.contains("detector")) {
        const auto& d = j.at("detector");
        read_into(d, "tau", c.detector.tau);
        read_into(d, "window_sigma", c.detector.window_sigma);
        read_into(d, "harris_k", c.detector.harris_k);
        read_into(d, "nms_radius", c.detector.nms_radius);
        read_into(d, "max_keypoints", c.detector.max_keypoints);
        read_into(d, "response_floor", c.detector.response_floor);
    }
    if (j.contains("descriptor")) {
        const auto& d = j.at("descriptor");
        read_into(d, "n_pie", c.descriptor.n_pie);
        read_into(d, "n_bin", c.descriptor.n_bin);
        read_into(d, "n_vec", c.descriptor.n_vec);
        read_into(d, "rho_bar", c.descriptor.rho_bar);
        read_into(d, "gamma", c.descriptor.gamma);
        read_into(d, "t_bg", c.descriptor.t_bg);
        read_into(d, "radius_offset", c.descriptor.radius_offset);
        read_into(d, "radius_gain", c.descriptor.radius_gain);
        read_into(d, "radius_ratio_cap", c.descriptor.radius_ratio_cap);
        read_into(d, "radius_min", c.descriptor.radius_min);
        read_into(d, "min_inliers", c.descriptor.min_inliers);
    }
    if (j.contains("eval")) {
        const auto& e = j.at("eval");
        read_into(e, "d_min", c.eval.d_min);
        read_into(e, "match_ratio", c.eval.match_ratio);
        read_into(e, "ratio_sweep", c.eval.ratio_sweep);
    }
    read_into(j, "normal_window", c.normal_window);
    read_into(j, "normal_max_distance", c.normal_max_distance);
    read_into(j, "n_s", c.n_s);
    c.validate();
    return c;
}

std::vector<std::vector<double>> FrameFeatures::descriptor_vectors() const {
    std::vector<std::vector<double>> out;
    out.reserve(described.descriptors.size());
    for (const Descriptor& d : described.descriptors)
        out.push_back(d.bins);
    return out;
}

std::vector<Point3> FrameFeatures::descriptor_points() const {
    std::vector<Point3> out;
    out.reserve(described.descriptors.size());
    for (const Descriptor& d : described.descriptors)
        out.push_back(d.keypoint.position);
    return out;
}

FrameFeatures compute_surface(const RgbdFrame& frame, const PipelineConfig& config) {
    config.validate();
    FrameFeatures f;
    f.normals = estimate_normals(frame, config.normal_params());
    f.labels = label_angles(f.normals, config.n_s);
    try {
        f.main = main_normal(f.labels);
        f.dp = dot_product_image(f.normals, f.main);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::EmptyFrame)
            throw;
        // No geometry: the detector falls back to appearance only.
        f.dp.values = Image<std::int16_t>(frame.width(), frame.height(),
                                          DotProductImage::kInvalid);
        f.warnings.emplace_back(e.what());
    }
    return f;
}

FrameFeatures detect_features(const RgbdFrame& frame, const PipelineConfig& config) {
    FrameFeatures f = compute_surface(frame, config);
    f.keypoints = detect(frame, f.dp, config.detector);
    return f;
}

FrameFeatures extract_features(const RgbdFrame& frame, const PipelineConfig& config) {
    FrameFeatures f = detect_features(frame, config);
    f.described = describe_frame(frame, f.normals, f.keypoints, config.descriptor);
    return f;
}

PipelineReport run_pipeline(const PipelineConfig& config, const RgbdFrame& frame_a,
                            const RgbdFrame& frame_b, const Pose& b_to_a) {
    config.validate();
    PipelineReport report;
    FrameFeatures fa, fb;
    bool ok_a = true, ok_b = true;
    try {
        fa = extract_features(frame_a, config);
    } catch (const Error& e) {
        ok_a = false;
        report.errors.push_back(std::string("frame a: ") + e.what());
    }
    try {
        fb = extract_features(frame_b, config);
    } catch (const Error& e) {
        ok_b = false;
        report.errors.push_back(std::string("frame b: ") + e.what());
    }
    for (const auto& w : fa.warnings)
        report.errors.push_back("frame a: " + w);
    for (const auto& w : fb.warnings)
        report.errors.push_back("frame b: " + w);

    auto count_other = [](const DescribeResult& r) {
        return r.rejections.size() - r.rejected(RejectReason::Isotropic);
    };
    report.keypoints_a = fa.keypoints.size();
    report.keypoints_b = fb.keypoints.size();
    report.described_a = fa.described.descriptors.size();
    report.described_b = fb.described.descriptors.size();
    report.rejected_isotropic_a = fa.described.rejected(RejectReason::Isotropic);
    report.rejected_isotropic_b = fb.described.rejected(RejectReason::Isotropic);
    report.rejected_other_a = count_other(fa.described);
    report.rejected_other_b = count_other(fb.described);
    if (!ok_a || !ok_b) {
        report.complete = false;
        return report;
    }

    const auto desc_a = fa.descriptor_vectors();
    const auto desc_b = fb.descriptor_vectors();
    const auto pts_a = fa.descriptor_points();
    const auto pts_b = fb.descriptor_points();
    report.matches = nndr_match(desc_a, desc_b, config.eval.match_ratio);
    label_correct(report.matches, pts_a, pts_b, b_to_a, config.eval.d_min);
    report.matched = report.matches.size();
    for (const Match& m : report.matches)
        if (m.correct.value_or(false))
            ++report.correct;
    report.inlier_percentage = inlier_percentage(report.matches);
    report.pr = pr_curve(desc_a, desc_b, pts_a, pts_b, b_to_a, config.eval);
    return report;
}

io::Json to_json(const PipelineReport& r) {
    using io::Json;
    Json pr = Json::array();
    for (const PrPoint& p : r.pr.points)
        pr.push_back(Json{{"ratio", p.ratio},
                          {"precision", p.precision},
                          {"recall", p.recall},
                          {"returned", p.returned},
                          {"correct", p.correct},
                          {"degenerate", p.degenerate}});
    return Json{{"keypoints", Json{{"a", r.keypoints_a}, {"b", r.keypoints_b}}},
                {"described", Json{{"a", r.described_a}, {"b", r.described_b}}},
                {"rejected_isotropic",
                 Json{{"a", r.rejected_isotropic_a}, {"b", r.rejected_isotropic_b}}},
                {"rejected_other", Json{{"a", r.rejected_other_a}, {"b", r.rejected_other_b}}},
                {"matched", r.matched},
                {"correct", r.correct},
                {"inlier_percentage", r.inlier_percentage},
                {"ground_truth_correspondences", r.pr.correspondences},
                {"pr_curve", pr},
                {"complete", r.complete},
                {"errors", r.errors}};
}

}  // namespace risas
