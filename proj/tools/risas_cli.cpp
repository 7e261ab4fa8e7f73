// risas: command-line front end for the RGB-D keypoint pipeline.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "risas/io.hpp"
#include "risas/pipeline.hpp"
#include "risas/synth.hpp"

namespace fs = std::filesystem;
using namespace risas;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitPipeline = 3;

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

bool is_input_error(ErrorCode c) {
    switch (c) {
        case ErrorCode::FileNotFound:
        case ErrorCode::ParseError:
        case ErrorCode::UnsupportedBitDepth:
        case ErrorCode::DimensionMismatch:
        case ErrorCode::InvalidArgument:
        case ErrorCode::InvalidDepth:
            return true;
        default:
            return false;
    }
}

// Options shared by every subcommand.
struct Common {
    std::string config;
    std::string dump_dir;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config, "JSON file overriding pipeline parameters");
    cmd->add_option("--dump-intermediates", c.dump_dir,
                    "directory for dot-product and angle-label images");
}

PipelineConfig load_config(const Common& c) {
    if (c.config.empty())
        return {};
    return config_from_json(io::read_json(c.config));
}

CameraIntrinsics load_intrinsics(const std::string& path) {
    return path.empty() ? CameraIntrinsics{} : io::intrinsics_from_json(io::read_json(path));
}

Pose load_pose(const std::string& path) {
    return path.empty() ? Pose::identity() : io::pose_from_json(io::read_json(path));
}

void dump_surface(const Common& c, const FrameFeatures& f, const std::string& prefix = "") {
    if (!c.dump_dir.empty())
        io::dump_intermediates(c.dump_dir, f.labels, f.dp, prefix);
}

void warn(const FrameFeatures& f) {
    for (const auto& w : f.warnings)
        std::cerr << "warning: " << w << "\n";
}

// synth ---------------------------------------------------------------------

struct SynthArgs {
    Common common;
    std::string spec, out_color, out_depth, out_pose, out_intrinsics;
    std::string relative_pose, out_color_b, out_depth_b;
    std::string relight;
    double gamma = 1.0;
};

IlluminationMap parse_relight(const std::string& name, double gamma) {
    if (name == "square") return {IlluminationKind::Square, gamma};
    if (name == "sqrt") return {IlluminationKind::SquareRoot, gamma};
    if (name == "cube") return {IlluminationKind::Cube, gamma};
    if (name == "cbrt") return {IlluminationKind::CubeRoot, gamma};
    if (name == "gamma") return {IlluminationKind::Gamma, gamma};
    throw InputError("unknown relight map: " + name);
}

void write_frame(const RgbdFrame& f, const std::string& color, const std::string& depth) {
    if (!color.empty())
        io::write_gray_png(color, f.gray);
    if (!depth.empty())
        io::write_depth_png(depth, f.depth);
}

int run_synth(const SynthArgs& a) {
    const PipelineConfig config = load_config(a.common);
    const SceneSpec spec = io::scene_from_json(io::read_json(a.spec));
    const Pose rel = load_pose(a.relative_pose);
    std::optional<IlluminationMap> map;
    if (!a.relight.empty())
        map = parse_relight(a.relight, a.gamma);

    FramePair pair;
    if (a.relative_pose.empty())
        pair = {render(spec), {}, Pose::identity()};
    else
        pair = render_pair(spec, rel);
    if (map)
        pair.b = relight(a.relative_pose.empty() ? pair.a : pair.b, *map);

    write_frame(pair.a, a.out_color, a.out_depth);
    if (!a.out_color_b.empty() || !a.out_depth_b.empty()) {
        if (a.relative_pose.empty() && !map)
            throw InputError("--out-color-b/--out-depth-b need --relative-pose or --relight");
        write_frame(pair.b, a.out_color_b, a.out_depth_b);
    }
    if (!a.out_pose.empty())
        io::write_text(a.out_pose, io::to_json(pair.b_to_a).dump(2) + "\n");
    if (!a.out_intrinsics.empty())
        io::write_text(a.out_intrinsics, io::to_json(spec.intrinsics).dump(2) + "\n");
    if (!a.common.dump_dir.empty())
        dump_surface(a.common, compute_surface(pair.a, config));
    return 0;
}

// detect / describe -----------------------------------------------------------

struct FrameArgs {
    Common common;
    std::string color, depth, intrinsics, out, keypoints;
    std::optional<double> tau;
    std::optional<int> max_kp;
};

RgbdFrame load(const FrameArgs& a) {
    return io::load_frame(a.color, a.depth, load_intrinsics(a.intrinsics));
}

PipelineConfig frame_config(const FrameArgs& a) {
    PipelineConfig c = load_config(a.common);
    if (a.tau)
        c.detector.tau = *a.tau;
    if (a.max_kp)
        c.detector.max_keypoints = *a.max_kp;
    c.validate();
    return c;
}

int run_detect(const FrameArgs& a) {
    const PipelineConfig config = frame_config(a);
    const RgbdFrame frame = load(a);
    const FrameFeatures f = detect_features(frame, config);
    warn(f);
    dump_surface(a.common, f);
    io::write_text(a.out, io::to_json(std::span<const Keypoint>(f.keypoints)).dump(2) + "\n");
    std::cout << f.keypoints.size() << " keypoints\n";
    return 0;
}

int run_describe(const FrameArgs& a) {
    const PipelineConfig config = frame_config(a);
    const RgbdFrame frame = load(a);
    FrameFeatures f;
    if (a.keypoints.empty()) {
        f = detect_features(frame, config);
    } else {
        f = compute_surface(frame, config);
        f.keypoints = io::keypoints_from_json(io::read_json(a.keypoints), frame.intrinsics);
    }
    warn(f);
    dump_surface(a.common, f);
    f.described = describe_frame(frame, f.normals, f.keypoints, config.descriptor);
    io::write_descriptors(a.out, f.described.descriptors);
    std::cout << f.described.descriptors.size() << " descriptors, "
              << f.described.rejected(RejectReason::Isotropic) << " rejected as isotropic, "
              << f.described.rejections.size() -
                     f.described.rejected(RejectReason::Isotropic)
              << " rejected otherwise\n";
    return 0;
}

// match / evaluate -------------------------------------------------------------

struct MatchArgs {
    Common common;
    std::string desc_a, desc_b, intrinsics, pose, out, plot;
};

struct LoadedDescriptors {
    std::vector<std::vector<double>> vectors;
    std::vector<Point3> points;
};

LoadedDescriptors load_descriptors(const std::string& path, const CameraIntrinsics& k) {
    LoadedDescriptors out;
    for (Descriptor& d : io::read_descriptors(path, k)) {
        out.points.push_back(d.keypoint.position);
        out.vectors.push_back(std::move(d.bins));
    }
    return out;
}

int run_match(const MatchArgs& a) {
    const PipelineConfig config = load_config(a.common);
    const CameraIntrinsics k = load_intrinsics(a.intrinsics);
    const LoadedDescriptors da = load_descriptors(a.desc_a, k);
    const LoadedDescriptors db = load_descriptors(a.desc_b, k);
    std::vector<Match> matches = nndr_match(da.vectors, db.vectors, config.eval.match_ratio);
    if (!a.pose.empty())
        label_correct(matches, da.points, db.points, load_pose(a.pose), config.eval.d_min);
    io::write_text(a.out, io::matches_csv(matches));
    if (!a.common.dump_dir.empty()) {
        fs::create_directories(a.common.dump_dir);
        io::write_text(fs::path(a.common.dump_dir) / "all_matches.csv",
                       io::matches_csv(nndr_match(da.vectors, db.vectors, 1.0)));
    }
    std::cout << matches.size() << " matches";
    if (!a.pose.empty())
        std::cout << ", inlier percentage " << inlier_percentage(matches);
    std::cout << "\n";
    return 0;
}

int run_evaluate(const MatchArgs& a) {
    if (a.pose.empty())
        throw InputError("evaluate needs --pose");
    const PipelineConfig config = load_config(a.common);
    const CameraIntrinsics k = load_intrinsics(a.intrinsics);
    const LoadedDescriptors da = load_descriptors(a.desc_a, k);
    const LoadedDescriptors db = load_descriptors(a.desc_b, k);
    const PrCurve curve =
        pr_curve(da.vectors, db.vectors, da.points, db.points, load_pose(a.pose), config.eval);
    io::write_text(a.out, io::pr_csv(curve));
    if (!a.plot.empty())
        io::write_text(a.plot, io::pr_svg(curve));
    if (!a.common.dump_dir.empty()) {
        std::vector<Match> all = nndr_match(da.vectors, db.vectors, 1.0);
        label_correct(all, da.points, db.points, load_pose(a.pose), config.eval.d_min);
        fs::create_directories(a.common.dump_dir);
        io::write_text(fs::path(a.common.dump_dir) / "all_matches.csv", io::matches_csv(all));
    }
    std::cout << curve.correspondences << " ground-truth correspondences\n";
    return 0;
}

// pipeline ------------------------------------------------------------------

struct PipelineArgs {
    Common common;
    std::string color_a, depth_a, color_b, depth_b, intrinsics, pose, out, plot;
};

int run_full(const PipelineArgs& a) {
    const PipelineConfig config = load_config(a.common);
    const CameraIntrinsics k = load_intrinsics(a.intrinsics);
    const RgbdFrame fa = io::load_frame(a.color_a, a.depth_a, k);
    const RgbdFrame fb = io::load_frame(a.color_b, a.depth_b, k);
    const PipelineReport report = run_pipeline(config, fa, fb, load_pose(a.pose));
    if (!a.common.dump_dir.empty()) {
        dump_surface(a.common, compute_surface(fa, config), "a_");
        dump_surface(a.common, compute_surface(fb, config), "b_");
    }
    io::write_text(a.out, to_json(report).dump(2) + "\n");
    if (!a.plot.empty())
        io::write_text(a.plot, io::pr_svg(report.pr));
    std::cout << report.matched << " matches, " << report.correct << " correct, inlier percentage "
              << report.inlier_percentage << "\n";
    for (const auto& e : report.errors)
        std::cerr << "stage error: " << e << "\n";
    return report.complete ? 0 : kExitPipeline;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RGB-D keypoint detection, description and matching"};
    app.require_subcommand(1);

    SynthArgs synth;
    auto* s = app.add_subcommand("synth", "render a synthetic RGB-D frame or pair");
    add_common(s, synth.common);
    s->add_option("--spec", synth.spec, "scene JSON")->required();
    s->add_option("--out-color", synth.out_color, "8-bit intensity PNG");
    s->add_option("--out-depth", synth.out_depth, "16-bit depth PNG (mm)");
    s->add_option("--out-pose", synth.out_pose, "pose mapping frame-b points into frame a");
    s->add_option("--out-intrinsics", synth.out_intrinsics, "camera intrinsics JSON");
    s->add_option("--relative-pose", synth.relative_pose, "second camera relative to the first");
    s->add_option("--out-color-b", synth.out_color_b);
    s->add_option("--out-depth-b", synth.out_depth_b);
    s->add_option("--relight", synth.relight, "square|sqrt|cube|cbrt|gamma, applied to frame b");
    s->add_option("--gamma", synth.gamma);

    FrameArgs detect_args;
    auto* d = app.add_subcommand("detect", "detect keypoints");
    add_common(d, detect_args.common);
    d->add_option("--input", detect_args.color, "color or gray PNG")->required();
    d->add_option("--depth", detect_args.depth, "16-bit depth PNG (mm)")->required();
    d->add_option("--intrinsics", detect_args.intrinsics, "camera intrinsics JSON");
    d->add_option("--tau", detect_args.tau, "intensity weight in the blended response");
    d->add_option("--max-kp", detect_args.max_kp, "keypoint cap");
    d->add_option("--out", detect_args.out, "keypoint JSON")->required();

    FrameArgs describe_args;
    auto* ds = app.add_subcommand("describe", "compute descriptors");
    add_common(ds, describe_args.common);
    ds->add_option("--input", describe_args.color, "color or gray PNG")->required();
    ds->add_option("--depth", describe_args.depth, "16-bit depth PNG (mm)")->required();
    ds->add_option("--intrinsics", describe_args.intrinsics, "camera intrinsics JSON");
    ds->add_option("--keypoints", describe_args.keypoints, "keypoint JSON; detect when omitted");
    ds->add_option("--tau", describe_args.tau);
    ds->add_option("--max-kp", describe_args.max_kp);
    ds->add_option("--out", describe_args.out, "descriptor file")->required();

    MatchArgs match_args;
    auto* m = app.add_subcommand("match", "NNDR matching of two descriptor files");
    add_common(m, match_args.common);
    m->add_option("--a", match_args.desc_a)->required();
    m->add_option("--b", match_args.desc_b)->required();
    m->add_option("--intrinsics", match_args.intrinsics);
    m->add_option("--pose", match_args.pose, "pose mapping frame-b points into frame a");
    m->add_option("--out", match_args.out, "matches CSV")->required();

    MatchArgs eval_args;
    auto* e = app.add_subcommand("evaluate", "precision/recall sweep");
    add_common(e, eval_args.common);
    e->add_option("--a", eval_args.desc_a)->required();
    e->add_option("--b", eval_args.desc_b)->required();
    e->add_option("--intrinsics", eval_args.intrinsics);
    e->add_option("--pose", eval_args.pose)->required();
    e->add_option("--out", eval_args.out, "PR CSV")->required();
    e->add_option("--plot", eval_args.plot, "PR curve SVG");

    PipelineArgs pipe;
    auto* p = app.add_subcommand("pipeline", "detect, describe, match and evaluate a frame pair");
    add_common(p, pipe.common);
    p->add_option("--color-a", pipe.color_a)->required();
    p->add_option("--depth-a", pipe.depth_a)->required();
    p->add_option("--color-b", pipe.color_b)->required();
    p->add_option("--depth-b", pipe.depth_b)->required();
    p->add_option("--intrinsics", pipe.intrinsics);
    p->add_option("--pose", pipe.pose, "pose mapping frame-b points into frame a");
    p->add_option("--out", pipe.out, "report JSON")->required();
    p->add_option("--plot", pipe.plot, "PR curve SVG");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int rc = app.exit(err);
        return rc == 0 ? 0 : kExitInput;
    }

    try {
        if (*s) return run_synth(synth);
        if (*d) return run_detect(detect_args);
        if (*ds) return run_describe(describe_args);
        if (*m) return run_match(match_args);
        if (*e) return run_evaluate(eval_args);
        if (*p) return run_full(pipe);
    } catch (const InputError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitInput;
    } catch (const Error& err) {
        std::cerr << "error: " << err.what() << "\n";
        return is_input_error(err.code()) ? kExitInput : kExitPipeline;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitPipeline;
    }
    return kExitInput;
}
