#include "risas/io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

namespace risas::io {

namespace {

struct RawPng {
    int width = 0;
    int height = 0;
    int channels = 0;
    int bit_depth = 0;
    std::vector<std::uint8_t> bytes;  // rows packed, big-endian samples
};

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f)
            std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const fs::path& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f)
        throw Error(ErrorCode::FileNotFound, "cannot open " + path.string());
    return f;
}

// libpng reports errors by longjmp; everything with a destructor lives in
// the caller.
bool read_png_into(std::FILE* fp, RawPng& out, std::vector<png_bytep>& rows) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png)
        return false;
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        return false;
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        return false;
    }
    png_init_io(png, fp);
    png_read_info(png, info);

    const int color = png_get_color_type(png, info);
    const int depth = png_get_bit_depth(png, info);
    if (color == PNG_COLOR_TYPE_PALETTE)
        png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8)
        png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS))
        png_set_tRNS_to_alpha(png);
    png_read_update_info(png, info);

    out.width = static_cast<int>(png_get_image_width(png, info));
    out.height = static_cast<int>(png_get_image_height(png, info));
    out.channels = png_get_channels(png, info);
    out.bit_depth = png_get_bit_depth(png, info);
    const std::size_t row_bytes = png_get_rowbytes(png, info);
    out.bytes.resize(row_bytes * static_cast<std::size_t>(out.height));
    rows.resize(static_cast<std::size_t>(out.height));
    for (int y = 0; y < out.height; ++y)
        rows[y] = out.bytes.data() + row_bytes * static_cast<std::size_t>(y);
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return true;
}

RawPng read_png(const fs::path& path) {
    if (!fs::exists(path))
        throw Error(ErrorCode::FileNotFound, "no such file: " + path.string());
    FilePtr fp = open_file(path, "rb");
    RawPng raw;
    std::vector<png_bytep> rows;
    if (!read_png_into(fp.get(), raw, rows))
        throw Error(ErrorCode::ParseError, "cannot decode PNG " + path.string());
    return raw;
}

bool write_png_from(std::FILE* fp, int width, int height, int bit_depth,
                    std::vector<png_bytep>& rows) {
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png)
        return false;
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        return false;
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        return false;
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
                 bit_depth, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return true;
}

void write_png(const fs::path& path, int width, int height, int bit_depth,
               std::vector<std::uint8_t>& bytes) {
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    FilePtr fp = open_file(path, "wb");
    const std::size_t row_bytes = static_cast<std::size_t>(width) * (bit_depth / 8);
    std::vector<png_bytep> rows(static_cast<std::size_t>(height));
    for (int y = 0; y < height; ++y)
        rows[y] = bytes.data() + row_bytes * static_cast<std::size_t>(y);
    if (!write_png_from(fp.get(), width, height, bit_depth, rows))
        throw Error(ErrorCode::ParseError, "cannot encode PNG " + path.string());
}

}  // namespace

std::uint8_t luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    const double y = 0.299 * r + 0.587 * g + 0.114 * b;
    return static_cast<std::uint8_t>(std::clamp(std::lround(y), 0L, 255L));
}

Image<double> read_gray_png(const fs::path& path) {
    const RawPng raw = read_png(path);
    if (raw.bit_depth != 8)
        throw Error(ErrorCode::UnsupportedBitDepth,
                    "colour image must be 8-bit: " + path.string());
    Image<double> out(raw.width, raw.height);
    const std::size_t c = static_cast<std::size_t>(raw.channels);
    for (int v = 0; v < raw.height; ++v) {
        for (int u = 0; u < raw.width; ++u) {
            const std::uint8_t* px =
                raw.bytes.data() + (static_cast<std::size_t>(v) * raw.width + u) * c;
            // Gray and gray+alpha carry intensity in the first sample.
            out(u, v) = c >= 3 ? luma(px[0], px[1], px[2]) : px[0];
        }
    }
    return out;
}

Image<double> read_depth_png(const fs::path& path) {
    const RawPng raw = read_png(path);
    if (raw.bit_depth != 16 || raw.channels != 1)
        throw Error(ErrorCode::UnsupportedBitDepth,
                    "depth image must be 16-bit single channel: " + path.string());
    Image<double> out(raw.width, raw.height);
    for (int v = 0; v < raw.height; ++v) {
        for (int u = 0; u < raw.width; ++u) {
            const std::size_t i = (static_cast<std::size_t>(v) * raw.width + u) * 2;
            const unsigned mm = (static_cast<unsigned>(raw.bytes[i]) << 8) | raw.bytes[i + 1];
            out(u, v) = mm * 1e-3;
        }
    }
    return out;
}

void write_gray_png(const fs::path& path, const Image<double>& gray) {
    std::vector<std::uint8_t> bytes(gray.size());
    std::transform(gray.pixels().begin(), gray.pixels().end(), bytes.begin(), [](double i) {
        return static_cast<std::uint8_t>(std::clamp(std::lround(i), 0L, 255L));
    });
    write_png(path, gray.width(), gray.height(), 8, bytes);
}

void write_depth_png(const fs::path& path, const Image<double>& depth) {
    std::vector<std::uint8_t> bytes(depth.size() * 2);
    for (std::size_t i = 0; i < depth.size(); ++i) {
        const double d = depth.pixels()[i];
        long mm = 0;
        if (d > 0.0 && std::isfinite(d))
            mm = std::clamp(std::lround(d * 1000.0), 0L, 65535L);
        bytes[2 * i] = static_cast<std::uint8_t>(mm >> 8);
        bytes[2 * i + 1] = static_cast<std::uint8_t>(mm & 0xff);
    }
    write_png(path, depth.width(), depth.height(), 16, bytes);
}

Json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::FileNotFound, "cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
    }
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorCode::FileNotFound, "cannot write " + path.string());
    out << text;
}

namespace {

template <typename T>
T field(const Json& j, const char* key) {
    if (!j.contains(key))
        throw Error(ErrorCode::ParseError, std::string("missing key: ") + key);
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("bad value for ") + key + ": " + e.what());
    }
}

template <typename T>
T field_or(const Json& j, const char* key, T fallback) {
    return j.contains(key) ? field<T>(j, key) : fallback;
}

Eigen::Vector3d vec3(const Json& j, const char* key) {
    const auto v = field<std::vector<double>>(j, key);
    if (v.size() != 3)
        throw Error(ErrorCode::ParseError, std::string(key) + " must have 3 entries");
    return {v[0], v[1], v[2]};
}

Json vec3_json(const Eigen::Vector3d& v) { return Json::array({v.x(), v.y(), v.z()}); }

}  // namespace

Json to_json(const CameraIntrinsics& k) {
    return Json{{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx},
                {"cy", k.cy}, {"width", k.width}, {"height", k.height}};
}

CameraIntrinsics intrinsics_from_json(const Json& j) {
    CameraIntrinsics k;
    k.fx = field<double>(j, "fx");
    k.fy = field<double>(j, "fy");
    k.cx = field<double>(j, "cx");
    k.cy = field<double>(j, "cy");
    k.width = field<int>(j, "width");
    k.height = field<int>(j, "height");
    k.validate();
    return k;
}

Json to_json(const Pose& pose) {
    Json rot = Json::array();
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            rot.push_back(pose.rotation(r, c));
    return Json{{"rotation", rot}, {"translation", vec3_json(pose.translation)}};
}

Pose pose_from_json(const Json& j) {
    const auto rot = field<std::vector<double>>(j, "rotation");
    if (rot.size() != 9)
        throw Error(ErrorCode::ParseError, "rotation must have 9 entries (row-major)");
    Eigen::Matrix3d r;
    for (int i = 0; i < 3; ++i)
        for (int c = 0; c < 3; ++c)
            r(i, c) = rot[static_cast<std::size_t>(3 * i + c)];
    return Pose::make(r, vec3(j, "translation"));
}

namespace {

const char* texture_name(TextureKind kind) {
    switch (kind) {
        case TextureKind::Constant: return "constant";
        case TextureKind::Checkerboard: return "checkerboard";
        case TextureKind::Perlin: return "perlin";
    }
    return "constant";
}

const char* primitive_name(PrimitiveType type) {
    switch (type) {
        case PrimitiveType::Plane: return "plane";
        case PrimitiveType::Box: return "box";
        case PrimitiveType::Sphere: return "sphere";
        case PrimitiveType::Wedge: return "wedge";
    }
    return "plane";
}

}  // namespace

Json to_json(const Texture& t) {
    return Json{{"kind", texture_name(t.kind)}, {"cell", t.cell},
                {"dark", t.dark},                {"light", t.light},
                {"value", t.value},              {"detail", t.detail},
                {"noise_scale", t.noise_scale},  {"seed", t.seed}};
}

Texture texture_from_json(const Json& j) {
    Texture t;
    const auto kind = field_or<std::string>(j, "kind", "checkerboard");
    if (kind == "constant")
        t.kind = TextureKind::Constant;
    else if (kind == "checkerboard")
        t.kind = TextureKind::Checkerboard;
    else if (kind == "perlin")
        t.kind = TextureKind::Perlin;
    else
        throw Error(ErrorCode::ParseError, "unknown texture kind: " + kind);
    t.cell = field_or(j, "cell", t.cell);
    t.dark = field_or(j, "dark", t.dark);
    t.light = field_or(j, "light", t.light);
    t.value = field_or(j, "value", t.value);
    t.detail = field_or(j, "detail", t.detail);
    t.noise_scale = field_or(j, "noise_scale", t.noise_scale);
    t.seed = field_or(j, "seed", t.seed);
    if (!(t.cell > 0.0) || !(t.noise_scale > 0.0))
        throw Error(ErrorCode::ParseError, "texture lengths must be positive");
    return t;
}

Json to_json(const SceneSpec& spec) {
    Json prims = Json::array();
    for (const Primitive& p : spec.primitives) {
        Json jp{{"type", primitive_name(p.type)},
                {"pose", to_json(p.pose)},
                {"size", vec3_json(p.size)}};
        if (p.texture)
            jp["texture"] = to_json(*p.texture);
        prims.push_back(jp);
    }
    return Json{{"intrinsics", to_json(spec.intrinsics)},
                {"camera_pose", to_json(spec.camera_pose)},
                {"texture", to_json(spec.texture)},
                {"noise", spec.noise},
                {"noise_seed", spec.noise_seed},
                {"primitives", prims}};
}

SceneSpec scene_from_json(const Json& j) {
    SceneSpec spec;
    if (j.contains("intrinsics"))
        spec.intrinsics = intrinsics_from_json(j.at("intrinsics"));
    if (j.contains("camera_pose"))
        spec.camera_pose = pose_from_json(j.at("camera_pose"));
    if (j.contains("texture"))
        spec.texture = texture_from_json(j.at("texture"));
    spec.noise = field_or(j, "noise", 0.0);
    spec.noise_seed = field_or<std::uint32_t>(j, "noise_seed", 0);
    if (!(spec.noise >= 0.0))
        throw Error(ErrorCode::ParseError, "noise must be >= 0");
    if (!j.contains("primitives") || !j.at("primitives").is_array())
        throw Error(ErrorCode::ParseError, "scene needs a primitives array");
    for (const Json& jp : j.at("primitives")) {
        Primitive p;
        const auto type = field<std::string>(jp, "type");
        if (type == "plane")
            p.type = PrimitiveType::Plane;
        else if (type == "box")
            p.type = PrimitiveType::Box;
        else if (type == "sphere")
            p.type = PrimitiveType::Sphere;
        else if (type == "wedge")
            p.type = PrimitiveType::Wedge;
        else
            throw Error(ErrorCode::ParseError, "unknown primitive type: " + type);
        if (jp.contains("pose"))
            p.pose = pose_from_json(jp.at("pose"));
        if (jp.contains("size"))
            p.size = vec3(jp, "size");
        if (jp.contains("texture"))
            p.texture = texture_from_json(jp.at("texture"));
        spec.primitives.push_back(p);
    }
    return spec;
}

Json to_json(std::span<const Keypoint> keypoints) {
    Json out = Json::array();
    for (const Keypoint& k : keypoints)
        out.push_back(Json{{"u", k.u}, {"v", k.v}, {"response", k.response}, {"depth", k.depth}});
    return out;
}

std::vector<Keypoint> keypoints_from_json(const Json& j, const CameraIntrinsics& k) {
    if (!j.is_array())
        throw Error(ErrorCode::ParseError, "keypoint file must hold a JSON array");
    std::vector<Keypoint> out;
    for (const Json& jk : j) {
        Keypoint kp;
        kp.u = field<int>(jk, "u");
        kp.v = field<int>(jk, "v");
        kp.response = field_or(jk, "response", 0.0);
        kp.depth = field<double>(jk, "depth");
        kp.position = backproject(kp.u, kp.v, kp.depth, k);
        out.push_back(kp);
    }
    return out;
}

RgbdFrame load_frame(const fs::path& color, const fs::path& depth,
                     const CameraIntrinsics& intrinsics) {
    RgbdFrame frame{read_gray_png(color), read_depth_png(depth), intrinsics};
    frame.validate();
    return frame;
}

RgbdFrame load_frame(const fs::path& color, const fs::path& depth,
                     const fs::path& intrinsics) {
    return load_frame(color, depth, intrinsics_from_json(read_json(intrinsics)));
}

namespace {

void put_u32(std::string& out, std::uint32_t x) {
    for (int i = 0; i < 4; ++i)
        out.push_back(static_cast<char>((x >> (8 * i)) & 0xffu));
}

void put_f32(std::string& out, double value) {
    const float f = static_cast<float>(value);
    std::uint32_t bits;
    std::memcpy(&bits, &f, sizeof bits);
    put_u32(out, bits);
}

std::uint32_t get_u32(const std::string& in, std::size_t& pos) {
    if (pos + 4 > in.size())
        throw Error(ErrorCode::ParseError, "descriptor file truncated");
    std::uint32_t x = 0;
    for (int i = 0; i < 4; ++i)
        x |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
    pos += 4;
    return x;
}

float get_f32(const std::string& in, std::size_t& pos) {
    const std::uint32_t bits = get_u32(in, pos);
    float f;
    std::memcpy(&f, &bits, sizeof f);
    return f;
}

}  // namespace

void write_descriptors(const fs::path& path, std::span<const Descriptor> descriptors) {
    const std::size_t dim = descriptors.empty() ? 0 : descriptors.front().bins.size();
    std::string out = "RISD";
    put_u32(out, static_cast<std::uint32_t>(descriptors.size()));
    put_u32(out, static_cast<std::uint32_t>(dim));
    for (const Descriptor& d : descriptors) {
        if (d.bins.size() != dim)
            throw Error(ErrorCode::DimensionMismatch, "descriptor dimensions differ");
        put_f32(out, d.keypoint.u);
        put_f32(out, d.keypoint.v);
        put_f32(out, d.keypoint.depth);
        put_f32(out, d.theta);
        for (double b : d.bins)
            put_f32(out, b);
    }
    write_text(path, out);
}

std::vector<Descriptor> read_descriptors(const fs::path& path, const CameraIntrinsics& k) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::FileNotFound, "cannot open " + path.string());
    const std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (data.size() < 12 || data.compare(0, 4, "RISD") != 0)
        throw Error(ErrorCode::ParseError, "not a descriptor file: " + path.string());
    std::size_t pos = 4;
    const std::uint32_t count = get_u32(data, pos);
    const std::uint32_t dim = get_u32(data, pos);
    const std::size_t record = 4u * (4u + dim);
    if (data.size() - pos != record * count)
        throw Error(ErrorCode::ParseError, "descriptor file size does not match header");
    std::vector<Descriptor> out;
    out.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        Descriptor d;
        d.keypoint.u = static_cast<int>(std::lround(get_f32(data, pos)));
        d.keypoint.v = static_cast<int>(std::lround(get_f32(data, pos)));
        d.keypoint.depth = get_f32(data, pos);
        d.keypoint.position = backproject(d.keypoint.u, d.keypoint.v, d.keypoint.depth, k);
        d.theta = get_f32(data, pos);
        d.bins.resize(dim);
        for (auto& b : d.bins)
            b = get_f32(data, pos);
        d.empty = false;
        out.push_back(std::move(d));
    }
    return out;
}

std::string matches_csv(std::span<const Match> matches) {
    std::ostringstream out;
    out << "index_a,index_b,distance,ratio,correct\n";
    out << std::setprecision(9);
    for (const Match& m : matches) {
        out << m.index_a << ',' << m.index_b << ',' << m.distance << ',' << m.ratio << ',';
        if (m.correct)
            out << (*m.correct ? 1 : 0);
        out << '\n';
    }
    return out.str();
}

std::string pr_csv(const PrCurve& curve) {
    std::ostringstream out;
    out << "ratio,precision,recall\n" << std::setprecision(9);
    for (const PrPoint& p : curve.points)
        out << p.ratio << ',' << p.precision << ',' << p.recall << '\n';
    return out.str();
}

std::string pr_svg(const PrCurve& curve) {
    constexpr double size = 400.0, pad = 50.0;
    auto x = [&](double recall) { return pad + recall * size; };
    auto y = [&](double precision) { return pad + (1.0 - precision) * size; };
    std::ostringstream out;
    out << std::fixed << std::setprecision(2);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size + 2 * pad
        << "\" height=\"" << size + 2 * pad << "\">\n";
    out << "<rect x=\"" << pad << "\" y=\"" << pad << "\" width=\"" << size << "\" height=\""
        << size << "\" fill=\"none\" stroke=\"black\"/>\n";
    out << "<text x=\"" << pad + size / 2 << "\" y=\"" << size + 1.7 * pad
        << "\" text-anchor=\"middle\">recall</text>\n";
    out << "<text x=\"" << pad / 3 << "\" y=\"" << pad + size / 2
        << "\" text-anchor=\"middle\" transform=\"rotate(-90 " << pad / 3 << ' '
        << pad + size / 2 << ")\">precision</text>\n";
    out << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
    for (const PrPoint& p : curve.points)
        out << x(p.recall) << ',' << y(p.precision) << ' ';
    out << "\"/>\n";
    for (const PrPoint& p : curve.points)
        out << "<circle cx=\"" << x(p.recall) << "\" cy=\"" << y(p.precision)
            << "\" r=\"3\" fill=\"" << (p.degenerate ? "gray" : "steelblue") << "\"/>\n";
    out << "</svg>\n";
    return out.str();
}

void dump_intermediates(const fs::path& dir, const AngleLabels& labels,
                        const DotProductImage& dp, const std::string& prefix) {
    fs::create_directories(dir);
    Image<double> dp_img(dp.values.width(), dp.values.height(), 0.0);
    for (int v = 0; v < dp_img.height(); ++v)
        for (int u = 0; u < dp_img.width(); ++u)
            if (dp.valid(u, v))
                dp_img(u, v) = dp.values(u, v);
    write_gray_png(dir / (prefix + "dot_product.png"), dp_img);

    const char* names[3] = {"labels_alpha.png", "labels_beta.png", "labels_gamma.png"};
    for (int axis = 0; axis < 3; ++axis) {
        Image<double> img(labels.labels.width(), labels.labels.height(), 0.0);
        for (int v = 0; v < img.height(); ++v)
            for (int u = 0; u < img.width(); ++u)
                img(u, v) = 255.0 * labels.labels(u, v)[axis] / labels.n_s;
        write_gray_png(dir / (prefix + names[axis]), img);
    }
}

}  // namespace risas::io
