#include "editreg/formats.hpp"

#include <bit>
#include <cctype>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "editreg/error.hpp"

namespace editreg::formats {

static_assert(std::endian::native == std::endian::little, "blob I/O assumes a little-endian host");

namespace {

class Writer {
public:
    void magic(std::string_view m) { bytes_.insert(bytes_.end(), m.begin(), m.end()); }
    void u32(std::uint32_t v) { raw(&v, sizeof v); }
    template <class T>
    void array(std::span<const T> values) {
        raw(values.data(), values.size_bytes());
    }
    void raw(const void* p, std::size_t n) {
        const auto* b = static_cast<const std::uint8_t*>(p);
        bytes_.insert(bytes_.end(), b, b + n);
    }
    std::vector<std::uint8_t> take() { return std::move(bytes_); }

private:
    std::vector<std::uint8_t> bytes_;
};

class Reader {
public:
    Reader(std::span<const std::uint8_t> bytes, const char* what) : bytes_(bytes), what_(what) {}

    void expect_header(std::string_view magic) {
        if (bytes_.size() < 20) fail(ErrorCode::InvariantViolation, std::string(what_) + ": truncated header");
        if (std::memcmp(bytes_.data(), magic.data(), 16) != 0) {
            fail(ErrorCode::FormatVersionMismatch, std::string(what_) + ": bad magic");
        }
        pos_ = 16;
        const std::uint32_t version = u32("version");
        if (version != kBlobVersion) {
            fail(ErrorCode::FormatVersionMismatch,
                 std::string(what_) + ": unsupported version " + std::to_string(version));
        }
    }

    std::uint32_t u32(const char* field) {
        std::uint32_t v;
        take(&v, sizeof v, field, 1);
        return v;
    }

    template <class T>
    std::vector<T> array(std::size_t count, const char* field) {
        std::vector<T> out(count);
        take(out.data(), count * sizeof(T), field, count);
        return out;
    }

    void expect_end() {
        if (pos_ != bytes_.size()) {
            fail(ErrorCode::InvariantViolation, std::string(what_) + ": " + std::to_string(bytes_.size() - pos_) +
                                                    " trailing bytes after declared arrays");
        }
    }

private:
    void take(void* dst, std::size_t n, const char* field, std::size_t count) {
        if (bytes_.size() - pos_ < n) {
            fail(ErrorCode::InvariantViolation, std::string(what_) + ": array '" + field + "' length mismatch: header declares " +
                                                    std::to_string(count) + " elements (" + std::to_string(n) +
                                                    " bytes) but only " + std::to_string(bytes_.size() - pos_) +
                                                    " bytes remain");
        }
        std::memcpy(dst, bytes_.data() + pos_, n);
        pos_ += n;
    }

    std::span<const std::uint8_t> bytes_;
    const char* what_;
    std::size_t pos_ = 0;
};

struct NetpbmHeader {
    std::string kind;
    int width = 0, height = 0, maxval = 0;
    std::size_t data_offset = 0;
};

NetpbmHeader parse_netpbm(std::span<const std::uint8_t> bytes, const char* what) {
    NetpbmHeader h;
    std::size_t pos = 0;
    auto skip_ws = [&] {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(bytes[pos])) {
                ++pos;
            } else {
                break;
            }
        }
    };
    auto token = [&] {
        skip_ws();
        std::string t;
        while (pos < bytes.size() && !std::isspace(bytes[pos]) && bytes[pos] != '#') t.push_back(static_cast<char>(bytes[pos++]));
        return t;
    };
    auto number = [&](const char* field) {
        const std::string t = token();
        if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos) {
            fail(ErrorCode::InvariantViolation, std::string(what) + ": malformed header field " + field);
        }
        return std::stoi(t);
    };
    h.kind = token();
    h.width = number("width");
    h.height = number("height");
    h.maxval = number("maxval");
    if (pos >= bytes.size() || !std::isspace(bytes[pos])) {
        fail(ErrorCode::InvariantViolation, std::string(what) + ": truncated header");
    }
    h.data_offset = pos + 1;
    if (h.maxval != 255) fail(ErrorCode::InvariantViolation, std::string(what) + ": only 8-bit rasters are supported");
    return h;
}

std::vector<std::uint8_t> netpbm(const char* kind, int width, int height, std::span<const std::uint8_t> data) {
    std::ostringstream os;
    os << kind << '\n' << width << ' ' << height << "\n255\n";
    const std::string head = os.str();
    std::vector<std::uint8_t> out(head.begin(), head.end());
    out.insert(out.end(), data.begin(), data.end());
    return out;
}

}  // namespace

std::vector<std::uint8_t> encode_depth(const DepthMap& depth) {
    Writer w;
    w.magic(kDepthMagic);
    w.u32(kBlobVersion);
    w.u32(static_cast<std::uint32_t>(depth.width()));
    w.u32(static_cast<std::uint32_t>(depth.height()));
    w.array(depth.values());
    return w.take();
}

DepthMap decode_depth(std::span<const std::uint8_t> bytes) {
    Reader r(bytes, "depth blob");
    r.expect_header(kDepthMagic);
    const auto width = r.u32("width");
    const auto height = r.u32("height");
    auto values = r.array<float>(static_cast<std::size_t>(width) * height, "depth");
    r.expect_end();
    return DepthMap(static_cast<int>(width), static_cast<int>(height), std::move(values));
}

std::vector<std::uint8_t> encode_features(const FeatureRaster& features) {
    Writer w;
    w.magic(kFeatureMagic);
    w.u32(kBlobVersion);
    w.u32(static_cast<std::uint32_t>(features.width()));
    w.u32(static_cast<std::uint32_t>(features.height()));
    w.u32(static_cast<std::uint32_t>(features.dim()));
    w.array(features.data());
    return w.take();
}

FeatureRaster decode_features(std::span<const std::uint8_t> bytes) {
    Reader r(bytes, "feature blob");
    r.expect_header(kFeatureMagic);
    const auto width = r.u32("width");
    const auto height = r.u32("height");
    const auto dim = r.u32("dim");
    auto values = r.array<float>(static_cast<std::size_t>(width) * height * dim, "features");
    r.expect_end();
    return FeatureRaster(static_cast<int>(width), static_cast<int>(height), static_cast<int>(dim), std::move(values));
}

std::vector<std::uint8_t> encode_cloud(const FeatureCloud& cloud) {
    Writer w;
    w.magic(kCloudMagic);
    w.u32(kBlobVersion);
    w.u32(static_cast<std::uint32_t>(cloud.image_width()));
    w.u32(static_cast<std::uint32_t>(cloud.image_height()));
    w.u32(static_cast<std::uint32_t>(cloud.size()));
    w.u32(static_cast<std::uint32_t>(cloud.feature_dim()));
    for (const Vec3& p : cloud.points()) {
        const double xyz[3] = {p.x, p.y, p.z};
        w.raw(xyz, sizeof xyz);
    }
    w.array(cloud.features());
    for (const PixelIndex& px : cloud.pixels()) {
        const std::int32_t rc[2] = {px.row, px.col};
        w.raw(rc, sizeof rc);
    }
    for (Label l : cloud.labels()) {
        const auto b = static_cast<std::uint8_t>(l);
        w.raw(&b, 1);
    }
    return w.take();
}

FeatureCloud decode_cloud(std::span<const std::uint8_t> bytes) {
    Reader r(bytes, "cloud blob");
    r.expect_header(kCloudMagic);
    const auto width = r.u32("image_width");
    const auto height = r.u32("image_height");
    const auto n = r.u32("count");
    const auto dim = r.u32("dim");
    const auto xyz = r.array<double>(static_cast<std::size_t>(n) * 3, "points");
    auto feats = r.array<float>(static_cast<std::size_t>(n) * dim, "features");
    const auto rc = r.array<std::int32_t>(static_cast<std::size_t>(n) * 2, "pixels");
    const auto lb = r.array<std::uint8_t>(n, "labels");
    r.expect_end();
    std::vector<Vec3> pts(n);
    std::vector<PixelIndex> px(n);
    std::vector<Label> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        pts[i] = {xyz[3 * i], xyz[3 * i + 1], xyz[3 * i + 2]};
        px[i] = {rc[2 * i], rc[2 * i + 1]};
        if (lb[i] > 2) fail(ErrorCode::InvariantViolation, "cloud blob: label out of range");
        labels[i] = static_cast<Label>(lb[i]);
    }
    return FeatureCloud(static_cast<int>(width), static_cast<int>(height), static_cast<int>(dim), std::move(pts),
                        std::move(feats), std::move(px), std::move(labels));
}

std::vector<std::uint8_t> encode_pgm(const Mask& mask) {
    std::vector<std::uint8_t> data(mask.bits().size());
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = mask.bits()[i] ? 255 : 0;
    return netpbm("P5", mask.width(), mask.height(), data);
}

Mask decode_pgm(std::span<const std::uint8_t> bytes) {
    int w = 0, h = 0;
    auto values = decode_pgm_gray(bytes, w, h);
    for (auto& v : values) v = v ? 1 : 0;
    return Mask(w, h, std::move(values));
}

std::vector<std::uint8_t> encode_pgm_gray(int width, int height, std::span<const std::uint8_t> values) {
    if (values.size() != static_cast<std::size_t>(width) * height) {
        fail(ErrorCode::InvariantViolation, "PGM: raster length does not match dimensions");
    }
    return netpbm("P5", width, height, values);
}

std::vector<std::uint8_t> decode_pgm_gray(std::span<const std::uint8_t> bytes, int& width, int& height) {
    const NetpbmHeader h = parse_netpbm(bytes, "PGM");
    if (h.kind != "P5") fail(ErrorCode::FormatVersionMismatch, "PGM: expected binary P5, got " + h.kind);
    const std::size_t need = static_cast<std::size_t>(h.width) * h.height;
    if (bytes.size() - h.data_offset != need) {
        fail(ErrorCode::InvariantViolation, "PGM: raster length " + std::to_string(bytes.size() - h.data_offset) +
                                                " does not match declared " + std::to_string(h.width) + "x" +
                                                std::to_string(h.height));
    }
    width = h.width;
    height = h.height;
    return {bytes.begin() + static_cast<std::ptrdiff_t>(h.data_offset), bytes.end()};
}

std::vector<std::uint8_t> encode_ppm(const ImageFrame& image) {
    return netpbm("P6", image.width(), image.height(), image.rgb());
}

ImageFrame decode_ppm(std::span<const std::uint8_t> bytes) {
    const NetpbmHeader h = parse_netpbm(bytes, "PPM");
    if (h.kind != "P6") fail(ErrorCode::FormatVersionMismatch, "PPM: expected binary P6, got " + h.kind);
    const std::size_t need = static_cast<std::size_t>(h.width) * h.height * 3;
    if (bytes.size() - h.data_offset != need) {
        fail(ErrorCode::InvariantViolation, "PPM: raster length does not match declared dimensions");
    }
    return ImageFrame(h.width, h.height,
                      std::vector<std::uint8_t>(bytes.begin() + static_cast<std::ptrdiff_t>(h.data_offset), bytes.end()));
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::MissingFile, "cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::MissingFile, "cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void write_text(const std::filesystem::path& path, std::string_view text) {
    write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string read_text(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    return {bytes.begin(), bytes.end()};
}

DepthMap read_depth(const std::filesystem::path& path) { return decode_depth(read_file(path)); }
void write_depth(const std::filesystem::path& path, const DepthMap& depth) { write_file(path, encode_depth(depth)); }
FeatureRaster read_features(const std::filesystem::path& path) { return decode_features(read_file(path)); }
void write_features(const std::filesystem::path& path, const FeatureRaster& f) { write_file(path, encode_features(f)); }
FeatureCloud read_cloud(const std::filesystem::path& path) { return decode_cloud(read_file(path)); }
void write_cloud(const std::filesystem::path& path, const FeatureCloud& c) { write_file(path, encode_cloud(c)); }
Mask read_mask(const std::filesystem::path& path) { return decode_pgm(read_file(path)); }
void write_mask(const std::filesystem::path& path, const Mask& m) { write_file(path, encode_pgm(m)); }
ImageFrame read_image(const std::filesystem::path& path) { return decode_ppm(read_file(path)); }
void write_image(const std::filesystem::path& path, const ImageFrame& img) { write_file(path, encode_ppm(img)); }

}  // namespace editreg::formats
