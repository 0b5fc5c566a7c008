#include "chromalint/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace chromalint {

namespace {

// Reads one whitespace-delimited header token, skipping '#' comments.
std::string next_header_token(std::istream& in) {
    std::string tok;
    int ch = in.get();
    while (ch != EOF) {
        if (ch == '#') {
            while (ch != EOF && ch != '\n') ch = in.get();
        } else if (std::isspace(ch)) {
            ch = in.get();
        } else {
            break;
        }
    }
    while (ch != EOF && !std::isspace(ch)) {
        tok.push_back(static_cast<char>(ch));
        ch = in.get();
    }
    return tok;
}

int parse_dim(const std::string& tok, const char* what, const std::filesystem::path& path) {
    if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
        throw DataError("malformed PPM header (" + std::string(what) + "): " + path.string());
    long v = std::stol(tok);
    if (v <= 0) throw DataError("malformed PPM header (" + std::string(what) + "): " + path.string());
    return static_cast<int>(v);
}

std::array<double, 3> json_triple(const nlohmann::json& j, const char* key,
                                  const std::filesystem::path& path) {
    if (!j.contains(key) || !j[key].is_array() || j[key].size() != 3)
        throw DataError("sidecar missing 3-element \"" + std::string(key) + "\": " + path.string());
    return {j[key][0].get<double>(), j[key][1].get<double>(), j[key][2].get<double>()};
}

}  // namespace

void LinearImage::validate() const {
    if (width <= 0 || height <= 0) throw DataError("image dimensions must be positive");
    if (data.size() != pixel_count() * 3)
        throw DataError("image data length does not match width*height*3");
    for (int c = 0; c < 3; ++c) {
        if (!(saturation_level[c] > 0.0)) throw DataError("saturation level must be positive");
        if (black_level[c] < 0.0) throw DataError("black level must be nonnegative");
        if (!black_subtracted && black_level[c] >= saturation_level[c])
            throw DataError("black level must be below the saturation level");
    }
    for (std::size_t i = 0; i < data.size(); ++i) {
        double v = data[i];
        if (!(v >= 0.0) || v > saturation_level[i % 3])
            throw DataError("pixel value outside [0, saturation_level]");
    }
}

std::size_t SaturationMask::flagged_count() const {
    return static_cast<std::size_t>(std::count(flags.begin(), flags.end(), std::uint8_t(1)));
}

std::filesystem::path sidecar_path(const std::filesystem::path& image_path) {
    std::filesystem::path p = image_path;
    p += ".meta.json";
    return p;
}

LinearImage read_ppm16(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open image file: " + path.string());

    std::string magic = next_header_token(in);
    if (magic != "P6") throw DataError("not a P6 PPM: " + path.string());

    int width = parse_dim(next_header_token(in), "width", path);
    int height = parse_dim(next_header_token(in), "height", path);
    int maxval = parse_dim(next_header_token(in), "maxval", path);
    if (maxval != 65535)
        throw DataError("unsupported maxval " + std::to_string(maxval) + " (expected 65535): " +
                        path.string());
    // next_header_token consumed exactly one whitespace byte after maxval.

    std::size_t nsamples = static_cast<std::size_t>(width) * height * 3;
    std::vector<unsigned char> raw(nsamples * 2);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size())
        throw DataError("truncated pixel data: " + path.string());

    std::filesystem::path meta = sidecar_path(path);
    std::ifstream min(meta);
    if (!min) throw DataError("missing sidecar metadata: " + meta.string());
    nlohmann::json j;
    try {
        min >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed sidecar " + meta.string() + ": " + e.what());
    }

    LinearImage img;
    img.width = width;
    img.height = height;
    img.data.resize(nsamples);
    for (std::size_t i = 0; i < nsamples; ++i)
        img.data[i] = static_cast<double>((raw[2 * i] << 8) | raw[2 * i + 1]);
    img.black_level = json_triple(j, "black_level", meta);
    img.saturation_level = json_triple(j, "saturation_level", meta);
    img.camera_id = j.value("camera_id", std::string{});
    img.black_subtracted = j.value("black_subtracted", false);
    img.validate();
    return img;
}

void write_ppm16(const LinearImage& img, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open for writing: " + path.string());
    out << "P6\n" << img.width << " " << img.height << "\n65535\n";
    std::vector<unsigned char> raw(img.data.size() * 2);
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        double q = std::floor(img.data[i] + 0.5);  // round half up
        q = std::clamp(q, 0.0, 65535.0);
        auto s = static_cast<std::uint16_t>(q);
        raw[2 * i] = static_cast<unsigned char>(s >> 8);
        raw[2 * i + 1] = static_cast<unsigned char>(s & 0xFF);
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) throw DataError("write failed: " + path.string());
}

void write_sidecar(const LinearImage& img, const std::filesystem::path& image_path) {
    nlohmann::json j;
    j["black_level"] = img.black_level;
    j["saturation_level"] = img.saturation_level;
    j["camera_id"] = img.camera_id;
    j["black_subtracted"] = img.black_subtracted;
    std::filesystem::path meta = sidecar_path(image_path);
    std::ofstream out(meta);
    if (!out) throw DataError("cannot open for writing: " + meta.string());
    out << j.dump(2) << "\n";
}

LinearImage subtract_black(const LinearImage& img) {
    if (img.black_subtracted)
        throw DataError("black level already subtracted from this image (double subtraction)");
    LinearImage out = img;
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        int c = static_cast<int>(i % 3);
        out.data[i] = std::max(out.data[i] - img.black_level[c], 0.0);
    }
    for (int c = 0; c < 3; ++c) out.saturation_level[c] -= img.black_level[c];
    out.black_subtracted = true;
    return out;
}

SaturationMask saturation_mask(const LinearImage& img, double margin) {
    if (!(margin >= 0.0) || margin >= 1.0) throw DataError("saturation margin must be in [0,1)");
    SaturationMask mask;
    mask.width = img.width;
    mask.height = img.height;
    mask.flags.assign(img.pixel_count(), 0);
    std::array<double, 3> cut{};
    for (int c = 0; c < 3; ++c) cut[c] = (1.0 - margin) * img.saturation_level[c];
    for (std::size_t p = 0; p < img.pixel_count(); ++p) {
        const double* v = &img.data[p * 3];
        if (v[0] >= cut[0] || v[1] >= cut[1] || v[2] >= cut[2]) mask.flags[p] = 1;
    }
    return mask;
}

}  // namespace chromalint
