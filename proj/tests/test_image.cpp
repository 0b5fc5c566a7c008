#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "chromalint/image.hpp"
#include "chromalint/illuminant.hpp"
#include "chromalint/rng.hpp"

using namespace chromalint;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    fs::path dir = fs::temp_directory_path() / "chromalint_image_tests";
    fs::create_directories(dir);
    return dir;
}

LinearImage tiny_image(std::vector<double> samples, int width, int height,
                       std::array<double, 3> bl = {129, 129, 129},
                       std::array<double, 3> sat = {3692, 3692, 3692}) {
    LinearImage img;
    img.width = width;
    img.height = height;
    img.data = std::move(samples);
    img.black_level = bl;
    img.saturation_level = sat;
    img.camera_id = "canon5d";
    img.validate();
    return img;
}

void write_raw_ppm(const fs::path& path, const std::string& header,
                   const std::vector<std::uint16_t>& samples) {
    std::ofstream out(path, std::ios::binary);
    out << header;
    for (std::uint16_t s : samples) {
        unsigned char hi = static_cast<unsigned char>(s >> 8);
        unsigned char lo = static_cast<unsigned char>(s & 0xFF);
        out.write(reinterpret_cast<char*>(&hi), 1);
        out.write(reinterpret_cast<char*>(&lo), 1);
    }
}

void write_meta(const fs::path& image_path, const std::string& body) {
    std::ofstream out(sidecar_path(image_path));
    out << body;
}

const char* kMeta =
    R"({"black_level":[129,129,129],"saturation_level":[3692,3692,3692],)"
    R"("camera_id":"canon5d","black_subtracted":false})";

}  // namespace

TEST_CASE("read_ppm16 reads samples verbatim") {
    fs::path p = temp_dir() / "verbatim.ppm";
    write_raw_ppm(p, "P6\n2 1\n65535\n", {300, 300, 300, 100, 100, 100});
    write_meta(p, kMeta);

    LinearImage img = read_ppm16(p);
    CHECK(img.width == 2);
    CHECK(img.height == 1);
    CHECK(img.at(0, 0, 0) == 300.0);
    CHECK(img.at(0, 0, 2) == 300.0);
    CHECK(img.at(1, 0, 1) == 100.0);
    CHECK(img.black_level[0] == 129.0);
    CHECK(img.saturation_level[0] == 3692.0);
    CHECK(img.camera_id == "canon5d");
    CHECK_FALSE(img.black_subtracted);
}

TEST_CASE("read_ppm16 rejects bad inputs with distinct errors") {
    fs::path dir = temp_dir();

    fs::path p8 = dir / "maxval255.ppm";
    write_raw_ppm(p8, "P6\n1 1\n255\n", {1, 2, 3});
    write_meta(p8, kMeta);
    CHECK_THROWS_WITH_AS(read_ppm16(p8), doctest::Contains("unsupported maxval"), DataError);

    fs::path p5 = dir / "gray.ppm";
    write_raw_ppm(p5, "P5\n1 1\n65535\n", {7});
    write_meta(p5, kMeta);
    CHECK_THROWS_WITH_AS(read_ppm16(p5), doctest::Contains("not a P6 PPM"), DataError);

    fs::path trunc = dir / "short.ppm";
    write_raw_ppm(trunc, "P6\n2 2\n65535\n", {1, 2, 3});
    write_meta(trunc, kMeta);
    CHECK_THROWS_WITH_AS(read_ppm16(trunc), doctest::Contains("truncated"), DataError);

    fs::path nometa = dir / "nometa.ppm";
    write_raw_ppm(nometa, "P6\n1 1\n65535\n", {1, 2, 3});
    fs::remove(sidecar_path(nometa));
    CHECK_THROWS_WITH_AS(read_ppm16(nometa), doctest::Contains("missing sidecar"), DataError);

    fs::path header = dir / "badheader.ppm";
    write_raw_ppm(header, "P6\n-2 1\n65535\n", {1, 2, 3});
    write_meta(header, kMeta);
    CHECK_THROWS_AS(read_ppm16(header), DataError);
}

TEST_CASE("ppm round trip is byte identical") {
    fs::path dir = temp_dir();
    fs::path first = dir / "rt1.ppm";
    fs::path second = dir / "rt2.ppm";

    SplitMix64 rng(99);
    for (int round = 0; round < 8; ++round) {
        int w = 1 + static_cast<int>(rng.next() % 9);
        int h = 1 + static_cast<int>(rng.next() % 7);
        LinearImage img;
        img.width = w;
        img.height = h;
        img.saturation_level = {65535, 65535, 65535};
        img.black_level = {0, 0, 0};
        img.camera_id = "rt";
        for (int i = 0; i < w * h * 3; ++i)
            img.data.push_back(static_cast<double>(rng.next() % 65536));
        write_ppm16(img, first);
        write_sidecar(img, first);

        LinearImage back = read_ppm16(first);
        write_ppm16(back, second);

        std::ifstream a(first, std::ios::binary), b(second, std::ios::binary);
        std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
        std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
        REQUIRE(sa == sb);
    }
}

TEST_CASE("write_ppm16 quantizes round-half-up") {
    fs::path p = temp_dir() / "quant.ppm";
    LinearImage img = tiny_image({100.5, 100.49, 99.999, 0.4, 0.5, 3692}, 2, 1);
    write_ppm16(img, p);
    write_sidecar(img, p);
    LinearImage back = read_ppm16(p);
    CHECK(back.at(0, 0, 0) == 101.0);
    CHECK(back.at(0, 0, 1) == 100.0);
    CHECK(back.at(0, 0, 2) == 100.0);
    CHECK(back.at(1, 0, 0) == 0.0);
    CHECK(back.at(1, 0, 1) == 1.0);
    CHECK(back.at(1, 0, 2) == 3692.0);
}

TEST_CASE("subtract_black forced arithmetic and clamping") {
    LinearImage img = tiny_image({300, 300, 300, 100, 100, 100}, 2, 1);
    LinearImage sub = subtract_black(img);
    CHECK(sub.at(0, 0, 0) == 171.0);  // 300 - 129
    CHECK(sub.at(1, 0, 0) == 0.0);    // clamped at zero
    CHECK(sub.black_subtracted);
    CHECK(sub.saturation_level[0] == 3692.0 - 129.0);
    CHECK(sub.black_level[0] == 129.0);  // recorded, no longer in the data

    CHECK_THROWS_WITH_AS(subtract_black(sub), doctest::Contains("already subtracted"), DataError);
}

TEST_CASE("subtract_black with zero black level is the identity") {
    LinearImage img = tiny_image({5, 6, 7, 8, 9, 10}, 2, 1, {0, 0, 0});
    LinearImage sub = subtract_black(img);
    for (std::size_t i = 0; i < img.data.size(); ++i) CHECK(sub.data[i] == img.data[i]);
}

TEST_CASE("subtract_black commutes with scalar scaling") {
    SplitMix64 rng(4);
    LinearImage img;
    img.width = 4;
    img.height = 3;
    img.black_level = {40, 50, 60};
    img.saturation_level = {1000, 1000, 1000};
    for (int i = 0; i < 4 * 3 * 3; ++i) img.data.push_back(rng.uniform(0.0, 900.0));
    img.validate();

    const double k = 3.5;
    LinearImage scaled = img;
    for (double& v : scaled.data) v *= k;
    for (auto& b : scaled.black_level) b *= k;
    for (auto& s : scaled.saturation_level) s *= k;

    LinearImage a = subtract_black(scaled);
    LinearImage b = subtract_black(img);
    for (std::size_t i = 0; i < a.data.size(); ++i)
        CHECK(a.data[i] == doctest::Approx(k * b.data[i]).epsilon(1e-12));
}

TEST_CASE("subtraction then re-adding the black level restores values above it") {
    LinearImage img = tiny_image({200, 300, 400, 150, 129, 3000}, 2, 1);
    LinearImage sub = subtract_black(img);
    for (std::size_t i = 0; i < img.data.size(); ++i)
        CHECK(sub.data[i] + img.black_level[i % 3] == img.data[i]);
}

TEST_CASE("saturation_mask margin boundary") {
    LinearImage img = tiny_image({990, 10, 10, 979, 10, 10}, 2, 1, {0, 0, 0}, {1000, 1000, 1000});
    SaturationMask mask = saturation_mask(img, 0.02);
    CHECK(mask.at(0, 0));        // 990 >= 980
    CHECK_FALSE(mask.at(1, 0));  // 979 < 980
    CHECK(mask.flagged_count() == 1);
}

TEST_CASE("saturation_mask on an all-zero image flags nothing") {
    LinearImage img = tiny_image(std::vector<double>(12, 0.0), 2, 2, {0, 0, 0});
    CHECK(saturation_mask(img).flagged_count() == 0);
}

TEST_CASE("rb_chromaticity forced arithmetic") {
    auto p = rb_chromaticity(Rgb{2, 1, 1});
    CHECK(p.r == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(p.b == doctest::Approx(0.25).epsilon(1e-15));

    auto q = rb_chromaticity(Rgb{1, 1, 1});
    CHECK(q.r == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(q.b == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

    auto corner = rb_chromaticity(Rgb{0, 0, 1});
    CHECK(corner.r == 0.0);
    CHECK(corner.b == 1.0);

    CHECK_THROWS_AS(rb_chromaticity(Rgb{0, 0, 0}), DataError);
}

TEST_CASE("rb_chromaticity is scale invariant") {
    SplitMix64 rng(11);
    for (int i = 0; i < 50; ++i) {
        Rgb v{rng.uniform(0.01, 5.0), rng.uniform(0.01, 5.0), rng.uniform(0.01, 5.0)};
        double k = rng.uniform(0.1, 100.0);
        auto a = rb_chromaticity(v);
        auto b = rb_chromaticity(v * k);
        CHECK(a.r == doctest::Approx(b.r).epsilon(1e-12));
        CHECK(a.b == doctest::Approx(b.b).epsilon(1e-12));
    }
}
