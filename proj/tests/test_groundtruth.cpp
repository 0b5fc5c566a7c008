#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "chromalint/groundtruth.hpp"
#include "chromalint/rng.hpp"
#include "oracles.hpp"

using namespace chromalint;

namespace {

LinearImage uniform_image(int w, int h, Rgb value, double sat = 1e6) {
    LinearImage img;
    img.width = w;
    img.height = h;
    img.saturation_level = {sat, sat, sat};
    img.black_subtracted = true;
    for (int i = 0; i < w * h; ++i) {
        img.data.push_back(value.r);
        img.data.push_back(value.g);
        img.data.push_back(value.b);
    }
    img.validate();
    return img;
}

void paint(LinearImage& img, int x0, int y0, int x1, int y1, Rgb value) {
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x)
            for (int c = 0; c < 3; ++c) img.at(x, y, c) = value[c];
}

PatchAnnotation two_patch_annotation() {
    PatchAnnotation ann;
    ann.image_id = "img";
    ann.patches = {rect_quad(2, 2, 10, 10), rect_quad(12, 2, 20, 10)};
    ann.inset = 0.15;
    return ann;
}

}  // namespace

TEST_CASE("single uniform patch extracts its own direction") {
    LinearImage img = uniform_image(16, 16, {400, 200, 100});
    PatchAnnotation ann;
    ann.image_id = "img";
    ann.patches = {rect_quad(2, 2, 12, 12)};
    Illuminant e = extract_ground_truth(img, ann, saturation_mask(img));
    double n = std::sqrt(400.0 * 400 + 200.0 * 200 + 100.0 * 100);
    CHECK(e.r() == doctest::Approx(400 / n).epsilon(1e-12));
    CHECK(e.g() == doctest::Approx(200 / n).epsilon(1e-12));
    CHECK(e.b() == doctest::Approx(100 / n).epsilon(1e-12));
}

TEST_CASE("collinear patch means keep the direction") {
    LinearImage img = uniform_image(24, 12, {1, 1, 1});
    paint(img, 2, 2, 10, 10, {400, 200, 100});
    paint(img, 12, 2, 20, 10, {800, 400, 200});
    Illuminant e = extract_ground_truth(img, two_patch_annotation(), saturation_mask(img));
    Illuminant expected(400, 200, 100);
    CHECK(angular_error(e, expected) < 1e-9);
}

TEST_CASE("a clipped brighter patch is discarded whole") {
    LinearImage img = uniform_image(24, 12, {1, 1, 1}, 1000.0);
    paint(img, 2, 2, 10, 10, {995, 400, 100});   // touches the clip margin
    paint(img, 12, 2, 20, 10, {400, 200, 100});  // clean
    Illuminant e = extract_ground_truth(img, two_patch_annotation(), saturation_mask(img));
    Illuminant darker(400, 200, 100);
    CHECK(angular_error(e, darker) < 1e-9);
}

TEST_CASE("all patches clipped is an error") {
    LinearImage img = uniform_image(24, 12, {999, 999, 999}, 1000.0);
    CHECK_THROWS_WITH_AS(
        extract_ground_truth(img, two_patch_annotation(), saturation_mask(img)),
        doctest::Contains("no usable achromatic patch"), DataError);
}

TEST_CASE("patch outside the image is an error") {
    LinearImage img = uniform_image(8, 8, {10, 10, 10});
    PatchAnnotation ann;
    ann.image_id = "img";
    ann.patches = {rect_quad(4, 4, 12, 12)};
    CHECK_THROWS_WITH_AS(extract_ground_truth(img, ann, saturation_mask(img)),
                         doctest::Contains("outside image"), DataError);
}

TEST_CASE("extraction refuses unsubtracted images unless overridden") {
    LinearImage img = uniform_image(16, 16, {100, 100, 100});
    img.black_subtracted = false;
    img.black_level = {10, 10, 10};
    PatchAnnotation ann;
    ann.image_id = "img";
    ann.patches = {rect_quad(2, 2, 12, 12)};
    CHECK_THROWS_AS(extract_ground_truth(img, ann, saturation_mask(img)), PipelineError);
    CHECK_NOTHROW(extract_ground_truth(img, ann, saturation_mask(img), true));
}

TEST_CASE("extraction is invariant to exposure scaling") {
    LinearImage img = uniform_image(24, 12, {1, 1, 1});
    paint(img, 2, 2, 10, 10, {350, 220, 130});
    paint(img, 12, 2, 20, 10, {90, 60, 40});
    Illuminant base = extract_ground_truth(img, two_patch_annotation(), saturation_mask(img));

    LinearImage scaled = img;
    for (double& v : scaled.data) v *= 11.0;
    Illuminant after = extract_ground_truth(scaled, two_patch_annotation(),
                                            saturation_mask(scaled));
    CHECK(angular_error(base, after) < 1e-9);
}

TEST_CASE("non-convex annotation is rejected") {
    PatchAnnotation ann;
    ann.image_id = "img";
    Quad bowtie{{{{0, 0}, {10, 10}, {10, 0}, {0, 10}}}};
    ann.patches = {bowtie};
    CHECK_THROWS_WITH_AS(ann.validate(), doctest::Contains("not convex"), DataError);
}

TEST_CASE("annotations JSON round trip") {
    AnnotationSet set;
    PatchAnnotation ann;
    ann.image_id = "img_0001";
    ann.patches = {rect_quad(1, 2, 5, 6), rect_quad(7, 2, 11, 6)};
    ann.inset = 0.2;
    set.emplace(ann.image_id, ann);

    auto path = std::filesystem::temp_directory_path() / "chromalint_ann_rt.json";
    write_annotations(set, path);
    AnnotationSet back = read_annotations(path);
    REQUIRE(back.count("img_0001") == 1);
    CHECK(back.at("img_0001").inset == 0.2);
    CHECK(back.at("img_0001").patches.size() == 2);
    CHECK(back.at("img_0001").patches[0].pts[2][0] == 5.0);
}

TEST_CASE("ground-truth CSV accepts unnormalized triples and normalizes") {
    auto path = std::filesystem::temp_directory_path() / "chromalint_gt_norm.csv";
    {
        std::ofstream out(path);
        out << "image_id,R,G,B,camera_id\n";
        out << "a,400,200,100,cam1\n";
        out << "b,0.2,0.4,0.1,cam2\n";
    }
    GroundTruthTable t = GroundTruthTable::load_csv(path);
    REQUIRE(t.size() == 2);
    double n = std::sqrt(400.0 * 400 + 200.0 * 200 + 100.0 * 100);
    CHECK(t.at("a").illuminant.r() == doctest::Approx(400 / n).epsilon(1e-12));
    CHECK(t.at("a").camera_id == "cam1");

    // the CSV text round-trips exactly; reloading renormalizes, which may
    // shift components by an ulp
    auto path2 = std::filesystem::temp_directory_path() / "chromalint_gt_norm2.csv";
    t.save_csv(path2);
    GroundTruthTable t2 = GroundTruthTable::load_csv(path2);
    CHECK(t2.at("b").illuminant.r() == doctest::Approx(t.at("b").illuminant.r()).epsilon(1e-15));
    CHECK(t2.at("b").illuminant.g() == doctest::Approx(t.at("b").illuminant.g()).epsilon(1e-15));
    CHECK(t2.at("b").illuminant.b() == doctest::Approx(t.at("b").illuminant.b()).epsilon(1e-15));
    CHECK(angular_error(t2.at("b").illuminant, t.at("b").illuminant) < 1e-9);
}

TEST_CASE("ground-truth CSV errors") {
    auto dir = std::filesystem::temp_directory_path();
    auto bad_header = dir / "chromalint_gt_badheader.csv";
    {
        std::ofstream out(bad_header);
        out << "id,R,G,B,cam\nx,1,1,1,c\n";
    }
    CHECK_THROWS_WITH_AS(GroundTruthTable::load_csv(bad_header), doctest::Contains("header"),
                         DataError);

    auto dup = dir / "chromalint_gt_dup.csv";
    {
        std::ofstream out(dup);
        out << "image_id,R,G,B,camera_id\nx,1,1,1,c\nx,2,2,2,c\n";
    }
    CHECK_THROWS_WITH_AS(GroundTruthTable::load_csv(dup), doctest::Contains("duplicate"),
                         DataError);
}

TEST_CASE("diff of identical tables is identically zero and diff is symmetric") {
    SplitMix64 rng(3);
    GroundTruthTable a;
    for (int i = 0; i < 12; ++i)
        a.insert("im" + std::to_string(i),
                 Illuminant(rng.uniform(0.1, 1), rng.uniform(0.1, 1), rng.uniform(0.1, 1)),
                 "cam");
    GroundTruthDiff self = diff_ground_truths(a, a);
    CHECK(self.stats.max == 0.0);
    CHECK(self.stats.median == 0.0);

    GroundTruthTable b;
    for (const auto& [id, rec] : a.records()) {
        oracles::Vec3 v{rec.illuminant.r(), rec.illuminant.g(), rec.illuminant.b()};
        oracles::Vec3 w = oracles::rotate_away(v, 1.0 + (id.back() - '0') * 0.3);
        b.insert(id, Illuminant(w.x, w.y, w.z), "cam");
    }
    GroundTruthDiff ab = diff_ground_truths(a, b);
    GroundTruthDiff ba = diff_ground_truths(b, a);
    for (const auto& [id, ang] : ab.per_image_angle)
        CHECK(ang == ba.per_image_angle.at(id));
}

TEST_CASE("diff against a 2-degree rotated table has median 2") {
    SplitMix64 rng(19);
    GroundTruthTable a, b;
    for (int i = 0; i < 21; ++i) {
        std::string id = "im" + std::to_string(100 + i);
        Rgb v{rng.uniform(0.2, 1.0), rng.uniform(0.2, 1.0), rng.uniform(0.2, 1.0)};
        a.insert(id, Illuminant(v), "cam");
        // vector-rotation oracle: rotate each illuminant 2 degrees about an
        // axis orthogonal to it
        oracles::Vec3 w = oracles::rotate_away({v.r, v.g, v.b}, 2.0);
        b.insert(id, Illuminant(w.x, w.y, w.z), "cam");
    }
    GroundTruthDiff diff = diff_ground_truths(a, b);
    CHECK(diff.stats.median == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(diff.p75 == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("diff of a single orthogonal pair collapses to that value") {
    GroundTruthTable a, b;
    a.insert("only", Illuminant(1, 0, 0), "cam");
    a.insert("a_only", Illuminant(1, 1, 1), "cam");
    b.insert("only", Illuminant(0, 1, 0), "cam");
    b.insert("b_only", Illuminant(1, 1, 1), "cam");
    GroundTruthDiff diff = diff_ground_truths(a, b);
    REQUIRE(diff.per_image_angle.size() == 1);
    CHECK(diff.stats.median == doctest::Approx(90.0).epsilon(1e-12));
    CHECK(diff.stats.max == doctest::Approx(90.0).epsilon(1e-12));
    CHECK(diff.p75 == doctest::Approx(90.0).epsilon(1e-12));
}

TEST_CASE("diff with empty intersection is an error") {
    GroundTruthTable a, b;
    a.insert("x", Illuminant(1, 1, 1), "cam");
    b.insert("y", Illuminant(1, 1, 1), "cam");
    CHECK_THROWS_AS(diff_ground_truths(a, b), DataError);
}
