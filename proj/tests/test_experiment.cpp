#include <doctest.h>

#include <cmath>

#include "chromalint/experiment.hpp"
#include "oracles.hpp"

using namespace chromalint;
namespace syn = chromalint::synthetic;

namespace {

syn::Dataset small_dataset(int n, std::uint64_t seed) {
    syn::BenchmarkConfig config;
    config.n_images = n;
    config.seed = seed;
    return syn::make_benchmark(config);
}

}  // namespace

TEST_CASE("black level 0 makes wrong and right runs identical zeros") {
    syn::Dataset ds = small_dataset(6, 17);
    OracleMismatchResult res = oracle_mismatch_experiment(ds, 0.0);
    CHECK(res.right_run.stats.max == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(res.wrong_run.stats.max == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("a neutral observed illuminant hides the pedestal completely") {
    syn::Dataset ds = small_dataset(1, 3);
    syn::CameraModel cam = ds.cameras[0];
    // steer the SPD so the camera sees exactly (1,1,1): the pedestal then
    // shifts the patch color along its own direction
    syn::Spd base = syn::planckian_spd(6500.0);
    Rgb current = syn::observed_illuminant_raw(base, cam);
    double level = (current.r + current.g + current.b) / 3.0;
    ds.images[0].scene.illuminant_spd =
        syn::spd_for_target(base, cam, Rgb{level, level, level});

    OracleMismatchResult res = oracle_mismatch_experiment(ds, 200.0);
    CHECK(res.wrong_run.stats.max == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("hand-derived single-patch mismatch angle") {
    // Illuminant (2,1,1), gray patch value (2000,1000,1000), black level 500.
    // The unsubtracted direction is (2500,1500,1500), and the angular_error
    // oracle on those two vectors gives
    //   acos(8000 / (sqrt(2500^2+1500^2+1500^2) * sqrt(6))) = 5.0512 deg.
    double oracle = oracles::angle_deg({2500, 1500, 1500}, {2, 1, 1});
    CHECK(oracle == doctest::Approx(5.05115252801783).epsilon(1e-12));

    // Steer the scene so the equal-weight mean of the six (all gray) chart
    // patch means is exactly (2000,1000,1000): every patch mean is collinear
    // with (2,1,1), so the aggregate behaves as one gray patch at that value.
    syn::Dataset ds = small_dataset(1, 123);
    ds.cameras[0].saturation_level = {30000, 30000, 30000};  // headroom, no clipping
    syn::CameraModel cam = ds.cameras[0];
    double mean_level = 0.0;
    for (double level : syn::kChartLevels) mean_level += level / 6.0;
    Rgb target = Rgb{2, 1, 1} * (1000.0 / (mean_level * cam.gain));
    syn::Spd spd = syn::spd_for_target(syn::planckian_spd(5000.0), cam, target);
    Rgb achieved = syn::observed_illuminant_raw(spd, cam);
    REQUIRE(angular_error(achieved, Rgb{2, 1, 1}) < 1e-9);
    REQUIRE(norm(achieved) == doctest::Approx(norm(target)).epsilon(1e-9));
    ds.images[0].scene.illuminant_spd = spd;

    OracleMismatchResult res = oracle_mismatch_experiment(ds, 500.0);
    CHECK(res.right_run.stats.max == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(res.wrong_run.stats.median == doctest::Approx(oracle).epsilon(0.05 / 5.05));
}

TEST_CASE("wrong-run errors are positive and monotone over the black-level grid") {
    syn::Dataset ds = small_dataset(10, 29);
    double prev = -1.0;
    for (double bl : {64.0, 129.0, 256.0, 512.0}) {
        OracleMismatchResult res = oracle_mismatch_experiment(ds, bl);
        CHECK(res.right_run.stats.median == doctest::Approx(0.0).epsilon(1e-9));
        CHECK(res.wrong_run.stats.median > 0.0);
        CHECK(res.wrong_run.stats.median >= prev);
        prev = res.wrong_run.stats.median;
    }
}

TEST_CASE("wrong-pipeline gap: chromatic illuminants plus real pedestal separate the medians") {
    syn::Dataset ds = small_dataset(12, 31);
    // 129 counts against patch means around 1000+ counts is > 5% of the mean
    OracleMismatchResult res = oracle_mismatch_experiment(ds, 129.0);
    CHECK(res.wrong_run.stats.median > res.right_run.stats.median + 0.1);
}

TEST_CASE("excessive black level produces the clamping warning") {
    syn::Dataset ds = small_dataset(2, 41);
    OracleMismatchResult res = oracle_mismatch_experiment(ds, 512.0);
    // the darkest chart patch (3% reflectance) sits well below 512 counts
    CHECK_FALSE(res.warnings.empty());

    OracleMismatchResult mild = oracle_mismatch_experiment(ds, 1.0);
    CHECK(mild.warnings.empty());
}

TEST_CASE("runs carry the pipeline provenance tags") {
    syn::Dataset ds = small_dataset(2, 43);
    OracleMismatchResult res = oracle_mismatch_experiment(ds, 64.0);
    CHECK(res.right_run.pipeline == PipelineTag::subtracted);
    CHECK(res.wrong_run.pipeline == PipelineTag::unsubtracted);
    CHECK(res.right_run.ground_truth_id == res.wrong_run.ground_truth_id);
}
