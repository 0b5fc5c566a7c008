#include "chromalint/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

namespace chromalint {

OracleMismatchResult oracle_mismatch_experiment(const synthetic::Dataset& dataset,
                                                double black_level, int jobs) {
    if (!(black_level >= 0.0)) throw DataError("black level must be nonnegative");
    if (dataset.images.empty()) throw DataError("empty synthetic dataset");

    struct PerImage {
        std::string id;
        Illuminant gt_sub;
        Illuminant gt_unsub;
        double min_patch_signal = 0.0;
    };
    std::vector<PerImage> rows(dataset.images.size());

    parallel_for(dataset.images.size(), jobs, [&](std::size_t i) {
        const auto& si = dataset.images[i];
        synthetic::CameraModel cam = dataset.camera_for(si);
        cam.black_level = {black_level, black_level, black_level};
        for (int c = 0; c < 3; ++c)
            if (!(cam.black_level[c] < cam.saturation_level[c]))
                throw DataError("black level exceeds the camera saturation level");

        auto raw = synthetic::render(si.scene, cam, /*inject_black=*/true,
                                     dataset.config.noise_sigma, si.noise_seed);
        LinearImage sub = subtract_black(raw.image);
        PatchAnnotation ann = dataset.annotation_for(si);

        PerImage row;
        row.id = si.id;
        row.gt_sub = extract_ground_truth(sub, ann, saturation_mask(sub));
        row.gt_unsub = extract_ground_truth(raw.image, ann, saturation_mask(raw.image),
                                            /*allow_unsubtracted=*/true);

        double min_signal = std::numeric_limits<double>::infinity();
        for (const auto& quad : si.scene.chart_quads)
            for (int y = 0; y < sub.height; ++y)
                for (int x = 0; x < sub.width; ++x)
                    if (quad.contains(x + 0.5, y + 0.5))
                        for (int c = 0; c < 3; ++c)
                            min_signal = std::min(min_signal, sub.at(x, y, c));
        row.min_patch_signal = min_signal;
        rows[i] = std::move(row);
    });

    EstimateSet sub_estimates, unsub_estimates;
    GroundTruthTable gt_sub;
    OracleMismatchResult result;
    for (auto& row : rows) {
        sub_estimates.emplace(row.id, row.gt_sub);
        unsub_estimates.emplace(row.id, row.gt_unsub);
        gt_sub.insert(row.id, row.gt_sub, "oracle");
        if (black_level >= row.min_patch_signal)
            result.warnings.push_back(
                "image " + row.id + ": black level " + format_double(black_level) +
                " reaches the darkest achromatic patch value " +
                format_double(row.min_patch_signal) +
                "; zero-clamping on subtraction can distort the error monotonicity");
    }

    result.right_run = evaluate(sub_estimates, gt_sub, "oracle", PipelineTag::subtracted,
                                "extracted-subtracted");
    result.wrong_run = evaluate(unsub_estimates, gt_sub, "oracle", PipelineTag::unsubtracted,
                                "extracted-subtracted");
    return result;
}

}  // namespace chromalint
