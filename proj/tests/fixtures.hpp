// Synthetic comparison inputs shared by the pipeline-level tests.
#pragma once

#include <cstdint>

#include "pbm/detection.hpp"
#include "pbm/imaging.hpp"
#include "pbm/matching.hpp"
#include "pbm/synthetic.hpp"

namespace fixture {

// Crop-frame detections from the fallback detector, optionally rotated about
// the crop's iris center.
inline pbm::DetectionSet detect(const pbm::GrayImage& img, const pbm::IrisMask& mask, int crop_side,
                                double rotate_deg = 0.0, std::size_t k = 10) {
    const auto crop = pbm::preprocess(img, mask, {crop_side, {}});
    auto set = pbm::fallback_detect(crop.image, crop.mask, {k, 32, 0.3});
    if (rotate_deg != 0.0) {
        set = pbm::synthetic::rotate_detections(set, pbm::mask_centroid(crop.mask), rotate_deg);
    }
    return set;
}

inline pbm::SideInput side(std::uint64_t identity, double noise = 0.0, std::uint64_t noise_seed = 0,
                           double rotate_deg = 0.0, int crop_side = 256) {
    const pbm::synthetic::IrisGeometry geom;
    pbm::SideInput s;
    s.mask = pbm::synthetic::annulus_mask(geom);
    s.image = pbm::synthetic::iris_texture(identity, geom);
    if (noise > 0.0) {
        s.image = pbm::synthetic::add_noise(s.image, noise, noise_seed);
    }
    s.detections = detect(s.image, s.mask, crop_side, rotate_deg);
    s.detections.image_id = "id" + std::to_string(identity) + (noise > 0.0 ? "n" + std::to_string(noise_seed) : "");
    s.detections.subject_id = "s" + std::to_string(identity);
    return s;
}

}  // namespace fixture
