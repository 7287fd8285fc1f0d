#pragma once

#include <cstdint>

#include "pbm/detection.hpp"
#include "pbm/imaging.hpp"

namespace pbm::synthetic {

struct IrisGeometry {
    int width = 320;
    int height = 280;
    Point2d center{160.0, 140.0};
    double pupil_radius = 30.0;
    double iris_radius = 112.0;
};

/// Annular iris mask.
IrisMask annulus_mask(const IrisGeometry& g = {});

/// Band-limited random texture whose local contrast varies across the iris,
/// deterministic in `identity`. Pixels outside the annulus are a flat gray.
GrayImage iris_texture(std::uint64_t identity, const IrisGeometry& g = {});

/// Copy of `img` with seeded Gaussian noise (clamped to 8 bits).
GrayImage add_noise(const GrayImage& img, double sigma, std::uint64_t seed);

/// Rotates every polygon about `center` and re-rasterizes in the same frame;
/// detections that would leave the frame are dropped.
DetectionSet rotate_detections(const DetectionSet& set, Point2d center, double degrees);

}  // namespace pbm::synthetic
