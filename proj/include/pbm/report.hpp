#pragma once

#include <string>
#include <vector>

#include "pbm/detection.hpp"
#include "pbm/imaging.hpp"
#include "pbm/matching.hpp"

namespace pbm {

enum class Backdrop { embed, none };

struct RenderOptions {
    Backdrop backdrop = Backdrop::embed;
    int gap = 16;  // pixels between the two canvases
};

/// Detected patches over one image, one <polygon class="detection"> each.
std::string render_detections(const GrayImage& img, const std::vector<PatchDetection>& detections,
                              const RenderOptions& opts = {});

/// Side-by-side evidence: every patch outlined, accepted pairs highlighted
/// and linked between their usable-pixel centroids, score caption and a
/// parameter footer. Images must be the crops the result was computed on.
std::string render_comparison(const ComparisonResult& result, const GrayImage& img_a, const GrayImage& img_b,
                              const RenderOptions& opts = {});

std::string base64_encode(const std::vector<std::uint8_t>& bytes);

}  // namespace pbm
