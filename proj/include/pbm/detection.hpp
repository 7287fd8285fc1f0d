#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "pbm/bitplane.hpp"
#include "pbm/geometry.hpp"
#include "pbm/imaging.hpp"

namespace pbm {

enum class DetectionSource { model, human, fallback };
enum class Eye { left, right };

const char* to_string(DetectionSource s) noexcept;
const char* to_string(Eye e) noexcept;
DetectionSource parse_detection_source(const std::string& s);
Eye parse_eye(const std::string& s);

struct PatchDetection {
    std::string id;
    Polygon polygon;
    Region shape;  // even-odd rasterization of polygon, pixel-center rule
    double confidence = 0.0;
    DetectionSource source = DetectionSource::model;

    bool operator==(const PatchDetection&) const = default;
};

struct DetectionSet {
    std::string image_id;
    std::string subject_id;
    Eye eye = Eye::left;
    double pmi_hours = 0.0;
    int width = 0;   // coordinate frame the polygons live in
    int height = 0;
    std::vector<PatchDetection> detections;

    bool operator==(const DetectionSet&) const = default;
};

/// Pixels (x, y) of a width x height frame whose center lies inside the
/// polygon under the even-odd rule. The region's box is the tight bounding
/// box of those pixels (empty region when none qualify).
Region rasterize_polygon(const Polygon& polygon, int width, int height);

/// Builds a detection, validating the polygon against the frame.
PatchDetection make_detection(std::string id, Polygon polygon, double confidence,
                              DetectionSource source, int frame_width, int frame_height);

/// Schema violations as human-readable messages; empty when the document is valid.
std::vector<std::string> validate_detection_json(const nlohmann::json& doc);

DetectionSet detections_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const DetectionSet& set);
DetectionSet parse_detections(const std::filesystem::path& path);
void write_detections(const DetectionSet& set, const std::filesystem::path& path);

/// Translates every polygon by `delta` into a new frame of the given size
/// (e.g. source-image coordinates into crop coordinates).
DetectionSet translate_detections(const DetectionSet& set, PixelOffset delta, int width, int height);

/// Keeps the n most confident detections (stable for ties).
DetectionSet top_n_detections(const DetectionSet& set, std::size_t n);

/// Annotation mask with the id used for deterministic tie-breaking.
struct LabeledRegion {
    std::string id;
    Region region;

    bool operator==(const LabeledRegion&) const = default;
};

/// Collapses redundant annotations: whenever two overlap by more than half of
/// the smaller one's area, the smaller is dropped (equal areas: the later id).
/// Survivors keep their input order.
std::vector<LabeledRegion> aggregate_annotations(const std::vector<LabeledRegion>& annotations,
                                                 double max_overlap = 0.5);

/// Angle of (patch centroid - iris center), degrees in (-180, 180], measured
/// from +x toward +y.
double patch_angle(Point2d patch_centroid, Point2d iris_center);
double patch_angle(const PatchDetection& det, Point2d iris_center);

struct FallbackParams {
    std::size_t k = 10;
    int window = 32;
    double max_overlap = 0.3;
};

/// Texture-variance window detector used for end-to-end tests when no model
/// output is available. Not a replacement for a trained detector.
DetectionSet fallback_detect(const GrayImage& img, const IrisMask& mask, const FallbackParams& params = {});

}  // namespace pbm
