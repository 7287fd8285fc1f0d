#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pbm/bsif.hpp"
#include "pbm/detection.hpp"
#include "pbm/imaging.hpp"

namespace pbm {

/// One detected feature ready for matching.
struct PatchDescriptor {
    std::string id;
    PatchCode code;
    Point2d centroid;         // shape centroid, drives the angle
    Point2d usable_centroid;  // centroid of usable pixels, anchors evidence links
    double angle = 0.0;       // degrees in (-180, 180] about the iris center
    Polygon polygon;

    std::size_t area() const noexcept { return code.area(); }
};

struct MatchPair {
    std::string id_a;
    std::string id_b;
    double distance = 0.0;
    PixelOffset offset;  // b's patch pixel (u, v) lies over a's (u + dx, v + dy)
    std::size_t overlap_area = 0;

    bool operator==(const MatchPair&) const = default;
};

struct MatchParams {
    double angle_tol = 20.0;
    std::size_t max_pairs = 5;
    double overlap_frac = 0.5;
    double no_evidence_score = 0.5;

    void validate() const;
    bool operator==(const MatchParams&) const = default;
};

/// Wrap-aware |angle_a - angle_b| <= tol.
bool angular_gate(double angle_a, double angle_b, double tol);
bool angular_gate(const PatchDescriptor& a, const PatchDescriptor& b, double tol);

/// Exhaustive translation search. Only translations whose overlap exceeds
/// overlap_frac * min(area_a, area_b) are admissible; the admissible one with
/// the smallest distance wins (first in (dy, dx) order on ties). nullopt when
/// none is admissible.
std::optional<MatchPair> best_alignment_distance(const PatchDescriptor& a, const PatchDescriptor& b,
                                                 double overlap_frac = 0.5);

/// Every gate-passing pair with an admissible alignment, in (a, b) input order.
std::vector<MatchPair> enumerate_valid_pairs(const std::vector<PatchDescriptor>& a,
                                             const std::vector<PatchDescriptor>& b, const MatchParams& params);

/// Sort ascending by (distance, id_a, id_b) and keep a pair only when neither
/// endpoint has been used.
std::vector<MatchPair> greedy_assign(std::vector<MatchPair> pairs);

struct EvidencePatch {
    std::string id;
    Polygon polygon;  // crop coordinates
    Point2d anchor;
    double angle = 0.0;
    std::size_t area = 0;

    bool operator==(const EvidencePatch&) const = default;
};

struct SideEvidence {
    std::string image_id;
    PixelOffset crop_offset;
    int crop_side = 0;
    Point2d iris_center;
    std::vector<EvidencePatch> patches;
    std::vector<std::string> skipped;  // "id: reason"

    bool operator==(const SideEvidence&) const = default;
};

struct ComparisonResult {
    double score = 0.5;
    std::vector<MatchPair> pairs;  // at most max_pairs, ascending distance
    std::size_t n_candidates = 0;  // valid pairs before assignment
    std::size_t n_assigned = 0;
    bool no_evidence = true;
    nlohmann::json params;  // echo of everything that affects the score
    SideEvidence side_a;
    SideEvidence side_b;
};

/// Mean distance of the max_pairs smallest assigned pairs; the no-evidence
/// sentinel when there are none.
ComparisonResult comparison_score(std::vector<MatchPair> assigned, const MatchParams& params = {});

enum class DetectionFrame { crop, source };

struct CompareConfig {
    PreprocessOptions preprocess;
    MatchParams match;
    DetectionFrame frame = DetectionFrame::crop;
    std::optional<std::size_t> top_n_detections;
};

struct SideInput {
    GrayImage image;
    IrisMask mask;
    DetectionSet detections;
};

struct PreparedSide {
    IrisCrop crop;
    IrisCode code;
    Point2d iris_center;
    std::vector<PatchDescriptor> descriptors;
    SideEvidence evidence;
};

PreparedSide prepare_side(const SideInput& side, const FilterBank& bank, const CompareConfig& config);

/// Enumerate, assign and score two prepared sides.
ComparisonResult match_prepared(const PreparedSide& a, const PreparedSide& b, const MatchParams& params);

ComparisonResult compare(const SideInput& a, const SideInput& b, const FilterBank& bank,
                         const CompareConfig& config = {});

/// Canonical JSON of the configuration plus a digest of the bank.
nlohmann::json config_to_json(const CompareConfig& config, const FilterBank& bank);
std::uint64_t config_hash(const CompareConfig& config, const FilterBank& bank);

nlohmann::json to_json(const ComparisonResult& result);
ComparisonResult comparison_from_json(const nlohmann::json& doc);

}  // namespace pbm
