#include "pbm/matching.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "pbm/error.hpp"
#include "pbm/rng.hpp"

namespace pbm {

using nlohmann::json;

void MatchParams::validate() const {
    if (!(angle_tol >= 0.0)) {
        throw Error(ErrorKind::invalid_argument, "angle tolerance must be >= 0");
    }
    if (max_pairs < 1) {
        throw Error(ErrorKind::invalid_argument, "max pairs must be >= 1");
    }
    if (!(overlap_frac >= 0.0 && overlap_frac < 1.0)) {
        throw Error(ErrorKind::invalid_argument, "overlap fraction must lie in [0, 1)");
    }
    if (!(no_evidence_score >= 0.0 && no_evidence_score <= 1.0)) {
        throw Error(ErrorKind::invalid_argument, "no-evidence score must lie in [0, 1]");
    }
}

bool angular_gate(double angle_a, double angle_b, double tol) {
    return std::abs(wrap_degrees(angle_a - angle_b)) <= tol;
}

bool angular_gate(const PatchDescriptor& a, const PatchDescriptor& b, double tol) {
    return angular_gate(a.angle, b.angle, tol);
}

std::optional<MatchPair> best_alignment_distance(const PatchDescriptor& a, const PatchDescriptor& b,
                                                 double overlap_frac) {
    const PatchCode& ca = a.code;
    const PatchCode& cb = b.code;
    if (ca.n_planes() != cb.n_planes()) {
        throw Error(ErrorKind::dimension_mismatch, "alignment: plane counts differ");
    }
    const double required = overlap_frac * static_cast<double>(std::min(ca.area(), cb.area()));

    std::optional<MatchPair> best;
    double best_distance = 0.0;
    for (int dy = -(cb.height() - 1); dy <= ca.height() - 1; ++dy) {
        const int rows = std::min(ca.height(), cb.height() + dy) - std::max(0, dy);
        for (int dx = -(cb.width() - 1); dx <= ca.width() - 1; ++dx) {
            const int cols = std::min(ca.width(), cb.width() + dx) - std::max(0, dx);
            // the bounding-box intersection bounds the overlap from above
            if (static_cast<double>(rows) * cols <= required) {
                continue;
            }
            const MaskedHamming hd = hamming_masked(ca, cb, {dx, dy});
            if (!(static_cast<double>(hd.overlap_area) > required)) {
                continue;
            }
            const double d = hd.distance();
            if (!best || d < best_distance) {
                best_distance = d;
                best = MatchPair{a.id, b.id, d, {dx, dy}, hd.overlap_area};
            }
        }
    }
    return best;
}

std::vector<MatchPair> enumerate_valid_pairs(const std::vector<PatchDescriptor>& a,
                                             const std::vector<PatchDescriptor>& b, const MatchParams& params) {
    std::vector<MatchPair> out;
    for (const auto& pa : a) {
        for (const auto& pb : b) {
            if (!angular_gate(pa, pb, params.angle_tol)) {
                continue;
            }
            if (auto m = best_alignment_distance(pa, pb, params.overlap_frac)) {
                out.push_back(std::move(*m));
            }
        }
    }
    return out;
}

std::vector<MatchPair> greedy_assign(std::vector<MatchPair> pairs) {
    std::sort(pairs.begin(), pairs.end(), [](const MatchPair& x, const MatchPair& y) {
        if (x.distance != y.distance) {
            return x.distance < y.distance;
        }
        if (x.id_a != y.id_a) {
            return x.id_a < y.id_a;
        }
        return x.id_b < y.id_b;
    });
    std::set<std::string> used_a;
    std::set<std::string> used_b;
    std::vector<MatchPair> kept;
    for (auto& p : pairs) {
        if (used_a.contains(p.id_a) || used_b.contains(p.id_b)) {
            continue;
        }
        used_a.insert(p.id_a);
        used_b.insert(p.id_b);
        kept.push_back(std::move(p));
    }
    return kept;
}

ComparisonResult comparison_score(std::vector<MatchPair> assigned, const MatchParams& params) {
    ComparisonResult r;
    r.n_assigned = assigned.size();
    std::stable_sort(assigned.begin(), assigned.end(),
                     [](const MatchPair& x, const MatchPair& y) { return x.distance < y.distance; });
    if (assigned.size() > params.max_pairs) {
        assigned.resize(params.max_pairs);
    }
    r.pairs = std::move(assigned);
    if (r.pairs.empty()) {
        r.no_evidence = true;
        r.score = params.no_evidence_score;
        return r;
    }
    double sum = 0.0;
    for (const auto& p : r.pairs) {
        sum += p.distance;
    }
    r.no_evidence = false;
    r.score = sum / static_cast<double>(r.pairs.size());
    return r;
}

PreparedSide prepare_side(const SideInput& side, const FilterBank& bank, const CompareConfig& config) {
    PreparedSide out;
    out.crop = preprocess(side.image, side.mask, config.preprocess);
    const int crop_side = config.preprocess.crop_side;

    const DetectionSet* dets = &side.detections;
    DetectionSet filtered;
    if (config.top_n_detections) {
        filtered = top_n_detections(side.detections, *config.top_n_detections);
        dets = &filtered;
    }

    out.evidence.image_id = side.detections.image_id;
    out.evidence.crop_offset = out.crop.offset;
    out.evidence.crop_side = crop_side;

    std::vector<PatchDetection> in_crop;
    if (config.frame == DetectionFrame::crop) {
        if (dets->width != crop_side || dets->height != crop_side) {
            throw Error(ErrorKind::dimension_mismatch,
                        "detections for '" + dets->image_id + "' are in a " + std::to_string(dets->width) + "x" +
                            std::to_string(dets->height) + " frame, expected the " + std::to_string(crop_side) +
                            "x" + std::to_string(crop_side) + " crop");
        }
        in_crop = dets->detections;
    } else {
        if (dets->width != side.image.width || dets->height != side.image.height) {
            throw Error(ErrorKind::dimension_mismatch, "detections for '" + dets->image_id +
                                                           "' do not match the source image frame");
        }
        for (const auto& d : dets->detections) {
            Polygon poly = d.polygon;
            for (auto& p : poly) {
                p.x -= out.crop.offset.dx;
                p.y -= out.crop.offset.dy;
            }
            try {
                in_crop.push_back(make_detection(d.id, std::move(poly), d.confidence, d.source, crop_side, crop_side));
            } catch (const Error&) {
                out.evidence.skipped.push_back(d.id + ": outside the crop");
            }
        }
    }

    out.code = encode(out.crop.image, out.crop.mask, bank);
    out.iris_center = mask_centroid(out.crop.mask);
    out.evidence.iris_center = out.iris_center;

    for (const auto& d : in_crop) {
        PatchDescriptor desc;
        desc.id = d.id;
        desc.polygon = d.polygon;
        try {
            desc.code = extract_patch_code(out.code, d.shape);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::unusable_patch && e.kind() != ErrorKind::invalid_argument) {
                throw;
            }
            out.evidence.skipped.push_back(d.id + ": no usable code pixels");
            continue;
        }
        desc.centroid = d.shape.centroid();
        if (desc.centroid == out.iris_center) {
            out.evidence.skipped.push_back(d.id + ": centered on the iris center");
            continue;
        }
        desc.angle = patch_angle(desc.centroid, out.iris_center);
        desc.usable_centroid = Region{desc.code.x0, desc.code.y0, desc.code.usable}.centroid();
        out.evidence.patches.push_back({desc.id, desc.polygon, desc.usable_centroid, desc.angle, desc.area()});
        out.descriptors.push_back(std::move(desc));
    }
    return out;
}

ComparisonResult match_prepared(const PreparedSide& a, const PreparedSide& b, const MatchParams& params) {
    params.validate();
    auto candidates = enumerate_valid_pairs(a.descriptors, b.descriptors, params);
    const std::size_t n_candidates = candidates.size();
    ComparisonResult r = comparison_score(greedy_assign(std::move(candidates)), params);
    r.n_candidates = n_candidates;
    r.side_a = a.evidence;
    r.side_b = b.evidence;
    return r;
}

ComparisonResult compare(const SideInput& a, const SideInput& b, const FilterBank& bank, const CompareConfig& config) {
    config.match.validate();
    config.preprocess.clahe.validate();
    const PreparedSide pa = prepare_side(a, bank, config);
    const PreparedSide pb = prepare_side(b, bank, config);
    ComparisonResult r = match_prepared(pa, pb, config.match);
    r.params = config_to_json(config, bank);
    return r;
}

json config_to_json(const CompareConfig& config, const FilterBank& bank) {
    std::ostringstream bank_text;
    write_filter_bank(bank, bank_text);
    char digest[17];
    std::snprintf(digest, sizeof digest, "%016llx", static_cast<unsigned long long>(fnv1a(bank_text.str())));
    return {
        {"angle_tol", config.match.angle_tol},
        {"max_pairs", config.match.max_pairs},
        {"overlap_frac", config.match.overlap_frac},
        {"no_evidence_score", config.match.no_evidence_score},
        {"crop_side", config.preprocess.crop_side},
        {"clahe",
         {{"tile_grid", {config.preprocess.clahe.tile_cols, config.preprocess.clahe.tile_rows}},
          {"clip_limit", config.preprocess.clahe.clip_limit}}},
        {"detection_frame", config.frame == DetectionFrame::crop ? "crop" : "source"},
        {"top_n_detections", config.top_n_detections ? json(*config.top_n_detections) : json(nullptr)},
        {"filter_bank", {{"n_filters", bank.n_filters()}, {"size", bank.size()}, {"digest", digest}}},
    };
}

std::uint64_t config_hash(const CompareConfig& config, const FilterBank& bank) {
    return fnv1a(config_to_json(config, bank).dump());
}

namespace {

json polygon_json(const Polygon& poly) {
    json out = json::array();
    for (const auto& p : poly) {
        out.push_back({p.x, p.y});
    }
    return out;
}

Polygon polygon_from(const json& j) {
    Polygon poly;
    for (const auto& v : j) {
        poly.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
    }
    return poly;
}

json side_json(const SideEvidence& s) {
    json patches = json::array();
    for (const auto& p : s.patches) {
        patches.push_back({{"id", p.id},
                           {"polygon", polygon_json(p.polygon)},
                           {"anchor", {p.anchor.x, p.anchor.y}},
                           {"angle", p.angle},
                           {"area", p.area}});
    }
    return {{"image_id", s.image_id},
            {"crop_offset", {s.crop_offset.dx, s.crop_offset.dy}},
            {"crop_side", s.crop_side},
            {"iris_center", {s.iris_center.x, s.iris_center.y}},
            {"patches", std::move(patches)},
            {"skipped", s.skipped}};
}

SideEvidence side_from(const json& j) {
    SideEvidence s;
    s.image_id = j.at("image_id").get<std::string>();
    s.crop_offset = {j.at("crop_offset").at(0).get<int>(), j.at("crop_offset").at(1).get<int>()};
    s.crop_side = j.at("crop_side").get<int>();
    s.iris_center = {j.at("iris_center").at(0).get<double>(), j.at("iris_center").at(1).get<double>()};
    for (const auto& p : j.at("patches")) {
        s.patches.push_back({p.at("id").get<std::string>(), polygon_from(p.at("polygon")),
                             {p.at("anchor").at(0).get<double>(), p.at("anchor").at(1).get<double>()},
                             p.at("angle").get<double>(), p.at("area").get<std::size_t>()});
    }
    s.skipped = j.value("skipped", std::vector<std::string>{});
    return s;
}

}  // namespace

json to_json(const ComparisonResult& r) {
    json pairs = json::array();
    for (const auto& p : r.pairs) {
        pairs.push_back({{"id_a", p.id_a},
                         {"id_b", p.id_b},
                         {"distance", p.distance},
                         {"offset", {p.offset.dx, p.offset.dy}},
                         {"overlap_area", p.overlap_area}});
    }
    return {{"score", r.score},
            {"no_evidence", r.no_evidence},
            {"n_candidates", r.n_candidates},
            {"n_assigned", r.n_assigned},
            {"pairs", std::move(pairs)},
            {"params", r.params},
            {"side_a", side_json(r.side_a)},
            {"side_b", side_json(r.side_b)}};
}

ComparisonResult comparison_from_json(const json& doc) {
    try {
        ComparisonResult r;
        r.score = doc.at("score").get<double>();
        r.no_evidence = doc.at("no_evidence").get<bool>();
        r.n_candidates = doc.at("n_candidates").get<std::size_t>();
        r.n_assigned = doc.at("n_assigned").get<std::size_t>();
        for (const auto& p : doc.at("pairs")) {
            r.pairs.push_back({p.at("id_a").get<std::string>(), p.at("id_b").get<std::string>(),
                               p.at("distance").get<double>(),
                               {p.at("offset").at(0).get<int>(), p.at("offset").at(1).get<int>()},
                               p.at("overlap_area").get<std::size_t>()});
        }
        r.params = doc.value("params", json::object());
        r.side_a = side_from(doc.at("side_a"));
        r.side_b = side_from(doc.at("side_b"));
        return r;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::parse_error, std::string("comparison result: ") + e.what());
    }
}

}  // namespace pbm
