#include "pbm/detection.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <set>

#include <nlohmann/json.hpp>

#include "pbm/error.hpp"

namespace pbm {

using nlohmann::json;

const char* to_string(DetectionSource s) noexcept {
    switch (s) {
        case DetectionSource::model: return "model";
        case DetectionSource::human: return "human";
        case DetectionSource::fallback: return "fallback";
    }
    return "model";
}

const char* to_string(Eye e) noexcept { return e == Eye::left ? "L" : "R"; }

DetectionSource parse_detection_source(const std::string& s) {
    if (s == "model") return DetectionSource::model;
    if (s == "human") return DetectionSource::human;
    if (s == "fallback") return DetectionSource::fallback;
    throw Error(ErrorKind::parse_error, "unknown detection source '" + s + "'");
}

Eye parse_eye(const std::string& s) {
    if (s == "L") return Eye::left;
    if (s == "R") return Eye::right;
    throw Error(ErrorKind::parse_error, "eye must be \"L\" or \"R\", got '" + s + "'");
}

Region rasterize_polygon(const Polygon& polygon, int width, int height) {
    if (polygon.empty()) {
        return {};
    }
    double lo_x = polygon[0].x, hi_x = polygon[0].x, lo_y = polygon[0].y, hi_y = polygon[0].y;
    for (const auto& p : polygon) {
        lo_x = std::min(lo_x, p.x);
        hi_x = std::max(hi_x, p.x);
        lo_y = std::min(lo_y, p.y);
        hi_y = std::max(hi_y, p.y);
    }
    const int x_begin = std::max(0, static_cast<int>(std::floor(lo_x)));
    const int x_end = std::min(width - 1, static_cast<int>(std::ceil(hi_x)));
    const int y_begin = std::max(0, static_cast<int>(std::floor(lo_y)));
    const int y_end = std::min(height - 1, static_cast<int>(std::ceil(hi_y)));

    int min_x = std::numeric_limits<int>::max(), max_x = -1;
    int min_y = std::numeric_limits<int>::max(), max_y = -1;
    std::vector<std::pair<int, int>> hits;
    for (int y = y_begin; y <= y_end; ++y) {
        for (int x = x_begin; x <= x_end; ++x) {
            if (point_in_polygon(polygon, {static_cast<double>(x), static_cast<double>(y)})) {
                hits.emplace_back(x, y);
                min_x = std::min(min_x, x);
                max_x = std::max(max_x, x);
                min_y = std::min(min_y, y);
                max_y = std::max(max_y, y);
            }
        }
    }
    if (hits.empty()) {
        return {};
    }
    Region r{min_x, min_y, BitPlane(max_x - min_x + 1, max_y - min_y + 1)};
    for (const auto& [x, y] : hits) {
        r.bits.set(x - min_x, y - min_y);
    }
    return r;
}

PatchDetection make_detection(std::string id, Polygon polygon, double confidence,
                              DetectionSource source, int frame_width, int frame_height) {
    if (polygon.size() < 3) {
        throw Error(ErrorKind::invalid_argument, "detection '" + id + "': polygon needs at least 3 vertices");
    }
    for (const auto& p : polygon) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y) || p.x < 0 || p.y < 0 || p.x > frame_width ||
            p.y > frame_height) {
            throw Error(ErrorKind::invalid_argument, "detection '" + id + "': vertex outside the frame");
        }
    }
    if (!(confidence >= 0.0 && confidence <= 1.0)) {
        throw Error(ErrorKind::invalid_argument, "detection '" + id + "': confidence outside [0,1]");
    }
    Region shape = rasterize_polygon(polygon, frame_width, frame_height);
    if (shape.area() == 0) {
        throw Error(ErrorKind::invalid_argument, "detection '" + id + "': polygon covers no pixel center");
    }
    return {std::move(id), std::move(polygon), std::move(shape), confidence, source};
}

namespace {

bool is_number(const json& j) { return j.is_number(); }

}  // namespace

std::vector<std::string> validate_detection_json(const json& doc) {
    std::vector<std::string> errors;
    if (!doc.is_object()) {
        return {"document must be a JSON object"};
    }
    auto require = [&](const char* key, auto pred, const char* what) {
        if (!doc.contains(key)) {
            errors.push_back(std::string("missing field '") + key + "'");
            return false;
        }
        if (!pred(doc.at(key))) {
            errors.push_back(std::string("field '") + key + "' must be " + what);
            return false;
        }
        return true;
    };
    require("image_id", [](const json& j) { return j.is_string(); }, "a string");
    require("subject_id", [](const json& j) { return j.is_string(); }, "a string");
    if (require("eye", [](const json& j) { return j.is_string(); }, "a string")) {
        const auto& e = doc.at("eye").get_ref<const std::string&>();
        if (e != "L" && e != "R") {
            errors.emplace_back("field 'eye' must be \"L\" or \"R\"");
        }
    }
    if (require("pmi_hours", is_number, "a number") && doc.at("pmi_hours").get<double>() < 0) {
        errors.emplace_back("field 'pmi_hours' must be >= 0");
    }
    const bool has_w = require("width", [](const json& j) { return j.is_number_integer() && j.get<long long>() > 0; },
                               "a positive integer");
    const bool has_h = require("height", [](const json& j) { return j.is_number_integer() && j.get<long long>() > 0; },
                               "a positive integer");
    if (!require("detections", [](const json& j) { return j.is_array(); }, "an array")) {
        return errors;
    }
    const double width = has_w ? doc.at("width").get<double>() : std::numeric_limits<double>::infinity();
    const double height = has_h ? doc.at("height").get<double>() : std::numeric_limits<double>::infinity();
    std::set<std::string> ids;
    std::size_t index = 0;
    for (const auto& det : doc.at("detections")) {
        const std::string where = "detections[" + std::to_string(index++) + "]";
        if (!det.is_object()) {
            errors.push_back(where + " must be an object");
            continue;
        }
        if (!det.contains("id") || !det.at("id").is_string()) {
            errors.push_back(where + ": 'id' must be a string");
        } else if (!ids.insert(det.at("id").get<std::string>()).second) {
            errors.push_back(where + ": duplicate id '" + det.at("id").get<std::string>() + "'");
        }
        if (!det.contains("confidence") || !det.at("confidence").is_number()) {
            errors.push_back(where + ": 'confidence' must be a number");
        } else {
            const double c = det.at("confidence").get<double>();
            if (!(c >= 0.0 && c <= 1.0)) {
                errors.push_back(where + ": 'confidence' must lie in [0, 1]");
            }
        }
        if (det.contains("source")) {
            const auto& s = det.at("source");
            if (!s.is_string() || (s != "model" && s != "human" && s != "fallback")) {
                errors.push_back(where + ": 'source' must be one of model, human, fallback");
            }
        }
        if (!det.contains("polygon") || !det.at("polygon").is_array()) {
            errors.push_back(where + ": 'polygon' must be an array of [x, y] pairs");
            continue;
        }
        const auto& poly = det.at("polygon");
        if (poly.size() < 3) {
            errors.push_back(where + ": polygon needs at least 3 vertices");
        }
        for (const auto& v : poly) {
            if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
                errors.push_back(where + ": every vertex must be [x, y]");
                break;
            }
            const double x = v[0].get<double>();
            const double y = v[1].get<double>();
            if (x < 0 || y < 0 || x > width || y > height) {
                errors.push_back(where + ": vertex (" + v[0].dump() + ", " + v[1].dump() +
                                 ") is outside the frame");
                break;
            }
        }
    }
    return errors;
}

DetectionSet detections_from_json(const json& doc) {
    const auto errors = validate_detection_json(doc);
    if (!errors.empty()) {
        std::string msg = "invalid detection document:";
        for (const auto& e : errors) {
            msg += "\n  " + e;
        }
        throw Error(ErrorKind::parse_error, msg);
    }
    DetectionSet set;
    set.image_id = doc.at("image_id").get<std::string>();
    set.subject_id = doc.at("subject_id").get<std::string>();
    set.eye = parse_eye(doc.at("eye").get<std::string>());
    set.pmi_hours = doc.at("pmi_hours").get<double>();
    set.width = doc.at("width").get<int>();
    set.height = doc.at("height").get<int>();
    for (const auto& det : doc.at("detections")) {
        Polygon poly;
        for (const auto& v : det.at("polygon")) {
            poly.push_back({v[0].get<double>(), v[1].get<double>()});
        }
        const auto source = det.contains("source") ? parse_detection_source(det.at("source").get<std::string>())
                                                   : DetectionSource::model;
        try {
            set.detections.push_back(make_detection(det.at("id").get<std::string>(), std::move(poly),
                                                    det.at("confidence").get<double>(), source, set.width,
                                                    set.height));
        } catch (const Error& e) {
            throw Error(ErrorKind::parse_error, e.what());
        }
    }
    return set;
}

json to_json(const DetectionSet& set) {
    json dets = json::array();
    for (const auto& d : set.detections) {
        json poly = json::array();
        for (const auto& p : d.polygon) {
            poly.push_back({p.x, p.y});
        }
        dets.push_back({{"id", d.id}, {"polygon", std::move(poly)}, {"confidence", d.confidence},
                        {"source", to_string(d.source)}});
    }
    return {{"image_id", set.image_id}, {"subject_id", set.subject_id}, {"eye", to_string(set.eye)},
            {"pmi_hours", set.pmi_hours}, {"width", set.width}, {"height", set.height},
            {"detections", std::move(dets)}};
}

DetectionSet parse_detections(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::io, "cannot open detections: " + path.string());
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::parse_error, path.string() + ": " + e.what());
    }
    return detections_from_json(doc);
}

void write_detections(const DetectionSet& set, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorKind::io, "cannot write detections: " + path.string());
    }
    out << to_json(set).dump(2) << '\n';
}

DetectionSet translate_detections(const DetectionSet& set, PixelOffset delta, int width, int height) {
    DetectionSet out = set;
    out.width = width;
    out.height = height;
    out.detections.clear();
    for (const auto& d : set.detections) {
        Polygon poly = d.polygon;
        for (auto& p : poly) {
            p.x += delta.dx;
            p.y += delta.dy;
        }
        out.detections.push_back(make_detection(d.id, std::move(poly), d.confidence, d.source, width, height));
    }
    return out;
}

DetectionSet top_n_detections(const DetectionSet& set, std::size_t n) {
    DetectionSet out = set;
    std::stable_sort(out.detections.begin(), out.detections.end(),
                     [](const PatchDetection& a, const PatchDetection& b) { return a.confidence > b.confidence; });
    if (out.detections.size() > n) {
        out.detections.resize(n);
    }
    return out;
}

std::vector<LabeledRegion> aggregate_annotations(const std::vector<LabeledRegion>& annotations,
                                                 double max_overlap) {
    std::vector<std::size_t> order(annotations.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<std::size_t> areas(annotations.size());
    std::transform(annotations.begin(), annotations.end(), areas.begin(),
                   [](const LabeledRegion& a) { return a.region.area(); });
    // Largest first; among equal areas the earlier id survives.
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        if (areas[i] != areas[j]) {
            return areas[i] > areas[j];
        }
        return annotations[i].id < annotations[j].id;
    });

    std::vector<bool> keep(annotations.size(), false);
    std::vector<std::size_t> kept;
    for (const std::size_t i : order) {
        if (areas[i] == 0) {
            continue;
        }
        const bool redundant = std::any_of(kept.begin(), kept.end(), [&](std::size_t j) {
            const auto inter = intersection_area(annotations[i].region, annotations[j].region);
            return static_cast<double>(inter) > max_overlap * static_cast<double>(std::min(areas[i], areas[j]));
        });
        if (!redundant) {
            keep[i] = true;
            kept.push_back(i);
        }
    }
    std::vector<LabeledRegion> out;
    for (std::size_t i = 0; i < annotations.size(); ++i) {
        if (keep[i]) {
            out.push_back(annotations[i]);
        }
    }
    return out;
}

double patch_angle(Point2d patch_centroid, Point2d iris_center) {
    const double dx = patch_centroid.x - iris_center.x;
    const double dy = patch_centroid.y - iris_center.y;
    if (dx == 0.0 && dy == 0.0) {
        throw Error(ErrorKind::invalid_argument, "patch centroid coincides with the iris center");
    }
    const double deg = std::atan2(dy, dx) * 180.0 / std::numbers::pi;
    return deg == -180.0 ? 180.0 : deg;
}

double patch_angle(const PatchDetection& det, Point2d iris_center) {
    return patch_angle(det.shape.centroid(), iris_center);
}

DetectionSet fallback_detect(const GrayImage& img, const IrisMask& mask, const FallbackParams& params) {
    if (img.width != mask.width() || img.height != mask.height()) {
        throw Error(ErrorKind::dimension_mismatch, "fallback_detect: image and mask sizes differ");
    }
    if (params.k < 1) {
        throw Error(ErrorKind::invalid_argument, "fallback_detect: k must be >= 1");
    }
    if (params.window < 4) {
        throw Error(ErrorKind::invalid_argument, "fallback_detect: window must be >= 4");
    }
    const int w = img.width;
    const int h = img.height;
    const int win = params.window;
    const int step = win / 2;

    // integral images of mask count, intensity, squared intensity
    const auto stride = static_cast<std::size_t>(w + 1);
    std::vector<long long> m_sum(stride * static_cast<std::size_t>(h + 1), 0);
    std::vector<double> s1(m_sum.size(), 0.0), s2(m_sum.size(), 0.0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const auto i = static_cast<std::size_t>(y + 1) * stride + static_cast<std::size_t>(x + 1);
            const double v = img.at(x, y);
            m_sum[i] = m_sum[i - 1] + m_sum[i - stride] - m_sum[i - stride - 1] + (mask.at(x, y) ? 1 : 0);
            s1[i] = s1[i - 1] + s1[i - stride] - s1[i - stride - 1] + v;
            s2[i] = s2[i - 1] + s2[i - stride] - s2[i - stride - 1] + v * v;
        }
    }
    auto box = [&](const auto& t, int x, int y) {
        const auto a = static_cast<std::size_t>(y) * stride + static_cast<std::size_t>(x);
        const auto b = static_cast<std::size_t>(y + win) * stride + static_cast<std::size_t>(x);
        return t[b + win] - t[b] - t[a + win] + t[a];
    };

    struct Candidate {
        int x, y;
        double score;
    };
    std::vector<Candidate> candidates;
    const double n = static_cast<double>(win) * win;
    for (int y = 0; y + win <= h; y += step) {
        for (int x = 0; x + win <= w; x += step) {
            if (box(m_sum, x, y) != static_cast<long long>(win) * win) {
                continue;
            }
            const double mean = box(s1, x, y) / n;
            const double var = std::max(0.0, box(s2, x, y) / n - mean * mean);
            candidates.push_back({x, y, std::sqrt(var)});
        }
    }
    if (candidates.empty()) {
        throw Error(ErrorKind::empty_input, "fallback_detect: no window lies fully inside the mask");
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) { return a.score > b.score; });

    std::vector<Candidate> kept;
    for (const auto& c : candidates) {
        if (kept.size() == params.k) {
            break;
        }
        const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](const Candidate& k) {
            const int ix = std::max(0, std::min(c.x, k.x) + win - std::max(c.x, k.x));
            const int iy = std::max(0, std::min(c.y, k.y) + win - std::max(c.y, k.y));
            return static_cast<double>(ix) * iy > params.max_overlap * n;
        });
        if (!suppressed) {
            kept.push_back(c);
        }
    }

    DetectionSet set;
    set.width = w;
    set.height = h;
    const double top = kept.front().score;
    for (std::size_t i = 0; i < kept.size(); ++i) {
        const auto& c = kept[i];
        const double x0 = c.x, y0 = c.y, x1 = c.x + win, y1 = c.y + win;
        set.detections.push_back(make_detection("f" + std::to_string(i), {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}},
                                                top > 0.0 ? c.score / top : 0.0, DetectionSource::fallback, w, h));
    }
    return set;
}

}  // namespace pbm
