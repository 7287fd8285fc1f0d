#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "pbm/detection.hpp"
#include "pbm/error.hpp"
#include "pbm/geometry.hpp"
#include "pbm/imaging.hpp"

using namespace pbm;
using nlohmann::json;

namespace {

json triangle_doc() {
    return json::parse(R"({
        "image_id": "img1", "subject_id": "s1", "eye": "L", "pmi_hours": 12.5,
        "width": 64, "height": 64,
        "detections": [
            {"id": "d0", "polygon": [[10, 10], [30, 10], [10, 30]], "confidence": 0.9}
        ]
    })");
}

LabeledRegion labeled(std::string id, const Polygon& p, int frame) {
    return {std::move(id), rasterize_polygon(p, frame, frame)};
}

Polygon rect(double x0, double y0, double x1, double y1) { return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}; }

IrisMask full_mask(int w, int h) {
    IrisMask m(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) m.bits.set(x, y);
    return m;
}

void texture_block(GrayImage& img, int x0, int y0, int side, std::uint64_t seed) {
    Rng rng(seed);
    for (int y = y0; y < y0 + side; ++y)
        for (int x = x0; x < x0 + side; ++x) img.at(x, y) = static_cast<std::uint8_t>(rng.below(256));
}

struct Window {
    int x, y;
    double score;
};

// Every step-aligned window scored by a direct two-pass standard deviation.
std::vector<Window> score_windows(const GrayImage& img, int win) {
    std::vector<Window> out;
    for (int y = 0; y + win <= img.height; y += win / 2)
        for (int x = 0; x + win <= img.width; x += win / 2) {
            double mean = 0.0;
            for (int j = 0; j < win; ++j)
                for (int i = 0; i < win; ++i) mean += img.at(x + i, y + j);
            mean /= win * win;
            double var = 0.0;
            for (int j = 0; j < win; ++j)
                for (int i = 0; i < win; ++i) var += (img.at(x + i, y + j) - mean) * (img.at(x + i, y + j) - mean);
            out.push_back({x, y, std::sqrt(var / (win * win))});
        }
    return out;
}

Point2d window_origin(const PatchDetection& d) { return d.polygon.front(); }

}  // namespace

TEST_CASE("rasterize_polygon uses pixel centers, half-open") {
    const auto r = rasterize_polygon(rect(2, 3, 6, 5), 10, 10);
    CHECK(r.area() == 8);
    CHECK(r.x0 == 2);
    CHECK(r.y0 == 3);
    CHECK(r.contains(5, 4));
    CHECK_FALSE(r.contains(6, 4));
    CHECK_FALSE(r.contains(2, 5));

    SUBCASE("triangle pixel set matches point_in_polygon") {
        const Polygon tri{{1.3, 1.1}, {17.8, 4.2}, {6.5, 15.9}};
        const auto t = rasterize_polygon(tri, 20, 20);
        std::size_t n = 0;
        for (int y = 0; y < 20; ++y)
            for (int x = 0; x < 20; ++x) {
                const bool in = point_in_polygon(tri, {double(x), double(y)});
                n += in;
                CHECK(t.contains(x, y) == in);
            }
        CHECK(t.area() == n);
    }
    SUBCASE("even-odd: a self-overlapping bowtie") {
        const Polygon bow{{0, 0}, {8, 8}, {8, 0}, {0, 8}};
        const auto b = rasterize_polygon(bow, 9, 9);
        CHECK(b.contains(1, 4));
        CHECK(b.contains(7, 4));
        CHECK_FALSE(b.contains(4, 1));
    }
}

TEST_CASE("parse_detections") {
    const auto dir = std::filesystem::temp_directory_path() / "pbm_test_detection";
    std::filesystem::create_directories(dir);
    auto write = [&](const json& doc, const std::string& name) {
        std::ofstream(dir / name) << doc.dump();
        return dir / name;
    };

    SUBCASE("one triangle") {
        const auto set = parse_detections(write(triangle_doc(), "tri.json"));
        REQUIRE(set.detections.size() == 1);
        CHECK(set.detections[0].confidence == 0.9);
        CHECK(set.detections[0].source == DetectionSource::model);
        CHECK(set.eye == Eye::left);
        CHECK(set.pmi_hours == 12.5);
        CHECK(set.detections[0].shape.area() > 0);
    }
    SUBCASE("duplicate ids") {
        auto doc = triangle_doc();
        doc["detections"].push_back(doc["detections"][0]);
        CHECK_THROWS_AS(parse_detections(write(doc, "dup.json")), Error);
        CHECK_FALSE(validate_detection_json(doc).empty());
    }
    SUBCASE("degenerate and out-of-bounds polygons") {
        auto two = triangle_doc();
        two["detections"][0]["polygon"] = json::array({json::array({1, 1}), json::array({5, 5})});
        CHECK_THROWS_AS(parse_detections(write(two, "two.json")), Error);
        auto out = triangle_doc();
        out["detections"][0]["polygon"][1] = json::array({65, 10});
        CHECK_THROWS_AS(parse_detections(write(out, "out.json")), Error);
        auto conf = triangle_doc();
        conf["detections"][0]["confidence"] = 1.5;
        CHECK_THROWS_AS(parse_detections(write(conf, "conf.json")), Error);
        auto eye = triangle_doc();
        eye["eye"] = "X";
        CHECK_FALSE(validate_detection_json(eye).empty());
        auto missing = triangle_doc();
        missing.erase("width");
        CHECK_FALSE(validate_detection_json(missing).empty());
    }
    SUBCASE("write then parse round-trips") {
        DetectionSet set;
        set.image_id = "x";
        set.subject_id = "s9";
        set.eye = Eye::right;
        set.pmi_hours = 371.25;
        set.width = 100;
        set.height = 80;
        set.detections.push_back(make_detection("a", {{1.25, 2.5}, {40.125, 3}, {20, 70.75}}, 0.33,
                                                DetectionSource::human, 100, 80));
        set.detections.push_back(make_detection("b", rect(50, 50, 99.5, 79), 1.0, DetectionSource::fallback, 100, 80));
        write_detections(set, dir / "rt.json");
        CHECK(parse_detections(dir / "rt.json") == set);
        CHECK(detections_from_json(to_json(set)) == set);
    }
    SUBCASE("missing file") { CHECK_THROWS_AS(parse_detections(dir / "nope.json"), Error); }
}

TEST_CASE("translate and top-n") {
    DetectionSet set;
    set.width = set.height = 50;
    set.detections.push_back(make_detection("a", rect(10, 10, 20, 20), 0.2, DetectionSource::model, 50, 50));
    set.detections.push_back(make_detection("b", rect(30, 30, 40, 40), 0.9, DetectionSource::model, 50, 50));
    set.detections.push_back(make_detection("c", rect(5, 30, 15, 40), 0.9, DetectionSource::model, 50, 50));
    const auto moved = translate_detections(set, {-5, -5}, 40, 40);
    CHECK(moved.width == 40);
    CHECK(moved.detections[0].polygon.front() == Point2d{5, 5});
    CHECK(moved.detections[0].shape.area() == 100);
    const auto top = top_n_detections(set, 2);
    REQUIRE(top.detections.size() == 2);
    CHECK(top.detections[0].id == "b");
    CHECK(top.detections[1].id == "c");
}

TEST_CASE("aggregate_annotations") {
    SUBCASE("contained smaller mask is removed") {
        const auto a = labeled("A", rect(0, 0, 10, 10), 32);
        const auto b = labeled("B", rect(2, 2, 10, 7), 32);
        CHECK(a.region.area() == 100);
        CHECK(b.region.area() == 40);
        const auto out = aggregate_annotations({b, a});
        REQUIRE(out.size() == 1);
        CHECK(out[0].id == "A");
    }
    SUBCASE("disjoint masks both kept") {
        const auto out = aggregate_annotations({labeled("A", rect(0, 0, 5, 5), 32), labeled("B", rect(10, 10, 15, 15), 32)});
        CHECK(out.size() == 2);
    }
    SUBCASE("chain A > B > C leaves A") {
        const std::vector<LabeledRegion> in{labeled("C", rect(4, 4, 8, 8), 32), labeled("A", rect(0, 0, 20, 20), 32),
                                            labeled("B", rect(2, 2, 12, 12), 32)};
        const auto out = aggregate_annotations(in);
        REQUIRE(out.size() == 1);
        CHECK(out[0].id == "A");
        for (std::size_t i = 0; i < out.size(); ++i)
            for (std::size_t j = i + 1; j < out.size(); ++j)
                CHECK(oracle::naive_intersection(out[i].region, out[j].region) * 2 <=
                      std::min(out[i].region.area(), out[j].region.area()));
    }
    SUBCASE("equal areas: the later id goes") {
        const auto out = aggregate_annotations({labeled("q", rect(0, 0, 4, 4), 32), labeled("p", rect(1, 0, 5, 4), 32)});
        REQUIRE(out.size() == 1);
        CHECK(out[0].id == "p");
    }
    SUBCASE("exactly half overlap is kept") {
        const auto out = aggregate_annotations({labeled("A", rect(0, 0, 4, 4), 32), labeled("B", rect(2, 0, 6, 4), 32)});
        CHECK(out.size() == 2);
    }
    SUBCASE("empty input") { CHECK(aggregate_annotations({}).empty()); }
    SUBCASE("random sets: subset, size bound, no violating pair") {
        Rng rng(1234);
        for (int t = 0; t < 200; ++t) {
            std::vector<LabeledRegion> in;
            const int n = 1 + static_cast<int>(rng.below(10));
            for (int i = 0; i < n; ++i) {
                auto r = labeled("a" + std::to_string(i), oracle::random_polygon(rng, 40), 40);
                if (r.region.area() > 0) in.push_back(std::move(r));
            }
            const auto out = aggregate_annotations(in);
            CHECK(out.size() <= in.size());
            for (const auto& o : out) CHECK(std::find(in.begin(), in.end(), o) != in.end());
            for (std::size_t i = 0; i < out.size(); ++i)
                for (std::size_t j = i + 1; j < out.size(); ++j)
                    CHECK(oracle::naive_intersection(out[i].region, out[j].region) * 2 <=
                          std::min(out[i].region.area(), out[j].region.area()));
        }
    }
}

TEST_CASE("patch_angle") {
    const Point2d c{128, 128};
    CHECK(patch_angle({228, 128}, c) == 0.0);
    CHECK(patch_angle({128, 228}, c) == 90.0);
    CHECK(patch_angle({28, 128}, c) == 180.0);
    CHECK(patch_angle({128, 28}, c) == -90.0);
    CHECK_THROWS_AS(patch_angle(c, c), Error);

    SUBCASE("reflection adds 180 degrees") {
        Rng rng(6);
        for (int t = 0; t < 500; ++t) {
            const Point2d p{rng.uniform(0, 256), rng.uniform(0, 256)};
            const Point2d reflected{2 * c.x - p.x, 2 * c.y - p.y};
            const double a = patch_angle(p, c);
            const double b = patch_angle(reflected, c);
            CHECK(a > -180.0);
            CHECK(a <= 180.0);
            CHECK(wrap_degrees(a + 180.0) == doctest::Approx(b).epsilon(1e-9));
        }
    }
    SUBCASE("detection overload uses the shape centroid") {
        const auto d = make_detection("r", rect(200, 120, 210, 130), 1.0, DetectionSource::model, 256, 256);
        CHECK(patch_angle(d, {100.0, 124.5}) == 0.0);
    }
}

TEST_CASE("fallback_detect") {
    SUBCASE("constant image gives zero confidences") {
        const auto set = fallback_detect(GrayImage(128, 128, 77), full_mask(128, 128));
        CHECK(set.detections.size() == 10);
        for (const auto& d : set.detections) CHECK(d.confidence == 0.0);
    }
    SUBCASE("single textured block is found") {
        GrayImage img(128, 128, 90);
        texture_block(img, 64, 32, 32, 1);
        const auto set = fallback_detect(img, full_mask(128, 128), {1, 32, 0.3});
        REQUIRE(set.detections.size() == 1);
        const auto scores = score_windows(img, 32);
        const auto best = *std::max_element(scores.begin(), scores.end(),
                                            [](const Window& a, const Window& b) { return a.score < b.score; });
        CHECK(window_origin(set.detections[0]) == Point2d{double(best.x), double(best.y)});
        CHECK(set.detections[0].confidence == 1.0);
        CHECK(window_origin(set.detections[0]) == Point2d{64, 32});
    }
    SUBCASE("three separated blobs give one detection each") {
        GrayImage img(160, 160, 90);
        const std::vector<Point2d> blobs{{16, 16}, {112, 32}, {48, 112}};
        for (std::size_t i = 0; i < blobs.size(); ++i)
            texture_block(img, int(blobs[i].x), int(blobs[i].y), 32, 10 + i);
        const auto set = fallback_detect(img, full_mask(160, 160), {3, 32, 0.3});
        REQUIRE(set.detections.size() == 3);
        for (const auto& b : blobs) {
            int hits = 0;
            for (const auto& d : set.detections) hits += window_origin(d) == b;
            CHECK(hits == 1);
        }
    }
    SUBCASE("windows stay inside and respect suppression") {
        Rng rng(40);
        for (int t = 0; t < 20; ++t) {
            GrayImage img(96 + static_cast<int>(rng.below(64)), 96 + static_cast<int>(rng.below(64)));
            for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.below(256));
            const auto set = fallback_detect(img, full_mask(img.width, img.height), {12, 24, 0.3});
            for (std::size_t i = 0; i < set.detections.size(); ++i) {
                const auto& d = set.detections[i];
                for (const auto& v : d.polygon) {
                    CHECK(v.x >= 0);
                    CHECK(v.y >= 0);
                    CHECK(v.x <= img.width);
                    CHECK(v.y <= img.height);
                }
                CHECK(d.confidence >= 0.0);
                CHECK(d.confidence <= 1.0);
                for (std::size_t j = i + 1; j < set.detections.size(); ++j)
                    CHECK(double(oracle::naive_intersection(d.shape, set.detections[j].shape)) <= 0.3 * 24 * 24);
            }
        }
    }
    SUBCASE("no window fits the mask") {
        IrisMask tiny(64, 64);
        tiny.bits.set(3, 3);
        CHECK_THROWS_AS(fallback_detect(GrayImage(64, 64), tiny), Error);
        CHECK_THROWS_AS(fallback_detect(GrayImage(64, 64), full_mask(64, 64), {0, 32, 0.3}), Error);
    }
}
