#include "pbm/report.hpp"

#include <cstdio>
#include <map>
#include <sstream>

#include "pbm/error.hpp"

namespace pbm {

namespace {

constexpr const char* kDetectionColor = "#00ffff";
constexpr const char* kLinkColor = "#00008b";

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string num4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (const char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

void check_on_canvas(const Polygon& poly, int w, int h, const std::string& id) {
    for (const auto& p : poly) {
        if (p.x < 0 || p.y < 0 || p.x > w || p.y > h) {
            throw Error(ErrorKind::invalid_argument, "patch '" + id + "' has a vertex outside the canvas");
        }
    }
}

std::string points(const Polygon& poly, double dx) {
    std::string s;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        s += (i ? " " : "") + num(poly[i].x + dx) + "," + num(poly[i].y);
    }
    return s;
}

void backdrop(std::ostringstream& svg, const GrayImage& img, double x, const RenderOptions& opts) {
    if (opts.backdrop == Backdrop::none) {
        svg << "  <rect class=\"backdrop\" x=\"" << num(x) << "\" y=\"0\" width=\"" << img.width << "\" height=\""
            << img.height << "\" fill=\"#000000\"/>\n";
        return;
    }
    svg << "  <image class=\"backdrop\" x=\"" << num(x) << "\" y=\"0\" width=\"" << img.width << "\" height=\""
        << img.height << "\" href=\"data:image/png;base64," << base64_encode(encode_png(img)) << "\"/>\n";
}

}  // namespace

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
    static constexpr char table[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 2 < bytes.size(); i += 3) {
        const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
        out += table[(v >> 18) & 63];
        out += table[(v >> 12) & 63];
        out += table[(v >> 6) & 63];
        out += table[v & 63];
    }
    if (i + 1 == bytes.size()) {
        const std::uint32_t v = bytes[i] << 16;
        out += table[(v >> 18) & 63];
        out += table[(v >> 12) & 63];
        out += "==";
    } else if (i + 2 == bytes.size()) {
        const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8);
        out += table[(v >> 18) & 63];
        out += table[(v >> 12) & 63];
        out += table[(v >> 6) & 63];
        out += '=';
    }
    return out;
}

std::string render_detections(const GrayImage& img, const std::vector<PatchDetection>& detections,
                              const RenderOptions& opts) {
    for (const auto& d : detections) {
        check_on_canvas(d.polygon, img.width, img.height, d.id);
    }
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << img.width << "\" height=\"" << img.height
        << "\" viewBox=\"0 0 " << img.width << ' ' << img.height << "\">\n";
    backdrop(svg, img, 0.0, opts);
    for (const auto& d : detections) {
        svg << "  <polygon class=\"detection\" data-id=\"" << escape(d.id) << "\" points=\"" << points(d.polygon, 0.0)
            << "\" fill=\"none\" stroke=\"" << kDetectionColor << "\" stroke-width=\"1\"/>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

std::string render_comparison(const ComparisonResult& result, const GrayImage& img_a, const GrayImage& img_b,
                              const RenderOptions& opts) {
    const auto check_canvas = [](const GrayImage& img, const SideEvidence& side, const char* name) {
        if (img.width != side.crop_side || img.height != side.crop_side) {
            throw Error(ErrorKind::dimension_mismatch, std::string("image ") + name + " does not match the " +
                                                           std::to_string(side.crop_side) + "px crop");
        }
        for (const auto& p : side.patches) {
            check_on_canvas(p.polygon, img.width, img.height, p.id);
        }
    };
    check_canvas(img_a, result.side_a, "A");
    check_canvas(img_b, result.side_b, "B");

    std::map<std::string, const EvidencePatch*> patches_a, patches_b;
    for (const auto& p : result.side_a.patches) patches_a[p.id] = &p;
    for (const auto& p : result.side_b.patches) patches_b[p.id] = &p;
    for (const auto& pair : result.pairs) {
        if (!patches_a.contains(pair.id_a) || !patches_b.contains(pair.id_b)) {
            throw Error(ErrorKind::not_found,
                        "pair (" + pair.id_a + ", " + pair.id_b + ") references a patch missing from the result");
        }
    }

    const double shift = img_a.width + opts.gap;
    const int width = img_a.width + opts.gap + img_b.width;
    const int caption_h = 44;
    const int height = std::max(img_a.height, img_b.height) + caption_h;

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    svg << "  <rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"#ffffff\"/>\n";
    backdrop(svg, img_a, 0.0, opts);
    backdrop(svg, img_b, shift, opts);

    for (const auto& p : result.side_a.patches) {
        svg << "  <polygon class=\"detection\" data-side=\"a\" data-id=\"" << escape(p.id) << "\" points=\""
            << points(p.polygon, 0.0) << "\" fill=\"none\" stroke=\"" << kDetectionColor << "\" stroke-width=\"1\"/>\n";
    }
    for (const auto& p : result.side_b.patches) {
        svg << "  <polygon class=\"detection\" data-side=\"b\" data-id=\"" << escape(p.id) << "\" points=\""
            << points(p.polygon, shift) << "\" fill=\"none\" stroke=\"" << kDetectionColor
            << "\" stroke-width=\"1\"/>\n";
    }
    for (std::size_t i = 0; i < result.pairs.size(); ++i) {
        const auto& pair = result.pairs[i];
        const auto* pa = patches_a.at(pair.id_a);
        const auto* pb = patches_b.at(pair.id_b);
        svg << "  <polygon class=\"pair-patch\" data-side=\"a\" data-pair=\"" << i << "\" points=\""
            << points(pa->polygon, 0.0) << "\" fill=\"" << kDetectionColor << "\" fill-opacity=\"0.25\" stroke=\""
            << kDetectionColor << "\" stroke-width=\"2\"/>\n";
        svg << "  <polygon class=\"pair-patch\" data-side=\"b\" data-pair=\"" << i << "\" points=\""
            << points(pb->polygon, shift) << "\" fill=\"" << kDetectionColor << "\" fill-opacity=\"0.25\" stroke=\""
            << kDetectionColor << "\" stroke-width=\"2\"/>\n";
    }
    for (std::size_t i = 0; i < result.pairs.size(); ++i) {
        const auto& pair = result.pairs[i];
        const auto* pa = patches_a.at(pair.id_a);
        const auto* pb = patches_b.at(pair.id_b);
        svg << "  <line class=\"pair-link\" data-pair=\"" << i << "\" data-distance=\"" << num4(pair.distance)
            << "\" x1=\"" << num(pa->anchor.x) << "\" y1=\"" << num(pa->anchor.y) << "\" x2=\""
            << num(pb->anchor.x + shift) << "\" y2=\"" << num(pb->anchor.y) << "\" stroke=\"" << kLinkColor
            << "\" stroke-width=\"2\"/>\n";
    }

    const int text_y = std::max(img_a.height, img_b.height) + 18;
    svg << "  <text class=\"caption\" x=\"4\" y=\"" << text_y << "\" font-family=\"monospace\" font-size=\"13\">";
    if (result.no_evidence) {
        svg << "No evidence: no feature pair passed the angle and overlap constraints (score "
            << num(result.score) << ")";
    } else {
        char buf[96];
        std::snprintf(buf, sizeof buf, "Score %.4f from %zu matched pair%s", result.score, result.pairs.size(),
                      result.pairs.size() == 1 ? "" : "s");
        svg << buf;
    }
    svg << "</text>\n";
    svg << "  <text class=\"footer\" x=\"4\" y=\"" << text_y + 18
        << "\" font-family=\"monospace\" font-size=\"10\" fill=\"#555555\">" << escape(result.params.dump())
        << "</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace pbm
