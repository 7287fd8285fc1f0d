#include "pbm/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "pbm/error.hpp"
#include "pbm/rng.hpp"

namespace pbm::synthetic {

namespace {

/// Bilinearly interpolated lattice noise with the given cell size.
std::vector<double> value_noise(int w, int h, int cell, Rng& rng) {
    const int gw = w / cell + 2;
    const int gh = h / cell + 2;
    std::vector<double> grid(static_cast<std::size_t>(gw) * gh);
    for (auto& v : grid) {
        v = rng.normal();
    }
    std::vector<double> out(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y) {
        const double fy = static_cast<double>(y) / cell;
        const int iy = static_cast<int>(fy);
        const double ty = fy - iy;
        for (int x = 0; x < w; ++x) {
            const double fx = static_cast<double>(x) / cell;
            const int ix = static_cast<int>(fx);
            const double tx = fx - ix;
            auto g = [&](int gx, int gy) { return grid[static_cast<std::size_t>(gy) * gw + gx]; };
            const double top = g(ix, iy) * (1 - tx) + g(ix + 1, iy) * tx;
            const double bottom = g(ix, iy + 1) * (1 - tx) + g(ix + 1, iy + 1) * tx;
            out[static_cast<std::size_t>(y) * w + x] = top * (1 - ty) + bottom * ty;
        }
    }
    return out;
}

std::uint8_t clamp8(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

}  // namespace

IrisMask annulus_mask(const IrisGeometry& g) {
    IrisMask mask(g.width, g.height);
    for (int y = 0; y < g.height; ++y) {
        for (int x = 0; x < g.width; ++x) {
            const double r = std::hypot(x - g.center.x, y - g.center.y);
            if (r >= g.pupil_radius && r <= g.iris_radius) {
                mask.bits.set(x, y);
            }
        }
    }
    return mask;
}

GrayImage iris_texture(std::uint64_t identity, const IrisGeometry& g) {
    Rng rng(fnv1a("iris-texture") ^ (identity * 0x9e3779b97f4a7c15ULL + 1));
    const auto fine = value_noise(g.width, g.height, 3, rng);
    const auto medium = value_noise(g.width, g.height, 6, rng);
    const auto coarse = value_noise(g.width, g.height, 12, rng);
    const auto contrast = value_noise(g.width, g.height, 40, rng);
    GrayImage img(g.width, g.height, 90);
    for (int y = 0; y < g.height; ++y) {
        for (int x = 0; x < g.width; ++x) {
            const double r = std::hypot(x - g.center.x, y - g.center.y);
            if (r < g.pupil_radius || r > g.iris_radius) {
                continue;
            }
            const auto i = static_cast<std::size_t>(y) * g.width + x;
            const double amp = 18.0 + 14.0 * std::tanh(contrast[i]);
            img.at(x, y) = clamp8(120.0 + amp * (0.9 * fine[i] + 0.7 * medium[i] + 0.5 * coarse[i]));
        }
    }
    return img;
}

GrayImage add_noise(const GrayImage& img, double sigma, std::uint64_t seed) {
    Rng rng(seed);
    GrayImage out = img;
    for (auto& p : out.pixels) {
        p = clamp8(p + rng.normal(0.0, sigma));
    }
    return out;
}

DetectionSet rotate_detections(const DetectionSet& set, Point2d center, double degrees) {
    DetectionSet out = set;
    out.detections.clear();
    for (const auto& d : set.detections) {
        Polygon poly;
        for (const auto& p : d.polygon) {
            poly.push_back(rotate_about(p, center, degrees));
        }
        try {
            out.detections.push_back(make_detection(d.id, std::move(poly), d.confidence, d.source, set.width, set.height));
        } catch (const Error&) {
            // rotated off the frame
        }
    }
    return out;
}

}  // namespace pbm::synthetic
