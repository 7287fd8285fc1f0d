// Independent reference implementations used by the unit and acceptance
// tests. Deliberately naive: per-pixel loops, no packed words, no pruning.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "pbm/bsif.hpp"
#include "pbm/detection.hpp"
#include "pbm/eval.hpp"
#include "pbm/matching.hpp"
#include "pbm/rng.hpp"

namespace oracle {

struct Hd {
    std::size_t overlap = 0;
    std::size_t differing = 0;
};

// b's pixel (u, v) over a's (u + dx, v + dy).
inline Hd naive_hamming(const pbm::PatchCode& a, const pbm::PatchCode& b, pbm::PixelOffset off) {
    Hd r;
    for (int v = 0; v < b.height(); ++v) {
        for (int u = 0; u < b.width(); ++u) {
            const int x = u + off.dx;
            const int y = v + off.dy;
            if (x < 0 || y < 0 || x >= a.width() || y >= a.height()) {
                continue;
            }
            if (!a.usable.get(x, y) || !b.usable.get(u, v)) {
                continue;
            }
            ++r.overlap;
            for (int k = 0; k < a.n_planes(); ++k) {
                r.differing += a.planes[k].get(x, y) != b.planes[k].get(u, v) ? 1 : 0;
            }
        }
    }
    return r;
}

struct Alignment {
    bool admissible = false;
    // best distance as the exact fraction differing / (overlap * planes)
    std::size_t num = 0;
    std::size_t den = 1;
    std::vector<pbm::PixelOffset> minimizers;  // in (dy, dx) order
};

// Every offset in a margin wider than any possible overlap, exact rational
// comparison, no bounding-box shortcut.
inline Alignment naive_alignment(const pbm::PatchCode& a, const pbm::PatchCode& b, double frac) {
    Alignment out;
    const std::size_t smaller = std::min(a.area(), b.area());
    const int planes = a.n_planes();
    for (int dy = -b.height() - 2; dy <= a.height() + 2; ++dy) {
        for (int dx = -b.width() - 2; dx <= a.width() + 2; ++dx) {
            const Hd hd = naive_hamming(a, b, {dx, dy});
            if (!(static_cast<double>(hd.overlap) > frac * static_cast<double>(smaller))) {
                continue;
            }
            const std::size_t num = hd.differing;
            const std::size_t den = hd.overlap * static_cast<std::size_t>(planes);
            if (!out.admissible || num * out.den < out.num * den) {
                out.admissible = true;
                out.num = num;
                out.den = den;
                out.minimizers.assign(1, {dx, dy});
            } else if (num * out.den == out.num * den) {
                out.minimizers.push_back({dx, dy});
            }
        }
    }
    return out;
}

// Fully random codes and an irregular usability mask.
inline pbm::PatchCode random_patch(pbm::Rng& rng, int w, int h, int planes, double fill) {
    pbm::PatchCode p;
    p.usable = pbm::BitPlane(w, h);
    for (int k = 0; k < planes; ++k) {
        pbm::BitPlane plane(w, h);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                plane.set(x, y, rng.uniform() < 0.5);
            }
        }
        p.planes.push_back(std::move(plane));
    }
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            p.usable.set(x, y, rng.uniform() < fill);
        }
    }
    if (p.usable.count() == 0) {
        p.usable.set(static_cast<int>(rng.below(static_cast<std::uint64_t>(w))),
                     static_cast<int>(rng.below(static_cast<std::uint64_t>(h))));
    }
    return p;
}

inline pbm::PatchDescriptor descriptor(std::string id, pbm::PatchCode code, double angle = 0.0) {
    pbm::PatchDescriptor d;
    d.id = std::move(id);
    d.code = std::move(code);
    d.angle = angle;
    return d;
}

// Repeated global minimum over remaining admissible pairs; quadratic.
inline std::vector<pbm::MatchPair> reference_greedy(const std::vector<pbm::MatchPair>& pairs) {
    std::set<std::string> used_a;
    std::set<std::string> used_b;
    std::vector<bool> taken(pairs.size(), false);
    std::vector<pbm::MatchPair> out;
    for (;;) {
        std::size_t best = pairs.size();
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            if (taken[i] || used_a.count(pairs[i].id_a) || used_b.count(pairs[i].id_b)) {
                continue;
            }
            if (best == pairs.size() ||
                std::tie(pairs[i].distance, pairs[i].id_a, pairs[i].id_b) <
                    std::tie(pairs[best].distance, pairs[best].id_a, pairs[best].id_b)) {
                best = i;
            }
        }
        if (best == pairs.size()) {
            return out;
        }
        taken[best] = true;
        used_a.insert(pairs[best].id_a);
        used_b.insert(pairs[best].id_b);
        out.push_back(pairs[best]);
    }
}

// P(genuine < impostor) + P(tie) / 2, lower score = match. Pairwise.
inline double mann_whitney_pairwise(const std::vector<double>& genuine, const std::vector<double>& impostor) {
    double u = 0.0;
    for (double g : genuine) {
        for (double i : impostor) {
            u += g < i ? 1.0 : (g == i ? 0.5 : 0.0);
        }
    }
    return u / (static_cast<double>(genuine.size()) * static_cast<double>(impostor.size()));
}

// Same statistic through midranks, for populations too large for pairwise.
inline double mann_whitney_ranks(const std::vector<double>& genuine, const std::vector<double>& impostor) {
    std::vector<std::pair<double, int>> all;
    for (double g : genuine) all.push_back({g, 0});
    for (double i : impostor) all.push_back({i, 1});
    std::sort(all.begin(), all.end());
    double rank_sum_impostor = 0.0;
    std::size_t i = 0;
    while (i < all.size()) {
        std::size_t j = i;
        while (j < all.size() && all[j].first == all[i].first) ++j;
        const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) {
            if (all[k].second == 1) rank_sum_impostor += midrank;
        }
        i = j;
    }
    const double ni = static_cast<double>(impostor.size());
    const double ng = static_cast<double>(genuine.size());
    return (rank_sum_impostor - ni * (ni + 1.0) / 2.0) / (ni * ng);
}

inline std::size_t naive_intersection(const pbm::Region& a, const pbm::Region& b) {
    std::size_t n = 0;
    for (int v = 0; v < a.bits.height(); ++v) {
        for (int u = 0; u < a.bits.width(); ++u) {
            if (a.bits.get(u, v) && b.contains(a.x0 + u, a.y0 + v)) ++n;
        }
    }
    return n;
}

// Random convex-ish polygon (triangle to hexagon) inside a frame.
inline pbm::Polygon random_polygon(pbm::Rng& rng, int frame) {
    const double cx = rng.uniform(4.0, frame - 4.0);
    const double cy = rng.uniform(4.0, frame - 4.0);
    const double r = rng.uniform(2.0, frame / 3.0);
    const int n = 3 + static_cast<int>(rng.below(4));
    pbm::Polygon poly;
    for (int k = 0; k < n; ++k) {
        const double t = 2.0 * 3.14159265358979 * (k + rng.uniform(0.0, 0.8)) / n;
        const double rr = r * rng.uniform(0.5, 1.0);
        poly.push_back({std::clamp(cx + rr * std::cos(t), 0.0, double(frame)),
                        std::clamp(cy + rr * std::sin(t), 0.0, double(frame))});
    }
    return poly;
}

inline pbm::ScoreSet gaussian_scores(pbm::Rng& rng, std::size_t n, double mg, double sg, double mi, double si) {
    pbm::ScoreSet s;
    s.reserve(2 * n);
    for (std::size_t k = 0; k < n; ++k) {
        s.push_back({"g" + std::to_string(k), "s", "s", rng.normal(mg, sg), pbm::PairLabel::genuine, false});
    }
    for (std::size_t k = 0; k < n; ++k) {
        s.push_back({"i" + std::to_string(k), "s", "t", rng.normal(mi, si), pbm::PairLabel::impostor, false});
    }
    return s;
}

inline std::pair<std::vector<double>, std::vector<double>> split(const pbm::ScoreSet& s) {
    std::vector<double> g;
    std::vector<double> i;
    for (const auto& r : s) {
        (r.label == pbm::PairLabel::genuine ? g : i).push_back(r.score);
    }
    return {g, i};
}

}  // namespace oracle
