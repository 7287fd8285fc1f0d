#include "pbm/bitplane.hpp"

#include <algorithm>
#include <bit>
#include <numeric>

#include "pbm/error.hpp"

namespace pbm {

BitPlane::BitPlane(int width, int height) {
    if (width < 0 || height < 0) {
        throw Error(ErrorKind::invalid_argument, "BitPlane: negative dimensions");
    }
    width_ = width;
    height_ = height;
    words_per_row_ = (width + 63) / 64;
    bits_.assign(static_cast<std::size_t>(words_per_row_) * static_cast<std::size_t>(height), 0);
}

std::uint64_t BitPlane::window(int y, int first_bit) const noexcept {
    if (y < 0 || y >= height_ || first_bit >= width_ || first_bit <= -64) {
        return 0;
    }
    const auto r = row(y);
    // floor division so negative offsets land in word -1
    const int word = first_bit >= 0 ? first_bit / 64 : -((-first_bit + 63) / 64);
    const int shift = first_bit - word * 64;
    auto at = [&](int w) -> std::uint64_t {
        return (w >= 0 && w < words_per_row_) ? r[static_cast<std::size_t>(w)] : 0;
    };
    std::uint64_t out = at(word) >> shift;
    if (shift != 0) {
        out |= at(word + 1) << (64 - shift);
    }
    return out;
}

std::size_t BitPlane::count() const noexcept {
    return std::accumulate(bits_.begin(), bits_.end(), std::size_t{0},
                           [](std::size_t acc, std::uint64_t w) { return acc + std::popcount(w); });
}

BitPlane BitPlane::crop(int x0, int y0, int width, int height) const {
    BitPlane out(width, height);
    for (int v = 0; v < height; ++v) {
        auto dst = out.row(v);
        for (int w = 0; w < out.words_per_row_; ++w) {
            dst[static_cast<std::size_t>(w)] = window(y0 + v, x0 + 64 * w);
        }
    }
    out.clear_padding();
    return out;
}

BitPlane& BitPlane::operator&=(const BitPlane& other) {
    if (width_ != other.width_ || height_ != other.height_) {
        throw Error(ErrorKind::dimension_mismatch, "BitPlane: size mismatch in &=");
    }
    std::transform(bits_.begin(), bits_.end(), other.bits_.begin(), bits_.begin(),
                   [](std::uint64_t a, std::uint64_t b) { return a & b; });
    return *this;
}

BitPlane BitPlane::operator~() const {
    BitPlane out = *this;
    for (auto& w : out.bits_) {
        w = ~w;
    }
    out.clear_padding();
    return out;
}

void BitPlane::clear_padding() noexcept {
    const int tail = width_ % 64;
    if (tail == 0 || words_per_row_ == 0) {
        return;
    }
    const std::uint64_t keep = (std::uint64_t{1} << tail) - 1;
    for (int y = 0; y < height_; ++y) {
        bits_[index(y, words_per_row_ - 1)] &= keep;
    }
}

std::size_t overlap_count(const BitPlane& a, const BitPlane& b, PixelOffset shift) noexcept {
    const int y_begin = std::max(0, shift.dy);
    const int y_end = std::min(a.height(), b.height() + shift.dy);
    std::size_t total = 0;
    for (int ya = y_begin; ya < y_end; ++ya) {
        const auto ra = a.row(ya);
        const int yb = ya - shift.dy;
        for (int w = 0; w < a.words_per_row(); ++w) {
            const std::uint64_t wa = ra[static_cast<std::size_t>(w)];
            if (wa == 0) {
                continue;
            }
            total += std::popcount(wa & b.window(yb, 64 * w - shift.dx));
        }
    }
    return total;
}

Point2d Region::centroid() const {
    double sx = 0.0;
    double sy = 0.0;
    std::size_t n = 0;
    for (int v = 0; v < bits.height(); ++v) {
        for (int u = 0; u < bits.width(); ++u) {
            if (bits.get(u, v)) {
                sx += x0 + u;
                sy += y0 + v;
                ++n;
            }
        }
    }
    if (n == 0) {
        throw Error(ErrorKind::empty_input, "centroid of an empty region");
    }
    return {sx / static_cast<double>(n), sy / static_cast<double>(n)};
}

std::size_t intersection_area(const Region& a, const Region& b) noexcept {
    return overlap_count(a.bits, b.bits, {b.x0 - a.x0, b.y0 - a.y0});
}

}  // namespace pbm
