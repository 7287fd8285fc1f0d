#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "pbm/geometry.hpp"

namespace pbm {

/// Dense binary raster. Rows are packed LSB-first into 64-bit words and the
/// row stride is padded to a whole word; padding bits are always zero.
class BitPlane {
public:
    BitPlane() = default;
    BitPlane(int width, int height);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int words_per_row() const noexcept { return words_per_row_; }
    bool empty() const noexcept { return width_ == 0 || height_ == 0; }

    bool get(int x, int y) const noexcept {
        return (bits_[index(y, x >> 6)] >> (x & 63)) & 1u;
    }
    void set(int x, int y, bool value = true) noexcept {
        const std::uint64_t bit = std::uint64_t{1} << (x & 63);
        auto& word = bits_[index(y, x >> 6)];
        word = value ? (word | bit) : (word & ~bit);
    }
    /// get() with out-of-range coordinates reading as zero.
    bool get_or_zero(int x, int y) const noexcept {
        return x >= 0 && y >= 0 && x < width_ && y < height_ && get(x, y);
    }

    std::span<const std::uint64_t> row(int y) const noexcept {
        return {bits_.data() + index(y, 0), static_cast<std::size_t>(words_per_row_)};
    }
    std::span<std::uint64_t> row(int y) noexcept {
        return {bits_.data() + index(y, 0), static_cast<std::size_t>(words_per_row_)};
    }

    /// The 64 bits of row y starting at column `first_bit` (may be negative or
    /// beyond the row); columns outside [0, width) read as zero.
    std::uint64_t window(int y, int first_bit) const noexcept;

    std::size_t count() const noexcept;

    /// Sub-rectangle with origin (x0, y0); out-of-range source pixels read as zero.
    BitPlane crop(int x0, int y0, int width, int height) const;

    BitPlane& operator&=(const BitPlane& other);
    BitPlane operator~() const;

    bool operator==(const BitPlane&) const = default;

private:
    std::size_t index(int y, int word) const noexcept {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(words_per_row_) +
               static_cast<std::size_t>(word);
    }
    void clear_padding() noexcept;

    int width_ = 0;
    int height_ = 0;
    int words_per_row_ = 0;
    std::vector<std::uint64_t> bits_;
};

/// Number of pixels set in both `a` and `b` when b's pixel (u, v) is placed
/// over a's pixel (u + shift.dx, v + shift.dy).
std::size_t overlap_count(const BitPlane& a, const BitPlane& b, PixelOffset shift) noexcept;

/// A binary mask positioned inside a larger frame: pixel (u, v) of `bits`
/// sits at frame coordinate (x0 + u, y0 + v).
struct Region {
    int x0 = 0;
    int y0 = 0;
    BitPlane bits;

    std::size_t area() const noexcept { return bits.count(); }
    bool contains(int x, int y) const noexcept { return bits.get_or_zero(x - x0, y - y0); }
    /// Mean of member pixel coordinates in frame space; requires area() > 0.
    Point2d centroid() const;

    bool operator==(const Region&) const = default;
};

/// Pixels shared by two regions of the same frame.
std::size_t intersection_area(const Region& a, const Region& b) noexcept;

}  // namespace pbm
