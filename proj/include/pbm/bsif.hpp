#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "pbm/bitplane.hpp"
#include "pbm/imaging.hpp"

namespace pbm {

/// n square, odd-sized real kernels applied by cross-correlation (no flip).
class FilterBank {
public:
    FilterBank(int n_filters, int size, std::vector<double> coefficients);

    int n_filters() const noexcept { return n_filters_; }
    int size() const noexcept { return size_; }
    int radius() const noexcept { return size_ / 2; }

    /// Row-major size x size coefficients of filter k.
    std::span<const double> filter(int k) const noexcept {
        const auto n = static_cast<std::size_t>(size_) * static_cast<std::size_t>(size_);
        return {coefficients_.data() + n * static_cast<std::size_t>(k), n};
    }
    std::span<const double> coefficients() const noexcept { return coefficients_; }

    FilterBank negated() const;

    bool operator==(const FilterBank&) const = default;

private:
    int n_filters_;
    int size_;
    std::vector<double> coefficients_;
};

/// Text format: a header line "BSIF <n_filters> <size> [v1]" followed by
/// n_filters*size*size decimal values, filter-major then row-major.
FilterBank parse_filter_bank(std::istream& in);
FilterBank load_filter_bank(const std::filesystem::path& path);
void write_filter_bank(const FilterBank& bank, std::ostream& out);
void save_filter_bank(const FilterBank& bank, const std::filesystem::path& path);

/// Stand-in bank for when the human-derived kernels are not available:
/// seeded Gaussian projections, each made zero-mean and unit-norm.
FilterBank make_placeholder_bank(int n_filters = 5, int size = 17, std::uint64_t seed = 0x5eed);

/// One bit plane per filter plus the pixels whose code can be trusted.
struct IrisCode {
    int width = 0;
    int height = 0;
    std::vector<BitPlane> planes;
    BitPlane valid;

    int n_planes() const noexcept { return static_cast<int>(planes.size()); }
    bool operator==(const IrisCode&) const = default;
};

/// plane_k(p) = 1 iff the correlation of filter k centered at p is > 0
/// (zero padding). valid(p) = 1 iff every pixel under the filter footprint
/// centered at p is inside the image and inside the mask.
IrisCode encode(const GrayImage& img, const IrisMask& mask, const FilterBank& bank);

/// A feature's code: bounding-box crop of the code planes plus the pixels
/// that are both in the feature shape and code-valid.
struct PatchCode {
    int x0 = 0;
    int y0 = 0;
    std::vector<BitPlane> planes;
    BitPlane usable;

    int width() const noexcept { return usable.width(); }
    int height() const noexcept { return usable.height(); }
    int n_planes() const noexcept { return static_cast<int>(planes.size()); }
    std::size_t area() const noexcept { return usable.count(); }
    bool operator==(const PatchCode&) const = default;
};

/// Throws ErrorKind::unusable_patch when the shape shares no pixel with the
/// code's valid region.
PatchCode extract_patch_code(const IrisCode& code, const Region& shape);

struct MaskedHamming {
    std::size_t overlap_area = 0;
    std::size_t differing_bits = 0;  // summed over planes
    int n_planes = 0;

    bool defined() const noexcept { return overlap_area > 0; }
    /// Mean over planes of the per-plane fraction of differing bits. 1.0 when
    /// undefined; check defined() first.
    double distance() const noexcept {
        if (!defined()) {
            return 1.0;
        }
        return static_cast<double>(differing_bits) /
               (static_cast<double>(overlap_area) * static_cast<double>(n_planes));
    }
};

/// Hamming distance with b translated so its pixel (u, v) lies over a's
/// pixel (u + offset.dx, v + offset.dy).
MaskedHamming hamming_masked(const PatchCode& a, const PatchCode& b, PixelOffset offset);

}  // namespace pbm
