#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "pbm/bitplane.hpp"
#include "pbm/geometry.hpp"

namespace pbm {

/// Row-major 8-bit grayscale raster.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    GrayImage() = default;
    GrayImage(int w, int h, std::uint8_t fill = 0);

    std::uint8_t at(int x, int y) const { return pixels[index(x, y)]; }
    std::uint8_t& at(int x, int y) { return pixels[index(x, y)]; }

    bool operator==(const GrayImage&) const = default;

private:
    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x);
    }
};

/// Binary iris occupancy, 1 = iris texture.
struct IrisMask {
    BitPlane bits;

    IrisMask() = default;
    IrisMask(int w, int h) : bits(w, h) {}
    explicit IrisMask(BitPlane b) : bits(std::move(b)) {}

    int width() const noexcept { return bits.width(); }
    int height() const noexcept { return bits.height(); }
    bool at(int x, int y) const noexcept { return bits.get(x, y); }
    std::size_t count() const noexcept { return bits.count(); }

    bool operator==(const IrisMask&) const = default;
};

struct ClaheParams {
    int tile_cols = 8;
    int tile_rows = 8;
    double clip_limit = 2.0;

    void validate() const;
    bool operator==(const ClaheParams&) const = default;
};

GrayImage load_gray_png(const std::filesystem::path& path);
/// Any nonzero pixel is iris.
IrisMask load_mask_png(const std::filesystem::path& path);
void save_png(const GrayImage& img, const std::filesystem::path& path);
void save_png(const IrisMask& mask, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_png(const GrayImage& img);

GrayImage apply_mask(const GrayImage& img, const IrisMask& mask);

/// Mean of set-pixel coordinates. Throws on an empty mask.
Point2d mask_centroid(const IrisMask& mask);

struct IrisCrop {
    GrayImage image;
    IrisMask mask;
    /// Source coordinate of the crop's (0, 0); add to crop coordinates to get
    /// source coordinates.
    PixelOffset offset;
};

/// side x side window centered on the (half-up rounded) mask centroid; pixels
/// outside the source are zero in both image and mask.
IrisCrop crop_to_iris(const GrayImage& img, const IrisMask& mask, int side = 256);

/// Plain window extraction with zero padding.
GrayImage crop_window(const GrayImage& img, PixelOffset origin, int width, int height);
IrisMask crop_window(const IrisMask& mask, PixelOffset origin, int width, int height);

GrayImage clahe(const GrayImage& img, const ClaheParams& params = {});

struct PreprocessOptions {
    int crop_side = 256;
    ClaheParams clahe;
};

/// mask -> crop -> CLAHE.
IrisCrop preprocess(const GrayImage& img, const IrisMask& mask, const PreprocessOptions& opts = {});

}  // namespace pbm
