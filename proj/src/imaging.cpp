#include "pbm/imaging.hpp"

#include <cmath>
#include <string>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "pbm/error.hpp"

namespace pbm {

namespace {

cv::Mat as_mat(const GrayImage& img) {
    // const_cast is safe: the header is only read from
    return cv::Mat(img.height, img.width, CV_8UC1, const_cast<std::uint8_t*>(img.pixels.data()));
}

GrayImage from_mat(const cv::Mat& m) {
    GrayImage out(m.cols, m.rows);
    for (int y = 0; y < m.rows; ++y) {
        const auto* src = m.ptr<std::uint8_t>(y);
        std::copy(src, src + m.cols, out.pixels.begin() + static_cast<std::ptrdiff_t>(y) * m.cols);
    }
    return out;
}

cv::Mat read_gray(const std::filesystem::path& path) {
    cv::Mat m = cv::imread(path.string(), cv::IMREAD_GRAYSCALE);
    if (m.empty()) {
        throw Error(ErrorKind::io, "cannot read image: " + path.string());
    }
    return m;
}

void require_same_size(const GrayImage& img, const IrisMask& mask) {
    if (img.width != mask.width() || img.height != mask.height()) {
        throw Error(ErrorKind::dimension_mismatch,
                    "image is " + std::to_string(img.width) + "x" + std::to_string(img.height) +
                        " but mask is " + std::to_string(mask.width()) + "x" +
                        std::to_string(mask.height()));
    }
}

}  // namespace

GrayImage::GrayImage(int w, int h, std::uint8_t fill) : width(w), height(h) {
    if (w < 0 || h < 0) {
        throw Error(ErrorKind::invalid_argument, "negative image dimensions");
    }
    pixels.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill);
}

void ClaheParams::validate() const {
    if (tile_cols < 1 || tile_rows < 1) {
        throw Error(ErrorKind::invalid_argument, "CLAHE tile grid components must be >= 1");
    }
    if (!(clip_limit >= 1.0)) {
        throw Error(ErrorKind::invalid_argument, "CLAHE clip limit must be >= 1.0");
    }
}

GrayImage load_gray_png(const std::filesystem::path& path) { return from_mat(read_gray(path)); }

IrisMask load_mask_png(const std::filesystem::path& path) {
    const cv::Mat m = read_gray(path);
    IrisMask mask(m.cols, m.rows);
    for (int y = 0; y < m.rows; ++y) {
        const auto* src = m.ptr<std::uint8_t>(y);
        for (int x = 0; x < m.cols; ++x) {
            if (src[x] != 0) {
                mask.bits.set(x, y);
            }
        }
    }
    return mask;
}

void save_png(const GrayImage& img, const std::filesystem::path& path) {
    if (!cv::imwrite(path.string(), as_mat(img))) {
        throw Error(ErrorKind::io, "cannot write image: " + path.string());
    }
}

void save_png(const IrisMask& mask, const std::filesystem::path& path) {
    GrayImage img(mask.width(), mask.height());
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            img.at(x, y) = mask.at(x, y) ? 255 : 0;
        }
    }
    save_png(img, path);
}

std::vector<std::uint8_t> encode_png(const GrayImage& img) {
    std::vector<std::uint8_t> buf;
    if (!cv::imencode(".png", as_mat(img), buf)) {
        throw Error(ErrorKind::io, "PNG encoding failed");
    }
    return buf;
}

GrayImage apply_mask(const GrayImage& img, const IrisMask& mask) {
    require_same_size(img, mask);
    GrayImage out = img;
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            if (!mask.at(x, y)) {
                out.at(x, y) = 0;
            }
        }
    }
    return out;
}

Point2d mask_centroid(const IrisMask& mask) {
    if (mask.count() == 0) {
        throw Error(ErrorKind::empty_input, "mask has no iris pixels");
    }
    return Region{0, 0, mask.bits}.centroid();
}

GrayImage crop_window(const GrayImage& img, PixelOffset origin, int width, int height) {
    GrayImage out(width, height);
    for (int v = 0; v < height; ++v) {
        const int y = origin.dy + v;
        if (y < 0 || y >= img.height) {
            continue;
        }
        for (int u = 0; u < width; ++u) {
            const int x = origin.dx + u;
            if (x >= 0 && x < img.width) {
                out.at(u, v) = img.at(x, y);
            }
        }
    }
    return out;
}

IrisMask crop_window(const IrisMask& mask, PixelOffset origin, int width, int height) {
    return IrisMask(mask.bits.crop(origin.dx, origin.dy, width, height));
}

IrisCrop crop_to_iris(const GrayImage& img, const IrisMask& mask, int side) {
    require_same_size(img, mask);
    if (side <= 0) {
        throw Error(ErrorKind::invalid_argument, "crop side must be positive");
    }
    const Point2d c = mask_centroid(mask);
    const PixelOffset origin{static_cast<int>(std::floor(c.x + 0.5)) - side / 2,
                             static_cast<int>(std::floor(c.y + 0.5)) - side / 2};
    return {crop_window(img, origin, side, side), crop_window(mask, origin, side, side), origin};
}

GrayImage clahe(const GrayImage& img, const ClaheParams& params) {
    params.validate();
    if (img.width == 0 || img.height == 0) {
        throw Error(ErrorKind::empty_input, "CLAHE on an empty image");
    }
    auto op = cv::createCLAHE(params.clip_limit, cv::Size(params.tile_cols, params.tile_rows));
    cv::Mat dst;
    op->apply(as_mat(img), dst);
    return from_mat(dst);
}

IrisCrop preprocess(const GrayImage& img, const IrisMask& mask, const PreprocessOptions& opts) {
    IrisCrop crop = crop_to_iris(apply_mask(img, mask), mask, opts.crop_side);
    crop.image = clahe(crop.image, opts.clahe);
    return crop;
}

}  // namespace pbm
