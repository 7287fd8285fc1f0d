#include "pbm/bsif.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "pbm/error.hpp"
#include "pbm/rng.hpp"

namespace pbm {

FilterBank::FilterBank(int n_filters, int size, std::vector<double> coefficients)
    : n_filters_(n_filters), size_(size), coefficients_(std::move(coefficients)) {
    if (n_filters < 1) {
        throw Error(ErrorKind::invalid_argument, "filter bank needs at least one filter");
    }
    if (size < 1 || size % 2 == 0) {
        throw Error(ErrorKind::invalid_argument,
                    "filter size must be odd and positive, got " + std::to_string(size));
    }
    const auto expected = static_cast<std::size_t>(n_filters) * static_cast<std::size_t>(size) *
                          static_cast<std::size_t>(size);
    if (coefficients_.size() != expected) {
        throw Error(ErrorKind::invalid_argument,
                    "filter bank expects " + std::to_string(expected) + " coefficients, got " +
                        std::to_string(coefficients_.size()));
    }
    if (!std::all_of(coefficients_.begin(), coefficients_.end(),
                     [](double v) { return std::isfinite(v); })) {
        throw Error(ErrorKind::invalid_argument, "filter coefficients must be finite");
    }
}

FilterBank FilterBank::negated() const {
    std::vector<double> c(coefficients_.size());
    std::transform(coefficients_.begin(), coefficients_.end(), c.begin(), [](double v) { return -v; });
    return {n_filters_, size_, std::move(c)};
}

FilterBank parse_filter_bank(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) {
        throw Error(ErrorKind::parse_error, "filter bank: missing header");
    }
    std::istringstream hs(header);
    std::string magic;
    long long n = 0;
    long long size = 0;
    if (!(hs >> magic >> n >> size) || magic != "BSIF") {
        throw Error(ErrorKind::parse_error, "filter bank: malformed header '" + header + "'");
    }
    std::string version;
    if (hs >> version && version != "v1") {
        throw Error(ErrorKind::parse_error, "filter bank: unsupported version '" + version + "'");
    }
    if (std::string extra; hs >> extra) {
        throw Error(ErrorKind::parse_error, "filter bank: trailing header token '" + extra + "'");
    }
    if (n < 1 || size < 1 || n > 4096 || size > 4096) {
        throw Error(ErrorKind::parse_error, "filter bank: implausible dimensions in header");
    }
    if (size % 2 == 0) {
        throw Error(ErrorKind::parse_error,
                    "filter bank: filter size must be odd, got " + std::to_string(size));
    }
    const auto expected = static_cast<std::size_t>(n * size * size);
    std::vector<double> values;
    values.reserve(expected);
    std::string token;
    while (in >> token) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(token, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != token.size()) {
            throw Error(ErrorKind::parse_error, "filter bank: bad coefficient '" + token + "'");
        }
        values.push_back(v);
    }
    if (values.size() != expected) {
        throw Error(ErrorKind::parse_error, "filter bank: expected " + std::to_string(expected) +
                                                " coefficients, found " +
                                                std::to_string(values.size()));
    }
    try {
        return {static_cast<int>(n), static_cast<int>(size), std::move(values)};
    } catch (const Error& e) {
        throw Error(ErrorKind::parse_error, std::string("filter bank: ") + e.what());
    }
}

FilterBank load_filter_bank(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::io, "cannot open filter bank: " + path.string());
    }
    return parse_filter_bank(in);
}

void write_filter_bank(const FilterBank& bank, std::ostream& out) {
    out << "BSIF " << bank.n_filters() << ' ' << bank.size() << " v1\n";
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (int k = 0; k < bank.n_filters(); ++k) {
        const auto f = bank.filter(k);
        for (int r = 0; r < bank.size(); ++r) {
            for (int c = 0; c < bank.size(); ++c) {
                out << (c ? " " : "") << f[static_cast<std::size_t>(r * bank.size() + c)];
            }
            out << '\n';
        }
    }
}

void save_filter_bank(const FilterBank& bank, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorKind::io, "cannot write filter bank: " + path.string());
    }
    write_filter_bank(bank, out);
}

FilterBank make_placeholder_bank(int n_filters, int size, std::uint64_t seed) {
    Rng rng(seed);
    const std::size_t per = static_cast<std::size_t>(size) * static_cast<std::size_t>(size);
    std::vector<double> c(per * static_cast<std::size_t>(n_filters));
    for (int k = 0; k < n_filters; ++k) {
        auto first = c.begin() + static_cast<std::ptrdiff_t>(per * static_cast<std::size_t>(k));
        auto last = first + static_cast<std::ptrdiff_t>(per);
        std::generate(first, last, [&] { return rng.normal(); });
        if (per == 1) {
            *first = 1.0;
            continue;
        }
        const double mean = std::accumulate(first, last, 0.0) / static_cast<double>(per);
        std::for_each(first, last, [&](double& v) { v -= mean; });
        const double norm = std::sqrt(std::inner_product(first, last, first, 0.0));
        std::for_each(first, last, [&](double& v) { v /= norm; });
    }
    return {n_filters, size, std::move(c)};
}

IrisCode encode(const GrayImage& img, const IrisMask& mask, const FilterBank& bank) {
    if (img.width != mask.width() || img.height != mask.height()) {
        throw Error(ErrorKind::dimension_mismatch, "encode: image and mask sizes differ");
    }
    const int w = img.width;
    const int h = img.height;
    const int r = bank.radius();
    const int ks = bank.size();
    const int pw = w + 2 * r;

    std::vector<double> padded(static_cast<std::size_t>(pw) * static_cast<std::size_t>(h + 2 * r), 0.0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            padded[static_cast<std::size_t>(y + r) * pw + static_cast<std::size_t>(x + r)] = img.at(x, y);
        }
    }

    IrisCode code;
    code.width = w;
    code.height = h;
    std::vector<double> response(static_cast<std::size_t>(w));
    for (int k = 0; k < bank.n_filters(); ++k) {
        const auto f = bank.filter(k);
        BitPlane plane(w, h);
        for (int y = 0; y < h; ++y) {
            std::fill(response.begin(), response.end(), 0.0);
            for (int i = 0; i < ks; ++i) {
                const double* src = padded.data() + static_cast<std::size_t>(y + i) * pw;
                for (int j = 0; j < ks; ++j) {
                    const double c = f[static_cast<std::size_t>(i * ks + j)];
                    if (c == 0.0) {
                        continue;
                    }
                    for (int x = 0; x < w; ++x) {
                        response[static_cast<std::size_t>(x)] += c * src[x + j];
                    }
                }
            }
            for (int x = 0; x < w; ++x) {
                if (response[static_cast<std::size_t>(x)] > 0.0) {
                    plane.set(x, y);
                }
            }
        }
        code.planes.push_back(std::move(plane));
    }

    // valid = mask eroded by the footprint; integral image of mask counts
    std::vector<int> integral(static_cast<std::size_t>(w + 1) * static_cast<std::size_t>(h + 1), 0);
    auto at = [&](int x, int y) -> int& { return integral[static_cast<std::size_t>(y) * (w + 1) + x]; };
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            at(x + 1, y + 1) = at(x, y + 1) + at(x + 1, y) - at(x, y) + (mask.at(x, y) ? 1 : 0);
        }
    }
    code.valid = BitPlane(w, h);
    const int full = ks * ks;
    for (int y = r; y < h - r; ++y) {
        for (int x = r; x < w - r; ++x) {
            const int sum = at(x + r + 1, y + r + 1) - at(x - r, y + r + 1) - at(x + r + 1, y - r) + at(x - r, y - r);
            if (sum == full) {
                code.valid.set(x, y);
            }
        }
    }
    return code;
}

PatchCode extract_patch_code(const IrisCode& code, const Region& shape) {
    int min_x = std::numeric_limits<int>::max();
    int min_y = std::numeric_limits<int>::max();
    int max_x = std::numeric_limits<int>::min();
    int max_y = std::numeric_limits<int>::min();
    for (int v = 0; v < shape.bits.height(); ++v) {
        for (int u = 0; u < shape.bits.width(); ++u) {
            if (shape.bits.get(u, v)) {
                min_x = std::min(min_x, shape.x0 + u);
                max_x = std::max(max_x, shape.x0 + u);
                min_y = std::min(min_y, shape.y0 + v);
                max_y = std::max(max_y, shape.y0 + v);
            }
        }
    }
    if (min_x > max_x) {
        throw Error(ErrorKind::unusable_patch, "patch shape is empty");
    }
    if (min_x < 0 || min_y < 0 || max_x >= code.width || max_y >= code.height) {
        throw Error(ErrorKind::invalid_argument, "patch shape extends outside the code");
    }
    const int bw = max_x - min_x + 1;
    const int bh = max_y - min_y + 1;

    PatchCode patch;
    patch.x0 = min_x;
    patch.y0 = min_y;
    patch.usable = shape.bits.crop(min_x - shape.x0, min_y - shape.y0, bw, bh);
    patch.usable &= code.valid.crop(min_x, min_y, bw, bh);
    if (patch.usable.count() == 0) {
        throw Error(ErrorKind::unusable_patch, "patch shape has no overlap with the valid code region");
    }
    patch.planes.reserve(code.planes.size());
    for (const auto& plane : code.planes) {
        patch.planes.push_back(plane.crop(min_x, min_y, bw, bh));
    }
    return patch;
}

MaskedHamming hamming_masked(const PatchCode& a, const PatchCode& b, PixelOffset offset) {
    if (a.n_planes() != b.n_planes()) {
        throw Error(ErrorKind::dimension_mismatch, "hamming: plane counts differ (" +
                                                       std::to_string(a.n_planes()) + " vs " +
                                                       std::to_string(b.n_planes()) + ")");
    }
    MaskedHamming out;
    out.n_planes = a.n_planes();
    const int y_begin = std::max(0, offset.dy);
    const int y_end = std::min(a.height(), b.height() + offset.dy);
    const int words = a.usable.words_per_row();
    for (int ya = y_begin; ya < y_end; ++ya) {
        const int yb = ya - offset.dy;
        const auto ua = a.usable.row(ya);
        for (int w = 0; w < words; ++w) {
            const std::uint64_t wa = ua[static_cast<std::size_t>(w)];
            if (wa == 0) {
                continue;
            }
            const int first = 64 * w - offset.dx;
            const std::uint64_t both = wa & b.usable.window(yb, first);
            if (both == 0) {
                continue;
            }
            out.overlap_area += static_cast<std::size_t>(std::popcount(both));
            for (int k = 0; k < out.n_planes; ++k) {
                const std::uint64_t pa = a.planes[static_cast<std::size_t>(k)].row(ya)[static_cast<std::size_t>(w)];
                const std::uint64_t pb = b.planes[static_cast<std::size_t>(k)].window(yb, first);
                out.differing_bits += static_cast<std::size_t>(std::popcount((pa ^ pb) & both));
            }
        }
    }
    return out;
}

}  // namespace pbm
