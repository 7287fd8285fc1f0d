#include <doctest.h>

#include <sstream>

#include "oracles.hpp"
#include "pbm/bitplane.hpp"
#include "pbm/bsif.hpp"
#include "pbm/error.hpp"
#include "pbm/imaging.hpp"

using namespace pbm;

namespace {

IrisMask full_mask(int w, int h) {
    IrisMask m(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) m.bits.set(x, y);
    return m;
}

Region rect_region(int x0, int y0, int w, int h) {
    Region r{x0, y0, BitPlane(w, h)};
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) r.bits.set(x, y);
    return r;
}

// Zero-padded cross-correlation, one pixel at a time.
double direct_response(const GrayImage& img, const FilterBank& bank, int k, int px, int py) {
    const auto f = bank.filter(k);
    const int r = bank.radius();
    double s = 0.0;
    for (int i = -r; i <= r; ++i) {
        for (int j = -r; j <= r; ++j) {
            const int x = px + j;
            const int y = py + i;
            const double v = (x < 0 || y < 0 || x >= img.width || y >= img.height) ? 0.0 : img.at(x, y);
            s += f[static_cast<std::size_t>((i + r) * bank.size() + (j + r))] * v;
        }
    }
    return s;
}

}  // namespace

TEST_CASE("bitplane basics") {
    BitPlane p(130, 3);
    CHECK(p.words_per_row() == 3);
    p.set(0, 0);
    p.set(64, 1);
    p.set(129, 2);
    CHECK(p.count() == 3);
    CHECK(p.get(129, 2));
    CHECK_FALSE(p.get_or_zero(130, 2));
    CHECK_FALSE(p.get_or_zero(-1, 0));
    CHECK((p.window(1, 60) & 0xff) == 0x10);
    CHECK(p.window(0, -3) == 0x8);
    const auto inv = ~p;
    CHECK(inv.count() == 130 * 3 - 3);
    const auto c = p.crop(-1, -1, 3, 3);
    CHECK(c.get(1, 1));
    CHECK(c.count() == 1);

    SUBCASE("overlap_count matches a pixel loop") {
        Rng rng(4);
        for (int t = 0; t < 200; ++t) {
            BitPlane a(1 + static_cast<int>(rng.below(80)), 1 + static_cast<int>(rng.below(5)));
            BitPlane b(1 + static_cast<int>(rng.below(80)), 1 + static_cast<int>(rng.below(5)));
            for (int y = 0; y < a.height(); ++y)
                for (int x = 0; x < a.width(); ++x) a.set(x, y, rng.uniform() < 0.5);
            for (int y = 0; y < b.height(); ++y)
                for (int x = 0; x < b.width(); ++x) b.set(x, y, rng.uniform() < 0.5);
            const PixelOffset s{static_cast<int>(rng.below(120)) - 60, static_cast<int>(rng.below(9)) - 4};
            std::size_t expect = 0;
            for (int v = 0; v < b.height(); ++v)
                for (int u = 0; u < b.width(); ++u) expect += b.get(u, v) && a.get_or_zero(u + s.dx, v + s.dy);
            CHECK(overlap_count(a, b, s) == expect);
        }
    }
}

TEST_CASE("filter bank files") {
    SUBCASE("BSIF 5 17 with 5*17*17 values") {
        std::ostringstream text;
        text << "BSIF 5 17\n";
        for (int i = 0; i < 5 * 17 * 17; ++i) text << (i % 7) - 3 << (i % 17 == 16 ? '\n' : ' ');
        std::istringstream in(text.str());
        const auto bank = parse_filter_bank(in);
        CHECK(bank.n_filters() == 5);
        CHECK(bank.size() == 17);
        CHECK(bank.filter(4)[288] == double((5 * 17 * 17 - 1) % 7 - 3));
    }
    SUBCASE("BSIF 1 1") {
        std::istringstream in("BSIF 1 1\n1.0\n");
        const auto bank = parse_filter_bank(in);
        CHECK(bank.n_filters() == 1);
        CHECK(bank.filter(0)[0] == 1.0);
    }
    SUBCASE("even size") {
        std::istringstream in("BSIF 2 4\n" + std::string(32 * 2, ' '));
        CHECK_THROWS_AS(parse_filter_bank(in), Error);
    }
    SUBCASE("malformed") {
        std::istringstream bad_magic("BSIG 1 1\n1\n");
        CHECK_THROWS_AS(parse_filter_bank(bad_magic), Error);
        std::istringstream short_count("BSIF 1 3 v1\n1 2 3\n");
        CHECK_THROWS_AS(parse_filter_bank(short_count), Error);
        std::istringstream bad_number("BSIF 1 1\nabc\n");
        CHECK_THROWS_AS(parse_filter_bank(bad_number), Error);
        std::istringstream bad_version("BSIF 1 1 v9\n1\n");
        CHECK_THROWS_AS(parse_filter_bank(bad_version), Error);
    }
    SUBCASE("write then parse is lossless") {
        const auto bank = make_placeholder_bank(3, 7, 99);
        std::stringstream io;
        write_filter_bank(bank, io);
        CHECK(parse_filter_bank(io) == bank);
    }
    SUBCASE("placeholder bank is zero-mean and unit-norm") {
        const auto bank = make_placeholder_bank();
        CHECK(bank.n_filters() == 5);
        CHECK(bank.size() == 17);
        for (int k = 0; k < 5; ++k) {
            double s = 0.0, s2 = 0.0;
            for (double v : bank.filter(k)) {
                s += v;
                s2 += v * v;
            }
            CHECK(s == doctest::Approx(0.0).epsilon(1e-12));
            CHECK(s2 == doctest::Approx(1.0).epsilon(1e-12));
        }
        CHECK(make_placeholder_bank() == bank);
    }
}

TEST_CASE("encode") {
    SUBCASE("1x1 identity filter binarizes strictly") {
        const FilterBank plus(1, 1, {1.0});
        GrayImage img(3, 1);
        img.pixels = {0, 10, 200};
        const auto code = encode(img, full_mask(3, 1), plus);
        CHECK_FALSE(code.planes[0].get(0, 0));
        CHECK(code.planes[0].get(1, 0));
        CHECK(code.planes[0].get(2, 0));
        CHECK(code.valid.count() == 3);
    }
    SUBCASE("1x1 negative filter") {
        const FilterBank minus(1, 1, {-1.0});
        const auto code = encode(GrayImage(1, 1, 10), full_mask(1, 1), minus);
        CHECK_FALSE(code.planes[0].get(0, 0));
    }
    SUBCASE("3x3 zero-mean filter equals direct convolution") {
        const FilterBank bank(1, 3, {1, 0, -1, 2, 0, -2, 1, 0, -1});
        GrayImage img(6, 6);
        img.pixels = {10, 12, 40, 40, 3,  9,   //
                      10, 80, 41, 39, 3,  200, //
                      11, 12, 40, 38, 90, 9,   //
                      250, 0, 0, 40, 3, 9,     //
                      10, 12, 40, 1, 3, 9,     //
                      7,  7,  7,  7, 7, 7};
        const auto code = encode(img, full_mask(6, 6), bank);
        for (int y = 0; y < 6; ++y)
            for (int x = 0; x < 6; ++x) CHECK(code.planes[0].get(x, y) == (direct_response(img, bank, 0, x, y) > 0.0));
        // footprint must stay inside the image
        CHECK(code.valid.count() == 16);
        CHECK_FALSE(code.valid.get(0, 3));
        CHECK(code.valid.get(1, 1));
    }
    SUBCASE("random placeholder bank equals direct convolution") {
        Rng rng(8);
        const auto bank = make_placeholder_bank(3, 5, 17);
        GrayImage img(23, 19);
        for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.below(256));
        const auto code = encode(img, full_mask(23, 19), bank);
        for (int k = 0; k < 3; ++k)
            for (int y = 0; y < 19; ++y)
                for (int x = 0; x < 23; ++x) {
                    const double resp = direct_response(img, bank, k, x, y);
                    if (std::abs(resp) > 1e-9) CHECK(code.planes[k].get(x, y) == (resp > 0.0));
                }
    }
    SUBCASE("valid never covers masked-out pixels") {
        Rng rng(12);
        const auto bank = make_placeholder_bank(2, 3, 1);
        for (int t = 0; t < 20; ++t) {
            GrayImage img(20, 16);
            for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.below(256));
            IrisMask m(20, 16);
            for (int y = 0; y < 16; ++y)
                for (int x = 0; x < 20; ++x) m.bits.set(x, y, rng.uniform() < 0.8);
            const auto code = encode(img, m, bank);
            CHECK(encode(img, m, bank) == code);
            for (int y = 0; y < 16; ++y)
                for (int x = 0; x < 20; ++x) {
                    bool footprint = x >= 1 && y >= 1 && x < 19 && y < 15;
                    for (int i = -1; footprint && i <= 1; ++i)
                        for (int j = -1; j <= 1; ++j) footprint = footprint && m.at(x + j, y + i);
                    CHECK(code.valid.get(x, y) == footprint);
                }
        }
    }
    SUBCASE("negating the bank flips nonzero responses; zero responses stay 0") {
        // integer coefficients and pixels make every response exact
        const FilterBank bank(2, 3, {0, 1, 0, 0, 0, 0, 0, -1, 0, /**/ 1, 0, 0, 0, -1, 0, 0, 0, 0});
        Rng rng(30);
        GrayImage img(12, 12);
        for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.below(4));
        const auto pos = encode(img, full_mask(12, 12), bank);
        const auto neg = encode(img, full_mask(12, 12), bank.negated());
        int zeros = 0;
        for (int k = 0; k < 2; ++k)
            for (int y = 0; y < 12; ++y)
                for (int x = 0; x < 12; ++x) {
                    const double r = direct_response(img, bank, k, x, y);
                    if (r == 0.0) {
                        ++zeros;
                        CHECK_FALSE(pos.planes[k].get(x, y));
                        CHECK_FALSE(neg.planes[k].get(x, y));
                    } else {
                        CHECK(pos.planes[k].get(x, y) != neg.planes[k].get(x, y));
                    }
                }
        CHECK(zeros > 0);
    }
    SUBCASE("dimension mismatch") {
        CHECK_THROWS_AS(encode(GrayImage(4, 4), IrisMask(4, 5), make_placeholder_bank(1, 1)), Error);
    }
}

TEST_CASE("extract_patch_code") {
    Rng rng(2);
    GrayImage img(16, 12);
    for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.below(256));
    const auto bank = make_placeholder_bank(2, 3, 5);
    const auto code = encode(img, full_mask(16, 12), bank);

    SUBCASE("full-image rectangle gives the whole code") {
        const auto patch = extract_patch_code(code, rect_region(0, 0, 16, 12));
        CHECK(patch.x0 == 0);
        CHECK(patch.y0 == 0);
        CHECK(patch.planes == code.planes);
        CHECK(patch.usable == code.valid);
    }
    SUBCASE("shape outside the valid region is unusable") {
        try {
            extract_patch_code(code, rect_region(0, 0, 16, 1));
            FAIL("expected unusable_patch");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::unusable_patch);
        }
    }
    SUBCASE("L-shape crops to its bounding box") {
        Region l{3, 2, BitPlane(6, 7)};
        for (int y = 0; y < 7; ++y) l.bits.set(0, y);
        for (int x = 0; x < 6; ++x) l.bits.set(x, 6);
        const auto patch = extract_patch_code(code, l);
        CHECK(patch.x0 == 3);
        CHECK(patch.y0 == 2);
        CHECK(patch.width() == 6);
        CHECK(patch.height() == 7);
        CHECK(patch.usable == l.bits);  // every L pixel is inside the valid interior
        for (int y = 0; y < 7; ++y)
            for (int x = 0; x < 6; ++x)
                for (int k = 0; k < 2; ++k) CHECK(patch.planes[k].get(x, y) == code.planes[k].get(x + 3, y + 2));
    }
}

TEST_CASE("hamming_masked") {
    Rng rng(77);
    SUBCASE("self distance is zero, complement distance is one") {
        const auto a = oracle::random_patch(rng, 9, 9, 5, 0.7);
        const auto hd = hamming_masked(a, a, {0, 0});
        CHECK(hd.distance() == 0.0);
        CHECK(hd.overlap_area == a.area());
        auto c = a;
        for (auto& p : c.planes) p = ~p;
        CHECK(hamming_masked(a, c, {0, 0}).distance() == 1.0);
    }
    SUBCASE("no overlap is flagged undefined") {
        const auto a = oracle::random_patch(rng, 4, 4, 2, 1.0);
        const auto hd = hamming_masked(a, a, {10, 0});
        CHECK_FALSE(hd.defined());
        CHECK(hd.overlap_area == 0);
    }
    SUBCASE("plane mismatch") {
        const auto a = oracle::random_patch(rng, 4, 4, 2, 1.0);
        const auto b = oracle::random_patch(rng, 4, 4, 3, 1.0);
        CHECK_THROWS_AS(hamming_masked(a, b, {0, 0}), Error);
    }
    SUBCASE("packed equals naive on random 9x9 five-plane patches") {
        for (int t = 0; t < 1000; ++t) {
            const auto a = oracle::random_patch(rng, 9, 9, 5, rng.uniform(0.2, 1.0));
            const auto b = oracle::random_patch(rng, 9, 9, 5, rng.uniform(0.2, 1.0));
            const PixelOffset off{static_cast<int>(rng.below(13)) - 6, static_cast<int>(rng.below(13)) - 6};
            const auto hd = hamming_masked(a, b, off);
            const auto ref = oracle::naive_hamming(a, b, off);
            REQUIRE(hd.overlap_area == ref.overlap);
            REQUIRE(hd.differing_bits == ref.differing);
        }
    }
    SUBCASE("wide patches crossing word boundaries") {
        for (int t = 0; t < 200; ++t) {
            const int wa = 1 + static_cast<int>(rng.below(150));
            const int wb = 1 + static_cast<int>(rng.below(150));
            const auto a = oracle::random_patch(rng, wa, 3, 2, 0.6);
            const auto b = oracle::random_patch(rng, wb, 4, 2, 0.6);
            const PixelOffset off{static_cast<int>(rng.below(300)) - 150, static_cast<int>(rng.below(7)) - 3};
            const auto hd = hamming_masked(a, b, off);
            const auto ref = oracle::naive_hamming(a, b, off);
            REQUIRE(hd.overlap_area == ref.overlap);
            REQUIRE(hd.differing_bits == ref.differing);
        }
    }
    SUBCASE("symmetric under swapped arguments and negated offset") {
        for (int t = 0; t < 300; ++t) {
            const auto a = oracle::random_patch(rng, 1 + static_cast<int>(rng.below(20)), 7, 3, 0.5);
            const auto b = oracle::random_patch(rng, 1 + static_cast<int>(rng.below(20)), 5, 3, 0.5);
            const PixelOffset off{static_cast<int>(rng.below(41)) - 20, static_cast<int>(rng.below(13)) - 6};
            const auto ab = hamming_masked(a, b, off);
            const auto ba = hamming_masked(b, a, -off);
            CHECK(ab.overlap_area == ba.overlap_area);
            CHECK(ab.differing_bits == ba.differing_bits);
            CHECK(ab.distance() == ba.distance());
        }
    }
}
