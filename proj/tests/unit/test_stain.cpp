#include <doctest.h>

#include "synthetic.hpp"

#include <felp/error.hpp>
#include <felp/stain.hpp>

#include <algorithm>
#include <random>
#include <sstream>

using namespace felp;

namespace {

RasterImage rgb(int w, int h, std::uint16_t r, std::uint16_t g, std::uint16_t b) {
    RasterImage img(w, h, 3);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            img.set(x, y, 0, r);
            img.set(x, y, 1, g);
            img.set(x, y, 2, b);
        }
    return img;
}

const Vec3 kH = synth::unit(0.65, 0.70, 0.29);
const Vec3 kE = synth::unit(0.07, 0.99, 0.11);

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::InvalidInput;
}

} // namespace

TEST_CASE("optical_density examples") {
    const auto white = optical_density(rgb(1, 1, 255, 255, 255));
    CHECK(white[0] == Vec3{0.0, 0.0, 0.0});

    const auto black = optical_density(rgb(1, 1, 0, 0, 0));
    for (double c : black[0])
        CHECK(c == doctest::Approx(2.4065).epsilon(1e-4));
    CHECK(black[0][0] == optical_density(rgb(1, 1, 1, 1, 1))[0][0]);

    // 25.5 is not representable; 25 and 26 bracket od = 1
    CHECK(optical_density(rgb(1, 1, 25, 25, 25))[0][1] > 1.0);
    CHECK(optical_density(rgb(1, 1, 26, 26, 26))[0][1] < 1.0);
    CHECK(optical_density(rgb(1, 1, 26, 26, 26))[0][1] == doctest::Approx(std::log10(255.0 / 26.0)));

    // sixteen-bit input uses its own white point
    RasterImage deep(1, 1, 3, std::vector<std::uint16_t>{65535, 6553, 1}, 16);
    const auto od = optical_density(deep)[0];
    CHECK(od[0] == 0.0);
    CHECK(od[1] == doctest::Approx(std::log10(65535.0 / 6553.0)));
    CHECK(od[2] == doctest::Approx(std::log10(65535.0)));

    CHECK_THROWS_AS(optical_density(RasterImage(2, 2, 1)), Error);
}

TEST_CASE("default basis is the normalized Ruifrok-Johnston pair") {
    const auto b = default_basis();
    CHECK(b.fallback);
    for (int c = 0; c < 3; ++c) {
        CHECK(b.h[static_cast<std::size_t>(c)] == doctest::Approx(kH[static_cast<std::size_t>(c)]));
        CHECK(b.e[static_cast<std::size_t>(c)] == doctest::Approx(kE[static_cast<std::size_t>(c)]));
    }
}

TEST_CASE("estimate_basis recovers the generating vectors") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const auto img = synth::dominant_mixture(40, 40, kH, kE, rng);
        const auto basis = estimate_basis(optical_density(img.rgb));
        CHECK_FALSE(basis.fallback);
        CHECK(angle_between(basis.h, kH) < 5.0);
        CHECK(angle_between(basis.e, kE) < 5.0);
        for (const auto& v : {basis.h, basis.e}) {
            CHECK(std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(*std::min_element(v.begin(), v.end()) >= 0.0);
        }
    }
}

TEST_CASE("estimate_basis labels the bluer vector as hematoxylin") {
    std::mt19937_64 rng(12);
    const Vec3 a = synth::unit(0.2, 0.8, 0.3);
    const Vec3 b = synth::unit(0.5, 0.3, 0.8);
    const auto img = synth::dominant_mixture(40, 40, a, b, rng);
    const auto basis = estimate_basis(optical_density(img.rgb));
    CHECK(angle_between(basis.h, b) < 5.0);
    CHECK(angle_between(basis.e, a) < 5.0);
}

TEST_CASE("estimate_basis fails on single-stain and blank input") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> conc(0.2, 1.0);
    std::vector<double> ch(1600), ce(1600, 0.0);
    for (auto& c : ch)
        c = conc(rng);
    const auto single = synth::compose(40, 40, kH, kE, ch, ce);
    CHECK(kind_of([&] { estimate_basis(optical_density(single)); }) == ErrorKind::BasisEstimationFailed);

    // exactly rank one in OD space
    std::vector<Vec3> line;
    for (int i = 0; i < 500; ++i) {
        const double c = 0.2 + i * 0.001;
        line.push_back({c * kH[0], c * kH[1], c * kH[2]});
    }
    CHECK(kind_of([&] { estimate_basis(line); }) == ErrorKind::BasisEstimationFailed);

    const auto white = rgb(40, 40, 255, 255, 255);
    CHECK(kind_of([&] { estimate_basis(optical_density(white)); }) == ErrorKind::BasisEstimationFailed);

    // fewer tissue pixels than required
    const auto small = synth::dominant_mixture(9, 9, kH, kE, rng);
    CHECK(kind_of([&] { estimate_basis(optical_density(small.rgb)); }) == ErrorKind::BasisEstimationFailed);
}

TEST_CASE("property: estimate_basis ignores pixel order and duplication") {
    std::mt19937_64 rng(14);
    for (int trial = 0; trial < 5; ++trial) {
        const auto img = synth::dominant_mixture(30, 30, kH, kE, rng);
        auto od = optical_density(img.rgb);
        const auto base = estimate_basis(od);
        std::shuffle(od.begin(), od.end(), rng);
        const auto shuffled = estimate_basis(od);
        CHECK(shuffled.h == base.h);
        CHECK(shuffled.e == base.e);
        auto doubled = od;
        doubled.insert(doubled.end(), od.begin(), od.end());
        const auto dup = estimate_basis(doubled);
        CHECK(angle_between(dup.h, base.h) < 1e-6);
        CHECK(angle_between(dup.e, base.e) < 1e-6);
    }
}

TEST_CASE("unmix examples") {
    StainBasis basis{kH, kE, false};
    // pixel exactly 2 * v_h (up to 8-bit rounding of the image)
    RasterImage img(1, 1, 3);
    for (int c = 0; c < 3; ++c)
        img.set(0, 0, c, synth::to_intensity(0.4 * kH[static_cast<std::size_t>(c)]));
    auto maps = unmix(img, basis);
    CHECK(maps.h[0] == doctest::Approx(0.4).epsilon(0.01));
    CHECK(maps.e[0] == doctest::Approx(0.0).epsilon(0.01));

    const auto white = unmix(rgb(2, 2, 255, 255, 255), basis);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(white.h[i] == 0.0);
        CHECK(white.e[i] == 0.0);
    }
}

TEST_CASE("unmix recovers exact coefficients under an orthonormal basis") {
    // A 16-bit image with an orthonormal basis along two channels keeps the
    // residual quantization tiny; the third channel carries only rounding.
    StainBasis basis{{1.0, 0.0, 0.0}, {0.0, 0.0, 1.0}, false};
    std::mt19937_64 rng(15);
    std::uniform_int_distribution<int> level(1, 65535);
    RasterImage img(8, 8, 3, 16);
    std::vector<double> ch, ce;
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) {
            const int r = level(rng), b = level(rng);
            img.set(x, y, 0, static_cast<std::uint16_t>(r));
            img.set(x, y, 1, 65535);
            img.set(x, y, 2, static_cast<std::uint16_t>(b));
            ch.push_back(-std::log10(r / 65535.0));
            ce.push_back(-std::log10(b / 65535.0));
        }
    const auto maps = unmix(img, basis);
    for (std::size_t i = 0; i < ch.size(); ++i) {
        CHECK(maps.h[i] == doctest::Approx(ch[i]).epsilon(1e-9));
        CHECK(maps.e[i] == doctest::Approx(ce[i]).epsilon(1e-9));
    }
}

TEST_CASE("unmix round trip with the true basis stays within one percent") {
    std::mt19937_64 rng(16);
    for (int trial = 0; trial < 10; ++trial) {
        const auto img = synth::dominant_mixture(30, 30, kH, kE, rng);
        const auto maps = unmix(img.rgb, StainBasis{kH, kE, false});
        CHECK(synth::relative_error(maps, img) < 0.01);
        CHECK(*std::min_element(maps.h.begin(), maps.h.end()) >= 0.0);
        CHECK(*std::min_element(maps.e.begin(), maps.e.end()) >= 0.0);
    }
}

TEST_CASE("unmix rejects a collinear basis") {
    StainBasis same{kH, kH, false};
    CHECK(kind_of([&] { unmix(rgb(2, 2, 100, 100, 100), same); }) == ErrorKind::InvalidBasis);
    Vec3 tilt = kH;
    tilt[0] += 1e-5;
    StainBasis nearly{kH, synth::unit(tilt[0], tilt[1], tilt[2]), false};
    CHECK(kind_of([&] { unmix(rgb(2, 2, 100, 100, 100), nearly); }) == ErrorKind::InvalidBasis);
}

TEST_CASE("quantize scales by the 99th percentile") {
    ConcentrationMaps maps;
    maps.width = 10;
    maps.height = 10;
    for (int i = 0; i < 100; ++i) {
        maps.h.push_back(i / 100.0);
        maps.e.push_back(0.0);
    }
    maps.h[99] = 50.0;  // outlier above the percentile saturates
    const auto q = quantize(maps);
    CHECK(q.h_scale == 0.98);
    CHECK(q.h.at(9, 9) == 255);
    CHECK(q.h.at(8, 9) == 255);
    CHECK(q.h.at(0, 0) == 0);
    CHECK(q.h.at(9, 4) == std::lround(255.0 * 0.49 / 0.98));
    CHECK(q.e_scale == 0.0);
    for (int y = 0; y < 10; ++y)
        for (int x = 0; x < 10; ++x)
            CHECK(q.e.at(x, y) == 0);
}

TEST_CASE("quantize falls back to the maximum when the percentile is zero") {
    ConcentrationMaps maps;
    maps.width = 10;
    maps.height = 10;
    maps.h.assign(100, 0.0);
    maps.e.assign(100, 0.0);
    maps.h[0] = 0.5;
    const auto q = quantize(maps);
    CHECK(q.h_scale == 0.5);
    CHECK(q.h.at(0, 0) == 255);
}

TEST_CASE("artefact_flag") {
    CHECK(artefact_flag(rgb(50, 50, 20, 30, 140)));
    std::mt19937_64 rng(17);
    const auto img = synth::dominant_mixture(50, 50, kH, kE, rng);
    CHECK_FALSE(artefact_flag(img.rgb));
    CHECK(max_channel_variance(rgb(4, 4, 9, 9, 9)) == 0.0);

    RasterImage stripes(2, 1, 3, std::vector<std::uint16_t>{0, 0, 0, 0, 20, 0});
    CHECK(max_channel_variance(stripes) == 100.0);
    CHECK(artefact_flag(stripes, 100.5));
    CHECK_FALSE(artefact_flag(stripes, 100.0));
}

TEST_CASE("pooled_basis_for_patient") {
    std::mt19937_64 rng(18);
    std::vector<RasterImage> patches;
    for (int i = 0; i < 4; ++i)
        patches.push_back(synth::dominant_mixture(20, 20, kH, kE, rng).rgb);
    const auto pooled = pooled_basis_for_patient(patches);
    std::vector<RasterImage> reversed(patches.rbegin(), patches.rend());
    const auto again = pooled_basis_for_patient(reversed);
    CHECK(again.h == pooled.h);
    CHECK(again.e == pooled.e);

    std::vector<RasterImage> same(3, patches[0]);
    const auto single = estimate_basis(optical_density(patches[0]));
    const auto tripled = pooled_basis_for_patient(same);
    CHECK(angle_between(tripled.h, single.h) < 1e-6);
    CHECK(angle_between(tripled.e, single.e) < 1e-6);

    // each patch carries one stain only; pooling sees both
    std::uniform_real_distribution<double> conc(0.2, 0.9);
    std::vector<double> c(900), zero(900, 0.0);
    for (auto& v : c)
        v = conc(rng);
    const auto only_h = synth::compose(30, 30, kH, kE, c, zero);
    const auto only_e = synth::compose(30, 30, kH, kE, zero, c);
    CHECK_THROWS_AS(estimate_basis(optical_density(only_h)), Error);
    CHECK_THROWS_AS(estimate_basis(optical_density(only_e)), Error);
    const std::vector<RasterImage> pair{only_h, only_e};
    const auto both = pooled_basis_for_patient(pair);
    CHECK(angle_between(both.h, kH) < 5.0);
    CHECK(angle_between(both.e, kE) < 5.0);
}

TEST_CASE("basis record round trip") {
    StainBasis b{synth::unit(0.1, 0.2, 0.3), synth::unit(0.3, 0.2, 0.1), true};
    std::ostringstream out;
    const std::string prov[] = {"patient 10253"};
    write_basis(out, b, prov);
    CHECK(out.str().rfind("# patient 10253\nh ", 0) == 0);
    std::istringstream in(out.str());
    const auto back = read_basis(in);
    CHECK(back.h == b.h);
    CHECK(back.e == b.e);
    CHECK(back.fallback);

    std::istringstream broken("h 1 0 0\nfallback 0\n");
    CHECK_THROWS_AS(read_basis(broken), Error);
}
