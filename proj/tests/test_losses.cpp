#include <doctest.h>

#include "waveletvfi/losses.hpp"
#include "waveletvfi/rng.hpp"

#include <cmath>
#include <stdexcept>

using namespace wvfi;

namespace {

Tensor random_tensor(SplitMix64& rng, int c, int h, int w, float lo = 0.0f, float hi = 1.0f) {
    Tensor t(c, h, w);
    for (float& v : t.data) v = rng.uniform_float(lo, hi);
    return t;
}

// relative L2 error between an analytic gradient and central differences
template <typename LossFn>
double fd_check(Tensor pred, const Tensor& gt, const Tensor& analytic, LossFn&& fn) {
    (void)gt;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < pred.data.size(); ++i) {
        const float orig = pred.data[i];
        const float xp = orig + 1e-4f;
        const float xm = orig - 1e-4f;
        pred.data[i] = xp;
        const double lp = fn(pred);
        pred.data[i] = xm;
        const double lm = fn(pred);
        pred.data[i] = orig;
        const double fd = (lp - lm) / (static_cast<double>(xp) - static_cast<double>(xm));
        const double d = static_cast<double>(analytic.data[i]) - fd;
        num += d * d;
        den += fd * fd;
    }
    return std::sqrt(num / std::max(den, 1e-30));
}

} // namespace

TEST_CASE("charbonnier floor: identical tensors give rho(0) = 1e-3") {
    Tensor a(2, 3, 4, 0.25f);
    const LossResult res = charbonnier(a, a);
    CHECK(res.loss == doctest::Approx(1e-3).epsilon(1e-9));
    for (float g : res.grad.data) CHECK(g == doctest::Approx(0.0f));
}

TEST_CASE("charbonnier closed form at x = 3e-3") {
    Tensor pred(1, 1, 1, 3e-3f);
    Tensor gt(1, 1, 1, 0.0f);
    const LossResult res = charbonnier(pred, gt);
    CHECK(res.loss == doctest::Approx(std::sqrt(1e-5)).epsilon(1e-6));
}

TEST_CASE("charbonnier is even in its argument") {
    SplitMix64 rng(30);
    const Tensor a = random_tensor(rng, 2, 4, 5);
    const Tensor zero(2, 4, 5, 0.0f);
    Tensor neg = a;
    for (float& v : neg.data) v = -v;
    CHECK(charbonnier(a, zero).loss ==
          doctest::Approx(charbonnier(neg, zero).loss).epsilon(1e-12));
}

TEST_CASE("charbonnier gradient matches finite differences") {
    SplitMix64 rng(31);
    double worst = 0.0;
    for (int i = 0; i < 8; ++i) {
        const Tensor gt = random_tensor(rng, 3, 5, 6);
        // differences stay off the cusp at |x| ~ eps where the h = 1e-4
        // finite-difference oracle is inaccurate
        Tensor pred = gt;
        for (float& v : pred.data) {
            const float mag = rng.uniform_float(0.01f, 0.4f);
            v += (rng.next() & 1) ? mag : -mag;
        }
        const LossResult res = charbonnier(pred, gt);
        worst = std::max(worst, fd_check(pred, gt, res.grad, [&](const Tensor& p) {
                             return charbonnier(p, gt).loss;
                         }));
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("charbonnier rejects mismatched shapes") {
    Tensor a(1, 2, 2, 0.0f), b(1, 2, 3, 0.0f);
    CHECK_THROWS_AS(charbonnier(a, b), std::invalid_argument);
}

TEST_CASE("census loss floor and brightness invariance") {
    SplitMix64 rng(32);
    const Tensor img = random_tensor(rng, 3, 12, 14);
    const LossResult same = census_loss(img, img);
    CHECK(same.loss == doctest::Approx(1e-3).epsilon(1e-9));

    Tensor brighter = img;
    for (float& v : brighter.data) v += 0.07f;
    const LossResult shifted = census_loss(brighter, img);
    CHECK(std::fabs(shifted.loss - same.loss) < 1e-6);
}

TEST_CASE("census gradient matches finite differences") {
    SplitMix64 rng(33);
    double worst = 0.0;
    for (int i = 0; i < 3; ++i) {
        Tensor pred = random_tensor(rng, 3, 10, 10);
        const Tensor gt = random_tensor(rng, 3, 10, 10);
        const LossResult res = census_loss(pred, gt);
        worst = std::max(worst, fd_check(pred, gt, res.grad, [&](const Tensor& p) {
                             return census_loss(p, gt).loss;
                         }));
    }
    CHECK(worst < 1e-3);
}

TEST_CASE("census rejects images smaller than the patch") {
    Tensor tiny(3, 5, 5, 0.0f);
    CHECK_THROWS_AS(census_loss(tiny, tiny), std::invalid_argument);
}

TEST_CASE("frequency loss floor counts every coefficient map") {
    SplitMix64 rng(34);
    const Tensor img = random_tensor(rng, 1, 16, 16);
    const WaveletPyramid pyr = decompose(img, 2);
    const PyramidLossResult res = frequency_loss(pyr, pyr);
    // 2 levels x 4 maps, each contributing rho(0) = 1e-3
    CHECK(res.loss == doctest::Approx(8e-3).epsilon(1e-9));
}

TEST_CASE("frequency loss closed form for a single nonzero coefficient") {
    WaveletPyramid pred, gt;
    pred.original_height = gt.original_height = 2;
    pred.original_width = gt.original_width = 2;
    pred.levels.push_back(WaveletBand{Tensor(1, 1, 1, 0.0f), Tensor(1, 1, 1, 1e-2f),
                                      Tensor(1, 1, 1, 0.0f), Tensor(1, 1, 1, 0.0f)});
    gt.levels.push_back(WaveletBand{Tensor(1, 1, 1, 0.0f), Tensor(1, 1, 1, 0.0f),
                                    Tensor(1, 1, 1, 0.0f), Tensor(1, 1, 1, 0.0f)});
    const PyramidLossResult res = frequency_loss(pred, gt);
    const double expected = std::sqrt(1e-4 + 1e-6) + 3.0 * 1e-3;
    CHECK(res.loss == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("frequency gradient matches finite differences on one band") {
    SplitMix64 rng(35);
    const Tensor a = random_tensor(rng, 1, 8, 8);
    const Tensor b = random_tensor(rng, 1, 8, 8);
    WaveletPyramid pred = decompose(a, 2);
    const WaveletPyramid gt = decompose(b, 2);
    const PyramidLossResult res = frequency_loss(pred, gt);

    Tensor band = pred.levels[1].hl;
    const double err = fd_check(band, gt.levels[1].hl, res.grad.levels[1].hl,
                                [&](const Tensor& t) {
                                    WaveletPyramid tmp = pred;
                                    tmp.levels[1].hl = t;
                                    return frequency_loss(tmp, gt).loss;
                                });
    CHECK(err < 1e-4);
}

TEST_CASE("frequency loss rejects incongruent pyramids") {
    SplitMix64 rng(36);
    const Tensor a = random_tensor(rng, 1, 16, 16);
    const WaveletPyramid two = decompose(a, 2);
    const WaveletPyramid three = decompose(a, 3);
    CHECK_THROWS_AS(frequency_loss(two, three), std::invalid_argument);
}

TEST_CASE("cost regularization arithmetic") {
    CHECK(cost_regularization({0.0f, 0.0f, 1.0f, 0.0f}, {100, 200, 300, 400}, 4, 5) ==
          doctest::Approx(300.0 / 20.0).epsilon(1e-12));
    CHECK(cost_regularization({0.5f, 0.5f}, {100, 200}, 2, 5) ==
          doctest::Approx(15.0).epsilon(1e-12));
    // equal flops make the mixture weight irrelevant
    CHECK(cost_regularization({0.25f, 0.25f, 0.25f, 0.25f}, {80, 80, 80, 80}, 2, 2) ==
          doctest::Approx(20.0).epsilon(1e-12));
    CHECK_THROWS_AS(cost_regularization({1.0f}, {1, 2}, 2, 2), std::invalid_argument);
}

TEST_CASE("total loss combines the three components") {
    LossWeights w;
    w.alpha = 0.0;
    w.beta = 0.0;
    CHECK(total_loss(0.7, 100.0, 100.0, w) == doctest::Approx(0.7).epsilon(1e-12));
    w.alpha = 0.01;
    w.beta = 1.0;
    CHECK(total_loss(1.0, 2.0, 3.0, w) == doctest::Approx(4.02).epsilon(1e-12));
    // increasing a positively weighted component increases the total
    CHECK(total_loss(1.0, 2.5, 3.0, w) > total_loss(1.0, 2.0, 3.0, w));
}

TEST_CASE("psnr closed forms") {
    SplitMix64 rng(37);
    const Tensor a = random_tensor(rng, 3, 8, 8);
    CHECK(psnr(a, a) == doctest::Approx(100.0));

    Tensor shifted(3, 8, 8, 0.3f);
    Tensor base(3, 8, 8, 0.2f);
    CHECK(psnr(shifted, base) == doctest::Approx(20.0).epsilon(1e-5));
}

TEST_CASE("ssim basics") {
    SplitMix64 rng(38);
    const Tensor a = random_tensor(rng, 3, 16, 16);
    const Tensor b = random_tensor(rng, 3, 16, 16);
    CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(ssim(a, b) == doctest::Approx(ssim(b, a)).epsilon(1e-6));
    CHECK(ssim(a, b) < 1.0);
    Tensor tiny(3, 8, 8, 0.0f);
    CHECK_THROWS_AS(ssim(tiny, tiny), std::invalid_argument);
}
