#pragma once

#include "waveletvfi/config.hpp"
#include "waveletvfi/tensor.hpp"
#include "waveletvfi/wavelet.hpp"

#include <cstdint>
#include <vector>

namespace wvfi {

struct LossResult {
    double loss = 0.0;
    Tensor grad; // d loss / d pred
};

// Mean over elements of rho(pred - gt), rho(x) = (x^2 + eps^2)^alpha.
LossResult charbonnier(const Tensor& pred, const Tensor& gt, double alpha = 0.5,
                       double eps = 1e-3);

// Soft census comparison: both images go to grayscale (channel mean * 255),
// each pixel's 7x7 neighbourhood differences are squashed through
// q / sqrt(0.81 + q^2), per-pixel soft Hamming distance sums d^2 / (0.1 + d^2)
// over the 49 response differences, and the loss is the Charbonnier mean over
// the interior (3-pixel border excluded). Invariant to global brightness
// offsets by construction.
LossResult census_loss(const Tensor& pred, const Tensor& gt, double alpha = 0.5,
                       double eps = 1e-3);

struct PyramidLossResult {
    double loss = 0.0;
    WaveletPyramid grad; // per-band gradients, congruent with the inputs
};

// Sum over every coefficient map (all four bands, all levels) of the mean
// Charbonnier distance.
PyramidLossResult frequency_loss(const WaveletPyramid& pred, const WaveletPyramid& gt,
                                 double alpha = 0.5, double eps = 1e-3);

// sum_k h_k * flops_k / (h_pixels * w_pixels)
double cost_regularization(const std::vector<float>& sample,
                           const std::vector<std::int64_t>& flops_per_candidate, int h_pixels,
                           int w_pixels);

// L = L_r + alpha * L_f + beta * L_c
double total_loss(double reconstruction, double frequency, double cost, const LossWeights& w);

// 10*log10(1/MSE) over all channels and pixels, capped at 100 dB.
double psnr(const Tensor& pred, const Tensor& gt);

// Mean over channels of the standard structural similarity index, 11x11
// Gaussian window sigma 1.5, K1 = 0.01, K2 = 0.03, dynamic range 1.
double ssim(const Tensor& pred, const Tensor& gt);

} // namespace wvfi
