#include "waveletvfi/losses.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace wvfi {

namespace {

inline double rho(double x, double alpha, double eps) {
    return std::pow(x * x + eps * eps, alpha);
}

inline double rho_grad(double x, double alpha, double eps) {
    return alpha * 2.0 * x * std::pow(x * x + eps * eps, alpha - 1.0);
}

} // namespace

LossResult charbonnier(const Tensor& pred, const Tensor& gt, double alpha, double eps) {
    if (!pred.same_shape(gt)) {
        throw std::invalid_argument("charbonnier: shape mismatch");
    }
    const std::size_t n = pred.size();
    LossResult out;
    out.grad = Tensor(pred.channels, pred.height, pred.width);
    double acc = 0.0;
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = static_cast<double>(pred.data[i]) - static_cast<double>(gt.data[i]);
        acc += rho(x, alpha, eps);
        out.grad.data[i] = static_cast<float>(rho_grad(x, alpha, eps) * inv_n);
    }
    out.loss = acc * inv_n;
    return out;
}

namespace {

constexpr int kCensusRadius = 3; // 7x7 patches, 3-pixel border excluded

std::vector<double> to_gray255(const Tensor& img) {
    const std::size_t plane = static_cast<std::size_t>(img.height) * img.width;
    std::vector<double> gray(plane, 0.0);
    for (int c = 0; c < img.channels; ++c) {
        const float* p = img.plane(c);
        for (std::size_t i = 0; i < plane; ++i) gray[i] += p[i];
    }
    const double s = 255.0 / static_cast<double>(img.channels);
    for (double& v : gray) v *= s;
    return gray;
}

inline double census_response(double q) { return q / std::sqrt(0.81 + q * q); }

inline double census_response_grad(double q) {
    const double d = 0.81 + q * q;
    return 0.81 / (d * std::sqrt(d));
}

inline double soft_hamming_bit(double d) { return d * d / (0.1 + d * d); }

inline double soft_hamming_bit_grad(double d) {
    const double t = 0.1 + d * d;
    return 0.2 * d / (t * t);
}

} // namespace

LossResult census_loss(const Tensor& pred, const Tensor& gt, double alpha, double eps) {
    if (!pred.same_shape(gt)) {
        throw std::invalid_argument("census_loss: shape mismatch");
    }
    const int h = pred.height, w = pred.width;
    const int r = kCensusRadius;
    if (h < 2 * r + 1 || w < 2 * r + 1) {
        throw std::invalid_argument("census_loss: image smaller than the census patch");
    }

    const std::vector<double> gp = to_gray255(pred);
    const std::vector<double> gg = to_gray255(gt);
    const std::size_t plane = static_cast<std::size_t>(h) * w;

    // gradient accumulated w.r.t. the predicted grayscale, mapped back to the
    // channels at the end
    std::vector<double> ggrad(plane, 0.0);
    const std::int64_t n_interior =
        static_cast<std::int64_t>(h - 2 * r) * static_cast<std::int64_t>(w - 2 * r);
    const double inv_n = 1.0 / static_cast<double>(n_interior);

    double loss = 0.0;
    std::vector<double> dpred(static_cast<std::size_t>(2 * r + 1) * (2 * r + 1));
    std::vector<double> qpred(dpred.size());
    for (int y = r; y < h - r; ++y) {
        for (int x = r; x < w - r; ++x) {
            const std::size_t center = static_cast<std::size_t>(y) * w + x;
            double ham = 0.0;
            int bit = 0;
            for (int dy = -r; dy <= r; ++dy) {
                for (int dx = -r; dx <= r; ++dx, ++bit) {
                    const std::size_t nb = static_cast<std::size_t>(y + dy) * w + (x + dx);
                    const double qp = gp[nb] - gp[center];
                    const double qg = gg[nb] - gg[center];
                    const double d = census_response(qp) - census_response(qg);
                    ham += soft_hamming_bit(d);
                    dpred[bit] = d;
                    qpred[bit] = qp;
                }
            }
            loss += rho(ham, alpha, eps);
            const double wp = rho_grad(ham, alpha, eps) * inv_n;
            bit = 0;
            for (int dy = -r; dy <= r; ++dy) {
                for (int dx = -r; dx <= r; ++dx, ++bit) {
                    const double t =
                        wp * soft_hamming_bit_grad(dpred[bit]) * census_response_grad(qpred[bit]);
                    if (t == 0.0) continue;
                    const std::size_t nb = static_cast<std::size_t>(y + dy) * w + (x + dx);
                    ggrad[nb] += t;
                    ggrad[center] -= t;
                }
            }
        }
    }

    LossResult out;
    out.loss = loss * inv_n;
    out.grad = Tensor(pred.channels, h, w);
    const double chain = 255.0 / static_cast<double>(pred.channels);
    for (int c = 0; c < pred.channels; ++c) {
        float* g = out.grad.plane(c);
        for (std::size_t i = 0; i < plane; ++i) {
            g[i] = static_cast<float>(ggrad[i] * chain);
        }
    }
    return out;
}

namespace {

double map_charbonnier(const Tensor& pred, const Tensor& gt, Tensor& grad, double alpha,
                       double eps) {
    const std::size_t n = pred.size();
    const double inv_n = 1.0 / static_cast<double>(n);
    double acc = 0.0;
    grad = Tensor(pred.channels, pred.height, pred.width);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = static_cast<double>(pred.data[i]) - static_cast<double>(gt.data[i]);
        acc += rho(x, alpha, eps);
        grad.data[i] = static_cast<float>(rho_grad(x, alpha, eps) * inv_n);
    }
    return acc * inv_n;
}

} // namespace

PyramidLossResult frequency_loss(const WaveletPyramid& pred, const WaveletPyramid& gt,
                                 double alpha, double eps) {
    if (pred.depth() != gt.depth()) {
        throw std::invalid_argument("frequency_loss: pyramid depth mismatch");
    }
    PyramidLossResult out;
    out.grad.original_height = pred.original_height;
    out.grad.original_width = pred.original_width;
    out.grad.levels.resize(pred.depth());
    for (int l = 0; l < pred.depth(); ++l) {
        const WaveletBand& bp = pred.levels[l];
        const WaveletBand& bg = gt.levels[l];
        if (!bp.ll.same_shape(bg.ll) || !bp.lh.same_shape(bg.lh) || !bp.hl.same_shape(bg.hl) ||
            !bp.hh.same_shape(bg.hh)) {
            throw std::invalid_argument("frequency_loss: band shape mismatch at level " +
                                        std::to_string(l + 1));
        }
        WaveletBand& gl = out.grad.levels[l];
        out.loss += map_charbonnier(bp.ll, bg.ll, gl.ll, alpha, eps);
        out.loss += map_charbonnier(bp.lh, bg.lh, gl.lh, alpha, eps);
        out.loss += map_charbonnier(bp.hl, bg.hl, gl.hl, alpha, eps);
        out.loss += map_charbonnier(bp.hh, bg.hh, gl.hh, alpha, eps);
    }
    return out;
}

double cost_regularization(const std::vector<float>& sample,
                           const std::vector<std::int64_t>& flops_per_candidate, int h_pixels,
                           int w_pixels) {
    if (sample.size() != flops_per_candidate.size()) {
        throw std::invalid_argument("cost_regularization: length mismatch");
    }
    if (h_pixels <= 0 || w_pixels <= 0) {
        throw std::invalid_argument("cost_regularization: bad resolution");
    }
    double acc = 0.0;
    for (std::size_t k = 0; k < sample.size(); ++k) {
        acc += static_cast<double>(sample[k]) * static_cast<double>(flops_per_candidate[k]);
    }
    return acc / (static_cast<double>(h_pixels) * static_cast<double>(w_pixels));
}

double total_loss(double reconstruction, double frequency, double cost, const LossWeights& w) {
    return reconstruction + w.alpha * frequency + w.beta * cost;
}

double psnr(const Tensor& pred, const Tensor& gt) {
    if (!pred.same_shape(gt)) {
        throw std::invalid_argument("psnr: shape mismatch");
    }
    const std::size_t n = pred.size();
    double mse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = static_cast<double>(pred.data[i]) - static_cast<double>(gt.data[i]);
        mse += d * d;
    }
    mse /= static_cast<double>(n);
    if (mse < 1e-10) return 100.0;
    return 10.0 * std::log10(1.0 / mse);
}

namespace {

std::vector<double> gaussian_window11() {
    // 11 taps, sigma 1.5, normalized
    std::vector<double> w(11);
    double sum = 0.0;
    for (int i = 0; i < 11; ++i) {
        const double d = static_cast<double>(i - 5);
        w[i] = std::exp(-d * d / (2.0 * 1.5 * 1.5));
        sum += w[i];
    }
    for (double& v : w) v /= sum;
    return w;
}

// Separable Gaussian filter, valid region only (output (h-10) x (w-10)).
std::vector<double> gauss_filter_valid(const std::vector<double>& img, int h, int w,
                                       const std::vector<double>& win) {
    const int vh = h - 10, vw = w - 10;
    std::vector<double> rows(static_cast<std::size_t>(h) * vw);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < vw; ++x) {
            double acc = 0.0;
            for (int k = 0; k < 11; ++k) acc += win[k] * img[static_cast<std::size_t>(y) * w + x + k];
            rows[static_cast<std::size_t>(y) * vw + x] = acc;
        }
    }
    std::vector<double> out(static_cast<std::size_t>(vh) * vw);
    for (int y = 0; y < vh; ++y) {
        for (int x = 0; x < vw; ++x) {
            double acc = 0.0;
            for (int k = 0; k < 11; ++k) acc += win[k] * rows[static_cast<std::size_t>(y + k) * vw + x];
            out[static_cast<std::size_t>(y) * vw + x] = acc;
        }
    }
    return out;
}

} // namespace

double ssim(const Tensor& pred, const Tensor& gt) {
    if (!pred.same_shape(gt)) {
        throw std::invalid_argument("ssim: shape mismatch");
    }
    if (pred.height < 11 || pred.width < 11) {
        throw std::invalid_argument("ssim: image smaller than the 11x11 window");
    }
    const std::vector<double> win = gaussian_window11();
    const int h = pred.height, w = pred.width;
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    constexpr double kC1 = 0.01 * 0.01;
    constexpr double kC2 = 0.03 * 0.03;

    double channel_mean = 0.0;
    std::vector<double> x(plane), y(plane), xx(plane), yy(plane), xy(plane);
    for (int c = 0; c < pred.channels; ++c) {
        const float* pp = pred.plane(c);
        const float* pg = gt.plane(c);
        for (std::size_t i = 0; i < plane; ++i) {
            x[i] = pp[i];
            y[i] = pg[i];
            xx[i] = x[i] * x[i];
            yy[i] = y[i] * y[i];
            xy[i] = x[i] * y[i];
        }
        const std::vector<double> mu1 = gauss_filter_valid(x, h, w, win);
        const std::vector<double> mu2 = gauss_filter_valid(y, h, w, win);
        const std::vector<double> sxx = gauss_filter_valid(xx, h, w, win);
        const std::vector<double> syy = gauss_filter_valid(yy, h, w, win);
        const std::vector<double> sxy = gauss_filter_valid(xy, h, w, win);
        double acc = 0.0;
        for (std::size_t i = 0; i < mu1.size(); ++i) {
            const double m1 = mu1[i], m2 = mu2[i];
            const double var1 = sxx[i] - m1 * m1;
            const double var2 = syy[i] - m2 * m2;
            const double cov = sxy[i] - m1 * m2;
            const double num = (2.0 * m1 * m2 + kC1) * (2.0 * cov + kC2);
            const double den = (m1 * m1 + m2 * m2 + kC1) * (var1 + var2 + kC2);
            acc += num / den;
        }
        channel_mean += acc / static_cast<double>(mu1.size());
    }
    return channel_mean / static_cast<double>(pred.channels);
}

} // namespace wvfi
