#include "lfcycle/metrics.hpp"

#include <array>
#include <cmath>
#include <limits>

namespace lfcycle {

double psnr(const Image& a, const Image& b) {
    if (!a.same_size(b))
        throw std::invalid_argument("psnr: size mismatch " + std::to_string(a.height) + "x" +
                                    std::to_string(a.width) + " vs " + std::to_string(b.height) +
                                    "x" + std::to_string(b.width));
    double mse = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) {
        const double d = static_cast<double>(a.data[i]) - b.data[i];
        mse += d * d;
    }
    mse /= static_cast<double>(a.data.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

namespace {

constexpr int kWin = 11;

std::array<double, kWin> gaussian_window() {
    std::array<double, kWin> w{};
    const double sigma = 1.5;
    double sum = 0.0;
    for (int i = 0; i < kWin; ++i) {
        const double d = i - kWin / 2;
        w[i] = std::exp(-d * d / (2.0 * sigma * sigma));
        sum += w[i];
    }
    for (auto& v : w) v /= sum;
    return w;
}

// Separable valid-mode Gaussian filter; output is (h-10) x (w-10).
std::vector<double> gauss_valid(const std::vector<double>& img, int h, int w) {
    static const std::array<double, kWin> win = gaussian_window();
    const int wo = w - kWin + 1;
    std::vector<double> tmp(static_cast<size_t>(h) * wo);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < wo; ++x) {
            double acc = 0.0;
            for (int k = 0; k < kWin; ++k) acc += win[k] * img[static_cast<size_t>(y) * w + x + k];
            tmp[static_cast<size_t>(y) * wo + x] = acc;
        }
    const int ho = h - kWin + 1;
    std::vector<double> out(static_cast<size_t>(ho) * wo);
    for (int y = 0; y < ho; ++y)
        for (int x = 0; x < wo; ++x) {
            double acc = 0.0;
            for (int k = 0; k < kWin; ++k) acc += win[k] * tmp[static_cast<size_t>(y + k) * wo + x];
            out[static_cast<size_t>(y) * wo + x] = acc;
        }
    return out;
}

} // namespace

double ssim(const Image& a, const Image& b) {
    if (!a.same_size(b))
        throw std::invalid_argument("ssim: size mismatch");
    if (a.height < kWin || a.width < kWin)
        throw std::invalid_argument("ssim: image " + std::to_string(a.height) + "x" +
                                    std::to_string(a.width) + " smaller than the " +
                                    std::to_string(kWin) + "x" + std::to_string(kWin) + " window");
    const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03; // (K*L)^2 with L = 1
    const int h = a.height, w = a.width;
    const size_t npx = static_cast<size_t>(h) * w;
    std::vector<double> xa(npx), xb(npx), xaa(npx), xbb(npx), xab(npx);
    double total = 0.0;
    for (int c = 0; c < 3; ++c) {
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const size_t i = static_cast<size_t>(y) * w + x;
                const double va = a.at(y, x, c), vb = b.at(y, x, c);
                xa[i] = va;
                xb[i] = vb;
                xaa[i] = va * va;
                xbb[i] = vb * vb;
                xab[i] = va * vb;
            }
        auto mu_a = gauss_valid(xa, h, w);
        auto mu_b = gauss_valid(xb, h, w);
        auto m_aa = gauss_valid(xaa, h, w);
        auto m_bb = gauss_valid(xbb, h, w);
        auto m_ab = gauss_valid(xab, h, w);
        double acc = 0.0;
        for (size_t i = 0; i < mu_a.size(); ++i) {
            const double va = m_aa[i] - mu_a[i] * mu_a[i];
            const double vb = m_bb[i] - mu_b[i] * mu_b[i];
            const double cov = m_ab[i] - mu_a[i] * mu_b[i];
            acc += ((2.0 * mu_a[i] * mu_b[i] + c1) * (2.0 * cov + c2)) /
                   ((mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1) * (va + vb + c2));
        }
        total += acc / static_cast<double>(mu_a.size());
    }
    return total / 3.0;
}

EvalReport evaluate(const LightField& recon, const LightField& gt, int alpha, int margin,
                    std::string dataset_id) {
    if (recon.rows != gt.rows || recon.cols != gt.cols)
        throw std::invalid_argument("evaluate: angular extents differ, " +
                                    std::to_string(recon.rows) + "x" + std::to_string(recon.cols) +
                                    " vs " + std::to_string(gt.rows) + "x" +
                                    std::to_string(gt.cols));
    if (recon.view_height() != gt.view_height() || recon.view_width() != gt.view_width())
        throw std::invalid_argument("evaluate: view sizes differ");
    if (alpha < 1) throw std::invalid_argument("evaluate: alpha must be >= 1");
    if (margin < 0) throw std::invalid_argument("evaluate: margin must be >= 0");

    EvalReport rep;
    rep.alpha = alpha;
    rep.dataset_id = std::move(dataset_id);
    rep.margin = margin;
    rep.rows = recon.rows;
    rep.cols = recon.cols;
    const int h = recon.view_height(), w = recon.view_width();
    if (2 * margin >= h || 2 * margin >= w)
        throw std::invalid_argument("evaluate: margin " + std::to_string(margin) +
                                    " leaves no pixels in " + std::to_string(h) + "x" +
                                    std::to_string(w) + " views");
    double psnr_acc = 0.0, ssim_acc = 0.0;
    for (int t = 0; t < recon.rows; ++t)
        for (int s = 0; s < recon.cols; ++s) {
            if (t % alpha == 0 && s % alpha == 0) continue; // input view, not synthesized
            Image ra = recon.view(t, s);
            Image gb = gt.view(t, s);
            if (margin > 0) {
                ra = crop_image(ra, margin, margin, h - 2 * margin, w - 2 * margin);
                gb = crop_image(gb, margin, margin, h - 2 * margin, w - 2 * margin);
            }
            ViewScore vs;
            vs.t = t;
            vs.s = s;
            vs.psnr_db = psnr(ra, gb);
            vs.ssim = ssim(ra, gb);
            psnr_acc += std::min(vs.psnr_db, kPsnrCap);
            ssim_acc += vs.ssim;
            rep.views.push_back(vs);
        }
    if (!rep.views.empty()) {
        rep.mean_psnr_db = psnr_acc / static_cast<double>(rep.views.size());
        rep.mean_ssim = ssim_acc / static_cast<double>(rep.views.size());
    }
    return rep;
}

} // namespace lfcycle
