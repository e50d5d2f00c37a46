#pragma once

#include "lfcycle/light_field.hpp"

#include <string>

namespace lfcycle {

inline constexpr double kPsnrCap = 99.0; // aggregate cap for the +inf sentinel

struct ViewScore {
    int t = 0, s = 0;
    double psnr_db = 0.0; // +inf sentinel for identical images
    double ssim = 0.0;
};

struct EvalReport {
    int alpha = 1;
    std::string dataset_id;
    int margin = 0;
    int rows = 0, cols = 0;
    std::vector<ViewScore> views; // synthesized views only
    double mean_psnr_db = 0.0;    // arithmetic mean with PSNR capped at 99 dB
    double mean_ssim = 0.0;
};

/// 10*log10(1 / MSE); MSE pooled jointly over all pixels and 3 channels.
double psnr(const Image& a, const Image& b);

/// Single-scale SSIM, 11x11 Gaussian window sigma=1.5, K1=0.01, K2=0.03,
/// dynamic range 1; valid-window convolution, channels averaged.
double ssim(const Image& a, const Image& b);

/// Per-synthesized-view metrics (coordinates not of the form (alpha*i, alpha*j))
/// plus dataset aggregates. `margin` crops both images identically first.
EvalReport evaluate(const LightField& recon, const LightField& gt, int alpha, int margin = 0,
                    std::string dataset_id = "");

} // namespace lfcycle
