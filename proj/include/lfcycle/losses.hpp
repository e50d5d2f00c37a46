#pragma once

#include "lfcycle/interp_net.hpp"
#include "lfcycle/light_field.hpp"

namespace lfcycle {

struct LossWeights {
    double lambda_c = 1.0;
    double lambda_r = 1.0;
    double lambda_p = 0.06;

    void validate() const;
};

/// Fixed (non-trainable) conv+relu+pool stack used as the perceptual feature
/// metric. Default weights are drawn once from a seeded unit-variance
/// distribution; an import path accepts external weights of matching shape.
template <typename T>
class FeatureExtractor {
public:
    struct StageSpec {
        int in_ch = 0, out_ch = 0, ksize = 3;
    };

    FeatureExtractor() = default;
    FeatureExtractor(std::vector<StageSpec> stages, uint64_t seed, std::string origin = "seeded");

    /// 3 stages of 3x3 conv (widths 8/16/16) + relu + 2x2 average pool.
    static FeatureExtractor make_default(uint64_t seed = 0x5eedfeed);

    /// Features of the final stage; differentiable w.r.t. the input image.
    ad::Tensor<T> features(const ad::Tensor<T>& img) const;

    const std::vector<StageSpec>& stages() const { return stages_; }
    int tap_depth() const { return static_cast<int>(stages_.size()); }
    const std::string& origin() const { return origin_; }
    std::vector<ad::Tensor<T>>& weights() { return weights_; } // w,b per stage
    const std::vector<ad::Tensor<T>>& weights() const { return weights_; }
    bool defined() const { return !weights_.empty(); }

private:
    std::vector<StageSpec> stages_;
    std::vector<ad::Tensor<T>> weights_;
    std::string origin_ = "seeded";
};

/// Mean absolute difference (per-pixel mean, so weights stay resolution
/// independent).
template <typename T> ad::Tensor<T> l1_mean(const ad::Tensor<T>& a, const ad::Tensor<T>& b);
template <typename T> ad::Tensor<T> l2_mean(const ad::Tensor<T>& a, const ad::Tensor<T>& b);

/// M(M(left,center), M(center,right)) — the cycle-reconstructed center view.
template <typename T>
ad::Tensor<T> cycle_reconstruct_t(const ViewTriplet& triplet, const InterpolatorModel<T>& model);

template <typename T>
ad::Tensor<T> cycle_loss(const ViewTriplet& triplet, const InterpolatorModel<T>& model);

/// l1 distance of M(left,right) (a doubled angular gap) to the center view.
template <typename T>
ad::Tensor<T> reconstruction_loss(const ViewTriplet& triplet, const InterpolatorModel<T>& model);

template <typename T>
ad::Tensor<T> perceptual_loss(const ad::Tensor<T>& img_x, const ad::Tensor<T>& img_y,
                              const FeatureExtractor<T>& extractor);

/// Mean of the two l1 errors of the pairwise-interpolated views against the
/// known dense midpoints.
template <typename T>
ad::Tensor<T> supervised_loss(const ViewTriplet& triplet, const Image& gt_left_mid,
                              const Image& gt_right_mid, const InterpolatorModel<T>& model);

template <typename T>
ad::Tensor<T> total_objective(const ad::Tensor<T>& lc, const ad::Tensor<T>& lr,
                              const ad::Tensor<T>& lp, const LossWeights& weights);

// Image-level equivalents used for oracle validation and reporting; these run
// any PairInterpolator (no gradients).
Image cycle_reconstruct(const ViewTriplet& triplet, const PairInterpolator& interp);
double cycle_loss_value(const ViewTriplet& triplet, const PairInterpolator& interp, int margin = 0);
double reconstruction_loss_value(const ViewTriplet& triplet, const PairInterpolator& interp,
                                 int margin = 0);

} // namespace lfcycle
