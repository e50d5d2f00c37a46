#include "lfcycle/losses.hpp"

#include <cmath>

namespace lfcycle {

void LossWeights::validate() const {
    if (!(lambda_c >= 0.0) || !(lambda_r >= 0.0) || !(lambda_p >= 0.0) ||
        !std::isfinite(lambda_c) || !std::isfinite(lambda_r) || !std::isfinite(lambda_p))
        throw std::invalid_argument("LossWeights: weights must be finite and >= 0");
}

template <typename T>
FeatureExtractor<T>::FeatureExtractor(std::vector<StageSpec> stages, uint64_t seed,
                                      std::string origin)
    : stages_(std::move(stages)), origin_(std::move(origin)) {
    if (stages_.empty()) throw std::invalid_argument("FeatureExtractor: no stages");
    RandomSource rng(splitmix64(seed ^ 0x70657263ull)); // "perc"
    for (const auto& st : stages_) {
        if (st.in_ch < 1 || st.out_ch < 1 || st.ksize < 1 || st.ksize % 2 == 0)
            throw std::invalid_argument("FeatureExtractor: invalid stage spec");
        const double stddev = std::sqrt(1.0 / (static_cast<double>(st.in_ch) * st.ksize * st.ksize));
        std::vector<T> w(static_cast<size_t>(st.out_ch) * st.in_ch * st.ksize * st.ksize);
        for (auto& v : w) v = static_cast<T>(rng.normal() * stddev);
        weights_.push_back(
            ad::Tensor<T>::from_data({st.out_ch, st.in_ch, st.ksize, st.ksize}, std::move(w)));
        weights_.push_back(ad::Tensor<T>::zeros({st.out_ch}));
    }
}

template <typename T>
FeatureExtractor<T> FeatureExtractor<T>::make_default(uint64_t seed) {
    return FeatureExtractor({{3, 8, 3}, {8, 16, 3}, {16, 16, 3}}, seed);
}

template <typename T>
ad::Tensor<T> FeatureExtractor<T>::features(const ad::Tensor<T>& img) const {
    if (!defined()) throw std::runtime_error("FeatureExtractor: uninitialized");
    auto x = img;
    for (size_t i = 0; i < stages_.size(); ++i) {
        const auto& st = stages_[i];
        x = ad::relu(ad::conv2d(x, weights_[2 * i], weights_[2 * i + 1], 1, st.ksize / 2));
        x = ad::avg_pool2(x);
    }
    return x;
}

template <typename T>
ad::Tensor<T> l1_mean(const ad::Tensor<T>& a, const ad::Tensor<T>& b) {
    return ad::mean(ad::abs(ad::sub(a, b)));
}

template <typename T>
ad::Tensor<T> l2_mean(const ad::Tensor<T>& a, const ad::Tensor<T>& b) {
    return ad::mean(ad::square(ad::sub(a, b)));
}

template <typename T>
ad::Tensor<T> cycle_reconstruct_t(const ViewTriplet& triplet, const InterpolatorModel<T>& model) {
    auto left = image_to_tensor<T>(triplet.left);
    auto center = image_to_tensor<T>(triplet.center);
    auto right = image_to_tensor<T>(triplet.right);
    auto mid_l = model.interpolate_t(left, center);
    auto mid_r = model.interpolate_t(center, right);
    return model.interpolate_t(mid_l, mid_r);
}

template <typename T>
ad::Tensor<T> cycle_loss(const ViewTriplet& triplet, const InterpolatorModel<T>& model) {
    return l1_mean(cycle_reconstruct_t(triplet, model), image_to_tensor<T>(triplet.center));
}

template <typename T>
ad::Tensor<T> reconstruction_loss(const ViewTriplet& triplet, const InterpolatorModel<T>& model) {
    auto recon = model.interpolate_t(image_to_tensor<T>(triplet.left),
                                     image_to_tensor<T>(triplet.right));
    return l1_mean(recon, image_to_tensor<T>(triplet.center));
}

template <typename T>
ad::Tensor<T> perceptual_loss(const ad::Tensor<T>& img_x, const ad::Tensor<T>& img_y,
                              const FeatureExtractor<T>& extractor) {
    if (img_x.shape() != img_y.shape())
        throw std::invalid_argument("perceptual_loss: shape mismatch " +
                                    ad::shape_str(img_x.shape()) + " vs " +
                                    ad::shape_str(img_y.shape()));
    return l2_mean(extractor.features(img_x), extractor.features(img_y));
}

template <typename T>
ad::Tensor<T> supervised_loss(const ViewTriplet& triplet, const Image& gt_left_mid,
                              const Image& gt_right_mid, const InterpolatorModel<T>& model) {
    if (gt_left_mid.data.empty() || gt_right_mid.data.empty())
        throw std::invalid_argument("supervised_loss: missing ground-truth midpoints");
    auto left = image_to_tensor<T>(triplet.left);
    auto center = image_to_tensor<T>(triplet.center);
    auto right = image_to_tensor<T>(triplet.right);
    auto e1 = l1_mean(model.interpolate_t(left, center), image_to_tensor<T>(gt_left_mid));
    auto e2 = l1_mean(model.interpolate_t(center, right), image_to_tensor<T>(gt_right_mid));
    return ad::scale(ad::add(e1, e2), T(0.5));
}

template <typename T>
ad::Tensor<T> total_objective(const ad::Tensor<T>& lc, const ad::Tensor<T>& lr,
                              const ad::Tensor<T>& lp, const LossWeights& weights) {
    weights.validate();
    auto acc = ad::scale(lc, static_cast<T>(weights.lambda_c));
    acc = ad::add(acc, ad::scale(lr, static_cast<T>(weights.lambda_r)));
    return ad::add(acc, ad::scale(lp, static_cast<T>(weights.lambda_p)));
}

Image cycle_reconstruct(const ViewTriplet& triplet, const PairInterpolator& interp) {
    Image mid_l = interp.interpolate(triplet.left, triplet.center);
    Image mid_r = interp.interpolate(triplet.center, triplet.right);
    return interp.interpolate(mid_l, mid_r);
}

double cycle_loss_value(const ViewTriplet& triplet, const PairInterpolator& interp, int margin) {
    return mean_abs_diff(cycle_reconstruct(triplet, interp), triplet.center, margin);
}

double reconstruction_loss_value(const ViewTriplet& triplet, const PairInterpolator& interp,
                                 int margin) {
    return mean_abs_diff(interp.interpolate(triplet.left, triplet.right), triplet.center, margin);
}

#define LFCYCLE_INSTANTIATE_LOSSES(T)                                                         \
    template class FeatureExtractor<T>;                                                       \
    template ad::Tensor<T> l1_mean<T>(const ad::Tensor<T>&, const ad::Tensor<T>&);            \
    template ad::Tensor<T> l2_mean<T>(const ad::Tensor<T>&, const ad::Tensor<T>&);            \
    template ad::Tensor<T> cycle_reconstruct_t<T>(const ViewTriplet&,                         \
                                                  const InterpolatorModel<T>&);               \
    template ad::Tensor<T> cycle_loss<T>(const ViewTriplet&, const InterpolatorModel<T>&);    \
    template ad::Tensor<T> reconstruction_loss<T>(const ViewTriplet&,                         \
                                                  const InterpolatorModel<T>&);               \
    template ad::Tensor<T> perceptual_loss<T>(const ad::Tensor<T>&, const ad::Tensor<T>&,     \
                                              const FeatureExtractor<T>&);                    \
    template ad::Tensor<T> supervised_loss<T>(const ViewTriplet&, const Image&, const Image&, \
                                              const InterpolatorModel<T>&);                   \
    template ad::Tensor<T> total_objective<T>(const ad::Tensor<T>&, const ad::Tensor<T>&,     \
                                              const ad::Tensor<T>&, const LossWeights&);

LFCYCLE_INSTANTIATE_LOSSES(float)
LFCYCLE_INSTANTIATE_LOSSES(double)

#undef LFCYCLE_INSTANTIATE_LOSSES

} // namespace lfcycle
