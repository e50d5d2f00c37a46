#pragma once

#include "lfcycle/image.hpp"
#include "lfcycle/interpolator.hpp"
#include "lfcycle/ops.hpp"
#include "lfcycle/rng.hpp"

#include <array>
#include <string>

namespace lfcycle {

/// Encoder-decoder geometry of the kernel-prediction network.
struct ArchConfig {
    int levels = 3;
    std::vector<int> widths = {16, 32, 64}; // one per encoder level
    int kernel_size = 13;                   // K, odd and >= 3

    void validate() const;
    bool operator==(const ArchConfig&) const = default;
};

enum class AxisTag { Horizontal, Vertical, Generic };

std::string axis_tag_name(AxisTag tag);
AxisTag axis_tag_from_name(const std::string& name);

/// Four per-pixel 1D kernels, each stored as a (1,K,H,W) tensor: vertical and
/// horizontal kernels for frame A (k1*) and frame B (k2*).
template <typename T>
struct KernelField {
    ad::Tensor<T> k1v, k1h, k2v, k2h;
    int kernel_size = 0;
};

template <typename T> ad::Tensor<T> image_to_tensor(const Image& img);
/// Clamps to [0,1]; rejects non-finite values.
template <typename T> Image tensor_to_image(const ad::Tensor<T>& t);

/// Local separable convolution: per output pixel the outer product of the two
/// 1D kernels is applied over a replicate-padded neighborhood of the frame.
template <typename T>
ad::Tensor<T> apply_separable(const ad::Tensor<T>& frame, const ad::Tensor<T>& kv,
                              const ad::Tensor<T>& kh);

/// The interpolator M: U-Net style feature extractor with four kernel heads.
template <typename T>
class InterpolatorModel {
public:
    InterpolatorModel() = default;
    InterpolatorModel(const ArchConfig& cfg, AxisTag axis, uint64_t seed);

    const ArchConfig& config() const { return cfg_; }
    AxisTag axis() const { return axis_; }
    void set_axis(AxisTag tag) { axis_ = tag; }
    bool defined() const { return !params_.empty(); }

    /// Parameter tensors in canonical (checkpoint) order.
    std::vector<ad::Tensor<T>>& parameters() { return params_; }
    const std::vector<ad::Tensor<T>>& parameters() const { return params_; }
    const std::vector<std::string>& parameter_names() const { return names_; }

    void zero_grad();

    /// Predict the four 1D kernel maps for a frame pair (tensors (1,3,H,W)).
    KernelField<T> predict_kernels(const ad::Tensor<T>& a, const ad::Tensor<T>& b) const;

    /// Unclamped midpoint estimate; differentiable through kernels and frames.
    ad::Tensor<T> interpolate_t(const ad::Tensor<T>& a, const ad::Tensor<T>& b) const;

    /// Inference entry point: no graph recording, output clamped to [0,1].
    Image interpolate(const Image& a, const Image& b) const;

    /// Deep copy with independent parameter storage.
    InterpolatorModel clone() const;

private:
    struct Layer {
        int w_index = -1; // into params_
        int b_index = -1;
    };
    Layer add_layer(const std::string& name, int out_ch, int in_ch, int k, double weight_scale,
                    RandomSource& rng);
    ad::Tensor<T> conv_block(const ad::Tensor<T>& x, const Layer& l, bool with_relu) const;

    ArchConfig cfg_;
    AxisTag axis_ = AxisTag::Generic;
    std::vector<ad::Tensor<T>> params_;
    std::vector<std::string> names_;
    std::vector<std::array<Layer, 2>> enc_;
    Layer bottleneck_;
    std::vector<std::array<Layer, 2>> dec_;
    std::array<std::array<Layer, 2>, 4> heads_{};
};

/// PairInterpolator adapter over a trained model (float inference).
class LearnedInterpolator : public PairInterpolator {
public:
    explicit LearnedInterpolator(const InterpolatorModel<float>& model) : model_(&model) {}
    Image interpolate(const Image& a, const Image& b) const override;

private:
    const InterpolatorModel<float>* model_;
};

} // namespace lfcycle
