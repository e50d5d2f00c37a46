#pragma once

#include "lfcycle/tensor.hpp"

namespace lfcycle::ad {

// Elementwise; shapes must match exactly (no broadcasting).
template <typename T> Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> scale(const Tensor<T>& a, T factor);

template <typename T> Tensor<T> relu(const Tensor<T>& a);
template <typename T> Tensor<T> abs(const Tensor<T>& a);
template <typename T> Tensor<T> square(const Tensor<T>& a);

// Full reductions to a {1}-shaped scalar.
template <typename T> Tensor<T> sum(const Tensor<T>& a);
template <typename T> Tensor<T> mean(const Tensor<T>& a);

/// 2D convolution, NCHW input (N,Ci,H,W), weight (Co,Ci,KH,KW), optional
/// bias (Co) (pass a default-constructed Tensor for none). Zero padding.
template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias,
                 int stride = 1, int padding = 0);

/// Non-overlapping 2x2 mean pooling; spatial dims must be even.
template <typename T> Tensor<T> avg_pool2(const Tensor<T>& x);

/// Bilinear x2 upsampling (half-pixel alignment, edges clamped).
template <typename T> Tensor<T> upsample2(const Tensor<T>& x);

/// Concatenate two NCHW tensors along the channel axis.
template <typename T> Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b);

/// Replicate (edge) padding of the spatial dims of an NCHW tensor.
template <typename T>
Tensor<T> replicate_pad(const Tensor<T>& x, int top, int bottom, int left, int right);

/// Spatial slice [y0, y0+out_h) x [x0, x0+out_w) of an NCHW tensor.
template <typename T>
Tensor<T> crop(const Tensor<T>& x, int y0, int x0, int out_h, int out_w);

namespace detail {
/// Builds an op node; records parents and the backward closure only when
/// grad mode is on and some input requires grad.
template <typename T>
Tensor<T> make_op(std::vector<int> shape, std::vector<T> value,
                  std::vector<Tensor<T>> inputs,
                  std::function<void(Node<T>&)> backward_fn);
} // namespace detail

} // namespace lfcycle::ad
