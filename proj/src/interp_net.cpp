#include "lfcycle/interp_net.hpp"

#include <cmath>

namespace lfcycle {

void ArchConfig::validate() const {
    if (levels < 1) throw std::invalid_argument("ArchConfig: levels must be >= 1");
    if (static_cast<int>(widths.size()) != levels)
        throw std::invalid_argument("ArchConfig: expected " + std::to_string(levels) +
                                    " widths, got " + std::to_string(widths.size()));
    for (int w : widths)
        if (w < 1) throw std::invalid_argument("ArchConfig: widths must be positive");
    if (kernel_size < 3 || kernel_size % 2 == 0)
        throw std::invalid_argument("ArchConfig: kernel_size must be odd and >= 3, got " +
                                    std::to_string(kernel_size));
}

std::string axis_tag_name(AxisTag tag) {
    switch (tag) {
    case AxisTag::Horizontal: return "horizontal";
    case AxisTag::Vertical: return "vertical";
    default: return "generic";
    }
}

AxisTag axis_tag_from_name(const std::string& name) {
    if (name == "horizontal") return AxisTag::Horizontal;
    if (name == "vertical") return AxisTag::Vertical;
    if (name == "generic") return AxisTag::Generic;
    throw std::invalid_argument("unknown axis tag '" + name + "'");
}

template <typename T>
ad::Tensor<T> image_to_tensor(const Image& img) {
    std::vector<T> data(static_cast<size_t>(3) * img.height * img.width);
    const size_t plane = static_cast<size_t>(img.height) * img.width;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < 3; ++c)
                data[c * plane + static_cast<size_t>(y) * img.width + x] =
                    static_cast<T>(img.at(y, x, c));
    return ad::Tensor<T>::from_data({1, 3, img.height, img.width}, std::move(data));
}

template <typename T>
Image tensor_to_image(const ad::Tensor<T>& t) {
    const auto& s = t.shape();
    if (s.size() != 4 || s[0] != 1 || s[1] != 3)
        throw std::invalid_argument("tensor_to_image: expected (1,3,H,W), got " +
                                    ad::shape_str(s));
    const int h = s[2], w = s[3];
    const size_t plane = static_cast<size_t>(h) * w;
    Image img(h, w);
    const auto& v = t.values();
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c) {
                const T val = v[c * plane + static_cast<size_t>(y) * w + x];
                if (!std::isfinite(static_cast<double>(val)))
                    throw std::runtime_error("tensor_to_image: non-finite value in image output");
                img.at(y, x, c) = std::clamp(static_cast<float>(val), 0.0f, 1.0f);
            }
    return img;
}

template <typename T>
ad::Tensor<T> apply_separable(const ad::Tensor<T>& frame, const ad::Tensor<T>& kv,
                              const ad::Tensor<T>& kh) {
    const auto& fs = frame.shape();
    const auto& vs = kv.shape();
    const auto& hs = kh.shape();
    if (fs.size() != 4 || vs.size() != 4 || hs.size() != 4)
        throw std::invalid_argument("apply_separable: expected 4D tensors");
    const int c = fs[1], h = fs[2], w = fs[3];
    const int k = vs[1];
    if (vs != hs || vs[0] != 1 || vs[2] != h || vs[3] != w || fs[0] != 1)
        throw std::invalid_argument("apply_separable: kernel fields " + ad::shape_str(vs) + "/" +
                                    ad::shape_str(hs) + " do not match frame " + ad::shape_str(fs));
    if (k % 2 == 0 || k < 1)
        throw std::invalid_argument("apply_separable: kernel length must be odd, got " +
                                    std::to_string(k));
    const int r = k / 2;
    const int hp = h + 2 * r, wp = w + 2 * r;

    // Replicate-padded copy of the frame, shared with the backward pass.
    auto padded = std::make_shared<std::vector<T>>(static_cast<size_t>(c) * hp * wp);
    {
        const T* fv = frame.values().data();
        for (int ch = 0; ch < c; ++ch) {
            const T* ip = fv + static_cast<size_t>(ch) * h * w;
            T* pp = padded->data() + static_cast<size_t>(ch) * hp * wp;
            for (int y = 0; y < hp; ++y) {
                const T* irow = ip + static_cast<size_t>(std::clamp(y - r, 0, h - 1)) * w;
                T* prow = pp + static_cast<size_t>(y) * wp;
                for (int x = 0; x < wp; ++x) prow[x] = irow[std::clamp(x - r, 0, w - 1)];
            }
        }
    }

    const size_t plane = static_cast<size_t>(h) * w;
    std::vector<T> out(static_cast<size_t>(c) * plane);
    {
        const T* kvp = kv.values().data();
        const T* khp = kh.values().data();
        std::vector<T> kvv(k), khh(k);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const size_t px = static_cast<size_t>(y) * w + x;
                for (int i = 0; i < k; ++i) {
                    kvv[i] = kvp[i * plane + px];
                    khh[i] = khp[i * plane + px];
                }
                for (int ch = 0; ch < c; ++ch) {
                    const T* pp = padded->data() + static_cast<size_t>(ch) * hp * wp;
                    T acc = T(0);
                    for (int i = 0; i < k; ++i) {
                        const T* row = pp + static_cast<size_t>(y + i) * wp + x;
                        T rowdot = T(0);
                        for (int j = 0; j < k; ++j) rowdot += khh[j] * row[j];
                        acc += kvv[i] * rowdot;
                    }
                    out[ch * plane + px] = acc;
                }
            }
    }

    auto bw = [c, h, w, k, r, hp, wp, plane, padded](ad::detail::Node<T>& self) {
        auto& pframe = *self.parents[0];
        auto& pkv = *self.parents[1];
        auto& pkh = *self.parents[2];
        const bool need_f = pframe.requires_grad;
        const bool need_v = pkv.requires_grad;
        const bool need_h = pkh.requires_grad;
        if (need_v) pkv.ensure_grad();
        if (need_h) pkh.ensure_grad();
        std::vector<T> gpad;
        if (need_f) gpad.assign(padded->size(), T(0));

        const T* kvp = pkv.value.data();
        const T* khp = pkh.value.data();
        std::vector<T> kvv(k), khh(k), gv(k), gh(k);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const size_t px = static_cast<size_t>(y) * w + x;
                for (int i = 0; i < k; ++i) {
                    kvv[i] = kvp[i * plane + px];
                    khh[i] = khp[i * plane + px];
                    gv[i] = T(0);
                    gh[i] = T(0);
                }
                for (int ch = 0; ch < c; ++ch) {
                    const T g = self.grad[ch * plane + px];
                    if (g == T(0)) continue;
                    const T* pp = padded->data() + static_cast<size_t>(ch) * hp * wp;
                    T* gp = need_f ? gpad.data() + static_cast<size_t>(ch) * hp * wp : nullptr;
                    for (int i = 0; i < k; ++i) {
                        const T* row = pp + static_cast<size_t>(y + i) * wp + x;
                        T rowdot = T(0);
                        const T gkvi = g * kvv[i];
                        for (int j = 0; j < k; ++j) {
                            rowdot += khh[j] * row[j];
                            if (need_h) gh[j] += gkvi * row[j];
                        }
                        if (need_v) gv[i] += g * rowdot;
                        if (need_f) {
                            T* grow = gp + static_cast<size_t>(y + i) * wp + x;
                            for (int j = 0; j < k; ++j) grow[j] += gkvi * khh[j];
                        }
                    }
                }
                if (need_v)
                    for (int i = 0; i < k; ++i) pkv.grad[i * plane + px] += gv[i];
                if (need_h)
                    for (int i = 0; i < k; ++i) pkh.grad[i * plane + px] += gh[i];
            }

        if (need_f) {
            pframe.ensure_grad();
            for (int ch = 0; ch < c; ++ch) {
                const T* gp = gpad.data() + static_cast<size_t>(ch) * hp * wp;
                T* gf = pframe.grad.data() + static_cast<size_t>(ch) * h * w;
                for (int y = 0; y < hp; ++y) {
                    const int iy = std::clamp(y - r, 0, h - 1);
                    const T* srow = gp + static_cast<size_t>(y) * wp;
                    T* drow = gf + static_cast<size_t>(iy) * w;
                    for (int x = 0; x < wp; ++x) drow[std::clamp(x - r, 0, w - 1)] += srow[x];
                }
            }
        }
    };

    return ad::detail::make_op<T>({1, c, h, w}, std::move(out), {frame, kv, kh}, std::move(bw));
}

template <typename T>
InterpolatorModel<T>::InterpolatorModel(const ArchConfig& cfg, AxisTag axis, uint64_t seed)
    : cfg_(cfg), axis_(axis) {
    cfg_.validate();
    RandomSource rng(splitmix64(seed ^ 0x6c66637963ull)); // "lfcyc"
    const int L = cfg_.levels;
    const auto& w = cfg_.widths;

    enc_.resize(L);
    for (int i = 0; i < L; ++i) {
        const int in_ch = i == 0 ? 6 : w[i - 1];
        enc_[i][0] = add_layer("enc" + std::to_string(i) + ".conv0", w[i], in_ch, 3, 1.0, rng);
        enc_[i][1] = add_layer("enc" + std::to_string(i) + ".conv1", w[i], w[i], 3, 1.0, rng);
    }
    bottleneck_ = add_layer("bottleneck.conv", w[L - 1], w[L - 1], 3, 1.0, rng);
    dec_.resize(L);
    for (int i = L - 1; i >= 0; --i) {
        const int up_ch = i == L - 1 ? w[L - 1] : w[i + 1];
        dec_[i][0] = add_layer("dec" + std::to_string(i) + ".conv0", w[i], up_ch + w[i], 3, 1.0, rng);
        dec_[i][1] = add_layer("dec" + std::to_string(i) + ".conv1", w[i], w[i], 3, 1.0, rng);
    }
    static const char* head_names[4] = {"k1v", "k1h", "k2v", "k2h"};
    for (int hidx = 0; hidx < 4; ++hidx) {
        heads_[hidx][0] = add_layer(std::string(head_names[hidx]) + ".conv0", w[0], w[0], 3, 1.0, rng);
        heads_[hidx][1] =
            add_layer(std::string(head_names[hidx]) + ".conv1", cfg_.kernel_size, w[0], 3, 0.1, rng);
        // Start each kernel as 0.5-weighted identity so the fresh model blends
        // its two inputs instead of emitting noise.
        auto& bias = params_[heads_[hidx][1].b_index].values();
        bias[cfg_.kernel_size / 2] = static_cast<T>(std::sqrt(0.5));
    }
}

template <typename T>
typename InterpolatorModel<T>::Layer InterpolatorModel<T>::add_layer(
    const std::string& name, int out_ch, int in_ch, int k, double weight_scale, RandomSource& rng) {
    const double stddev = weight_scale * std::sqrt(2.0 / (static_cast<double>(in_ch) * k * k));
    std::vector<T> wdata(static_cast<size_t>(out_ch) * in_ch * k * k);
    for (auto& v : wdata) v = static_cast<T>(rng.normal() * stddev);
    Layer l;
    l.w_index = static_cast<int>(params_.size());
    params_.push_back(
        ad::Tensor<T>::from_data({out_ch, in_ch, k, k}, std::move(wdata)).set_requires_grad(true));
    names_.push_back(name + ".w");
    l.b_index = static_cast<int>(params_.size());
    params_.push_back(ad::Tensor<T>::zeros({out_ch}).set_requires_grad(true));
    names_.push_back(name + ".b");
    return l;
}

template <typename T>
void InterpolatorModel<T>::zero_grad() {
    for (auto& p : params_) p.zero_grad();
}

template <typename T>
ad::Tensor<T> InterpolatorModel<T>::conv_block(const ad::Tensor<T>& x, const Layer& l,
                                               bool with_relu) const {
    auto y = ad::conv2d(x, params_[l.w_index], params_[l.b_index], 1, 1);
    return with_relu ? ad::relu(y) : y;
}

template <typename T>
KernelField<T> InterpolatorModel<T>::predict_kernels(const ad::Tensor<T>& a,
                                                     const ad::Tensor<T>& b) const {
    if (!defined()) throw std::runtime_error("InterpolatorModel: uninitialized model");
    if (a.shape() != b.shape())
        throw std::invalid_argument("predict_kernels: frame shapes differ, " +
                                    ad::shape_str(a.shape()) + " vs " + ad::shape_str(b.shape()));
    const auto& s = a.shape();
    if (s.size() != 4 || s[0] != 1 || s[1] != 3)
        throw std::invalid_argument("predict_kernels: expected (1,3,H,W) frames, got " +
                                    ad::shape_str(s));
    const int h = s[2], w = s[3];
    const int div = 1 << cfg_.levels;
    if (h % div != 0 || w % div != 0 || h < div || w < div)
        throw std::invalid_argument(
            "predict_kernels: spatial size " + std::to_string(h) + "x" + std::to_string(w) +
            " must be a positive multiple of " + std::to_string(div) + " (" +
            std::to_string(cfg_.levels) + " pooling levels); replicate-pad the frames first");

    auto x = ad::concat_channels(a, b);
    std::vector<ad::Tensor<T>> skips;
    skips.reserve(cfg_.levels);
    for (int i = 0; i < cfg_.levels; ++i) {
        x = conv_block(x, enc_[i][0], true);
        x = conv_block(x, enc_[i][1], true);
        skips.push_back(x);
        x = ad::avg_pool2(x);
    }
    x = conv_block(x, bottleneck_, true);
    for (int i = cfg_.levels - 1; i >= 0; --i) {
        x = ad::upsample2(x);
        x = ad::concat_channels(x, skips[i]);
        x = conv_block(x, dec_[i][0], true);
        x = conv_block(x, dec_[i][1], true);
    }
    KernelField<T> kf;
    kf.kernel_size = cfg_.kernel_size;
    ad::Tensor<T>* outs[4] = {&kf.k1v, &kf.k1h, &kf.k2v, &kf.k2h};
    for (int hidx = 0; hidx < 4; ++hidx) {
        auto t = conv_block(x, heads_[hidx][0], true);
        *outs[hidx] = conv_block(t, heads_[hidx][1], false);
    }
    return kf;
}

template <typename T>
ad::Tensor<T> InterpolatorModel<T>::interpolate_t(const ad::Tensor<T>& a,
                                                  const ad::Tensor<T>& b) const {
    auto kf = predict_kernels(a, b);
    return ad::add(apply_separable(a, kf.k1v, kf.k1h), apply_separable(b, kf.k2v, kf.k2h));
}

template <typename T>
Image InterpolatorModel<T>::interpolate(const Image& a, const Image& b) const {
    ad::NoGradGuard guard;
    return tensor_to_image(interpolate_t(image_to_tensor<T>(a), image_to_tensor<T>(b)));
}

template <typename T>
InterpolatorModel<T> InterpolatorModel<T>::clone() const {
    InterpolatorModel out(cfg_, axis_, 0);
    for (size_t i = 0; i < params_.size(); ++i) out.params_[i].values() = params_[i].values();
    return out;
}

Image LearnedInterpolator::interpolate(const Image& a, const Image& b) const {
    return model_->interpolate(a, b);
}

template ad::Tensor<float> image_to_tensor<float>(const Image&);
template ad::Tensor<double> image_to_tensor<double>(const Image&);
template Image tensor_to_image<float>(const ad::Tensor<float>&);
template Image tensor_to_image<double>(const ad::Tensor<double>&);
template ad::Tensor<float> apply_separable<float>(const ad::Tensor<float>&,
                                                  const ad::Tensor<float>&,
                                                  const ad::Tensor<float>&);
template ad::Tensor<double> apply_separable<double>(const ad::Tensor<double>&,
                                                    const ad::Tensor<double>&,
                                                    const ad::Tensor<double>&);
template class InterpolatorModel<float>;
template class InterpolatorModel<double>;

} // namespace lfcycle
