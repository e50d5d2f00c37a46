#pragma once

#include "lfcycle/tensor.hpp"

#include <cmath>

namespace lfcycle::ad {

template <typename T>
struct AdamConfig {
    T lr = T(1e-3);
    T beta1 = T(0.9);
    T beta2 = T(0.999);
    T eps = T(1e-8);
};

template <typename T>
struct AdamState {
    std::vector<std::vector<T>> m, v;
    int64_t step = 0;
};

/// One Adam update over a parameter list, reading each tensor's accumulated
/// gradient. Moment buffers are zero-initialized on the first call.
template <typename T>
void adam_step(std::vector<Tensor<T>>& params, AdamState<T>& state, const AdamConfig<T>& cfg) {
    if (state.step == 0 && state.m.empty()) {
        state.m.resize(params.size());
        state.v.resize(params.size());
        for (size_t i = 0; i < params.size(); ++i) {
            state.m[i].assign(params[i].values().size(), T(0));
            state.v[i].assign(params[i].values().size(), T(0));
        }
    }
    if (state.m.size() != params.size())
        throw std::invalid_argument("adam_step: state tracks " + std::to_string(state.m.size()) +
                                    " tensors, got " + std::to_string(params.size()));
    state.step += 1;
    const T bc1 = T(1) - static_cast<T>(std::pow(static_cast<double>(cfg.beta1), static_cast<double>(state.step)));
    const T bc2 = T(1) - static_cast<T>(std::pow(static_cast<double>(cfg.beta2), static_cast<double>(state.step)));
    for (size_t i = 0; i < params.size(); ++i) {
        auto& p = params[i].values();
        const auto& g = params[i].grad();
        if (state.m[i].size() != p.size() || g.size() != p.size())
            throw std::invalid_argument("adam_step: size mismatch on parameter " + std::to_string(i));
        auto& m = state.m[i];
        auto& v = state.v[i];
        for (size_t j = 0; j < p.size(); ++j) {
            m[j] = cfg.beta1 * m[j] + (T(1) - cfg.beta1) * g[j];
            v[j] = cfg.beta2 * v[j] + (T(1) - cfg.beta2) * g[j] * g[j];
            const T mhat = m[j] / bc1;
            const T vhat = v[j] / bc2;
            p[j] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
        }
    }
}

} // namespace lfcycle::ad
