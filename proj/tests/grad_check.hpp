#pragma once

#include "lfcycle/ops.hpp"
#include "lfcycle/rng.hpp"

#include <cmath>
#include <functional>

namespace lfcycle::test {

using DTensor = ad::Tensor<double>;

inline DTensor rand_tensor(std::vector<int> shape, RandomSource& rng, double lo = -1.0,
                           double hi = 1.0, bool requires_grad = true) {
    std::vector<double> data(static_cast<size_t>(ad::numel_of(shape)));
    for (auto& v : data) v = rng.uniform(lo, hi);
    auto t = DTensor::from_data(std::move(shape), std::move(data));
    t.set_requires_grad(requires_grad);
    return t;
}

/// Max relative error between analytic gradients and central differences.
/// loss_fn must rebuild the graph from the given leaves on every call.
/// At most max_elems evenly spaced elements are perturbed per leaf.
inline double max_grad_rel_error(std::vector<DTensor> leaves,
                                 const std::function<DTensor()>& loss_fn, double step = 1e-6,
                                 size_t max_elems = SIZE_MAX) {
    for (auto& l : leaves) l.zero_grad();
    ad::backward(loss_fn());
    std::vector<std::vector<double>> analytic;
    analytic.reserve(leaves.size());
    for (auto& l : leaves) analytic.push_back(l.grad());

    double worst = 0.0;
    for (size_t li = 0; li < leaves.size(); ++li) {
        auto& vals = leaves[li].values();
        const size_t stride = std::max<size_t>(1, vals.size() / std::max<size_t>(1, max_elems));
        for (size_t i = 0; i < vals.size(); i += stride) {
            const double orig = vals[i];
            double lp, lm;
            {
                ad::NoGradGuard guard;
                vals[i] = orig + step;
                lp = loss_fn().item();
                vals[i] = orig - step;
                lm = loss_fn().item();
                vals[i] = orig;
            }
            const double fd = (lp - lm) / (2.0 * step);
            const double a = analytic[li][i];
            const double denom = std::max({std::fabs(a), std::fabs(fd), 1e-3});
            worst = std::max(worst, std::fabs(a - fd) / denom);
        }
    }
    return worst;
}

/// Fixed random weights for a probe loss mean(out * w); build once so the
/// loss function is deterministic across graph rebuilds.
inline DTensor probe_weights(const std::vector<int>& shape, RandomSource& rng) {
    std::vector<double> w(static_cast<size_t>(ad::numel_of(shape)));
    for (auto& v : w) v = rng.uniform(-1.0, 1.0);
    return DTensor::from_data(shape, std::move(w));
}

inline DTensor probe(const DTensor& t, const DTensor& w) { return ad::mean(ad::mul(t, w)); }

} // namespace lfcycle::test
