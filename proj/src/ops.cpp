#include "lfcycle/ops.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace lfcycle::ad {

namespace {
thread_local int g_no_grad_depth = 0;
} // namespace

bool grad_enabled() { return g_no_grad_depth == 0; }
NoGradGuard::NoGradGuard() { ++g_no_grad_depth; }
NoGradGuard::~NoGradGuard() { --g_no_grad_depth; }

namespace detail {

template <typename T>
Tensor<T> make_op(std::vector<int> shape, std::vector<T> value,
                  std::vector<Tensor<T>> inputs,
                  std::function<void(Node<T>&)> backward_fn) {
    auto n = std::make_shared<Node<T>>();
    n->shape = std::move(shape);
    n->value = std::move(value);
    bool need = false;
    if (grad_enabled()) {
        for (const auto& in : inputs)
            if (in.defined() && in.node()->requires_grad) { need = true; break; }
    }
    if (need) {
        n->requires_grad = true;
        n->was_op = true;
        for (auto& in : inputs)
            if (in.defined()) n->parents.push_back(in.node());
        n->backward_fn = std::move(backward_fn);
    }
    return Tensor<T>(std::move(n));
}

} // namespace detail

template <typename T>
void backward(const Tensor<T>& loss) {
    if (!loss.defined())
        throw std::runtime_error("backward: undefined loss tensor");
    if (loss.numel() != 1)
        throw std::runtime_error("backward: loss must be scalar, got shape " +
                                 shape_str(loss.shape()));
    auto root = loss.node();
    if (!root->requires_grad)
        throw std::runtime_error("backward: loss does not depend on any requires_grad tensor");
    if (root->consumed)
        throw std::runtime_error("backward: graph already consumed; run a new forward pass");

    // Reverse post-order over parent edges = topological order consumer-first.
    std::vector<detail::Node<T>*> order;
    std::vector<std::pair<detail::Node<T>*, size_t>> stack;
    std::unordered_set<const detail::Node<T>*> seen;
    stack.push_back({root.get(), 0});
    seen.insert(root.get());
    while (!stack.empty()) {
        auto& top = stack.back();
        if (top.second < top.first->parents.size()) {
            detail::Node<T>* p = top.first->parents[top.second++].get();
            if (p->requires_grad && seen.insert(p).second) stack.push_back({p, 0});
        } else {
            order.push_back(top.first);
            stack.pop_back();
        }
    }

    root->ensure_grad();
    root->grad[0] = T(1);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        detail::Node<T>* n = *it;
        if (n->was_op && !n->backward_fn)
            throw std::runtime_error("backward: graph already consumed; run a new forward pass");
        if (n->backward_fn) {
            n->backward_fn(*n);
            n->backward_fn = nullptr;
        }
        if (n->was_op) n->consumed = true;
    }
    for (auto* n : order)
        if (n->was_op) n->parents.clear();
}

namespace {

template <typename T>
void check_same_shape(const char* op, const Tensor<T>& a, const Tensor<T>& b) {
    if (a.shape() != b.shape())
        throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                    shape_str(a.shape()) + " vs " + shape_str(b.shape()));
}

template <typename T>
void check_4d(const char* op, const Tensor<T>& x) {
    if (x.shape().size() != 4)
        throw std::invalid_argument(std::string(op) + ": expected 4D NCHW tensor, got " +
                                    shape_str(x.shape()));
}

} // namespace

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
    check_same_shape("add", a, b);
    std::vector<T> out(a.values());
    const auto& bv = b.values();
    for (size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
    return detail::make_op<T>(a.shape(), std::move(out), {a, b}, [](detail::Node<T>& self) {
        for (int k = 0; k < 2; ++k) {
            auto& p = *self.parents[k];
            if (!p.requires_grad) continue;
            p.ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i) p.grad[i] += self.grad[i];
        }
    });
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
    check_same_shape("sub", a, b);
    std::vector<T> out(a.values());
    const auto& bv = b.values();
    for (size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
    return detail::make_op<T>(a.shape(), std::move(out), {a, b}, [](detail::Node<T>& self) {
        auto& pa = *self.parents[0];
        auto& pb = *self.parents[1];
        if (pa.requires_grad) {
            pa.ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i) pa.grad[i] += self.grad[i];
        }
        if (pb.requires_grad) {
            pb.ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i) pb.grad[i] -= self.grad[i];
        }
    });
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
    check_same_shape("mul", a, b);
    std::vector<T> out(a.values());
    const auto& bv = b.values();
    for (size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
    return detail::make_op<T>(a.shape(), std::move(out), {a, b}, [](detail::Node<T>& self) {
        auto& pa = *self.parents[0];
        auto& pb = *self.parents[1];
        if (pa.requires_grad) {
            pa.ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i)
                pa.grad[i] += self.grad[i] * pb.value[i];
        }
        if (pb.requires_grad) {
            pb.ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i)
                pb.grad[i] += self.grad[i] * pa.value[i];
        }
    });
}

template <typename T>
Tensor<T> scale(const Tensor<T>& a, T factor) {
    std::vector<T> out(a.values());
    for (auto& v : out) v *= factor;
    return detail::make_op<T>(a.shape(), std::move(out), {a}, [factor](detail::Node<T>& self) {
        auto& p = *self.parents[0];
        if (!p.requires_grad) return;
        p.ensure_grad();
        for (size_t i = 0; i < self.grad.size(); ++i) p.grad[i] += factor * self.grad[i];
    });
}

template <typename T>
Tensor<T> relu(const Tensor<T>& a) {
    std::vector<T> out(a.values());
    for (auto& v : out)
        if (v < T(0)) v = T(0);
    return detail::make_op<T>(a.shape(), std::move(out), {a}, [](detail::Node<T>& self) {
        auto& p = *self.parents[0];
        if (!p.requires_grad) return;
        p.ensure_grad();
        for (size_t i = 0; i < self.grad.size(); ++i)
            if (p.value[i] > T(0)) p.grad[i] += self.grad[i];
    });
}

template <typename T>
Tensor<T> abs(const Tensor<T>& a) {
    std::vector<T> out(a.values());
    for (auto& v : out) v = std::fabs(v);
    return detail::make_op<T>(a.shape(), std::move(out), {a}, [](detail::Node<T>& self) {
        auto& p = *self.parents[0];
        if (!p.requires_grad) return;
        p.ensure_grad();
        for (size_t i = 0; i < self.grad.size(); ++i) {
            if (p.value[i] > T(0)) p.grad[i] += self.grad[i];
            else if (p.value[i] < T(0)) p.grad[i] -= self.grad[i];
        }
    });
}

template <typename T>
Tensor<T> square(const Tensor<T>& a) {
    std::vector<T> out(a.values());
    for (auto& v : out) v *= v;
    return detail::make_op<T>(a.shape(), std::move(out), {a}, [](detail::Node<T>& self) {
        auto& p = *self.parents[0];
        if (!p.requires_grad) return;
        p.ensure_grad();
        for (size_t i = 0; i < self.grad.size(); ++i)
            p.grad[i] += T(2) * p.value[i] * self.grad[i];
    });
}

template <typename T>
Tensor<T> sum(const Tensor<T>& a) {
    T acc = T(0);
    for (T v : a.values()) acc += v;
    return detail::make_op<T>({1}, {acc}, {a}, [](detail::Node<T>& self) {
        auto& p = *self.parents[0];
        if (!p.requires_grad) return;
        p.ensure_grad();
        const T g = self.grad[0];
        for (auto& gv : p.grad) gv += g;
    });
}

template <typename T>
Tensor<T> mean(const Tensor<T>& a) {
    if (a.numel() == 0) throw std::invalid_argument("mean: empty tensor");
    T acc = T(0);
    for (T v : a.values()) acc += v;
    const T inv_n = T(1) / static_cast<T>(a.numel());
    return detail::make_op<T>({1}, {acc * inv_n}, {a}, [inv_n](detail::Node<T>& self) {
        auto& p = *self.parents[0];
        if (!p.requires_grad) return;
        p.ensure_grad();
        const T g = self.grad[0] * inv_n;
        for (auto& gv : p.grad) gv += g;
    });
}

namespace {

// Valid output range [lo, hi) for one kernel tap: indices o with
// 0 <= o*stride + k - pad < extent.
inline void tap_range(int extent, int out_extent, int stride, int pad, int k, int& lo, int& hi) {
    int t = pad - k;
    lo = t <= 0 ? 0 : (t + stride - 1) / stride;
    int num = extent - 1 + pad - k;
    hi = num < 0 ? 0 : std::min(out_extent, num / stride + 1);
    if (lo > hi) lo = hi;
}

} // namespace

template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias,
                 int stride, int padding) {
    check_4d("conv2d", x);
    check_4d("conv2d", w);
    if (stride < 1 || padding < 0)
        throw std::invalid_argument("conv2d: stride must be >= 1 and padding >= 0");
    const int n = x.shape()[0], ci = x.shape()[1], h = x.shape()[2], wd = x.shape()[3];
    const int co = w.shape()[0], kh = w.shape()[2], kw = w.shape()[3];
    if (w.shape()[1] != ci)
        throw std::invalid_argument("conv2d: input channels mismatch, input " +
                                    shape_str(x.shape()) + " vs weight " + shape_str(w.shape()));
    if (bias.defined() && (bias.shape().size() != 1 || bias.shape()[0] != co))
        throw std::invalid_argument("conv2d: bias shape " + shape_str(bias.shape()) +
                                    " does not match " + std::to_string(co) + " output channels");
    const int ho = (h + 2 * padding - kh) / stride + 1;
    const int wo = (wd + 2 * padding - kw) / stride + 1;
    if (h + 2 * padding < kh || wd + 2 * padding < kw)
        throw std::invalid_argument("conv2d: kernel " + shape_str(w.shape()) +
                                    " larger than padded input " + shape_str(x.shape()));

    std::vector<T> out(static_cast<size_t>(n) * co * ho * wo, T(0));
    const T* xv = x.values().data();
    const T* wv = w.values().data();
    for (int in = 0; in < n; ++in) {
        for (int oc = 0; oc < co; ++oc) {
            T* op = out.data() + (static_cast<size_t>(in) * co + oc) * ho * wo;
            if (bias.defined()) {
                const T b = bias.values()[oc];
                for (int i = 0; i < ho * wo; ++i) op[i] = b;
            }
            for (int ic = 0; ic < ci; ++ic) {
                const T* ip = xv + (static_cast<size_t>(in) * ci + ic) * h * wd;
                for (int ky = 0; ky < kh; ++ky) {
                    int oy0, oy1;
                    tap_range(h, ho, stride, padding, ky, oy0, oy1);
                    for (int kx = 0; kx < kw; ++kx) {
                        int ox0, ox1;
                        tap_range(wd, wo, stride, padding, kx, ox0, ox1);
                        const T wval = wv[((static_cast<size_t>(oc) * ci + ic) * kh + ky) * kw + kx];
                        for (int oy = oy0; oy < oy1; ++oy) {
                            const int iy = oy * stride + ky - padding;
                            const T* irow = ip + static_cast<size_t>(iy) * wd + (ox0 * stride + kx - padding);
                            T* orow = op + static_cast<size_t>(oy) * wo + ox0;
                            if (stride == 1) {
                                for (int i = 0; i < ox1 - ox0; ++i) orow[i] += wval * irow[i];
                            } else {
                                for (int i = 0; i < ox1 - ox0; ++i) orow[i] += wval * irow[static_cast<size_t>(i) * stride];
                            }
                        }
                    }
                }
            }
        }
    }

    const bool has_bias = bias.defined();
    auto bw = [=](detail::Node<T>& self) {
        auto& px = *self.parents[0];
        auto& pw = *self.parents[1];
        detail::Node<T>* pb = has_bias ? self.parents[2].get() : nullptr;
        const T* g = self.grad.data();
        if (px.requires_grad) px.ensure_grad();
        if (pw.requires_grad) pw.ensure_grad();
        if (pb && pb->requires_grad) pb->ensure_grad();
        for (int in = 0; in < n; ++in) {
            for (int oc = 0; oc < co; ++oc) {
                const T* gp = g + (static_cast<size_t>(in) * co + oc) * ho * wo;
                if (pb && pb->requires_grad) {
                    T acc = T(0);
                    for (int i = 0; i < ho * wo; ++i) acc += gp[i];
                    pb->grad[oc] += acc;
                }
                for (int ic = 0; ic < ci; ++ic) {
                    const size_t in_off = (static_cast<size_t>(in) * ci + ic) * h * wd;
                    for (int ky = 0; ky < kh; ++ky) {
                        int oy0, oy1;
                        tap_range(h, ho, stride, padding, ky, oy0, oy1);
                        for (int kx = 0; kx < kw; ++kx) {
                            int ox0, ox1;
                            tap_range(wd, wo, stride, padding, kx, ox0, ox1);
                            const size_t widx = ((static_cast<size_t>(oc) * ci + ic) * kh + ky) * kw + kx;
                            const T wval = pw.value[widx];
                            T wacc = T(0);
                            for (int oy = oy0; oy < oy1; ++oy) {
                                const int iy = oy * stride + ky - padding;
                                const size_t ibase = in_off + static_cast<size_t>(iy) * wd + (ox0 * stride + kx - padding);
                                const T* grow = gp + static_cast<size_t>(oy) * wo + ox0;
                                const int cnt = ox1 - ox0;
                                if (px.requires_grad) {
                                    T* gxrow = px.grad.data() + ibase;
                                    if (stride == 1)
                                        for (int i = 0; i < cnt; ++i) gxrow[i] += wval * grow[i];
                                    else
                                        for (int i = 0; i < cnt; ++i) gxrow[static_cast<size_t>(i) * stride] += wval * grow[i];
                                }
                                if (pw.requires_grad) {
                                    const T* xrow = px.value.data() + ibase;
                                    if (stride == 1)
                                        for (int i = 0; i < cnt; ++i) wacc += xrow[i] * grow[i];
                                    else
                                        for (int i = 0; i < cnt; ++i) wacc += xrow[static_cast<size_t>(i) * stride] * grow[i];
                                }
                            }
                            if (pw.requires_grad) pw.grad[widx] += wacc;
                        }
                    }
                }
            }
        }
    };

    std::vector<Tensor<T>> inputs = {x, w};
    if (has_bias) inputs.push_back(bias);
    return detail::make_op<T>({n, co, ho, wo}, std::move(out), std::move(inputs), std::move(bw));
}

template <typename T>
Tensor<T> avg_pool2(const Tensor<T>& x) {
    check_4d("avg_pool2", x);
    const int n = x.shape()[0], c = x.shape()[1], h = x.shape()[2], w = x.shape()[3];
    if (h % 2 != 0 || w % 2 != 0)
        throw std::invalid_argument("avg_pool2: spatial dims must be even, got " +
                                    shape_str(x.shape()));
    const int ho = h / 2, wo = w / 2;
    std::vector<T> out(static_cast<size_t>(n) * c * ho * wo);
    const T* xv = x.values().data();
    for (int p = 0; p < n * c; ++p) {
        const T* ip = xv + static_cast<size_t>(p) * h * w;
        T* op = out.data() + static_cast<size_t>(p) * ho * wo;
        for (int y = 0; y < ho; ++y)
            for (int xx = 0; xx < wo; ++xx) {
                const T* r0 = ip + static_cast<size_t>(2 * y) * w + 2 * xx;
                const T* r1 = r0 + w;
                op[static_cast<size_t>(y) * wo + xx] = (r0[0] + r0[1] + r1[0] + r1[1]) * T(0.25);
            }
    }
    return detail::make_op<T>({n, c, ho, wo}, std::move(out), {x}, [=](detail::Node<T>& self) {
        auto& p = *self.parents[0];
        if (!p.requires_grad) return;
        p.ensure_grad();
        for (int pl = 0; pl < n * c; ++pl) {
            const T* gp = self.grad.data() + static_cast<size_t>(pl) * ho * wo;
            T* gx = p.grad.data() + static_cast<size_t>(pl) * h * w;
            for (int y = 0; y < ho; ++y)
                for (int xx = 0; xx < wo; ++xx) {
                    const T g = gp[static_cast<size_t>(y) * wo + xx] * T(0.25);
                    T* r0 = gx + static_cast<size_t>(2 * y) * w + 2 * xx;
                    T* r1 = r0 + w;
                    r0[0] += g; r0[1] += g; r1[0] += g; r1[1] += g;
                }
        }
    });
}

namespace {

// Half-pixel bilinear x2 taps: output o reads inputs i0,i1 with weights w0,w1.
template <typename T>
void upsample_taps(int in_extent, std::vector<int>& i0, std::vector<int>& i1,
                   std::vector<T>& w0, std::vector<T>& w1) {
    const int out_extent = in_extent * 2;
    i0.resize(out_extent); i1.resize(out_extent);
    w0.resize(out_extent); w1.resize(out_extent);
    for (int o = 0; o < out_extent; ++o) {
        const double src = (o + 0.5) / 2.0 - 0.5;
        int lo = static_cast<int>(std::floor(src));
        const double f = src - lo;
        int hi = lo + 1;
        lo = std::clamp(lo, 0, in_extent - 1);
        hi = std::clamp(hi, 0, in_extent - 1);
        i0[o] = lo; i1[o] = hi;
        w0[o] = static_cast<T>(1.0 - f); w1[o] = static_cast<T>(f);
    }
}

} // namespace

template <typename T>
Tensor<T> upsample2(const Tensor<T>& x) {
    check_4d("upsample2", x);
    const int n = x.shape()[0], c = x.shape()[1], h = x.shape()[2], w = x.shape()[3];
    const int ho = h * 2, wo = w * 2;
    std::vector<int> yi0, yi1, xi0, xi1;
    std::vector<T> yw0, yw1, xw0, xw1;
    upsample_taps<T>(h, yi0, yi1, yw0, yw1);
    upsample_taps<T>(w, xi0, xi1, xw0, xw1);

    std::vector<T> out(static_cast<size_t>(n) * c * ho * wo);
    const T* xv = x.values().data();
    for (int p = 0; p < n * c; ++p) {
        const T* ip = xv + static_cast<size_t>(p) * h * w;
        T* op = out.data() + static_cast<size_t>(p) * ho * wo;
        for (int oy = 0; oy < ho; ++oy) {
            const T* r0 = ip + static_cast<size_t>(yi0[oy]) * w;
            const T* r1 = ip + static_cast<size_t>(yi1[oy]) * w;
            const T a = yw0[oy], b = yw1[oy];
            T* orow = op + static_cast<size_t>(oy) * wo;
            for (int ox = 0; ox < wo; ++ox) {
                orow[ox] = a * (xw0[ox] * r0[xi0[ox]] + xw1[ox] * r0[xi1[ox]]) +
                           b * (xw0[ox] * r1[xi0[ox]] + xw1[ox] * r1[xi1[ox]]);
            }
        }
    }
    return detail::make_op<T>(
        {n, c, ho, wo}, std::move(out), {x},
        [=](detail::Node<T>& self) {
            auto& p = *self.parents[0];
            if (!p.requires_grad) return;
            p.ensure_grad();
            for (int pl = 0; pl < n * c; ++pl) {
                const T* gp = self.grad.data() + static_cast<size_t>(pl) * ho * wo;
                T* gx = p.grad.data() + static_cast<size_t>(pl) * h * w;
                for (int oy = 0; oy < ho; ++oy) {
                    T* r0 = gx + static_cast<size_t>(yi0[oy]) * w;
                    T* r1 = gx + static_cast<size_t>(yi1[oy]) * w;
                    const T a = yw0[oy], b = yw1[oy];
                    const T* grow = gp + static_cast<size_t>(oy) * wo;
                    for (int ox = 0; ox < wo; ++ox) {
                        const T g = grow[ox];
                        r0[xi0[ox]] += a * xw0[ox] * g;
                        r0[xi1[ox]] += a * xw1[ox] * g;
                        r1[xi0[ox]] += b * xw0[ox] * g;
                        r1[xi1[ox]] += b * xw1[ox] * g;
                    }
                }
            }
        });
}

template <typename T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b) {
    check_4d("concat_channels", a);
    check_4d("concat_channels", b);
    const auto& sa = a.shape();
    const auto& sb = b.shape();
    if (sa[0] != sb[0] || sa[2] != sb[2] || sa[3] != sb[3])
        throw std::invalid_argument("concat_channels: incompatible shapes " + shape_str(sa) +
                                    " vs " + shape_str(sb));
    const int n = sa[0], ca = sa[1], cb = sb[1], h = sa[2], w = sa[3];
    const size_t plane = static_cast<size_t>(h) * w;
    std::vector<T> out(static_cast<size_t>(n) * (ca + cb) * plane);
    for (int in = 0; in < n; ++in) {
        std::copy_n(a.values().data() + static_cast<size_t>(in) * ca * plane, static_cast<size_t>(ca) * plane,
                    out.data() + static_cast<size_t>(in) * (ca + cb) * plane);
        std::copy_n(b.values().data() + static_cast<size_t>(in) * cb * plane, static_cast<size_t>(cb) * plane,
                    out.data() + (static_cast<size_t>(in) * (ca + cb) + ca) * plane);
    }
    return detail::make_op<T>({n, ca + cb, h, w}, std::move(out), {a, b}, [=](detail::Node<T>& self) {
        auto& pa = *self.parents[0];
        auto& pb = *self.parents[1];
        if (pa.requires_grad) pa.ensure_grad();
        if (pb.requires_grad) pb.ensure_grad();
        for (int in = 0; in < n; ++in) {
            const T* g = self.grad.data() + static_cast<size_t>(in) * (ca + cb) * plane;
            if (pa.requires_grad) {
                T* ga = pa.grad.data() + static_cast<size_t>(in) * ca * plane;
                for (size_t i = 0; i < static_cast<size_t>(ca) * plane; ++i) ga[i] += g[i];
            }
            if (pb.requires_grad) {
                T* gb = pb.grad.data() + static_cast<size_t>(in) * cb * plane;
                const T* gsrc = g + static_cast<size_t>(ca) * plane;
                for (size_t i = 0; i < static_cast<size_t>(cb) * plane; ++i) gb[i] += gsrc[i];
            }
        }
    });
}

template <typename T>
Tensor<T> replicate_pad(const Tensor<T>& x, int top, int bottom, int left, int right) {
    check_4d("replicate_pad", x);
    if (top < 0 || bottom < 0 || left < 0 || right < 0)
        throw std::invalid_argument("replicate_pad: negative padding");
    const int n = x.shape()[0], c = x.shape()[1], h = x.shape()[2], w = x.shape()[3];
    const int ho = h + top + bottom, wo = w + left + right;
    std::vector<T> out(static_cast<size_t>(n) * c * ho * wo);
    const T* xv = x.values().data();
    for (int p = 0; p < n * c; ++p) {
        const T* ip = xv + static_cast<size_t>(p) * h * w;
        T* op = out.data() + static_cast<size_t>(p) * ho * wo;
        for (int oy = 0; oy < ho; ++oy) {
            const int iy = std::clamp(oy - top, 0, h - 1);
            const T* irow = ip + static_cast<size_t>(iy) * w;
            T* orow = op + static_cast<size_t>(oy) * wo;
            for (int ox = 0; ox < wo; ++ox)
                orow[ox] = irow[std::clamp(ox - left, 0, w - 1)];
        }
    }
    return detail::make_op<T>({n, c, ho, wo}, std::move(out), {x}, [=](detail::Node<T>& self) {
        auto& p = *self.parents[0];
        if (!p.requires_grad) return;
        p.ensure_grad();
        for (int pl = 0; pl < n * c; ++pl) {
            const T* gp = self.grad.data() + static_cast<size_t>(pl) * ho * wo;
            T* gx = p.grad.data() + static_cast<size_t>(pl) * h * w;
            for (int oy = 0; oy < ho; ++oy) {
                const int iy = std::clamp(oy - top, 0, h - 1);
                T* grow = gx + static_cast<size_t>(iy) * w;
                const T* srow = gp + static_cast<size_t>(oy) * wo;
                for (int ox = 0; ox < wo; ++ox)
                    grow[std::clamp(ox - left, 0, w - 1)] += srow[ox];
            }
        }
    });
}

template <typename T>
Tensor<T> crop(const Tensor<T>& x, int y0, int x0, int out_h, int out_w) {
    check_4d("crop", x);
    const int n = x.shape()[0], c = x.shape()[1], h = x.shape()[2], w = x.shape()[3];
    if (y0 < 0 || x0 < 0 || out_h < 1 || out_w < 1 || y0 + out_h > h || x0 + out_w > w)
        throw std::invalid_argument("crop: window [" + std::to_string(y0) + "," + std::to_string(x0) +
                                    ")+" + std::to_string(out_h) + "x" + std::to_string(out_w) +
                                    " outside input " + shape_str(x.shape()));
    std::vector<T> out(static_cast<size_t>(n) * c * out_h * out_w);
    const T* xv = x.values().data();
    for (int p = 0; p < n * c; ++p) {
        const T* ip = xv + static_cast<size_t>(p) * h * w;
        T* op = out.data() + static_cast<size_t>(p) * out_h * out_w;
        for (int y = 0; y < out_h; ++y)
            std::copy_n(ip + static_cast<size_t>(y0 + y) * w + x0, out_w,
                        op + static_cast<size_t>(y) * out_w);
    }
    return detail::make_op<T>({n, c, out_h, out_w}, std::move(out), {x}, [=](detail::Node<T>& self) {
        auto& p = *self.parents[0];
        if (!p.requires_grad) return;
        p.ensure_grad();
        for (int pl = 0; pl < n * c; ++pl) {
            const T* gp = self.grad.data() + static_cast<size_t>(pl) * out_h * out_w;
            T* gx = p.grad.data() + static_cast<size_t>(pl) * h * w;
            for (int y = 0; y < out_h; ++y) {
                T* grow = gx + static_cast<size_t>(y0 + y) * w + x0;
                const T* srow = gp + static_cast<size_t>(y) * out_w;
                for (int xx = 0; xx < out_w; ++xx) grow[xx] += srow[xx];
            }
        }
    });
}

#define LFCYCLE_INSTANTIATE_OPS(T)                                                             \
    template Tensor<T> detail::make_op<T>(std::vector<int>, std::vector<T>,                    \
                                          std::vector<Tensor<T>>,                              \
                                          std::function<void(detail::Node<T>&)>);              \
    template void backward<T>(const Tensor<T>&);                                               \
    template Tensor<T> add<T>(const Tensor<T>&, const Tensor<T>&);                             \
    template Tensor<T> sub<T>(const Tensor<T>&, const Tensor<T>&);                             \
    template Tensor<T> mul<T>(const Tensor<T>&, const Tensor<T>&);                             \
    template Tensor<T> scale<T>(const Tensor<T>&, T);                                          \
    template Tensor<T> relu<T>(const Tensor<T>&);                                              \
    template Tensor<T> abs<T>(const Tensor<T>&);                                               \
    template Tensor<T> square<T>(const Tensor<T>&);                                            \
    template Tensor<T> sum<T>(const Tensor<T>&);                                               \
    template Tensor<T> mean<T>(const Tensor<T>&);                                              \
    template Tensor<T> conv2d<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, int,    \
                                 int);                                                         \
    template Tensor<T> avg_pool2<T>(const Tensor<T>&);                                         \
    template Tensor<T> upsample2<T>(const Tensor<T>&);                                         \
    template Tensor<T> concat_channels<T>(const Tensor<T>&, const Tensor<T>&);                 \
    template Tensor<T> replicate_pad<T>(const Tensor<T>&, int, int, int, int);                 \
    template Tensor<T> crop<T>(const Tensor<T>&, int, int, int, int);

LFCYCLE_INSTANTIATE_OPS(float)
LFCYCLE_INSTANTIATE_OPS(double)

#undef LFCYCLE_INSTANTIATE_OPS

} // namespace lfcycle::ad
