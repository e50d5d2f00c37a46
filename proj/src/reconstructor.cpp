#include "lfcycle/reconstructor.hpp"

namespace lfcycle {

std::string cascade_order_name(CascadeOrder order) {
    return order == CascadeOrder::HV ? "hv" : "vh";
}

CascadeOrder cascade_order_from_name(const std::string& name) {
    if (name == "hv") return CascadeOrder::HV;
    if (name == "vh") return CascadeOrder::VH;
    throw std::invalid_argument("unknown cascade order '" + name + "' (expected hv or vh)");
}

int ReconstructionPlan::steps() const {
    int a = alpha, x = 0;
    while (a > 1 && a % 2 == 0) {
        a /= 2;
        ++x;
    }
    if (a != 1 || x < 1)
        throw std::invalid_argument("ReconstructionPlan: alpha must be a power of two >= 2, got " +
                                    std::to_string(alpha));
    return x;
}

LightField upsample_axis(const LightField& lf, AngularAxis axis, const PairInterpolator& interp) {
    lf.validate();
    const int along = lf.extent(axis);
    if (along < 2)
        throw std::invalid_argument("upsample_axis: need at least 2 views along the axis, got " +
                                    std::to_string(along));
    LightField out;
    if (axis == AngularAxis::Horizontal) {
        out.rows = lf.rows;
        out.cols = 2 * lf.cols - 1;
        out.views.resize(static_cast<size_t>(out.rows) * out.cols);
        for (int t = 0; t < lf.rows; ++t) {
            for (int s = 0; s < lf.cols; ++s) out.view(t, 2 * s) = lf.view(t, s);
            for (int s = 0; s + 1 < lf.cols; ++s)
                out.view(t, 2 * s + 1) = interp.interpolate(lf.view(t, s), lf.view(t, s + 1));
        }
    } else {
        out.rows = 2 * lf.rows - 1;
        out.cols = lf.cols;
        out.views.resize(static_cast<size_t>(out.rows) * out.cols);
        for (int s = 0; s < lf.cols; ++s) {
            for (int t = 0; t < lf.rows; ++t) out.view(2 * t, s) = lf.view(t, s);
            for (int t = 0; t + 1 < lf.rows; ++t)
                out.view(2 * t + 1, s) = interp.interpolate(lf.view(t, s), lf.view(t + 1, s));
        }
    }
    out.provenance = Provenance::Dense;
    out.alpha = 1;
    return out;
}

namespace {

LightField cascade_once(const LightField& lf, CascadeOrder order, const PairInterpolator& h,
                        const PairInterpolator& v) {
    if (lf.rows < 2 || lf.cols < 2)
        throw std::invalid_argument("reconstruct: angular grid must be at least 2x2, got " +
                                    std::to_string(lf.rows) + "x" + std::to_string(lf.cols));
    if (order == CascadeOrder::HV)
        return upsample_axis(upsample_axis(lf, AngularAxis::Horizontal, h), AngularAxis::Vertical,
                             v);
    return upsample_axis(upsample_axis(lf, AngularAxis::Vertical, v), AngularAxis::Horizontal, h);
}

} // namespace

LightField reconstruct(const LightField& lf, const ReconstructionPlan& plan) {
    if (plan.alpha != 2)
        throw std::invalid_argument("reconstruct: plan alpha must be 2 (use multistep_reconstruct "
                                    "for higher factors)");
    if (!plan.horizontal || !plan.vertical)
        throw std::invalid_argument("reconstruct: plan is missing interpolators");
    return cascade_once(lf, plan.order, *plan.horizontal, *plan.vertical);
}

LightField multistep_reconstruct(const LightField& lf, const ReconstructionPlan& plan) {
    const int x = plan.steps();
    if (!plan.horizontal || !plan.vertical)
        throw std::invalid_argument("multistep_reconstruct: plan is missing interpolators");
    LightField cur = lf;
    for (int i = 0; i < x; ++i) cur = cascade_once(cur, plan.order, *plan.horizontal, *plan.vertical);
    return cur;
}

LightField multistep_reconstruct(const LightField& lf, CascadeOrder order,
                                 std::span<const StageInterpolators> stages) {
    if (stages.empty())
        throw std::invalid_argument("multistep_reconstruct: no stages given");
    LightField cur = lf;
    for (const auto& st : stages) {
        if (!st.horizontal || !st.vertical)
            throw std::invalid_argument("multistep_reconstruct: stage missing interpolators");
        cur = cascade_once(cur, order, *st.horizontal, *st.vertical);
    }
    return cur;
}

} // namespace lfcycle
