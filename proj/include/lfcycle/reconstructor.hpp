#pragma once

#include "lfcycle/interpolator.hpp"
#include "lfcycle/light_field.hpp"

#include <span>

namespace lfcycle {

enum class CascadeOrder { HV, VH };

std::string cascade_order_name(CascadeOrder order);
CascadeOrder cascade_order_from_name(const std::string& name);

struct StageInterpolators {
    const PairInterpolator* horizontal = nullptr;
    const PairInterpolator* vertical = nullptr;
};

/// Upsampling plan: alpha = 2^x, with the same two models reused per stage.
struct ReconstructionPlan {
    int alpha = 2;
    CascadeOrder order = CascadeOrder::HV;
    const PairInterpolator* horizontal = nullptr;
    const PairInterpolator* vertical = nullptr;

    int steps() const; // x = log2(alpha); throws unless alpha is a power of two >= 2
};

/// Double the angular extent along one axis: even positions keep the original
/// views bit-exact, odd positions are pairwise interpolations.
LightField upsample_axis(const LightField& lf, AngularAxis axis, const PairInterpolator& interp);

/// One cascade pass (alpha = 2): both axes in the plan's order.
LightField reconstruct(const LightField& lf, const ReconstructionPlan& plan);

/// Iterated cascade for alpha = 2^x; each stage consumes the previous output.
LightField multistep_reconstruct(const LightField& lf, const ReconstructionPlan& plan);

/// Per-stage interpolator variant (stage 0 first), e.g. translation oracles
/// with per-stage displacements.
LightField multistep_reconstruct(const LightField& lf, CascadeOrder order,
                                 std::span<const StageInterpolators> stages);

} // namespace lfcycle
