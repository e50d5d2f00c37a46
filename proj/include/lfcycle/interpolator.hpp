#pragma once

#include "lfcycle/image.hpp"

namespace lfcycle {

/// Anything that maps two views to their angular midpoint.
class PairInterpolator {
public:
    virtual ~PairInterpolator() = default;
    virtual Image interpolate(const Image& a, const Image& b) const = 0;
};

} // namespace lfcycle
