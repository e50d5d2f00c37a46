#pragma once

#include "lfcycle/image.hpp"

#include <optional>

namespace lfcycle {

enum class Provenance { Dense, Sparse };

enum class AngularAxis { Horizontal, Vertical }; // Horizontal varies s (columns)

/// Grid of equally sized views indexed by angular coordinates (t = row,
/// s = column), zero-based. Immutable after construction by convention.
struct LightField {
    int rows = 0; // n_t
    int cols = 0; // n_s
    std::vector<Image> views; // row-major, t * cols + s
    Provenance provenance = Provenance::Dense;
    int alpha = 1; // sub-sampling factor when provenance == Sparse

    LightField() = default;
    LightField(int n_t, int n_s, int view_h, int view_w);

    const Image& view(int t, int s) const { return views[static_cast<size_t>(t) * cols + s]; }
    Image& view(int t, int s) { return views[static_cast<size_t>(t) * cols + s]; }

    int view_height() const { return views.empty() ? 0 : views.front().height; }
    int view_width() const { return views.empty() ? 0 : views.front().width; }

    int extent(AngularAxis axis) const { return axis == AngularAxis::Horizontal ? cols : rows; }

    void validate() const; // extents >= 1, uniform view sizes
};

/// Three views at consecutive sparse angular positions along one axis.
struct ViewTriplet {
    Image left, center, right;
    AngularAxis axis = AngularAxis::Horizontal;
    int center_t = 0, center_s = 0; // sparse-grid coordinates of the center
};

struct TripletSet {
    std::vector<ViewTriplet> triplets;
    bool axis_too_short = false; // extent < 3: fine-tuning impossible
};

/// Dense angular extent produced from n sparse views at factor alpha.
int dense_angular_size(int n, int alpha);

/// Keep views at angular coordinates that are multiples of alpha, bit-exact.
LightField subsample(const LightField& lf, int alpha);

/// All consecutive view triples along the axis (stride 1, overlapping).
TripletSet extract_triplets(const LightField& lf, AngularAxis axis);

/// Epipolar-plane image: stack the chosen spatial line from every view along
/// the axis. Horizontal: fix angular row `fixed` and spatial row `line`;
/// vertical: fix angular column and spatial column.
Image extract_epi(const LightField& lf, AngularAxis axis, int line, int fixed);

} // namespace lfcycle
