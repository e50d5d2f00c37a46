#include "lfcycle/light_field.hpp"

#include <cmath>

namespace lfcycle {

double mean_abs_diff(const Image& a, const Image& b, int margin) {
    if (!a.same_size(b))
        throw std::invalid_argument("mean_abs_diff: size mismatch " + std::to_string(a.height) +
                                    "x" + std::to_string(a.width) + " vs " +
                                    std::to_string(b.height) + "x" + std::to_string(b.width));
    const int y0 = margin, y1 = a.height - margin;
    const int x0 = margin, x1 = a.width - margin;
    if (y1 <= y0 || x1 <= x0)
        throw std::invalid_argument("mean_abs_diff: margin " + std::to_string(margin) +
                                    " leaves no interior in " + std::to_string(a.height) + "x" +
                                    std::to_string(a.width));
    double acc = 0.0;
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x)
            for (int c = 0; c < 3; ++c)
                acc += std::fabs(static_cast<double>(a.at(y, x, c)) - b.at(y, x, c));
    return acc / (static_cast<double>(y1 - y0) * (x1 - x0) * 3);
}

Image crop_image(const Image& img, int y0, int x0, int h, int w) {
    if (y0 < 0 || x0 < 0 || h < 1 || w < 1 || y0 + h > img.height || x0 + w > img.width)
        throw std::invalid_argument("crop_image: window outside image");
    Image out(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c) out.at(y, x, c) = img.at(y0 + y, x0 + x, c);
    return out;
}

bool image_bits_equal(const Image& a, const Image& b) {
    return a.same_size(b) && a.data == b.data;
}

LightField::LightField(int n_t, int n_s, int view_h, int view_w)
    : rows(n_t), cols(n_s) {
    if (n_t < 1 || n_s < 1)
        throw std::invalid_argument("LightField: angular extents must be >= 1, got " +
                                    std::to_string(n_t) + "x" + std::to_string(n_s));
    views.assign(static_cast<size_t>(n_t) * n_s, Image(view_h, view_w));
}

void LightField::validate() const {
    if (rows < 1 || cols < 1 || views.size() != static_cast<size_t>(rows) * cols)
        throw std::runtime_error("LightField: inconsistent grid");
    for (const auto& v : views)
        if (!v.same_size(views.front()))
            throw std::runtime_error("LightField: views differ in size");
}

int dense_angular_size(int n, int alpha) {
    if (n < 2)
        throw std::invalid_argument("dense_angular_size: need n >= 2 sparse views, got " +
                                    std::to_string(n));
    if (alpha < 1)
        throw std::invalid_argument("dense_angular_size: alpha must be >= 1, got " +
                                    std::to_string(alpha));
    return alpha * (n - 1) + 1;
}

LightField subsample(const LightField& lf, int alpha) {
    if (alpha < 1) throw std::invalid_argument("subsample: alpha must be >= 1");
    if (alpha == 1) return lf;
    if ((lf.rows - 1) % alpha != 0 || (lf.cols - 1) % alpha != 0)
        throw std::invalid_argument("subsample: extents " + std::to_string(lf.rows) + "x" +
                                    std::to_string(lf.cols) + " minus one not divisible by alpha=" +
                                    std::to_string(alpha));
    LightField out;
    out.rows = (lf.rows - 1) / alpha + 1;
    out.cols = (lf.cols - 1) / alpha + 1;
    out.provenance = Provenance::Sparse;
    out.alpha = alpha;
    out.views.reserve(static_cast<size_t>(out.rows) * out.cols);
    for (int t = 0; t < out.rows; ++t)
        for (int s = 0; s < out.cols; ++s) out.views.push_back(lf.view(t * alpha, s * alpha));
    return out;
}

TripletSet extract_triplets(const LightField& lf, AngularAxis axis) {
    lf.validate();
    TripletSet set;
    const int along = lf.extent(axis);
    const int other = axis == AngularAxis::Horizontal ? lf.rows : lf.cols;
    if (along < 3) {
        set.axis_too_short = true;
        return set;
    }
    set.triplets.reserve(static_cast<size_t>(other) * (along - 2));
    for (int o = 0; o < other; ++o) {
        for (int i = 1; i + 1 < along; ++i) {
            ViewTriplet tr;
            tr.axis = axis;
            if (axis == AngularAxis::Horizontal) {
                tr.left = lf.view(o, i - 1);
                tr.center = lf.view(o, i);
                tr.right = lf.view(o, i + 1);
                tr.center_t = o;
                tr.center_s = i;
            } else {
                tr.left = lf.view(i - 1, o);
                tr.center = lf.view(i, o);
                tr.right = lf.view(i + 1, o);
                tr.center_t = i;
                tr.center_s = o;
            }
            set.triplets.push_back(std::move(tr));
        }
    }
    return set;
}

Image extract_epi(const LightField& lf, AngularAxis axis, int line, int fixed) {
    lf.validate();
    const int h = lf.view_height(), w = lf.view_width();
    if (axis == AngularAxis::Horizontal) {
        if (fixed < 0 || fixed >= lf.rows)
            throw std::invalid_argument("extract_epi: angular row " + std::to_string(fixed) +
                                        " out of bounds for " + std::to_string(lf.rows) + " rows");
        if (line < 0 || line >= h)
            throw std::invalid_argument("extract_epi: spatial row " + std::to_string(line) +
                                        " out of bounds for height " + std::to_string(h));
        Image epi(lf.cols, w);
        for (int s = 0; s < lf.cols; ++s)
            for (int x = 0; x < w; ++x)
                for (int c = 0; c < 3; ++c) epi.at(s, x, c) = lf.view(fixed, s).at(line, x, c);
        return epi;
    }
    if (fixed < 0 || fixed >= lf.cols)
        throw std::invalid_argument("extract_epi: angular column " + std::to_string(fixed) +
                                    " out of bounds for " + std::to_string(lf.cols) + " columns");
    if (line < 0 || line >= w)
        throw std::invalid_argument("extract_epi: spatial column " + std::to_string(line) +
                                    " out of bounds for width " + std::to_string(w));
    Image epi(lf.rows, h);
    for (int t = 0; t < lf.rows; ++t)
        for (int y = 0; y < h; ++y)
            for (int c = 0; c < 3; ++c) epi.at(t, y, c) = lf.view(t, fixed).at(y, line, c);
    return epi;
}

} // namespace lfcycle
