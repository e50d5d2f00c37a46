#include "lfcycle/synthgen.hpp"

#include <cmath>

namespace lfcycle {

void SceneSpec::validate() const {
    if (rows < 1 || cols < 1)
        throw std::invalid_argument("SceneSpec: grid extents must be >= 1");
    if (view_height < 1 || view_width < 1)
        throw std::invalid_argument("SceneSpec: view size must be >= 1");
    if (layers != 1 && layers != 2)
        throw std::invalid_argument("SceneSpec: layers must be 1 or 2");
    const int t0 = (rows - 1) / 2, s0 = (cols - 1) / 2;
    const int max_off = std::max({t0, rows - 1 - t0, s0, cols - 1 - s0});
    const double dmax = std::max(std::fabs(disparity), layers == 2 ? std::fabs(fg_disparity) : 0.0);
    if (dmax * max_off >= view_width / 4.0)
        throw std::invalid_argument("SceneSpec: |disparity| * max angular offset " +
                                    std::to_string(dmax * max_off) + " must stay below view width/4 = " +
                                    std::to_string(view_width / 4.0));
    if (layers == 2 && (fg_mask.height != view_height || fg_mask.width != view_width))
        throw std::invalid_argument("SceneSpec: two-layer scene needs a view-sized foreground mask");
}

Image shift_image(const Image& img, int dy, int dx) {
    Image out(img.height, img.width);
    for (int y = 0; y < img.height; ++y) {
        const int sy = std::clamp(y - dy, 0, img.height - 1);
        for (int x = 0; x < img.width; ++x) {
            const int sx = std::clamp(x - dx, 0, img.width - 1);
            for (int c = 0; c < 3; ++c) out.at(y, x, c) = img.at(sy, sx, c);
        }
    }
    return out;
}

namespace {

// Two box-blur passes (radius 2) per axis over white noise, then a linear
// rescale to [0.02, 0.98]; band-limited enough for unique NCC peaks.
void box_blur_rows(std::vector<float>& v, int h, int w, int radius) {
    std::vector<float> tmp(static_cast<size_t>(w));
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                float acc = 0.0f;
                int cnt = 0;
                for (int k = -radius; k <= radius; ++k) {
                    const int xx = x + k;
                    if (xx < 0 || xx >= w) continue;
                    acc += v[(static_cast<size_t>(y) * w + xx) * 3 + c];
                    ++cnt;
                }
                tmp[x] = acc / static_cast<float>(cnt);
            }
            for (int x = 0; x < w; ++x) v[(static_cast<size_t>(y) * w + x) * 3 + c] = tmp[x];
        }
}

void box_blur_cols(std::vector<float>& v, int h, int w, int radius) {
    std::vector<float> tmp(static_cast<size_t>(h));
    for (int c = 0; c < 3; ++c)
        for (int x = 0; x < w; ++x) {
            for (int y = 0; y < h; ++y) {
                float acc = 0.0f;
                int cnt = 0;
                for (int k = -radius; k <= radius; ++k) {
                    const int yy = y + k;
                    if (yy < 0 || yy >= h) continue;
                    acc += v[(static_cast<size_t>(yy) * w + x) * 3 + c];
                    ++cnt;
                }
                tmp[y] = acc / static_cast<float>(cnt);
            }
            for (int y = 0; y < h; ++y) v[(static_cast<size_t>(y) * w + x) * 3 + c] = tmp[y];
        }
}

} // namespace

Image noise_texture(int h, int w, RandomSource& rng) {
    Image img(h, w);
    for (auto& v : img.data) v = static_cast<float>(rng.uniform());
    box_blur_rows(img.data, h, w, 2);
    box_blur_cols(img.data, h, w, 2);
    box_blur_rows(img.data, h, w, 2);
    box_blur_cols(img.data, h, w, 2);
    float lo = img.data[0], hi = img.data[0];
    for (float v : img.data) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const float span = hi - lo;
    if (span > 0.0f)
        for (auto& v : img.data) v = 0.02f + 0.96f * (v - lo) / span;
    return img;
}

Image checker_texture(int h, int w, int cell) {
    Image img(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const bool on = ((y / cell) + (x / cell)) % 2 == 0;
            const float v = on ? 0.85f : 0.15f;
            for (int c = 0; c < 3; ++c) img.at(y, x, c) = v;
        }
    return img;
}

namespace {

struct Canvas {
    Image img;
    int my = 0, mx = 0; // margins: view pixel (y,x) of view (t0,s0) maps to canvas (y+my, x+mx)
};

Canvas make_canvas(const SceneSpec& spec, double disparity, RandomSource& rng) {
    const int t0 = (spec.rows - 1) / 2, s0 = (spec.cols - 1) / 2;
    const int max_t = std::max(t0, spec.rows - 1 - t0);
    const int max_s = std::max(s0, spec.cols - 1 - s0);
    Canvas cv;
    cv.my = static_cast<int>(std::ceil(std::fabs(disparity) * max_t)) + 2;
    cv.mx = static_cast<int>(std::ceil(std::fabs(disparity) * max_s)) + 2;
    const int ch = spec.view_height + 2 * cv.my;
    const int cw = spec.view_width + 2 * cv.mx;
    switch (spec.texture) {
    case TextureKind::Noise: cv.img = noise_texture(ch, cw, rng); break;
    case TextureKind::Checker: cv.img = checker_texture(ch, cw); break;
    case TextureKind::Imported:
        if (spec.imported.height < ch || spec.imported.width < cw)
            throw std::invalid_argument("SceneSpec: imported texture " +
                                        std::to_string(spec.imported.height) + "x" +
                                        std::to_string(spec.imported.width) +
                                        " smaller than required canvas " + std::to_string(ch) +
                                        "x" + std::to_string(cw));
        cv.img = crop_image(spec.imported, 0, 0, ch, cw);
        cv.img.clamp01();
        break;
    }
    return cv;
}

// Sample a view-sized window at real-valued offset (oy,ox) from the canvas
// reference window; bilinear, exact for integer offsets.
Image sample_window(const Canvas& cv, int vh, int vw, double oy, double ox) {
    Image out(vh, vw);
    for (int y = 0; y < vh; ++y)
        for (int x = 0; x < vw; ++x) {
            const double fy = y + cv.my + oy;
            const double fx = x + cv.mx + ox;
            const int y0 = static_cast<int>(std::floor(fy));
            const int x0 = static_cast<int>(std::floor(fx));
            const double wy = fy - y0, wx = fx - x0;
            const int y1 = std::min(y0 + 1, cv.img.height - 1);
            const int x1 = std::min(x0 + 1, cv.img.width - 1);
            for (int c = 0; c < 3; ++c) {
                const double v =
                    (1 - wy) * ((1 - wx) * cv.img.at(y0, x0, c) + wx * cv.img.at(y0, x1, c)) +
                    wy * ((1 - wx) * cv.img.at(y1, x0, c) + wx * cv.img.at(y1, x1, c));
                out.at(y, x, c) = std::clamp(static_cast<float>(v), 0.0f, 1.0f);
            }
        }
    return out;
}

} // namespace

LightField gen_planar_lf(const SceneSpec& spec) {
    spec.validate();
    RandomSource rng(splitmix64(spec.seed ^ 0x706c616eull)); // "plan"
    Canvas cv = make_canvas(spec, spec.disparity, rng);
    const int t0 = (spec.rows - 1) / 2, s0 = (spec.cols - 1) / 2;
    LightField lf(spec.rows, spec.cols, spec.view_height, spec.view_width);
    for (int t = 0; t < spec.rows; ++t)
        for (int s = 0; s < spec.cols; ++s)
            lf.view(t, s) = sample_window(cv, spec.view_height, spec.view_width,
                                          (t - t0) * spec.disparity, (s - s0) * spec.disparity);
    lf.provenance = Provenance::Dense;
    lf.alpha = 1;
    return lf;
}

LightField gen_two_layer_lf(const SceneSpec& spec) {
    spec.validate();
    if (spec.layers != 2)
        throw std::invalid_argument("gen_two_layer_lf: spec.layers must be 2");
    RandomSource rng(splitmix64(spec.seed ^ 0x74776f6cull)); // "twol"
    Canvas bg = make_canvas(spec, spec.disparity, rng);
    Canvas fg = make_canvas(spec, spec.fg_disparity, rng);
    // Foreground mask extends beyond the view by edge replication so a full
    // mask degenerates to the pure foreground plane.
    Canvas mk;
    mk.my = fg.my;
    mk.mx = fg.mx;
    mk.img = Image(spec.view_height + 2 * mk.my, spec.view_width + 2 * mk.mx);
    for (int y = 0; y < mk.img.height; ++y)
        for (int x = 0; x < mk.img.width; ++x) {
            const float m = spec.fg_mask.at(std::clamp(y - mk.my, 0, spec.view_height - 1),
                                            std::clamp(x - mk.mx, 0, spec.view_width - 1), 0);
            for (int c = 0; c < 3; ++c) mk.img.at(y, x, c) = std::clamp(m, 0.0f, 1.0f);
        }

    const int t0 = (spec.rows - 1) / 2, s0 = (spec.cols - 1) / 2;
    LightField lf(spec.rows, spec.cols, spec.view_height, spec.view_width);
    for (int t = 0; t < spec.rows; ++t)
        for (int s = 0; s < spec.cols; ++s) {
            Image b = sample_window(bg, spec.view_height, spec.view_width,
                                    (t - t0) * spec.disparity, (s - s0) * spec.disparity);
            Image f = sample_window(fg, spec.view_height, spec.view_width,
                                    (t - t0) * spec.fg_disparity, (s - s0) * spec.fg_disparity);
            Image m = sample_window(mk, spec.view_height, spec.view_width,
                                    (t - t0) * spec.fg_disparity, (s - s0) * spec.fg_disparity);
            Image& out = lf.view(t, s);
            for (size_t i = 0; i < out.data.size(); ++i)
                out.data[i] = m.data[i] * f.data[i] + (1.0f - m.data[i]) * b.data[i];
        }
    lf.provenance = Provenance::Dense;
    lf.alpha = 1;
    return lf;
}

TranslationOracle::TranslationOracle(AngularAxis axis, int displacement)
    : axis_(axis), displacement_(displacement) {
    if (displacement % 2 != 0)
        throw std::invalid_argument("TranslationOracle: displacement must be even, got " +
                                    std::to_string(displacement));
}

Image TranslationOracle::interpolate(const Image& a, const Image& b) const {
    if (!a.same_size(b))
        throw std::invalid_argument("TranslationOracle: frame sizes differ");
    const int half = displacement_ / 2;
    const int dy = axis_ == AngularAxis::Vertical ? half : 0;
    const int dx = axis_ == AngularAxis::Horizontal ? half : 0;
    Image sa = shift_image(a, -dy, -dx);
    Image sb = shift_image(b, dy, dx);
    Image out(a.height, a.width);
    for (size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = 0.5f * sa.data[i] + 0.5f * sb.data[i];
    return out;
}

} // namespace lfcycle
