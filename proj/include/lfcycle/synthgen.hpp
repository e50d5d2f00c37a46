#pragma once

#include "lfcycle/interpolator.hpp"
#include "lfcycle/light_field.hpp"
#include "lfcycle/rng.hpp"

namespace lfcycle {

enum class TextureKind { Noise, Checker, Imported };

/// Constant-disparity Lambertian plane scene (one or two layers).
struct SceneSpec {
    TextureKind texture = TextureKind::Noise;
    Image imported;          // used when texture == Imported
    double disparity = 0.0;  // background/single layer, px per angular step, signed
    int layers = 1;
    double fg_disparity = 0.0;
    Image fg_mask;           // view-sized; channel 0 in [0,1]; required when layers == 2
    int rows = 9, cols = 9;  // angular extents (n_t, n_s)
    int view_height = 64, view_width = 64;
    uint64_t seed = 0;

    void validate() const;
};

/// Translate image content by integer (dy,dx) with replicate fill.
Image shift_image(const Image& img, int dy, int dx);

LightField gen_planar_lf(const SceneSpec& spec);
LightField gen_two_layer_lf(const SceneSpec& spec);

/// Band-limited seeded noise texture (blurred white noise, rescaled).
Image noise_texture(int h, int w, RandomSource& rng);
Image checker_texture(int h, int w, int cell = 8);

/// Exact midpoint interpolator for frames related by an even integer
/// displacement D along one axis (b(x) = a(x + D)). Ideal M for planar
/// scenes; junk is confined to a |D|/2 border.
class TranslationOracle : public PairInterpolator {
public:
    TranslationOracle(AngularAxis axis, int displacement);
    Image interpolate(const Image& a, const Image& b) const override;

    AngularAxis axis() const { return axis_; }
    int displacement() const { return displacement_; }

private:
    AngularAxis axis_;
    int displacement_;
};

} // namespace lfcycle
