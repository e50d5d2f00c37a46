#include "lfcycle/losses.hpp"
#include "lfcycle/metrics.hpp"
#include "lfcycle/reconstructor.hpp"
#include "lfcycle/synthgen.hpp"
#include "lfcycle/trainer.hpp"

#include <doctest.h>

using namespace lfcycle;

namespace {

SceneSpec planar_spec(double d, uint64_t seed, int grid = 5, int size = 48) {
    SceneSpec spec;
    spec.rows = grid;
    spec.cols = grid;
    spec.view_height = size;
    spec.view_width = size;
    spec.disparity = d;
    spec.seed = seed;
    return spec;
}

bool interior_equal(const Image& a, const Image& b, int margin, float tol = 0.0f) {
    for (int y = margin; y < a.height - margin; ++y)
        for (int x = margin; x < a.width - margin; ++x)
            for (int c = 0; c < 3; ++c)
                if (std::fabs(a.at(y, x, c) - b.at(y, x, c)) > tol) return false;
    return true;
}

} // namespace

TEST_SUITE_BEGIN("synthgen");

TEST_CASE("zero disparity yields identical views") {
    auto lf = gen_planar_lf(planar_spec(0.0, 1));
    for (const auto& v : lf.views) CHECK(image_bits_equal(v, lf.views.front()));
}

TEST_CASE("shift search recovers the generated displacement") {
    auto lf = gen_planar_lf(planar_spec(2.0, 2));
    auto res = shift_search(lf.view(2, 2), lf.view(2, 3), 8);
    CHECK(res.axis == AngularAxis::Horizontal);
    CHECK(std::abs(res.best_shift) == 2);
    auto res_v = shift_search(lf.view(1, 2), lf.view(2, 2), 8);
    CHECK(res_v.axis == AngularAxis::Vertical);
    CHECK(std::abs(res_v.best_shift) == 2);
}

TEST_CASE("generation is deterministic in the seed") {
    auto a = gen_planar_lf(planar_spec(1.0, 77));
    auto b = gen_planar_lf(planar_spec(1.0, 77));
    REQUIRE(a.views.size() == b.views.size());
    for (size_t i = 0; i < a.views.size(); ++i) CHECK(image_bits_equal(a.views[i], b.views[i]));
    auto c = gen_planar_lf(planar_spec(1.0, 78));
    CHECK_FALSE(image_bits_equal(a.view(0, 0), c.view(0, 0)));
}

TEST_CASE("spec validation rejects content leaving the frame") {
    auto spec = planar_spec(8.0, 1, 9, 32); // 8 px/step over 4 steps on 32 px views
    CHECK_THROWS_AS(gen_planar_lf(spec), std::invalid_argument);
}

TEST_CASE("two-layer degenerate masks") {
    // a fixed imported texture makes both layers sample the same canvas, so
    // the degenerate cases are bit-exact
    RandomSource rng(123);
    Image tex = noise_texture(80, 80, rng);

    SceneSpec spec = planar_spec(1.0, 9, 3, 32);
    spec.texture = TextureKind::Imported;
    spec.imported = tex;
    spec.layers = 2;
    spec.fg_disparity = 2.0;
    spec.fg_mask = Image(32, 32); // empty mask

    auto bg_only = gen_two_layer_lf(spec);
    SceneSpec bg_spec = spec;
    bg_spec.layers = 1;
    auto planar_bg = gen_planar_lf(bg_spec);
    for (size_t i = 0; i < planar_bg.views.size(); ++i)
        CHECK(image_bits_equal(bg_only.views[i], planar_bg.views[i]));

    for (auto& v : spec.fg_mask.data) v = 1.0f; // full mask
    auto fg_only = gen_two_layer_lf(spec);
    SceneSpec fg_spec = spec;
    fg_spec.layers = 1;
    fg_spec.disparity = spec.fg_disparity;
    auto planar_fg = gen_planar_lf(fg_spec);
    for (size_t i = 0; i < planar_fg.views.size(); ++i)
        CHECK(image_bits_equal(fg_only.views[i], planar_fg.views[i]));
}

TEST_CASE("occluded strip width equals the disparity difference") {
    SceneSpec spec = planar_spec(0.0, 21, 3, 48);
    spec.layers = 2;
    spec.fg_disparity = 3.0;
    spec.fg_mask = Image(48, 48);
    // centered square occluder
    for (int y = 16; y < 32; ++y)
        for (int x = 16; x < 32; ++x)
            for (int c = 0; c < 3; ++c) spec.fg_mask.at(y, x, c) = 1.0f;
    auto lf = gen_two_layer_lf(spec);
    // The background is static (d=0), so consecutive views differ exactly on
    // the union of the two foreground squares: 16 px of occluder plus the
    // |d_fg - d_bg| = 3 px strip it newly covers.
    auto diff_span = [&](const Image& a, const Image& b) {
        int lo = 1 << 30, hi = -1;
        for (int x = 0; x < a.width; ++x)
            for (int y = 0; y < a.height; ++y)
                if (std::fabs(a.at(y, x, 0) - b.at(y, x, 0)) > 1e-6f) {
                    lo = std::min(lo, x);
                    hi = std::max(hi, x);
                }
        return std::pair{lo, hi};
    };
    auto [l01, h01] = diff_span(lf.view(1, 0), lf.view(1, 1));
    auto [l12, h12] = diff_span(lf.view(1, 1), lf.view(1, 2));
    CHECK(h01 - l01 + 1 == 16 + 3);
    CHECK(h12 - l12 + 1 == 16 + 3);
    CHECK(l12 - l01 == -3); // the occluder advances d_fg px per angular step
    CHECK(h12 - h01 == -3);
}

TEST_CASE("translation oracle identity case") {
    auto lf = gen_planar_lf(planar_spec(0.0, 4, 3, 24));
    TranslationOracle oracle(AngularAxis::Horizontal, 0);
    auto mid = oracle.interpolate(lf.view(0, 0), lf.view(0, 2));
    CHECK(image_bits_equal(mid, lf.view(0, 0)));
}

TEST_CASE("translation oracle rejects odd displacement") {
    CHECK_THROWS_AS(TranslationOracle(AngularAxis::Horizontal, 3), std::invalid_argument);
}

TEST_CASE("translation oracle reproduces the true midpoint on the interior") {
    auto lf = gen_planar_lf(planar_spec(1.0, 5, 5, 32)); // d=1 per step, pair gap 2 -> D=2
    TranslationOracle oracle(AngularAxis::Horizontal, 2);
    auto mid = oracle.interpolate(lf.view(2, 1), lf.view(2, 3));
    CHECK(interior_equal(mid, lf.view(2, 2), 1));

    TranslationOracle oracle_v(AngularAxis::Vertical, 2);
    auto mid_v = oracle_v.interpolate(lf.view(1, 2), lf.view(3, 2));
    CHECK(interior_equal(mid_v, lf.view(2, 2), 1));
}

TEST_CASE("oracle cycle property closes to the center view") {
    auto lf = gen_planar_lf(planar_spec(2.0, 6, 5, 48));
    ViewTriplet tr;
    tr.axis = AngularAxis::Horizontal;
    tr.left = lf.view(2, 0);
    tr.center = lf.view(2, 2);
    tr.right = lf.view(2, 4);
    // triplet views are two steps apart at d=2, so pair displacement is 4
    TranslationOracle oracle(AngularAxis::Horizontal, 4);
    CHECK(cycle_loss_value(tr, oracle, 6) <= 1e-6);
}

TEST_CASE("keystone: subsample then oracle reconstruct matches the dense field") {
    auto dense = gen_planar_lf(planar_spec(2.0, 31, 9, 64));
    auto sparse = subsample(dense, 2);
    TranslationOracle oh(AngularAxis::Horizontal, 4); // sparse neighbors: 2 steps x d=2
    TranslationOracle ov(AngularAxis::Vertical, 4);
    ReconstructionPlan plan;
    plan.alpha = 2;
    plan.horizontal = &oh;
    plan.vertical = &ov;
    auto recon = reconstruct(sparse, plan);
    REQUIRE(recon.rows == 9);
    REQUIRE(recon.cols == 9);
    for (int t = 0; t < 9; ++t)
        for (int s = 0; s < 9; ++s) {
            INFO("view ", t, ",", s);
            CHECK(interior_equal(recon.view(t, s), dense.view(t, s), 2));
        }
}

TEST_SUITE_END();
