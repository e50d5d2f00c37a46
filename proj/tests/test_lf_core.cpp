#include "lfcycle/light_field.hpp"
#include "lfcycle/rng.hpp"
#include "lfcycle/synthgen.hpp"

#include <doctest.h>

using namespace lfcycle;

namespace {

LightField constant_lf(int rows, int cols, int h, int w, float value) {
    LightField lf(rows, cols, h, w);
    for (auto& v : lf.views)
        for (auto& p : v.data) p = value;
    return lf;
}

LightField random_lf(int rows, int cols, int h, int w, uint64_t seed) {
    RandomSource rng(seed);
    LightField lf(rows, cols, h, w);
    for (auto& v : lf.views)
        for (auto& p : v.data) p = static_cast<float>(rng.uniform());
    return lf;
}

} // namespace

TEST_SUITE_BEGIN("lf-core");

TEST_CASE("dense_angular_size follows the upsampling law") {
    CHECK(dense_angular_size(5, 2) == 9);
    CHECK(dense_angular_size(3, 4) == 9);
    CHECK(dense_angular_size(2, 2) == 3);
    CHECK_THROWS_AS(dense_angular_size(1, 2), std::invalid_argument);
}

TEST_CASE("subsample keeps every alpha-th view bit-exact") {
    auto lf = random_lf(9, 9, 8, 8, 5);
    auto s2 = subsample(lf, 2);
    CHECK(s2.rows == 5);
    CHECK(s2.cols == 5);
    CHECK(s2.provenance == Provenance::Sparse);
    CHECK(s2.alpha == 2);
    for (int t = 0; t < 5; ++t)
        for (int s = 0; s < 5; ++s)
            CHECK(image_bits_equal(s2.view(t, s), lf.view(2 * t, 2 * s)));

    auto s4 = subsample(lf, 4);
    CHECK(s4.rows == 3);
    CHECK(s4.cols == 3);
    for (int t = 0; t < 3; ++t)
        for (int s = 0; s < 3; ++s)
            CHECK(image_bits_equal(s4.view(t, s), lf.view(4 * t, 4 * s)));
}

TEST_CASE("subsample with alpha 1 is the identity") {
    auto lf = random_lf(3, 3, 4, 4, 6);
    auto same = subsample(lf, 1);
    CHECK(same.rows == lf.rows);
    CHECK(same.cols == lf.cols);
    CHECK(same.provenance == lf.provenance);
    for (size_t i = 0; i < lf.views.size(); ++i)
        CHECK(image_bits_equal(same.views[i], lf.views[i]));
}

TEST_CASE("subsample rejects non-divisible extents") {
    auto lf = random_lf(8, 9, 4, 4, 7);
    CHECK_THROWS_WITH_AS(subsample(lf, 2), doctest::Contains("8x9"), std::invalid_argument);
}

TEST_CASE("extract_triplets counts") {
    auto lf55 = random_lf(5, 5, 4, 4, 8);
    auto set_h = extract_triplets(lf55, AngularAxis::Horizontal);
    CHECK(set_h.triplets.size() == 15); // 5 rows x 3 per row
    CHECK_FALSE(set_h.axis_too_short);

    auto lf33 = random_lf(3, 3, 4, 4, 9);
    auto set_v = extract_triplets(lf33, AngularAxis::Vertical);
    CHECK(set_v.triplets.size() == 3);

    auto lf22 = random_lf(2, 2, 4, 4, 10);
    for (auto axis : {AngularAxis::Horizontal, AngularAxis::Vertical}) {
        auto set = extract_triplets(lf22, axis);
        CHECK(set.triplets.empty());
        CHECK(set.axis_too_short);
    }
}

TEST_CASE("triplet count law over random extents") {
    RandomSource rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        const int rows = rng.uniform_int(3, 9);
        const int cols = rng.uniform_int(3, 9);
        auto lf = random_lf(rows, cols, 4, 4, 100 + trial);
        CHECK(extract_triplets(lf, AngularAxis::Horizontal).triplets.size() ==
              static_cast<size_t>(rows) * (cols - 2));
        CHECK(extract_triplets(lf, AngularAxis::Vertical).triplets.size() ==
              static_cast<size_t>(cols) * (rows - 2));
    }
}

TEST_CASE("triplets satisfy their invariants") {
    auto lf = random_lf(5, 5, 6, 4, 11);
    auto set = extract_triplets(lf, AngularAxis::Horizontal);
    for (const auto& tr : set.triplets) {
        CHECK(tr.left.same_size(tr.center));
        CHECK(tr.center.same_size(tr.right));
        CHECK(image_bits_equal(tr.center, lf.view(tr.center_t, tr.center_s)));
        CHECK(image_bits_equal(tr.left, lf.view(tr.center_t, tr.center_s - 1)));
        CHECK(image_bits_equal(tr.right, lf.view(tr.center_t, tr.center_s + 1)));
    }
}

TEST_CASE("EPI of a constant light field is constant") {
    auto lf = constant_lf(5, 5, 8, 8, 0.25f);
    auto epi = extract_epi(lf, AngularAxis::Horizontal, 3, 2);
    CHECK(epi.height == 5);
    CHECK(epi.width == 8);
    for (float v : epi.data) CHECK(v == 0.25f);
}

TEST_CASE("EPI marker slope matches the generator disparity") {
    SceneSpec spec;
    spec.rows = 5;
    spec.cols = 5;
    spec.view_height = 48;
    spec.view_width = 48;
    spec.disparity = 2.0;
    spec.seed = 33;
    auto lf = gen_planar_lf(spec);

    // plant a bright marker on the tracked spatial line of every view
    const int line = 24;
    const int t_fixed = 2;
    const int s0 = 2;
    const int marker_x0 = 24;
    for (int s = 0; s < 5; ++s) {
        const int x = marker_x0 - static_cast<int>((s - s0) * spec.disparity);
        for (int c = 0; c < 3; ++c) lf.view(t_fixed, s).at(line, x, c) = 1.0f;
    }
    auto epi = extract_epi(lf, AngularAxis::Horizontal, line, t_fixed);
    // the marker advances -d px per angular step
    for (int s = 0; s < 5; ++s) {
        int best = 0;
        float best_v = -1.0f;
        for (int x = 0; x < epi.width; ++x)
            if (epi.at(s, x, 0) > best_v) {
                best_v = epi.at(s, x, 0);
                best = x;
            }
        CHECK(best == marker_x0 - static_cast<int>((s - s0) * spec.disparity));
    }
}

TEST_CASE("EPI of a single-view light field is the chosen line") {
    auto lf = random_lf(1, 1, 6, 6, 12);
    auto epi = extract_epi(lf, AngularAxis::Horizontal, 2, 0);
    CHECK(epi.height == 1);
    CHECK(epi.width == 6);
    for (int x = 0; x < 6; ++x)
        for (int c = 0; c < 3; ++c) CHECK(epi.at(0, x, c) == lf.view(0, 0).at(2, x, c));
}

TEST_CASE("EPI rejects out-of-bounds indices") {
    auto lf = random_lf(3, 3, 4, 4, 13);
    CHECK_THROWS_AS(extract_epi(lf, AngularAxis::Horizontal, 4, 0), std::invalid_argument);
    CHECK_THROWS_AS(extract_epi(lf, AngularAxis::Horizontal, 0, 3), std::invalid_argument);
    CHECK_THROWS_AS(extract_epi(lf, AngularAxis::Vertical, 0, -1), std::invalid_argument);
}

TEST_CASE("generated views satisfy the [0,1] invariant") {
    SceneSpec spec;
    spec.rows = 3;
    spec.cols = 3;
    spec.view_height = 16;
    spec.view_width = 16;
    spec.disparity = 1.0;
    spec.seed = 3;
    auto lf = gen_planar_lf(spec);
    for (const auto& v : lf.views)
        for (float p : v.data) {
            CHECK(p >= 0.0f);
            CHECK(p <= 1.0f);
        }
}

TEST_SUITE_END();
