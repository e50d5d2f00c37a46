#pragma once

#include "lfcycle/adam.hpp"
#include "lfcycle/losses.hpp"

#include <span>

namespace lfcycle {

enum class TrainMode { SelfSupervised, NoCycle, Supervised };

std::string train_mode_name(TrainMode mode);
TrainMode train_mode_from_name(const std::string& name);

struct TrainConfig {
    double lr = 1e-3;
    int batch_size = 8;
    int iterations = 500;
    int coarse_crop = 150;
    int fine_crop = 128;
    double disparity_threshold = 1.0; // pixels
    int screen_search_range = 8;
    LossWeights weights{};
    double sched_factor = 0.5;
    int sched_window = 500;        // iterations per scheduler window
    double sched_improve = 0.01;   // required relative improvement
    double min_lr = 1e-5;
    uint64_t seed = 0;
    TrainMode mode = TrainMode::SelfSupervised;
    int patch_retry_budget = 50;
    int size_divisor = 1; // fine crops are floored to a multiple of this

    void validate() const;
};

struct TrainReport {
    std::vector<double> total_history, cycle_history, recon_history, perceptual_history;
    std::vector<double> lr_history;
    int64_t patches_accepted = 0;
    int64_t patches_rejected = 0;
    int64_t dense_views_read = 0; // data-access audit: 0 in self-supervised runs
    bool crops_shrunk = false;
    int iterations_run = 0;
    double wall_seconds = 0.0;
    std::string mode;
    uint64_t seed = 0;
};

struct PatchTriplet {
    ViewTriplet patch;
    int crop_y = 0, crop_x = 0, crop_h = 0, crop_w = 0;
    int attempts = 1;
    bool crops_shrunk = false;
};

struct ShiftSearchResult {
    int best_shift = 0;
    double best_ncc = 0.0;
    AngularAxis axis = AngularAxis::Horizontal;
};

/// Integer-shift search maximizing normalized cross-correlation between two
/// patches, over [-range, range] per axis-aligned direction (luma).
ShiftSearchResult shift_search(const Image& a, const Image& b, int range);

/// Accept iff the best shift between the outer patches reaches the threshold.
bool disparity_screen(const ViewTriplet& patch, double threshold, int range = 8);

/// Random triplet + grid-aligned coarse crop + random fine crop, retried
/// until the disparity screen accepts (or the retry budget runs out).
PatchTriplet sample_patch_triplet(const LightField& lf, AngularAxis axis, const TrainConfig& cfg,
                                  RandomSource& rng);

struct LrSchedulerState {
    double lr = 1e-3;
    double min_lr = 1e-5;
    double factor = 0.5;
    double improve_ratio = 0.01;
    bool has_prev = false;
    double prev_window_mean = 0.0;
};

/// Halve the rate when the windowed mean fails to improve by the required
/// ratio over the previous window; floored at min_lr.
double lr_schedule_step(LrSchedulerState& state, double window_mean);

struct PretrainConfig {
    ArchConfig arch{};
    int iterations = 400;
    int batch_size = 8;
    double lr = 1e-3;
    double target_loss = 0.02; // running-mean stop criterion
    int loss_window = 10;
    int patch_size = 32;
    std::vector<int> displacements = {0, 2, -2}; // even total displacement a -> b
    uint64_t seed = 0;

    void validate() const;
};

struct PretrainResult {
    InterpolatorModel<float> model;
    bool reached_target = false;
    bool warning = false; // budget exhausted (or zero budget) without reaching the target
    std::vector<double> loss_history;
};

/// Supervised stand-in for an externally pre-trained interpolator: trains on
/// procedurally generated shifted-texture pairs with known midpoints.
PretrainResult pretrain_baseline(const PretrainConfig& cfg);

struct ShiftedPair {
    Image a, b, mid;
    AngularAxis axis = AngularAxis::Horizontal;
    int displacement = 0;
};

/// One synthetic training/eval sample for pretraining (displacement even).
ShiftedPair make_shifted_pair(int size, int displacement, AngularAxis axis, RandomSource& rng);

/// Fine-tune a model on triplets from the given sparse light fields along one
/// axis. Supervised mode additionally needs the paired dense light fields.
TrainReport finetune(InterpolatorModel<float>& model, std::span<const LightField> sparse_lfs,
                     AngularAxis axis, const TrainConfig& cfg,
                     const FeatureExtractor<float>& extractor,
                     std::span<const LightField> dense_gt = {});

} // namespace lfcycle
