#include "lfcycle/trainer.hpp"

#include "lfcycle/synthgen.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

namespace lfcycle {

std::string train_mode_name(TrainMode mode) {
    switch (mode) {
    case TrainMode::SelfSupervised: return "self";
    case TrainMode::NoCycle: return "no-cycle";
    default: return "supervised";
    }
}

TrainMode train_mode_from_name(const std::string& name) {
    if (name == "self") return TrainMode::SelfSupervised;
    if (name == "no-cycle") return TrainMode::NoCycle;
    if (name == "supervised") return TrainMode::Supervised;
    throw std::invalid_argument("unknown train mode '" + name +
                                "' (expected self, no-cycle or supervised)");
}

void TrainConfig::validate() const {
    if (!(lr > 0.0)) throw std::invalid_argument("TrainConfig: lr must be > 0");
    if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
    if (iterations < 0) throw std::invalid_argument("TrainConfig: iterations must be >= 0");
    if (fine_crop > coarse_crop)
        throw std::invalid_argument("TrainConfig: fine_crop must not exceed coarse_crop");
    if (fine_crop < 1) throw std::invalid_argument("TrainConfig: fine_crop must be >= 1");
    if (disparity_threshold < 0.0)
        throw std::invalid_argument("TrainConfig: disparity_threshold must be >= 0");
    if (screen_search_range < 1)
        throw std::invalid_argument("TrainConfig: screen_search_range must be >= 1");
    if (sched_window < 1) throw std::invalid_argument("TrainConfig: sched_window must be >= 1");
    if (patch_retry_budget < 1)
        throw std::invalid_argument("TrainConfig: patch_retry_budget must be >= 1");
    if (size_divisor < 1) throw std::invalid_argument("TrainConfig: size_divisor must be >= 1");
    weights.validate();
}

namespace {

std::vector<double> to_luma(const Image& img) {
    std::vector<double> out(static_cast<size_t>(img.height) * img.width);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            out[static_cast<size_t>(y) * img.width + x] =
                (img.at(y, x, 0) + img.at(y, x, 1) + img.at(y, x, 2)) / 3.0;
    return out;
}

// NCC of a(y, x+shift) against b(y, x) over the overlap (axis-aligned shift).
double ncc_at_shift(const std::vector<double>& a, const std::vector<double>& b, int h, int w,
                    int dy, int dx) {
    const int y0 = std::max(0, -dy), y1 = h - std::max(0, dy);
    const int x0 = std::max(0, -dx), x1 = w - std::max(0, dx);
    const int n = (y1 - y0) * (x1 - x0);
    if (n < 4) return 0.0;
    double sa = 0, sb = 0;
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) {
            sa += a[static_cast<size_t>(y + dy) * w + (x + dx)];
            sb += b[static_cast<size_t>(y) * w + x];
        }
    const double ma = sa / n, mb = sb / n;
    double cov = 0, va = 0, vb = 0;
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) {
            const double da = a[static_cast<size_t>(y + dy) * w + (x + dx)] - ma;
            const double db = b[static_cast<size_t>(y) * w + x] - mb;
            cov += da * db;
            va += da * da;
            vb += db * db;
        }
    if (va <= 1e-12 || vb <= 1e-12) return 0.0;
    return cov / std::sqrt(va * vb);
}

} // namespace

ShiftSearchResult shift_search(const Image& a, const Image& b, int range) {
    if (!a.same_size(b)) throw std::invalid_argument("shift_search: patch sizes differ");
    const auto la = to_luma(a);
    const auto lb = to_luma(b);
    ShiftSearchResult best;
    best.best_ncc = -2.0;
    // visit shifts by increasing magnitude so ties resolve to the smallest
    // displacement (featureless patches then report shift 0)
    for (int mag = 0; mag <= range; ++mag)
        for (int sign = 0; sign < (mag == 0 ? 1 : 2); ++sign) {
            const int d = sign == 0 ? mag : -mag;
            for (int axis = 0; axis < 2; ++axis) {
                const double ncc = axis == 0 ? ncc_at_shift(la, lb, a.height, a.width, 0, d)
                                             : ncc_at_shift(la, lb, a.height, a.width, d, 0);
                if (ncc > best.best_ncc) {
                    best.best_ncc = ncc;
                    best.best_shift = d;
                    best.axis = axis == 0 ? AngularAxis::Horizontal : AngularAxis::Vertical;
                }
            }
        }
    return best;
}

bool disparity_screen(const ViewTriplet& patch, double threshold, int range) {
    if (threshold <= 0.0) return true;
    const auto res = shift_search(patch.left, patch.right, range);
    return std::abs(res.best_shift) >= threshold;
}

namespace {

// Offsets {0, cs, 2cs, ...} plus a tail position so the whole extent is
// reachable.
std::vector<int> grid_offsets(int extent, int crop) {
    std::vector<int> offs;
    for (int p = 0; p + crop <= extent; p += crop) offs.push_back(p);
    if (offs.empty() || offs.back() + crop < extent) offs.push_back(extent - crop);
    return offs;
}

} // namespace

PatchTriplet sample_patch_triplet(const LightField& lf, AngularAxis axis, const TrainConfig& cfg,
                                  RandomSource& rng) {
    cfg.validate();
    const int along = lf.extent(axis);
    const int other = axis == AngularAxis::Horizontal ? lf.rows : lf.cols;
    if (along < 3)
        throw std::invalid_argument("sample_patch_triplet: axis extent " + std::to_string(along) +
                                    " leaves no triplet");
    const int h = lf.view_height(), w = lf.view_width();

    int cs = cfg.coarse_crop, fs = cfg.fine_crop;
    bool shrunk = false;
    if (std::min(h, w) < cs) {
        cs = std::min({96, h, w});
        fs = std::min(fs, 64);
        shrunk = true;
    }
    if (fs > cs) fs = cs;
    if (cfg.size_divisor > 1) {
        const int floored = std::max(cfg.size_divisor, fs / cfg.size_divisor * cfg.size_divisor);
        if (floored > cs)
            throw std::invalid_argument("sample_patch_triplet: views too small for a crop divisible by " +
                                        std::to_string(cfg.size_divisor));
        if (floored != fs) shrunk = shrunk || floored < cfg.fine_crop;
        fs = floored;
    }

    const auto ys = grid_offsets(h, cs);
    const auto xs = grid_offsets(w, cs);

    PatchTriplet out;
    out.crops_shrunk = shrunk;
    for (int attempt = 1; attempt <= cfg.patch_retry_budget; ++attempt) {
        const int o = rng.uniform_int(0, other - 1);
        const int i = rng.uniform_int(1, along - 2);
        const int cy = ys[rng.uniform_int(0, static_cast<int>(ys.size()) - 1)];
        const int cx = xs[rng.uniform_int(0, static_cast<int>(xs.size()) - 1)];
        const int fy = cy + rng.uniform_int(0, cs - fs);
        const int fx = cx + rng.uniform_int(0, cs - fs);

        ViewTriplet tr;
        tr.axis = axis;
        if (axis == AngularAxis::Horizontal) {
            tr.left = crop_image(lf.view(o, i - 1), fy, fx, fs, fs);
            tr.center = crop_image(lf.view(o, i), fy, fx, fs, fs);
            tr.right = crop_image(lf.view(o, i + 1), fy, fx, fs, fs);
            tr.center_t = o;
            tr.center_s = i;
        } else {
            tr.left = crop_image(lf.view(i - 1, o), fy, fx, fs, fs);
            tr.center = crop_image(lf.view(i, o), fy, fx, fs, fs);
            tr.right = crop_image(lf.view(i + 1, o), fy, fx, fs, fs);
            tr.center_t = i;
            tr.center_s = o;
        }
        out.attempts = attempt;
        if (disparity_screen(tr, cfg.disparity_threshold, cfg.screen_search_range)) {
            out.patch = std::move(tr);
            out.crop_y = fy;
            out.crop_x = fx;
            out.crop_h = fs;
            out.crop_w = fs;
            return out;
        }
    }
    throw std::runtime_error("sample_patch_triplet: no patch passed the disparity screen "
                             "(threshold " + std::to_string(cfg.disparity_threshold) + ") after " +
                             std::to_string(cfg.patch_retry_budget) + " attempts");
}

double lr_schedule_step(LrSchedulerState& state, double window_mean) {
    if (state.has_prev) {
        const double required = state.prev_window_mean * (1.0 - state.improve_ratio);
        if (!(window_mean <= required)) state.lr = std::max(state.min_lr, state.lr * state.factor);
    }
    state.prev_window_mean = window_mean;
    state.has_prev = true;
    return state.lr;
}

void PretrainConfig::validate() const {
    arch.validate();
    if (iterations < 0) throw std::invalid_argument("PretrainConfig: iterations must be >= 0");
    if (batch_size < 1) throw std::invalid_argument("PretrainConfig: batch_size must be >= 1");
    if (!(lr > 0.0)) throw std::invalid_argument("PretrainConfig: lr must be > 0");
    if (patch_size < (1 << arch.levels) || patch_size % (1 << arch.levels) != 0)
        throw std::invalid_argument("PretrainConfig: patch_size must be a positive multiple of " +
                                    std::to_string(1 << arch.levels));
    if (displacements.empty())
        throw std::invalid_argument("PretrainConfig: displacement set is empty");
    for (int d : displacements)
        if (d % 2 != 0)
            throw std::invalid_argument("PretrainConfig: displacements must be even, got " +
                                        std::to_string(d));
}

ShiftedPair make_shifted_pair(int size, int displacement, AngularAxis axis, RandomSource& rng) {
    if (displacement % 2 != 0)
        throw std::invalid_argument("make_shifted_pair: displacement must be even");
    const int half = std::abs(displacement) / 2;
    const int margin = half + 2;
    RandomSource tex_rng = rng.fork(0x74657874ull);
    Image canvas = noise_texture(size + 2 * margin, size + 2 * margin, tex_rng);
    const int dy = axis == AngularAxis::Vertical ? displacement / 2 : 0;
    const int dx = axis == AngularAxis::Horizontal ? displacement / 2 : 0;
    ShiftedPair out;
    out.axis = axis;
    out.displacement = displacement;
    out.a = crop_image(canvas, margin - dy, margin - dx, size, size);
    out.b = crop_image(canvas, margin + dy, margin + dx, size, size);
    out.mid = crop_image(canvas, margin, margin, size, size);
    return out;
}

PretrainResult pretrain_baseline(const PretrainConfig& cfg) {
    cfg.validate();
    PretrainResult res;
    res.model = InterpolatorModel<float>(cfg.arch, AxisTag::Generic, cfg.seed);
    if (cfg.iterations == 0) {
        res.warning = true;
        return res;
    }
    RandomSource rng(splitmix64(cfg.seed ^ 0x70726574ull)); // "pret"
    ad::AdamState<float> opt;
    ad::AdamConfig<float> opt_cfg;
    opt_cfg.lr = static_cast<float>(cfg.lr);
    auto& params = res.model.parameters();

    for (int it = 0; it < cfg.iterations; ++it) {
        res.model.zero_grad();
        double batch_loss = 0.0;
        for (int b = 0; b < cfg.batch_size; ++b) {
            const int disp = cfg.displacements[rng.uniform_int(
                0, static_cast<int>(cfg.displacements.size()) - 1)];
            const AngularAxis axis =
                rng.uniform_int(0, 1) == 0 ? AngularAxis::Horizontal : AngularAxis::Vertical;
            ShiftedPair pair = make_shifted_pair(cfg.patch_size, disp, axis, rng);
            auto pred = res.model.interpolate_t(image_to_tensor<float>(pair.a),
                                                image_to_tensor<float>(pair.b));
            auto loss = l1_mean(pred, image_to_tensor<float>(pair.mid));
            batch_loss += loss.item();
            ad::backward(ad::scale(loss, 1.0f / static_cast<float>(cfg.batch_size)));
        }
        batch_loss /= cfg.batch_size;
        if (!std::isfinite(batch_loss))
            throw std::runtime_error("pretrain_baseline: non-finite loss at iteration " +
                                     std::to_string(it));
        ad::adam_step(params, opt, opt_cfg);
        res.loss_history.push_back(batch_loss);
        if (static_cast<int>(res.loss_history.size()) >= cfg.loss_window) {
            const auto tail = res.loss_history.end() - cfg.loss_window;
            const double mean_tail =
                std::accumulate(tail, res.loss_history.end(), 0.0) / cfg.loss_window;
            if (mean_tail < cfg.target_loss) {
                res.reached_target = true;
                break;
            }
        }
    }
    res.warning = !res.reached_target;
    return res;
}

TrainReport finetune(InterpolatorModel<float>& model, std::span<const LightField> sparse_lfs,
                     AngularAxis axis, const TrainConfig& cfg,
                     const FeatureExtractor<float>& extractor,
                     std::span<const LightField> dense_gt) {
    const auto t_start = std::chrono::steady_clock::now();
    TrainConfig run_cfg = cfg;
    run_cfg.size_divisor = 1 << model.config().levels;
    run_cfg.validate();
    if (sparse_lfs.empty()) throw std::invalid_argument("finetune: no light fields given");
    for (size_t i = 0; i < sparse_lfs.size(); ++i) {
        if (sparse_lfs[i].extent(axis) < 3)
            throw std::invalid_argument("finetune: light field " + std::to_string(i) +
                                        " has fewer than 3 views along the training axis "
                                        "(empty triplet set)");
    }

    const double wc = run_cfg.weights.lambda_c, wr = run_cfg.weights.lambda_r,
                 wp = run_cfg.weights.lambda_p;
    if (run_cfg.mode == TrainMode::NoCycle && wr == 0.0)
        throw std::invalid_argument("finetune: no-cycle mode with lambda_r = 0 makes the "
                                    "objective identically zero");
    if (run_cfg.mode == TrainMode::SelfSupervised && wc == 0.0 && wr == 0.0 && wp == 0.0)
        throw std::invalid_argument("finetune: all loss weights are zero");
    if (run_cfg.mode == TrainMode::Supervised) {
        if (dense_gt.size() != sparse_lfs.size())
            throw std::invalid_argument("finetune: supervised mode needs one dense ground-truth "
                                        "light field per sparse input");
        for (size_t i = 0; i < sparse_lfs.size(); ++i) {
            const int a = sparse_lfs[i].alpha;
            if (sparse_lfs[i].provenance != Provenance::Sparse || a < 2 || a % 2 != 0)
                throw std::invalid_argument("finetune: supervised mode needs sparse(alpha) inputs "
                                            "with even alpha");
            if (dense_gt[i].rows != a * (sparse_lfs[i].rows - 1) + 1 ||
                dense_gt[i].cols != a * (sparse_lfs[i].cols - 1) + 1 ||
                dense_gt[i].view_height() != sparse_lfs[i].view_height() ||
                dense_gt[i].view_width() != sparse_lfs[i].view_width())
                throw std::invalid_argument("finetune: dense ground truth " + std::to_string(i) +
                                            " does not match its sparse input");
        }
    }
    if (run_cfg.mode != TrainMode::Supervised && !dense_gt.empty())
        throw std::invalid_argument("finetune: dense ground truth given in a self-supervised mode");

    TrainReport report;
    report.mode = train_mode_name(run_cfg.mode);
    report.seed = run_cfg.seed;

    RandomSource rng(splitmix64(run_cfg.seed ^ 0x66696e65ull)); // "fine"
    ad::AdamState<float> opt;
    ad::AdamConfig<float> opt_cfg;
    LrSchedulerState sched;
    sched.lr = run_cfg.lr;
    sched.min_lr = run_cfg.min_lr;
    sched.factor = run_cfg.sched_factor;
    sched.improve_ratio = run_cfg.sched_improve;

    auto& params = model.parameters();
    const float inv_batch = 1.0f / static_cast<float>(run_cfg.batch_size);

    for (int it = 0; it < run_cfg.iterations; ++it) {
        model.zero_grad();
        double sum_total = 0.0, sum_c = 0.0, sum_r = 0.0, sum_p = 0.0;
        for (int b = 0; b < run_cfg.batch_size; ++b) {
            const int lf_idx = rng.uniform_int(0, static_cast<int>(sparse_lfs.size()) - 1);
            PatchTriplet pt = sample_patch_triplet(sparse_lfs[lf_idx], axis, run_cfg, rng);
            report.patches_accepted += 1;
            report.patches_rejected += pt.attempts - 1;
            report.crops_shrunk = report.crops_shrunk || pt.crops_shrunk;

            ad::Tensor<float> objective;
            if (run_cfg.mode == TrainMode::Supervised) {
                const LightField& gt = dense_gt[lf_idx];
                const int a = sparse_lfs[lf_idx].alpha;
                const int ct = pt.patch.center_t, cs = pt.patch.center_s;
                int lt, ls, rt, rs;
                if (axis == AngularAxis::Horizontal) {
                    lt = a * ct; ls = a * cs - a / 2;
                    rt = a * ct; rs = a * cs + a / 2;
                } else {
                    lt = a * ct - a / 2; ls = a * cs;
                    rt = a * ct + a / 2; rs = a * cs;
                }
                Image gt_l = crop_image(gt.view(lt, ls), pt.crop_y, pt.crop_x, pt.crop_h, pt.crop_w);
                Image gt_r = crop_image(gt.view(rt, rs), pt.crop_y, pt.crop_x, pt.crop_h, pt.crop_w);
                report.dense_views_read += 2;
                objective = supervised_loss(pt.patch, gt_l, gt_r, model);
                sum_total += objective.item();
            } else if (run_cfg.mode == TrainMode::NoCycle) {
                auto lr_loss = reconstruction_loss(pt.patch, model);
                sum_r += lr_loss.item();
                objective = ad::scale(lr_loss, static_cast<float>(wr));
                sum_total += objective.item();
            } else {
                auto center = image_to_tensor<float>(pt.patch.center);
                auto cyc = cycle_reconstruct_t(pt.patch, model);
                auto lc = l1_mean(cyc, center);
                auto lr_loss = reconstruction_loss(pt.patch, model);
                auto lp = perceptual_loss(cyc, center, extractor);
                sum_c += lc.item();
                sum_r += lr_loss.item();
                sum_p += lp.item();
                objective = total_objective(lc, lr_loss, lp, run_cfg.weights);
                sum_total += objective.item();
            }
            ad::backward(ad::scale(objective, inv_batch));
        }
        const double mean_total = sum_total / run_cfg.batch_size;
        if (!std::isfinite(mean_total))
            throw std::runtime_error("finetune: non-finite objective at iteration " +
                                     std::to_string(it) + " (mode " + report.mode + ")");
        opt_cfg.lr = static_cast<float>(sched.lr);
        ad::adam_step(params, opt, opt_cfg);

        report.total_history.push_back(mean_total);
        report.cycle_history.push_back(sum_c / run_cfg.batch_size);
        report.recon_history.push_back(sum_r / run_cfg.batch_size);
        report.perceptual_history.push_back(sum_p / run_cfg.batch_size);
        report.lr_history.push_back(sched.lr);
        report.iterations_run += 1;

        if ((it + 1) % run_cfg.sched_window == 0) {
            const auto first = report.total_history.end() - run_cfg.sched_window;
            const double wmean =
                std::accumulate(first, report.total_history.end(), 0.0) / run_cfg.sched_window;
            lr_schedule_step(sched, wmean);
        }
    }

    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return report;
}

} // namespace lfcycle
