// Acceptance suite: one pass/fail line per criterion, nonzero exit on failure.

#include "lfcycle/cli.hpp"
#include "lfcycle/io.hpp"
#include "lfcycle/metrics.hpp"
#include "lfcycle/reconstructor.hpp"
#include "lfcycle/synthgen.hpp"
#include "lfcycle/trainer.hpp"
#include "op_grad_suite.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

using namespace lfcycle;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int g_failures = 0;

class Criterion {
public:
    Criterion(int id, std::string title) : id_(id), title_(std::move(title)) {
        start_ = std::chrono::steady_clock::now();
    }

    void expect(bool cond, const std::string& what) {
        if (!cond) {
            ok_ = false;
            if (!fail_detail_.empty()) fail_detail_ += "; ";
            fail_detail_ += what;
        }
    }

    void note(const std::string& detail) {
        if (!notes_.empty()) notes_ += ", ";
        notes_ += detail;
    }

    double elapsed() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

    void finish() {
        std::ostringstream line;
        line << (ok_ ? "[PASS]" : "[FAIL]") << " criterion " << id_ << ": " << title_;
        if (!notes_.empty()) line << " (" << notes_ << ")";
        if (!ok_) line << " -- " << fail_detail_;
        std::cout << line.str() << std::endl;
        if (!ok_) ++g_failures;
    }

private:
    int id_;
    std::string title_;
    bool ok_ = true;
    std::string fail_detail_;
    std::string notes_;
    std::chrono::steady_clock::time_point start_;
};

template <typename Body>
void run_criterion(int id, const std::string& title, Body&& body) {
    Criterion c(id, title);
    try {
        body(c);
    } catch (const std::exception& e) {
        c.expect(false, std::string("exception: ") + e.what());
    }
    c.finish();
}

SceneSpec planar_spec(int rows, int cols, int size, double d, uint64_t seed) {
    SceneSpec spec;
    spec.rows = rows;
    spec.cols = cols;
    spec.view_height = size;
    spec.view_width = size;
    spec.disparity = d;
    spec.seed = seed;
    return spec;
}

bool interior_bits_equal(const Image& a, const Image& b, int margin) {
    for (int y = margin; y < a.height - margin; ++y)
        for (int x = margin; x < a.width - margin; ++x)
            for (int c = 0; c < 3; ++c)
                if (a.at(y, x, c) != b.at(y, x, c)) return false;
    return true;
}

double window_mean(const std::vector<double>& h, bool last, size_t w = 25) {
    w = std::min(w, h.size());
    double acc = 0.0;
    for (size_t i = 0; i < w; ++i) acc += last ? h[h.size() - 1 - i] : h[i];
    return acc / static_cast<double>(w);
}

double mean_synth_psnr(const InterpolatorModel<float>& h, const InterpolatorModel<float>& v,
                       const std::vector<LightField>& sparse,
                       const std::vector<LightField>& dense) {
    LearnedInterpolator ih(h), iv(v);
    ReconstructionPlan plan;
    plan.horizontal = &ih;
    plan.vertical = &iv;
    double acc = 0.0;
    for (size_t i = 0; i < sparse.size(); ++i)
        acc += evaluate(reconstruct(sparse[i], plan), dense[i], 2).mean_psnr_db;
    return acc / static_cast<double>(sparse.size());
}

uint64_t fnv1a(const std::vector<char>& bytes) {
    uint64_t h = 1469598103934665603ull;
    for (char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h;
}

std::vector<char> read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    return std::vector<char>(std::istreambuf_iterator<char>(in), {});
}

struct TempTree {
    fs::path path;
    explicit TempTree(const std::string& tag) {
        path = fs::temp_directory_path() / ("lfcycle_accept_" + tag);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempTree() { fs::remove_all(path); }
};

void criterion1(Criterion& c) {
    for (const auto& [name, err] : test::run_op_grad_suite()) {
        c.expect(err < 1e-5, "op " + name + " rel err " + std::to_string(err));
    }

    ArchConfig tiny{1, {8}, 3};
    InterpolatorModel<double> model(tiny, AxisTag::Generic, 73);
    RandomSource rng(74);
    auto rand_img = [&](uint64_t stream) {
        RandomSource r = rng.fork(stream);
        Image img(8, 8);
        for (auto& v : img.data) v = static_cast<float>(r.uniform(0.05, 0.95));
        return img;
    };
    ViewTriplet tr;
    tr.left = rand_img(1);
    tr.center = rand_img(2);
    tr.right = rand_img(3);
    Image g1 = rand_img(4), g2 = rand_img(5);
    auto ex = FeatureExtractor<double>::make_default();

    std::vector<test::DTensor> leaves;
    for (auto& p : model.parameters()) leaves.push_back(p);
    const double ec = test::max_grad_rel_error(leaves, [&] { return cycle_loss(tr, model); },
                                               1e-6, 12);
    const double er = test::max_grad_rel_error(
        leaves, [&] { return reconstruction_loss(tr, model); }, 1e-6, 12);
    const double es = test::max_grad_rel_error(
        leaves, [&] { return supervised_loss(tr, g1, g2, model); }, 1e-6, 12);
    auto xa = image_to_tensor<double>(rand_img(6));
    auto xb = image_to_tensor<double>(rand_img(7));
    xa.set_requires_grad(true);
    xb.set_requires_grad(true);
    const double ep = test::max_grad_rel_error({xa, xb},
                                               [&] { return perceptual_loss(xa, xb, ex); });
    c.expect(ec < 1e-4, "cycle loss rel err " + std::to_string(ec));
    c.expect(er < 1e-4, "reconstruction loss rel err " + std::to_string(er));
    c.expect(es < 1e-4, "supervised loss rel err " + std::to_string(es));
    c.expect(ep < 1e-4, "perceptual loss rel err " + std::to_string(ep));

    const double secs = c.elapsed();
    c.expect(secs < 60.0, "runtime " + std::to_string(secs) + " s");
    c.note("all ops + 4 losses, " + std::to_string(secs).substr(0, 4) + " s");
}

void criterion2(Criterion& c) {
    auto dense = gen_planar_lf(planar_spec(9, 9, 128, 2.0, 20260810));
    auto sparse = subsample(dense, 2);
    TranslationOracle oh(AngularAxis::Horizontal, 4); // sparse neighbors: 2 steps x d=2
    TranslationOracle ov(AngularAxis::Vertical, 4);
    ReconstructionPlan plan;
    plan.horizontal = &oh;
    plan.vertical = &ov;
    auto recon = reconstruct(sparse, plan);
    c.expect(recon.rows == 9 && recon.cols == 9, "unexpected extents");
    int bad = 0;
    for (int t = 0; t < 9; ++t)
        for (int s = 0; s < 9; ++s)
            if (!interior_bits_equal(recon.view(t, s), dense.view(t, s), 2)) ++bad;
    c.expect(bad == 0, std::to_string(bad) + " views differ on the interior");

    auto rep = evaluate(recon, dense, 2, 2);
    c.expect(rep.views.size() == 56, "expected 56 synthesized views");
    int not_inf = 0;
    for (const auto& v : rep.views)
        if (!std::isinf(v.psnr_db)) ++not_inf;
    c.expect(not_inf == 0, std::to_string(not_inf) + " views below the PSNR sentinel");

    const double secs = c.elapsed();
    c.expect(secs < 30.0, "runtime " + std::to_string(secs) + " s");
    c.note("56 views bit-exact at margin 2, " + std::to_string(secs).substr(0, 4) + " s");
}

void criterion3(Criterion& c) {
    auto dense = gen_planar_lf(planar_spec(9, 9, 96, 2.0, 77));
    auto sparse = subsample(dense, 2);
    TranslationOracle oh(AngularAxis::Horizontal, 4);
    TranslationOracle ov(AngularAxis::Vertical, 4);
    double worst_cycle = 0.0, worst_recon = 0.0;
    for (auto axis : {AngularAxis::Horizontal, AngularAxis::Vertical}) {
        const auto& oracle = axis == AngularAxis::Horizontal
                                 ? static_cast<const PairInterpolator&>(oh)
                                 : static_cast<const PairInterpolator&>(ov);
        for (const auto& tr : extract_triplets(sparse, axis).triplets) {
            worst_cycle = std::max(worst_cycle, cycle_loss_value(tr, oracle, 8));
            worst_recon = std::max(worst_recon, reconstruction_loss_value(tr, oracle, 8));
        }
    }
    c.expect(worst_cycle <= 1e-6, "cycle loss " + std::to_string(worst_cycle));
    c.expect(worst_recon <= 1e-6, "reconstruction loss " + std::to_string(worst_recon));
    c.note("worst cycle " + std::to_string(worst_cycle) + ", worst recon " +
           std::to_string(worst_recon));
}

void criterion4(Criterion& c) {
    PretrainConfig pc;
    pc.arch = ArchConfig{2, {8, 16}, 9};
    pc.iterations = 60;
    pc.batch_size = 8;
    pc.patch_size = 32;
    pc.seed = 11;
    auto base = pretrain_baseline(pc);
    c.expect(!base.warning, "pretraining missed its target loss");

    std::vector<LightField> dense = {gen_planar_lf(planar_spec(9, 9, 96, 1.0, 21)),
                                     gen_planar_lf(planar_spec(9, 9, 96, 2.0, 22))};
    std::vector<LightField> sparse = {subsample(dense[0], 2), subsample(dense[1], 2)};

    auto bh = base.model.clone();
    bh.set_axis(AxisTag::Horizontal);
    auto bv = base.model.clone();
    bv.set_axis(AxisTag::Vertical);
    const double base_psnr = mean_synth_psnr(bh, bv, sparse, dense);

    auto ex = FeatureExtractor<float>::make_default();
    TrainConfig tc;
    tc.iterations = 300;
    tc.batch_size = 8;
    tc.fine_crop = 32;
    tc.coarse_crop = 96;
    tc.sched_window = 50;
    tc.seed = 31;
    auto th = base.model.clone();
    th.set_axis(AxisTag::Horizontal);
    auto tv = base.model.clone();
    tv.set_axis(AxisTag::Vertical);
    auto rh = finetune(th, sparse, AngularAxis::Horizontal, tc, ex);
    auto rv = finetune(tv, sparse, AngularAxis::Vertical, tc, ex);

    c.expect(rh.dense_views_read == 0 && rv.dense_views_read == 0,
             "self-supervised run touched dense views");

    const double tuned_psnr = mean_synth_psnr(th, tv, sparse, dense);
    const double gain = tuned_psnr - base_psnr;
    c.expect(gain >= 3.0, "PSNR gain " + std::to_string(gain) + " dB < 3");

    const double ratio_h = window_mean(rh.total_history, true) / window_mean(rh.total_history, false);
    const double ratio_v = window_mean(rv.total_history, true) / window_mean(rv.total_history, false);
    c.expect(ratio_h <= 0.5, "H objective ratio " + std::to_string(ratio_h));
    c.expect(ratio_v <= 0.5, "V objective ratio " + std::to_string(ratio_v));

    // fine-tuned M approaches the exact half-shift oracle on an even-disparity pair
    TranslationOracle oracle(AngularAxis::Horizontal, 4);
    const auto& lf2 = sparse[1];
    const double mae = mean_abs_diff(th.interpolate(lf2.view(2, 1), lf2.view(2, 2)),
                                     oracle.interpolate(lf2.view(2, 1), lf2.view(2, 2)),
                                     pc.arch.kernel_size / 2 + 2);
    c.expect(mae <= 0.02, "oracle MAE " + std::to_string(mae));

    const double secs = c.elapsed();
    c.expect(secs < 600.0, "runtime " + std::to_string(secs) + " s");

    std::ostringstream note;
    note << "PSNR " << base_psnr << " -> " << tuned_psnr << " dB (+" << gain << "), objective x"
         << ratio_h << "/" << ratio_v << ", oracle MAE " << mae << ", "
         << static_cast<int>(secs) << " s";
    c.note(note.str());
}

void criterion5(Criterion& c) {
    TempTree tmp("ablate");
    const fs::path dense_dir = tmp.path / "dense";
    io::save_lf(gen_planar_lf(planar_spec(9, 9, 96, 1.0, 55)), dense_dir);
    const fs::path report = tmp.path / "ablate.json";
    const int rc = run_cli({"ablate", "--dense", dense_dir.string(), "--alpha", "2", "--workdir",
                            (tmp.path / "work").string(), "--report", report.string(), "--iters",
                            "60", "--pretrain-iters", "60", "--seed", "9"});
    c.expect(rc == 0, "ablate exited with " + std::to_string(rc));
    if (rc != 0) return;

    json merged;
    std::ifstream(report) >> merged;
    const char* names[5] = {"pretrained", "supervised", "no_cycle", "vh", "full"};
    ArchConfig arch;
    bool have_arch = false;
    for (const char* name : names) {
        c.expect(merged.at("modes").contains(name), std::string("missing mode ") + name);
        // the five modes' checkpoints are mutually loadable with one architecture
        auto lm = io::load_model(merged.at("modes").at(name).at("checkpoint_h").get<std::string>());
        if (!have_arch) {
            arch = lm.model.config();
            have_arch = true;
        } else {
            c.expect(lm.model.config() == arch, std::string(name) + " architecture differs");
        }
    }
    const double pre = merged.at("modes").at("pretrained").at("mean_psnr_db").get<double>();
    const double sup = merged.at("modes").at("supervised").at("mean_psnr_db").get<double>();
    c.expect(sup >= pre, "supervised " + std::to_string(sup) + " dB < pretrained " +
                             std::to_string(pre) + " dB");
    std::ostringstream note;
    note << "pretrained " << pre << " dB, supervised " << sup << " dB, "
         << static_cast<int>(c.elapsed()) << " s";
    c.note(note.str());
}

void criterion6(Criterion& c) {
    for (int n : {2, 3, 5})
        for (int alpha : {2, 4})
            c.expect(dense_angular_size(n, alpha) == alpha * (n - 1) + 1, "size law failed");

    TranslationOracle oh(AngularAxis::Horizontal, 0), ov(AngularAxis::Vertical, 0);
    for (int n : {2, 3, 5})
        for (int alpha : {2, 4}) {
            auto lf = gen_planar_lf(planar_spec(n, n, 16, 0.5, 60 + n));
            ReconstructionPlan plan;
            plan.alpha = alpha;
            plan.horizontal = &oh;
            plan.vertical = &ov;
            auto out = multistep_reconstruct(lf, plan);
            const int want = alpha * (n - 1) + 1;
            c.expect(out.rows == want && out.cols == want,
                     "extents for n=" + std::to_string(n) + " alpha=" + std::to_string(alpha));
            bool preserved = true;
            for (int t = 0; t < n; ++t)
                for (int s = 0; s < n; ++s)
                    preserved = preserved &&
                                image_bits_equal(out.view(alpha * t, alpha * s), lf.view(t, s));
            c.expect(preserved, "originals not bit-exact for n=" + std::to_string(n) +
                                    " alpha=" + std::to_string(alpha));
        }

    auto gt = gen_planar_lf(planar_spec(9, 9, 16, 0.5, 66));
    c.expect(evaluate(gt, gt, 2).views.size() == 56, "expected 56 records at alpha 2");
    c.expect(evaluate(gt, gt, 4).views.size() == 72, "expected 72 records at alpha 4");
    c.note("N = alpha(n-1)+1 over n in {2,3,5}, alpha in {2,4}; 56/72 records");
}

void criterion7(Criterion& c) {
    Image a(32, 32), b(32, 32);
    for (auto& v : a.data) v = 100.0f / 255.0f;
    for (auto& v : b.data) v = 101.0f / 255.0f;
    const double p = psnr(a, b);
    c.expect(std::fabs(p - 48.1308) <= 0.01, "offset PSNR " + std::to_string(p));

    RandomSource rng(70);
    Image r(16, 16);
    for (auto& v : r.data) v = static_cast<float>(rng.uniform());
    c.expect(std::fabs(ssim(r, r) - 1.0) <= 1e-12, "SSIM identity");

    Image c0(16, 16), c1(16, 16);
    std::fill(c1.data.begin(), c1.data.end(), 1.0f);
    const double c1_const = 1e-4;
    c.expect(std::fabs(ssim(c0, c1) - c1_const / (1.0 + c1_const)) <= 1e-9,
             "SSIM constant closed form");

    auto gt = gen_planar_lf(planar_spec(5, 5, 24, 1.0, 71));
    LightField noisy = gt;
    for (auto& v : noisy.views)
        for (auto& px : v.data)
            px = std::clamp(px + static_cast<float>(rng.uniform(-0.02, 0.02)), 0.0f, 1.0f);
    auto rep = evaluate(noisy, gt, 2, 0, "agg");
    double pacc = 0.0, sacc = 0.0;
    for (const auto& v : rep.views) {
        pacc += std::min(v.psnr_db, kPsnrCap);
        sacc += v.ssim;
    }
    c.expect(rep.mean_psnr_db == pacc / rep.views.size(), "mean PSNR aggregate mismatch");
    c.expect(rep.mean_ssim == sacc / rep.views.size(), "mean SSIM aggregate mismatch");
    c.note("48.13 dB offset case, SSIM identity/constant, aggregates exact");
}

void criterion8(Criterion& c) {
    TempTree tmp("repro");
    // both runs use identical absolute paths so the artifacts are directly
    // comparable byte for byte
    auto pipeline = [&]() {
        const fs::path root = tmp.path / "run";
        fs::remove_all(root);
        fs::create_directories(root);
        auto p = [&](const std::string& s) { return (root / s).string(); };
        std::vector<std::vector<std::string>> cmds = {
            {"gen", "--scene", "planar", "--disparity", "1", "--grid", "5x5", "--size", "32x32",
             "--seed", "3", "--out", p("D")},
            {"subsample", "--in", p("D"), "--alpha", "2", "--out", p("S")},
            {"pretrain", "--out", p("base.ckpt"), "--iters", "6", "--seed", "1", "--levels", "1",
             "--widths", "8", "--kernel-size", "3", "--patch", "16", "--batch", "2"},
            {"finetune", "--in", p("S"), "--baseline", p("base.ckpt"), "--axis", "h", "--out",
             p("mh.ckpt"), "--iters", "5", "--batch", "2", "--fine-crop", "16", "--coarse-crop",
             "16", "--seed", "5"},
            {"finetune", "--in", p("S"), "--baseline", p("base.ckpt"), "--axis", "v", "--out",
             p("mv.ckpt"), "--iters", "5", "--batch", "2", "--fine-crop", "16", "--coarse-crop",
             "16", "--seed", "5"},
            {"synthesize", "--in", p("S"), "--alpha", "2", "--model-h", p("mh.ckpt"), "--model-v",
             p("mv.ckpt"), "--order", "hv", "--out", p("R")},
            {"evaluate", "--recon", p("R"), "--gt", p("D"), "--alpha", "2", "--report",
             p("report.json")},
        };
        for (auto& cmd : cmds)
            if (run_cli(cmd) != 0) throw std::runtime_error("pipeline step failed: " + cmd[0]);
        return read_bytes(root / "report.json");
    };
    auto b1 = pipeline();
    auto b2 = pipeline();
    c.expect(b1 == b2, "report JSON differs between identical runs");
    std::ostringstream note;
    note << "report hash " << std::hex << fnv1a(b1) << std::dec
         << (b1 == b2 ? " (both runs)" : "") << ", " << static_cast<int>(c.elapsed()) << " s";
    c.note(note.str());
}

} // namespace

int main() {
    std::cout << "lfcycle acceptance suite\n";
    const auto t0 = std::chrono::steady_clock::now();
    run_criterion(1, "gradient suite (finite differences, 64-bit)", criterion1);
    run_criterion(2, "oracle end-to-end reconstruction", criterion2);
    run_criterion(3, "cycle-consistency exactness with the oracle", criterion3);
    run_criterion(4, "self-supervised fine-tuning improves held-out views", criterion4);
    run_criterion(5, "ablation harness parity", criterion5);
    run_criterion(6, "structure laws", criterion6);
    run_criterion(7, "metric oracles", criterion7);
    run_criterion(8, "end-to-end CLI reproducibility", criterion8);
    const double total =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << (g_failures == 0 ? "ALL CRITERIA PASSED" : "FAILURES: " + std::to_string(g_failures))
              << " (total " << static_cast<int>(total) << " s)\n";
    return g_failures == 0 ? 0 : 1;
}
