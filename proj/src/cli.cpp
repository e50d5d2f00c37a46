#include "lfcycle/cli.hpp"

#include "lfcycle/io.hpp"
#include "lfcycle/metrics.hpp"
#include "lfcycle/reconstructor.hpp"
#include "lfcycle/synthgen.hpp"
#include "lfcycle/trainer.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <iostream>

namespace lfcycle {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::pair<int, int> parse_pair(const std::string& text, const char* what) {
    const auto pos = text.find('x');
    if (pos == std::string::npos || pos == 0 || pos + 1 >= text.size())
        throw CLI::ValidationError(std::string(what) + " must look like 9x9, got '" + text + "'");
    try {
        return {std::stoi(text.substr(0, pos)), std::stoi(text.substr(pos + 1))};
    } catch (const std::exception&) {
        throw CLI::ValidationError(std::string(what) + " must look like 9x9, got '" + text + "'");
    }
}

std::vector<std::string> split_commas(const std::string& text) {
    std::vector<std::string> out;
    size_t start = 0;
    while (start <= text.size()) {
        const size_t pos = text.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(text.substr(start));
            break;
        }
        out.push_back(text.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

AngularAxis parse_axis(const std::string& a) {
    if (a == "h") return AngularAxis::Horizontal;
    if (a == "v") return AngularAxis::Vertical;
    throw CLI::ValidationError("--axis must be h or v, got '" + a + "'");
}

struct GenArgs {
    std::string scene = "planar";
    double disparity = 0.0;
    double fg_disparity = 0.0;
    std::string mask_path;
    std::string grid = "9x9";
    std::string size = "128x128";
    std::string texture = "noise";
    uint64_t seed = 0;
    std::string out;
};

int cmd_gen(const GenArgs& a) {
    SceneSpec spec;
    auto [rows, cols] = parse_pair(a.grid, "--grid");
    auto [sw, sh] = parse_pair(a.size, "--size"); // WxH
    spec.rows = rows;
    spec.cols = cols;
    spec.view_width = sw;
    spec.view_height = sh;
    spec.disparity = a.disparity;
    spec.seed = a.seed;
    if (a.texture == "noise") {
        spec.texture = TextureKind::Noise;
    } else if (a.texture == "checker") {
        spec.texture = TextureKind::Checker;
    } else {
        spec.texture = TextureKind::Imported;
        spec.imported = io::load_png(a.texture);
    }
    LightField lf;
    if (a.scene == "planar") {
        lf = gen_planar_lf(spec);
    } else if (a.scene == "two-layer") {
        if (a.mask_path.empty())
            throw CLI::ValidationError("gen --scene two-layer requires --mask and --fg-disparity");
        spec.layers = 2;
        spec.fg_disparity = a.fg_disparity;
        spec.fg_mask = io::load_png(a.mask_path);
        lf = gen_two_layer_lf(spec);
    } else {
        throw CLI::ValidationError("--scene must be planar or two-layer, got '" + a.scene + "'");
    }
    json gen_meta = {{"generator",
                      {{"scene", a.scene},
                       {"disparity", a.disparity},
                       {"fg_disparity", a.fg_disparity},
                       {"texture", a.texture},
                       {"seed", a.seed}}}};
    io::save_lf(lf, a.out, gen_meta.dump());
    std::cout << "gen: wrote " << lf.rows << "x" << lf.cols << " light field to " << a.out << "\n";
    return 0;
}

struct ArchArgs {
    int levels = 3;
    std::string widths = "16,32,64";
    int kernel_size = 13;

    ArchConfig to_config() const {
        ArchConfig cfg;
        cfg.levels = levels;
        cfg.widths.clear();
        for (const auto& w : split_commas(widths)) cfg.widths.push_back(std::stoi(w));
        cfg.kernel_size = kernel_size;
        cfg.validate();
        return cfg;
    }
};

void add_arch_flags(CLI::App* app, ArchArgs& a) {
    app->add_option("--levels", a.levels, "encoder levels");
    app->add_option("--widths", a.widths, "comma-separated channel widths per level");
    app->add_option("--kernel-size", a.kernel_size, "separable kernel length K (odd)");
}

struct PretrainArgs {
    std::string out;
    int iters = 400;
    uint64_t seed = 0;
    ArchArgs arch;
    int patch = 32;
    int batch = 8;
    double lr = 1e-3;
    double target = 0.02;
    std::string displacements = "0,2,-2";
};

int cmd_pretrain(const PretrainArgs& a) {
    PretrainConfig cfg;
    cfg.arch = a.arch.to_config();
    cfg.iterations = a.iters;
    cfg.seed = a.seed;
    cfg.patch_size = a.patch;
    cfg.batch_size = a.batch;
    cfg.lr = a.lr;
    cfg.target_loss = a.target;
    cfg.displacements.clear();
    for (const auto& d : split_commas(a.displacements)) cfg.displacements.push_back(std::stoi(d));
    PretrainResult res = pretrain_baseline(cfg);
    io::save_model(res.model, a.out, "baseline", a.seed, res.warning);
    std::cout << "pretrain: " << res.loss_history.size() << " iterations, final loss "
              << (res.loss_history.empty() ? 0.0 : res.loss_history.back())
              << (res.warning ? " (warning: target not reached)" : "") << ", wrote " << a.out
              << "\n";
    return 0;
}

struct FinetuneArgs {
    std::string in_dirs;
    std::string baseline;
    std::string axis = "h";
    std::string out;
    int iters = 500;
    double lr = 1e-3;
    int batch = 8;
    std::string mode = "self";
    std::string gt_dirs;
    double lambda_c = 1.0, lambda_r = 1.0, lambda_p = 0.06;
    uint64_t seed = 0;
    int coarse_crop = 150, fine_crop = 128;
    double threshold = 1.0;
    int sched_window = 500;
    std::string extractor_path;
};

int cmd_finetune(const FinetuneArgs& a) {
    const TrainMode mode = train_mode_from_name(a.mode);
    if (mode == TrainMode::Supervised && a.gt_dirs.empty())
        throw CLI::ValidationError("finetune --mode supervised requires --gt");
    const AngularAxis axis = parse_axis(a.axis);

    io::LoadedModel lm = io::load_model(a.baseline);
    lm.model.set_axis(axis == AngularAxis::Horizontal ? AxisTag::Horizontal : AxisTag::Vertical);

    std::vector<LightField> sparse, dense;
    for (const auto& d : split_commas(a.in_dirs)) sparse.push_back(io::load_lf(d));
    if (!a.gt_dirs.empty())
        for (const auto& d : split_commas(a.gt_dirs)) dense.push_back(io::load_lf(d));

    TrainConfig cfg;
    cfg.lr = a.lr;
    cfg.batch_size = a.batch;
    cfg.iterations = a.iters;
    cfg.coarse_crop = a.coarse_crop;
    cfg.fine_crop = a.fine_crop;
    cfg.disparity_threshold = a.threshold;
    cfg.weights = LossWeights{a.lambda_c, a.lambda_r, a.lambda_p};
    cfg.sched_window = a.sched_window;
    cfg.seed = a.seed;
    cfg.mode = mode;

    FeatureExtractor<float> extractor = a.extractor_path.empty()
                                            ? FeatureExtractor<float>::make_default()
                                            : io::load_extractor(a.extractor_path);
    TrainReport rep = finetune(lm.model, sparse, axis, cfg, extractor,
                               mode == TrainMode::Supervised ? std::span<const LightField>(dense)
                                                             : std::span<const LightField>());
    io::save_model(lm.model, a.out, "finetuned-" + a.mode, a.seed);
    std::cout << "finetune: " << rep.iterations_run << " iterations (" << rep.mode << ", axis "
              << a.axis << "), objective " << (rep.total_history.empty() ? 0.0 : rep.total_history.front())
              << " -> " << (rep.total_history.empty() ? 0.0 : rep.total_history.back())
              << ", dense views read " << rep.dense_views_read << ", wrote " << a.out << "\n";
    return 0;
}

struct SynthesizeArgs {
    std::string in;
    int alpha = 2;
    std::string model_h, model_v;
    std::string order = "hv";
    std::string out;
};

int cmd_synthesize(const SynthesizeArgs& a) {
    if (a.alpha != 2 && a.alpha != 4)
        throw CLI::ValidationError("--alpha must be 2 or 4");
    LightField lf = io::load_lf(a.in);
    io::LoadedModel mh = io::load_model(a.model_h);
    io::LoadedModel mv = io::load_model(a.model_v);
    LearnedInterpolator ih(mh.model), iv(mv.model);
    ReconstructionPlan plan;
    plan.alpha = a.alpha;
    plan.order = cascade_order_from_name(a.order);
    plan.horizontal = &ih;
    plan.vertical = &iv;
    LightField dense = multistep_reconstruct(lf, plan);
    json meta = {{"synthesis",
                  {{"alpha", a.alpha},
                   {"order", a.order},
                   {"model_h", a.model_h},
                   {"model_v", a.model_v}}}};
    io::save_lf(dense, a.out, meta.dump());
    std::cout << "synthesize: wrote " << dense.rows << "x" << dense.cols << " light field to "
              << a.out << "\n";
    return 0;
}

struct EvaluateArgs {
    std::string recon, gt, report, csv;
    int alpha = 2;
    int margin = 0;
};

int cmd_evaluate(const EvaluateArgs& a) {
    LightField recon = io::load_lf(a.recon);
    LightField gt = io::load_lf(a.gt);
    EvalReport rep = evaluate(recon, gt, a.alpha, a.margin, a.recon);
    io::write_report_json(rep, a.report);
    if (!a.csv.empty()) io::write_report_csv(rep, a.csv);
    std::cout << "evaluate: " << rep.views.size() << " synthesized views, mean PSNR "
              << rep.mean_psnr_db << " dB, mean SSIM " << rep.mean_ssim << ", wrote " << a.report
              << "\n";
    return 0;
}

struct EpiArgs {
    std::string in;
    std::string axis = "h";
    int line = 0, fixed = 0;
    std::string out;
};

int cmd_epi(const EpiArgs& a) {
    LightField lf = io::load_lf(a.in);
    Image epi = extract_epi(lf, parse_axis(a.axis), a.line, a.fixed);
    io::save_png(epi, a.out);
    std::cout << "epi: wrote " << epi.height << "x" << epi.width << " image to " << a.out << "\n";
    return 0;
}

struct AblateArgs {
    std::string dense;
    int alpha = 2;
    std::string workdir;
    std::string report;
    int iters = 80;
    int pretrain_iters = 150;
    uint64_t seed = 0;
    ArchArgs arch{2, "8,16", 9};
    int fine_crop = 32;
    int batch = 8;
    double lr = 1e-3;
};

int cmd_ablate(const AblateArgs& a) {
    if (a.alpha != 2 && a.alpha != 4)
        throw CLI::ValidationError("--alpha must be 2 or 4");
    fs::create_directories(a.workdir);
    const fs::path work(a.workdir);
    LightField dense = io::load_lf(a.dense);
    LightField sparse = subsample(dense, a.alpha);
    io::save_lf(sparse, work / "sparse");

    PretrainConfig pre_cfg;
    pre_cfg.arch = a.arch.to_config();
    pre_cfg.iterations = a.pretrain_iters;
    pre_cfg.seed = a.seed;
    PretrainResult baseline = pretrain_baseline(pre_cfg);

    FeatureExtractor<float> extractor = FeatureExtractor<float>::make_default();

    TrainConfig cfg;
    cfg.iterations = a.iters;
    cfg.batch_size = a.batch;
    cfg.lr = a.lr;
    cfg.fine_crop = a.fine_crop;
    cfg.coarse_crop = std::max(a.fine_crop, 96);
    cfg.sched_window = std::max(10, a.iters / 4);
    cfg.seed = a.seed;

    std::vector<LightField> sparse_v = {sparse};
    std::vector<LightField> dense_v = {dense};

    struct ModeResult {
        std::string name;
        CascadeOrder order;
        InterpolatorModel<float> h, v;
    };
    std::vector<ModeResult> modes;

    auto tuned_pair = [&](TrainMode mode) {
        std::pair<InterpolatorModel<float>, InterpolatorModel<float>> out{baseline.model.clone(),
                                                                          baseline.model.clone()};
        out.first.set_axis(AxisTag::Horizontal);
        out.second.set_axis(AxisTag::Vertical);
        TrainConfig mc = cfg;
        mc.mode = mode;
        const bool sup = mode == TrainMode::Supervised;
        finetune(out.first, sparse_v, AngularAxis::Horizontal, mc, extractor,
                 sup ? std::span<const LightField>(dense_v) : std::span<const LightField>());
        finetune(out.second, sparse_v, AngularAxis::Vertical, mc, extractor,
                 sup ? std::span<const LightField>(dense_v) : std::span<const LightField>());
        return out;
    };

    {
        ModeResult m{"pretrained", CascadeOrder::HV, baseline.model.clone(), baseline.model.clone()};
        m.h.set_axis(AxisTag::Horizontal);
        m.v.set_axis(AxisTag::Vertical);
        modes.push_back(std::move(m));
    }
    {
        auto [h, v] = tuned_pair(TrainMode::Supervised);
        modes.push_back({"supervised", CascadeOrder::HV, std::move(h), std::move(v)});
    }
    {
        auto [h, v] = tuned_pair(TrainMode::NoCycle);
        modes.push_back({"no_cycle", CascadeOrder::HV, std::move(h), std::move(v)});
    }
    {
        auto [h, v] = tuned_pair(TrainMode::SelfSupervised);
        // The per-axis models are order-independent; the V-H row differs only
        // in the synthesis cascade.
        modes.push_back({"full", CascadeOrder::HV, h.clone(), v.clone()});
        modes.push_back({"vh", CascadeOrder::VH, std::move(h), std::move(v)});
    }

    json merged;
    merged["alpha"] = a.alpha;
    merged["seed"] = a.seed;
    merged["dataset"] = a.dense;
    json jmodes;
    for (auto& m : modes) {
        const fs::path ck_h = work / (m.name + "_h.ckpt");
        const fs::path ck_v = work / (m.name + "_v.ckpt");
        io::save_model(m.h, ck_h, "ablate-" + m.name, a.seed);
        io::save_model(m.v, ck_v, "ablate-" + m.name, a.seed);
        LearnedInterpolator ih(m.h), iv(m.v);
        ReconstructionPlan plan;
        plan.alpha = a.alpha;
        plan.order = m.order;
        plan.horizontal = &ih;
        plan.vertical = &iv;
        LightField recon = multistep_reconstruct(sparse, plan);
        EvalReport rep = evaluate(recon, dense, a.alpha, 0, a.dense + ":" + m.name);
        const fs::path rep_path = work / (m.name + "_report.json");
        io::write_report_json(rep, rep_path);
        jmodes[m.name] = {{"mean_psnr_db", rep.mean_psnr_db},
                          {"mean_ssim", rep.mean_ssim},
                          {"report", rep_path.string()},
                          {"checkpoint_h", ck_h.string()},
                          {"checkpoint_v", ck_v.string()}};
        std::cout << "ablate: " << m.name << " mean PSNR " << rep.mean_psnr_db << " dB, SSIM "
                  << rep.mean_ssim << "\n";
    }
    merged["modes"] = std::move(jmodes);
    std::ofstream out(a.report);
    if (!out) throw std::runtime_error("ablate: cannot write " + a.report);
    out << merged.dump(2) << '\n';
    std::cout << "ablate: wrote " << a.report << "\n";
    return 0;
}

} // namespace

int run_cli(std::vector<std::string> args) {
    CLI::App app{"Self-supervised light field view synthesis toolkit"};
    app.require_subcommand(1);

    GenArgs gen_args;
    auto* gen = app.add_subcommand("gen", "generate a synthetic ground-truth light field");
    gen->add_option("--scene", gen_args.scene, "planar | two-layer");
    gen->add_option("--disparity", gen_args.disparity, "px per angular step")->required();
    gen->add_option("--fg-disparity", gen_args.fg_disparity, "foreground disparity (two-layer)");
    gen->add_option("--mask", gen_args.mask_path, "foreground mask PNG (two-layer)");
    gen->add_option("--grid", gen_args.grid, "angular extents RxC");
    gen->add_option("--size", gen_args.size, "view size WxH");
    gen->add_option("--texture", gen_args.texture, "noise | checker | PNG path");
    gen->add_option("--seed", gen_args.seed, "rng seed");
    gen->add_option("--out", gen_args.out, "output directory")->required();

    std::string sub_in, sub_out;
    int sub_alpha = 2;
    auto* sub = app.add_subcommand("subsample", "angular sub-sampling of a light field");
    sub->add_option("--in", sub_in)->required();
    sub->add_option("--alpha", sub_alpha)->check(CLI::IsMember({2, 4}))->required();
    sub->add_option("--out", sub_out)->required();

    PretrainArgs pre_args;
    auto* pre = app.add_subcommand("pretrain", "train the baseline interpolator stand-in");
    pre->add_option("--out", pre_args.out)->required();
    pre->add_option("--iters", pre_args.iters);
    pre->add_option("--seed", pre_args.seed);
    add_arch_flags(pre, pre_args.arch);
    pre->add_option("--patch", pre_args.patch);
    pre->add_option("--batch", pre_args.batch);
    pre->add_option("--lr", pre_args.lr);
    pre->add_option("--target", pre_args.target);
    pre->add_option("--displacements", pre_args.displacements, "even pair displacements, comma list");

    FinetuneArgs ft_args;
    auto* ft = app.add_subcommand("finetune", "fine-tune a baseline on sparse light fields");
    ft->add_option("--in", ft_args.in_dirs, "sparse LF directories, comma list")->required();
    ft->add_option("--baseline", ft_args.baseline)->required();
    ft->add_option("--axis", ft_args.axis)->check(CLI::IsMember({"h", "v"}))->required();
    ft->add_option("--out", ft_args.out)->required();
    ft->add_option("--iters", ft_args.iters);
    ft->add_option("--lr", ft_args.lr);
    ft->add_option("--batch", ft_args.batch);
    ft->add_option("--mode", ft_args.mode)->check(CLI::IsMember({"self", "no-cycle", "supervised"}));
    ft->add_option("--gt", ft_args.gt_dirs, "dense LF directories (supervised mode)");
    ft->add_option("--lambda-c", ft_args.lambda_c);
    ft->add_option("--lambda-r", ft_args.lambda_r);
    ft->add_option("--lambda-p", ft_args.lambda_p);
    ft->add_option("--seed", ft_args.seed);
    ft->add_option("--coarse-crop", ft_args.coarse_crop);
    ft->add_option("--fine-crop", ft_args.fine_crop);
    ft->add_option("--threshold", ft_args.threshold, "disparity screen threshold (px)");
    ft->add_option("--sched-window", ft_args.sched_window);
    ft->add_option("--extractor", ft_args.extractor_path, "perceptual extractor weight file");

    SynthesizeArgs syn_args;
    auto* syn = app.add_subcommand("synthesize", "reconstruct a dense light field");
    syn->add_option("--in", syn_args.in)->required();
    syn->add_option("--alpha", syn_args.alpha)->check(CLI::IsMember({2, 4}))->required();
    syn->add_option("--model-h", syn_args.model_h)->required();
    syn->add_option("--model-v", syn_args.model_v)->required();
    syn->add_option("--order", syn_args.order)->check(CLI::IsMember({"hv", "vh"}));
    syn->add_option("--out", syn_args.out)->required();

    EvaluateArgs ev_args;
    auto* ev = app.add_subcommand("evaluate", "PSNR/SSIM of synthesized views against ground truth");
    ev->add_option("--recon", ev_args.recon)->required();
    ev->add_option("--gt", ev_args.gt)->required();
    ev->add_option("--alpha", ev_args.alpha)->required();
    ev->add_option("--report", ev_args.report)->required();
    ev->add_option("--margin", ev_args.margin);
    ev->add_option("--csv", ev_args.csv);

    EpiArgs epi_args;
    auto* epi = app.add_subcommand("epi", "emit an epipolar-plane image");
    epi->add_option("--in", epi_args.in)->required();
    epi->add_option("--axis", epi_args.axis)->check(CLI::IsMember({"h", "v"}));
    epi->add_option("--line", epi_args.line, "spatial row (h) or column (v)")->required();
    epi->add_option("--fixed", epi_args.fixed, "fixed opposite angular index")->required();
    epi->add_option("--out", epi_args.out)->required();

    AblateArgs ab_args;
    auto* ab = app.add_subcommand("ablate", "run the five ablation configurations");
    ab->add_option("--dense", ab_args.dense)->required();
    ab->add_option("--alpha", ab_args.alpha)->check(CLI::IsMember({2, 4}));
    ab->add_option("--workdir", ab_args.workdir)->required();
    ab->add_option("--report", ab_args.report)->required();
    ab->add_option("--iters", ab_args.iters);
    ab->add_option("--pretrain-iters", ab_args.pretrain_iters);
    ab->add_option("--seed", ab_args.seed);
    add_arch_flags(ab, ab_args.arch);
    ab->add_option("--fine-crop", ab_args.fine_crop);
    ab->add_option("--batch", ab_args.batch);
    ab->add_option("--lr", ab_args.lr);

    try {
        std::reverse(args.begin(), args.end());
        app.parse(std::move(args));
        if (gen->parsed()) return cmd_gen(gen_args);
        if (sub->parsed()) {
            LightField lf = io::load_lf(sub_in);
            io::save_lf(subsample(lf, sub_alpha), sub_out);
            std::cout << "subsample: wrote alpha=" << sub_alpha << " light field to " << sub_out
                      << "\n";
            return 0;
        }
        if (pre->parsed()) return cmd_pretrain(pre_args);
        if (ft->parsed()) return cmd_finetune(ft_args);
        if (syn->parsed()) return cmd_synthesize(syn_args);
        if (ev->parsed()) return cmd_evaluate(ev_args);
        if (epi->parsed()) return cmd_epi(epi_args);
        if (ab->parsed()) return cmd_ablate(ab_args);
        throw CLI::ValidationError("no subcommand given");
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace lfcycle
