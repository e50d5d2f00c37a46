#include "lfcycle/cli.hpp"
#include "lfcycle/io.hpp"
#include "lfcycle/metrics.hpp"
#include "lfcycle/reconstructor.hpp"
#include "lfcycle/synthgen.hpp"
#include "lfcycle/trainer.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace lfcycle;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

Image image_from_array(const FloatArray& arr) {
    const auto buf = arr.request();
    if (buf.ndim != 3 || buf.shape[2] != 3)
        throw std::invalid_argument("expected an array of shape (h, w, 3)");
    Image img(static_cast<int>(buf.shape[0]), static_cast<int>(buf.shape[1]));
    std::copy_n(static_cast<const float*>(buf.ptr), img.data.size(), img.data.data());
    img.clamp01();
    return img;
}

py::array_t<float> image_to_array(const Image& img) {
    py::array_t<float> out({img.height, img.width, 3});
    std::copy_n(img.data.data(), img.data.size(), out.mutable_data());
    return out;
}

AngularAxis axis_from_str(const std::string& axis) {
    if (axis == "h" || axis == "horizontal") return AngularAxis::Horizontal;
    if (axis == "v" || axis == "vertical") return AngularAxis::Vertical;
    throw std::invalid_argument("axis must be 'h' or 'v'");
}

struct PyModel {
    InterpolatorModel<float> model;
    bool warning = false;
};

py::dict report_to_dict(const TrainReport& rep) {
    py::dict d;
    d["total_history"] = rep.total_history;
    d["cycle_history"] = rep.cycle_history;
    d["recon_history"] = rep.recon_history;
    d["perceptual_history"] = rep.perceptual_history;
    d["lr_history"] = rep.lr_history;
    d["patches_accepted"] = rep.patches_accepted;
    d["patches_rejected"] = rep.patches_rejected;
    d["dense_views_read"] = rep.dense_views_read;
    d["crops_shrunk"] = rep.crops_shrunk;
    d["iterations_run"] = rep.iterations_run;
    d["wall_seconds"] = rep.wall_seconds;
    d["mode"] = rep.mode;
    d["seed"] = rep.seed;
    return d;
}

py::dict eval_to_dict(const EvalReport& rep) {
    py::dict d;
    d["alpha"] = rep.alpha;
    d["dataset"] = rep.dataset_id;
    d["margin"] = rep.margin;
    py::list views;
    for (const auto& v : rep.views) {
        py::dict e;
        e["t"] = v.t;
        e["s"] = v.s;
        e["psnr_db"] = std::isinf(v.psnr_db) ? kPsnrCap : v.psnr_db;
        e["psnr_capped"] = static_cast<bool>(std::isinf(v.psnr_db));
        e["ssim"] = v.ssim;
        views.append(e);
    }
    d["views"] = views;
    d["mean_psnr_db"] = rep.mean_psnr_db;
    d["mean_ssim"] = rep.mean_ssim;
    return d;
}

} // namespace

PYBIND11_MODULE(_lfcycle, m) {
    m.doc() = "Self-supervised light field view synthesis (C++ core)";

    py::class_<LightField>(m, "LightField")
        .def_readonly("rows", &LightField::rows)
        .def_readonly("cols", &LightField::cols)
        .def_property_readonly("view_height", &LightField::view_height)
        .def_property_readonly("view_width", &LightField::view_width)
        .def_property_readonly("alpha", [](const LightField& lf) { return lf.alpha; })
        .def_property_readonly("provenance",
                               [](const LightField& lf) {
                                   return lf.provenance == Provenance::Dense ? "dense" : "sparse";
                               })
        .def(
            "view",
            [](const LightField& lf, int t, int s) {
                if (t < 0 || t >= lf.rows || s < 0 || s >= lf.cols)
                    throw std::out_of_range("view index out of range");
                return image_to_array(lf.view(t, s));
            },
            py::arg("t"), py::arg("s"));

    py::class_<PyModel>(m, "Model")
        .def_property_readonly("axis",
                               [](const PyModel& pm) { return axis_tag_name(pm.model.axis()); })
        .def_property_readonly("warning", [](const PyModel& pm) { return pm.warning; })
        .def_property_readonly("config",
                               [](const PyModel& pm) {
                                   py::dict d;
                                   d["levels"] = pm.model.config().levels;
                                   d["widths"] = pm.model.config().widths;
                                   d["kernel_size"] = pm.model.config().kernel_size;
                                   return d;
                               })
        .def("interpolate", [](const PyModel& pm, const FloatArray& a, const FloatArray& b) {
            return image_to_array(pm.model.interpolate(image_from_array(a), image_from_array(b)));
        });

    m.def("dense_angular_size", &dense_angular_size, py::arg("n"), py::arg("alpha"));

    m.def(
        "gen_planar",
        [](int rows, int cols, int height, int width, double disparity, uint64_t seed,
           const std::string& texture) {
            SceneSpec spec;
            spec.rows = rows;
            spec.cols = cols;
            spec.view_height = height;
            spec.view_width = width;
            spec.disparity = disparity;
            spec.seed = seed;
            spec.texture = texture == "checker" ? TextureKind::Checker : TextureKind::Noise;
            return gen_planar_lf(spec);
        },
        py::arg("rows") = 9, py::arg("cols") = 9, py::arg("height") = 64, py::arg("width") = 64,
        py::arg("disparity") = 1.0, py::arg("seed") = 0, py::arg("texture") = "noise");

    m.def(
        "gen_two_layer",
        [](int rows, int cols, int height, int width, double disparity, double fg_disparity,
           const FloatArray& mask, uint64_t seed) {
            SceneSpec spec;
            spec.rows = rows;
            spec.cols = cols;
            spec.view_height = height;
            spec.view_width = width;
            spec.disparity = disparity;
            spec.layers = 2;
            spec.fg_disparity = fg_disparity;
            spec.fg_mask = image_from_array(mask);
            spec.seed = seed;
            return gen_two_layer_lf(spec);
        },
        py::arg("rows"), py::arg("cols"), py::arg("height"), py::arg("width"),
        py::arg("disparity"), py::arg("fg_disparity"), py::arg("mask"), py::arg("seed") = 0);

    m.def("subsample", &subsample, py::arg("lf"), py::arg("alpha"));

    m.def(
        "extract_epi",
        [](const LightField& lf, const std::string& axis, int line, int fixed) {
            return image_to_array(extract_epi(lf, axis_from_str(axis), line, fixed));
        },
        py::arg("lf"), py::arg("axis"), py::arg("line"), py::arg("fixed"));

    m.def(
        "psnr",
        [](const FloatArray& a, const FloatArray& b) {
            const double v = psnr(image_from_array(a), image_from_array(b));
            return std::isinf(v) ? kPsnrCap : v;
        },
        py::arg("a"), py::arg("b"));
    m.def(
        "ssim",
        [](const FloatArray& a, const FloatArray& b) {
            return ssim(image_from_array(a), image_from_array(b));
        },
        py::arg("a"), py::arg("b"));

    m.def(
        "evaluate",
        [](const LightField& recon, const LightField& gt, int alpha, int margin,
           const std::string& dataset_id) {
            return eval_to_dict(evaluate(recon, gt, alpha, margin, dataset_id));
        },
        py::arg("recon"), py::arg("gt"), py::arg("alpha"), py::arg("margin") = 0,
        py::arg("dataset_id") = "");

    m.def(
        "save_lf", [](const LightField& lf, const std::string& dir) { io::save_lf(lf, dir); },
        py::arg("lf"), py::arg("dir"));
    m.def("load_lf", [](const std::string& dir) { return io::load_lf(dir); }, py::arg("dir"));

    m.def(
        "pretrain",
        [](int levels, const std::vector<int>& widths, int kernel_size, int iterations,
           int batch_size, int patch_size, double lr, double target_loss,
           const std::vector<int>& displacements, uint64_t seed) {
            PretrainConfig cfg;
            cfg.arch = ArchConfig{levels, widths, kernel_size};
            cfg.iterations = iterations;
            cfg.batch_size = batch_size;
            cfg.patch_size = patch_size;
            cfg.lr = lr;
            cfg.target_loss = target_loss;
            cfg.displacements = displacements;
            cfg.seed = seed;
            auto res = pretrain_baseline(cfg);
            py::dict rep;
            rep["loss_history"] = res.loss_history;
            rep["reached_target"] = res.reached_target;
            rep["warning"] = res.warning;
            return py::make_tuple(PyModel{std::move(res.model), res.warning}, rep);
        },
        py::arg("levels") = 3, py::arg("widths") = std::vector<int>{16, 32, 64},
        py::arg("kernel_size") = 13, py::arg("iterations") = 400, py::arg("batch_size") = 8,
        py::arg("patch_size") = 32, py::arg("lr") = 1e-3, py::arg("target_loss") = 0.02,
        py::arg("displacements") = std::vector<int>{0, 2, -2}, py::arg("seed") = 0);

    m.def(
        "finetune",
        [](PyModel& pm, const std::vector<LightField>& sparse, const std::string& axis,
           int iterations, int batch_size, double lr, int coarse_crop, int fine_crop,
           double threshold, double lambda_c, double lambda_r, double lambda_p, int sched_window,
           uint64_t seed, const std::string& mode, const std::vector<LightField>& gt) {
            const AngularAxis ax = axis_from_str(axis);
            pm.model.set_axis(ax == AngularAxis::Horizontal ? AxisTag::Horizontal
                                                            : AxisTag::Vertical);
            TrainConfig cfg;
            cfg.iterations = iterations;
            cfg.batch_size = batch_size;
            cfg.lr = lr;
            cfg.coarse_crop = coarse_crop;
            cfg.fine_crop = fine_crop;
            cfg.disparity_threshold = threshold;
            cfg.weights = LossWeights{lambda_c, lambda_r, lambda_p};
            cfg.sched_window = sched_window;
            cfg.seed = seed;
            cfg.mode = train_mode_from_name(mode);
            auto ex = FeatureExtractor<float>::make_default();
            auto rep = finetune(pm.model, sparse, ax, cfg, ex, gt);
            return report_to_dict(rep);
        },
        py::arg("model"), py::arg("sparse"), py::arg("axis"), py::arg("iterations") = 500,
        py::arg("batch_size") = 8, py::arg("lr") = 1e-3, py::arg("coarse_crop") = 150,
        py::arg("fine_crop") = 128, py::arg("threshold") = 1.0, py::arg("lambda_c") = 1.0,
        py::arg("lambda_r") = 1.0, py::arg("lambda_p") = 0.06, py::arg("sched_window") = 500,
        py::arg("seed") = 0, py::arg("mode") = "self",
        py::arg("gt") = std::vector<LightField>{});

    m.def(
        "synthesize",
        [](const LightField& sparse, int alpha, const PyModel& model_h, const PyModel& model_v,
           const std::string& order) {
            LearnedInterpolator ih(model_h.model), iv(model_v.model);
            ReconstructionPlan plan;
            plan.alpha = alpha;
            plan.order = cascade_order_from_name(order);
            plan.horizontal = &ih;
            plan.vertical = &iv;
            return multistep_reconstruct(sparse, plan);
        },
        py::arg("sparse"), py::arg("alpha"), py::arg("model_h"), py::arg("model_v"),
        py::arg("order") = "hv");

    m.def(
        "oracle_reconstruct",
        [](const LightField& sparse, int alpha, int pair_displacement, const std::string& order) {
            ReconstructionPlan probe;
            probe.alpha = alpha;
            const int steps = probe.steps();
            std::vector<std::unique_ptr<TranslationOracle>> keep;
            std::vector<StageInterpolators> stages;
            int disp = pair_displacement;
            for (int i = 0; i < steps; ++i) {
                keep.push_back(std::make_unique<TranslationOracle>(AngularAxis::Horizontal, disp));
                keep.push_back(std::make_unique<TranslationOracle>(AngularAxis::Vertical, disp));
                stages.push_back({keep[keep.size() - 2].get(), keep.back().get()});
                disp /= 2;
            }
            return multistep_reconstruct(sparse, cascade_order_from_name(order), stages);
        },
        py::arg("sparse"), py::arg("alpha"), py::arg("pair_displacement"), py::arg("order") = "hv",
        "Reconstruct with the exact translation oracle (per-stage displacement halving)");

    m.def(
        "save_model",
        [](const PyModel& pm, const std::string& path, const std::string& provenance,
           uint64_t seed) { io::save_model(pm.model, path, provenance, seed, pm.warning); },
        py::arg("model"), py::arg("path"), py::arg("provenance") = "python", py::arg("seed") = 0);
    m.def(
        "load_model",
        [](const std::string& path) {
            auto lm = io::load_model(path);
            return PyModel{std::move(lm.model), lm.info.warning};
        },
        py::arg("path"));

    m.def("run_cli", &run_cli, py::arg("args"),
          "Run the lfcycle command line in-process; returns the exit code");
}
