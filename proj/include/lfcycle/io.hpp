#pragma once

#include "lfcycle/interp_net.hpp"
#include "lfcycle/light_field.hpp"
#include "lfcycle/losses.hpp"
#include "lfcycle/metrics.hpp"

#include <nlohmann/json_fwd.hpp>

#include <filesystem>

namespace lfcycle::io {

namespace fs = std::filesystem;

// ---- PNG ----------------------------------------------------------------

/// 8-bit RGB PNG; values quantized round-half-up from [0,1].
void save_png(const Image& img, const fs::path& path);
/// Any PNG color type; mapped to RGB in [0,1].
Image load_png(const fs::path& path);

// ---- Light field directories ---------------------------------------------

/// Directory with meta.json and one PNG per view (view_{t:02}_{s:02}.png).
void save_lf(const LightField& lf, const fs::path& dir,
             const std::string& extra_meta_json = "");
LightField load_lf(const fs::path& dir);

// ---- Model checkpoints ----------------------------------------------------

inline constexpr char kCheckpointMagic[4] = {'L', 'F', 'C', 'Y'};
inline constexpr uint32_t kCheckpointVersion = 1;

struct CheckpointInfo {
    ArchConfig arch;
    AxisTag axis = AxisTag::Generic;
    std::string provenance; // e.g. baseline, finetuned-self
    uint64_t seed = 0;
    bool warning = false;
};

void save_model(const InterpolatorModel<float>& model, const fs::path& path,
                const std::string& provenance, uint64_t seed, bool warning = false);

struct LoadedModel {
    InterpolatorModel<float> model;
    CheckpointInfo info;
};
LoadedModel load_model(const fs::path& path);

// ---- Perceptual extractor weights ------------------------------------------

inline constexpr char kExtractorMagic[4] = {'L', 'F', 'F', 'X'};

void save_extractor(const FeatureExtractor<float>& ex, const fs::path& path);
FeatureExtractor<float> load_extractor(const fs::path& path);

// ---- Evaluation reports -----------------------------------------------------

void write_report_json(const EvalReport& rep, const fs::path& path);
EvalReport read_report_json(const fs::path& path);
void write_report_csv(const EvalReport& rep, const fs::path& path);

nlohmann::json report_to_json(const EvalReport& rep);

} // namespace lfcycle::io
