#include "lfcycle/io.hpp"

#include <nlohmann/json.hpp>
#include <png.h>

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace lfcycle::io {

using nlohmann::json;

// ---- PNG ----------------------------------------------------------------

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

} // namespace

void save_png(const Image& img, const fs::path& path) {
    FilePtr fp(std::fopen(path.string().c_str(), "wb"));
    if (!fp) throw std::runtime_error("save_png: cannot open " + path.string());
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("save_png: libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("save_png: write error on " + path.string());
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, img.width, img.height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<png_byte> row(static_cast<size_t>(img.width) * 3);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < 3; ++c) {
                const float v = std::clamp(img.at(y, x, c), 0.0f, 1.0f);
                row[static_cast<size_t>(x) * 3 + c] =
                    static_cast<png_byte>(std::floor(v * 255.0f + 0.5f));
            }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

Image load_png(const fs::path& path) {
    FilePtr fp(std::fopen(path.string().c_str(), "rb"));
    if (!fp) throw std::runtime_error("load_png: cannot open " + path.string());
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("load_png: libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("load_png: corrupt PNG " + path.string());
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);
    // Normalize everything to 8-bit RGB.
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_set_packing(png);
    if (png_get_color_type(png, info) == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY ||
        png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY_ALPHA) {
        png_set_expand_gray_1_2_4_to_8(png);
        png_set_gray_to_rgb(png);
    }
    png_read_update_info(png, info);
    const int w = static_cast<int>(png_get_image_width(png, info));
    const int h = static_cast<int>(png_get_image_height(png, info));
    Image img(h, w);
    std::vector<png_byte> row(png_get_rowbytes(png, info));
    for (int y = 0; y < h; ++y) {
        png_read_row(png, row.data(), nullptr);
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c)
                img.at(y, x, c) = static_cast<float>(row[static_cast<size_t>(x) * 3 + c]) / 255.0f;
    }
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

// ---- Light field directories ---------------------------------------------

namespace {

std::string view_filename(int t, int s) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "view_%02d_%02d.png", t, s);
    return buf;
}

} // namespace

void save_lf(const LightField& lf, const fs::path& dir, const std::string& extra_meta_json) {
    lf.validate();
    fs::create_directories(dir);
    json meta;
    meta["rows"] = lf.rows;
    meta["cols"] = lf.cols;
    meta["height"] = lf.view_height();
    meta["width"] = lf.view_width();
    meta["pattern"] = "view_{t:02}_{s:02}.png";
    meta["provenance"] = lf.provenance == Provenance::Dense ? "dense" : "sparse";
    if (lf.provenance == Provenance::Sparse) meta["alpha"] = lf.alpha;
    if (!extra_meta_json.empty()) {
        json extra = json::parse(extra_meta_json);
        for (auto& [k, v] : extra.items()) meta[k] = v;
    }
    std::ofstream out(dir / "meta.json");
    if (!out) throw std::runtime_error("save_lf: cannot write " + (dir / "meta.json").string());
    out << meta.dump(2) << '\n';
    out.close();
    for (int t = 0; t < lf.rows; ++t)
        for (int s = 0; s < lf.cols; ++s) save_png(lf.view(t, s), dir / view_filename(t, s));
}

LightField load_lf(const fs::path& dir) {
    const fs::path meta_path = dir / "meta.json";
    std::ifstream in(meta_path);
    if (!in) throw std::runtime_error("load_lf: missing " + meta_path.string());
    json meta;
    try {
        in >> meta;
    } catch (const json::exception& e) {
        throw std::runtime_error("load_lf: corrupt " + meta_path.string() + ": " + e.what());
    }
    LightField lf;
    lf.rows = meta.at("rows").get<int>();
    lf.cols = meta.at("cols").get<int>();
    const int h = meta.at("height").get<int>();
    const int w = meta.at("width").get<int>();
    const std::string prov = meta.at("provenance").get<std::string>();
    if (prov == "dense") {
        lf.provenance = Provenance::Dense;
    } else if (prov == "sparse") {
        lf.provenance = Provenance::Sparse;
        lf.alpha = meta.at("alpha").get<int>();
    } else {
        throw std::runtime_error("load_lf: unknown provenance '" + prov + "' in " +
                                 meta_path.string());
    }
    if (lf.rows < 1 || lf.cols < 1)
        throw std::runtime_error("load_lf: invalid extents in " + meta_path.string());

    size_t png_count = 0;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ".png") ++png_count;
    if (png_count != static_cast<size_t>(lf.rows) * lf.cols)
        throw std::runtime_error("load_lf: meta declares " + std::to_string(lf.rows) + "x" +
                                 std::to_string(lf.cols) + " views but " + dir.string() +
                                 " holds " + std::to_string(png_count) + " PNG files");

    lf.views.reserve(static_cast<size_t>(lf.rows) * lf.cols);
    for (int t = 0; t < lf.rows; ++t)
        for (int s = 0; s < lf.cols; ++s) {
            const fs::path p = dir / view_filename(t, s);
            if (!fs::exists(p)) throw std::runtime_error("load_lf: missing view file " + p.string());
            Image img = load_png(p);
            if (img.height != h || img.width != w)
                throw std::runtime_error("load_lf: " + p.string() + " is " +
                                         std::to_string(img.height) + "x" +
                                         std::to_string(img.width) + ", meta declares " +
                                         std::to_string(h) + "x" + std::to_string(w));
            lf.views.push_back(std::move(img));
        }
    return lf;
}

// ---- Binary helpers ---------------------------------------------------------

namespace {

void write_u32_le(std::ostream& out, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

bool read_u32_le(std::istream& in, uint32_t& v) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) return false;
    v = static_cast<uint32_t>(b[0]) | static_cast<uint32_t>(b[1]) << 8 |
        static_cast<uint32_t>(b[2]) << 16 | static_cast<uint32_t>(b[3]) << 24;
    return true;
}

void write_f32_le(std::ostream& out, float f) { write_u32_le(out, std::bit_cast<uint32_t>(f)); }

bool read_f32_le(std::istream& in, float& f) {
    uint32_t v;
    if (!read_u32_le(in, v)) return false;
    f = std::bit_cast<float>(v);
    return true;
}

json arch_to_json(const ArchConfig& arch) {
    return json{{"levels", arch.levels}, {"widths", arch.widths}, {"kernel_size", arch.kernel_size}};
}

ArchConfig arch_from_json(const json& j) {
    ArchConfig arch;
    arch.levels = j.at("levels").get<int>();
    arch.widths = j.at("widths").get<std::vector<int>>();
    arch.kernel_size = j.at("kernel_size").get<int>();
    arch.validate();
    return arch;
}

} // namespace

// ---- Model checkpoints -------------------------------------------------------

void save_model(const InterpolatorModel<float>& model, const fs::path& path,
                const std::string& provenance, uint64_t seed, bool warning) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_model: cannot open " + path.string());
    int64_t param_count = 0;
    for (const auto& p : model.parameters()) param_count += p.numel();
    json header;
    header["arch"] = arch_to_json(model.config());
    header["axis"] = axis_tag_name(model.axis());
    header["provenance"] = provenance;
    header["seed"] = seed;
    header["warning"] = warning;
    header["param_count"] = param_count;
    const std::string hdr = header.dump();
    out.write(kCheckpointMagic, 4);
    write_u32_le(out, kCheckpointVersion);
    write_u32_le(out, static_cast<uint32_t>(hdr.size()));
    out.write(hdr.data(), static_cast<std::streamsize>(hdr.size()));
    for (const auto& p : model.parameters())
        for (float v : p.values()) write_f32_le(out, v);
    if (!out) throw std::runtime_error("save_model: write failed on " + path.string());
}

LoadedModel load_model(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_model: cannot open " + path.string());
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kCheckpointMagic, 4) != 0)
        throw std::runtime_error("load_model: bad magic in " + path.string() +
                                 " (not a checkpoint)");
    uint32_t version = 0;
    if (!read_u32_le(in, version) || version != kCheckpointVersion)
        throw std::runtime_error("load_model: unsupported checkpoint version " +
                                 std::to_string(version) + " in " + path.string());
    uint32_t hdr_len;
    if (!read_u32_le(in, hdr_len))
        throw std::runtime_error("load_model: truncated header in " + path.string());
    std::string hdr(hdr_len, '\0');
    if (!in.read(hdr.data(), hdr_len))
        throw std::runtime_error("load_model: truncated header in " + path.string());
    json header;
    try {
        header = json::parse(hdr);
    } catch (const json::exception& e) {
        throw std::runtime_error("load_model: corrupt header JSON in " + path.string() + ": " +
                                 e.what());
    }
    LoadedModel lm;
    lm.info.arch = arch_from_json(header.at("arch"));
    lm.info.axis = axis_tag_from_name(header.at("axis").get<std::string>());
    lm.info.provenance = header.value("provenance", "");
    lm.info.seed = header.value("seed", uint64_t{0});
    lm.info.warning = header.value("warning", false);
    const int64_t declared = header.at("param_count").get<int64_t>();

    lm.model = InterpolatorModel<float>(lm.info.arch, lm.info.axis, 0);
    int64_t expected = 0;
    for (const auto& p : lm.model.parameters()) expected += p.numel();
    if (expected != declared)
        throw std::runtime_error("load_model: header declares " + std::to_string(declared) +
                                 " parameters, architecture needs " + std::to_string(expected));
    for (auto& p : lm.model.parameters())
        for (auto& v : p.values())
            if (!read_f32_le(in, v))
                throw std::runtime_error("load_model: truncated blob in " + path.string());
    char extra;
    if (in.read(&extra, 1))
        throw std::runtime_error("load_model: trailing data after blob in " + path.string());
    return lm;
}

// ---- Perceptual extractor weights --------------------------------------------

void save_extractor(const FeatureExtractor<float>& ex, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_extractor: cannot open " + path.string());
    json header;
    json stages = json::array();
    int64_t param_count = 0;
    for (const auto& st : ex.stages())
        stages.push_back(json{{"in", st.in_ch}, {"out", st.out_ch}, {"ksize", st.ksize}});
    for (const auto& wtensor : ex.weights()) param_count += wtensor.numel();
    header["stages"] = stages;
    header["tap_depth"] = ex.tap_depth();
    header["origin"] = ex.origin();
    header["param_count"] = param_count;
    const std::string hdr = header.dump();
    out.write(kExtractorMagic, 4);
    write_u32_le(out, 1);
    write_u32_le(out, static_cast<uint32_t>(hdr.size()));
    out.write(hdr.data(), static_cast<std::streamsize>(hdr.size()));
    for (const auto& wtensor : ex.weights())
        for (float v : wtensor.values()) write_f32_le(out, v);
    if (!out) throw std::runtime_error("save_extractor: write failed on " + path.string());
}

FeatureExtractor<float> load_extractor(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_extractor: cannot open " + path.string());
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kExtractorMagic, 4) != 0)
        throw std::runtime_error("load_extractor: bad magic in " + path.string());
    uint32_t version, hdr_len;
    if (!read_u32_le(in, version) || version != 1)
        throw std::runtime_error("load_extractor: unsupported version in " + path.string());
    if (!read_u32_le(in, hdr_len))
        throw std::runtime_error("load_extractor: truncated header in " + path.string());
    std::string hdr(hdr_len, '\0');
    if (!in.read(hdr.data(), hdr_len))
        throw std::runtime_error("load_extractor: truncated header in " + path.string());
    const json header = json::parse(hdr);
    std::vector<FeatureExtractor<float>::StageSpec> stages;
    for (const auto& st : header.at("stages"))
        stages.push_back({st.at("in").get<int>(), st.at("out").get<int>(), st.at("ksize").get<int>()});
    FeatureExtractor<float> ex(stages, 0, "imported");
    if (header.at("tap_depth").get<int>() != ex.tap_depth())
        throw std::runtime_error("load_extractor: tap depth mismatch in " + path.string());
    for (auto& wtensor : ex.weights())
        for (auto& v : wtensor.values())
            if (!read_f32_le(in, v))
                throw std::runtime_error("load_extractor: truncated blob in " + path.string());
    return ex;
}

// ---- Evaluation reports --------------------------------------------------------

nlohmann::json report_to_json(const EvalReport& rep) {
    json j;
    j["meta"] = {{"alpha", rep.alpha},
                 {"dataset", rep.dataset_id},
                 {"margin", rep.margin},
                 {"rows", rep.rows},
                 {"cols", rep.cols},
                 {"mse_convention", "rgb-joint"},
                 {"psnr_cap_db", kPsnrCap}};
    json views = json::array();
    for (const auto& v : rep.views) {
        const bool capped = std::isinf(v.psnr_db);
        views.push_back(json{{"t", v.t},
                             {"s", v.s},
                             {"psnr_db", capped ? kPsnrCap : v.psnr_db},
                             {"psnr_capped", capped},
                             {"ssim", v.ssim}});
    }
    j["views"] = std::move(views);
    j["aggregate"] = {{"synthesized_count", rep.views.size()},
                      {"mean_psnr_db", rep.mean_psnr_db},
                      {"mean_ssim", rep.mean_ssim}};
    return j;
}

void write_report_json(const EvalReport& rep, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_report_json: cannot open " + path.string());
    out << report_to_json(rep).dump(2) << '\n';
}

EvalReport read_report_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_report_json: cannot open " + path.string());
    json j;
    in >> j;
    EvalReport rep;
    rep.alpha = j.at("meta").at("alpha").get<int>();
    rep.dataset_id = j.at("meta").at("dataset").get<std::string>();
    rep.margin = j.at("meta").at("margin").get<int>();
    rep.rows = j.at("meta").at("rows").get<int>();
    rep.cols = j.at("meta").at("cols").get<int>();
    for (const auto& v : j.at("views")) {
        ViewScore vs;
        vs.t = v.at("t").get<int>();
        vs.s = v.at("s").get<int>();
        vs.psnr_db = v.at("psnr_db").get<double>();
        if (v.value("psnr_capped", false))
            vs.psnr_db = std::numeric_limits<double>::infinity();
        vs.ssim = v.at("ssim").get<double>();
        rep.views.push_back(vs);
    }
    rep.mean_psnr_db = j.at("aggregate").at("mean_psnr_db").get<double>();
    rep.mean_ssim = j.at("aggregate").at("mean_ssim").get<double>();
    return rep;
}

void write_report_csv(const EvalReport& rep, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_report_csv: cannot open " + path.string());
    out << "t,s,psnr_db,ssim\n";
    char buf[128];
    for (const auto& v : rep.views) {
        const double p = std::isinf(v.psnr_db) ? kPsnrCap : v.psnr_db;
        std::snprintf(buf, sizeof(buf), "%d,%d,%.17g,%.17g\n", v.t, v.s, p, v.ssim);
        out << buf;
    }
    std::snprintf(buf, sizeof(buf), "aggregate,,%.17g,%.17g\n", rep.mean_psnr_db, rep.mean_ssim);
    out << buf;
}

} // namespace lfcycle::io
