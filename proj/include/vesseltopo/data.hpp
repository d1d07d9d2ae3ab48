#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "vesseltopo/core.hpp"
#include "vesseltopo/metrics.hpp"
#include "vesseltopo/synthetic.hpp"

namespace vesseltopo {

namespace fs = std::filesystem;

/// One fundus image with per-class vessel masks. Crossing pixels are set in
/// both the artery and vein channel (multi-label convention); uncertain
/// pixels are excluded from losses and metrics downstream.
struct FundusSample {
    torch::Tensor image;           // [3,H,W] float32 in [0,1]
    torch::Tensor artery_mask;     // [H,W] uint8 {0,1}
    torch::Tensor vein_mask;       // [H,W] uint8 {0,1}
    torch::Tensor crossing_mask;   // [H,W] uint8, zero when absent
    torch::Tensor uncertain_mask;  // [H,W] uint8, zero when absent
    std::string id;

    int64_t height() const { return image.size(1); }
    int64_t width() const { return image.size(2); }

    void validate() const {
        TORCH_CHECK(image.dim() == 3 && image.size(0) == 3, "image must be [3,H,W]");
        const auto H = image.size(1), W = image.size(2);
        for (const auto* m : {&artery_mask, &vein_mask, &crossing_mask, &uncertain_mask}) {
            TORCH_CHECK(m->dim() == 2 && m->size(0) == H && m->size(1) == W,
                        "mask planes must share the image's HxW");
            TORCH_CHECK(m->max().item<int64_t>() <= 1, "masks must be {0,1}-valued");
        }
        // crossing pixels live in both vessel channels
        auto cross = crossing_mask.to(torch::kBool);
        if (cross.any().item<bool>()) {
            TORCH_CHECK((artery_mask.to(torch::kBool) & cross).equal(cross) &&
                            (vein_mask.to(torch::kBool) & cross).equal(cross),
                        "crossing pixels must be set in both artery and vein masks");
        }
    }
};

struct DatasetSplit {
    std::vector<std::string> train, val, test;
    uint64_t seed = 0;
};

struct AugmentationConfig {
    struct Toggle {
        bool enabled = true;
        double prob = 0.0;
    };
    // defaults follow the training augmentation schedule
    Toggle rotation{true, 0.5};
    double rotation_deg = 30.0;
    Toggle vflip{true, 0.5};
    Toggle hflip{true, 0.5};
    Toggle translation{true, 0.3};
    double translation_frac = 0.05;
    Toggle contrast{true, 0.3};
    double contrast_gamma_lo = 0.8, contrast_gamma_hi = 1.2;
    Toggle intensity_shift{true, 0.3};
    double intensity_offset = 0.1;
    Toggle gaussian_noise{true, 0.2};
    double noise_sigma = 0.01;
    Toggle gaussian_blur{true, 0.2};
    double blur_sigma_lo = 0.5, blur_sigma_hi = 1.0;

    void validate() const {
        for (const auto* t : {&rotation, &vflip, &hflip, &translation, &contrast,
                              &intensity_shift, &gaussian_noise, &gaussian_blur})
            if (t->prob < 0.0 || t->prob > 1.0)
                throw std::invalid_argument("AugmentationConfig: probability outside [0,1]");
    }

    static AugmentationConfig disabled() {
        AugmentationConfig c;
        for (auto* t : {&c.rotation, &c.vflip, &c.hflip, &c.translation, &c.contrast,
                        &c.intensity_shift, &c.gaussian_noise, &c.gaussian_blur})
            t->prob = 0.0;
        return c;
    }
};

// ---- PNG I/O ----------------------------------------------------------------

inline torch::Tensor load_image_png(const fs::path& path) {
    cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
    if (bgr.empty()) throw std::runtime_error("failed to read image: " + path.string());
    cv::Mat rgb;
    cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
    auto t = torch::from_blob(rgb.data, {rgb.rows, rgb.cols, 3}, torch::kUInt8).clone();
    return t.permute({2, 0, 1}).to(torch::kFloat32).div(255.0);
}

inline void save_image_png(const fs::path& path, const torch::Tensor& image) {
    auto img = (image.clamp(0, 1) * 255.0).to(torch::kUInt8).permute({1, 2, 0}).contiguous();
    cv::Mat rgb(static_cast<int>(img.size(0)), static_cast<int>(img.size(1)), CV_8UC3,
                img.data_ptr<uint8_t>());
    cv::Mat bgr;
    cv::cvtColor(rgb, bgr, cv::COLOR_RGB2BGR);
    if (!cv::imwrite(path.string(), bgr))
        throw std::runtime_error("failed to write image: " + path.string());
}

inline MaskGrid load_mask_png(const fs::path& path) {
    cv::Mat gray = cv::imread(path.string(), cv::IMREAD_GRAYSCALE);
    if (gray.empty()) throw std::runtime_error("failed to read mask: " + path.string());
    MaskGrid m(gray.rows, gray.cols);
    for (int r = 0; r < gray.rows; ++r)
        for (int c = 0; c < gray.cols; ++c) m(r, c) = gray.at<uint8_t>(r, c) ? 1 : 0;
    return m;
}

inline void save_mask_png(const fs::path& path, const MaskGrid& mask) {
    cv::Mat gray(mask.rows(), mask.cols(), CV_8UC1);
    for (int r = 0; r < mask.rows(); ++r)
        for (int c = 0; c < mask.cols(); ++c) gray.at<uint8_t>(r, c) = mask(r, c) ? 255 : 0;
    if (!cv::imwrite(path.string(), gray))
        throw std::runtime_error("failed to write mask: " + path.string());
}

inline void save_mask_png(const fs::path& path, const torch::Tensor& mask) {
    save_mask_png(path, tensor_to_mask(mask));
}

// ---- dataset ingestion -------------------------------------------------------

/// Loads one sample following the directory convention
/// `<root>/images/<id>.png`, `<root>/masks/<id>_artery.png`, `<id>_vein.png`,
/// optional `<id>_crossing.png` / `<id>_uncertain.png`.
inline FundusSample load_sample(const fs::path& root, const std::string& id) {
    FundusSample s;
    s.id = id;
    s.image = load_image_png(root / "images" / (id + ".png"));
    const fs::path masks = root / "masks";
    const auto artery_p = masks / (id + "_artery.png");
    const auto vein_p = masks / (id + "_vein.png");
    if (!fs::exists(artery_p) || !fs::exists(vein_p))
        throw std::runtime_error("sample '" + id + "': missing artery or vein mask");
    s.artery_mask = mask_to_tensor(load_mask_png(artery_p));
    s.vein_mask = mask_to_tensor(load_mask_png(vein_p));

    const auto H = s.image.size(1), W = s.image.size(2);
    const auto cross_p = masks / (id + "_crossing.png");
    const auto unc_p = masks / (id + "_uncertain.png");
    s.crossing_mask = fs::exists(cross_p) ? mask_to_tensor(load_mask_png(cross_p))
                                          : torch::zeros({H, W}, torch::kUInt8);
    s.uncertain_mask = fs::exists(unc_p) ? mask_to_tensor(load_mask_png(unc_p))
                                         : torch::zeros({H, W}, torch::kUInt8);
    // crossings occupy both vessel channels
    s.artery_mask = (s.artery_mask | s.crossing_mask).to(torch::kUInt8);
    s.vein_mask = (s.vein_mask | s.crossing_mask).to(torch::kUInt8);
    s.validate();
    return s;
}

inline std::vector<std::string> list_sample_ids(const fs::path& root) {
    const fs::path images = root / "images";
    if (!fs::exists(images)) throw std::runtime_error("dataset root has no images/ directory: " + root.string());
    std::vector<std::string> ids;
    for (const auto& e : fs::directory_iterator(images))
        if (e.path().extension() == ".png") ids.push_back(e.path().stem().string());
    std::sort(ids.begin(), ids.end());
    return ids;
}

/// Deterministic 80/10/10 split (floor for val/test, remainder to train).
inline DatasetSplit load_dataset(const fs::path& root, uint64_t seed) {
    auto ids = list_sample_ids(root);
    if (ids.empty()) throw std::runtime_error("dataset root is empty: " + root.string());
    for (const auto& id : ids) {
        const fs::path masks = root / "masks";
        if (!fs::exists(masks / (id + "_artery.png")))
            throw std::runtime_error("sample '" + id + "': missing artery mask");
        if (!fs::exists(masks / (id + "_vein.png")))
            throw std::runtime_error("sample '" + id + "': missing vein mask");
    }
    RngStream rng(seed);
    rng.shuffle(ids);
    const size_t n = ids.size();
    const size_t n_val = n / 10, n_test = n / 10;
    const size_t n_train = n - n_val - n_test;
    DatasetSplit split;
    split.seed = seed;
    split.train.assign(ids.begin(), ids.begin() + n_train);
    split.val.assign(ids.begin() + n_train, ids.begin() + n_train + n_val);
    split.test.assign(ids.begin() + n_train + n_val, ids.end());
    return split;
}

// ---- preprocessing -----------------------------------------------------------

/// Bilinear image resize, nearest-neighbour mask resize, intensities in [0,1].
inline FundusSample preprocess(const FundusSample& in, int64_t size) {
    if (size <= 0) throw std::invalid_argument("preprocess: size must be positive");
    namespace F = torch::nn::functional;
    FundusSample out;
    out.id = in.id;

    auto img = in.image;
    if (img.max().item<float>() > 1.0f) img = img / 255.0f;
    img = img.clamp(0, 1);
    if (in.height() != size || in.width() != size) {
        img = F::interpolate(img.unsqueeze(0), F::InterpolateFuncOptions()
                                                   .size(std::vector<int64_t>{size, size})
                                                   .mode(torch::kBilinear)
                                                   .align_corners(false))
                  .squeeze(0);
    }
    out.image = img;

    auto resize_mask = [&](const torch::Tensor& m) {
        if (m.size(0) == size && m.size(1) == size) return m.clone();
        auto f = m.to(torch::kFloat32).unsqueeze(0).unsqueeze(0);
        f = F::interpolate(f, F::InterpolateFuncOptions()
                                  .size(std::vector<int64_t>{size, size})
                                  .mode(torch::kNearest));
        return f.squeeze(0).squeeze(0).to(torch::kUInt8);
    };
    out.artery_mask = resize_mask(in.artery_mask);
    out.vein_mask = resize_mask(in.vein_mask);
    out.crossing_mask = resize_mask(in.crossing_mask);
    out.uncertain_mask = resize_mask(in.uncertain_mask);
    return out;
}

// ---- online augmentation -------------------------------------------------------

namespace detail {

/// Affine warp shared by image and masks; theta maps output pixels to input
/// sampling locations (rotation about the image centre plus a pixel shift).
inline torch::Tensor affine_warp(const torch::Tensor& chw, double cos_a, double sin_a,
                                 double shift_x_px, double shift_y_px, bool nearest) {
    namespace F = torch::nn::functional;
    const auto H = chw.size(1), W = chw.size(2);
    auto theta = torch::tensor({{cos_a, -sin_a, -2.0 * shift_x_px / static_cast<double>(W)},
                                {sin_a, cos_a, -2.0 * shift_y_px / static_cast<double>(H)}},
                               torch::kFloat64)
                     .unsqueeze(0)
                     .to(torch::kFloat32);
    auto grid = F::affine_grid(theta, {1, chw.size(0), H, W}, /*align_corners=*/false);
    auto warped = F::grid_sample(chw.unsqueeze(0), grid,
                                 F::GridSampleFuncOptions()
                                     .mode(nearest ? torch::kNearest : torch::kBilinear)
                                     .padding_mode(torch::kZeros)
                                     .align_corners(false));
    return warped.squeeze(0);
}

inline torch::Tensor rng_normal_like(const torch::Tensor& t, RngStream& rng) {
    auto out = torch::empty_like(t);
    auto flat = out.view(-1);
    auto acc = flat.accessor<float, 1>();
    for (int64_t i = 0; i < flat.size(0); ++i) acc[i] = static_cast<float>(rng.normal());
    return out;
}

inline torch::Tensor gaussian_blur(const torch::Tensor& chw, double sigma) {
    namespace F = torch::nn::functional;
    const int radius = std::max(1, static_cast<int>(std::ceil(2.5 * sigma)));
    auto x = torch::arange(-radius, radius + 1, torch::kFloat32);
    auto k = torch::exp(-x * x / (2.0 * sigma * sigma));
    k = k / k.sum();
    const auto C = chw.size(0);
    auto kh = k.view({1, 1, 1, -1}).repeat({C, 1, 1, 1});
    auto kv = k.view({1, 1, -1, 1}).repeat({C, 1, 1, 1});
    auto y = chw.unsqueeze(0);
    y = F::pad(y, F::PadFuncOptions({radius, radius, 0, 0}).mode(torch::kReplicate));
    y = F::conv2d(y, kh, F::Conv2dFuncOptions().groups(C));
    y = F::pad(y, F::PadFuncOptions({0, 0, radius, radius}).mode(torch::kReplicate));
    y = F::conv2d(y, kv, F::Conv2dFuncOptions().groups(C));
    return y.squeeze(0);
}

}  // namespace detail

/// Online augmentation. Geometric transforms share one parameter draw across
/// the image and every mask; photometric transforms touch the image alone.
/// All randomness comes from the caller's stream.
inline FundusSample augment(const FundusSample& in, const AugmentationConfig& cfg,
                            RngStream& rng) {
    cfg.validate();
    FundusSample s;
    s.id = in.id;
    s.image = in.image.clone();
    s.artery_mask = in.artery_mask.clone();
    s.vein_mask = in.vein_mask.clone();
    s.crossing_mask = in.crossing_mask.clone();
    s.uncertain_mask = in.uncertain_mask.clone();

    auto warp_all = [&](double cos_a, double sin_a, double sx, double sy) {
        s.image = detail::affine_warp(s.image, cos_a, sin_a, sx, sy, /*nearest=*/false);
        for (auto* m : {&s.artery_mask, &s.vein_mask, &s.crossing_mask, &s.uncertain_mask}) {
            auto f = m->to(torch::kFloat32).unsqueeze(0);
            f = detail::affine_warp(f, cos_a, sin_a, sx, sy, /*nearest=*/true);
            *m = f.squeeze(0).to(torch::kUInt8);
        }
    };
    auto flip_all = [&](int64_t dim_img) {
        s.image = torch::flip(s.image, {dim_img});
        for (auto* m : {&s.artery_mask, &s.vein_mask, &s.crossing_mask, &s.uncertain_mask})
            *m = torch::flip(*m, {dim_img - 1});
    };

    if (cfg.rotation.enabled && rng.bernoulli(cfg.rotation.prob)) {
        const double a = rng.uniform(-cfg.rotation_deg, cfg.rotation_deg) * M_PI / 180.0;
        warp_all(std::cos(a), std::sin(a), 0.0, 0.0);
    }
    if (cfg.vflip.enabled && rng.bernoulli(cfg.vflip.prob)) flip_all(1);
    if (cfg.hflip.enabled && rng.bernoulli(cfg.hflip.prob)) flip_all(2);
    if (cfg.translation.enabled && rng.bernoulli(cfg.translation.prob)) {
        const double lim = cfg.translation_frac;
        const double sx = rng.uniform(-lim, lim) * static_cast<double>(s.image.size(2));
        const double sy = rng.uniform(-lim, lim) * static_cast<double>(s.image.size(1));
        warp_all(1.0, 0.0, sx, sy);
    }
    if (cfg.contrast.enabled && rng.bernoulli(cfg.contrast.prob)) {
        const double gamma = rng.uniform(cfg.contrast_gamma_lo, cfg.contrast_gamma_hi);
        s.image = s.image.clamp(0, 1).pow(gamma);
    }
    if (cfg.intensity_shift.enabled && rng.bernoulli(cfg.intensity_shift.prob)) {
        const double off = rng.uniform(-cfg.intensity_offset, cfg.intensity_offset);
        s.image = (s.image + off).clamp(0, 1);
    }
    if (cfg.gaussian_noise.enabled && rng.bernoulli(cfg.gaussian_noise.prob)) {
        s.image = (s.image + cfg.noise_sigma * detail::rng_normal_like(s.image, rng)).clamp(0, 1);
    }
    if (cfg.gaussian_blur.enabled && rng.bernoulli(cfg.gaussian_blur.prob)) {
        const double sigma = rng.uniform(cfg.blur_sigma_lo, cfg.blur_sigma_hi);
        s.image = detail::gaussian_blur(s.image, sigma).clamp(0, 1);
    }
    return s;
}

// ---- synthetic samples ---------------------------------------------------------

struct SyntheticSample {
    FundusSample sample;
    TreeTopology artery_topo, vein_topo;
};

namespace detail {

inline torch::Tensor strength_to_tensor(const Grid<float>& g) {
    auto t = torch::empty({g.rows(), g.cols()}, torch::kFloat32);
    std::memcpy(t.data_ptr<float>(), g.data(), g.size() * sizeof(float));
    return t;
}

/// Fundus-style rendering: warm background with slow shading, vessels drawn
/// as tinted absorption weighted by the stroke strength field, mild blur and
/// sensor noise. Faint stroke windows end up close to the noise floor, which
/// is what makes connectivity genuinely hard to learn from pixels alone.
inline torch::Tensor render_fundus_image(const SyntheticMask& artery, const SyntheticMask& vein,
                                         RngStream& rng) {
    const int n = artery.mask.rows();
    auto yy = torch::arange(n, torch::kFloat32).view({n, 1}).expand({n, n}) / n;
    auto xx = torch::arange(n, torch::kFloat32).view({1, n}).expand({n, n}) / n;
    const double p1 = rng.uniform(0, 2 * M_PI), p2 = rng.uniform(0, 2 * M_PI);
    const double f1 = rng.uniform(1.5, 3.0), f2 = rng.uniform(1.5, 3.0);
    auto shade = 0.04 * torch::sin(2 * M_PI * f1 * xx + p1) + 0.04 * torch::sin(2 * M_PI * f2 * yy + p2);
    auto r2 = (xx - 0.5).pow(2) + (yy - 0.5).pow(2);
    auto base = 0.80 - 0.18 * r2 + shade;

    auto sa = strength_to_tensor(artery.strength);
    auto sv = strength_to_tensor(vein.strength);
    auto img = torch::stack({base - 0.16 * sa - 0.36 * sv,
                             base * 0.62 - 0.30 * sa - 0.30 * sv,
                             base * 0.45 - 0.26 * sa - 0.20 * sv});
    img = gaussian_blur(img, 0.6);
    img = img + 0.02f * rng_normal_like(img, rng);
    return img.clamp(0.0, 1.0);
}

}  // namespace detail

/// Builds a full sample from one tree spec: artery and vein forests are grown
/// independently (derived seeds), their raster intersection becomes the
/// crossing channel, and the image is rendered from the stroke fields.
inline SyntheticSample generate_synthetic_tree(const SyntheticTreeSpec& spec,
                                               const ContrastProfile& contrast = {}) {
    SyntheticTreeSpec aspec = spec, vspec = spec;
    aspec.seed = spec.seed * 0x9e3779b97f4a7c15ULL + 1;
    vspec.seed = spec.seed * 0x9e3779b97f4a7c15ULL + 2;
    auto artery = generate_tree_mask(aspec, contrast);
    auto vein = generate_tree_mask(vspec, contrast);

    SyntheticSample out;
    out.artery_topo = artery.topo;
    out.vein_topo = vein.topo;

    FundusSample& s = out.sample;
    s.artery_mask = mask_to_tensor(artery.mask);
    s.vein_mask = mask_to_tensor(vein.mask);
    s.crossing_mask = (s.artery_mask & s.vein_mask).to(torch::kUInt8);
    s.uncertain_mask = torch::zeros_like(s.artery_mask);
    RngStream img_rng(spec.seed * 0x9e3779b97f4a7c15ULL + 3);
    s.image = detail::render_fundus_image(artery, vein, img_rng);
    s.validate();
    return out;
}

// ---- topology sidecars -----------------------------------------------------------

inline nlohmann::json topo_to_json(const TreeTopology& t) {
    nlohmann::json j;
    j["components"] = t.components;
    j["junctions"] = nlohmann::json::array();
    for (const auto& p : t.junctions) j["junctions"].push_back({p.row, p.col});
    j["polylines"] = nlohmann::json::array();
    for (const auto& poly : t.polylines) {
        nlohmann::json jp = nlohmann::json::array();
        for (const auto& v : poly) jp.push_back({v[0], v[1]});
        j["polylines"].push_back(jp);
    }
    return j;
}

inline TreeTopology topo_from_json(const nlohmann::json& j) {
    TreeTopology t;
    t.components = j.at("components").get<int>();
    for (const auto& p : j.at("junctions"))
        t.junctions.push_back({p.at(0).get<int>(), p.at(1).get<int>()});
    for (const auto& poly : j.at("polylines")) {
        std::vector<std::array<double, 2>> pl;
        for (const auto& v : poly) pl.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
        t.polylines.push_back(std::move(pl));
    }
    return t;
}

/// Writes a sample (and optional topology sidecar) in the dataset layout.
inline void save_sample(const fs::path& root, const FundusSample& s,
                        const TreeTopology* artery_topo = nullptr,
                        const TreeTopology* vein_topo = nullptr) {
    fs::create_directories(root / "images");
    fs::create_directories(root / "masks");
    save_image_png(root / "images" / (s.id + ".png"), s.image);
    save_mask_png(root / "masks" / (s.id + "_artery.png"), s.artery_mask);
    save_mask_png(root / "masks" / (s.id + "_vein.png"), s.vein_mask);
    if (s.crossing_mask.to(torch::kBool).any().item<bool>())
        save_mask_png(root / "masks" / (s.id + "_crossing.png"), s.crossing_mask);
    if (s.uncertain_mask.to(torch::kBool).any().item<bool>())
        save_mask_png(root / "masks" / (s.id + "_uncertain.png"), s.uncertain_mask);
    if (artery_topo && vein_topo) {
        fs::create_directories(root / "topo");
        nlohmann::json j;
        j["artery"] = topo_to_json(*artery_topo);
        j["vein"] = topo_to_json(*vein_topo);
        std::ofstream f(root / "topo" / (s.id + "_topo.json"));
        f << j.dump(2) << "\n";
    }
}

}  // namespace vesseltopo
