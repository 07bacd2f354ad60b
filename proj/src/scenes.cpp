#include "hdrsim/scenes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hdrsim/photometry.hpp"

namespace hdrsim {

namespace {

// CIE D65 relative spectral power, 380..730 nm at 10 nm.
constexpr double kD65StartNm = 380.0;
constexpr double kD65StepNm = 10.0;
constexpr double kD65[] = {49.98,  54.65,  82.75,  91.49,  93.43,  86.68,  104.86, 117.01, 117.81,
                           114.86, 115.92, 108.81, 109.35, 107.80, 104.79, 107.69, 104.41, 104.05,
                           100.00, 96.33,  95.79,  88.69,  90.01,  89.60,  87.70,  83.29,  83.70,
                           80.03,  80.21,  82.28,  78.28,  69.72,  71.61,  74.35,  61.60,  69.89};

double d65_relative(double lambda_nm) {
    const double pos = (lambda_nm - kD65StartNm) / kD65StepNm;
    const double last = static_cast<double>(std::size(kD65) - 1);
    if (pos <= 0.0) return kD65[0];
    if (pos >= last) return kD65[std::size(kD65) - 1];
    const std::size_t i = static_cast<std::size_t>(pos);
    const double f = pos - static_cast<double>(i);
    return kD65[i] * (1.0 - f) + kD65[i + 1] * f;
}

void fill_flat(SpectralImage& img, std::size_t r, std::size_t c, double photon_rate) {
    for (std::size_t w = 0; w < img.grid.count; ++w) img.at(r, c, w) = photon_rate;
}

// Smooth illustrative reflectances for the 24-patch chart: a base level plus
// up to two Gaussian humps, clamped to a physical range.
struct PatchShape {
    double base, a1, c1, w1, a2, c2, w2;
};

constexpr PatchShape kChartPatches[24] = {
    // row 1: dark skin, light skin, blue sky, foliage, blue flower, bluish green
    {0.06, 0.12, 620, 60, 0.04, 450, 40},  {0.18, 0.30, 610, 70, 0.10, 460, 50},
    {0.10, 0.28, 460, 50, 0.05, 550, 60},  {0.05, 0.12, 540, 40, 0.08, 680, 40},
    {0.12, 0.25, 450, 45, 0.15, 640, 60},  {0.10, 0.35, 500, 55, 0.10, 460, 40},
    // row 2: orange, purplish blue, moderate red, purple, yellow green, orange yellow
    {0.05, 0.50, 620, 55, 0.00, 500, 40},  {0.08, 0.35, 445, 40, 0.08, 680, 50},
    {0.06, 0.40, 630, 50, 0.05, 440, 30},  {0.05, 0.18, 430, 35, 0.15, 680, 45},
    {0.06, 0.40, 550, 55, 0.10, 600, 50},  {0.05, 0.50, 590, 60, 0.00, 500, 40},
    // row 3: blue, green, red, yellow, magenta, cyan
    {0.05, 0.35, 440, 35, 0.00, 550, 40},  {0.05, 0.35, 530, 45, 0.00, 600, 40},
    {0.04, 0.45, 650, 45, 0.00, 500, 40},  {0.06, 0.55, 580, 70, 0.00, 450, 40},
    {0.08, 0.35, 440, 40, 0.35, 660, 55},  {0.08, 0.35, 480, 45, 0.10, 540, 40},
    // row 4: neutral sweep white to black
    {0.88, 0.00, 550, 50, 0.00, 550, 50},  {0.58, 0.00, 550, 50, 0.00, 550, 50},
    {0.36, 0.00, 550, 50, 0.00, 550, 50},  {0.20, 0.00, 550, 50, 0.00, 550, 50},
    {0.09, 0.00, 550, 50, 0.00, 550, 50},  {0.03, 0.00, 550, 50, 0.00, 550, 50},
};

double patch_reflectance(std::size_t patch, double lambda_nm) {
    const PatchShape& p = kChartPatches[patch];
    auto hump = [lambda_nm](double a, double c, double w) {
        const double d = (lambda_nm - c) / w;
        return a * std::exp(-0.5 * d * d);
    };
    return std::clamp(p.base + hump(p.a1, p.c1, p.w1) + hump(p.a2, p.c2, p.w2), 0.02, 0.95);
}

}  // namespace

double flat_spectrum_unit_luminance(const WavelengthGrid& grid) {
    double lum = 0.0;
    for (std::size_t w = 0; w < grid.count; ++w) {
        const double l = grid.lambda(w);
        lum += kLuminousEfficacy * photopic_v(l) * (kPlanckTimesC / (l * 1e-9)) * grid.step_nm;
    }
    return lum;
}

SpectralImage gen_flat_scene(std::size_t rows, std::size_t cols, const WavelengthGrid& grid,
                             double level_cd_m2) {
    grid.validate();
    if (!(level_cd_m2 >= 0.0)) throw ConfigError("gen_flat_scene: level must be >= 0");
    const double q = level_cd_m2 / flat_spectrum_unit_luminance(grid);
    return SpectralImage(rows, cols, grid, SpectralKind::radiance, q);
}

SpectralImage gen_point_grid_scene(std::size_t rows, std::size_t cols, const WavelengthGrid& grid,
                                   std::size_t n_sources, double top_level_cd_m2, double decade_step,
                                   double background_cd_m2) {
    grid.validate();
    if (n_sources < 1) throw ConfigError("gen_point_grid_scene: need at least one source");
    if (!(top_level_cd_m2 > background_cd_m2 && background_cd_m2 > 0.0))
        throw ConfigError("gen_point_grid_scene: require top_level > background > 0");
    if (!(decade_step > 1.0)) throw ConfigError("gen_point_grid_scene: decade_step must be > 1");
    const std::size_t slot = cols / n_sources;
    if (slot < 2 || rows < 2)
        throw ConfigError("gen_point_grid_scene: sources do not fit the scene geometry");

    const double unit = flat_spectrum_unit_luminance(grid);
    SpectralImage img(rows, cols, grid, SpectralKind::radiance, background_cd_m2 / unit);

    const std::size_t src = std::max<std::size_t>(1, std::min(slot / 4, rows / 4));
    const std::size_t r0 = rows / 2 - src / 2;
    for (std::size_t i = 0; i < n_sources; ++i) {
        const double level = top_level_cd_m2 / std::pow(decade_step, static_cast<double>(i));
        const double q = level / unit;
        const std::size_t c0 = i * slot + slot / 2 - src / 2;
        for (std::size_t r = r0; r < r0 + src; ++r)
            for (std::size_t c = c0; c < c0 + src && c < cols; ++c) fill_flat(img, r, c, q);
    }
    return img;
}

RampScene gen_ramp_scene(std::size_t rows, std::size_t cols, const WavelengthGrid& grid, double decades,
                         double min_level_cd_m2) {
    grid.validate();
    if (!(decades > 0.0)) throw ConfigError("gen_ramp_scene: decades must be > 0");
    if (!(min_level_cd_m2 > 0.0)) throw ConfigError("gen_ramp_scene: min level must be > 0");

    const double unit = flat_spectrum_unit_luminance(grid);
    RampScene scene;
    scene.image = SpectralImage(rows, cols, grid, SpectralKind::radiance);
    scene.column_luminance_cd_m2.resize(cols);
    for (std::size_t c = 0; c < cols; ++c) {
        const double frac = cols > 1 ? static_cast<double>(c) / static_cast<double>(cols - 1) : 0.0;
        const double level = min_level_cd_m2 * std::pow(10.0, decades * frac);
        scene.column_luminance_cd_m2[c] = level;
        const double q = level / unit;
        for (std::size_t r = 0; r < rows; ++r) fill_flat(scene.image, r, c, q);
    }
    return scene;
}

LightGroup gen_tunnel_scene(std::size_t rows, std::size_t cols, const WavelengthGrid& grid,
                            double interior_cd_m2, double exit_cd_m2) {
    grid.validate();
    if (!(interior_cd_m2 > 0.0)) throw ConfigError("gen_tunnel_scene: interior level must be > 0");
    if (!(exit_cd_m2 >= 0.0)) throw ConfigError("gen_tunnel_scene: exit level must be >= 0");

    const double unit = flat_spectrum_unit_luminance(grid);
    LightGroup lg;
    for (auto& m : lg.members) m = SpectralImage(rows, cols, grid, SpectralKind::radiance);

    const double cy = 0.5 * static_cast<double>(rows - 1);
    const double cx = 0.5 * static_cast<double>(cols - 1);
    const double disk_r = static_cast<double>(std::min(rows, cols)) / 5.0;

    auto texture = [&](std::size_t r, std::size_t c) {
        const double tr = std::sin(2.0 * std::numbers::pi * 3.0 * static_cast<double>(r) / rows);
        const double tc = std::sin(2.0 * std::numbers::pi * 3.0 * static_cast<double>(c) / cols);
        return 1.0 + 0.3 * tr * tc;
    };
    auto in_disk = [&](std::size_t r, std::size_t c) {
        return std::hypot(static_cast<double>(r) - cy, static_cast<double>(c) - cx) <= disk_r;
    };

    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) {
            const double t = texture(r, c);
            if (in_disk(r, c))
                fill_flat(lg[LightGroupKey::sky], r, c, exit_cd_m2 * t / unit);
            else
                fill_flat(lg[LightGroupKey::otherlights], r, c, interior_cd_m2 * t / unit);
        }

    // Small interior features, kept clear of the exit disk.
    const std::size_t patch = std::max<std::size_t>(1, rows / 16);
    auto stamp = [&](SpectralImage& img, std::size_t r0, std::size_t c0, double level) {
        for (std::size_t r = r0; r < std::min(rows, r0 + patch); ++r)
            for (std::size_t c = c0; c < std::min(cols, c0 + patch); ++c)
                if (!in_disk(r, c)) fill_flat(img, r, c, level / unit);
    };
    stamp(lg[LightGroupKey::headlights], rows * 3 / 4, cols / 6, 40.0 * interior_cd_m2);
    stamp(lg[LightGroupKey::headlights], rows * 3 / 4, cols * 5 / 6, 40.0 * interior_cd_m2);
    for (std::size_t i = 1; i <= 3; ++i)
        stamp(lg[LightGroupKey::streetlights], rows / 8, i * cols / 4, 15.0 * interior_cd_m2);

    return lg;
}

SpectralImage gen_macbeth_scene(const WavelengthGrid& grid, std::size_t patch_px, double white_level_cd_m2) {
    grid.validate();
    if (patch_px < 1) throw ConfigError("gen_macbeth_scene: patch size must be >= 1");
    if (!(white_level_cd_m2 > 0.0)) throw ConfigError("gen_macbeth_scene: white level must be > 0");

    // Illuminant photon spectrum shape on the grid.
    std::vector<double> illum(grid.count);
    for (std::size_t w = 0; w < grid.count; ++w) {
        const double l = grid.lambda(w);
        illum[w] = d65_relative(l) * (l * 1e-9) / kPlanckTimesC;  // photons per relative watt
    }

    // Scale so the white patch (index 18) reaches the requested luminance.
    double white_lum = 0.0;
    for (std::size_t w = 0; w < grid.count; ++w) {
        const double l = grid.lambda(w);
        white_lum += kLuminousEfficacy * photopic_v(l) * (kPlanckTimesC / (l * 1e-9)) *
                     patch_reflectance(18, l) * illum[w] * grid.step_nm;
    }
    const double scale = white_level_cd_m2 / white_lum;

    SpectralImage img(4 * patch_px, 6 * patch_px, grid, SpectralKind::radiance);
    for (std::size_t pr = 0; pr < 4; ++pr)
        for (std::size_t pc = 0; pc < 6; ++pc) {
            const std::size_t patch = pr * 6 + pc;
            for (std::size_t w = 0; w < grid.count; ++w) {
                const double q = scale * illum[w] * patch_reflectance(patch, grid.lambda(w));
                for (std::size_t r = pr * patch_px; r < (pr + 1) * patch_px; ++r)
                    for (std::size_t c = pc * patch_px; c < (pc + 1) * patch_px; ++c) img.at(r, c, w) = q;
            }
        }
    return img;
}

}  // namespace hdrsim
