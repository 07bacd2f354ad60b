#include "hdrsim/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "hdrsim/export.hpp"
#include "hdrsim/isp.hpp"
#include "hdrsim/photometry.hpp"
#include "hdrsim/scenes.hpp"
#include "hdrsim/sri_io.hpp"

namespace hdrsim {

namespace {

using nlohmann::json;

[[noreturn]] void stage_error(const std::string& stage, const std::exception& e) {
    throw StructuralError("pipeline stage '" + stage + "': " + e.what());
}

struct SceneData {
    SpectralImage composed;
    std::optional<LightGroup> group;
};

SceneData build_scene(const SceneConfig& cfg, json& report) {
    const SceneSection& s = cfg.scene;
    SceneData out;
    if (s.source == "generator") {
        const GeneratorConfig& g = s.generator;
        if (g.type == "flat") {
            out.composed = gen_flat_scene(s.rows, s.cols, s.grid, g.level_cd_m2);
        } else if (g.type == "ramp") {
            RampScene ramp = gen_ramp_scene(s.rows, s.cols, s.grid, g.decades, g.min_level_cd_m2);
            out.composed = std::move(ramp.image);
            report["scene"]["ramp_decades"] = g.decades;
        } else if (g.type == "point-grid") {
            out.composed = gen_point_grid_scene(s.rows, s.cols, s.grid, g.n_sources, g.top_level_cd_m2,
                                                g.decade_step, g.background_cd_m2);
        } else if (g.type == "tunnel") {
            out.group = gen_tunnel_scene(s.rows, s.cols, s.grid, g.interior_cd_m2, g.exit_cd_m2);
        } else if (g.type == "macbeth") {
            out.composed = gen_macbeth_scene(s.grid, g.patch_px, g.white_level_cd_m2);
        }
    } else if (s.source == "sri") {
        out.composed = read_sri(s.file);
    } else {
        LightGroup lg;
        for (std::size_t i = 0; i < kLightGroupSize; ++i) lg.members[i] = read_sri(s.group_files[i]);
        lg.validate();
        out.group = std::move(lg);
    }
    return out;
}

double mean_of(const Image2D& img) {
    double s = 0.0;
    for (double v : img.v) s += v;
    return img.v.empty() ? 0.0 : s / static_cast<double>(img.v.size());
}

json image_stats(const Image2D& img) {
    double lo = img.v.empty() ? 0.0 : img.v[0], hi = lo;
    for (double v : img.v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return json{{"min", lo}, {"max", hi}, {"mean", mean_of(img)}};
}

// Stats over valid pixels only; flagged pixels never feed metrics.
json masked_stats(const Image2D& img, const BoolMask& valid) {
    double lo = 0.0, hi = 0.0, sum = 0.0;
    std::size_t n = 0;
    for (std::size_t p = 0; p < img.v.size(); ++p) {
        if (!valid.v[p]) continue;
        if (n == 0) lo = hi = img.v[p];
        lo = std::min(lo, img.v[p]);
        hi = std::max(hi, img.v[p]);
        sum += img.v[p];
        ++n;
    }
    return json{{"min", lo}, {"max", hi}, {"mean", n ? sum / static_cast<double>(n) : 0.0},
                {"valid_pixels", n}};
}

}  // namespace

RunResult run_pipeline(const SceneConfig& cfg) {
    RunResult result;
    json report;
    report["version"] = kVersion;
    report["config"] = json::parse(scene_config_echo(cfg));

    // Scene + compose.
    SceneData scene;
    try {
        scene = build_scene(cfg, report);
        if (scene.group) {
            GroupWeights weights = cfg.compose.weights;
            if (cfg.compose.has_targets) {
                const WeightSolveResult solve =
                    set_weights_for_target(*scene.group, weights, cfg.compose.fixed, cfg.compose.targets);
                weights = solve.weights;
                report["compose"]["achieved_dynamic_range"] = solve.achieved_dr;
                report["compose"]["achieved_mean_luminance"] = solve.achieved_mean;
                report["compose"]["dr_reached"] = solve.dr_reached;
                report["compose"]["mean_reached"] = solve.mean_reached;
            }
            json wj;
            for (std::size_t i = 0; i < kLightGroupSize; ++i) wj[kLightGroupNames[i]] = weights.w[i];
            report["compose"]["weights"] = wj;
            result.scene_radiance = compose_light_groups(*scene.group, weights);
        } else {
            if (cfg.compose.present)
                throw ConfigError("the compose section needs a light-group scene (sri-group or tunnel)");
            result.scene_radiance = scene.composed;
        }
    } catch (const std::exception& e) {
        stage_error("scene", e);
    }

    // Scene statistics always go into the report.
    try {
        const Image2D lum = luminance_map(result.scene_radiance);
        report["scene"]["rows"] = result.scene_radiance.rows;
        report["scene"]["cols"] = result.scene_radiance.cols;
        report["scene"]["wavelengths"] = result.scene_radiance.grid.count;
        report["scene"]["mean_luminance_cd_m2"] = mean_of(lum);
        bool any_positive = false;
        for (double v : lum.v)
            if (v > 0.0) { any_positive = true; break; }
        if (any_positive) report["scene"]["dynamic_range_log10"] = dynamic_range(lum);
    } catch (const std::exception& e) {
        stage_error("scene-stats", e);
    }

    // Optics.
    double psf_pitch_um = cfg.sensor.present ? cfg.sensor.spec.pixel.pitch_um : 3.0;
    try {
        PsfStack stack;
        if (cfg.optics.mode == "flare") {
            PsfOptions opt = cfg.optics.psf_options;
            const std::size_t scene_dim = std::min(result.scene_radiance.rows, result.scene_radiance.cols);
            opt.max_kernel = scene_dim % 2 == 1 ? scene_dim : scene_dim - 1;
            stack = make_psf_stack(cfg.optics.aperture, cfg.optics.wavefront, result.scene_radiance.grid,
                                   cfg.optics.pupil_grid, psf_pitch_um, opt);
            json ksizes = json::array();
            for (const auto& k : stack.kernels) ksizes.push_back(k.k);
            report["optics"]["psf_kernel_sizes"] = ksizes;
        } else {
            stack = delta_psf_stack(result.scene_radiance.grid, psf_pitch_um);
        }
        report["optics"]["mode"] = cfg.optics.mode;
        report["optics"]["psf_pitch_um"] = stack.sample_pitch_um;
        result.irradiance = apply_optics(result.scene_radiance, stack, cfg.optics.optics);
        report["optics"]["mean_illuminance_lux"] = mean_of(illuminance_map(result.irradiance));
    } catch (const std::exception& e) {
        stage_error("optics", e);
    }

    // Sensor.
    if (cfg.sensor.present) {
        try {
            if (cfg.sensor.split) {
                result.captures =
                    expose_split(result.irradiance, cfg.sensor.spec, cfg.sensor.split_pixel, cfg.sensor.noise);
                const CaptureSet& c = *result.captures;
                report["sensor"]["lplg"] = image_stats(c.lplg);
                report["sensor"]["lphg"] = image_stats(c.lphg);
                report["sensor"]["splg"] = image_stats(c.splg);
                const double n = static_cast<double>(c.sat_lplg.v.size());
                report["sensor"]["sat_fraction_lplg"] = static_cast<double>(c.sat_lplg.count()) / n;
                report["sensor"]["sat_fraction_lphg"] = static_cast<double>(c.sat_lphg.count()) / n;
                report["sensor"]["sat_fraction_splg"] = static_cast<double>(c.sat_splg.count()) / n;
            } else {
                result.exposure = expose(result.irradiance, cfg.sensor.spec, cfg.sensor.noise);
                report["sensor"]["voltage"] = image_stats(result.exposure->voltage);
                report["sensor"]["sat_fraction"] =
                    static_cast<double>(result.exposure->saturated.count()) /
                    static_cast<double>(result.exposure->saturated.v.size());
            }
        } catch (const std::exception& e) {
            stage_error("sensor", e);
        }

        // Reconstruction.
        const std::string mode =
            !cfg.reconstruct_mode.empty() ? cfg.reconstruct_mode : (cfg.sensor.split ? "combine3" : "single");
        try {
            if (mode == "combine3" && result.captures) {
                result.reconstruction = combine3(*result.captures);
            } else if (result.exposure) {
                const PixelSpec& px = cfg.sensor.spec.pixel;
                result.reconstruction =
                    input_refer(result.exposure->voltage, px.conversion_gain_v_per_e,
                                cfg.sensor.spec.analog_gain, 1.0,
                                px.voltage_swing_v / static_cast<double>((1u << px.adc_bits) - 1u));
            }
            if (result.reconstruction) {
                report["reconstruction"]["mode"] = mode;
                report["reconstruction"]["electrons"] =
                    masked_stats(result.reconstruction->electrons, result.reconstruction->valid);
                report["reconstruction"]["valid_fraction"] =
                    static_cast<double>(result.reconstruction->valid.count()) /
                    static_cast<double>(result.reconstruction->valid.v.size());
                report["reconstruction"]["quantization_floor_e"] =
                    result.reconstruction->quantization_floor_e;
            }
        } catch (const std::exception& e) {
            stage_error("reconstruct", e);
        }
    }

    // Metrics.
    for (const MetricEntry& m : cfg.metrics) {
        try {
            if (m.type == "scene_dynamic_range") {
                report["metrics"]["scene_dynamic_range_log10"] =
                    dynamic_range(luminance_map(result.scene_radiance));
            } else if (m.type == "photon_budget") {
                if (!cfg.sensor.present)
                    throw ConfigError("photon_budget metric needs a sensor stage for pixel geometry");
                const PixelSpec& px = cfg.sensor.spec.pixel;
                report["metrics"]["photon_budget"] = {
                    {"luminance_cd_m2", m.luminance_cd_m2},
                    {"photons_per_pixel",
                     photon_count_estimate(m.luminance_cd_m2, cfg.optics.optics.f_number, px.pitch_um,
                                           cfg.sensor.spec.exposure_s, px.fill_factor)}};
            } else if (m.type == "profile") {
                std::vector<double> prof;
                std::string what;
                if (result.reconstruction) {
                    prof = line_profile(result.reconstruction->electrons, m.row);
                    what = "reconstruction_electrons";
                } else {
                    prof = line_profile(luminance_map(result.scene_radiance), m.row);
                    what = "scene_luminance";
                }
                report["metrics"]["profile"] = {{"row", m.row}, {"series", what}};
                if (!cfg.outputs.profile_csv.empty()) export_profile_csv(cfg.outputs.profile_csv, what, prof);
            } else if (m.type == "demosaic_quality") {
                if (!cfg.sensor.present || cfg.sensor.split)
                    throw ConfigError("demosaic_quality metric needs a non-split sensor stage");
                const DemosaicQualityResult q =
                    demosaic_quality(result.irradiance, cfg.sensor.spec, cfg.sensor.noise);
                report["metrics"]["demosaic_quality"] = {{"ssim", q.ssim},
                                                         {"mean_delta_e", q.mean_delta_e},
                                                         {"mean_reference_y", q.mean_reference_y}};
            }
        } catch (const std::exception& e) {
            stage_error("metrics(" + m.type + ")", e);
        }
    }

    // Artifacts.
    try {
        if (!cfg.outputs.scene_sri.empty()) write_sri(cfg.outputs.scene_sri, result.scene_radiance);
        if (!cfg.outputs.irradiance_sri.empty()) write_sri(cfg.outputs.irradiance_sri, result.irradiance);
        if (!cfg.outputs.scene_png.empty()) {
            const XyzImage xyz = spectral_to_xyz(result.scene_radiance);
            double peak = 0.0;
            for (std::size_t p = 0; p < xyz.rows * xyz.cols; ++p) peak = std::max(peak, xyz.plane(1)[p]);
            const double scale =
                cfg.outputs.png_exposure_scale > 0.0 ? cfg.outputs.png_exposure_scale
                                                     : (peak > 0.0 ? 1.0 / peak : 1.0);
            export_png(cfg.outputs.scene_png, xyz_to_srgb_display(xyz, scale));
        }
        if (!cfg.outputs.reconstruction_csv.empty() && result.reconstruction) {
            const Image2D& e = result.reconstruction->electrons;
            std::vector<std::string> cols(e.cols);
            for (std::size_t c = 0; c < e.cols; ++c) cols[c] = "c" + std::to_string(c);
            std::vector<std::vector<double>> rows(e.rows, std::vector<double>(e.cols));
            for (std::size_t r = 0; r < e.rows; ++r)
                for (std::size_t c = 0; c < e.cols; ++c) rows[r][c] = e.at(r, c);
            export_csv(cfg.outputs.reconstruction_csv, cols, rows);
        }
    } catch (const std::exception& e) {
        stage_error("outputs", e);
    }

    result.report = report.dump(2) + "\n";
    if (!cfg.outputs.report.empty()) {
        std::ofstream out(cfg.outputs.report, std::ios::trunc | std::ios::binary);
        if (!out) throw IoError("pipeline: cannot open report path '" + cfg.outputs.report + "'");
        out << result.report;
    }
    return result;
}

}  // namespace hdrsim
