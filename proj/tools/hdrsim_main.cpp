// hdrsim command line: HDR image-systems simulation from spectral scenes to
// sensor captures, reconstruction and metrics.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

#include "hdrsim/export.hpp"
#include "hdrsim/flare.hpp"
#include "hdrsim/hdr_combine.hpp"
#include "hdrsim/isp.hpp"
#include "hdrsim/photometry.hpp"
#include "hdrsim/pipeline.hpp"
#include "hdrsim/scenes.hpp"
#include "hdrsim/sensor.hpp"
#include "hdrsim/sri_io.hpp"

using nlohmann::json;
using namespace hdrsim;

namespace {

void write_report(const std::string& path, const json& j) {
    if (path.empty()) return;
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out) throw IoError("cannot open report path '" + path + "'");
    out << j.dump(2) << "\n";
}

void write_matrix_csv(const std::string& path, const Image2D& img) {
    std::vector<std::string> cols(img.cols);
    for (std::size_t c = 0; c < img.cols; ++c) cols[c] = "c" + std::to_string(c);
    std::vector<std::vector<double>> rows(img.rows, std::vector<double>(img.cols));
    for (std::size_t r = 0; r < img.rows; ++r)
        for (std::size_t c = 0; c < img.cols; ++c) rows[r][c] = img.at(r, c);
    export_csv(path, cols, rows);
}

Image2D read_matrix_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    const auto rows = parse_csv(ss.str());
    if (rows.empty()) throw ParseError("empty CSV matrix in '" + path + "'");
    Image2D img(rows.size(), rows[0].size());
    for (std::size_t r = 0; r < img.rows; ++r) {
        if (rows[r].size() != img.cols) throw ParseError("ragged CSV matrix in '" + path + "'");
        for (std::size_t c = 0; c < img.cols; ++c) img.at(r, c) = rows[r][c];
    }
    return img;
}

Image2D to_mask_image(const BoolMask& m) {
    Image2D img(m.rows, m.cols);
    for (std::size_t p = 0; p < m.v.size(); ++p) img.v[p] = m.v[p] ? 1.0 : 0.0;
    return img;
}

BoolMask to_mask(const Image2D& img) {
    BoolMask m(img.rows, img.cols);
    for (std::size_t p = 0; p < img.v.size(); ++p) m.v[p] = img.v[p] != 0.0 ? 1 : 0;
    return m;
}

struct GridOpts {
    double start = 400.0, step = 10.0;
    std::size_t count = 31;
    WavelengthGrid grid() const { return {start, step, count}; }
    void attach(CLI::App* app) {
        app->add_option("--grid-start", start, "wavelength grid start (nm)");
        app->add_option("--grid-step", step, "wavelength grid step (nm)");
        app->add_option("--grid-count", count, "wavelength sample count");
    }
};

struct ApertureOpts {
    ApertureSpec spec;
    double rotation_deg = 0.0;
    void attach(CLI::App* app) {
        app->add_option("--blades", spec.n_blades, "aperture blade count (0 = circular)");
        app->add_option("--blade-rotation", rotation_deg, "blade rotation (degrees)");
        app->add_option("--pupil-diameter", spec.pupil_diameter_mm, "pupil diameter (mm)");
        app->add_option("--dust", spec.dust_count, "dust disk count");
        app->add_option("--scratches", spec.scratch_count, "scratch count");
        app->add_option("--opacity", spec.occlusion_opacity, "occluder opacity [0,1]");
        app->add_option("--aperture-seed", spec.seed, "occluder placement seed");
    }
    ApertureSpec resolved() const {
        ApertureSpec s = spec;
        s.blade_rotation_rad = rotation_deg * 3.14159265358979323846 / 180.0;
        return s;
    }
};

SensorSpec sensor_from_opts(const std::string& preset, std::size_t rows, std::size_t cols, double exposure,
                            double gain, std::uint64_t seed) {
    SensorSpec s = sensor_preset(preset);
    if (rows) s.rows = rows;
    if (cols) s.cols = cols;
    if (exposure > 0) s.exposure_s = exposure;
    if (gain > 0) s.analog_gain = gain;
    s.seed = seed;
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hdrsim: physics-based HDR image-systems simulator"};
    app.require_subcommand(1);
    unsigned threads = 1;
    app.add_option("--threads", threads, "worker threads (results are thread-count independent)");

    // gen-scene
    auto* gen = app.add_subcommand("gen-scene", "generate a synthetic spectral scene");
    std::string gen_type = "ramp", gen_out, gen_out_prefix, gen_report;
    std::size_t gen_rows = 64, gen_cols = 64, gen_sources = 4, gen_patch = 8;
    double gen_level = 100.0, gen_decades = 5.0, gen_min = 0.01, gen_top = 1e5, gen_step10 = 10.0,
           gen_bg = 0.1, gen_interior = 1.0, gen_exit = 1e5, gen_white = 100.0;
    GridOpts gen_grid;
    gen->add_option("--type", gen_type, "flat|ramp|point-grid|tunnel|macbeth")->required();
    gen->add_option("--rows", gen_rows);
    gen->add_option("--cols", gen_cols);
    gen_grid.attach(gen);
    gen->add_option("--level", gen_level, "flat level (cd/m^2)");
    gen->add_option("--decades", gen_decades, "ramp decades");
    gen->add_option("--min-level", gen_min, "ramp minimum (cd/m^2)");
    gen->add_option("--sources", gen_sources, "point-grid source count");
    gen->add_option("--top-level", gen_top, "point-grid top level (cd/m^2)");
    gen->add_option("--decade-step", gen_step10, "point-grid step factor");
    gen->add_option("--background", gen_bg, "point-grid background (cd/m^2)");
    gen->add_option("--interior", gen_interior, "tunnel interior level (cd/m^2)");
    gen->add_option("--exit-level", gen_exit, "tunnel exit level (cd/m^2)");
    gen->add_option("--patch-px", gen_patch, "macbeth patch size (pixels)");
    gen->add_option("--white-level", gen_white, "macbeth white level (cd/m^2)");
    gen->add_option("--out", gen_out, "output SRI path (single-image scenes)");
    gen->add_option("--out-prefix", gen_out_prefix, "output prefix for light-group members (tunnel)");
    gen->add_option("--report", gen_report, "JSON report path");

    // compose
    auto* comp = app.add_subcommand("compose", "compose a light group into one radiance image");
    std::array<std::string, 4> comp_files;
    std::array<double, 4> comp_w{1.0, 1.0, 1.0, 1.0};
    std::vector<std::string> comp_fixed;
    double comp_target_dr = -1.0, comp_target_mean = -1.0;
    std::string comp_out, comp_report;
    comp->add_option("--sky", comp_files[0])->required();
    comp->add_option("--headlights", comp_files[1])->required();
    comp->add_option("--streetlights", comp_files[2])->required();
    comp->add_option("--otherlights", comp_files[3])->required();
    comp->add_option("--w-sky", comp_w[0]);
    comp->add_option("--w-headlights", comp_w[1]);
    comp->add_option("--w-streetlights", comp_w[2]);
    comp->add_option("--w-otherlights", comp_w[3]);
    comp->add_option("--target-dr", comp_target_dr, "solve weights for this dynamic range (log10)");
    comp->add_option("--target-mean", comp_target_mean, "solve for this mean luminance (cd/m^2)");
    comp->add_option("--fixed", comp_fixed, "members whose weights stay fixed during the DR solve");
    comp->add_option("--out", comp_out)->required();
    comp->add_option("--report", comp_report);

    // psf
    auto* psf = app.add_subcommand("psf", "synthesize a scattering-flare PSF");
    ApertureOpts psf_ap;
    psf_ap.attach(psf);
    double psf_lambda = 550.0, psf_fnum = 4.0, psf_defocus = 0.0, psf_pitch = 0.0;
    std::size_t psf_n = 256, psf_pad = 4;
    std::string psf_csv, psf_png, psf_report;
    psf->add_option("--lambda", psf_lambda, "wavelength (nm)");
    psf->add_option("--f-number", psf_fnum);
    psf->add_option("--defocus", psf_defocus, "defocus coefficient (waves, Noll j=4)");
    psf->add_option("--pupil-grid", psf_n);
    psf->add_option("--pad-factor", psf_pad);
    psf->add_option("--pitch", psf_pitch, "resample kernel to this pitch (um), 0 keeps native");
    psf->add_option("--kernel-csv", psf_csv, "write the kernel as CSV");
    psf->add_option("--png", psf_png, "write a log-stretched kernel preview PNG");
    psf->add_option("--report", psf_report);

    // optics
    auto* opt = app.add_subcommand("optics", "render scene radiance to sensor irradiance");
    std::string opt_in, opt_out, opt_report, opt_mode = "flare";
    ApertureOpts opt_ap;
    opt_ap.attach(opt);
    double opt_fnum = 4.0, opt_focal = 6.0, opt_trans = 1.0, opt_k1 = 0.0, opt_pitch = 3.0,
           opt_defocus = 0.0;
    bool opt_ri = false;
    std::size_t opt_n = 256, opt_pad = 4;
    opt->add_option("--in", opt_in)->required();
    opt->add_option("--out", opt_out)->required();
    opt->add_option("--mode", opt_mode, "delta|flare");
    opt->add_option("--f-number", opt_fnum);
    opt->add_option("--focal-length", opt_focal, "focal length (mm)");
    opt->add_option("--transmission", opt_trans);
    opt->add_option("--k1", opt_k1, "radial distortion coefficient");
    opt->add_flag("--relative-illumination", opt_ri, "apply cos^4 falloff");
    opt->add_option("--pitch", opt_pitch, "sensor-plane pitch (um)");
    opt->add_option("--pupil-grid", opt_n);
    opt->add_option("--pad-factor", opt_pad);
    opt->add_option("--defocus", opt_defocus, "defocus coefficient (waves)");
    opt->add_option("--report", opt_report);

    // sensor
    auto* sen = app.add_subcommand("sensor", "expose an irradiance image");
    std::string sen_in, sen_prefix, sen_preset = "rgb-bayer-like", sen_report;
    std::size_t sen_rows = 0, sen_cols = 0;
    double sen_exposure = -1.0, sen_gain = -1.0;
    std::uint64_t sen_seed = 0;
    bool sen_split = false, sen_no_noise = false;
    sen->add_option("--in", sen_in)->required();
    sen->add_option("--out-prefix", sen_prefix)->required();
    sen->add_option("--preset", sen_preset, "rgb-bayer-like|rgbw-onsemi-like|splitpixel-3capture");
    sen->add_option("--rows", sen_rows);
    sen->add_option("--cols", sen_cols);
    sen->add_option("--exposure", sen_exposure, "exposure (s)");
    sen->add_option("--gain", sen_gain, "analog gain");
    sen->add_option("--seed", sen_seed);
    sen->add_flag("--split", sen_split, "3-capture split-pixel acquisition");
    sen->add_flag("--no-noise", sen_no_noise);
    sen->add_option("--report", sen_report);

    // combine
    auto* com = app.add_subcommand("combine", "fuse a 3-capture set into an HDR electron image");
    std::string com_prefix, com_out, com_report;
    com->add_option("--in-prefix", com_prefix, "prefix written by 'sensor --split'")->required();
    com->add_option("--out", com_out, "output electron image CSV")->required();
    com->add_option("--report", com_report);

    // demosaic
    auto* dem = app.add_subcommand("demosaic", "demosaic a mosaic voltage image");
    std::string dem_in, dem_cfa = "rggb", dem_png, dem_prefix, dem_report;
    dem->add_option("--in", dem_in, "mosaic CSV")->required();
    dem->add_option("--cfa", dem_cfa, "rggb|rgbw");
    dem->add_option("--out-prefix", dem_prefix, "write <prefix>.{r,g,b}.csv");
    dem->add_option("--png", dem_png, "render through the sensor color matrix to PNG");
    dem->add_option("--report", dem_report);

    // metrics
    auto* met = app.add_subcommand("metrics", "image-quality metrics between two spectral images");
    std::string met_a, met_b, met_report;
    met->add_option("--a", met_a)->required();
    met->add_option("--b", met_b)->required();
    met->add_option("--report", met_report);

    // profile
    auto* prof = app.add_subcommand("profile", "export a horizontal luminance profile");
    std::string prof_in, prof_out;
    std::size_t prof_row = 0;
    prof->add_option("--in", prof_in)->required();
    prof->add_option("--row", prof_row)->required();
    prof->add_option("--out", prof_out)->required();

    // pipeline
    auto* pipe = app.add_subcommand("pipeline", "run a full configuration");
    std::string pipe_config;
    pipe->add_option("--config", pipe_config)->required();

    CLI11_PARSE(app, argc, argv);
    set_thread_count(threads);

    try {
        if (*gen) {
            json rep;
            rep["options"] = {{"type", gen_type}, {"rows", gen_rows}, {"cols", gen_cols},
                              {"grid_start_nm", gen_grid.start}, {"grid_step_nm", gen_grid.step},
                              {"grid_count", gen_grid.count}};
            if (gen_type == "tunnel") {
                if (gen_out_prefix.empty()) throw ConfigError("tunnel scenes need --out-prefix");
                const LightGroup lg =
                    gen_tunnel_scene(gen_rows, gen_cols, gen_grid.grid(), gen_interior, gen_exit);
                rep["options"]["interior_cd_m2"] = gen_interior;
                rep["options"]["exit_cd_m2"] = gen_exit;
                for (std::size_t i = 0; i < kLightGroupSize; ++i) {
                    const std::string path = gen_out_prefix + "." + kLightGroupNames[i] + ".sri";
                    write_sri(path, lg.members[i]);
                    rep["outputs"][kLightGroupNames[i]] = path;
                }
            } else {
                if (gen_out.empty()) throw ConfigError("--out is required for single-image scenes");
                SpectralImage img;
                if (gen_type == "flat") {
                    img = gen_flat_scene(gen_rows, gen_cols, gen_grid.grid(), gen_level);
                    rep["options"]["level_cd_m2"] = gen_level;
                } else if (gen_type == "ramp") {
                    RampScene ramp = gen_ramp_scene(gen_rows, gen_cols, gen_grid.grid(), gen_decades, gen_min);
                    img = std::move(ramp.image);
                    rep["options"]["decades"] = gen_decades;
                    rep["options"]["min_level_cd_m2"] = gen_min;
                } else if (gen_type == "point-grid") {
                    img = gen_point_grid_scene(gen_rows, gen_cols, gen_grid.grid(), gen_sources, gen_top,
                                               gen_step10, gen_bg);
                    rep["options"]["n_sources"] = gen_sources;
                    rep["options"]["top_level_cd_m2"] = gen_top;
                    rep["options"]["decade_step"] = gen_step10;
                    rep["options"]["background_cd_m2"] = gen_bg;
                } else if (gen_type == "macbeth") {
                    img = gen_macbeth_scene(gen_grid.grid(), gen_patch, gen_white);
                    rep["options"]["patch_px"] = gen_patch;
                    rep["options"]["white_level_cd_m2"] = gen_white;
                } else {
                    throw ConfigError("unknown scene type '" + gen_type + "'");
                }
                write_sri(gen_out, img);
                rep["outputs"]["sri"] = gen_out;
                rep["scene"]["dynamic_range_log10"] = dynamic_range(luminance_map(img));
            }
            write_report(gen_report, rep);
        } else if (*comp) {
            LightGroup lg;
            for (std::size_t i = 0; i < kLightGroupSize; ++i) lg.members[i] = read_sri(comp_files[i]);
            GroupWeights w;
            for (std::size_t i = 0; i < kLightGroupSize; ++i) w.w[i] = comp_w[i];
            json rep;
            if (comp_target_dr > 0.0 || comp_target_mean > 0.0) {
                WeightTargets targets;
                if (comp_target_dr > 0.0) targets.dynamic_range = comp_target_dr;
                if (comp_target_mean > 0.0) targets.mean_luminance = comp_target_mean;
                FixedWeights fixed;
                for (const std::string& name : comp_fixed)
                    for (std::size_t i = 0; i < kLightGroupSize; ++i)
                        if (name == kLightGroupNames[i]) fixed.fixed[i] = true;
                const WeightSolveResult res = set_weights_for_target(lg, w, fixed, targets);
                w = res.weights;
                rep["solver"] = {{"achieved_dynamic_range", res.achieved_dr},
                                 {"achieved_mean_luminance", res.achieved_mean},
                                 {"dr_reached", res.dr_reached},
                                 {"mean_reached", res.mean_reached}};
            }
            const SpectralImage composed = compose_light_groups(lg, w);
            write_sri(comp_out, composed);
            for (std::size_t i = 0; i < kLightGroupSize; ++i) rep["weights"][kLightGroupNames[i]] = w.w[i];
            rep["scene"]["dynamic_range_log10"] = dynamic_range(luminance_map(composed));
            rep["outputs"]["sri"] = comp_out;
            write_report(comp_report, rep);
        } else if (*psf) {
            WavefrontSpec wf;
            wf.f_number = psf_fnum;
            wf.reference_lambda_nm = 550.0;
            if (psf_defocus != 0.0) wf.zernike.push_back({4, psf_defocus});
            const ApodizationMask mask = synthesize_apodization(psf_ap.resolved(), psf_n);
            const PupilFunction pupil = build_pupil(mask, wf, psf_lambda);
            PsfOptions options;
            options.pad_factor = psf_pad;
            PsfKernel kern = psf_from_pupil(pupil, options);
            if (psf_pitch > 0.0) kern = resample_kernel(kern, psf_pitch);
            json rep;
            rep["options"] = {{"lambda_nm", psf_lambda}, {"f_number", psf_fnum},
                              {"pupil_grid", psf_n},     {"pad_factor", psf_pad},
                              {"blades", psf_ap.spec.n_blades}, {"dust", psf_ap.spec.dust_count},
                              {"scratches", psf_ap.spec.scratch_count}, {"seed", psf_ap.spec.seed}};
            rep["kernel"] = {{"size", kern.k}, {"sum", kern.sum()}, {"pitch_um", kern.sample_pitch_um}};
            if (!psf_csv.empty()) {
                Image2D img(kern.k, kern.k);
                img.v = kern.values;
                write_matrix_csv(psf_csv, img);
                rep["outputs"]["kernel_csv"] = psf_csv;
            }
            if (!psf_png.empty()) {
                // log stretch over 6 decades for visibility
                Rgb8Image png(kern.k, kern.k);
                double peak = 0.0;
                for (double v : kern.values) peak = std::max(peak, v);
                for (std::size_t p = 0; p < kern.values.size(); ++p) {
                    const double v = kern.values[p];
                    double t = v > 0.0 ? 1.0 + std::log10(v / peak) / 6.0 : 0.0;
                    t = std::clamp(t, 0.0, 1.0);
                    const auto b = static_cast<std::uint8_t>(std::lround(t * 255.0));
                    png.data[p * 3 + 0] = png.data[p * 3 + 1] = png.data[p * 3 + 2] = b;
                }
                export_png(psf_png, png);
                rep["outputs"]["png"] = psf_png;
            }
            write_report(psf_report, rep);
            std::printf("psf: k=%zu sum=%.9f pitch=%.4f um\n", kern.k, kern.sum(), kern.sample_pitch_um);
        } else if (*opt) {
            const SpectralImage scene = read_sri(opt_in);
            OpticsSpec optics;
            optics.f_number = opt_fnum;
            optics.focal_length_mm = opt_focal;
            optics.transmission = opt_trans;
            optics.distortion_k1 = opt_k1;
            optics.relative_illumination = opt_ri;
            PsfStack stack;
            if (opt_mode == "delta") {
                stack = delta_psf_stack(scene.grid, opt_pitch);
            } else if (opt_mode == "flare") {
                WavefrontSpec wf;
                wf.f_number = opt_fnum;
                wf.focal_length_mm = opt_focal;
                if (opt_defocus != 0.0) wf.zernike.push_back({4, opt_defocus});
                PsfOptions options;
                options.pad_factor = opt_pad;
                const std::size_t dim = std::min(scene.rows, scene.cols);
                options.max_kernel = dim % 2 == 1 ? dim : dim - 1;
                stack = make_psf_stack(opt_ap.resolved(), wf, scene.grid, opt_n, opt_pitch, options);
            } else {
                throw ConfigError("optics mode must be delta or flare");
            }
            const SpectralImage irr = apply_optics(scene, stack, optics);
            write_sri(opt_out, irr);
            json rep;
            rep["options"] = {{"mode", opt_mode},       {"f_number", opt_fnum},
                              {"focal_length_mm", opt_focal}, {"transmission", opt_trans},
                              {"k1", opt_k1},           {"pitch_um", opt_pitch},
                              {"relative_illumination", opt_ri}};
            rep["outputs"]["sri"] = opt_out;
            write_report(opt_report, rep);
        } else if (*sen) {
            const SpectralImage irr = read_sri(sen_in);
            SensorSpec spec = sensor_from_opts(sen_preset, sen_rows, sen_cols, sen_exposure, sen_gain, sen_seed);
            json rep;
            rep["options"] = {{"preset", sen_preset},   {"rows", spec.rows},
                              {"cols", spec.cols},      {"exposure_s", spec.exposure_s},
                              {"analog_gain", spec.analog_gain}, {"seed", spec.seed},
                              {"noise", !sen_no_noise}, {"split", sen_split}};
            if (sen_split) {
                const SplitPixelSpec sp = split_pixel_preset();
                const CaptureSet caps = expose_split(irr, spec, sp, !sen_no_noise);
                write_matrix_csv(sen_prefix + ".lplg.csv", caps.lplg);
                write_matrix_csv(sen_prefix + ".lphg.csv", caps.lphg);
                write_matrix_csv(sen_prefix + ".splg.csv", caps.splg);
                write_matrix_csv(sen_prefix + ".sat_lplg.csv", to_mask_image(caps.sat_lplg));
                write_matrix_csv(sen_prefix + ".sat_lphg.csv", to_mask_image(caps.sat_lphg));
                write_matrix_csv(sen_prefix + ".sat_splg.csv", to_mask_image(caps.sat_splg));
                json meta;
                meta["sensor"] = {{"preset", sen_preset},
                                  {"rows", spec.rows},
                                  {"cols", spec.cols},
                                  {"exposure_s", spec.exposure_s},
                                  {"analog_gain", spec.analog_gain},
                                  {"seed", spec.seed},
                                  {"conversion_gain_v_per_e", spec.pixel.conversion_gain_v_per_e},
                                  {"voltage_swing_v", spec.pixel.voltage_swing_v},
                                  {"adc_bits", spec.pixel.adc_bits}};
                meta["split_pixel"] = {{"sensitivity_ratio", sp.sensitivity_ratio},
                                       {"gain_high", sp.gain_high},
                                       {"gain_low", sp.gain_low},
                                       {"area_split", sp.area_split}};
                std::ofstream meta_out(sen_prefix + ".meta.json", std::ios::trunc);
                meta_out << meta.dump(2) << "\n";
                rep["outputs"]["prefix"] = sen_prefix;
            } else {
                const Exposure exp = expose(irr, spec, !sen_no_noise);
                write_matrix_csv(sen_prefix + ".voltage.csv", exp.voltage);
                write_matrix_csv(sen_prefix + ".sat.csv", to_mask_image(exp.saturated));
                rep["outputs"]["prefix"] = sen_prefix;
            }
            write_report(sen_report, rep);
        } else if (*com) {
            std::ifstream meta_in(com_prefix + ".meta.json");
            if (!meta_in) throw IoError("cannot open '" + com_prefix + ".meta.json'");
            json meta = json::parse(meta_in);
            CaptureSet caps;
            caps.sensor = sensor_from_opts(meta["sensor"]["preset"].get<std::string>(),
                                           meta["sensor"]["rows"].get<std::size_t>(),
                                           meta["sensor"]["cols"].get<std::size_t>(),
                                           meta["sensor"]["exposure_s"].get<double>(),
                                           meta["sensor"]["analog_gain"].get<double>(),
                                           meta["sensor"]["seed"].get<std::uint64_t>());
            caps.split.sensitivity_ratio = meta["split_pixel"]["sensitivity_ratio"].get<double>();
            caps.split.gain_high = meta["split_pixel"]["gain_high"].get<double>();
            caps.split.gain_low = meta["split_pixel"]["gain_low"].get<double>();
            caps.split.area_split = meta["split_pixel"]["area_split"].get<double>();
            caps.lplg = read_matrix_csv(com_prefix + ".lplg.csv");
            caps.lphg = read_matrix_csv(com_prefix + ".lphg.csv");
            caps.splg = read_matrix_csv(com_prefix + ".splg.csv");
            caps.sat_lplg = to_mask(read_matrix_csv(com_prefix + ".sat_lplg.csv"));
            caps.sat_lphg = to_mask(read_matrix_csv(com_prefix + ".sat_lphg.csv"));
            caps.sat_splg = to_mask(read_matrix_csv(com_prefix + ".sat_splg.csv"));
            const InputReferredImage rec = combine3(caps);
            write_matrix_csv(com_out, rec.electrons);
            json rep;
            rep["valid_fraction"] = static_cast<double>(rec.valid.count()) /
                                    static_cast<double>(rec.valid.v.size());
            rep["outputs"]["electrons_csv"] = com_out;
            write_report(com_report, rep);
        } else if (*dem) {
            const Image2D mosaic = read_matrix_csv(dem_in);
            const ColorFilterArray cfa = dem_cfa == "rgbw" ? cfa_rgbw() : cfa_rggb();
            const RgbImage rgb =
                dem_cfa == "rgbw" ? demosaic_rgbw(mosaic, cfa) : demosaic_bilinear(mosaic, cfa);
            json rep;
            rep["options"] = {{"cfa", dem_cfa}, {"rows", rgb.rows}, {"cols", rgb.cols}};
            if (!dem_prefix.empty()) {
                const char* names[3] = {"r", "g", "b"};
                for (std::size_t ch = 0; ch < 3; ++ch) {
                    Image2D plane(rgb.rows, rgb.cols);
                    std::copy(rgb.plane(ch), rgb.plane(ch) + rgb.rows * rgb.cols, plane.v.begin());
                    write_matrix_csv(dem_prefix + "." + names[ch] + ".csv", plane);
                }
                rep["outputs"]["prefix"] = dem_prefix;
            }
            if (!dem_png.empty()) {
                WavelengthGrid grid;
                const auto m = fit_sensor_rgb_to_xyz(cfa, grid);
                const XyzImage xyz = apply_rgb_to_xyz(rgb, m);
                double peak = 0.0;
                for (std::size_t p = 0; p < xyz.rows * xyz.cols; ++p)
                    peak = std::max(peak, xyz.plane(1)[p]);
                export_png(dem_png, xyz_to_srgb_display(xyz, peak > 0.0 ? 1.0 / peak : 1.0));
                rep["outputs"]["png"] = dem_png;
            }
            write_report(dem_report, rep);
        } else if (*met) {
            const SpectralImage a = read_sri(met_a);
            const SpectralImage b = read_sri(met_b);
            const XyzImage xa = spectral_to_xyz(a);
            const XyzImage xb = spectral_to_xyz(b);
            double peak = 0.0;
            for (std::size_t p = 0; p < xa.rows * xa.cols; ++p) peak = std::max(peak, xa.plane(1)[p]);
            if (!(peak > 0.0)) peak = 1.0;
            const double s = ssim(xyz_luminance(xa), xyz_luminance(xb), peak);
            const Xyz white{kD65White.x * peak, kD65White.y * peak, kD65White.z * peak};
            const DeltaEResult de = delta_e(xa, xb, white);
            json rep;
            rep["ssim"] = s;
            rep["mean_delta_e"] = de.mean;
            write_report(met_report, rep);
            std::printf("ssim=%.6f mean_delta_e=%.6f\n", s, de.mean);
        } else if (*prof) {
            const SpectralImage img = read_sri(prof_in);
            const bool radiance = img.kind == SpectralKind::radiance;
            const Image2D lum = radiance ? luminance_map(img) : illuminance_map(img);
            export_profile_csv(prof_out, radiance ? "luminance_cd_m2" : "illuminance_lux",
                               line_profile(lum, prof_row));
        } else if (*pipe) {
            const SceneConfig cfg = load_scene_config(pipe_config);
            const RunResult res = run_pipeline(cfg);
            std::fputs(res.report.c_str(), stdout);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "hdrsim: error: %s\n", e.what());
        return 1;
    }
    return 0;
}
