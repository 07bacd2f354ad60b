#include "hdrsim/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "hdrsim/rng.hpp"

namespace hdrsim {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& path, const std::string& what) {
    throw ConfigError("config: " + path + ": " + what);
}

void require_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
    if (!obj.is_object()) bad(path, "expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key())) bad(path + "." + it.key(), "unknown key");
}

double get_num(const json& obj, const std::string& path, const std::string& key, double def,
               bool required = false) {
    if (!obj.contains(key)) {
        if (required) bad(path + "." + key, "required");
        return def;
    }
    if (!obj[key].is_number()) bad(path + "." + key, "expected a number");
    return obj[key].get<double>();
}

std::size_t get_size(const json& obj, const std::string& path, const std::string& key, std::size_t def,
                     bool required = false) {
    if (!obj.contains(key)) {
        if (required) bad(path + "." + key, "required");
        return def;
    }
    if (!obj[key].is_number_unsigned()) bad(path + "." + key, "expected a nonnegative integer");
    return obj[key].get<std::size_t>();
}

bool get_bool(const json& obj, const std::string& path, const std::string& key, bool def) {
    if (!obj.contains(key)) return def;
    if (!obj[key].is_boolean()) bad(path + "." + key, "expected a boolean");
    return obj[key].get<bool>();
}

std::string get_str(const json& obj, const std::string& path, const std::string& key,
                    const std::string& def, bool required = false) {
    if (!obj.contains(key)) {
        if (required) bad(path + "." + key, "required");
        return def;
    }
    if (!obj[key].is_string()) bad(path + "." + key, "expected a string");
    return obj[key].get<std::string>();
}

std::pair<double, double> get_range(const json& obj, const std::string& path, const std::string& key,
                                    std::pair<double, double> def) {
    if (!obj.contains(key)) return def;
    const json& a = obj[key];
    if (!a.is_array() || a.size() != 2 || !a[0].is_number() || !a[1].is_number())
        bad(path + "." + key, "expected [min, max]");
    return {a[0].get<double>(), a[1].get<double>()};
}

WavelengthGrid parse_grid(const json& obj, const std::string& path) {
    require_keys(obj, path, {"start_nm", "step_nm", "count"});
    WavelengthGrid g;
    g.start_nm = get_num(obj, path, "start_nm", 400.0, true);
    g.step_nm = get_num(obj, path, "step_nm", 10.0, true);
    g.count = get_size(obj, path, "count", 31, true);
    try {
        g.validate();
    } catch (const DomainError& e) {
        bad(path, e.what());
    }
    return g;
}

GeneratorConfig parse_generator(const json& obj, const std::string& path) {
    require_keys(obj, path,
                 {"type", "level_cd_m2", "decades", "min_level_cd_m2", "n_sources", "top_level_cd_m2",
                  "decade_step", "background_cd_m2", "interior_cd_m2", "exit_cd_m2", "patch_px",
                  "white_level_cd_m2"});
    GeneratorConfig g;
    g.type = get_str(obj, path, "type", "", true);
    static const std::set<std::string> kinds{"flat", "ramp", "point-grid", "tunnel", "macbeth"};
    if (!kinds.count(g.type)) bad(path + ".type", "unknown generator '" + g.type + "'");
    g.level_cd_m2 = get_num(obj, path, "level_cd_m2", g.level_cd_m2);
    g.decades = get_num(obj, path, "decades", g.decades);
    g.min_level_cd_m2 = get_num(obj, path, "min_level_cd_m2", g.min_level_cd_m2);
    g.n_sources = get_size(obj, path, "n_sources", g.n_sources);
    g.top_level_cd_m2 = get_num(obj, path, "top_level_cd_m2", g.top_level_cd_m2);
    g.decade_step = get_num(obj, path, "decade_step", g.decade_step);
    g.background_cd_m2 = get_num(obj, path, "background_cd_m2", g.background_cd_m2);
    g.interior_cd_m2 = get_num(obj, path, "interior_cd_m2", g.interior_cd_m2);
    g.exit_cd_m2 = get_num(obj, path, "exit_cd_m2", g.exit_cd_m2);
    g.patch_px = get_size(obj, path, "patch_px", g.patch_px);
    g.white_level_cd_m2 = get_num(obj, path, "white_level_cd_m2", g.white_level_cd_m2);
    return g;
}

SceneSection parse_scene(const json& obj, const std::string& path) {
    require_keys(obj, path, {"source", "rows", "cols", "grid", "generator", "file", "files"});
    SceneSection s;
    s.source = get_str(obj, path, "source", "", true);
    s.rows = get_size(obj, path, "rows", 64);
    s.cols = get_size(obj, path, "cols", 64);
    if (obj.contains("grid")) s.grid = parse_grid(obj["grid"], path + ".grid");
    if (s.source == "generator") {
        if (!obj.contains("generator")) bad(path + ".generator", "required for source=generator");
        s.generator = parse_generator(obj["generator"], path + ".generator");
    } else if (s.source == "sri") {
        s.file = get_str(obj, path, "file", "", true);
    } else if (s.source == "sri-group") {
        if (!obj.contains("files")) bad(path + ".files", "required for source=sri-group");
        const json& f = obj["files"];
        require_keys(f, path + ".files", {"sky", "headlights", "streetlights", "otherlights"});
        for (std::size_t i = 0; i < kLightGroupSize; ++i)
            s.group_files[i] = get_str(f, path + ".files", kLightGroupNames[i], "", true);
    } else {
        bad(path + ".source", "must be generator, sri or sri-group");
    }
    return s;
}

ComposeSection parse_compose(const json& obj, const std::string& path) {
    require_keys(obj, path, {"weights", "targets", "fixed"});
    ComposeSection c;
    c.present = true;
    if (obj.contains("weights")) {
        const json& w = obj["weights"];
        require_keys(w, path + ".weights", {"sky", "headlights", "streetlights", "otherlights"});
        for (std::size_t i = 0; i < kLightGroupSize; ++i)
            c.weights.w[i] = get_num(w, path + ".weights", kLightGroupNames[i], 1.0);
    }
    if (obj.contains("targets")) {
        c.has_targets = true;
        const json& t = obj["targets"];
        require_keys(t, path + ".targets", {"dynamic_range", "mean_luminance"});
        if (t.contains("dynamic_range"))
            c.targets.dynamic_range = get_num(t, path + ".targets", "dynamic_range", 0.0, true);
        if (t.contains("mean_luminance"))
            c.targets.mean_luminance = get_num(t, path + ".targets", "mean_luminance", 0.0, true);
    }
    if (obj.contains("fixed")) {
        const json& f = obj["fixed"];
        if (!f.is_array()) bad(path + ".fixed", "expected an array of member names");
        for (const auto& name : f) {
            if (!name.is_string()) bad(path + ".fixed", "expected member names");
            bool found = false;
            for (std::size_t i = 0; i < kLightGroupSize; ++i)
                if (name.get<std::string>() == kLightGroupNames[i]) {
                    c.fixed.fixed[i] = true;
                    found = true;
                }
            if (!found) bad(path + ".fixed", "unknown member '" + name.get<std::string>() + "'");
        }
    }
    return c;
}

OpticsSection parse_optics(const json& obj, const std::string& path, std::uint64_t master_seed) {
    require_keys(obj, path,
                 {"mode", "f_number", "focal_length_mm", "transmission", "distortion_k1",
                  "relative_illumination", "aperture", "wavefront", "pupil_grid", "pad_factor",
                  "crop_energy_tail"});
    OpticsSection o;
    o.mode = get_str(obj, path, "mode", "delta");
    if (o.mode != "delta" && o.mode != "flare") bad(path + ".mode", "must be delta or flare");
    o.optics.f_number = get_num(obj, path, "f_number", 4.0);
    o.optics.focal_length_mm = get_num(obj, path, "focal_length_mm", 6.0);
    o.optics.transmission = get_num(obj, path, "transmission", 1.0);
    o.optics.distortion_k1 = get_num(obj, path, "distortion_k1", 0.0);
    o.optics.relative_illumination = get_bool(obj, path, "relative_illumination", false);
    o.wavefront.f_number = o.optics.f_number;
    o.wavefront.focal_length_mm = o.optics.focal_length_mm;
    o.pupil_grid = get_size(obj, path, "pupil_grid", 256);
    o.psf_options.pad_factor = get_size(obj, path, "pad_factor", 4);
    o.psf_options.crop_energy_tail = get_num(obj, path, "crop_energy_tail", 1e-4);
    if (obj.contains("aperture")) {
        const json& a = obj["aperture"];
        require_keys(a, path + ".aperture",
                     {"n_blades", "blade_rotation_deg", "pupil_diameter_mm", "dust_count",
                      "dust_radius_range", "scratch_count", "scratch_width_range", "scratch_length_range",
                      "occlusion_opacity", "seed"});
        o.aperture.n_blades = static_cast<int>(get_size(a, path + ".aperture", "n_blades", 0));
        o.aperture.blade_rotation_rad =
            get_num(a, path + ".aperture", "blade_rotation_deg", 0.0) * 3.14159265358979323846 / 180.0;
        o.aperture.pupil_diameter_mm = get_num(a, path + ".aperture", "pupil_diameter_mm", 1.5);
        o.aperture.dust_count = static_cast<int>(get_size(a, path + ".aperture", "dust_count", 0));
        o.aperture.dust_radius_range =
            get_range(a, path + ".aperture", "dust_radius_range", o.aperture.dust_radius_range);
        o.aperture.scratch_count = static_cast<int>(get_size(a, path + ".aperture", "scratch_count", 0));
        o.aperture.scratch_width_range =
            get_range(a, path + ".aperture", "scratch_width_range", o.aperture.scratch_width_range);
        o.aperture.scratch_length_range =
            get_range(a, path + ".aperture", "scratch_length_range", o.aperture.scratch_length_range);
        o.aperture.occlusion_opacity = get_num(a, path + ".aperture", "occlusion_opacity", 1.0);
        if (a.contains("seed")) {
            o.aperture.seed = static_cast<std::uint64_t>(get_size(a, path + ".aperture", "seed", 0));
            o.aperture_seed_explicit = true;
        }
    }
    if (!o.aperture_seed_explicit) o.aperture.seed = derive_seed(master_seed, "aperture");
    if (obj.contains("wavefront")) {
        const json& w = obj["wavefront"];
        require_keys(w, path + ".wavefront", {"zernike", "reference_lambda_nm"});
        o.wavefront.reference_lambda_nm = get_num(w, path + ".wavefront", "reference_lambda_nm", 550.0);
        if (w.contains("zernike")) {
            if (!w["zernike"].is_array()) bad(path + ".wavefront.zernike", "expected [[index, waves], ...]");
            for (const auto& t : w["zernike"]) {
                if (!t.is_array() || t.size() != 2 || !t[0].is_number_integer() || !t[1].is_number())
                    bad(path + ".wavefront.zernike", "expected [index, waves] pairs");
                o.wavefront.zernike.push_back({t[0].get<int>(), t[1].get<double>()});
            }
        }
    }
    return o;
}

SensorSection parse_sensor(const json& obj, const std::string& path, std::uint64_t master_seed) {
    require_keys(obj, path,
                 {"preset", "rows", "cols", "exposure_s", "analog_gain", "noise", "seed", "split",
                  "split_pixel", "pixel"});
    SensorSection s;
    s.present = true;
    const std::string preset = get_str(obj, path, "preset", "rgb-bayer-like");
    try {
        s.spec = sensor_preset(preset);
    } catch (const ConfigError& e) {
        bad(path + ".preset", e.what());
    }
    s.spec.rows = get_size(obj, path, "rows", s.spec.rows);
    s.spec.cols = get_size(obj, path, "cols", s.spec.cols);
    s.spec.exposure_s = get_num(obj, path, "exposure_s", s.spec.exposure_s);
    s.spec.analog_gain = get_num(obj, path, "analog_gain", s.spec.analog_gain);
    s.noise = get_bool(obj, path, "noise", true);
    if (obj.contains("pixel")) {
        const json& p = obj["pixel"];
        require_keys(p, path + ".pixel",
                     {"pitch_um", "fill_factor", "well_capacity_e", "read_noise_e", "dark_current_e_per_s",
                      "conversion_gain_v_per_e", "prnu_sigma", "dsnu_sigma_e", "voltage_swing_v",
                      "adc_bits"});
        PixelSpec& px = s.spec.pixel;
        px.pitch_um = get_num(p, path + ".pixel", "pitch_um", px.pitch_um);
        px.fill_factor = get_num(p, path + ".pixel", "fill_factor", px.fill_factor);
        px.well_capacity_e = get_num(p, path + ".pixel", "well_capacity_e", px.well_capacity_e);
        px.read_noise_e = get_num(p, path + ".pixel", "read_noise_e", px.read_noise_e);
        px.dark_current_e_per_s = get_num(p, path + ".pixel", "dark_current_e_per_s", px.dark_current_e_per_s);
        px.conversion_gain_v_per_e =
            get_num(p, path + ".pixel", "conversion_gain_v_per_e", px.conversion_gain_v_per_e);
        px.prnu_sigma = get_num(p, path + ".pixel", "prnu_sigma", px.prnu_sigma);
        px.dsnu_sigma_e = get_num(p, path + ".pixel", "dsnu_sigma_e", px.dsnu_sigma_e);
        px.voltage_swing_v = get_num(p, path + ".pixel", "voltage_swing_v", px.voltage_swing_v);
        px.adc_bits = static_cast<int>(get_size(p, path + ".pixel", "adc_bits",
                                                static_cast<std::size_t>(px.adc_bits)));
    }
    if (obj.contains("seed")) {
        s.spec.seed = static_cast<std::uint64_t>(get_size(obj, path, "seed", 0));
        s.seed_explicit = true;
    } else {
        s.spec.seed = derive_seed(master_seed, "sensor");
    }
    s.split = get_bool(obj, path, "split", false);
    if (obj.contains("split_pixel")) {
        const json& sp = obj["split_pixel"];
        require_keys(sp, path + ".split_pixel", {"sensitivity_ratio", "gain_high", "gain_low", "area_split"});
        s.split_pixel.sensitivity_ratio =
            get_num(sp, path + ".split_pixel", "sensitivity_ratio", s.split_pixel.sensitivity_ratio);
        s.split_pixel.gain_high = get_num(sp, path + ".split_pixel", "gain_high", s.split_pixel.gain_high);
        s.split_pixel.gain_low = get_num(sp, path + ".split_pixel", "gain_low", s.split_pixel.gain_low);
        s.split_pixel.area_split = get_num(sp, path + ".split_pixel", "area_split", s.split_pixel.area_split);
    }
    return s;
}

std::vector<MetricEntry> parse_metrics(const json& arr, const std::string& path) {
    if (!arr.is_array()) bad(path, "expected an array");
    static const std::set<std::string> kinds{"scene_dynamic_range", "photon_budget", "profile",
                                             "demosaic_quality"};
    std::vector<MetricEntry> out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const json& e = arr[i];
        const std::string p = path + "[" + std::to_string(i) + "]";
        MetricEntry m;
        if (e.is_string()) {
            m.type = e.get<std::string>();
        } else if (e.is_object()) {
            require_keys(e, p, {"type", "row", "luminance_cd_m2"});
            m.type = get_str(e, p, "type", "", true);
            m.row = get_size(e, p, "row", 0);
            m.luminance_cd_m2 = get_num(e, p, "luminance_cd_m2", 1.0);
        } else {
            bad(p, "expected a string or object");
        }
        if (!kinds.count(m.type)) bad(p, "unknown metric '" + m.type + "'");
        out.push_back(m);
    }
    return out;
}

OutputsSection parse_outputs(const json& obj, const std::string& path) {
    require_keys(obj, path,
                 {"report", "scene_sri", "irradiance_sri", "scene_png", "profile_csv",
                  "reconstruction_csv", "png_exposure_scale"});
    OutputsSection o;
    o.report = get_str(obj, path, "report", "");
    o.scene_sri = get_str(obj, path, "scene_sri", "");
    o.irradiance_sri = get_str(obj, path, "irradiance_sri", "");
    o.scene_png = get_str(obj, path, "scene_png", "");
    o.profile_csv = get_str(obj, path, "profile_csv", "");
    o.reconstruction_csv = get_str(obj, path, "reconstruction_csv", "");
    o.png_exposure_scale = get_num(obj, path, "png_exposure_scale", 0.0);
    return o;
}

}  // namespace

SceneConfig parse_scene_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    require_keys(root, "$",
                 {"master_seed", "scene", "compose", "optics", "sensor", "reconstruct", "metrics",
                  "outputs"});

    SceneConfig cfg;
    cfg.master_seed = static_cast<std::uint64_t>(get_size(root, "$", "master_seed", 0));
    if (!root.contains("scene")) bad("$.scene", "required");
    cfg.scene = parse_scene(root["scene"], "$.scene");
    if (root.contains("compose")) cfg.compose = parse_compose(root["compose"], "$.compose");
    if (root.contains("optics")) cfg.optics = parse_optics(root["optics"], "$.optics", cfg.master_seed);
    else cfg.optics.aperture.seed = derive_seed(cfg.master_seed, "aperture");
    if (root.contains("sensor")) cfg.sensor = parse_sensor(root["sensor"], "$.sensor", cfg.master_seed);
    if (root.contains("reconstruct")) {
        const json& r = root["reconstruct"];
        require_keys(r, "$.reconstruct", {"mode"});
        cfg.reconstruct_mode = get_str(r, "$.reconstruct", "mode", "", true);
        if (cfg.reconstruct_mode != "combine3" && cfg.reconstruct_mode != "single")
            bad("$.reconstruct.mode", "must be combine3 or single");
    }
    if (root.contains("metrics")) cfg.metrics = parse_metrics(root["metrics"], "$.metrics");
    if (root.contains("outputs")) cfg.outputs = parse_outputs(root["outputs"], "$.outputs");

    if (cfg.reconstruct_mode == "combine3" && (!cfg.sensor.present || !cfg.sensor.split))
        bad("$.reconstruct.mode", "combine3 requires a split-pixel sensor stage");
    return cfg;
}

SceneConfig load_scene_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("config: cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_scene_config(ss.str());
    } catch (const ConfigError& e) {
        throw ConfigError(std::string(e.what()) + " (in " + path + ")");
    }
}

std::string scene_config_echo(const SceneConfig& cfg) {
    json j;
    j["master_seed"] = cfg.master_seed;
    json& sc = j["scene"];
    sc["source"] = cfg.scene.source;
    sc["rows"] = cfg.scene.rows;
    sc["cols"] = cfg.scene.cols;
    sc["grid"] = {{"start_nm", cfg.scene.grid.start_nm},
                  {"step_nm", cfg.scene.grid.step_nm},
                  {"count", cfg.scene.grid.count}};
    if (cfg.scene.source == "generator") {
        const GeneratorConfig& g = cfg.scene.generator;
        json gj;
        gj["type"] = g.type;
        if (g.type == "flat") gj["level_cd_m2"] = g.level_cd_m2;
        if (g.type == "ramp") {
            gj["decades"] = g.decades;
            gj["min_level_cd_m2"] = g.min_level_cd_m2;
        }
        if (g.type == "point-grid") {
            gj["n_sources"] = g.n_sources;
            gj["top_level_cd_m2"] = g.top_level_cd_m2;
            gj["decade_step"] = g.decade_step;
            gj["background_cd_m2"] = g.background_cd_m2;
        }
        if (g.type == "tunnel") {
            gj["interior_cd_m2"] = g.interior_cd_m2;
            gj["exit_cd_m2"] = g.exit_cd_m2;
        }
        if (g.type == "macbeth") {
            gj["patch_px"] = g.patch_px;
            gj["white_level_cd_m2"] = g.white_level_cd_m2;
        }
        sc["generator"] = gj;
    } else if (cfg.scene.source == "sri") {
        sc["file"] = cfg.scene.file;
    } else {
        json fj;
        for (std::size_t i = 0; i < kLightGroupSize; ++i)
            fj[kLightGroupNames[i]] = cfg.scene.group_files[i];
        sc["files"] = fj;
    }
    if (cfg.compose.present) {
        json cj;
        json wj;
        for (std::size_t i = 0; i < kLightGroupSize; ++i) wj[kLightGroupNames[i]] = cfg.compose.weights.w[i];
        cj["weights"] = wj;
        if (cfg.compose.has_targets) {
            json tj;
            if (cfg.compose.targets.dynamic_range) tj["dynamic_range"] = *cfg.compose.targets.dynamic_range;
            if (cfg.compose.targets.mean_luminance) tj["mean_luminance"] = *cfg.compose.targets.mean_luminance;
            cj["targets"] = tj;
            json fx = json::array();
            for (std::size_t i = 0; i < kLightGroupSize; ++i)
                if (cfg.compose.fixed.fixed[i]) fx.push_back(kLightGroupNames[i]);
            cj["fixed"] = fx;
        }
        j["compose"] = cj;
    }
    json oj;
    oj["mode"] = cfg.optics.mode;
    oj["f_number"] = cfg.optics.optics.f_number;
    oj["focal_length_mm"] = cfg.optics.optics.focal_length_mm;
    oj["transmission"] = cfg.optics.optics.transmission;
    oj["distortion_k1"] = cfg.optics.optics.distortion_k1;
    oj["relative_illumination"] = cfg.optics.optics.relative_illumination;
    if (cfg.optics.mode == "flare") {
        const ApertureSpec& a = cfg.optics.aperture;
        oj["aperture"] = {{"n_blades", a.n_blades},
                          {"blade_rotation_rad", a.blade_rotation_rad},
                          {"pupil_diameter_mm", a.pupil_diameter_mm},
                          {"dust_count", a.dust_count},
                          {"dust_radius_range", {a.dust_radius_range.first, a.dust_radius_range.second}},
                          {"scratch_count", a.scratch_count},
                          {"scratch_width_range",
                           {a.scratch_width_range.first, a.scratch_width_range.second}},
                          {"scratch_length_range",
                           {a.scratch_length_range.first, a.scratch_length_range.second}},
                          {"occlusion_opacity", a.occlusion_opacity},
                          {"seed", a.seed}};
        json zj = json::array();
        for (const auto& t : cfg.optics.wavefront.zernike)
            zj.push_back({t.noll_index, t.coefficient_waves});
        oj["wavefront"] = {{"zernike", zj},
                           {"reference_lambda_nm", cfg.optics.wavefront.reference_lambda_nm}};
        oj["pupil_grid"] = cfg.optics.pupil_grid;
        oj["pad_factor"] = cfg.optics.psf_options.pad_factor;
        oj["crop_energy_tail"] = cfg.optics.psf_options.crop_energy_tail;
    }
    j["optics"] = oj;
    if (cfg.sensor.present) {
        const SensorSpec& s = cfg.sensor.spec;
        json sj;
        sj["rows"] = s.rows;
        sj["cols"] = s.cols;
        sj["exposure_s"] = s.exposure_s;
        sj["analog_gain"] = s.analog_gain;
        sj["noise"] = cfg.sensor.noise;
        sj["seed"] = s.seed;
        sj["pixel"] = {{"pitch_um", s.pixel.pitch_um},
                       {"fill_factor", s.pixel.fill_factor},
                       {"well_capacity_e", s.pixel.well_capacity_e},
                       {"read_noise_e", s.pixel.read_noise_e},
                       {"dark_current_e_per_s", s.pixel.dark_current_e_per_s},
                       {"conversion_gain_v_per_e", s.pixel.conversion_gain_v_per_e},
                       {"prnu_sigma", s.pixel.prnu_sigma},
                       {"dsnu_sigma_e", s.pixel.dsnu_sigma_e},
                       {"voltage_swing_v", s.pixel.voltage_swing_v},
                       {"adc_bits", s.pixel.adc_bits}};
        json pattern = json::array();
        for (CfaChannel ch : s.cfa.pattern) pattern.push_back(to_string(ch));
        sj["cfa_pattern"] = pattern;
        sj["split"] = cfg.sensor.split;
        if (cfg.sensor.split)
            sj["split_pixel"] = {{"sensitivity_ratio", cfg.sensor.split_pixel.sensitivity_ratio},
                                 {"gain_high", cfg.sensor.split_pixel.gain_high},
                                 {"gain_low", cfg.sensor.split_pixel.gain_low},
                                 {"area_split", cfg.sensor.split_pixel.area_split}};
        j["sensor"] = sj;
    }
    if (!cfg.reconstruct_mode.empty()) j["reconstruct"] = {{"mode", cfg.reconstruct_mode}};
    json mj = json::array();
    for (const auto& m : cfg.metrics) {
        json e;
        e["type"] = m.type;
        if (m.type == "profile") e["row"] = m.row;
        if (m.type == "photon_budget") e["luminance_cd_m2"] = m.luminance_cd_m2;
        mj.push_back(e);
    }
    j["metrics"] = mj;
    json outj;
    if (!cfg.outputs.report.empty()) outj["report"] = cfg.outputs.report;
    if (!cfg.outputs.scene_sri.empty()) outj["scene_sri"] = cfg.outputs.scene_sri;
    if (!cfg.outputs.irradiance_sri.empty()) outj["irradiance_sri"] = cfg.outputs.irradiance_sri;
    if (!cfg.outputs.scene_png.empty()) outj["scene_png"] = cfg.outputs.scene_png;
    if (!cfg.outputs.profile_csv.empty()) outj["profile_csv"] = cfg.outputs.profile_csv;
    if (!cfg.outputs.reconstruction_csv.empty()) outj["reconstruction_csv"] = cfg.outputs.reconstruction_csv;
    if (cfg.outputs.png_exposure_scale > 0.0) outj["png_exposure_scale"] = cfg.outputs.png_exposure_scale;
    j["outputs"] = outj;
    return j.dump(2);
}

}  // namespace hdrsim
