#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "hdrsim/common.hpp"
#include "hdrsim/flare.hpp"
#include "hdrsim/photometry.hpp"
#include "hdrsim/sensor.hpp"
#include "hdrsim/spectral.hpp"

namespace hdrsim {

// Declarative description of one pipeline run. Parsed strictly from a JSON
// document: unknown keys anywhere are errors, and every stage seed is either
// explicit or derived from the master seed.

struct GeneratorConfig {
    std::string type;  // flat | ramp | point-grid | tunnel | macbeth
    double level_cd_m2 = 100.0;
    double decades = 5.0;
    double min_level_cd_m2 = 0.01;
    std::size_t n_sources = 4;
    double top_level_cd_m2 = 1e5;
    double decade_step = 10.0;
    double background_cd_m2 = 0.1;
    double interior_cd_m2 = 1.0;
    double exit_cd_m2 = 1e5;
    std::size_t patch_px = 8;
    double white_level_cd_m2 = 100.0;
};

struct SceneSection {
    std::string source;  // generator | sri | sri-group
    std::size_t rows = 64;
    std::size_t cols = 64;
    WavelengthGrid grid;
    GeneratorConfig generator;
    std::string file;                        // source = sri
    std::array<std::string, 4> group_files;  // source = sri-group, light-group order
};

struct ComposeSection {
    bool present = false;
    GroupWeights weights;
    bool has_targets = false;
    WeightTargets targets;
    FixedWeights fixed;
};

struct OpticsSection {
    std::string mode = "delta";  // delta | flare
    OpticsSpec optics;
    ApertureSpec aperture;
    WavefrontSpec wavefront;
    std::size_t pupil_grid = 256;
    PsfOptions psf_options;
    bool aperture_seed_explicit = false;
};

struct SensorSection {
    bool present = false;
    SensorSpec spec;
    bool noise = true;
    bool split = false;
    SplitPixelSpec split_pixel;
    bool seed_explicit = false;
};

struct MetricEntry {
    std::string type;  // scene_dynamic_range | photon_budget | profile | demosaic_quality
    std::size_t row = 0;
    double luminance_cd_m2 = 1.0;
};

struct OutputsSection {
    std::string report;
    std::string scene_sri;
    std::string irradiance_sri;
    std::string scene_png;
    std::string profile_csv;
    std::string reconstruction_csv;
    double png_exposure_scale = 0.0;  // 0 => auto (scale peak luminance to white)
};

struct SceneConfig {
    std::uint64_t master_seed = 0;
    SceneSection scene;
    ComposeSection compose;
    OpticsSection optics;
    SensorSection sensor;
    std::string reconstruct_mode;  // combine3 | single | "" (auto)
    std::vector<MetricEntry> metrics;
    OutputsSection outputs;
};

// Strict parse; throws ConfigError with the offending key path.
SceneConfig parse_scene_config(const std::string& json_text);
SceneConfig load_scene_config(const std::string& path);

// Canonical JSON echo of a parsed config with all derived seeds resolved;
// embedded verbatim in run reports.
std::string scene_config_echo(const SceneConfig& config);

}  // namespace hdrsim
