#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "hdrsim/common.hpp"
#include "hdrsim/spectral.hpp"

namespace hdrsim {

struct PixelSpec {
    double pitch_um = 3.0;
    double fill_factor = 0.9;
    double well_capacity_e = 6000.0;
    double read_noise_e = 2.0;
    double dark_current_e_per_s = 0.0;
    double conversion_gain_v_per_e = 1e-4;
    double prnu_sigma = 0.0;    // fractional response nonuniformity
    double dsnu_sigma_e = 0.0;  // offset nonuniformity, electrons
    double voltage_swing_v = 0.6;
    int adc_bits = 12;

    void validate() const;
};

enum class CfaChannel : std::uint8_t { R = 0, G = 1, B = 2, W = 3 };

const char* to_string(CfaChannel ch);
CfaChannel cfa_channel_from_string(const std::string& s);

// Piecewise-linear quantum efficiency curve; zero outside its sample span.
struct QeCurve {
    std::vector<double> lambda_nm;
    std::vector<double> qe;

    double at(double lambda) const;
    bool empty() const { return lambda_nm.empty(); }
};

struct ColorFilterArray {
    std::size_t tile_rows = 2;
    std::size_t tile_cols = 2;
    std::vector<CfaChannel> pattern;  // tile_rows * tile_cols, row-major
    std::array<QeCurve, 4> qe;        // indexed by CfaChannel

    CfaChannel channel_at(std::size_t r, std::size_t c) const {
        return pattern[(r % tile_rows) * tile_cols + (c % tile_cols)];
    }
    bool contains(CfaChannel ch) const;
    void validate() const;
};

struct SensorSpec {
    std::size_t rows = 64;
    std::size_t cols = 64;
    PixelSpec pixel;
    ColorFilterArray cfa;
    double exposure_s = 0.016;
    double analog_gain = 1.0;
    std::uint64_t seed = 0;

    void validate() const;
};

// Split-pixel geometry: a large photodetector read at two conversion gains
// plus a small low-sensitivity photodetector read once.
struct SplitPixelSpec {
    double sensitivity_ratio = 0.01;  // small/large responsivity
    double gain_high = 8.0;
    double gain_low = 1.0;
    double area_split = 0.9;  // fraction of the photosensitive area on the large PD

    void validate() const;
};

struct Exposure {
    Image2D voltage;
    BoolMask saturated;
};

struct CaptureSet {
    Image2D lplg, lphg, splg;
    BoolMask sat_lplg, sat_lphg, sat_splg;
    SensorSpec sensor;
    SplitPixelSpec split;

    void validate() const;
};

// Mean electrons per pixel (photo + dark), channel-aware via the CFA.
// area_scale multiplies the photosensitive area (split-pixel use).
Image2D mean_electrons(const SpectralImage& irr, const SensorSpec& sensor, double area_scale = 1.0);

// Irradiance to voltages. Noise chain (when enabled): PRNU -> Poisson ->
// DSNU -> well clip -> read noise -> gain and swing clip -> ADC. Noise off
// produces deterministic means with the same clipping and no quantization.
// capture_index keys the shot/read random streams, so repeated exposures of
// one sensor are independent trials while PRNU/DSNU stay a fixed pattern.
Exposure expose(const SpectralImage& irr, const SensorSpec& sensor, bool noise,
                std::uint64_t capture_index = 0);

// Single-shot 3-capture acquisition: one large-PD electron image read twice
// (independent read noise, gains high/low) and an independent small-PD
// electron image at sensitivity_ratio, read once at low gain.
CaptureSet expose_split(const SpectralImage& irr, const SensorSpec& sensor, const SplitPixelSpec& split,
                        bool noise, std::uint64_t capture_index = 0);

// Monochromatic-equivalent photon budget at 555 nm for a luminance level.
double photon_count_estimate(double luminance_cd_m2, double f_number, double pitch_um, double exposure_s,
                             double fill_factor);

// Illustrative QE curve sets (Gaussian RGB peaking at 610/540/460 nm, peak
// 0.8; W is the RGB envelope scaled to peak 1.0).
ColorFilterArray cfa_rggb();
ColorFilterArray cfa_rgbw();

// Named presets: "rgb-bayer-like", "rgbw-onsemi-like", "splitpixel-3capture".
SensorSpec sensor_preset(const std::string& name);
SplitPixelSpec split_pixel_preset();
std::vector<std::string> sensor_preset_names();

// Saturation threshold fraction of the voltage swing used for mask purposes.
inline constexpr double kSaturationFraction = 0.95;

}  // namespace hdrsim
