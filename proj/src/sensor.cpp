#include "hdrsim/sensor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "hdrsim/photometry.hpp"
#include "hdrsim/rng.hpp"

namespace hdrsim {

namespace {

constexpr std::uint64_t kStagePrnu = 1;
constexpr std::uint64_t kStageDsnu = 2;
constexpr std::uint64_t kStageShot = 3;
constexpr std::uint64_t kStageRead = 4;

struct CaptureKeys {
    std::uint64_t shot;  // which electron image
    std::uint64_t read;  // which readout
    std::uint64_t dsnu;  // which photodetector's offset pattern
};

double quantize_adc(double v, double swing, int bits) {
    const double levels = static_cast<double>((1u << bits) - 1u);
    return std::round(v / swing * levels) * swing / levels;
}

// One readout of an electron image: well clip, read noise, gain, swing clip,
// ADC. Saturation flags electrons at the well or voltage near the swing.
Exposure read_out(const Image2D& electrons, const SensorSpec& sensor, double gain_multiplier, bool noise,
                  std::uint64_t read_key) {
    const PixelSpec& px = sensor.pixel;
    const double total_gain = px.conversion_gain_v_per_e * sensor.analog_gain * gain_multiplier;

    Exposure out;
    out.voltage = Image2D(electrons.rows, electrons.cols);
    out.saturated = BoolMask(electrons.rows, electrons.cols);

    for (std::size_t p = 0; p < electrons.v.size(); ++p) {
        const double e = electrons.v[p];
        double e_clip = std::min(e, px.well_capacity_e);
        if (noise && px.read_noise_e > 0.0) {
            RandomStream rs = RandomStream::keyed(sensor.seed, kStageRead, p, read_key);
            e_clip += px.read_noise_e * rs.normal();
        }
        double v = std::clamp(e_clip * total_gain, 0.0, px.voltage_swing_v);
        if (noise) v = quantize_adc(v, px.voltage_swing_v, px.adc_bits);
        out.voltage.v[p] = v;
        out.saturated.v[p] =
            (e >= px.well_capacity_e || v >= kSaturationFraction * px.voltage_swing_v) ? 1 : 0;
    }
    return out;
}

// Electron image for one photodetector: PRNU-perturbed mean, Poisson draw,
// DSNU offset. Fixed-pattern stages are keyed by pixel (and photodetector)
// only, never by capture index.
Image2D make_electrons(const Image2D& mean, const SensorSpec& sensor, bool noise, std::uint64_t shot_key,
                       std::uint64_t dsnu_key) {
    const PixelSpec& px = sensor.pixel;
    Image2D out(mean.rows, mean.cols);
    if (!noise) {
        out.v = mean.v;
        return out;
    }
    parallel_for(mean.v.size(), [&](std::size_t p) {
        double mu = mean.v[p];
        if (px.prnu_sigma > 0.0) {
            RandomStream rs = RandomStream::keyed(sensor.seed, kStagePrnu, p, dsnu_key);
            mu = std::max(0.0, mu * (1.0 + px.prnu_sigma * rs.normal()));
        }
        RandomStream shot = RandomStream::keyed(sensor.seed, kStageShot, p, shot_key);
        double e = static_cast<double>(shot.poisson(mu));
        if (px.dsnu_sigma_e > 0.0) {
            RandomStream rs = RandomStream::keyed(sensor.seed, kStageDsnu, p, dsnu_key);
            e += px.dsnu_sigma_e * rs.normal();
        }
        out.v[p] = std::max(0.0, e);
    });
    return out;
}

QeCurve gaussian_qe(double center_nm, double sigma_nm, double peak) {
    QeCurve q;
    for (double l = 380.0; l <= 780.0 + 1e-9; l += 5.0) {
        q.lambda_nm.push_back(l);
        const double d = (l - center_nm) / sigma_nm;
        q.qe.push_back(peak * std::exp(-0.5 * d * d));
    }
    return q;
}

}  // namespace

void PixelSpec::validate() const {
    if (!(pitch_um > 0.0)) throw ConfigError("pixel spec: pitch must be > 0");
    if (!(fill_factor > 0.0 && fill_factor <= 1.0)) throw ConfigError("pixel spec: fill factor must be in (0,1]");
    if (!(well_capacity_e > 0.0)) throw ConfigError("pixel spec: well capacity must be > 0");
    if (read_noise_e < 0.0 || dark_current_e_per_s < 0.0 || prnu_sigma < 0.0 || dsnu_sigma_e < 0.0)
        throw ConfigError("pixel spec: noise parameters must be >= 0");
    if (!(conversion_gain_v_per_e > 0.0)) throw ConfigError("pixel spec: conversion gain must be > 0");
    if (!(voltage_swing_v > 0.0)) throw ConfigError("pixel spec: voltage swing must be > 0");
    if (adc_bits < 8 || adc_bits > 16) throw ConfigError("pixel spec: adc_bits must be in [8,16]");
}

const char* to_string(CfaChannel ch) {
    switch (ch) {
        case CfaChannel::R: return "R";
        case CfaChannel::G: return "G";
        case CfaChannel::B: return "B";
        case CfaChannel::W: return "W";
    }
    return "?";
}

CfaChannel cfa_channel_from_string(const std::string& s) {
    if (s == "R" || s == "r") return CfaChannel::R;
    if (s == "G" || s == "g") return CfaChannel::G;
    if (s == "B" || s == "b") return CfaChannel::B;
    if (s == "W" || s == "w") return CfaChannel::W;
    throw ConfigError("unknown CFA channel id '" + s + "'");
}

double QeCurve::at(double lambda) const {
    if (lambda_nm.empty()) return 0.0;
    if (lambda <= lambda_nm.front()) return lambda == lambda_nm.front() ? qe.front() : 0.0;
    if (lambda >= lambda_nm.back()) return lambda == lambda_nm.back() ? qe.back() : 0.0;
    const auto it = std::upper_bound(lambda_nm.begin(), lambda_nm.end(), lambda);
    const std::size_t i = static_cast<std::size_t>(it - lambda_nm.begin()) - 1;
    const double f = (lambda - lambda_nm[i]) / (lambda_nm[i + 1] - lambda_nm[i]);
    return qe[i] * (1.0 - f) + qe[i + 1] * f;
}

bool ColorFilterArray::contains(CfaChannel ch) const {
    return std::find(pattern.begin(), pattern.end(), ch) != pattern.end();
}

void ColorFilterArray::validate() const {
    if (tile_rows == 0 || tile_cols == 0 || pattern.size() != tile_rows * tile_cols)
        throw ConfigError("cfa: pattern size must equal tile_rows * tile_cols");
    for (CfaChannel ch : pattern) {
        const auto& q = qe[static_cast<std::size_t>(ch)];
        if (q.empty()) throw ConfigError(std::string("cfa: channel ") + to_string(ch) + " lacks a QE curve");
        if (q.lambda_nm.size() != q.qe.size()) throw ConfigError("cfa: QE curve sample count mismatch");
        for (double v : q.qe)
            if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("cfa: QE values must lie in [0,1]");
    }
    if (contains(CfaChannel::W)) {
        // RGBW invariant: the clear channel dominates each color channel.
        const auto& w = qe[static_cast<std::size_t>(CfaChannel::W)];
        for (double l = 380.0; l <= 780.0; l += 2.5) {
            for (CfaChannel ch : {CfaChannel::R, CfaChannel::G, CfaChannel::B}) {
                if (!contains(ch)) continue;
                if (qe[static_cast<std::size_t>(ch)].at(l) > w.at(l) + 1e-12)
                    throw ConfigError("cfa: W channel QE must dominate R/G/B at every wavelength");
            }
        }
    }
}

void SensorSpec::validate() const {
    pixel.validate();
    cfa.validate();
    if (rows == 0 || cols == 0 || rows % cfa.tile_rows != 0 || cols % cfa.tile_cols != 0)
        throw ConfigError("sensor spec: rows/cols must be nonzero multiples of the CFA tile");
    if (!(exposure_s > 0.0)) throw ConfigError("sensor spec: exposure must be > 0");
    if (!(analog_gain > 0.0)) throw ConfigError("sensor spec: analog gain must be > 0");
}

void SplitPixelSpec::validate() const {
    if (!(sensitivity_ratio > 0.0 && sensitivity_ratio < 1.0))
        throw ConfigError("split pixel: sensitivity ratio must be in (0,1)");
    if (!(gain_high > gain_low && gain_low > 0.0))
        throw ConfigError("split pixel: gains must satisfy gain_high > gain_low > 0");
    if (!(area_split > 0.0 && area_split <= 1.0))
        throw ConfigError("split pixel: area split must be in (0,1]");
}

void CaptureSet::validate() const {
    if (!lplg.same_shape(lphg) || !lplg.same_shape(splg))
        throw StructuralError("capture set: captures differ in shape");
    if (!sat_lplg.same_shape(sat_lphg) || !sat_lplg.same_shape(sat_splg) || sat_lplg.rows != lplg.rows ||
        sat_lplg.cols != lplg.cols)
        throw StructuralError("capture set: saturation masks differ in shape");
}

Image2D mean_electrons(const SpectralImage& irr, const SensorSpec& sensor, double area_scale) {
    sensor.validate();
    if (irr.kind != SpectralKind::irradiance)
        throw DomainError("mean_electrons: sensor exposure expects an irradiance image");
    if (irr.rows < sensor.rows || irr.cols < sensor.cols) {
        std::ostringstream os;
        os << "mean_electrons: irradiance " << irr.rows << "x" << irr.cols << " smaller than sensor "
           << sensor.rows << "x" << sensor.cols;
        throw StructuralError(os.str());
    }
    const SpectralImage cropped = central_crop(irr, sensor.rows, sensor.cols);

    const PixelSpec& px = sensor.pixel;
    const double area = area_scale * px.fill_factor * (px.pitch_um * 1e-6) * (px.pitch_um * 1e-6);
    const double dark = px.dark_current_e_per_s * sensor.exposure_s * area_scale;

    // Per-channel spectral weights on the grid.
    std::array<std::vector<double>, 4> weight;
    for (std::size_t ch = 0; ch < 4; ++ch) {
        weight[ch].resize(cropped.grid.count, 0.0);
        const QeCurve& q = sensor.cfa.qe[ch];
        if (q.empty()) continue;
        for (std::size_t w = 0; w < cropped.grid.count; ++w)
            weight[ch][w] = q.at(cropped.grid.lambda(w)) * cropped.grid.step_nm;
    }

    Image2D out(sensor.rows, sensor.cols);
    for (std::size_t r = 0; r < sensor.rows; ++r)
        for (std::size_t c = 0; c < sensor.cols; ++c) {
            const std::size_t ch = static_cast<std::size_t>(sensor.cfa.channel_at(r, c));
            double acc = 0.0;
            for (std::size_t w = 0; w < cropped.grid.count; ++w) acc += weight[ch][w] * cropped.at(r, c, w);
            out.at(r, c) = area * sensor.exposure_s * acc + dark;
        }
    return out;
}

Exposure expose(const SpectralImage& irr, const SensorSpec& sensor, bool noise, std::uint64_t capture_index) {
    const Image2D mean = mean_electrons(irr, sensor);
    const std::uint64_t aux = capture_index * 8;
    const Image2D electrons = make_electrons(mean, sensor, noise, aux, 0);
    return read_out(electrons, sensor, 1.0, noise, aux);
}

CaptureSet expose_split(const SpectralImage& irr, const SensorSpec& sensor, const SplitPixelSpec& split,
                        bool noise, std::uint64_t capture_index) {
    split.validate();
    const Image2D mean_large = mean_electrons(irr, sensor, split.area_split);
    Image2D mean_small = mean_large;
    for (double& v : mean_small.v) v *= split.sensitivity_ratio;

    const std::uint64_t aux = capture_index * 8;
    const Image2D e_large = make_electrons(mean_large, sensor, noise, aux + 0, 0);
    const Image2D e_small = make_electrons(mean_small, sensor, noise, aux + 1, 1);

    CaptureSet caps;
    caps.sensor = sensor;
    caps.split = split;

    Exposure lphg = read_out(e_large, sensor, split.gain_high, noise, aux + 2);
    Exposure lplg = read_out(e_large, sensor, split.gain_low, noise, aux + 3);
    Exposure splg = read_out(e_small, sensor, split.gain_low, noise, aux + 4);

    caps.lphg = std::move(lphg.voltage);
    caps.sat_lphg = std::move(lphg.saturated);
    caps.lplg = std::move(lplg.voltage);
    caps.sat_lplg = std::move(lplg.saturated);
    caps.splg = std::move(splg.voltage);
    caps.sat_splg = std::move(splg.saturated);
    return caps;
}

double photon_count_estimate(double luminance_cd_m2, double f_number, double pitch_um, double exposure_s,
                             double fill_factor) {
    if (!(luminance_cd_m2 > 0.0 && f_number > 0.0 && pitch_um > 0.0 && exposure_s > 0.0 &&
          fill_factor > 0.0))
        throw ConfigError("photon_count_estimate: all arguments must be positive");
    constexpr double lambda_m = 555e-9;
    const double radiance_w = luminance_cd_m2 / kLuminousEfficacy;       // W/sr/m^2 at 555 nm
    const double photons_per_joule = lambda_m / kPlanckTimesC;
    const double aperture = std::numbers::pi / (4.0 * f_number * f_number);
    const double area = (pitch_um * 1e-6) * (pitch_um * 1e-6);
    return radiance_w * photons_per_joule * aperture * area * exposure_s * fill_factor;
}

ColorFilterArray cfa_rggb() {
    ColorFilterArray cfa;
    cfa.tile_rows = 2;
    cfa.tile_cols = 2;
    cfa.pattern = {CfaChannel::R, CfaChannel::G, CfaChannel::G, CfaChannel::B};
    cfa.qe[static_cast<std::size_t>(CfaChannel::R)] = gaussian_qe(610.0, 35.0, 0.8);
    cfa.qe[static_cast<std::size_t>(CfaChannel::G)] = gaussian_qe(540.0, 35.0, 0.8);
    cfa.qe[static_cast<std::size_t>(CfaChannel::B)] = gaussian_qe(460.0, 35.0, 0.8);
    return cfa;
}

ColorFilterArray cfa_rgbw() {
    ColorFilterArray cfa = cfa_rggb();
    cfa.pattern = {CfaChannel::R, CfaChannel::G, CfaChannel::W, CfaChannel::B};
    QeCurve w;
    const QeCurve& r = cfa.qe[static_cast<std::size_t>(CfaChannel::R)];
    for (std::size_t i = 0; i < r.lambda_nm.size(); ++i) {
        const double l = r.lambda_nm[i];
        double env = 0.0;
        for (CfaChannel ch : {CfaChannel::R, CfaChannel::G, CfaChannel::B})
            env = std::max(env, cfa.qe[static_cast<std::size_t>(ch)].at(l));
        w.lambda_nm.push_back(l);
        w.qe.push_back(std::min(1.0, env / 0.8));
    }
    cfa.qe[static_cast<std::size_t>(CfaChannel::W)] = w;
    return cfa;
}

SensorSpec sensor_preset(const std::string& name) {
    SensorSpec s;
    s.rows = 64;
    s.cols = 64;
    s.pixel.pitch_um = 3.0;
    s.pixel.fill_factor = 0.9;
    s.pixel.well_capacity_e = 20000.0;
    s.pixel.read_noise_e = 2.0;
    s.pixel.dark_current_e_per_s = 0.0;
    s.pixel.conversion_gain_v_per_e = 3e-5;  // full well spans the 0.6 V swing
    s.pixel.prnu_sigma = 0.005;
    s.pixel.dsnu_sigma_e = 0.5;
    s.pixel.voltage_swing_v = 0.6;
    s.pixel.adc_bits = 12;
    s.exposure_s = 0.016;
    s.analog_gain = 1.0;
    if (name == "rgb-bayer-like") {
        s.cfa = cfa_rggb();
    } else if (name == "rgbw-onsemi-like") {
        s.cfa = cfa_rgbw();
    } else if (name == "splitpixel-3capture") {
        s.cfa = cfa_rggb();
        s.pixel.read_noise_e = 1.5;
    } else {
        throw ConfigError("unknown sensor preset '" + name + "'");
    }
    return s;
}

SplitPixelSpec split_pixel_preset() {
    SplitPixelSpec sp;
    sp.sensitivity_ratio = 0.01;
    sp.gain_high = 8.0;
    sp.gain_low = 1.0;
    sp.area_split = 0.9;
    return sp;
}

std::vector<std::string> sensor_preset_names() {
    return {"rgb-bayer-like", "rgbw-onsemi-like", "splitpixel-3capture"};
}

}  // namespace hdrsim
