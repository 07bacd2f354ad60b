#pragma once

#include <array>
#include <cstdint>

#include "hdrsim/common.hpp"
#include "hdrsim/sensor.hpp"
#include "hdrsim/spectral.hpp"

namespace hdrsim {

enum class RgbPrimaries { sensor_native, srgb_linear };

// Planar rows x cols x 3 linear image (channel-major planes).
struct RgbImage {
    std::size_t rows = 0;
    std::size_t cols = 0;
    RgbPrimaries primaries = RgbPrimaries::sensor_native;
    std::vector<double> data;

    RgbImage() = default;
    RgbImage(std::size_t r, std::size_t c, RgbPrimaries p = RgbPrimaries::sensor_native)
        : rows(r), cols(c), primaries(p), data(3 * r * c, 0.0) {}
    double& at(std::size_t r, std::size_t c, std::size_t ch) { return data[(ch * rows + r) * cols + c]; }
    double at(std::size_t r, std::size_t c, std::size_t ch) const { return data[(ch * rows + r) * cols + c]; }
    double* plane(std::size_t ch) { return data.data() + ch * rows * cols; }
    const double* plane(std::size_t ch) const { return data.data() + ch * rows * cols; }
};

// CIE 1931 tristimulus planes.
struct XyzImage {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    XyzImage() = default;
    XyzImage(std::size_t r, std::size_t c) : rows(r), cols(c), data(3 * r * c, 0.0) {}
    double& at(std::size_t r, std::size_t c, std::size_t ch) { return data[(ch * rows + r) * cols + c]; }
    double at(std::size_t r, std::size_t c, std::size_t ch) const { return data[(ch * rows + r) * cols + c]; }
    double* plane(std::size_t ch) { return data.data() + ch * rows * cols; }
    const double* plane(std::size_t ch) const { return data.data() + ch * rows * cols; }
};

// 8-bit interleaved RGB for display exports.
struct Rgb8Image {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint8_t> data;  // rows*cols*3

    Rgb8Image() = default;
    Rgb8Image(std::size_t r, std::size_t c) : rows(r), cols(c), data(3 * r * c, 0) {}
};

struct Xyz {
    double x = 0.0, y = 0.0, z = 0.0;
};

inline constexpr Xyz kD65White{0.95047, 1.0, 1.08883};

// Per-channel bilinear interpolation from each channel's own sample lattice,
// mirrored at the edges. The mosaic must carry only R, G, B sites.
RgbImage demosaic_bilinear(const Image2D& mosaic, const ColorFilterArray& cfa);

// RGBW baseline: bilinear per channel, then RGB scaled per pixel by the
// interpolated W over the RGB luma (Rec.601 weights), clamped to [0.25, 4].
RgbImage demosaic_rgbw(const Image2D& mosaic, const ColorFilterArray& cfa);

// XYZ integrals of a spectral image against the CIE 1931 CMFs; Y is cd/m^2
// for radiance inputs (lux for irradiance).
XyzImage spectral_to_xyz(const SpectralImage& img);

// D65-referenced XYZ -> linear sRGB -> standard transfer -> 8 bits.
Rgb8Image xyz_to_srgb_display(const XyzImage& img, double exposure_scale);

// Mean local SSIM with the standard 11x11 Gaussian window (sigma 1.5),
// K1 = 0.01, K2 = 0.03, over fully-interior window positions.
double ssim(const Image2D& a, const Image2D& b, double data_range);

struct DeltaEResult {
    Image2D map;
    double mean = 0.0;
};

// CIE 1976 delta-E*ab between Lab conversions under the given white point.
DeltaEResult delta_e(const XyzImage& a, const XyzImage& b, const Xyz& white);

// Least-squares 3x3 matrix taking per-pixel channel electron responses
// (per unit spectral photon irradiance) to XYZ, computed from the QE curves
// on a wavelength grid. Row-major m[3][3].
std::array<std::array<double, 3>, 3> fit_sensor_rgb_to_xyz(const ColorFilterArray& cfa,
                                                           const WavelengthGrid& grid);

XyzImage apply_rgb_to_xyz(const RgbImage& rgb, const std::array<std::array<double, 3>, 3>& m);

// Y plane of an XYZ image.
Image2D xyz_luminance(const XyzImage& img);

struct DemosaicQualityResult {
    double ssim = 0.0;
    double mean_delta_e = 0.0;
    double mean_reference_y = 0.0;
};

// End-to-end capture quality against scene truth: expose, demosaic (RGBW
// guided when the CFA carries a W channel, bilinear otherwise), convert to
// XYZ through the least-squares sensor matrix, normalize mean luminance to
// the scene's XYZ rendering, then score SSIM on the Y plane and mean CIE76
// delta-E under a D65-chromaticity white.
DemosaicQualityResult demosaic_quality(const SpectralImage& irradiance, const SensorSpec& sensor,
                                       bool noise, std::uint64_t capture_index = 0);

}  // namespace hdrsim
