#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "hdrsim/common.hpp"

namespace hdrsim {

// Uniform wavelength sampling in nanometers. All spectral data in the
// simulator lives on such a grid; [350, 780] nm is the supported span.
struct WavelengthGrid {
    double start_nm = 400.0;
    double step_nm = 10.0;
    std::size_t count = 31;

    double lambda(std::size_t i) const { return start_nm + step_nm * static_cast<double>(i); }
    double end_nm() const { return lambda(count - 1); }
    bool operator==(const WavelengthGrid& o) const {
        return start_nm == o.start_nm && step_nm == o.step_nm && count == o.count;
    }

    // Throws DomainError when the grid violates its invariants.
    void validate() const;
};

enum class SpectralKind { radiance, irradiance };

const char* to_string(SpectralKind k);

// rows x cols x count grid of spectral photon rates, wavelength-major
// (plane k is contiguous). Radiance carries photons/s/sr/m^2/nm, irradiance
// photons/s/m^2/nm.
struct SpectralImage {
    std::size_t rows = 0;
    std::size_t cols = 0;
    WavelengthGrid grid;
    SpectralKind kind = SpectralKind::radiance;
    std::vector<double> data;  // size rows * cols * grid.count

    SpectralImage() = default;
    SpectralImage(std::size_t r, std::size_t c, const WavelengthGrid& g,
                  SpectralKind k = SpectralKind::radiance, double fill = 0.0)
        : rows(r), cols(c), grid(g), kind(k), data(r * c * g.count, fill) {}

    double& at(std::size_t r, std::size_t c, std::size_t w) { return data[(w * rows + r) * cols + c]; }
    double at(std::size_t r, std::size_t c, std::size_t w) const { return data[(w * rows + r) * cols + c]; }

    // Contiguous view of one wavelength plane.
    double* plane(std::size_t w) { return data.data() + w * rows * cols; }
    const double* plane(std::size_t w) const { return data.data() + w * rows * cols; }

    bool same_geometry(const SpectralImage& o) const {
        return rows == o.rows && cols == o.cols && grid == o.grid;
    }

    // Checks finiteness, nonnegativity and size consistency.
    void validate() const;
};

enum class LightGroupKey : std::size_t { sky = 0, headlights = 1, streetlights = 2, otherlights = 3 };

inline constexpr std::size_t kLightGroupSize = 4;
inline constexpr std::array<const char*, kLightGroupSize> kLightGroupNames = {
    "sky", "headlights", "streetlights", "otherlights"};

// Four spectral radiance renderings of one scene, one per light source
// class. Members share geometry and grid; incoherent sources add in energy,
// so weighted sums of members are physically valid scenes.
struct LightGroup {
    std::array<SpectralImage, kLightGroupSize> members;

    SpectralImage& operator[](LightGroupKey k) { return members[static_cast<std::size_t>(k)]; }
    const SpectralImage& operator[](LightGroupKey k) const { return members[static_cast<std::size_t>(k)]; }

    // Throws StructuralError unless all members share rows/cols/grid and are
    // radiance images.
    void validate() const;
};

struct GroupWeights {
    std::array<double, kLightGroupSize> w{1.0, 1.0, 1.0, 1.0};

    double& operator[](LightGroupKey k) { return w[static_cast<std::size_t>(k)]; }
    double operator[](LightGroupKey k) const { return w[static_cast<std::size_t>(k)]; }

    void validate() const;  // nonnegative, finite
};

// Weighted sum of the four members: out(x,y,l) = sum_i w_i * L_i(x,y,l).
SpectralImage compose_light_groups(const LightGroup& group, const GroupWeights& weights);

// Copy of one row of a 2-D map, left to right.
std::vector<double> line_profile(const Image2D& img, std::size_t row);

// Central rows x cols crop; throws StructuralError when the source is smaller.
SpectralImage central_crop(const SpectralImage& img, std::size_t rows, std::size_t cols);

}  // namespace hdrsim
