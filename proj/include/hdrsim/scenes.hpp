#pragma once

#include <vector>

#include "hdrsim/common.hpp"
#include "hdrsim/spectral.hpp"

namespace hdrsim {

// Spectrally flat radiance whose luminance is `level_cd_m2` everywhere.
SpectralImage gen_flat_scene(std::size_t rows, std::size_t cols, const WavelengthGrid& grid,
                             double level_cd_m2);

// Dark background with n_sources small square emitters stepping down by
// decade_step from top_level, left to right. Flat spectra throughout.
SpectralImage gen_point_grid_scene(std::size_t rows, std::size_t cols, const WavelengthGrid& grid,
                                   std::size_t n_sources, double top_level_cd_m2, double decade_step,
                                   double background_cd_m2);

struct RampScene {
    SpectralImage image;
    std::vector<double> column_luminance_cd_m2;  // analytic ground truth per column
};

// Horizontal log-linear luminance ramp spanning `decades` orders of
// magnitude from min_level at the left edge.
RampScene gen_ramp_scene(std::size_t rows, std::size_t cols, const WavelengthGrid& grid, double decades,
                         double min_level_cd_m2);

// Tunnel-like light group: the bright exit disk lives in the sky member,
// the textured interior in otherlights, with small headlight/streetlight
// features in their members. Both regions carry the same relative contrast
// pattern so contrast preservation is measurable end to end.
LightGroup gen_tunnel_scene(std::size_t rows, std::size_t cols, const WavelengthGrid& grid,
                            double interior_cd_m2, double exit_cd_m2);

// 4x6-patch reflective chart under a D65-like illuminant. The embedded
// reflectance table is an illustrative smooth stand-in for the classic
// 24-patch chart. white_level_cd_m2 sets the luminance of the white patch.
SpectralImage gen_macbeth_scene(const WavelengthGrid& grid, std::size_t patch_px, double white_level_cd_m2);

// Luminance of a unit-amplitude flat photon spectrum on the grid; the
// generator's conversion between photon rate and cd/m^2.
double flat_spectrum_unit_luminance(const WavelengthGrid& grid);

}  // namespace hdrsim
