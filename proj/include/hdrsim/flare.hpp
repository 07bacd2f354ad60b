#pragma once

#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

#include "hdrsim/common.hpp"
#include "hdrsim/spectral.hpp"

namespace hdrsim {

// Aperture geometry plus surface-imperfection statistics. Dust and scratch
// placement is fully determined by the seed: feature i draws from its own
// keyed stream, so masks with larger counts extend smaller ones instead of
// reshuffling them.
struct ApertureSpec {
    int n_blades = 0;  // 0 => circular aperture, otherwise >= 3
    double blade_rotation_rad = 0.0;
    double pupil_diameter_mm = 1.5;
    int dust_count = 0;
    std::pair<double, double> dust_radius_range = {0.005, 0.02};  // fraction of pupil radius
    int scratch_count = 0;
    std::pair<double, double> scratch_width_range = {0.002, 0.01};
    std::pair<double, double> scratch_length_range = {0.3, 1.0};
    double occlusion_opacity = 1.0;  // 1 => fully opaque occluders
    std::uint64_t seed = 0;

    void validate() const;
};

struct ZernikeTerm {
    int noll_index = 4;
    double coefficient_waves = 0.0;  // waves at reference_lambda_nm
};

struct WavefrontSpec {
    std::vector<ZernikeTerm> zernike;
    double reference_lambda_nm = 550.0;
    double f_number = 4.0;
    double focal_length_mm = 6.0;

    void validate() const;
};

// Amplitude transmission over the pupil, sampled on an n x n grid with the
// pupil disk inscribed (radius n/2, pixel-center convention). Occluders are
// achromatic, so one mask serves all wavelengths.
struct ApodizationMask {
    std::size_t n = 0;
    std::vector<double> values;  // n*n, row-major, in [0,1]
    double pupil_pixel_pitch_mm = 0.0;

    double& at(std::size_t r, std::size_t c) { return values[r * n + c]; }
    double at(std::size_t r, std::size_t c) const { return values[r * n + c]; }
};

// Complex pupil field for one wavelength: apodization times the aberration
// phase factor.
struct PupilFunction {
    std::size_t n = 0;
    double lambda_nm = 550.0;
    double pupil_pixel_pitch_mm = 0.0;
    double f_number = 4.0;
    std::vector<std::complex<double>> values;  // n*n, row-major

    std::complex<double>& at(std::size_t r, std::size_t c) { return values[r * n + c]; }
    std::complex<double> at(std::size_t r, std::size_t c) const { return values[r * n + c]; }
};

// One normalized PSF sample grid. k is odd and the kernel is exactly
// centered; entries are nonnegative and sum to 1.
struct PsfKernel {
    std::size_t k = 0;
    double lambda_nm = 550.0;
    double sample_pitch_um = 1.0;  // sensor-plane sampling
    std::vector<double> values;    // k*k, row-major

    double& at(std::size_t r, std::size_t c) { return values[r * k + c]; }
    double at(std::size_t r, std::size_t c) const { return values[r * k + c]; }
    double sum() const;
};

struct PsfStack {
    WavelengthGrid grid;
    double sample_pitch_um = 1.0;
    std::vector<PsfKernel> kernels;  // one per grid sample, shared pitch
};

struct OpticsSpec {
    double f_number = 4.0;
    double focal_length_mm = 6.0;
    double transmission = 1.0;
    double distortion_k1 = 0.0;  // radial term, r' = r (1 + k1 r^2), r normalized to half-diagonal
    bool relative_illumination = false;

    void validate() const;
};

struct PsfOptions {
    std::size_t pad_factor = 4;      // FFT grid = pad_factor * pupil n
    double crop_energy_tail = 1e-4;  // crop where cumulative energy >= 1 - tail; 0 => no crop
    std::size_t max_kernel = 0;      // odd cap on kernel size; 0 => uncapped
};

// Noll-indexed Zernike polynomial on the unit disk (Noll normalization:
// sqrt(n+1) for m = 0, sqrt(2(n+1)) otherwise; even j => cos, odd j => sin).
double zernike_noll(int j, double rho, double theta);

// Builds the amplitude mask: blade polygon (or disk), then dust disks and
// scratch segments multiplied in at (1 - occlusion_opacity) transmission.
// n must be even and >= 64.
ApodizationMask synthesize_apodization(const ApertureSpec& spec, std::size_t n);

// w = a * exp(i * phi_lambda), phi scaled by reference_lambda / lambda so a
// coefficient is a fixed optical path length across wavelengths.
PupilFunction build_pupil(const ApodizationMask& mask, const WavefrontSpec& wf, double lambda_nm);

// |FFT(pupil)|^2, centered, cropped to odd size and normalized to sum 1.
// sample_pitch = lambda * f_number * n / (pad_factor * n).
PsfKernel psf_from_pupil(const PupilFunction& pupil, const PsfOptions& options = {});

// Brute-force DFT realization of the same contract; the independent oracle
// for psf_from_pupil. Refuses pupils larger than 128 (O(n^4) cost).
PsfKernel psf_direct_dft(const PupilFunction& pupil, const PsfOptions& options = {});

// Sampled Airy pattern [2 J1(v)/v]^2, v = pi r / (lambda f#), normalized to
// sum 1. k must be odd.
PsfKernel airy_reference(double f_number, double lambda_nm, double pitch_um, std::size_t k);

// Flux-preserving resampling to a new sensor-plane pitch (bilinear splat of
// the sample masses, renormalized).
PsfKernel resample_kernel(const PsfKernel& kernel, double target_pitch_um);

// Full per-wavelength PSF synthesis: one apodization mask, one pupil and
// transform per grid wavelength, every kernel resampled to target_pitch_um.
PsfStack make_psf_stack(const ApertureSpec& aperture, const WavefrontSpec& wavefront,
                        const WavelengthGrid& grid, std::size_t pupil_n, double target_pitch_um,
                        const PsfOptions& options = {});

// A 1x1 identity stack; optics then reduces to the radiometric scale.
PsfStack delta_psf_stack(const WavelengthGrid& grid, double target_pitch_um);

// Radiance to sensor irradiance: per-wavelength convolution with the PSF,
// radiometric scale pi*T/(4 f#^2), then optional cos^4 relative illumination
// and radial distortion resampling.
SpectralImage apply_optics(const SpectralImage& radiance, const PsfStack& psfs, const OpticsSpec& optics);

}  // namespace hdrsim
