#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "hdrsim/fft.hpp"
#include "hdrsim/flare.hpp"
#include "hdrsim/rng.hpp"
#include "hdrsim/spectral.hpp"

using namespace hdrsim;

namespace {

constexpr double kPi = std::numbers::pi;

// Independent spatial-domain "same" convolution with zero boundary.
Image2D conv_naive(const Image2D& img, const PsfKernel& kern) {
    const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(kern.k / 2);
    Image2D out(img.rows, img.cols, 0.0);
    for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(img.rows); ++r)
        for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(img.cols); ++c) {
            double acc = 0.0;
            for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(kern.k); ++i)
                for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(kern.k); ++j) {
                    const std::ptrdiff_t rr = r - (i - half);
                    const std::ptrdiff_t cc = c - (j - half);
                    if (rr < 0 || cc < 0 || rr >= static_cast<std::ptrdiff_t>(img.rows) ||
                        cc >= static_cast<std::ptrdiff_t>(img.cols))
                        continue;
                    acc += img.at(static_cast<std::size_t>(rr), static_cast<std::size_t>(cc)) *
                           kern.values[static_cast<std::size_t>(i) * kern.k + static_cast<std::size_t>(j)];
                }
            out.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = acc;
        }
    return out;
}

double kernel_peak(const PsfKernel& k) {
    double p = 0.0;
    for (double v : k.values) p = std::max(p, v);
    return p;
}

// Azimuthally averaged profile via bilinear sampling.
std::vector<double> radial_profile(const PsfKernel& k, double rmax, double dr) {
    const double c0 = 0.5 * static_cast<double>(k.k - 1);
    std::vector<double> prof;
    for (double r = 0.0; r <= rmax; r += dr) {
        double acc = 0.0;
        const int nang = 64;
        for (int a = 0; a < nang; ++a) {
            const double t = 2.0 * kPi * a / nang;
            const double x = c0 + r * std::cos(t);
            const double y = c0 + r * std::sin(t);
            const std::size_t x0 = static_cast<std::size_t>(x), y0 = static_cast<std::size_t>(y);
            const double fx = x - static_cast<double>(x0), fy = y - static_cast<double>(y0);
            acc += (1 - fx) * (1 - fy) * k.at(y0, x0) + fx * (1 - fy) * k.at(y0, x0 + 1) +
                   (1 - fx) * fy * k.at(y0 + 1, x0) + fx * fy * k.at(y0 + 1, x0 + 1);
        }
        prof.push_back(acc / 64.0);
    }
    return prof;
}

ApertureSpec clean_circle() {
    ApertureSpec spec;
    spec.n_blades = 0;
    spec.dust_count = 0;
    spec.scratch_count = 0;
    return spec;
}

}  // namespace

TEST_CASE("apodization: clean circular aperture is an exact disk indicator") {
    const ApodizationMask mask = synthesize_apodization(clean_circle(), 128);
    const double radius = 64.0;
    for (std::size_t r = 0; r < 128; ++r)
        for (std::size_t c = 0; c < 128; ++c) {
            const double y = static_cast<double>(r) + 0.5 - 64.0;
            const double x = static_cast<double>(c) + 0.5 - 64.0;
            const double expect = (x * x + y * y <= radius * radius) ? 1.0 : 0.0;
            REQUIRE(mask.at(r, c) == expect);
        }
}

TEST_CASE("apodization: identical seeds give bit-identical masks") {
    ApertureSpec spec = clean_circle();
    spec.n_blades = 6;
    spec.dust_count = 25;
    spec.scratch_count = 8;
    spec.seed = 777;
    const ApodizationMask a = synthesize_apodization(spec, 128);
    const ApodizationMask b = synthesize_apodization(spec, 128);
    REQUIRE(a.values == b.values);
}

TEST_CASE("apodization: dust sets are nested as the count grows") {
    ApertureSpec spec = clean_circle();
    spec.seed = 3;
    spec.dust_count = 10;
    const ApodizationMask small = synthesize_apodization(spec, 128);
    spec.dust_count = 40;
    const ApodizationMask big = synthesize_apodization(spec, 128);
    for (std::size_t i = 0; i < small.values.size(); ++i) REQUIRE(big.values[i] <= small.values[i]);
}

TEST_CASE("apodization: hexagonal open-area fraction matches the polygon/disk area ratio") {
    ApertureSpec spec = clean_circle();
    spec.n_blades = 6;
    const ApodizationMask hexm = synthesize_apodization(spec, 512);
    const ApodizationMask disk = synthesize_apodization(clean_circle(), 512);
    double open_hex = 0.0, open_disk = 0.0;
    for (double v : hexm.values) open_hex += v;
    for (double v : disk.values) open_disk += v;
    const double expect = 3.0 * std::sqrt(3.0) / (2.0 * kPi);  // ~0.8270
    CHECK(open_hex / open_disk == doctest::Approx(expect).epsilon(0.01 / expect));
}

TEST_CASE("apodization: grid constraints") {
    CHECK_THROWS_AS(synthesize_apodization(clean_circle(), 63), ConfigError);
    CHECK_THROWS_AS(synthesize_apodization(clean_circle(), 32), ConfigError);
    CHECK_THROWS_AS(synthesize_apodization(clean_circle(), 129), ConfigError);
}

TEST_CASE("zernike: Noll defocus normalization at the pupil edge") {
    // Z4(rho=1) = sqrt(3) * (2 - 1) = sqrt(3)
    CHECK(zernike_noll(4, 1.0, 0.3) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
    CHECK(zernike_noll(4, 0.0, 0.0) == doctest::Approx(-std::sqrt(3.0)).epsilon(1e-12));
    // Piston and tilt sanity.
    CHECK(zernike_noll(1, 0.7, 1.1) == doctest::Approx(1.0));
    CHECK(zernike_noll(2, 0.5, 0.0) == doctest::Approx(2.0 * 0.5));  // sqrt(4) * rho * cos(0)
}

TEST_CASE("build_pupil: zero coefficients give a real pupil equal to the mask") {
    const ApodizationMask mask = synthesize_apodization(clean_circle(), 64);
    WavefrontSpec wf;
    const PupilFunction pupil = build_pupil(mask, wf, 550.0);
    for (std::size_t i = 0; i < pupil.values.size(); ++i) {
        REQUIRE(pupil.values[i].imag() == 0.0);
        REQUIRE(pupil.values[i].real() == mask.values[i]);
    }
}

TEST_CASE("build_pupil: |w| equals the apodization for any phase") {
    ApertureSpec spec = clean_circle();
    spec.dust_count = 12;
    spec.occlusion_opacity = 0.6;
    spec.seed = 5;
    const ApodizationMask mask = synthesize_apodization(spec, 64);
    WavefrontSpec wf;
    wf.zernike = {{4, 0.5}, {7, 0.2}, {11, -0.1}};
    const PupilFunction pupil = build_pupil(mask, wf, 470.0);
    for (std::size_t i = 0; i < pupil.values.size(); ++i)
        REQUIRE(std::abs(pupil.values[i]) == doctest::Approx(mask.values[i]).epsilon(1e-12));
}

TEST_CASE("build_pupil: defocus phase scales with reference wavelength over wavelength") {
    const ApodizationMask mask = synthesize_apodization(clean_circle(), 64);
    WavefrontSpec wf;
    wf.zernike = {{4, 0.5}};
    wf.reference_lambda_nm = 550.0;
    const PupilFunction pupil = build_pupil(mask, wf, 650.0);
    // Pick a sample near the pupil edge along +x.
    const std::size_t r = 32, c = 62;
    const double x = static_cast<double>(c) + 0.5 - 32.0, y = static_cast<double>(r) + 0.5 - 32.0;
    const double rho = std::hypot(x, y) / 32.0;
    const double expect_phase = 2.0 * kPi * (550.0 / 650.0) * 0.5 * zernike_noll(4, rho, std::atan2(y, x));
    const double got_phase = std::arg(pupil.at(r, c));
    CHECK(std::remainder(got_phase - expect_phase, 2.0 * kPi) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("build_pupil: wavelength domain") {
    const ApodizationMask mask = synthesize_apodization(clean_circle(), 64);
    CHECK_THROWS_AS(build_pupil(mask, WavefrontSpec{}, 300.0), DomainError);
    CHECK_THROWS_AS(build_pupil(mask, WavefrontSpec{}, 800.0), DomainError);
}

TEST_CASE("psf: kernels are nonnegative and sum to one") {
    ApertureSpec spec = clean_circle();
    spec.n_blades = 5;
    spec.dust_count = 30;
    spec.scratch_count = 6;
    spec.seed = 12;
    const ApodizationMask mask = synthesize_apodization(spec, 128);
    const PupilFunction pupil = build_pupil(mask, WavefrontSpec{}, 550.0);
    const PsfKernel kern = psf_from_pupil(pupil);
    CHECK(kern.k % 2 == 1);
    CHECK(kern.sum() == doctest::Approx(1.0).epsilon(1e-6));
    for (double v : kern.values) REQUIRE(v >= 0.0);
}

TEST_CASE("psf: zero-phase pupils give point-symmetric kernels") {
    ApertureSpec spec = clean_circle();
    spec.n_blades = 7;
    spec.dust_count = 15;
    spec.seed = 9;
    const ApodizationMask mask = synthesize_apodization(spec, 128);
    const PupilFunction pupil = build_pupil(mask, WavefrontSpec{}, 550.0);
    const PsfKernel kern = psf_from_pupil(pupil);
    const double peak = kernel_peak(kern);
    double worst = 0.0;
    for (std::size_t r = 0; r < kern.k; ++r)
        for (std::size_t c = 0; c < kern.k; ++c)
            worst = std::max(worst, std::fabs(kern.at(r, c) - kern.at(kern.k - 1 - r, kern.k - 1 - c)));
    CHECK(worst <= 1e-12 * peak);
}

TEST_CASE("psf: degenerate all-dark pupil is rejected") {
    PupilFunction pupil;
    pupil.n = 64;
    pupil.values.assign(64 * 64, {0.0, 0.0});
    CHECK_THROWS_AS(psf_from_pupil(pupil), DomainError);
    CHECK_THROWS_AS(psf_direct_dft(pupil), DomainError);
}

TEST_CASE("psf: FFT equals the direct-DFT oracle on 64x64 pupils") {
    ApertureSpec spec = clean_circle();
    spec.n_blades = 6;
    spec.dust_count = 10;
    spec.seed = 4;
    const ApodizationMask mask = synthesize_apodization(spec, 64);
    WavefrontSpec wf;
    wf.zernike = {{4, 0.3}};
    const PupilFunction pupil = build_pupil(mask, wf, 550.0);
    PsfOptions opts;
    opts.crop_energy_tail = 0.0;  // keep full grids so both paths align
    const PsfKernel fft = psf_from_pupil(pupil, opts);
    const PsfKernel dft = psf_direct_dft(pupil, opts);
    REQUIRE(fft.k == dft.k);
    CHECK(fft.sample_pitch_um == doctest::Approx(dft.sample_pitch_um).epsilon(1e-15));
    const double peak = kernel_peak(fft);
    double worst = 0.0;
    for (std::size_t i = 0; i < fft.values.size(); ++i)
        worst = std::max(worst, std::fabs(fft.values[i] - dft.values[i]));
    CHECK(worst <= 1e-9 * peak);
}

TEST_CASE("psf_direct_dft: matches FFT on a 32x32 clean disk and enforces its size cap") {
    PupilFunction pupil;
    pupil.n = 32;
    pupil.lambda_nm = 550.0;
    pupil.f_number = 4.0;
    pupil.pupil_pixel_pitch_mm = 1.5 / 32.0;
    pupil.values.assign(32 * 32, {0.0, 0.0});
    for (std::size_t r = 0; r < 32; ++r)
        for (std::size_t c = 0; c < 32; ++c) {
            const double y = static_cast<double>(r) + 0.5 - 16.0;
            const double x = static_cast<double>(c) + 0.5 - 16.0;
            if (x * x + y * y <= 256.0) pupil.values[r * 32 + c] = 1.0;
        }
    PsfOptions opts;
    opts.crop_energy_tail = 0.0;
    const PsfKernel fft = psf_from_pupil(pupil, opts);
    const PsfKernel dft = psf_direct_dft(pupil, opts);
    REQUIRE(fft.k == dft.k);
    const double peak = kernel_peak(fft);
    for (std::size_t i = 0; i < fft.values.size(); ++i)
        REQUIRE(std::fabs(fft.values[i] - dft.values[i]) <= 1e-9 * peak);

    PupilFunction big;
    big.n = 130;
    big.values.assign(130 * 130, {1.0, 0.0});
    CHECK_THROWS_AS(psf_direct_dft(big), ConfigError);
}

TEST_CASE("psf_direct_dft: single-pixel pupil transforms to a flat kernel") {
    PupilFunction pupil;
    pupil.n = 32;
    pupil.lambda_nm = 550.0;
    pupil.f_number = 4.0;
    pupil.values.assign(32 * 32, {0.0, 0.0});
    pupil.values[5 * 32 + 9] = {0.7, 0.0};
    PsfOptions opts;
    opts.pad_factor = 2;
    opts.crop_energy_tail = 0.0;
    const PsfKernel kern = psf_direct_dft(pupil, opts);
    const double expect = 1.0 / static_cast<double>(kern.values.size());
    for (double v : kern.values) REQUIRE(v == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("psf_direct_dft: all-ones square pupil gives the separable Dirichlet profile") {
    PupilFunction pupil;
    pupil.n = 16;
    pupil.lambda_nm = 550.0;
    pupil.f_number = 4.0;
    pupil.values.assign(16 * 16, {1.0, 0.0});
    PsfOptions opts;
    opts.pad_factor = 4;  // N = 64
    opts.crop_energy_tail = 0.0;
    const PsfKernel kern = psf_direct_dft(pupil, opts);

    // Closed-form 1-D DFT of a length-16 box on N=64: |sin(pi u n/N) / sin(pi u/N)|.
    const std::ptrdiff_t n = 16, N = 64;
    auto dirichlet2 = [&](std::ptrdiff_t u) {
        if (u == 0) return static_cast<double>(n * n);
        const double a = std::sin(kPi * static_cast<double>(u) * n / N);
        const double b = std::sin(kPi * static_cast<double>(u) / N);
        return (a * a) / (b * b);
    };
    double total = 0.0;
    const std::ptrdiff_t hw = N / 2 - 1;
    for (std::ptrdiff_t u = -hw; u <= hw; ++u)
        for (std::ptrdiff_t v = -hw; v <= hw; ++v) total += dirichlet2(u) * dirichlet2(v);
    for (std::ptrdiff_t u = -hw; u <= hw; ++u)
        for (std::ptrdiff_t v = -hw; v <= hw; ++v) {
            const double expect = dirichlet2(u) * dirichlet2(v) / total;
            const double got = kern.at(static_cast<std::size_t>(v + hw), static_cast<std::size_t>(u + hw));
            REQUIRE(got == doctest::Approx(expect).epsilon(1e-9));
        }
}

TEST_CASE("airy_reference: center maximum, unit sum, first-zero radius") {
    const double f = 4.0, lambda = 550.0, pitch = 0.2;
    const PsfKernel airy = airy_reference(f, lambda, pitch, 101);
    CHECK(airy.sum() == doctest::Approx(1.0).epsilon(1e-12));
    const double center = airy.at(50, 50);
    for (double v : airy.values) REQUIRE(v <= center);

    // First zero along +x: where the profile stops falling; compare with
    // the 3.8317/pi Bessel root scaled to samples.
    const double expect_r = 3.8317059702075123 / kPi * (lambda * 1e-3) * f / pitch;
    std::size_t i = 1;
    while (i + 1 < 50 && airy.at(50, 50 + i + 1) < airy.at(50, 50 + i)) ++i;
    CHECK(static_cast<double>(i) == doctest::Approx(expect_r).epsilon(0.08));
    CHECK_THROWS_AS(airy_reference(f, lambda, pitch, 100), ConfigError);
}

TEST_CASE("psf: clean circular aperture matches the Airy pattern") {
    const ApodizationMask mask = synthesize_apodization(clean_circle(), 128);
    WavefrontSpec wf;
    wf.f_number = 4.0;
    const PupilFunction pupil = build_pupil(mask, wf, 550.0);
    PsfOptions opts;
    opts.pad_factor = 8;
    opts.max_kernel = 129;  // comparison window: ~6.6 zero radii
    const PsfKernel kern = psf_from_pupil(pupil, opts);

    const double zero_px = 1.22 * (550.0 * 1e-3) * 4.0 / kern.sample_pitch_um;  // ~9.76 samples
    const auto prof = radial_profile(kern, 3.2 * zero_px, 0.25);

    // First minimum of the azimuthal average.
    std::size_t i = 8;  // skip the core
    while (i + 1 < prof.size() && prof[i + 1] < prof[i]) ++i;
    const double measured_zero = 0.25 * static_cast<double>(i);
    CHECK(measured_zero == doctest::Approx(zero_px).epsilon(0.05));

    // RMS radial-profile error against the sampled Airy reference, both
    // normalized over the same window.
    PsfKernel airy = airy_reference(4.0, 550.0, kern.sample_pitch_um, kern.k);
    const auto aprof = radial_profile(airy, 3.2 * zero_px, 0.25);
    double rms = 0.0, peak = 0.0;
    for (std::size_t j = 0; j < prof.size(); ++j) {
        rms += (prof[j] - aprof[j]) * (prof[j] - aprof[j]);
        peak = std::max(peak, aprof[j]);
    }
    rms = std::sqrt(rms / static_cast<double>(prof.size()));
    CHECK(rms < 0.02 * peak);
}

TEST_CASE("resample_kernel: flux preserved and geometry rescaled") {
    const PsfKernel airy = airy_reference(4.0, 550.0, 0.5, 81);
    const PsfKernel up = resample_kernel(airy, 1.5);
    CHECK(up.sample_pitch_um == 1.5);
    CHECK(up.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(up.k % 2 == 1);
    CHECK(up.k < airy.k);
}

TEST_CASE("apply_optics: delta PSF reduces to the radiometric scale exactly") {
    WavelengthGrid g{450.0, 100.0, 3};
    SpectralImage scene(8, 8, g, SpectralKind::radiance);
    RandomStream rs(2);
    for (double& v : scene.data) v = rs.uniform(0.0, 5.0);
    OpticsSpec optics;
    optics.f_number = 4.0;
    optics.transmission = 1.0;
    const SpectralImage out = apply_optics(scene, delta_psf_stack(g, 3.0), optics);
    CHECK(out.kind == SpectralKind::irradiance);
    const double scale = kPi / (4.0 * 16.0);
    for (std::size_t i = 0; i < out.data.size(); ++i) REQUIRE(out.data[i] == scene.data[i] * scale);
}

TEST_CASE("apply_optics: convolution conserves photon flux when the spread stays in frame") {
    WavelengthGrid g{550.0, 10.0, 1};
    SpectralImage scene(64, 64, g, SpectralKind::radiance, 0.0);
    scene.at(32, 32, 0) = 1e6;
    scene.at(30, 34, 0) = 2e5;

    PsfStack stack;
    stack.grid = g;
    stack.sample_pitch_um = 3.0;
    PsfKernel kern;
    kern.k = 21;
    kern.lambda_nm = 550.0;
    kern.sample_pitch_um = 3.0;
    kern.values.assign(21 * 21, 0.0);
    double s = 0.0;
    for (std::size_t r = 0; r < 21; ++r)
        for (std::size_t c = 0; c < 21; ++c) {
            const double d2 = (static_cast<double>(r) - 10.0) * (static_cast<double>(r) - 10.0) +
                              (static_cast<double>(c) - 10.0) * (static_cast<double>(c) - 10.0);
            kern.values[r * 21 + c] = std::exp(-d2 / 18.0);
            s += kern.values[r * 21 + c];
        }
    for (double& v : kern.values) v /= s;
    stack.kernels = {kern};

    OpticsSpec optics;
    optics.f_number = 2.8;
    optics.transmission = 0.9;
    const SpectralImage out = apply_optics(scene, stack, optics);
    double in_sum = 0.0, out_sum = 0.0;
    for (double v : scene.data) in_sum += v;
    for (double v : out.data) out_sum += v;
    const double expect = in_sum * kPi * 0.9 / (4.0 * 2.8 * 2.8);
    CHECK(out_sum == doctest::Approx(expect).epsilon(1e-6));
}

TEST_CASE("apply_optics: point source through a six-blade dusty aperture matches naive convolution") {
    ApertureSpec spec;
    spec.n_blades = 6;
    spec.dust_count = 20;
    spec.scratch_count = 4;
    spec.seed = 31;
    WavefrontSpec wf;
    wf.f_number = 4.0;
    WavelengthGrid g{550.0, 10.0, 1};
    PsfOptions opts;
    opts.pad_factor = 2;
    PsfStack stack = make_psf_stack(spec, wf, g, 64, 3.0, opts);

    SpectralImage scene(64, 64, g, SpectralKind::radiance, 0.0);
    scene.at(32, 32, 0) = 1e7;
    scene.at(20, 40, 0) = 3e5;

    OpticsSpec optics;
    optics.f_number = 4.0;
    const SpectralImage out = apply_optics(scene, stack, optics);

    Image2D plane(64, 64);
    std::copy(scene.plane(0), scene.plane(0) + 64 * 64, plane.v.begin());
    Image2D expect = conv_naive(plane, stack.kernels[0]);
    const double scale = kPi / (4.0 * 16.0);
    double peak = 0.0;
    for (double& v : expect.v) {
        v *= scale;
        peak = std::max(peak, v);
    }
    for (std::size_t i = 0; i < expect.v.size(); ++i)
        REQUIRE(std::fabs(out.data[i] - expect.v[i]) <= 1e-9 * peak);
}

TEST_CASE("psf: clean six-blade aperture shows six-fold streaks") {
    ApertureSpec spec;
    spec.n_blades = 6;
    const ApodizationMask mask = synthesize_apodization(spec, 128);
    WavefrontSpec wf;
    const PupilFunction pupil = build_pupil(mask, wf, 550.0);
    PsfOptions opts;
    opts.pad_factor = 4;
    const PsfKernel kern = psf_from_pupil(pupil, opts);
    const double c0 = 0.5 * static_cast<double>(kern.k - 1);
    // Streaks run along the edge normals (30 + 60k degrees); compare with
    // the midway directions at a fixed radius.
    const double radius = 30.0;
    auto sample = [&](double deg) {
        const double t = deg * kPi / 180.0;
        const std::size_t x = static_cast<std::size_t>(c0 + radius * std::cos(t));
        const std::size_t y = static_cast<std::size_t>(c0 + radius * std::sin(t));
        return kern.at(y, x);
    };
    double on = 0.0, off = 0.0;
    for (int k = 0; k < 6; ++k) {
        on += sample(30.0 + 60.0 * k);
        off += sample(60.0 * k);
    }
    CHECK(on > 3.0 * off);
}

TEST_CASE("apply_optics: linearity through the full chain") {
    WavelengthGrid g{500.0, 50.0, 2};
    SpectralImage a(32, 32, g, SpectralKind::radiance);
    SpectralImage b(32, 32, g, SpectralKind::radiance);
    RandomStream rs(8);
    for (double& v : a.data) v = rs.uniform(0.0, 2.0);
    for (double& v : b.data) v = rs.uniform(0.0, 2.0);

    ApertureSpec spec;
    spec.n_blades = 5;
    spec.dust_count = 8;
    spec.seed = 77;
    WavefrontSpec wf;
    wf.f_number = 2.0;
    PsfOptions opts;
    opts.pad_factor = 2;
    const PsfStack stack = make_psf_stack(spec, wf, g, 64, 3.0, opts);

    OpticsSpec optics;
    optics.f_number = 2.0;
    optics.transmission = 0.8;
    optics.relative_illumination = true;
    optics.distortion_k1 = 0.05;
    optics.focal_length_mm = 6.0;

    const double alpha = 1.7, beta = 0.4;
    SpectralImage mix(32, 32, g, SpectralKind::radiance);
    for (std::size_t i = 0; i < mix.data.size(); ++i) mix.data[i] = alpha * a.data[i] + beta * b.data[i];

    const SpectralImage oa = apply_optics(a, stack, optics);
    const SpectralImage ob = apply_optics(b, stack, optics);
    const SpectralImage om = apply_optics(mix, stack, optics);
    double peak = 0.0;
    for (double v : om.data) peak = std::max(peak, v);
    for (std::size_t i = 0; i < om.data.size(); ++i)
        REQUIRE(std::fabs(om.data[i] - (alpha * oa.data[i] + beta * ob.data[i])) <= 1e-9 * peak);
}

TEST_CASE("apply_optics: grid mismatch is structural") {
    WavelengthGrid g1{500.0, 50.0, 2};
    WavelengthGrid g2{500.0, 50.0, 3};
    SpectralImage scene(8, 8, g1, SpectralKind::radiance, 1.0);
    CHECK_THROWS_AS(apply_optics(scene, delta_psf_stack(g2, 3.0), OpticsSpec{}), StructuralError);
}

TEST_CASE("zernike: numerically orthonormal over the unit disk") {
    // Noll-normalized terms satisfy mean_disk(Z_i * Z_j) = delta_ij. Midpoint
    // quadrature on a fine polar grid is the independent oracle.
    const int nr = 400, nt = 512;
    for (int i = 1; i <= 11; ++i) {
        for (int j = i; j <= 11; ++j) {
            double acc = 0.0;
            for (int ri = 0; ri < nr; ++ri) {
                const double rho = (ri + 0.5) / nr;
                double ang = 0.0;
                for (int ti = 0; ti < nt; ++ti) {
                    const double theta = 2.0 * kPi * (ti + 0.5) / nt;
                    ang += zernike_noll(i, rho, theta) * zernike_noll(j, rho, theta);
                }
                acc += ang / nt * rho * (1.0 / nr);
            }
            const double inner = 2.0 * acc;  // mean over the disk
            if (i == j)
                CHECK(inner == doctest::Approx(1.0).epsilon(1e-3));
            else
                CHECK(std::fabs(inner) < 1e-3);
        }
    }
}

TEST_CASE("zernike: spot values for astigmatism and quadrafoil") {
    // j=6 is (n=2, m=2, cos): sqrt(6) rho^2 cos(2 theta).
    CHECK(zernike_noll(6, 0.5, 0.0) == doctest::Approx(std::sqrt(6.0) * 0.25).epsilon(1e-12));
    // j=15 is (n=4, m=4, sin): sqrt(10) rho^4 sin(4 theta).
    const double rho = 0.8, theta = 0.37;
    CHECK(zernike_noll(15, rho, theta) ==
          doctest::Approx(std::sqrt(10.0) * std::pow(rho, 4) * std::sin(4.0 * theta)).epsilon(1e-12));
    // j=11 spherical: sqrt(5)(6 rho^4 - 6 rho^2 + 1).
    CHECK(zernike_noll(11, rho, theta) ==
          doctest::Approx(std::sqrt(5.0) * (6.0 * std::pow(rho, 4) - 6.0 * rho * rho + 1.0))
              .epsilon(1e-12));
}

TEST_CASE("fft2: forward-inverse round trip is the identity") {
    RandomStream rs(55);
    const std::size_t rows = 24, cols = 40;
    std::vector<std::complex<double>> data(rows * cols);
    for (auto& z : data) z = {rs.uniform(-1.0, 1.0), rs.uniform(-1.0, 1.0)};
    auto orig = data;
    fft2(data, rows, cols, false);
    fft2(data, rows, cols, true);
    for (std::size_t i = 0; i < data.size(); ++i) {
        REQUIRE(data[i].real() == doctest::Approx(orig[i].real()).epsilon(1e-12));
        REQUIRE(data[i].imag() == doctest::Approx(orig[i].imag()).epsilon(1e-12));
    }
}

TEST_CASE("convolve_same: rectangular kernels match a naive double loop") {
    RandomStream rs(66);
    Image2D img(20, 13);
    for (double& v : img.v) v = rs.uniform(-2.0, 2.0);
    Image2D kern(7, 5);
    for (double& v : kern.v) v = rs.uniform(-1.0, 1.0);

    const Image2D fast = convolve_same(img, kern);

    const std::ptrdiff_t hr = 3, hc = 2;
    double peak = 0.0;
    for (double v : fast.v) peak = std::max(peak, std::fabs(v));
    for (std::ptrdiff_t r = 0; r < 20; ++r)
        for (std::ptrdiff_t c = 0; c < 13; ++c) {
            double acc = 0.0;
            for (std::ptrdiff_t i = 0; i < 7; ++i)
                for (std::ptrdiff_t j = 0; j < 5; ++j) {
                    const std::ptrdiff_t rr = r - (i - hr);
                    const std::ptrdiff_t cc = c - (j - hc);
                    if (rr < 0 || cc < 0 || rr >= 20 || cc >= 13) continue;
                    acc += img.at(static_cast<std::size_t>(rr), static_cast<std::size_t>(cc)) *
                           kern.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
                }
            REQUIRE(std::fabs(fast.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) - acc) <=
                    1e-12 * peak);
        }
    CHECK_THROWS_AS(convolve_same(img, Image2D(4, 5)), StructuralError);
}

TEST_CASE("apodization: open-area fractions match polygon area ratios for several blade counts") {
    const ApodizationMask disk = synthesize_apodization(clean_circle(), 512);
    double open_disk = 0.0;
    for (double v : disk.values) open_disk += v;
    for (int blades : {3, 4, 5, 8}) {
        ApertureSpec spec = clean_circle();
        spec.n_blades = blades;
        spec.blade_rotation_rad = 0.3;
        const ApodizationMask mask = synthesize_apodization(spec, 512);
        double open = 0.0;
        for (double v : mask.values) open += v;
        const double expect = blades * std::sin(2.0 * kPi / blades) / (2.0 * kPi);
        CHECK(open / open_disk == doctest::Approx(expect).epsilon(0.012 / expect));
    }
}

TEST_CASE("make_psf_stack: deterministic across worker counts") {
    ApertureSpec spec;
    spec.n_blades = 4;
    spec.dust_count = 12;
    spec.seed = 15;
    WavefrontSpec wf;
    WavelengthGrid g{450.0, 100.0, 3};
    PsfOptions opts;
    opts.pad_factor = 2;
    set_thread_count(1);
    const PsfStack s1 = make_psf_stack(spec, wf, g, 64, 3.0, opts);
    set_thread_count(4);
    const PsfStack s4 = make_psf_stack(spec, wf, g, 64, 3.0, opts);
    set_thread_count(1);
    REQUIRE(s1.kernels.size() == s4.kernels.size());
    for (std::size_t i = 0; i < s1.kernels.size(); ++i) {
        REQUIRE(s1.kernels[i].k == s4.kernels[i].k);
        REQUIRE(s1.kernels[i].values == s4.kernels[i].values);
    }
}
