#include "hdrsim/flare.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "hdrsim/fft.hpp"
#include "hdrsim/rng.hpp"

namespace hdrsim {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::uint64_t kDustStage = 1;
constexpr std::uint64_t kScratchStage = 2;

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= static_cast<double>(i);
    return f;
}

void check_range(const std::pair<double, double>& r, const char* what) {
    if (!(r.first > 0.0) || !(r.second <= 1.0) || r.first > r.second)
        throw ConfigError(std::string("aperture spec: ") + what + " range must satisfy 0 < min <= max <= 1");
}

// Uniform point inside the disk of the given radius, by rejection.
std::pair<double, double> sample_in_disk(RandomStream& rs, double radius) {
    for (;;) {
        const double x = rs.uniform(-radius, radius);
        const double y = rs.uniform(-radius, radius);
        if (x * x + y * y <= radius * radius) return {x, y};
    }
}

double dist_point_segment(double px, double py, double ax, double ay, double bx, double by) {
    const double dx = bx - ax, dy = by - ay;
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0.0 ? ((px - ax) * dx + (py - ay) * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double cx = ax + t * dx, cy = ay + t * dy;
    return std::hypot(px - cx, py - cy);
}

// Pixel-center coordinate relative to the grid center.
inline double coord(std::size_t i, std::size_t n) {
    return static_cast<double>(i) + 0.5 - 0.5 * static_cast<double>(n);
}

struct CropResult {
    std::size_t k = 0;
    std::vector<double> values;
};

// Smallest centered odd window holding >= (1 - tail) of the energy, capped.
CropResult crop_centered(const std::vector<double>& grid, std::size_t m, double tail, std::size_t max_kernel) {
    double total = 0.0;
    for (double v : grid) total += v;
    const std::size_t center = m / 2;  // m is odd
    std::size_t half = m / 2;
    if (tail > 0.0 && total > 0.0) {
        const double target = (1.0 - tail) * total;
        double acc = grid[center * m + center];
        std::size_t h = 0;
        while (acc < target && h < m / 2) {
            ++h;
            // ring at half-width h
            for (std::size_t c = center - h; c <= center + h; ++c) {
                acc += grid[(center - h) * m + c];
                acc += grid[(center + h) * m + c];
            }
            for (std::size_t r = center - h + 1; r <= center + h - 1; ++r) {
                acc += grid[r * m + (center - h)];
                acc += grid[r * m + (center + h)];
            }
        }
        half = h;
    }
    if (max_kernel > 0) {
        const std::size_t cap_half = (std::min(max_kernel, m) - 1) / 2;
        half = std::min(half, cap_half);
    }
    CropResult out;
    out.k = 2 * half + 1;
    out.values.resize(out.k * out.k);
    double sum = 0.0;
    for (std::size_t r = 0; r < out.k; ++r)
        for (std::size_t c = 0; c < out.k; ++c) {
            const double v = grid[(center - half + r) * m + (center - half + c)];
            out.values[r * out.k + c] = v;
            sum += v;
        }
    if (!(sum > 0.0)) throw DomainError("psf: cropped kernel has zero energy");
    for (double& v : out.values) v /= sum;
    return out;
}

}  // namespace

void ApertureSpec::validate() const {
    if (n_blades != 0 && n_blades < 3) throw ConfigError("aperture spec: n_blades must be 0 or >= 3");
    if (!(pupil_diameter_mm > 0.0)) throw ConfigError("aperture spec: pupil diameter must be > 0");
    if (dust_count < 0 || scratch_count < 0) throw ConfigError("aperture spec: counts must be >= 0");
    if (dust_count > 0) check_range(dust_radius_range, "dust radius");
    if (scratch_count > 0) {
        check_range(scratch_width_range, "scratch width");
        check_range(scratch_length_range, "scratch length");
    }
    if (!(occlusion_opacity >= 0.0 && occlusion_opacity <= 1.0))
        throw ConfigError("aperture spec: occlusion opacity must be in [0,1]");
}

void WavefrontSpec::validate() const {
    if (!(f_number > 0.0)) throw ConfigError("wavefront spec: f-number must be > 0");
    if (!(focal_length_mm > 0.0)) throw ConfigError("wavefront spec: focal length must be > 0");
    if (!(reference_lambda_nm > 0.0)) throw ConfigError("wavefront spec: reference wavelength must be > 0");
    for (const auto& t : zernike) {
        if (t.noll_index < 1) throw ConfigError("wavefront spec: Noll indices start at 1");
        if (!std::isfinite(t.coefficient_waves))
            throw ConfigError("wavefront spec: Zernike coefficients must be finite");
    }
}

void OpticsSpec::validate() const {
    if (!(f_number > 0.0)) throw ConfigError("optics spec: f-number must be > 0");
    if (!(focal_length_mm > 0.0)) throw ConfigError("optics spec: focal length must be > 0");
    if (!(transmission > 0.0 && transmission <= 1.0))
        throw ConfigError("optics spec: transmission must be in (0,1]");
    if (!std::isfinite(distortion_k1)) throw ConfigError("optics spec: distortion k1 must be finite");
}

double PsfKernel::sum() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
}

double zernike_noll(int j, double rho, double theta) {
    if (j < 1) throw ConfigError("zernike_noll: index must be >= 1");
    // Radial order n: first order whose triangle number reaches j.
    int n = 0;
    while ((n + 1) * (n + 2) / 2 < j) ++n;
    const int jr = j - n * (n + 1) / 2 - 1;  // 0-based position within the order
    const int m = (n % 2 == 0) ? 2 * ((jr + 1) / 2) : 2 * (jr / 2) + 1;

    double radial = 0.0;
    for (int s = 0; s <= (n - m) / 2; ++s) {
        const double num = factorial(n - s);
        const double den = factorial(s) * factorial((n + m) / 2 - s) * factorial((n - m) / 2 - s);
        const double sign = (s % 2 == 0) ? 1.0 : -1.0;
        radial += sign * num / den * std::pow(rho, n - 2 * s);
    }
    const double norm = (m == 0) ? std::sqrt(static_cast<double>(n + 1))
                                 : std::sqrt(2.0 * static_cast<double>(n + 1));
    if (m == 0) return norm * radial;
    return norm * radial * ((j % 2 == 0) ? std::cos(m * theta) : std::sin(m * theta));
}

ApodizationMask synthesize_apodization(const ApertureSpec& spec, std::size_t n) {
    spec.validate();
    if (n < 64 || n % 2 != 0)
        throw ConfigError("synthesize_apodization: grid size must be even and >= 64");

    ApodizationMask mask;
    mask.n = n;
    mask.values.assign(n * n, 0.0);
    mask.pupil_pixel_pitch_mm = spec.pupil_diameter_mm / static_cast<double>(n);

    const double radius = 0.5 * static_cast<double>(n);

    if (spec.n_blades == 0) {
        const double r2 = radius * radius;
        for (std::size_t r = 0; r < n; ++r) {
            const double y = coord(r, n);
            for (std::size_t c = 0; c < n; ++c) {
                const double x = coord(c, n);
                if (x * x + y * y <= r2) mask.at(r, c) = 1.0;
            }
        }
    } else {
        // Regular polygon inscribed in the pupil disk: intersection of
        // half-planes with outward normals bisecting consecutive vertices.
        const int nb = spec.n_blades;
        const double apothem = radius * std::cos(kPi / nb);
        std::vector<std::pair<double, double>> normals(static_cast<std::size_t>(nb));
        for (int k = 0; k < nb; ++k) {
            const double a = spec.blade_rotation_rad + 2.0 * kPi * (k + 0.5) / nb;
            normals[static_cast<std::size_t>(k)] = {std::cos(a), std::sin(a)};
        }
        for (std::size_t r = 0; r < n; ++r) {
            const double y = coord(r, n);
            for (std::size_t c = 0; c < n; ++c) {
                const double x = coord(c, n);
                bool inside = true;
                for (const auto& nm : normals) {
                    if (x * nm.first + y * nm.second > apothem) {
                        inside = false;
                        break;
                    }
                }
                if (inside) mask.at(r, c) = 1.0;
            }
        }
    }

    const double transmit = 1.0 - spec.occlusion_opacity;

    for (int i = 0; i < spec.dust_count; ++i) {
        RandomStream rs = RandomStream::keyed(spec.seed, kDustStage, static_cast<std::uint64_t>(i));
        const auto [cx, cy] = sample_in_disk(rs, radius);
        const double dr = rs.uniform(spec.dust_radius_range.first, spec.dust_radius_range.second) * radius;
        const std::size_t r_lo = static_cast<std::size_t>(std::max(0.0, std::floor(cy - dr + radius)));
        const std::size_t r_hi = std::min(n - 1, static_cast<std::size_t>(std::max(0.0, std::ceil(cy + dr + radius))));
        for (std::size_t r = r_lo; r <= r_hi; ++r) {
            const double y = coord(r, n);
            for (std::size_t c = 0; c < n; ++c) {
                const double x = coord(c, n);
                if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= dr * dr) mask.at(r, c) *= transmit;
            }
        }
    }

    for (int i = 0; i < spec.scratch_count; ++i) {
        RandomStream rs = RandomStream::keyed(spec.seed, kScratchStage, static_cast<std::uint64_t>(i));
        const auto [cx, cy] = sample_in_disk(rs, radius);
        const double angle = rs.uniform(0.0, 2.0 * kPi);
        const double len = rs.uniform(spec.scratch_length_range.first, spec.scratch_length_range.second) * radius;
        const double width = rs.uniform(spec.scratch_width_range.first, spec.scratch_width_range.second) * radius;
        const double ax = cx - 0.5 * len * std::cos(angle), ay = cy - 0.5 * len * std::sin(angle);
        const double bx = cx + 0.5 * len * std::cos(angle), by = cy + 0.5 * len * std::sin(angle);
        const double reach = 0.5 * width + 1.0;
        const double ylo = std::min(ay, by) - reach, yhi = std::max(ay, by) + reach;
        const std::size_t r_lo = static_cast<std::size_t>(std::clamp(std::floor(ylo + radius), 0.0, double(n - 1)));
        const std::size_t r_hi = static_cast<std::size_t>(std::clamp(std::ceil(yhi + radius), 0.0, double(n - 1)));
        for (std::size_t r = r_lo; r <= r_hi; ++r) {
            const double y = coord(r, n);
            for (std::size_t c = 0; c < n; ++c) {
                const double x = coord(c, n);
                if (dist_point_segment(x, y, ax, ay, bx, by) <= 0.5 * width) mask.at(r, c) *= transmit;
            }
        }
    }

    return mask;
}

PupilFunction build_pupil(const ApodizationMask& mask, const WavefrontSpec& wf, double lambda_nm) {
    wf.validate();
    if (lambda_nm < 350.0 || lambda_nm > 780.0)
        throw DomainError("build_pupil: wavelength outside the supported [350, 780] nm span");

    PupilFunction pupil;
    pupil.n = mask.n;
    pupil.lambda_nm = lambda_nm;
    pupil.pupil_pixel_pitch_mm = mask.pupil_pixel_pitch_mm;
    pupil.f_number = wf.f_number;
    pupil.values.assign(mask.n * mask.n, {0.0, 0.0});

    const double radius = 0.5 * static_cast<double>(mask.n);
    const double phase_scale = 2.0 * kPi * wf.reference_lambda_nm / lambda_nm;
    const bool aberrated = !wf.zernike.empty();

    for (std::size_t r = 0; r < mask.n; ++r) {
        const double y = coord(r, mask.n);
        for (std::size_t c = 0; c < mask.n; ++c) {
            const double a = mask.at(r, c);
            if (a == 0.0) continue;
            if (!aberrated) {
                pupil.at(r, c) = {a, 0.0};
                continue;
            }
            const double x = coord(c, mask.n);
            const double rho = std::min(1.0, std::hypot(x, y) / radius);
            const double theta = std::atan2(y, x);
            double opd = 0.0;
            for (const auto& t : wf.zernike) opd += t.coefficient_waves * zernike_noll(t.noll_index, rho, theta);
            const double phi = phase_scale * opd;
            pupil.at(r, c) = {a * std::cos(phi), a * std::sin(phi)};
        }
    }
    return pupil;
}

PsfKernel psf_from_pupil(const PupilFunction& pupil, const PsfOptions& options) {
    if (options.pad_factor < 1) throw ConfigError("psf: pad_factor must be >= 1");
    bool any = false;
    for (const auto& z : pupil.values)
        if (z != std::complex<double>(0.0, 0.0)) { any = true; break; }
    if (!any) throw DomainError("psf: degenerate all-dark pupil");

    const std::size_t n = pupil.n;
    const std::size_t fftn = options.pad_factor * n;
    std::vector<std::complex<double>> field(fftn * fftn, {0.0, 0.0});
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) field[r * fftn + c] = pupil.at(r, c);

    fft2(field, fftn, fftn, false);

    // Centered |F|^2 on the odd (fftn-1)^2 grid; index fftn/2 - 1 is DC.
    const std::size_t m = fftn - 1;
    std::vector<double> power(m * m);
    const std::size_t half = fftn / 2;
    for (std::size_t r = 0; r < m; ++r) {
        const std::size_t rr = (r + 1 + half) % fftn;
        for (std::size_t c = 0; c < m; ++c) {
            const std::size_t cc = (c + 1 + half) % fftn;
            power[r * m + c] = std::norm(field[rr * fftn + cc]);
        }
    }

    CropResult cropped = crop_centered(power, m, options.crop_energy_tail, options.max_kernel);

    PsfKernel kern;
    kern.k = cropped.k;
    kern.lambda_nm = pupil.lambda_nm;
    kern.sample_pitch_um = pupil.lambda_nm * 1e-3 * pupil.f_number * static_cast<double>(n) /
                           static_cast<double>(fftn);
    kern.values = std::move(cropped.values);
    return kern;
}

PsfKernel psf_direct_dft(const PupilFunction& pupil, const PsfOptions& options) {
    if (pupil.n > 128) {
        std::ostringstream os;
        os << "psf_direct_dft: pupil grid " << pupil.n
           << " exceeds 128; the explicit double sum is O(n^4) and reserved for oracle-sized grids";
        throw ConfigError(os.str());
    }
    if (options.pad_factor < 1) throw ConfigError("psf: pad_factor must be >= 1");

    struct Sample {
        std::ptrdiff_t x, y;
        std::complex<double> w;
    };
    std::vector<Sample> samples;
    for (std::size_t r = 0; r < pupil.n; ++r)
        for (std::size_t c = 0; c < pupil.n; ++c) {
            const std::complex<double> w = pupil.at(r, c);
            if (w != std::complex<double>(0.0, 0.0))
                samples.push_back({static_cast<std::ptrdiff_t>(c), static_cast<std::ptrdiff_t>(r), w});
        }
    if (samples.empty()) throw DomainError("psf: degenerate all-dark pupil");

    const std::ptrdiff_t fftn = static_cast<std::ptrdiff_t>(options.pad_factor * pupil.n);
    const std::ptrdiff_t m = fftn - 1;
    const std::ptrdiff_t hw = fftn / 2 - 1;  // centered frequencies [-hw, +hw]

    // exp(-2 pi i t / N) lookup over one period.
    std::vector<std::complex<double>> twiddle(static_cast<std::size_t>(fftn));
    for (std::ptrdiff_t t = 0; t < fftn; ++t) {
        const double a = -2.0 * kPi * static_cast<double>(t) / static_cast<double>(fftn);
        twiddle[static_cast<std::size_t>(t)] = {std::cos(a), std::sin(a)};
    }

    std::vector<double> power(static_cast<std::size_t>(m * m));
    parallel_for(static_cast<std::size_t>(m), [&](std::size_t row) {
        const std::ptrdiff_t v = static_cast<std::ptrdiff_t>(row) - hw;
        for (std::ptrdiff_t u = -hw; u <= hw; ++u) {
            std::complex<double> acc{0.0, 0.0};
            for (const Sample& s : samples) {
                std::ptrdiff_t t = (u * s.x + v * s.y) % fftn;
                if (t < 0) t += fftn;
                acc += s.w * twiddle[static_cast<std::size_t>(t)];
            }
            power[row * static_cast<std::size_t>(m) + static_cast<std::size_t>(u + hw)] = std::norm(acc);
        }
    });

    CropResult cropped = crop_centered(power, static_cast<std::size_t>(m), options.crop_energy_tail,
                                       options.max_kernel);

    PsfKernel kern;
    kern.k = cropped.k;
    kern.lambda_nm = pupil.lambda_nm;
    kern.sample_pitch_um = pupil.lambda_nm * 1e-3 * pupil.f_number * static_cast<double>(pupil.n) /
                           static_cast<double>(fftn);
    kern.values = std::move(cropped.values);
    return kern;
}

PsfKernel airy_reference(double f_number, double lambda_nm, double pitch_um, std::size_t k) {
    if (k % 2 == 0) throw ConfigError("airy_reference: kernel size must be odd");
    if (!(f_number > 0.0) || !(lambda_nm > 0.0) || !(pitch_um > 0.0))
        throw ConfigError("airy_reference: arguments must be positive");

    PsfKernel kern;
    kern.k = k;
    kern.lambda_nm = lambda_nm;
    kern.sample_pitch_um = pitch_um;
    kern.values.assign(k * k, 0.0);

    const double lambda_um = lambda_nm * 1e-3;
    const std::ptrdiff_t c0 = static_cast<std::ptrdiff_t>(k / 2);
    double sum = 0.0;
    for (std::size_t r = 0; r < k; ++r)
        for (std::size_t c = 0; c < k; ++c) {
            const double dy = static_cast<double>(static_cast<std::ptrdiff_t>(r) - c0);
            const double dx = static_cast<double>(static_cast<std::ptrdiff_t>(c) - c0);
            const double rad = std::hypot(dx, dy) * pitch_um;
            const double v = kPi * rad / (lambda_um * f_number);
            const double amp = v == 0.0 ? 1.0 : 2.0 * std::cyl_bessel_j(1, v) / v;
            kern.values[r * k + c] = amp * amp;
            sum += amp * amp;
        }
    for (double& v : kern.values) v /= sum;
    return kern;
}

PsfKernel resample_kernel(const PsfKernel& kernel, double target_pitch_um) {
    if (!(target_pitch_um > 0.0)) throw ConfigError("resample_kernel: target pitch must be > 0");
    if (kernel.sample_pitch_um == target_pitch_um) return kernel;

    const double ratio = kernel.sample_pitch_um / target_pitch_um;
    const std::ptrdiff_t src_half = static_cast<std::ptrdiff_t>(kernel.k / 2);
    const std::ptrdiff_t dst_half =
        static_cast<std::ptrdiff_t>(std::ceil(static_cast<double>(src_half) * ratio)) + 1;
    const std::size_t kd = static_cast<std::size_t>(2 * dst_half + 1);

    PsfKernel out;
    out.k = kd;
    out.lambda_nm = kernel.lambda_nm;
    out.sample_pitch_um = target_pitch_um;
    out.values.assign(kd * kd, 0.0);

    for (std::size_t r = 0; r < kernel.k; ++r)
        for (std::size_t c = 0; c < kernel.k; ++c) {
            const double mass = kernel.at(r, c);
            if (mass == 0.0) continue;
            const double x = (static_cast<double>(c) - static_cast<double>(src_half)) * ratio +
                             static_cast<double>(dst_half);
            const double y = (static_cast<double>(r) - static_cast<double>(src_half)) * ratio +
                             static_cast<double>(dst_half);
            const std::ptrdiff_t x0 = static_cast<std::ptrdiff_t>(std::floor(x));
            const std::ptrdiff_t y0 = static_cast<std::ptrdiff_t>(std::floor(y));
            const double fx = x - static_cast<double>(x0);
            const double fy = y - static_cast<double>(y0);
            const double w[4] = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
            const std::ptrdiff_t xs[4] = {x0, x0 + 1, x0, x0 + 1};
            const std::ptrdiff_t ys[4] = {y0, y0, y0 + 1, y0 + 1};
            for (int i = 0; i < 4; ++i) {
                if (xs[i] < 0 || ys[i] < 0 || xs[i] >= static_cast<std::ptrdiff_t>(kd) ||
                    ys[i] >= static_cast<std::ptrdiff_t>(kd))
                    continue;
                out.values[static_cast<std::size_t>(ys[i]) * kd + static_cast<std::size_t>(xs[i])] +=
                    mass * w[i];
            }
        }

    const double sum = out.sum();
    if (!(sum > 0.0)) throw DomainError("resample_kernel: kernel lost all energy");
    for (double& v : out.values) v /= sum;
    return out;
}

PsfStack make_psf_stack(const ApertureSpec& aperture, const WavefrontSpec& wavefront,
                        const WavelengthGrid& grid, std::size_t pupil_n, double target_pitch_um,
                        const PsfOptions& options) {
    grid.validate();
    const ApodizationMask mask = synthesize_apodization(aperture, pupil_n);

    PsfStack stack;
    stack.grid = grid;
    stack.sample_pitch_um = target_pitch_um;
    stack.kernels.resize(grid.count);
    parallel_for(grid.count, [&](std::size_t w) {
        const PupilFunction pupil = build_pupil(mask, wavefront, grid.lambda(w));
        PsfKernel kern = psf_from_pupil(pupil, options);
        kern = resample_kernel(kern, target_pitch_um);
        if (options.max_kernel > 0 && kern.k > options.max_kernel) {
            // Resampling can outgrow the cap; re-crop to it.
            CropResult rc = crop_centered(kern.values, kern.k, 0.0, options.max_kernel);
            kern.k = rc.k;
            kern.values = std::move(rc.values);
        }
        stack.kernels[w] = std::move(kern);
    });
    return stack;
}

PsfStack delta_psf_stack(const WavelengthGrid& grid, double target_pitch_um) {
    grid.validate();
    PsfStack stack;
    stack.grid = grid;
    stack.sample_pitch_um = target_pitch_um;
    stack.kernels.resize(grid.count);
    for (std::size_t w = 0; w < grid.count; ++w) {
        PsfKernel& kern = stack.kernels[w];
        kern.k = 1;
        kern.lambda_nm = grid.lambda(w);
        kern.sample_pitch_um = target_pitch_um;
        kern.values = {1.0};
    }
    return stack;
}

SpectralImage apply_optics(const SpectralImage& radiance, const PsfStack& psfs, const OpticsSpec& optics) {
    optics.validate();
    if (!(radiance.grid == psfs.grid))
        throw StructuralError("apply_optics: radiance and PSF stack wavelength grids differ");
    if (radiance.kind != SpectralKind::radiance)
        throw DomainError("apply_optics: input must be a radiance image");
    if (psfs.kernels.size() != radiance.grid.count)
        throw StructuralError("apply_optics: PSF stack is missing kernels");

    const std::size_t rows = radiance.rows, cols = radiance.cols;
    SpectralImage out(rows, cols, radiance.grid, SpectralKind::irradiance);

    const double rad_scale = kPi * optics.transmission / (4.0 * optics.f_number * optics.f_number);
    const double cy = 0.5 * static_cast<double>(rows - 1);
    const double cx = 0.5 * static_cast<double>(cols - 1);

    // cos^4 falloff from field angle; shared by all wavelengths.
    Image2D ri_gain;
    if (optics.relative_illumination) {
        ri_gain = Image2D(rows, cols, 1.0);
        const double pitch_mm = psfs.sample_pitch_um * 1e-3;
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c) {
                const double h = std::hypot((static_cast<double>(r) - cy), (static_cast<double>(c) - cx)) * pitch_mm;
                const double ct = std::cos(std::atan(h / optics.focal_length_mm));
                ri_gain.at(r, c) = ct * ct * ct * ct;
            }
    }

    const double rdiag = std::hypot(cy, cx);

    parallel_for(radiance.grid.count, [&](std::size_t w) {
        Image2D plane(rows, cols);
        std::copy(radiance.plane(w), radiance.plane(w) + rows * cols, plane.v.begin());

        const PsfKernel& kern = psfs.kernels[w];
        Image2D img(kern.k, kern.k);
        img.v = kern.values;
        Image2D conv = convolve_same(plane, img);

        for (double& v : conv.v) v *= rad_scale;

        if (optics.relative_illumination)
            for (std::size_t p = 0; p < conv.v.size(); ++p) conv.v[p] *= ri_gain.v[p];

        if (optics.distortion_k1 != 0.0) {
            Image2D warped(rows, cols, 0.0);
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t c = 0; c < cols; ++c) {
                    const double dy = static_cast<double>(r) - cy;
                    const double dx = static_cast<double>(c) - cx;
                    const double rn = rdiag > 0.0 ? std::hypot(dx, dy) / rdiag : 0.0;
                    const double g = 1.0 + optics.distortion_k1 * rn * rn;
                    const double sy = cy + dy * g;
                    const double sx = cx + dx * g;
                    const std::ptrdiff_t y0 = static_cast<std::ptrdiff_t>(std::floor(sy));
                    const std::ptrdiff_t x0 = static_cast<std::ptrdiff_t>(std::floor(sx));
                    const double fy = sy - static_cast<double>(y0);
                    const double fx = sx - static_cast<double>(x0);
                    double acc = 0.0;
                    const double wgt[4] = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
                    const std::ptrdiff_t yy[4] = {y0, y0, y0 + 1, y0 + 1};
                    const std::ptrdiff_t xx[4] = {x0, x0 + 1, x0, x0 + 1};
                    for (int i = 0; i < 4; ++i) {
                        if (yy[i] < 0 || xx[i] < 0 || yy[i] >= static_cast<std::ptrdiff_t>(rows) ||
                            xx[i] >= static_cast<std::ptrdiff_t>(cols))
                            continue;
                        acc += wgt[i] *
                               conv.at(static_cast<std::size_t>(yy[i]), static_cast<std::size_t>(xx[i]));
                    }
                    warped.at(r, c) = acc;
                }
            conv = std::move(warped);
        }

        // Convolution of nonnegative inputs stays nonnegative up to FFT
        // rounding; clamp the dust.
        double* dst = out.plane(w);
        for (std::size_t p = 0; p < rows * cols; ++p) dst[p] = std::max(0.0, conv.v[p]);
    });

    return out;
}

}  // namespace hdrsim
