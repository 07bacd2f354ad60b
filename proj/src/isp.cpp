#include "hdrsim/isp.hpp"

#include <algorithm>
#include <cmath>

#include "hdrsim/photometry.hpp"

namespace hdrsim {

namespace {

// Mirror (symmetric) boundary index.
std::size_t mirror_index(std::ptrdiff_t i, std::size_t n) {
    const std::ptrdiff_t nn = static_cast<std::ptrdiff_t>(n);
    while (i < 0 || i >= nn) {
        if (i < 0) i = -i - 1;
        if (i >= nn) i = 2 * nn - 1 - i;
    }
    return static_cast<std::size_t>(i);
}

// Separable triangle kernel sized to the tile stride: weight (t - |d|)/t.
std::vector<double> triangle_kernel(std::size_t t) {
    std::vector<double> k(2 * t - 1);
    for (std::size_t i = 0; i < k.size(); ++i) {
        const double d = std::fabs(static_cast<double>(i) - static_cast<double>(t - 1));
        k[i] = (static_cast<double>(t) - d) / static_cast<double>(t);
    }
    return k;
}

Image2D conv_mirror(const Image2D& img, const std::vector<double>& krow, const std::vector<double>& kcol) {
    const std::ptrdiff_t hr = static_cast<std::ptrdiff_t>(krow.size() / 2);
    const std::ptrdiff_t hc = static_cast<std::ptrdiff_t>(kcol.size() / 2);
    Image2D tmp(img.rows, img.cols);
    for (std::size_t r = 0; r < img.rows; ++r)
        for (std::size_t c = 0; c < img.cols; ++c) {
            double acc = 0.0;
            for (std::size_t i = 0; i < kcol.size(); ++i) {
                const std::size_t cc =
                    mirror_index(static_cast<std::ptrdiff_t>(c) + static_cast<std::ptrdiff_t>(i) - hc, img.cols);
                acc += kcol[i] * img.at(r, cc);
            }
            tmp.at(r, c) = acc;
        }
    Image2D out(img.rows, img.cols);
    for (std::size_t r = 0; r < img.rows; ++r)
        for (std::size_t c = 0; c < img.cols; ++c) {
            double acc = 0.0;
            for (std::size_t i = 0; i < krow.size(); ++i) {
                const std::size_t rr =
                    mirror_index(static_cast<std::ptrdiff_t>(r) + static_cast<std::ptrdiff_t>(i) - hr, img.rows);
                acc += krow[i] * tmp.at(rr, c);
            }
            out.at(r, c) = acc;
        }
    return out;
}

// Interpolates one channel from its sample lattice; sampled sites keep the
// original mosaic value.
Image2D interp_channel(const Image2D& mosaic, const ColorFilterArray& cfa, CfaChannel ch) {
    Image2D masked(mosaic.rows, mosaic.cols, 0.0);
    Image2D mask(mosaic.rows, mosaic.cols, 0.0);
    for (std::size_t r = 0; r < mosaic.rows; ++r)
        for (std::size_t c = 0; c < mosaic.cols; ++c)
            if (cfa.channel_at(r, c) == ch) {
                masked.at(r, c) = mosaic.at(r, c);
                mask.at(r, c) = 1.0;
            }
    const auto kr = triangle_kernel(cfa.tile_rows);
    const auto kc = triangle_kernel(cfa.tile_cols);
    const Image2D num = conv_mirror(masked, kr, kc);
    const Image2D den = conv_mirror(mask, kr, kc);
    Image2D out(mosaic.rows, mosaic.cols);
    for (std::size_t p = 0; p < out.v.size(); ++p) {
        if (mask.v[p] == 1.0)
            out.v[p] = masked.v[p];
        else if (den.v[p] > 0.0)
            out.v[p] = num.v[p] / den.v[p];
        else
            out.v[p] = 0.0;
    }
    return out;
}

void check_mosaic(const Image2D& mosaic, const ColorFilterArray& cfa) {
    cfa.validate();
    if (mosaic.rows % cfa.tile_rows != 0 || mosaic.cols % cfa.tile_cols != 0)
        throw ConfigError("demosaic: mosaic dimensions must be multiples of the CFA tile");
}

double lab_f(double t) {
    constexpr double delta = 6.0 / 29.0;
    constexpr double delta3 = delta * delta * delta;
    if (t > delta3) return std::cbrt(t);
    return t / (3.0 * delta * delta) + 4.0 / 29.0;
}

double srgb_encode(double l) {
    if (l <= 0.0031308) return 12.92 * l;
    return 1.055 * std::pow(l, 1.0 / 2.4) - 0.055;
}

}  // namespace

RgbImage demosaic_bilinear(const Image2D& mosaic, const ColorFilterArray& cfa) {
    check_mosaic(mosaic, cfa);
    if (cfa.contains(CfaChannel::W))
        throw ConfigError("demosaic_bilinear handles RGB mosaics; use demosaic_rgbw for RGBW tiles");
    for (CfaChannel ch : {CfaChannel::R, CfaChannel::G, CfaChannel::B})
        if (!cfa.contains(ch))
            throw ConfigError(std::string("demosaic_bilinear: pattern lacks channel ") + to_string(ch));

    RgbImage out(mosaic.rows, mosaic.cols, RgbPrimaries::sensor_native);
    const CfaChannel chans[3] = {CfaChannel::R, CfaChannel::G, CfaChannel::B};
    for (std::size_t ch = 0; ch < 3; ++ch) {
        const Image2D plane = interp_channel(mosaic, cfa, chans[ch]);
        std::copy(plane.v.begin(), plane.v.end(), out.plane(ch));
    }
    return out;
}

RgbImage demosaic_rgbw(const Image2D& mosaic, const ColorFilterArray& cfa) {
    check_mosaic(mosaic, cfa);
    for (CfaChannel ch : {CfaChannel::R, CfaChannel::G, CfaChannel::B, CfaChannel::W})
        if (!cfa.contains(ch))
            throw ConfigError(std::string("demosaic_rgbw: pattern lacks channel ") + to_string(ch));

    const Image2D r = interp_channel(mosaic, cfa, CfaChannel::R);
    const Image2D g = interp_channel(mosaic, cfa, CfaChannel::G);
    const Image2D b = interp_channel(mosaic, cfa, CfaChannel::B);
    const Image2D w = interp_channel(mosaic, cfa, CfaChannel::W);

    RgbImage out(mosaic.rows, mosaic.cols, RgbPrimaries::sensor_native);
    for (std::size_t p = 0; p < r.v.size(); ++p) {
        const double luma = 0.299 * r.v[p] + 0.587 * g.v[p] + 0.114 * b.v[p];
        double scale = 1.0;
        if (luma > 0.0) scale = std::clamp(w.v[p] / luma, 0.25, 4.0);
        out.plane(0)[p] = r.v[p] * scale;
        out.plane(1)[p] = g.v[p] * scale;
        out.plane(2)[p] = b.v[p] * scale;
    }
    return out;
}

XyzImage spectral_to_xyz(const SpectralImage& img) {
    img.grid.validate();
    XyzImage out(img.rows, img.cols);
    const std::size_t npx = img.rows * img.cols;
    for (std::size_t w = 0; w < img.grid.count; ++w) {
        const double lambda = img.grid.lambda(w);
        const double energy = kPlanckTimesC / (lambda * 1e-9) * img.grid.step_nm * kLuminousEfficacy;
        const double fx = cie_xbar(lambda) * energy;
        const double fy = cie_ybar(lambda) * energy;
        const double fz = cie_zbar(lambda) * energy;
        const double* plane = img.plane(w);
        for (std::size_t p = 0; p < npx; ++p) {
            out.plane(0)[p] += fx * plane[p];
            out.plane(1)[p] += fy * plane[p];
            out.plane(2)[p] += fz * plane[p];
        }
    }
    return out;
}

Rgb8Image xyz_to_srgb_display(const XyzImage& img, double exposure_scale) {
    if (!(exposure_scale > 0.0)) throw ConfigError("xyz_to_srgb_display: exposure scale must be > 0");
    // sRGB D65 matrix (IEC 61966-2-1 primaries).
    static constexpr double m[3][3] = {{3.2404542, -1.5371385, -0.4985314},
                                       {-0.9692660, 1.8760108, 0.0415560},
                                       {0.0556434, -0.2040259, 1.0572252}};
    Rgb8Image out(img.rows, img.cols);
    const std::size_t npx = img.rows * img.cols;
    for (std::size_t p = 0; p < npx; ++p) {
        const double xyz[3] = {img.plane(0)[p] * exposure_scale, img.plane(1)[p] * exposure_scale,
                               img.plane(2)[p] * exposure_scale};
        for (std::size_t ch = 0; ch < 3; ++ch) {
            const double lin =
                std::clamp(m[ch][0] * xyz[0] + m[ch][1] * xyz[1] + m[ch][2] * xyz[2], 0.0, 1.0);
            out.data[p * 3 + ch] = static_cast<std::uint8_t>(std::lround(srgb_encode(lin) * 255.0));
        }
    }
    return out;
}

double ssim(const Image2D& a, const Image2D& b, double data_range) {
    if (!a.same_shape(b)) throw StructuralError("ssim: image dimensions differ");
    if (!(data_range > 0.0)) throw ConfigError("ssim: data range must be > 0");
    constexpr std::size_t win = 11;
    constexpr double sigma = 1.5;
    if (a.rows < win || a.cols < win) throw StructuralError("ssim: images smaller than the 11x11 window");

    std::array<double, win> g;
    double gsum = 0.0;
    for (std::size_t i = 0; i < win; ++i) {
        const double d = static_cast<double>(i) - 5.0;
        g[i] = std::exp(-d * d / (2.0 * sigma * sigma));
        gsum += g[i];
    }
    for (double& v : g) v /= gsum;

    const double c1 = (0.01 * data_range) * (0.01 * data_range);
    const double c2 = (0.03 * data_range) * (0.03 * data_range);

    // Separable Gaussian filtering of the five moment fields, valid region.
    const std::size_t or_ = a.rows - win + 1, oc = a.cols - win + 1;
    auto filt = [&](auto&& value) {
        Image2D tmp(a.rows, oc);
        for (std::size_t r = 0; r < a.rows; ++r)
            for (std::size_t c = 0; c < oc; ++c) {
                double acc = 0.0;
                for (std::size_t i = 0; i < win; ++i) acc += g[i] * value(r, c + i);
                tmp.at(r, c) = acc;
            }
        Image2D out(or_, oc);
        for (std::size_t r = 0; r < or_; ++r)
            for (std::size_t c = 0; c < oc; ++c) {
                double acc = 0.0;
                for (std::size_t i = 0; i < win; ++i) acc += g[i] * tmp.at(r + i, c);
                out.at(r, c) = acc;
            }
        return out;
    };

    const Image2D mu_a = filt([&](std::size_t r, std::size_t c) { return a.at(r, c); });
    const Image2D mu_b = filt([&](std::size_t r, std::size_t c) { return b.at(r, c); });
    const Image2D m_aa = filt([&](std::size_t r, std::size_t c) { return a.at(r, c) * a.at(r, c); });
    const Image2D m_bb = filt([&](std::size_t r, std::size_t c) { return b.at(r, c) * b.at(r, c); });
    const Image2D m_ab = filt([&](std::size_t r, std::size_t c) { return a.at(r, c) * b.at(r, c); });

    double total = 0.0;
    for (std::size_t p = 0; p < mu_a.v.size(); ++p) {
        const double ma = mu_a.v[p], mb = mu_b.v[p];
        const double va = m_aa.v[p] - ma * ma;
        const double vb = m_bb.v[p] - mb * mb;
        const double cov = m_ab.v[p] - ma * mb;
        const double num = (2.0 * ma * mb + c1) * (2.0 * cov + c2);
        const double den = (ma * ma + mb * mb + c1) * (va + vb + c2);
        total += num / den;
    }
    return total / static_cast<double>(mu_a.v.size());
}

DeltaEResult delta_e(const XyzImage& a, const XyzImage& b, const Xyz& white) {
    if (a.rows != b.rows || a.cols != b.cols) throw StructuralError("delta_e: image dimensions differ");
    if (!(white.y > 0.0) || !(white.x > 0.0) || !(white.z > 0.0))
        throw ConfigError("delta_e: white point must be strictly positive");

    DeltaEResult res;
    res.map = Image2D(a.rows, a.cols);
    const std::size_t npx = a.rows * a.cols;
    double total = 0.0;
    for (std::size_t p = 0; p < npx; ++p) {
        auto lab = [&](const XyzImage& img) {
            const double fx = lab_f(img.plane(0)[p] / white.x);
            const double fy = lab_f(img.plane(1)[p] / white.y);
            const double fz = lab_f(img.plane(2)[p] / white.z);
            return std::array<double, 3>{116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
        };
        const auto la = lab(a);
        const auto lb = lab(b);
        const double de = std::sqrt((la[0] - lb[0]) * (la[0] - lb[0]) + (la[1] - lb[1]) * (la[1] - lb[1]) +
                                    (la[2] - lb[2]) * (la[2] - lb[2]));
        res.map.v[p] = de;
        total += de;
    }
    res.mean = npx > 0 ? total / static_cast<double>(npx) : 0.0;
    return res;
}

std::array<std::array<double, 3>, 3> fit_sensor_rgb_to_xyz(const ColorFilterArray& cfa,
                                                           const WavelengthGrid& grid) {
    grid.validate();
    // Solve min || M * s(l) - t(l) ||^2 over the grid, where s holds the RGB
    // QE curves and t the energy-weighted CMFs. Normal equations per row.
    double ata[3][3] = {};
    double atb[3][3] = {};  // atb[xyz][ch]
    for (std::size_t w = 0; w < grid.count; ++w) {
        const double l = grid.lambda(w);
        const double energy = kPlanckTimesC / (l * 1e-9) * kLuminousEfficacy;
        const double s[3] = {cfa.qe[0].at(l), cfa.qe[1].at(l), cfa.qe[2].at(l)};
        const double t[3] = {cie_xbar(l) * energy, cie_ybar(l) * energy, cie_zbar(l) * energy};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                ata[i][j] += s[i] * s[j];
                atb[j][i] += t[j] * s[i];
            }
    }
    // 3x3 solve by Gaussian elimination with partial pivoting, three RHS.
    double aug[3][6];
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) aug[i][j] = ata[i][j];
        for (int j = 0; j < 3; ++j) aug[i][3 + j] = atb[j][i];
    }
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::fabs(aug[r][col]) > std::fabs(aug[piv][col])) piv = r;
        if (std::fabs(aug[piv][col]) < 1e-30) throw DomainError("fit_sensor_rgb_to_xyz: singular QE system");
        std::swap(aug[col], aug[piv]);
        for (int r = 0; r < 3; ++r) {
            if (r == col) continue;
            const double f = aug[r][col] / aug[col][col];
            for (int j = 0; j < 6; ++j) aug[r][j] -= f * aug[col][j];
        }
    }
    std::array<std::array<double, 3>, 3> m{};
    for (int t = 0; t < 3; ++t)
        for (int ch = 0; ch < 3; ++ch) m[t][ch] = aug[ch][3 + t] / aug[ch][ch];
    return m;
}

XyzImage apply_rgb_to_xyz(const RgbImage& rgb, const std::array<std::array<double, 3>, 3>& m) {
    XyzImage out(rgb.rows, rgb.cols);
    const std::size_t npx = rgb.rows * rgb.cols;
    for (std::size_t p = 0; p < npx; ++p) {
        const double r = rgb.plane(0)[p], g = rgb.plane(1)[p], b = rgb.plane(2)[p];
        for (std::size_t t = 0; t < 3; ++t)
            out.plane(t)[p] = m[t][0] * r + m[t][1] * g + m[t][2] * b;
    }
    return out;
}

Image2D xyz_luminance(const XyzImage& img) {
    Image2D out(img.rows, img.cols);
    std::copy(img.plane(1), img.plane(1) + img.rows * img.cols, out.v.begin());
    return out;
}

DemosaicQualityResult demosaic_quality(const SpectralImage& irradiance, const SensorSpec& sensor,
                                       bool noise, std::uint64_t capture_index) {
    const SpectralImage crop = central_crop(irradiance, sensor.rows, sensor.cols);
    const XyzImage ref = spectral_to_xyz(crop);
    const Image2D ref_y = xyz_luminance(ref);
    double ref_mean = 0.0, ref_max = 0.0;
    for (double v : ref_y.v) {
        ref_mean += v;
        ref_max = std::max(ref_max, v);
    }
    ref_mean /= static_cast<double>(ref_y.v.size());
    if (!(ref_max > 0.0)) throw DomainError("demosaic_quality: reference scene is all dark");

    const Exposure exp = expose(crop, sensor, noise, capture_index);
    const RgbImage rgb = sensor.cfa.contains(CfaChannel::W) ? demosaic_rgbw(exp.voltage, sensor.cfa)
                                                            : demosaic_bilinear(exp.voltage, sensor.cfa);
    const auto m = fit_sensor_rgb_to_xyz(sensor.cfa, crop.grid);
    XyzImage xyz = apply_rgb_to_xyz(rgb, m);

    double mean_y = 0.0;
    const std::size_t npx = xyz.rows * xyz.cols;
    for (std::size_t p = 0; p < npx; ++p) mean_y += xyz.plane(1)[p];
    mean_y /= static_cast<double>(npx);
    if (mean_y > 0.0) {
        const double s = ref_mean / mean_y;
        for (double& v : xyz.data) v *= s;
    }

    DemosaicQualityResult res;
    res.mean_reference_y = ref_mean;
    res.ssim = ssim(xyz_luminance(xyz), ref_y, ref_max);
    const Xyz white{kD65White.x * ref_max, kD65White.y * ref_max, kD65White.z * ref_max};
    res.mean_delta_e = delta_e(xyz, ref, white).mean;
    return res;
}

}  // namespace hdrsim
