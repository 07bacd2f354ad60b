#pragma once

#include <array>
#include <optional>

#include "hdrsim/common.hpp"
#include "hdrsim/spectral.hpp"

namespace hdrsim {

// h*c in J*m; converts a photon rate at wavelength lambda (m) to watts via
// (h*c/lambda).
inline constexpr double kPlanckTimesC = 1.98645e-25;

// Maximum luminous efficacy for photopic vision, lm/W at 555 nm.
inline constexpr double kLuminousEfficacy = 683.0;

// CIE 1931 2-degree color matching functions, 380..780 nm at 5 nm.
// ybar doubles as the CIE 1924 photopic V(lambda).
inline constexpr double kCieTableStartNm = 380.0;
inline constexpr double kCieTableStepNm = 5.0;
inline constexpr std::size_t kCieTableCount = 81;
extern const std::array<double, kCieTableCount> kCieXBar;
extern const std::array<double, kCieTableCount> kCieYBar;
extern const std::array<double, kCieTableCount> kCieZBar;

// Linear interpolation into the 5 nm tables; zero outside their span.
double cie_xbar(double lambda_nm);
double cie_ybar(double lambda_nm);
double cie_zbar(double lambda_nm);
inline double photopic_v(double lambda_nm) { return cie_ybar(lambda_nm); }

// Y(x,y) = 683 * sum_l V(l) * (h*c/l) * L_photon(x,y,l) * dl, in cd/m^2.
// Requires a radiance image.
Image2D luminance_map(const SpectralImage& img);

// Same integral for irradiance inputs; result in lux.
Image2D illuminance_map(const SpectralImage& img);

// log10 ratio of the high/low percentiles of the strictly positive samples.
// Percentiles are linearly interpolated order statistics, (0,100) = min/max.
// Throws DomainError when no positive sample exists.
double dynamic_range(const Image2D& lum, double low_percentile = 0.1, double high_percentile = 99.9);

struct WeightTargets {
    std::optional<double> dynamic_range;   // log10 units
    std::optional<double> mean_luminance;  // cd/m^2
    double low_percentile = 0.1;
    double high_percentile = 99.9;
};

struct FixedWeights {
    std::array<bool, kLightGroupSize> fixed{false, false, false, false};
    bool& operator[](LightGroupKey k) { return fixed[static_cast<std::size_t>(k)]; }
    bool operator[](LightGroupKey k) const { return fixed[static_cast<std::size_t>(k)]; }
};

struct WeightSolveResult {
    GroupWeights weights;
    double achieved_dr = 0.0;
    double achieved_mean = 0.0;
    bool dr_reached = true;    // false => target_dr unreachable, best effort returned
    bool mean_reached = true;  // false => scene has zero mean luminance
};

// Weight-selection tool: scales the sky weight (bisection, <= 60 iterations)
// until the composed scene's dynamic range matches targets.dynamic_range
// within 2%, then applies one global scale to hit targets.mean_luminance.
// Weights flagged fixed keep their relative value through the DR search; the
// global scale touches everything (dynamic range is scale invariant).
// Already-satisfying inputs are returned unchanged, which makes the solve
// idempotent.
WeightSolveResult set_weights_for_target(const LightGroup& group, const GroupWeights& initial,
                                         const FixedWeights& fixed, const WeightTargets& targets);

}  // namespace hdrsim
