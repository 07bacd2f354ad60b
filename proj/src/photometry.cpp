#include "hdrsim/photometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hdrsim {

namespace {

Image2D weighted_spectral_sum(const SpectralImage& img) {
    Image2D out(img.rows, img.cols, 0.0);
    const std::size_t npx = img.rows * img.cols;
    for (std::size_t w = 0; w < img.grid.count; ++w) {
        const double lam_m = img.grid.lambda(w) * 1e-9;
        const double factor =
            kLuminousEfficacy * photopic_v(img.grid.lambda(w)) * (kPlanckTimesC / lam_m) * img.grid.step_nm;
        const double* plane = img.plane(w);
        for (std::size_t p = 0; p < npx; ++p) out.v[p] += factor * plane[p];
    }
    return out;
}

double percentile_sorted(const std::vector<double>& sorted, double pct) {
    if (sorted.empty()) throw DomainError("percentile of empty sample set");
    if (pct <= 0.0) return sorted.front();
    if (pct >= 100.0) return sorted.back();
    const double pos = pct / 100.0 * static_cast<double>(sorted.size() - 1);
    const std::size_t i = static_cast<std::size_t>(pos);
    const double f = pos - static_cast<double>(i);
    if (i + 1 >= sorted.size()) return sorted.back();
    return sorted[i] * (1.0 - f) + sorted[i + 1] * f;
}

double mean_of(const Image2D& img) {
    double s = 0.0;
    for (double v : img.v) s += v;
    return img.v.empty() ? 0.0 : s / static_cast<double>(img.v.size());
}

// Luminance is linear in the weights, so the solver works on per-member
// luminance maps and never recomposes spectra.
struct MemberLuminances {
    std::array<Image2D, kLightGroupSize> maps;

    Image2D compose(const GroupWeights& w) const {
        Image2D out(maps[0].rows, maps[0].cols, 0.0);
        for (std::size_t i = 0; i < kLightGroupSize; ++i) {
            if (w.w[i] == 0.0) continue;
            for (std::size_t p = 0; p < out.v.size(); ++p) out.v[p] += w.w[i] * maps[i].v[p];
        }
        return out;
    }
};

}  // namespace

Image2D luminance_map(const SpectralImage& img) {
    if (img.kind != SpectralKind::radiance)
        throw DomainError("luminance_map expects a radiance image (use illuminance_map for irradiance)");
    return weighted_spectral_sum(img);
}

Image2D illuminance_map(const SpectralImage& img) {
    if (img.kind != SpectralKind::irradiance)
        throw DomainError("illuminance_map expects an irradiance image (use luminance_map for radiance)");
    return weighted_spectral_sum(img);
}

double dynamic_range(const Image2D& lum, double low_percentile, double high_percentile) {
    if (!(low_percentile <= high_percentile))
        throw ConfigError("dynamic_range: low percentile must not exceed high percentile");
    std::vector<double> positive;
    positive.reserve(lum.v.size());
    for (double v : lum.v)
        if (v > 0.0) positive.push_back(v);
    if (positive.empty()) throw DomainError("dynamic_range: map has no strictly positive samples");
    std::sort(positive.begin(), positive.end());
    const double lo = percentile_sorted(positive, low_percentile);
    const double hi = percentile_sorted(positive, high_percentile);
    return std::log10(hi / lo);
}

WeightSolveResult set_weights_for_target(const LightGroup& group, const GroupWeights& initial,
                                         const FixedWeights& fixed, const WeightTargets& targets) {
    group.validate();
    initial.validate();
    if (fixed[LightGroupKey::sky]) throw ConfigError("set_weights_for_target: the sky weight must be free");

    MemberLuminances lum;
    for (std::size_t i = 0; i < kLightGroupSize; ++i) lum.maps[i] = luminance_map(group.members[i]);

    constexpr double kRelTol = 0.02;
    constexpr int kMaxIter = 60;
    const std::size_t sky = static_cast<std::size_t>(LightGroupKey::sky);

    WeightSolveResult res;
    res.weights = initial;

    auto measure_dr = [&](const GroupWeights& w) {
        return dynamic_range(lum.compose(w), targets.low_percentile, targets.high_percentile);
    };

    if (targets.dynamic_range) {
        const double target = *targets.dynamic_range;
        double current = measure_dr(res.weights);
        if (std::fabs(current - target) > kRelTol * std::fabs(target)) {
            // DR need not be monotone in the sky weight (a vanishing sky can
            // turn sky-lit pixels into the dark end), so scan geometrically
            // for a bracketing pair first, then bisect inside it.
            const double w0 = res.weights.w[sky] > 0.0 ? res.weights.w[sky] : 1.0;
            GroupWeights probe = res.weights;
            auto dr_at = [&](double w) {
                probe.w[sky] = w;
                return measure_dr(probe);
            };
            constexpr int kPerDecade = 4;
            constexpr int kDecades = 18;  // w0 * 10^-9 .. w0 * 10^9
            double lo = 0.0, hi = 0.0, dr_lo = 0.0, dr_hi = 0.0;
            double best_w = w0, best_err = std::fabs(current - target);
            double prev_w = w0 * 1e-9, prev_dr = dr_at(prev_w);
            bool bracketed = false;
            for (int i = 1; i <= kPerDecade * kDecades; ++i) {
                const double w = w0 * std::pow(10.0, -9.0 + static_cast<double>(i) / kPerDecade);
                const double dr = dr_at(w);
                if (std::fabs(dr - target) < best_err) {
                    best_err = std::fabs(dr - target);
                    best_w = w;
                }
                if ((prev_dr - target) * (dr - target) <= 0.0) {
                    lo = prev_w;
                    hi = w;
                    dr_lo = prev_dr;
                    dr_hi = dr;
                    bracketed = true;
                    break;
                }
                prev_w = w;
                prev_dr = dr;
            }
            if (!bracketed) {
                res.dr_reached = false;
                res.weights.w[sky] = best_w;
            } else {
                const bool increasing = dr_hi >= dr_lo;
                for (int it = 0; it < kMaxIter; ++it) {
                    const double mid = std::sqrt(lo * hi);  // log-space midpoint
                    const double dr_mid = dr_at(mid);
                    if ((dr_mid < target) == increasing)
                        lo = mid;
                    else
                        hi = mid;
                    if (std::fabs(dr_mid - target) <= 0.25 * kRelTol * std::fabs(target)) break;
                }
                res.weights.w[sky] = std::sqrt(lo * hi);
            }
        }
    }

    if (targets.mean_luminance) {
        const double target_mean = *targets.mean_luminance;
        const double mean = mean_of(lum.compose(res.weights));
        if (mean > 0.0) {
            if (std::fabs(mean - target_mean) > kRelTol * std::fabs(target_mean)) {
                const double s = target_mean / mean;
                for (double& w : res.weights.w) w *= s;
            }
        } else {
            res.mean_reached = false;
        }
    }

    const Image2D final_map = lum.compose(res.weights);
    res.achieved_mean = mean_of(final_map);
    bool any_positive = false;
    for (double v : final_map.v)
        if (v > 0.0) { any_positive = true; break; }
    res.achieved_dr =
        any_positive ? dynamic_range(final_map, targets.low_percentile, targets.high_percentile) : 0.0;
    if (targets.dynamic_range && res.dr_reached &&
        std::fabs(res.achieved_dr - *targets.dynamic_range) > kRelTol * std::fabs(*targets.dynamic_range))
        res.dr_reached = false;
    if (targets.mean_luminance && res.mean_reached &&
        std::fabs(res.achieved_mean - *targets.mean_luminance) > kRelTol * std::fabs(*targets.mean_luminance))
        res.mean_reached = false;
    return res;
}

}  // namespace hdrsim
