#include "hdrsim/hdr_combine.hpp"

#include <cmath>

namespace hdrsim {

void InputReferredImage::validate() const {
    if (electrons.rows != valid.rows || electrons.cols != valid.cols)
        throw StructuralError("input-referred image: validity mask shape mismatch");
    for (std::size_t p = 0; p < electrons.v.size(); ++p)
        if (valid.v[p] && !(electrons.v[p] >= 0.0 && std::isfinite(electrons.v[p])))
            throw DomainError("input-referred image: valid pixels must be finite and nonnegative");
}

InputReferredImage input_refer(const Image2D& voltage, double conversion_gain, double analog_gain,
                               double sensitivity_scale, double adc_step_v) {
    if (!(conversion_gain > 0.0) || !(analog_gain > 0.0))
        throw ConfigError("input_refer: gains must be > 0");
    if (!(sensitivity_scale > 0.0)) throw ConfigError("input_refer: sensitivity scale must be > 0");

    const double denom = conversion_gain * analog_gain * sensitivity_scale;
    InputReferredImage out;
    out.electrons = Image2D(voltage.rows, voltage.cols);
    out.valid = BoolMask(voltage.rows, voltage.cols, true);
    out.quantization_floor_e = adc_step_v / denom;
    for (std::size_t p = 0; p < voltage.v.size(); ++p) out.electrons.v[p] = voltage.v[p] / denom;
    return out;
}

InputReferredImage combine_dual_gain(const InputReferredImage& x_hg, const InputReferredImage& x_lg,
                                     const BoolMask& sat_hg) {
    if (!x_hg.electrons.same_shape(x_lg.electrons) || sat_hg.rows != x_hg.electrons.rows ||
        sat_hg.cols != x_hg.electrons.cols)
        throw StructuralError("combine_dual_gain: image/mask dimensions differ");

    InputReferredImage out;
    out.electrons = Image2D(x_hg.electrons.rows, x_hg.electrons.cols);
    out.valid = x_lg.valid;
    out.quantization_floor_e = std::max(x_hg.quantization_floor_e, x_lg.quantization_floor_e);
    for (std::size_t p = 0; p < out.electrons.v.size(); ++p) {
        out.electrons.v[p] = sat_hg.v[p] ? x_lg.electrons.v[p]
                                         : 0.5 * (x_hg.electrons.v[p] + x_lg.electrons.v[p]);
    }
    return out;
}

InputReferredImage combine3(const CaptureSet& captures) {
    captures.validate();
    const PixelSpec& px = captures.sensor.pixel;
    const SplitPixelSpec& sp = captures.split;
    const double cg = px.conversion_gain_v_per_e;
    const double ag = captures.sensor.analog_gain;
    const double adc_step = px.voltage_swing_v / static_cast<double>((1u << px.adc_bits) - 1u);

    const InputReferredImage x_hg = input_refer(captures.lphg, cg, ag * sp.gain_high, 1.0, adc_step);
    const InputReferredImage x_lg = input_refer(captures.lplg, cg, ag * sp.gain_low, 1.0, adc_step);
    const InputReferredImage x_sp =
        input_refer(captures.splg, cg, ag * sp.gain_low, sp.sensitivity_ratio, adc_step);

    InputReferredImage out = combine_dual_gain(x_hg, x_lg, captures.sat_lphg);
    out.quantization_floor_e = std::max(out.quantization_floor_e, x_sp.quantization_floor_e);

    // Largest value the small photodetector can represent, input-referred.
    const double clamp_value = px.voltage_swing_v / (cg * ag * sp.gain_low * sp.sensitivity_ratio);

    for (std::size_t p = 0; p < out.electrons.v.size(); ++p) {
        if (!captures.sat_lplg.v[p]) continue;
        if (!captures.sat_splg.v[p]) {
            out.electrons.v[p] = x_sp.electrons.v[p];
            out.valid.v[p] = 1;
        } else {
            out.electrons.v[p] = clamp_value;
            out.valid.v[p] = 0;
        }
    }
    return out;
}

}  // namespace hdrsim
