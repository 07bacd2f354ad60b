#pragma once

#include "hdrsim/common.hpp"
#include "hdrsim/sensor.hpp"

namespace hdrsim {

// Linear estimates in a common unit: electrons at the large-photodetector /
// low-gain reference. Invalid pixels are flagged, never silently zeroed.
struct InputReferredImage {
    Image2D electrons;
    BoolMask valid;
    double quantization_floor_e = 0.0;  // one ADC step, input-referred

    void validate() const;
};

// x = V / (conversion_gain * analog_gain * sensitivity_scale). adc_step_v,
// when nonzero, is recorded input-referred as the quantization floor.
InputReferredImage input_refer(const Image2D& voltage, double conversion_gain, double analog_gain,
                               double sensitivity_scale, double adc_step_v = 0.0);

// Dual conversion gain fusion: the plain average when the high-gain read is
// unsaturated, the low-gain value alone otherwise.
InputReferredImage combine_dual_gain(const InputReferredImage& x_hg, const InputReferredImage& x_lg,
                                     const BoolMask& sat_hg);

// Full 3-capture fusion: dual-gain estimate for the large photodetector,
// small-photodetector substitution where the large one saturates, clamp and
// flag where all three saturate.
InputReferredImage combine3(const CaptureSet& captures);

}  // namespace hdrsim
