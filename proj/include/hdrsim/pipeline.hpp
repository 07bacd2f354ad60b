#pragma once

#include <optional>
#include <string>

#include "hdrsim/config.hpp"
#include "hdrsim/hdr_combine.hpp"

namespace hdrsim {

// Everything a run produces. The report is canonical JSON text: identical
// config (including the master seed) gives byte-identical reports, whatever
// the worker count.
struct RunResult {
    std::string report;
    SpectralImage scene_radiance;
    SpectralImage irradiance;
    std::optional<CaptureSet> captures;
    std::optional<Exposure> exposure;
    std::optional<InputReferredImage> reconstruction;
};

RunResult run_pipeline(const SceneConfig& config);

}  // namespace hdrsim
