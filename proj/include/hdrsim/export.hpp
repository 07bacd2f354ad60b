#pragma once

#include <string>
#include <vector>

#include "hdrsim/common.hpp"
#include "hdrsim/isp.hpp"

namespace hdrsim {

// Minimal 8-bit truecolor PNG writer (zlib-deflated, filter 0 scanlines).
void export_png(const std::string& path, const Rgb8Image& img);
std::string encode_png(const Rgb8Image& img);

// CSV with a header row, full double precision.
void export_csv(const std::string& path, const std::vector<std::string>& columns,
                const std::vector<std::vector<double>>& rows);

// Convenience: one named series per row index.
void export_profile_csv(const std::string& path, const std::string& name, const std::vector<double>& values);

std::vector<std::vector<double>> parse_csv(const std::string& text, std::vector<std::string>* columns = nullptr);

}  // namespace hdrsim
