#pragma once

#include <string>

#include "hdrsim/spectral.hpp"

namespace hdrsim {

// SRI container: a line-oriented text header followed by little-endian
// float32 planes, wavelength-major.
//
//   SRI1\n
//   rows <int>\n
//   cols <int>\n
//   wave_start_nm <float>\n
//   wave_step_nm <float>\n
//   wave_count <int>\n
//   kind <radiance|irradiance>\n
//   units <free text>\n
//   creator <free text>\n
//   crc32 <8 hex digits over every preceding header byte>\n
//   end_header\n
//   <rows*cols*wave_count little-endian float32>
//
// The checksum makes any header corruption detectable before sizes are
// trusted. Payload length must match the header exactly.

// Writes img; samples must be finite and nonnegative. Values are stored as
// float32, so float32-representable data round-trips losslessly.
void write_sri(const std::string& path, const SpectralImage& img, const std::string& creator = "hdrsim");

SpectralImage read_sri(const std::string& path);

// In-memory forms used by the property tests and the readers/writers above.
std::string encode_sri(const SpectralImage& img, const std::string& creator = "hdrsim");
SpectralImage decode_sri(const std::string& bytes, const std::string& origin = "<memory>");

}  // namespace hdrsim
