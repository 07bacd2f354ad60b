#include "hdrsim/sri_io.hpp"

#include <zlib.h>

#include <bit>
#include <limits>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace hdrsim {

namespace {

constexpr std::size_t kMaxHeaderBytes = 65536;

std::uint32_t header_crc(const std::string& bytes, std::size_t count) {
    return static_cast<std::uint32_t>(
        ::crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(count)));
}

void put_f32_le(std::string& out, float f) {
    std::uint32_t u = std::bit_cast<std::uint32_t>(f);
    if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap32(u);
    char b[4];
    std::memcpy(b, &u, 4);
    out.append(b, 4);
}

float get_f32_le(const char* p) {
    std::uint32_t u;
    std::memcpy(&u, p, 4);
    if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap32(u);
    return std::bit_cast<float>(u);
}

[[noreturn]] void fail(const std::string& origin, std::size_t offset, const std::string& what) {
    std::ostringstream os;
    os << "SRI parse error in " << origin << " at byte " << offset << ": " << what;
    throw ParseError(os.str());
}

struct HeaderField {
    std::string key;
    std::string value;
    std::size_t offset;
};

}  // namespace

std::string encode_sri(const SpectralImage& img, const std::string& creator) {
    img.grid.validate();
    if (img.data.size() != img.rows * img.cols * img.grid.count)
        throw StructuralError("write_sri: payload size does not match header dimensions");
    for (double v : img.data) {
        if (!std::isfinite(v) || v < 0.0)
            throw DomainError("write_sri: refusing to write negative or non-finite samples");
        if (v > static_cast<double>(std::numeric_limits<float>::max()))
            throw DomainError("write_sri: sample exceeds the float32 payload range");
    }

    std::ostringstream h;
    h << "SRI1\n";
    h << "rows " << img.rows << "\n";
    h << "cols " << img.cols << "\n";
    h << "wave_start_nm " << img.grid.start_nm << "\n";
    h << "wave_step_nm " << img.grid.step_nm << "\n";
    h << "wave_count " << img.grid.count << "\n";
    h << "kind " << to_string(img.kind) << "\n";
    h << "units photons/s" << (img.kind == SpectralKind::radiance ? "/sr" : "") << "/m^2/nm\n";
    h << "creator " << creator << "\n";

    std::string out = h.str();
    char crcline[32];
    std::snprintf(crcline, sizeof(crcline), "crc32 %08x\n", header_crc(out, out.size()));
    out += crcline;
    out += "end_header\n";

    out.reserve(out.size() + img.data.size() * 4);
    for (double v : img.data) put_f32_le(out, static_cast<float>(v));
    return out;
}

SpectralImage decode_sri(const std::string& bytes, const std::string& origin) {
    const std::string magic = "SRI1\n";
    if (bytes.size() < magic.size() || bytes.compare(0, magic.size(), magic) != 0)
        fail(origin, 0, "bad magic, expected \"SRI1\"");

    const std::string terminator = "end_header\n";
    const std::size_t term_pos = bytes.find(terminator, 0);
    if (term_pos == std::string::npos || term_pos > kMaxHeaderBytes)
        fail(origin, std::min(bytes.size(), kMaxHeaderBytes), "missing end_header within the first 64 KiB");
    const std::size_t payload_start = term_pos + terminator.size();

    // Split header lines between the magic and end_header.
    std::vector<HeaderField> fields;
    std::size_t pos = magic.size();
    while (pos < term_pos) {
        const std::size_t eol = bytes.find('\n', pos);
        if (eol == std::string::npos || eol >= term_pos) fail(origin, pos, "unterminated header line");
        const std::string line = bytes.substr(pos, eol - pos);
        const std::size_t sp = line.find(' ');
        if (sp == std::string::npos || sp == 0) fail(origin, pos, "header line lacks a key-value pair");
        fields.push_back({line.substr(0, sp), line.substr(sp + 1), pos});
        pos = eol + 1;
    }

    if (fields.empty() || fields.back().key != "crc32")
        fail(origin, term_pos, "header must end with a crc32 line");
    const HeaderField crc_field = fields.back();
    fields.pop_back();

    std::uint32_t stated_crc = 0;
    {
        std::istringstream is(crc_field.value);
        is >> std::hex >> stated_crc;
        if (is.fail() || crc_field.value.size() != 8)
            fail(origin, crc_field.offset, "crc32 value must be 8 hex digits");
    }
    const std::uint32_t actual_crc = header_crc(bytes, crc_field.offset);
    if (actual_crc != stated_crc) {
        std::ostringstream os;
        os << "header checksum mismatch (stated " << std::hex << stated_crc << ", computed " << actual_crc
           << ")";
        fail(origin, crc_field.offset, os.str());
    }

    SpectralImage img;
    bool have[7] = {};
    for (const HeaderField& f : fields) {
        std::istringstream is(f.value);
        if (f.key == "rows") {
            if (!(is >> img.rows)) fail(origin, f.offset, "rows must be an integer");
            have[0] = true;
        } else if (f.key == "cols") {
            if (!(is >> img.cols)) fail(origin, f.offset, "cols must be an integer");
            have[1] = true;
        } else if (f.key == "wave_start_nm") {
            if (!(is >> img.grid.start_nm)) fail(origin, f.offset, "wave_start_nm must be a number");
            have[2] = true;
        } else if (f.key == "wave_step_nm") {
            if (!(is >> img.grid.step_nm)) fail(origin, f.offset, "wave_step_nm must be a number");
            have[3] = true;
        } else if (f.key == "wave_count") {
            if (!(is >> img.grid.count)) fail(origin, f.offset, "wave_count must be an integer");
            have[4] = true;
        } else if (f.key == "kind") {
            if (f.value == "radiance")
                img.kind = SpectralKind::radiance;
            else if (f.value == "irradiance")
                img.kind = SpectralKind::irradiance;
            else
                fail(origin, f.offset, "kind must be radiance or irradiance");
            have[5] = true;
        } else if (f.key == "units" || f.key == "creator") {
            have[6] = true;  // free text, checksum-protected
        } else {
            fail(origin, f.offset, "unknown header key '" + f.key + "'");
        }
    }
    for (int i = 0; i < 6; ++i)
        if (!have[i]) fail(origin, term_pos, "header is missing a required field");

    try {
        img.grid.validate();
    } catch (const DomainError& e) {
        fail(origin, term_pos, e.what());
    }
    if (img.rows == 0 || img.cols == 0 || img.rows > 1000000 || img.cols > 1000000 ||
        img.grid.count > 100000)
        fail(origin, term_pos, "image dimensions outside the supported range");

    const std::size_t expected = img.rows * img.cols * img.grid.count * 4;
    const std::size_t actual = bytes.size() - payload_start;
    if (expected != actual) {
        std::ostringstream os;
        os << "payload size mismatch: header implies " << expected << " bytes, file carries " << actual;
        fail(origin, payload_start, os.str());
    }

    img.data.resize(img.rows * img.cols * img.grid.count);
    const char* p = bytes.data() + payload_start;
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        const float f = get_f32_le(p + i * 4);
        if (!std::isfinite(f) || f < 0.0f)
            fail(origin, payload_start + i * 4, "payload sample is negative or non-finite");
        img.data[i] = static_cast<double>(f);
    }
    return img;
}

void write_sri(const std::string& path, const SpectralImage& img, const std::string& creator) {
    const std::string bytes = encode_sri(img, creator);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("write_sri: cannot open '" + path + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write_sri: short write to '" + path + "'");
}

SpectralImage read_sri(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("read_sri: cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return decode_sri(ss.str(), path);
}

}  // namespace hdrsim
