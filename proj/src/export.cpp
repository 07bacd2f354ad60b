#include "hdrsim/export.hpp"

#include <zlib.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace hdrsim {

namespace {

void put_u32_be(std::string& out, std::uint32_t v) {
    char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8),
                 static_cast<char>(v)};
    out.append(b, 4);
}

void append_chunk(std::string& out, const char type[4], const std::string& payload) {
    put_u32_be(out, static_cast<std::uint32_t>(payload.size()));
    std::string body(type, 4);
    body += payload;
    out += body;
    const auto crc =
        ::crc32(0L, reinterpret_cast<const Bytef*>(body.data()), static_cast<uInt>(body.size()));
    put_u32_be(out, static_cast<std::uint32_t>(crc));
}

}  // namespace

std::string encode_png(const Rgb8Image& img) {
    if (img.rows == 0 || img.cols == 0 || img.data.size() != img.rows * img.cols * 3)
        throw StructuralError("export_png: empty or inconsistent image");

    std::string out("\x89PNG\r\n\x1a\n", 8);

    std::string ihdr;
    put_u32_be(ihdr, static_cast<std::uint32_t>(img.cols));
    put_u32_be(ihdr, static_cast<std::uint32_t>(img.rows));
    ihdr += static_cast<char>(8);  // bit depth
    ihdr += static_cast<char>(2);  // truecolor
    ihdr += std::string(3, '\0');  // compression, filter, interlace
    append_chunk(out, "IHDR", ihdr);

    // Filter byte 0 before each scanline.
    std::string raw;
    raw.reserve(img.rows * (1 + img.cols * 3));
    for (std::size_t r = 0; r < img.rows; ++r) {
        raw += '\0';
        raw.append(reinterpret_cast<const char*>(img.data.data() + r * img.cols * 3), img.cols * 3);
    }
    uLongf bound = ::compressBound(static_cast<uLong>(raw.size()));
    std::string deflated(bound, '\0');
    if (::compress2(reinterpret_cast<Bytef*>(deflated.data()), &bound,
                    reinterpret_cast<const Bytef*>(raw.data()), static_cast<uLong>(raw.size()),
                    Z_DEFAULT_COMPRESSION) != Z_OK)
        throw IoError("export_png: deflate failed");
    deflated.resize(bound);
    append_chunk(out, "IDAT", deflated);
    append_chunk(out, "IEND", "");
    return out;
}

void export_png(const std::string& path, const Rgb8Image& img) {
    const std::string bytes = encode_png(img);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("export_png: cannot open '" + path + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("export_png: short write to '" + path + "'");
}

void export_csv(const std::string& path, const std::vector<std::string>& columns,
                const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("export_csv: cannot open '" + path + "' for writing");
    for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
    out << "\n";
    char buf[40];
    for (const auto& row : rows) {
        if (row.size() != columns.size())
            throw StructuralError("export_csv: row width does not match the header");
        for (std::size_t i = 0; i < row.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", row[i]);
            out << (i ? "," : "") << buf;
        }
        out << "\n";
    }
    if (!out) throw IoError("export_csv: short write to '" + path + "'");
}

void export_profile_csv(const std::string& path, const std::string& name,
                        const std::vector<double>& values) {
    std::vector<std::vector<double>> rows;
    rows.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
        rows.push_back({static_cast<double>(i), values[i]});
    export_csv(path, {"index", name}, rows);
}

std::vector<std::vector<double>> parse_csv(const std::string& text, std::vector<std::string>* columns) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("parse_csv: empty input");
    if (columns) {
        columns->clear();
        std::istringstream hs(line);
        std::string cell;
        while (std::getline(hs, cell, ',')) columns->push_back(cell);
    }
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw ParseError("parse_csv: non-numeric cell '" + cell + "'");
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace hdrsim
