#include "hdrsim/spectral.hpp"

#include <cmath>
#include <sstream>

namespace hdrsim {

void WavelengthGrid::validate() const {
    if (!(step_nm > 0.0)) throw DomainError("wavelength grid: step_nm must be > 0");
    if (count < 1) throw DomainError("wavelength grid: count must be >= 1");
    if (start_nm < 350.0 || end_nm() > 780.0) {
        std::ostringstream os;
        os << "wavelength grid: samples [" << start_nm << ", " << end_nm()
           << "] nm fall outside the supported [350, 780] nm span";
        throw DomainError(os.str());
    }
}

const char* to_string(SpectralKind k) { return k == SpectralKind::radiance ? "radiance" : "irradiance"; }

void SpectralImage::validate() const {
    grid.validate();
    if (data.size() != rows * cols * grid.count)
        throw StructuralError("spectral image: data length does not match rows*cols*count");
    for (double s : data) {
        if (!std::isfinite(s) || s < 0.0)
            throw DomainError("spectral image: samples must be finite and nonnegative");
    }
}

void LightGroup::validate() const {
    const SpectralImage& first = members[0];
    for (std::size_t i = 0; i < kLightGroupSize; ++i) {
        const SpectralImage& m = members[i];
        if (m.kind != SpectralKind::radiance)
            throw StructuralError(std::string("light group: member '") + kLightGroupNames[i] +
                                  "' must be a radiance image");
        if (!m.same_geometry(first))
            throw StructuralError(std::string("light group: member '") + kLightGroupNames[i] +
                                  "' does not share geometry/grid with 'sky'");
        if (m.data.size() != m.rows * m.cols * m.grid.count)
            throw StructuralError("light group: member payload size mismatch");
    }
}

void GroupWeights::validate() const {
    for (std::size_t i = 0; i < kLightGroupSize; ++i) {
        if (!std::isfinite(w[i]) || w[i] < 0.0)
            throw DomainError(std::string("group weights: '") + kLightGroupNames[i] +
                              "' must be finite and nonnegative");
    }
}

SpectralImage compose_light_groups(const LightGroup& group, const GroupWeights& weights) {
    group.validate();
    weights.validate();
    const SpectralImage& ref = group.members[0];
    SpectralImage out(ref.rows, ref.cols, ref.grid, SpectralKind::radiance);
    const std::size_t n = out.data.size();
    for (std::size_t i = 0; i < kLightGroupSize; ++i) {
        const double wi = weights.w[i];
        if (wi == 0.0) continue;
        const double* src = group.members[i].data.data();
        double* dst = out.data.data();
        for (std::size_t s = 0; s < n; ++s) dst[s] += wi * src[s];
    }
    return out;
}

std::vector<double> line_profile(const Image2D& img, std::size_t row) {
    if (row >= img.rows) {
        std::ostringstream os;
        os << "line_profile: row " << row << " out of bounds (rows = " << img.rows << ")";
        throw BoundsError(os.str());
    }
    return std::vector<double>(img.v.begin() + static_cast<std::ptrdiff_t>(row * img.cols),
                               img.v.begin() + static_cast<std::ptrdiff_t>((row + 1) * img.cols));
}

SpectralImage central_crop(const SpectralImage& img, std::size_t rows, std::size_t cols) {
    if (img.rows < rows || img.cols < cols) {
        std::ostringstream os;
        os << "central_crop: source " << img.rows << "x" << img.cols << " smaller than requested " << rows
           << "x" << cols;
        throw StructuralError(os.str());
    }
    if (img.rows == rows && img.cols == cols) return img;
    const std::size_t r0 = (img.rows - rows) / 2;
    const std::size_t c0 = (img.cols - cols) / 2;
    SpectralImage out(rows, cols, img.grid, img.kind);
    for (std::size_t w = 0; w < img.grid.count; ++w)
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c) out.at(r, c, w) = img.at(r0 + r, c0 + c, w);
    return out;
}

}  // namespace hdrsim
