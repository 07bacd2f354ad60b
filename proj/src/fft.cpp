#include "hdrsim/fft.hpp"

#include <fftw3.h>

#include <mutex>

namespace hdrsim {

namespace {
// FFTW's planner is not thread-safe; execution of independent plans is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

void fft2(std::vector<std::complex<double>>& data, std::size_t rows, std::size_t cols, bool inverse) {
    if (data.size() != rows * cols) throw StructuralError("fft2: buffer size does not match rows*cols");
    auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        plan = fftw_plan_dft_2d(static_cast<int>(rows), static_cast<int>(cols), ptr, ptr,
                                inverse ? FFTW_BACKWARD : FFTW_FORWARD, FFTW_ESTIMATE);
    }
    if (plan == nullptr) throw StructuralError("fft2: FFTW failed to create a plan");
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    if (inverse) {
        const double scale = 1.0 / static_cast<double>(rows * cols);
        for (auto& z : data) z *= scale;
    }
}

Image2D convolve_same(const Image2D& img, const Image2D& kernel) {
    if (kernel.rows % 2 == 0 || kernel.cols % 2 == 0)
        throw StructuralError("convolve_same: kernel dimensions must be odd");
    if (kernel.rows == 1 && kernel.cols == 1) {
        Image2D out = img;
        for (double& v : out.v) v *= kernel.v[0];
        return out;
    }
    const std::size_t pr = img.rows + kernel.rows - 1;
    const std::size_t pc = img.cols + kernel.cols - 1;

    std::vector<std::complex<double>> a(pr * pc, 0.0);
    for (std::size_t r = 0; r < img.rows; ++r)
        for (std::size_t c = 0; c < img.cols; ++c) a[r * pc + c] = img.at(r, c);

    // Kernel center wrapped to (0,0) so the product aligns with the image.
    std::vector<std::complex<double>> b(pr * pc, 0.0);
    const std::ptrdiff_t kr2 = static_cast<std::ptrdiff_t>(kernel.rows / 2);
    const std::ptrdiff_t kc2 = static_cast<std::ptrdiff_t>(kernel.cols / 2);
    for (std::size_t r = 0; r < kernel.rows; ++r)
        for (std::size_t c = 0; c < kernel.cols; ++c) {
            const std::size_t rr =
                static_cast<std::size_t>((static_cast<std::ptrdiff_t>(r) - kr2 + static_cast<std::ptrdiff_t>(pr)) %
                                         static_cast<std::ptrdiff_t>(pr));
            const std::size_t cc =
                static_cast<std::size_t>((static_cast<std::ptrdiff_t>(c) - kc2 + static_cast<std::ptrdiff_t>(pc)) %
                                         static_cast<std::ptrdiff_t>(pc));
            b[rr * pc + cc] = kernel.at(r, c);
        }

    fft2(a, pr, pc, false);
    fft2(b, pr, pc, false);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] *= b[i];
    fft2(a, pr, pc, true);

    Image2D out(img.rows, img.cols);
    for (std::size_t r = 0; r < img.rows; ++r)
        for (std::size_t c = 0; c < img.cols; ++c) out.at(r, c) = a[r * pc + c].real();
    return out;
}

}  // namespace hdrsim
