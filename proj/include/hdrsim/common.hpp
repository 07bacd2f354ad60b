#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hdrsim {

inline constexpr const char* kVersion = "0.1.0";

// Error categories used across the library. All carry a human-readable
// message; callers that care about the category catch the derived type.
struct StructuralError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BoundsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dense row-major 2-D array of doubles. The workhorse for luminance maps,
// voltage images, PSF kernels and single spectral planes.
struct Image2D {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> v;

    Image2D() = default;
    Image2D(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), v(r * c, fill) {}

    double& at(std::size_t r, std::size_t c) { return v[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return v[r * cols + c]; }
    std::size_t size() const { return v.size(); }
    bool same_shape(const Image2D& o) const { return rows == o.rows && cols == o.cols; }
};

// Per-pixel boolean mask stored as bytes (bit-packing is not worth the
// aliasing headaches here).
struct BoolMask {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint8_t> v;

    BoolMask() = default;
    BoolMask(std::size_t r, std::size_t c, bool fill = false) : rows(r), cols(c), v(r * c, fill ? 1 : 0) {}

    void set(std::size_t r, std::size_t c, bool b) { v[r * cols + c] = b ? 1 : 0; }
    bool at(std::size_t r, std::size_t c) const { return v[r * cols + c] != 0; }
    std::size_t count() const {
        std::size_t n = 0;
        for (auto b : v) n += b;
        return n;
    }
    bool same_shape(const BoolMask& o) const { return rows == o.rows && cols == o.cols; }
};

// Global worker count for parallel_for. 1 disables threading. Results are
// required to be independent of this setting (work items write disjoint
// outputs), so it is an execution knob, never part of a run's identity.
void set_thread_count(unsigned n);
unsigned thread_count();

// Runs fn(i) for i in [0, n). Work items must be independent.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace hdrsim
