#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "hdrsim/common.hpp"

namespace hdrsim {

// Thin wrapper over FFTW's complex 2-D transforms. Plans are created with
// FFTW_ESTIMATE (deterministic algorithm choice) under a global planner
// lock; execution itself is concurrency-safe, so per-wavelength workers can
// transform in parallel.
void fft2(std::vector<std::complex<double>>& data, std::size_t rows, std::size_t cols, bool inverse);

// Linear ("same") convolution of img with an odd-sized kernel, zero-padded
// so nothing wraps around. kernel is krows x kcols, kernel center at
// (krows/2, kcols/2). A 1x1 kernel short-circuits to an exact scale.
Image2D convolve_same(const Image2D& img, const Image2D& kernel);

}  // namespace hdrsim
