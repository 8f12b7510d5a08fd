// Copyright 2026 The colfin Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <fftw3.h>

#include <complex>
#include <cstring>
#include <mutex>

namespace colfin {

namespace detail {
// FFTW's planner is not thread-safe; executing distinct plans is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

/// Real-to-complex 2D FFT pair for a fixed size, with owned aligned
/// buffers. Plans use FFTW_ESTIMATE so planning is deterministic.
class RealFft2D {
 public:
  RealFft2D(int width, int height)
      : width_(width), height_(height), spec_width_(width / 2 + 1) {
    real_ = static_cast<float*>(
        fftwf_malloc(sizeof(float) * real_size()));
    spec_ = static_cast<fftwf_complex*>(
        fftwf_malloc(sizeof(fftwf_complex) * spectrum_size()));
    std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
    fwd_ = fftwf_plan_dft_r2c_2d(height_, width_, real_, spec_,
                                 FFTW_ESTIMATE);
    inv_ = fftwf_plan_dft_c2r_2d(height_, width_, spec_, real_,
                                 FFTW_ESTIMATE);
  }

  RealFft2D(const RealFft2D&) = delete;
  RealFft2D& operator=(const RealFft2D&) = delete;

  ~RealFft2D() {
    std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
    fftwf_destroy_plan(fwd_);
    fftwf_destroy_plan(inv_);
    fftwf_free(real_);
    fftwf_free(spec_);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  int spec_width() const { return spec_width_; }
  std::size_t real_size() const {
    return static_cast<std::size_t>(width_) * height_;
  }
  std::size_t spectrum_size() const {
    return static_cast<std::size_t>(spec_width_) * height_;
  }

  float* real() { return real_; }
  std::complex<float>* spectrum() {
    return reinterpret_cast<std::complex<float>*>(spec_);
  }

  /// real() -> spectrum().
  void forward() { fftwf_execute(fwd_); }

  /// spectrum() -> real(), normalized by 1/(width*height).
  /// Clobbers the spectrum buffer (FFTW c2r semantics).
  void inverse() {
    fftwf_execute(inv_);
    const float scale = 1.0f / static_cast<float>(real_size());
    for (std::size_t i = 0; i < real_size(); ++i) real_[i] *= scale;
  }

 private:
  int width_;
  int height_;
  int spec_width_;
  float* real_;
  fftwf_complex* spec_;
  fftwf_plan fwd_;
  fftwf_plan inv_;
};

}  // namespace colfin
