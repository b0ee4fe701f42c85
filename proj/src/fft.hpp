// Thin RAII wrapper over FFTW plans for in-place complex transforms.

#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <fftw3.h>

namespace dmdilc::detail {

/// Unnormalised forward (exp(-j...)) and backward (exp(+j...)) transforms of
/// a fixed length, operating in place on an owned buffer.
class Fft {
public:
    explicit Fft(std::size_t n);
    ~Fft();
    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;

    std::size_t size() const { return buf_.size(); }
    std::vector<std::complex<double>>& buffer() { return buf_; }
    const std::vector<std::complex<double>>& buffer() const { return buf_; }

    void forward();
    void backward();

private:
    std::vector<std::complex<double>> buf_;
    fftw_plan fwd_ = nullptr;
    fftw_plan bwd_ = nullptr;
};

}  // namespace dmdilc::detail
