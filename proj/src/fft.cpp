#include "fft.hpp"

#include <mutex>

namespace dmdilc::detail {

namespace {
// The FFTW planner is not re-entrant.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

Fft::Fft(std::size_t n) : buf_(n) {
    auto* data = reinterpret_cast<fftw_complex*>(buf_.data());
    std::lock_guard lock(planner_mutex());
    fwd_ = fftw_plan_dft_1d(static_cast<int>(n), data, data, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_1d(static_cast<int>(n), data, data, FFTW_BACKWARD, FFTW_ESTIMATE);
}

Fft::~Fft() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
}

void Fft::forward() { fftw_execute(fwd_); }
void Fft::backward() { fftw_execute(bwd_); }

}  // namespace dmdilc::detail
