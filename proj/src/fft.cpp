#include "fft.hpp"

#include <mutex>
#include <stdexcept>

namespace framepick::detail {

namespace {
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
} // namespace

RealDft::RealDft(int n) : n_(n) {
    if (n <= 0) throw std::invalid_argument("RealDft: size must be positive");
    std::lock_guard<std::mutex> lock(planner_mutex());
    std::vector<double> re(static_cast<std::size_t>(n));
    std::vector<std::complex<double>> sp(static_cast<std::size_t>(n / 2 + 1));
    fwd_ = fftw_plan_dft_r2c_1d(n, re.data(), reinterpret_cast<fftw_complex*>(sp.data()),
                                FFTW_ESTIMATE | FFTW_UNALIGNED);
    bwd_ = fftw_plan_dft_c2r_1d(n, reinterpret_cast<fftw_complex*>(sp.data()), re.data(),
                                FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (fwd_ == nullptr || bwd_ == nullptr) throw std::runtime_error("RealDft: planning failed");
}

RealDft::~RealDft() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
}

void RealDft::forward(const double* in, std::complex<double>* out) const {
    // r2c preserves its input; FFTW's interface is just not const-qualified.
    fftw_execute_dft_r2c(fwd_, const_cast<double*>(in), reinterpret_cast<fftw_complex*>(out));
}

void RealDft::backward(std::complex<double>* in, double* out) const {
    fftw_execute_dft_c2r(bwd_, reinterpret_cast<fftw_complex*>(in), out);
}

} // namespace framepick::detail
