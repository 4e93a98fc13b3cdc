#pragma once

#include <bit>
#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include <fftw3.h>

namespace trigzero {

using cplx = std::complex<double>;

inline bool is_power_of_two(std::size_t m) { return m != 0 && std::has_single_bit(m); }

inline std::size_t next_power_of_two(std::size_t m) { return m <= 1 ? 1 : std::bit_ceil(m); }

enum class FftDirection { forward, inverse };

namespace detail {

/// FFTW plans are created once per (size, direction) and executed on any
/// array through the new-array interface. Planning is serialized; execution
/// is thread-safe.
inline fftw_plan fft_plan(std::size_t m, FftDirection dir) {
    static std::mutex mutex;
    static std::map<std::pair<std::size_t, int>, fftw_plan> plans;
    const int sign = dir == FftDirection::forward ? FFTW_FORWARD : FFTW_BACKWARD;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = plans.find({m, sign});
    if (it != plans.end()) return it->second;
    auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * m));
    const fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(m), buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
    if (!plan) throw std::runtime_error("fft: planning failed");
    plans.emplace(std::make_pair(m, sign), plan);
    return plan;
}

}  // namespace detail

/// In-place transform of power-of-two length, unnormalized.
///   forward: X_j = sum_m x_m e^{-2 pi i j m / M}
///   inverse: x_m = sum_j X_j e^{+2 pi i j m / M}
inline void fft_inplace(std::span<cplx> data, FftDirection dir) {
    const std::size_t m = data.size();
    if (!is_power_of_two(m)) {
        throw std::invalid_argument("fft: length must be a power of two");
    }
    if (m == 1) return;
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(detail::fft_plan(m, dir), p, p);
}

inline std::vector<cplx> fft(std::vector<cplx> data, FftDirection dir = FftDirection::forward) {
    fft_inplace(data, dir);
    return data;
}

/// Evaluates the real trigonometric sum  sum_{|r|<=R} c_r e^{i r x_m}
/// at x_m = offset + 2 pi m / M for m = 0..M-1. `coeff(r)` supplies c_r for
/// r in [-R, R]; the result is assumed real (Hermitian coefficients) and the
/// imaginary round-off is dropped.
template <class Coeff>
std::vector<double> trig_sum_on_grid(Coeff&& coeff, std::size_t max_freq, std::size_t m, double offset = 0.0) {
    if (!is_power_of_two(m) || m < 2 * max_freq + 1) {
        throw std::invalid_argument("trig_sum_on_grid: grid must be a power of two exceeding 2*max_freq");
    }
    std::vector<cplx> spec(m, cplx{0.0, 0.0});
    for (std::size_t r = 0; r <= max_freq; ++r) {
        const auto rp = static_cast<long long>(r);
        const cplx shift_p = offset == 0.0 ? cplx{1.0, 0.0} : std::polar(1.0, offset * static_cast<double>(r));
        spec[r] += coeff(rp) * shift_p;
        if (r != 0) spec[m - r] += coeff(-rp) * std::conj(shift_p);
    }
    fft_inplace(spec, FftDirection::inverse);
    std::vector<double> out(m);
    for (std::size_t i = 0; i < m; ++i) out[i] = spec[i].real();
    return out;
}

}  // namespace trigzero
