#include "clusterbell/fft.hpp"

#include <cmath>
#include <cstddef>
#include <numbers>
#include <utility>

namespace clusterbell::fft {
namespace {

using Cvec = std::vector<std::complex<double>>;

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Unnormalized iterative radix-2 transform. Twiddles come from a table
// filled with std::polar per entry; a multiplicative recurrence would lose
// ~1e-11 of relative accuracy over long transforms, which the overlap
// oracle cannot afford at its smallest amplitudes.
void radix2(Cvec& a, bool inverse) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    const double sign = inverse ? 1.0 : -1.0;
    Cvec tw(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) {
        tw[k] = std::polar(1.0, sign * 2.0 * std::numbers::pi *
                                    static_cast<double>(k) /
                                    static_cast<double>(n));
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t half = len / 2;
        const std::size_t stride = n / len;
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t k = 0; k < half; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + half] * tw[k * stride];
                a[i + k] = u + v;
                a[i + k + half] = u - v;
            }
        }
    }
}

// Bluestein chirp-z: X_k = w_k * sum_j (x_j w_j) conj(w)_{k-j} with
// w_k = exp(sign i pi k^2 / n), evaluated as a power-of-two circular
// convolution. k^2 is reduced mod 2n as an integer before the angle is
// formed, so the chirp phase stays exact for any length.
void bluestein(Cvec& a, bool inverse) {
    const std::size_t n = a.size();
    const double sign = inverse ? 1.0 : -1.0;
    std::size_t m = 1;
    while (m < 2 * n - 1) m <<= 1;

    Cvec chirp(n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t q = (k % (2 * n)) * (k % (2 * n)) % (2 * n);
        chirp[k] = std::polar(1.0, sign * std::numbers::pi *
                                       static_cast<double>(q) /
                                       static_cast<double>(n));
    }

    Cvec fa(m), fb(m);
    for (std::size_t k = 0; k < n; ++k) fa[k] = a[k] * chirp[k];
    fb[0] = std::conj(chirp[0]);
    for (std::size_t k = 1; k < n; ++k) {
        fb[k] = std::conj(chirp[k]);
        fb[m - k] = fb[k];
    }
    radix2(fa, false);
    radix2(fb, false);
    for (std::size_t k = 0; k < m; ++k) fa[k] *= fb[k];
    radix2(fa, true);
    const double inv_m = 1.0 / static_cast<double>(m);
    for (std::size_t k = 0; k < n; ++k) a[k] = chirp[k] * fa[k] * inv_m;
}

}  // namespace

void transform(std::vector<std::complex<double>>& data, bool inverse) {
    const std::size_t n = data.size();
    if (n <= 1) return;
    if (is_pow2(n)) {
        radix2(data, inverse);
    } else {
        bluestein(data, inverse);
    }
    if (inverse) {
        const double inv_n = 1.0 / static_cast<double>(n);
        for (auto& z : data) z *= inv_n;
    }
}

}  // namespace clusterbell::fft
