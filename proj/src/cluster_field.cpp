#include "clusterbell/cluster_field.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace clusterbell::cluster_field {

namespace {

constexpr double kEulerGamma = 0.57721566490153286060651209008240243;

// Chebyshev coefficients of sqrt(x) e^x K1(x) on x in [2, inf), mapped
// through u = 4/x - 1 in [-1, 1]; first coefficient halved in evaluation.
// Truncated where the tail drops below 1e-17.
constexpr double kK1LargeCheb[] = {
    2.7206261904844426694,      0.10392373657681723844,
    -0.0028578168596227793868,  0.00019521551847135163111,
    -0.0000193619797416608296,  2.4064849478372171171e-6,
    -3.5019606030878125421e-7,  5.7410841254500492923e-8,
    -1.0345762465678097027e-8,  2.0150497551970346161e-9,
    -4.1903547593419255842e-10, 9.2183151876053141258e-11,
    -2.1299678384277910216e-11, 5.1396396734823435404e-12,
    -1.2891739609498229352e-12, 3.3484196660522431201e-13,
    -8.9767051820101460691e-14, 2.4771544242195986812e-14,
    -7.0198370892147688493e-15, 2.0387031662398608755e-15,
    -6.0570472706430177212e-16, 1.838093575243045194e-16,
    -5.6894628491936430675e-17, 1.7940510478863450716e-17,
};
constexpr int kK1LargeTerms =
    static_cast<int>(sizeof(kK1LargeCheb) / sizeof(kK1LargeCheb[0]));

// Ascending series, x <= 2:
// K1(x) = ln(x/2) I1(x) + 1/x
//         - (x/4) sum_k [psi(k+1) + psi(k+2)] (x^2/4)^k / (k! (k+1)!).
double k1_small(double x) {
    const double q = 0.25 * x * x;
    double term = 0.5 * x;  // (x/2)^{2k+1} / (k! (k+1)!) at k = 0
    double i1 = term;
    double psi1 = -kEulerGamma;       // psi(1)
    double psi2 = 1.0 - kEulerGamma;  // psi(2)
    double weighted = (psi1 + psi2) * term;
    for (int k = 1; k < 40; ++k) {
        term *= q / (static_cast<double>(k) * (k + 1.0));
        i1 += term;
        psi1 += 1.0 / static_cast<double>(k);
        psi2 += 1.0 / (k + 1.0);
        weighted += (psi1 + psi2) * term;
        if (term < 1e-18 * i1) break;
    }
    return std::log(0.5 * x) * i1 + 1.0 / x - 0.5 * weighted;
}

// Clenshaw evaluation of the scaled large-argument expansion, x >= 2.
double k1_large(double x) {
    const double u = 4.0 / x - 1.0;
    double b1 = 0.0;
    double b2 = 0.0;
    for (int i = kK1LargeTerms - 1; i >= 1; --i) {
        const double next = 2.0 * u * b1 - b2 + kK1LargeCheb[i];
        b2 = b1;
        b1 = next;
    }
    const double scaled = u * b1 - b2 + 0.5 * kK1LargeCheb[0];
    return std::exp(-x) * scaled / std::sqrt(x);
}

}  // namespace

void FieldParams::validate() const {
    if (!(mass > 0.0) || !std::isfinite(mass)) {
        throw std::invalid_argument("field mass must be positive and finite");
    }
}

K1Eval bessel_k1_eval(double x) {
    if (!(x > 0.0)) {
        throw std::invalid_argument("bessel_k1 requires x > 0");
    }
    if (x > 750.0) {
        return K1Eval{0.0, true};
    }
    const double value = x <= kBesselK1Switch ? k1_small(x) : k1_large(x);
    return K1Eval{value, value == 0.0};
}

double bessel_k1(double x) { return bessel_k1_eval(x).value; }

double two_point(const FieldParams& params, double r) {
    params.validate();
    if (!(r > 0.0) || !std::isfinite(r)) {
        throw std::invalid_argument("two_point requires r > 0");
    }
    const double m = params.mass;
    constexpr double four_pi2 =
        4.0 * std::numbers::pi * std::numbers::pi;
    return m * bessel_k1(m * r) / (four_pi2 * r);
}

double two_point_asymptotic(const FieldParams& params, double r) {
    params.validate();
    if (!(r > 0.0) || !std::isfinite(r)) {
        throw std::invalid_argument("two_point_asymptotic requires r > 0");
    }
    const double m = params.mass;
    return m / (8.0 * std::numbers::pi) *
           std::sqrt(2.0 / (m * std::numbers::pi * r)) * std::exp(-m * r) / r;
}

double decay_rate_fit(const FieldParams& params, double r_min, double r_max,
                      std::size_t n) {
    params.validate();
    if (!(r_min > 0.0) || !(r_max > r_min) || n < 8) {
        throw std::invalid_argument(
            "decay_rate_fit requires 0 < r_min < r_max and n >= 8");
    }
    if (params.mass * r_min < 5.0) {
        throw std::invalid_argument(
            "decay_rate_fit requires m * r_min >= 5 (asymptotic regime)");
    }

    // Least-squares slope of y = -log(two_point * r^{3/2}) against r on a
    // log-spaced grid; the r^{3/2} factor strips the power-law prefactor.
    const double log_min = std::log(r_min);
    const double log_step = (std::log(r_max) - log_min) /
                            static_cast<double>(n - 1);
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = std::exp(log_min + log_step * static_cast<double>(i));
        const double y = -std::log(two_point(params, r) * std::pow(r, 1.5));
        sx += r;
        sy += y;
        sxx += r * r;
        sxy += r * y;
    }
    const double count = static_cast<double>(n);
    return (count * sxy - sx * sy) / (count * sxx - sx * sx);
}

double compton_wavelength_m(double mass_kg) {
    if (!(mass_kg > 0.0)) {
        throw std::invalid_argument("mass must be positive");
    }
    constexpr double hbar_si = 1.054571817e-34;  // J s
    constexpr double c_si = 299792458.0;         // m / s
    return hbar_si / (mass_kg * c_si);
}

}  // namespace clusterbell::cluster_field
