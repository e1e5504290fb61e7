#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

// One-dimensional free Gaussian wave-packet evolution and detection-overlap
// computation. The closed-form detection probability is paired with an
// independent grid-propagation oracle (spectral free evolution + quadrature).
//
// Default unit system: hbar = m = sigma = 1; all three are explicit fields,
// so any consistent unit system works. Regimes are controlled by the
// dimensionless group hbar*t/(m*sigma^2).

namespace clusterbell::wavepacket {

/// Initial 1-D Gaussian state: psi(x) = (pi sigma^2)^{-1/4}
/// exp(-(x-x0)^2/(2 sigma^2) + i p0 x / hbar).
struct GaussianPacket {
    double x0 = 0.0;     ///< initial center
    double p0 = 0.0;     ///< signed mean momentum
    double sigma = 1.0;  ///< initial width
    double mass = 1.0;
    double hbar = 1.0;

    void validate() const;
};

/// Parameters of the freely evolved packet at time t. The evolved state is
/// a chirped Gaussian; it is recomputed from the initial parameters on
/// demand rather than stored, so repeated queries do not accumulate drift.
struct EvolvedPacketView {
    double center;   ///< x0 + (p0/m) t
    double sigma_t;  ///< sqrt(sigma^2 + hbar^2 t^2 / (m^2 sigma^2))
    double chirp;    ///< hbar t / (m sigma^2), dimensionless
    double time;
};

/// Gaussian detection window: phi(x) = (pi Delta^2)^{-1/4}
/// exp(-(x-eta)^2/(2 Delta^2)), zero mean momentum, centered at eta.
struct DetectorWindow {
    double eta = 0.0;    ///< signed center
    double delta = 1.0;  ///< width Delta

    void validate() const;
};

EvolvedPacketView evolve(const GaussianPacket& packet, double t);

/// L_t = ((sigma_t^2 + Delta^2)^2 + (hbar t / m)^2 (Delta/sigma)^4)^{1/4}.
/// At t = 0 with Delta = sigma this is sqrt(2) sigma; for large t it tends
/// to sigma_t. Monotone nondecreasing in |t|.
double l_t(double sigma, double delta, double t, double mass, double hbar);

/// Closed-form detection probability |<U_t G_p0 | phi_eta>|^2:
///
///   (2 Delta sigma_t / L_t^2)
///   * exp(-p0^2 Delta^4 sigma_t^2 / (hbar^2 L_t^4))
///   * exp(-(eta - p0 t/m)^2 (Delta^2 + sigma_t^2) / L_t^4)
///   * exp(-(Delta^2/L_t^4) (p0 sigma^2/hbar + hbar t eta/(m sigma^2))^2)
///
/// A nonzero packet.x0 only shifts the geometry: the formula is evaluated
/// with eta - x0 in place of eta (the extra phase has no effect on the
/// modulus). Value lies in [0, 1].
double detection_probability_closed(const GaussianPacket& packet,
                                    const DetectorWindow& det, double t);

/// Uniform spatial grid for the numeric oracle: points x_i = x_min + i*h
/// with h = (x_max - x_min)/points (periodic convention, right endpoint
/// excluded). Powers of two are fastest for the spectral step.
struct GridSpec {
    double x_min = -16.0;
    double x_max = 16.0;
    std::size_t points = 1024;

    double step() const { return (x_max - x_min) / static_cast<double>(points); }

    /// Grid adequate for the given overlap problem: covers 10 widths around
    /// initial/evolved packet centers and the detector, resolves
    /// min(sigma, Delta)/16 and the momentum content up to p0 + 6 hbar/sigma,
    /// with points rounded up to a power of two.
    static GridSpec recommended(const GaussianPacket& packet,
                                const DetectorWindow& det, double t);

    void validate() const;
};

/// Raised when the grid fails a numerical adequacy check: spatial step too
/// coarse for the detector/packet widths or the momentum content, or more
/// than 1e-10 of probability mass outside the covered interval.
class GridInsufficiencyError : public std::runtime_error {
  public:
    explicit GridInsufficiencyError(const std::string& what)
        : std::runtime_error(what) {}
};

struct NumericOverlapResult {
    double probability;
    double packet_edge_mass;    ///< |psi_t|^2 mass in the outer grid bands
    double detector_tail_mass;  ///< analytic |phi|^2 mass outside the grid
};

/// Independent oracle for the closed form: samples the initial packet on
/// the grid, applies the exact free kinetic phase in momentum space, and
/// evaluates |integral phi*(x) psi(x,t) dx|^2 by trapezoidal quadrature.
/// Throws GridInsufficiencyError when the grid is inadequate.
double detection_probability_numeric(const GaussianPacket& packet,
                                     const DetectorWindow& det, double t,
                                     const GridSpec& grid);

/// Same computation with the tail-mass diagnostics exposed.
NumericOverlapResult detection_probability_numeric_diag(
    const GaussianPacket& packet, const DetectorWindow& det, double t,
    const GridSpec& grid);

/// Complex function sampled on a uniform grid: values[i] = f(x0 + i*dx).
struct SampledFunction {
    double x0 = 0.0;
    double dx = 1.0;
    std::vector<std::complex<double>> values;
};

/// Translation overlap integral f, g -> integral f(x + y) g*(x) dx by grid
/// quadrature. The two samplings must share the step, and the shift y must
/// be an integer multiple of it; values outside a function's sampled range
/// count as zero, so disjoint shifted supports give exactly zero.
std::complex<double> riemann_lebesgue_overlap(const SampledFunction& f,
                                              const SampledFunction& g,
                                              double y);

}  // namespace clusterbell::wavepacket
