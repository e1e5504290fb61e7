#include "clusterbell/wavepacket.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "clusterbell/fft.hpp"

namespace clusterbell::wavepacket {

namespace {

constexpr double kTailBudget = 1e-10;

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) {
        throw std::invalid_argument(std::string(what) + " is not finite");
    }
}

}  // namespace

void GaussianPacket::validate() const {
    require_finite(x0, "packet x0");
    require_finite(p0, "packet p0");
    require_finite(sigma, "packet sigma");
    require_finite(mass, "packet mass");
    require_finite(hbar, "packet hbar");
    if (!(sigma > 0.0) || !(mass > 0.0) || !(hbar > 0.0)) {
        throw std::invalid_argument("packet sigma, mass, hbar must be > 0");
    }
}

void DetectorWindow::validate() const {
    require_finite(eta, "detector eta");
    require_finite(delta, "detector delta");
    if (!(delta > 0.0)) {
        throw std::invalid_argument("detector delta must be > 0");
    }
}

EvolvedPacketView evolve(const GaussianPacket& packet, double t) {
    packet.validate();
    require_finite(t, "time");
    const double chirp = packet.hbar * t / (packet.mass * packet.sigma * packet.sigma);
    return EvolvedPacketView{packet.x0 + packet.p0 / packet.mass * t,
                             packet.sigma * std::sqrt(1.0 + chirp * chirp),
                             chirp, t};
}

double l_t(double sigma, double delta, double t, double mass, double hbar) {
    const double chirp = hbar * t / (mass * sigma * sigma);
    const double st2 = sigma * sigma * (1.0 + chirp * chirp);
    const double sum = st2 + delta * delta;
    const double ratio2 = (delta / sigma) * (delta / sigma);
    const double cross = (hbar * t / mass) * ratio2;
    return std::sqrt(std::sqrt(sum * sum + cross * cross));
}

double detection_probability_closed(const GaussianPacket& packet,
                                    const DetectorWindow& det, double t) {
    det.validate();
    const EvolvedPacketView v = evolve(packet, t);

    const double sigma = packet.sigma;
    const double delta = det.delta;
    const double hbar = packet.hbar;
    const double mass = packet.mass;

    const double st2 = v.sigma_t * v.sigma_t;
    const double sum = st2 + delta * delta;
    const double ratio2 = (delta / sigma) * (delta / sigma);
    const double cross = (hbar * t / mass) * ratio2;
    const double l4 = sum * sum + cross * cross;
    const double l2 = std::sqrt(l4);

    const double eta = det.eta - packet.x0;
    const double drift = eta - packet.p0 / mass * t;
    const double carrier = packet.p0 * sigma * sigma / hbar +
                           hbar * t * eta / (mass * sigma * sigma);

    const double e1 = packet.p0 * packet.p0 * delta * delta * ratio2 *
                      sigma * sigma * st2 / (hbar * hbar * l4);
    const double e2 = drift * drift * sum / l4;
    const double e3 = delta * delta * carrier * carrier / l4;

    return 2.0 * delta * v.sigma_t / l2 * std::exp(-(e1 + e2 + e3));
}

void GridSpec::validate() const {
    require_finite(x_min, "grid x_min");
    require_finite(x_max, "grid x_max");
    if (!(x_max > x_min)) {
        throw std::invalid_argument("grid needs x_max > x_min");
    }
    if (points < 8 || points > (std::size_t{1} << 26)) {
        throw std::invalid_argument("grid points outside [8, 2^26]");
    }
}

GridSpec GridSpec::recommended(const GaussianPacket& packet,
                               const DetectorWindow& det, double t) {
    det.validate();
    const EvolvedPacketView v = evolve(packet, t);

    const double w = std::max({packet.sigma, v.sigma_t, det.delta});
    const double lo = std::min({packet.x0, v.center, det.eta}) - 10.0 * w;
    const double hi = std::max({packet.x0, v.center, det.eta}) + 10.0 * w;

    // Slightly tighter than the adequacy checks so rounding cannot trip them.
    double dx = std::min(packet.sigma, det.delta) / 16.5;
    const double k_need =
        std::abs(packet.p0) / packet.hbar + 8.0 / packet.sigma;
    dx = std::min(dx, std::numbers::pi / k_need);

    std::size_t n = 8;
    while (static_cast<double>(n) * dx < hi - lo &&
           n < (std::size_t{1} << 26)) {
        n <<= 1;
    }
    const double extra = static_cast<double>(n) * dx - (hi - lo);
    GridSpec grid;
    grid.x_min = lo - extra / 2.0;
    grid.x_max = hi + extra / 2.0;
    grid.points = n;
    return grid;
}

NumericOverlapResult detection_probability_numeric_diag(
    const GaussianPacket& packet, const DetectorWindow& det, double t,
    const GridSpec& grid) {
    det.validate();
    grid.validate();
    const EvolvedPacketView v = evolve(packet, t);
    (void)v;

    const std::size_t n = grid.points;
    const double h = grid.step();

    const double w_min = std::min(packet.sigma, det.delta);
    if (h > w_min / 16.0) {
        throw GridInsufficiencyError(
            "grid step exceeds min(sigma, delta)/16: narrow features "
            "undersampled");
    }
    const double k_max = std::numbers::pi / h;
    const double k_need =
        std::abs(packet.p0) / packet.hbar + 6.0 / packet.sigma;
    if (k_max < k_need) {
        throw GridInsufficiencyError(
            "grid Nyquist momentum below packet momentum content");
    }

    // Detector mass outside the grid, from the analytic Gaussian tail.
    const double tail =
        0.5 * (std::erfc((grid.x_max - det.eta) / det.delta) +
               std::erfc((det.eta - grid.x_min) / det.delta));
    if (tail > kTailBudget) {
        throw GridInsufficiencyError(
            "detector window mass outside the grid exceeds 1e-10");
    }

    const double sigma = packet.sigma;
    const double hbar = packet.hbar;
    std::vector<std::complex<double>> psi(n);
    const double psi_norm =
        std::pow(std::numbers::pi * sigma * sigma, -0.25);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = grid.x_min + static_cast<double>(i) * h;
        const double u = (x - packet.x0) / sigma;
        psi[i] = std::polar(psi_norm * std::exp(-0.5 * u * u),
                            packet.p0 * x / hbar);
    }

    // Exact free propagator in momentum space: phase -hbar k^2 t / (2 m).
    fft::forward(psi);
    const double dk = 2.0 * std::numbers::pi / (static_cast<double>(n) * h);
    for (std::size_t j = 0; j < n; ++j) {
        const double idx = (j < n / 2) ? static_cast<double>(j)
                                       : static_cast<double>(j) -
                                             static_cast<double>(n);
        const double k = dk * idx;
        psi[j] *= std::polar(1.0, -hbar * k * k * t / (2.0 * packet.mass));
    }
    fft::inverse(psi);

    const std::size_t band = std::max<std::size_t>(1, n / 32);
    double edge = 0.0;
    for (std::size_t i = 0; i < band; ++i) {
        edge += std::norm(psi[i]) + std::norm(psi[n - 1 - i]);
    }
    edge *= h;
    if (edge > kTailBudget) {
        throw GridInsufficiencyError(
            "evolved packet mass in the outer grid bands exceeds 1e-10");
    }

    const double phi_norm =
        std::pow(std::numbers::pi * det.delta * det.delta, -0.25);
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = grid.x_min + static_cast<double>(i) * h;
        const double u = (x - det.eta) / det.delta;
        acc += phi_norm * std::exp(-0.5 * u * u) * psi[i];
    }
    const std::complex<double> overlap = acc * h;

    return NumericOverlapResult{std::norm(overlap), edge, tail};
}

double detection_probability_numeric(const GaussianPacket& packet,
                                     const DetectorWindow& det, double t,
                                     const GridSpec& grid) {
    return detection_probability_numeric_diag(packet, det, t, grid)
        .probability;
}

std::complex<double> riemann_lebesgue_overlap(const SampledFunction& f,
                                              const SampledFunction& g,
                                              double y) {
    if (!(f.dx > 0.0) || !(g.dx > 0.0)) {
        throw std::invalid_argument("sampling step must be > 0");
    }
    if (std::abs(f.dx - g.dx) > 1e-12 * f.dx) {
        throw std::invalid_argument("samplings must share the step");
    }
    const double shift = (g.x0 + y - f.x0) / f.dx;
    const double rounded = std::round(shift);
    if (std::abs(shift - rounded) > 1e-9 * std::max(1.0, std::abs(shift))) {
        throw std::invalid_argument(
            "shift y must land on the common sampling grid");
    }
    const auto offset = static_cast<long long>(rounded);

    const auto nf = static_cast<long long>(f.values.size());
    const auto ng = static_cast<long long>(g.values.size());
    // f index j = i + offset must lie in [0, nf); outside counts as zero.
    const long long begin = std::max(0LL, -offset);
    const long long end = std::min(ng, nf - offset);

    std::complex<double> acc(0.0, 0.0);
    for (long long i = begin; i < end; ++i) {
        acc += f.values[static_cast<std::size_t>(i + offset)] *
               std::conj(g.values[static_cast<std::size_t>(i)]);
    }
    return acc * f.dx;
}

}  // namespace clusterbell::wavepacket
