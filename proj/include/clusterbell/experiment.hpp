#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "clusterbell/rng.hpp"
#include "clusterbell/spin_chsh.hpp"
#include "clusterbell/wavepacket.hpp"

// Coincidence experiments on a spin singlet carried by two dispersing
// Gaussian packets. The spatial state is a tensor product, so the mean value
// of a joint detection-plus-spin observable factorizes into
//
//   p_joint(t) * <(a.sigma)(x)(b.sigma)>
//
// where p_joint is the product of the two one-sided window overlaps. The
// damped CHSH combination p_joint * 2*sqrt(2) sinks below the classical
// bound 2 once p_joint < 1/sqrt(2); post-selecting on coincidences restores
// the undamped correlator at a statistics cost proportional to 1/p_joint.

namespace clusterbell::experiment {

/// Detector placement policy for the +p0 side; the -p0 side mirrors it
/// (center -eta, momentum -p0).
class DetectorStrategy {
  public:
    enum class Kind { kStatic, kAdaptive, kSchedule };

    /// Fixed center eta at all times.
    static DetectorStrategy make_static(double eta);

    /// Follows the ballistic packet center, eta(t) = (p0/m) t.
    static DetectorStrategy make_adaptive();

    /// Piecewise-constant (time, eta) table; times strictly increasing.
    /// eta_at picks the entry with the largest time <= t and rejects t
    /// before the first entry.
    static DetectorStrategy make_schedule(
        std::vector<std::pair<double, double>> entries);

    Kind kind() const { return kind_; }
    const std::vector<std::pair<double, double>>& entries() const {
        return entries_;
    }

    /// Detector center for the +p0 particle at time t.
    double eta_at(double t, double p0, double mass) const;

  private:
    explicit DetectorStrategy(Kind kind) : kind_(kind) {}

    Kind kind_;
    double eta_ = 0.0;
    std::vector<std::pair<double, double>> entries_;
};

/// Full parameter set of one coincidence experiment.
struct ExperimentConfig {
    double sigma = 1.0;  ///< initial packet width
    double delta = 1.0;  ///< detector window width
    double p0 = 0.0;     ///< momentum of side one; side two carries -p0
    double mass = 1.0;
    double hbar = 1.0;
    spin_chsh::ChshSetting setting = spin_chsh::max_violation_setting();
    DetectorStrategy strategy = DetectorStrategy::make_static(0.0);
    std::vector<double> times = {0.0};
    std::uint64_t trials = 1;
    std::uint64_t seed = 0;

    /// Throws std::invalid_argument on nonpositive dimensional parameters,
    /// empty or negative times, or trials < 1.
    void validate() const;
};

/// One-sided detection probabilities at time t.
struct SideProbabilities {
    double plus;   ///< +p0 packet against the window at +eta(t)
    double minus;  ///< -p0 packet against the window at -eta(t)
};

SideProbabilities side_probabilities(const ExperimentConfig& cfg, double t);

/// Probability that both sides click: p_plus * p_minus. The spatial state
/// is a product, so the sides are independent.
double joint_detection_probability(const ExperimentConfig& cfg, double t);

/// p_joint(t) * spin_correlator(singlet, a, b): the factorized mean value
/// of the detection-conditioned spin product.
double damped_correlator(const ExperimentConfig& cfg, double t,
                         const spin_chsh::SpinDirection& a,
                         const spin_chsh::SpinDirection& b);

/// p_joint(t) * chsh_value(singlet, cfg.setting). With the max-violation
/// directions this is p_joint * 2*sqrt(2).
double damped_chsh(const ExperimentConfig& cfg, double t);

/// Monte Carlo estimate of one setting-pair correlator.
struct CorrelatorSample {
    std::uint64_t trials = 0;
    std::uint64_t coincidences = 0;
    /// Post-selected: (agree - disagree) / coincidences. Zero when flagged.
    double empirical_correlator = 0.0;
    /// sqrt((1 - E^2) / coincidences); zero when flagged.
    double std_error = 0.0;
    /// Coincidence-gated product sum divided by all trials; this is the
    /// estimator the overlap damping suppresses toward zero.
    double unconditional_correlator = 0.0;
    bool zero_coincidences = false;
};

/// Runs cfg.trials independent trials at time t. Each trial draws the two
/// detection events (Bernoulli with the one-sided probabilities) and, on
/// coincidence, a spin pair from the singlet law.
///
/// Outcome law lemma: the singlet has <(a.sigma)(x)(b.sigma)> = -a.b and
/// unbiased marginals <a.sigma (x) I> = <I (x) b.sigma> = 0. A {-1,+1}^2
/// law is fixed by its first and second moments,
///   P(s1, s2) = (1 + s1 <A> + s2 <B> + s1 s2 <AB>) / 4,
/// so here P(s1, s2) = (1 - s1 s2 a.b) / 4. Sampling draws s1 uniform and
/// sets s2 = -s1 with probability (1 + a.b)/2.
///
/// Randomness is counter-based: draw k of stream (setting_index, role) is a
/// pure function of (cfg.seed, stream, k), so the result is bit-identical
/// for any number of threads. threads = 0 means resolve_thread_cap().
CorrelatorSample sample_run(const ExperimentConfig& cfg, double t,
                            const spin_chsh::SpinDirection& a,
                            const spin_chsh::SpinDirection& b,
                            unsigned setting_index = 0, unsigned threads = 0);

/// One time point of a coincidence experiment.
struct RunRecord {
    double time = 0.0;
    double p_side_plus = 0.0;
    double p_side_minus = 0.0;
    double p_joint = 0.0;
    double damped_chsh = 0.0;  ///< analytic p_joint * S_quantum
    /// Smallest per-setting coincidence count of the four sample runs.
    std::uint64_t coincidences = 0;
    double empirical_chsh = 0.0;  ///< post-selected S from the four runs
    double std_error = 0.0;       ///< quadrature sum of the four errors
    bool zero_coincidences = false;
};

/// Four sample_run calls (one per setting pair of cfg.setting) combined
/// into the empirical CHSH value E11 + E12 + E21 - E22.
RunRecord estimate_chsh(const ExperimentConfig& cfg, double t,
                        unsigned threads = 0);

/// Same estimator, but spin outcomes come from a local hidden variable
/// model instead of the singlet: each trial draws a hidden state lambda
/// from the model weights and reads off the deterministic outcomes for its
/// setting pair. |empirical_chsh| stays within 2 up to sampling error.
RunRecord estimate_chsh_lhv(const spin_chsh::LhvModel& model,
                            const ExperimentConfig& cfg, double t,
                            unsigned threads = 0);

/// Estimated trials per setting pair so that the CHSH excess over the
/// classical bound is a k-sigma effect:
///
///   N = k^2 * sum_ij (1 - E_ij^2) / ((|S| - 2)^2 * p_joint(t))
///
/// using the normal approximation for the post-selected estimator. Returns
/// a continuous estimate; +infinity when p_joint underflows to zero or the
/// setting does not violate the bound (|S| <= 2).
double trials_for_significance(const ExperimentConfig& cfg, double t,
                               double k);

/// Random mixed model with `states` hidden states: weights are normalized
/// uniform draws, outcome signs are fair coin flips. Counter-based on
/// (rng, index), so model i is reproducible in isolation.
spin_chsh::LhvModel random_lhv_model(const rng::CounterRng& rng,
                                     std::uint64_t index, std::size_t states);

/// Thread cap: CLUSTERBELL_THREADS when set (positive integer, else throws
/// std::invalid_argument), otherwise hardware concurrency, at least 1.
unsigned resolve_thread_cap();

}  // namespace clusterbell::experiment
