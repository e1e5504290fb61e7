#include "clusterbell/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>

namespace clusterbell::experiment {

namespace {

struct Tally {
    std::uint64_t coincidences = 0;
    std::int64_t product_sum = 0;  // sum of s1*s2 over coincidences
};

// Stream layout per setting pair: base = 8 * setting_index, then
// base+0 detect side one, base+1 detect side two, base+2 first spin,
// base+3 spin agreement, base+4 hidden state (LHV runs only).
constexpr std::uint64_t kRoleDetectPlus = 0;
constexpr std::uint64_t kRoleDetectMinus = 1;
constexpr std::uint64_t kRoleSpinFirst = 2;
constexpr std::uint64_t kRoleSpinSecond = 3;
constexpr std::uint64_t kRoleHiddenState = 4;

std::uint64_t stream_base(unsigned setting_index) {
    return std::uint64_t{8} * setting_index;
}

// Outcomes depend only on (seed, stream, trial), never on how trials are
// partitioned, and the per-block tallies are integers, so totals are exact
// and identical for every thread count.
Tally singlet_block(const rng::CounterRng& rng, std::uint64_t base,
                    double p_plus, double p_minus, double a_dot_b,
                    std::uint64_t begin, std::uint64_t end) {
    Tally tally;
    const double p_flip = 0.5 * (1.0 + a_dot_b);
    for (std::uint64_t trial = begin; trial < end; ++trial) {
        if (rng.uniform(base + kRoleDetectPlus, trial) >= p_plus) continue;
        if (rng.uniform(base + kRoleDetectMinus, trial) >= p_minus) continue;
        const int s1 =
            rng.uniform(base + kRoleSpinFirst, trial) < 0.5 ? 1 : -1;
        const int s2 =
            rng.uniform(base + kRoleSpinSecond, trial) < p_flip ? -s1 : s1;
        ++tally.coincidences;
        tally.product_sum += s1 * s2;
    }
    return tally;
}

Tally lhv_block(const rng::CounterRng& rng, std::uint64_t base,
                double p_plus, double p_minus,
                const std::vector<double>& cumulative,
                const std::vector<spin_chsh::LhvModel::Assignment>& states,
                int pair_index, std::uint64_t begin, std::uint64_t end) {
    Tally tally;
    for (std::uint64_t trial = begin; trial < end; ++trial) {
        if (rng.uniform(base + kRoleDetectPlus, trial) >= p_plus) continue;
        if (rng.uniform(base + kRoleDetectMinus, trial) >= p_minus) continue;
        const double u = rng.uniform(base + kRoleHiddenState, trial);
        const std::size_t lambda = static_cast<std::size_t>(
            std::lower_bound(cumulative.begin(), cumulative.end(), u) -
            cumulative.begin());
        const auto& s = states[std::min(lambda, states.size() - 1)];
        const int s1 = (pair_index < 2) ? s.a1 : s.a2;
        const int s2 = (pair_index % 2 == 0) ? s.b1 : s.b2;
        ++tally.coincidences;
        tally.product_sum += s1 * s2;
    }
    return tally;
}

template <typename BlockFn>
Tally run_parallel(std::uint64_t trials, unsigned threads, BlockFn&& block) {
    unsigned n_threads = threads == 0 ? resolve_thread_cap() : threads;
    n_threads = static_cast<unsigned>(
        std::min<std::uint64_t>(n_threads, std::max<std::uint64_t>(trials, 1)));
    if (n_threads <= 1) return block(0, trials);

    std::vector<Tally> parts(n_threads);
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (unsigned i = 0; i < n_threads; ++i) {
        const std::uint64_t begin = trials * i / n_threads;
        const std::uint64_t end = trials * (i + 1) / n_threads;
        pool.emplace_back(
            [&parts, &block, i, begin, end] { parts[i] = block(begin, end); });
    }
    for (auto& th : pool) th.join();

    Tally total;
    for (const Tally& part : parts) {
        total.coincidences += part.coincidences;
        total.product_sum += part.product_sum;
    }
    return total;
}

CorrelatorSample finish_sample(std::uint64_t trials, const Tally& tally) {
    CorrelatorSample out;
    out.trials = trials;
    out.coincidences = tally.coincidences;
    out.unconditional_correlator = static_cast<double>(tally.product_sum) /
                                   static_cast<double>(trials);
    if (tally.coincidences == 0) {
        out.zero_coincidences = true;
        return out;
    }
    const double nc = static_cast<double>(tally.coincidences);
    out.empirical_correlator = static_cast<double>(tally.product_sum) / nc;
    out.std_error = std::sqrt(std::max(
        0.0, (1.0 - out.empirical_correlator * out.empirical_correlator) /
                 nc));
    return out;
}

struct SettingPair {
    const spin_chsh::SpinDirection* a;
    const spin_chsh::SpinDirection* b;
    double sign;
};

std::array<SettingPair, 4> setting_pairs(const spin_chsh::ChshSetting& s) {
    return {SettingPair{&s.a1, &s.b1, 1.0}, SettingPair{&s.a1, &s.b2, 1.0},
            SettingPair{&s.a2, &s.b1, 1.0}, SettingPair{&s.a2, &s.b2, -1.0}};
}

RunRecord combine_runs(const ExperimentConfig& cfg, double t,
                       const std::array<CorrelatorSample, 4>& runs) {
    const SideProbabilities sides = side_probabilities(cfg, t);
    RunRecord rec;
    rec.time = t;
    rec.p_side_plus = sides.plus;
    rec.p_side_minus = sides.minus;
    rec.p_joint = sides.plus * sides.minus;
    rec.damped_chsh = damped_chsh(cfg, t);
    rec.coincidences = std::numeric_limits<std::uint64_t>::max();
    const std::array<SettingPair, 4> pairs = setting_pairs(cfg.setting);
    double variance = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        rec.coincidences = std::min(rec.coincidences, runs[i].coincidences);
        rec.zero_coincidences |= runs[i].zero_coincidences;
        rec.empirical_chsh += pairs[i].sign * runs[i].empirical_correlator;
        variance += runs[i].std_error * runs[i].std_error;
    }
    rec.std_error = std::sqrt(variance);
    if (rec.zero_coincidences) {
        rec.empirical_chsh = 0.0;
        rec.std_error = 0.0;
    }
    return rec;
}

}  // namespace

DetectorStrategy DetectorStrategy::make_static(double eta) {
    if (!std::isfinite(eta)) {
        throw std::invalid_argument("static detector center must be finite");
    }
    DetectorStrategy s(Kind::kStatic);
    s.eta_ = eta;
    return s;
}

DetectorStrategy DetectorStrategy::make_adaptive() {
    return DetectorStrategy(Kind::kAdaptive);
}

DetectorStrategy DetectorStrategy::make_schedule(
    std::vector<std::pair<double, double>> entries) {
    if (entries.empty()) {
        throw std::invalid_argument("schedule must have at least one entry");
    }
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (!std::isfinite(entries[i].first) ||
            !std::isfinite(entries[i].second)) {
            throw std::invalid_argument("schedule entries must be finite");
        }
        if (i > 0 && !(entries[i].first > entries[i - 1].first)) {
            throw std::invalid_argument(
                "schedule times must be strictly increasing");
        }
    }
    DetectorStrategy s(Kind::kSchedule);
    s.entries_ = std::move(entries);
    return s;
}

double DetectorStrategy::eta_at(double t, double p0, double mass) const {
    switch (kind_) {
        case Kind::kStatic:
            return eta_;
        case Kind::kAdaptive:
            return p0 / mass * t;
        case Kind::kSchedule: {
            if (entries_.empty() || t < entries_.front().first) {
                throw std::invalid_argument(
                    "schedule does not cover the requested time");
            }
            auto it = std::upper_bound(
                entries_.begin(), entries_.end(), t,
                [](double value, const std::pair<double, double>& e) {
                    return value < e.first;
                });
            return std::prev(it)->second;
        }
    }
    throw std::logic_error("unreachable strategy kind");
}

void ExperimentConfig::validate() const {
    const wavepacket::GaussianPacket probe{0.0, p0, sigma, mass, hbar};
    probe.validate();
    const wavepacket::DetectorWindow window{0.0, delta};
    window.validate();
    if (times.empty()) {
        throw std::invalid_argument("config times must be nonempty");
    }
    for (double t : times) {
        if (!std::isfinite(t) || t < 0.0) {
            throw std::invalid_argument(
                "config times must be finite and nonnegative");
        }
    }
    if (trials < 1) {
        throw std::invalid_argument("config trials must be >= 1");
    }
}

SideProbabilities side_probabilities(const ExperimentConfig& cfg, double t) {
    cfg.validate();
    const double eta = cfg.strategy.eta_at(t, cfg.p0, cfg.mass);
    const wavepacket::GaussianPacket plus{0.0, cfg.p0, cfg.sigma, cfg.mass,
                                          cfg.hbar};
    const wavepacket::GaussianPacket minus{0.0, -cfg.p0, cfg.sigma, cfg.mass,
                                           cfg.hbar};
    return SideProbabilities{
        wavepacket::detection_probability_closed(
            plus, wavepacket::DetectorWindow{eta, cfg.delta}, t),
        wavepacket::detection_probability_closed(
            minus, wavepacket::DetectorWindow{-eta, cfg.delta}, t)};
}

double joint_detection_probability(const ExperimentConfig& cfg, double t) {
    const SideProbabilities sides = side_probabilities(cfg, t);
    return sides.plus * sides.minus;
}

double damped_correlator(const ExperimentConfig& cfg, double t,
                         const spin_chsh::SpinDirection& a,
                         const spin_chsh::SpinDirection& b) {
    return joint_detection_probability(cfg, t) *
           spin_chsh::spin_correlator(spin_chsh::singlet_state(), a, b);
}

double damped_chsh(const ExperimentConfig& cfg, double t) {
    return joint_detection_probability(cfg, t) *
           spin_chsh::chsh_value(spin_chsh::singlet_state(), cfg.setting);
}

CorrelatorSample sample_run(const ExperimentConfig& cfg, double t,
                            const spin_chsh::SpinDirection& a,
                            const spin_chsh::SpinDirection& b,
                            unsigned setting_index, unsigned threads) {
    const SideProbabilities sides = side_probabilities(cfg, t);
    const rng::CounterRng rng(cfg.seed);
    const std::uint64_t base = stream_base(setting_index);
    const double a_dot_b = a.dot(b);
    const Tally tally = run_parallel(
        cfg.trials, threads,
        [&rng, base, &sides, a_dot_b](std::uint64_t begin, std::uint64_t end) {
            return singlet_block(rng, base, sides.plus, sides.minus, a_dot_b,
                                 begin, end);
        });
    return finish_sample(cfg.trials, tally);
}

RunRecord estimate_chsh(const ExperimentConfig& cfg, double t,
                        unsigned threads) {
    const std::array<SettingPair, 4> pairs = setting_pairs(cfg.setting);
    std::array<CorrelatorSample, 4> runs;
    for (unsigned i = 0; i < 4; ++i) {
        runs[i] = sample_run(cfg, t, *pairs[i].a, *pairs[i].b, i, threads);
    }
    return combine_runs(cfg, t, runs);
}

RunRecord estimate_chsh_lhv(const spin_chsh::LhvModel& model,
                            const ExperimentConfig& cfg, double t,
                            unsigned threads) {
    const SideProbabilities sides = side_probabilities(cfg, t);
    const rng::CounterRng rng(cfg.seed);

    std::vector<double> cumulative(model.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < model.size(); ++i) {
        acc += model.weights()[i];
        cumulative[i] = acc;
    }
    cumulative.back() = 1.0;

    std::array<CorrelatorSample, 4> runs;
    for (unsigned i = 0; i < 4; ++i) {
        const std::uint64_t base = stream_base(i);
        const int pair_index = static_cast<int>(i);
        const Tally tally = run_parallel(
            cfg.trials, threads,
            [&](std::uint64_t begin, std::uint64_t end) {
                return lhv_block(rng, base, sides.plus, sides.minus,
                                 cumulative, model.assignments(), pair_index,
                                 begin, end);
            });
        runs[i] = finish_sample(cfg.trials, tally);
    }
    return combine_runs(cfg, t, runs);
}

double trials_for_significance(const ExperimentConfig& cfg, double t,
                               double k) {
    if (!(k > 0.0) || !std::isfinite(k)) {
        throw std::invalid_argument("significance level k must be > 0");
    }
    const spin_chsh::TwoQubitState singlet = spin_chsh::singlet_state();
    const double s_value = spin_chsh::chsh_value(singlet, cfg.setting);
    const double excess = std::abs(s_value) - 2.0;
    const double p_joint = joint_detection_probability(cfg, t);
    if (excess <= 0.0 || p_joint <= 0.0 || !std::isfinite(p_joint)) {
        return std::numeric_limits<double>::infinity();
    }

    // Normal approximation: per-setting correlator variance (1 - E^2)/N_c,
    // N_c = p_joint * N, so N = k^2 sum(1 - E^2) / (excess^2 p_joint).
    const std::array<SettingPair, 4> pairs = setting_pairs(cfg.setting);
    double variance_sum = 0.0;
    for (const SettingPair& pair : pairs) {
        const double e =
            spin_chsh::spin_correlator(singlet, *pair.a, *pair.b);
        variance_sum += 1.0 - e * e;
    }
    return k * k * variance_sum / (excess * excess * p_joint);
}

spin_chsh::LhvModel random_lhv_model(const rng::CounterRng& rng,
                                     std::uint64_t index, std::size_t states) {
    if (states == 0) {
        throw std::invalid_argument("model needs at least one hidden state");
    }
    std::vector<double> weights(states);
    std::vector<spin_chsh::LhvModel::Assignment> assignments(states);
    double sum = 0.0;
    for (std::size_t i = 0; i < states; ++i) {
        const std::uint64_t counter = 5 * static_cast<std::uint64_t>(i);
        weights[i] = rng.uniform(index, counter);
        sum += weights[i];
        const auto sign = [&](std::uint64_t role) {
            return (rng.bits(index, counter + 1 + role) & 1) ? 1 : -1;
        };
        assignments[i] = {sign(0), sign(1), sign(2), sign(3)};
    }
    if (sum <= 0.0) {
        for (double& w : weights) w = 1.0 / static_cast<double>(states);
    } else {
        for (double& w : weights) w /= sum;
    }
    return spin_chsh::LhvModel(std::move(weights), std::move(assignments));
}

unsigned resolve_thread_cap() {
    const char* env = std::getenv("CLUSTERBELL_THREADS");
    if (env == nullptr || *env == '\0') {
        return std::max(1u, std::thread::hardware_concurrency());
    }
    unsigned value = 0;
    const char* end = env + std::strlen(env);
    const auto [ptr, ec] = std::from_chars(env, end, value);
    if (ec != std::errc() || ptr != end || value == 0) {
        throw std::invalid_argument(
            "CLUSTERBELL_THREADS must be a positive integer");
    }
    return value;
}

}  // namespace clusterbell::experiment
