#include "clusterbell/experiment.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <vector>

#include "clusterbell/spin_chsh.hpp"
#include "clusterbell/wavepacket.hpp"
#include "test_util.hpp"

using namespace clusterbell;
using namespace clusterbell::experiment;
using spin_chsh::SpinDirection;

namespace {

ExperimentConfig base_config() {
    ExperimentConfig cfg;
    cfg.sigma = 1.0;
    cfg.delta = 1.0;
    cfg.p0 = 0.0;
    cfg.strategy = DetectorStrategy::make_static(0.0);
    cfg.trials = 1;
    cfg.seed = 1234;
    return cfg;
}

bool sample_equal(const CorrelatorSample& a, const CorrelatorSample& b) {
    return a.trials == b.trials && a.coincidences == b.coincidences &&
           a.empirical_correlator == b.empirical_correlator &&
           a.std_error == b.std_error &&
           a.unconditional_correlator == b.unconditional_correlator &&
           a.zero_coincidences == b.zero_coincidences;
}

}  // namespace

int main() {
    const double sqrt2 = std::sqrt(2.0);
    const SpinDirection z(0, 0, 1);
    const SpinDirection x(1, 0, 0);

    // strategy construction and resolution
    {
        const DetectorStrategy fixed = DetectorStrategy::make_static(2.5);
        CHECK_NEAR(fixed.eta_at(7.0, 3.0, 1.0), 2.5, 0.0);

        const DetectorStrategy follow = DetectorStrategy::make_adaptive();
        CHECK_NEAR(follow.eta_at(8.0, 3.0, 2.0), 12.0, 1e-15);
        CHECK_NEAR(follow.eta_at(8.0, -3.0, 2.0), -12.0, 1e-15);

        const DetectorStrategy plan = DetectorStrategy::make_schedule(
            {{1.0, 0.5}, {2.0, 1.5}, {5.0, 4.0}});
        CHECK_NEAR(plan.eta_at(1.0, 0, 1), 0.5, 0.0);
        CHECK_NEAR(plan.eta_at(1.9, 0, 1), 0.5, 0.0);
        CHECK_NEAR(plan.eta_at(2.0, 0, 1), 1.5, 0.0);
        CHECK_NEAR(plan.eta_at(100.0, 0, 1), 4.0, 0.0);
        CHECK_THROWS(plan.eta_at(0.5, 0, 1), std::invalid_argument);

        CHECK_THROWS(DetectorStrategy::make_schedule({}),
                     std::invalid_argument);
        CHECK_THROWS(DetectorStrategy::make_schedule({{1.0, 0.0}, {1.0, 1.0}}),
                     std::invalid_argument);
    }

    // config validation
    {
        ExperimentConfig bad = base_config();
        bad.sigma = -1.0;
        CHECK_THROWS(bad.validate(), std::invalid_argument);
        bad = base_config();
        bad.times.clear();
        CHECK_THROWS(bad.validate(), std::invalid_argument);
        bad = base_config();
        bad.times = {-1.0};
        CHECK_THROWS(bad.validate(), std::invalid_argument);
        bad = base_config();
        bad.trials = 0;
        CHECK_THROWS(bad.validate(), std::invalid_argument);
    }

    // joint detection probability: unit case, mirror symmetry, adaptive tail
    {
        CHECK_NEAR(joint_detection_probability(base_config(), 0.0), 1.0, 0.0);

        ExperimentConfig cfg = base_config();
        cfg.p0 = 1.3;
        cfg.strategy = DetectorStrategy::make_static(0.7);
        for (double t : {0.0, 0.5, 4.0}) {
            const SideProbabilities sides = side_probabilities(cfg, t);
            CHECK_NEAR(sides.plus, sides.minus, 1e-12);
        }

        ExperimentConfig tail = base_config();
        tail.p0 = 1.0;
        tail.strategy = DetectorStrategy::make_adaptive();
        const double t = 100.0;
        const double want = std::pow(2.0 / t * std::exp(-1.0), 2);
        CHECK_REL(joint_detection_probability(tail, t), want, 0.01);
    }

    // factorization contract against independently computed pieces
    {
        ExperimentConfig cfg = base_config();
        cfg.p0 = 0.8;
        cfg.delta = 0.6;
        cfg.strategy = DetectorStrategy::make_static(1.1);
        const auto singlet = spin_chsh::singlet_state();
        for (double t : {0.0, 1.0, 7.0}) {
            const wavepacket::GaussianPacket plus{0, 0.8, 1.0, 1.0, 1.0};
            const wavepacket::GaussianPacket minus{0, -0.8, 1.0, 1.0, 1.0};
            const double p_plus = wavepacket::detection_probability_closed(
                plus, wavepacket::DetectorWindow{1.1, 0.6}, t);
            const double p_minus = wavepacket::detection_probability_closed(
                minus, wavepacket::DetectorWindow{-1.1, 0.6}, t);
            const SpinDirection a = SpinDirection::normalized(1, 2, -1);
            const SpinDirection b = SpinDirection::normalized(-2, 0.5, 1);
            const double want =
                p_plus * p_minus * spin_chsh::spin_correlator(singlet, a, b);
            CHECK_NEAR(damped_correlator(cfg, t, a, b), want, 1e-12);
        }

        // orthogonal directions kill the spin factor
        CHECK_NEAR(damped_correlator(cfg, 1.0, z, x), 0.0, 1e-15);

        // p_joint = 1 and a = b gives exactly -1
        CHECK_NEAR(damped_correlator(base_config(), 0.0, z, z), -1.0, 1e-14);

        // short-time far window: product of two one-sided suppressions
        ExperimentConfig far = base_config();
        far.p0 = 1.0;
        far.strategy = DetectorStrategy::make_static(3.0);
        const double per_side = std::exp(-0.5) * std::exp(-4.5);
        CHECK_REL(damped_correlator(far, 0.01, z, z),
                  -per_side * per_side, 0.1);
    }

    // damped CHSH: undamped maximum, visibility threshold, 1/t^2 decay
    {
        CHECK_NEAR(damped_chsh(base_config(), 0.0), 2.0 * sqrt2, 1e-12);

        ExperimentConfig cfg = base_config();
        cfg.strategy = DetectorStrategy::make_static(1.0);
        for (double t : {0.0, 0.3, 1.0, 3.0}) {
            const double p = joint_detection_probability(cfg, t);
            const double s = damped_chsh(cfg, t);
            CHECK_NEAR(s, p * 2.0 * sqrt2, 1e-12);
            if (p < 1.0 / sqrt2 - 1e-9) CHECK(s < 2.0);
            if (p > 1.0 / sqrt2 + 1e-9) CHECK(s > 2.0);
        }

        ExperimentConfig adaptive = base_config();
        adaptive.p0 = 1.0;
        adaptive.strategy = DetectorStrategy::make_adaptive();
        const double v100 = damped_chsh(adaptive, 100.0);
        const double v1000 = damped_chsh(adaptive, 1000.0);
        CHECK_REL(v100 / v1000, 100.0, 0.02);
    }

    // adaptive recovery for narrow windows: ratio >= 1 once the ballistic
    // center has passed the static position (delta <= sigma/2, eta <= vt/2;
    // wider windows genuinely lose, see the wavepacket crossover test)
    {
        for (double delta : {0.25, 0.5}) {
            for (double t : {50.0, 100.0}) {
                for (double eta : {1.0, 2.0, 0.3 * t, 0.5 * t}) {
                    ExperimentConfig adaptive = base_config();
                    adaptive.p0 = 1.0;
                    adaptive.delta = delta;
                    adaptive.strategy = DetectorStrategy::make_adaptive();
                    ExperimentConfig fixed = adaptive;
                    fixed.strategy = DetectorStrategy::make_static(eta);
                    CHECK(damped_chsh(adaptive, t) >=
                          damped_chsh(fixed, t) * (1.0 - 1e-12));
                }
            }
        }
    }

    // sample_run: exact anticorrelation, determinism, thread independence
    {
        ExperimentConfig cfg = base_config();
        cfg.trials = 20000;
        const CorrelatorSample anti = sample_run(cfg, 0.0, z, z);
        CHECK(anti.coincidences == cfg.trials);
        CHECK(anti.empirical_correlator == -1.0);
        CHECK(anti.std_error == 0.0);
        CHECK(anti.unconditional_correlator == -1.0);

        const CorrelatorSample again = sample_run(cfg, 0.0, z, z);
        CHECK(sample_equal(anti, again));

        const CorrelatorSample ortho = sample_run(cfg, 0.0, z, x, 1);
        CHECK(std::abs(ortho.empirical_correlator) <= 5.0 * ortho.std_error);
        CHECK_REL(ortho.std_error,
                  1.0 / std::sqrt(static_cast<double>(ortho.coincidences)),
                  0.01);

        const CorrelatorSample one_thread = sample_run(cfg, 0.0, z, x, 1, 1);
        const CorrelatorSample four_threads = sample_run(cfg, 0.0, z, x, 1, 4);
        CHECK(sample_equal(one_thread, four_threads));

        // unconditional estimator is the coincidence-gated sum over trials
        CHECK_NEAR(ortho.unconditional_correlator,
                   ortho.empirical_correlator *
                       static_cast<double>(ortho.coincidences) /
                       static_cast<double>(ortho.trials),
                   1e-15);

        // starved run flags instead of crashing
        ExperimentConfig starved = base_config();
        starved.trials = 50;
        starved.strategy = DetectorStrategy::make_static(12.0);
        const CorrelatorSample none = sample_run(starved, 0.0, z, z);
        CHECK(none.zero_coincidences);
        CHECK(none.coincidences == 0);
        CHECK(none.empirical_correlator == 0.0);
    }

    // post-selection invariance: same conditional law at p_joint 1, .1, .01
    {
        const SpinDirection b1 = SpinDirection::normalized(-1, 0, -1);
        const double want = 1.0 / sqrt2;  // -z.b1
        const struct {
            double eta;
            std::uint64_t trials;
        } setups[] = {{0.0, 100000},
                      {std::sqrt(std::log(10.0)), 1000000},
                      {std::sqrt(std::log(100.0)), 10000000}};
        for (const auto& setup : setups) {
            ExperimentConfig cfg = base_config();
            cfg.strategy = DetectorStrategy::make_static(setup.eta);
            cfg.trials = setup.trials;
            cfg.seed = 99;
            const CorrelatorSample run = sample_run(cfg, 0.0, z, b1);
            CHECK(run.coincidences > 50000);
            CHECK(std::abs(run.empirical_correlator - want) <=
                  5.0 * run.std_error);
        }
    }

    // estimate_chsh: quantum value at full statistics, bookkeeping fields
    {
        ExperimentConfig cfg = base_config();
        cfg.trials = 200000;
        cfg.seed = 7;
        const RunRecord rec = estimate_chsh(cfg, 0.0);
        CHECK(!rec.zero_coincidences);
        CHECK(rec.coincidences == cfg.trials);
        CHECK(std::abs(rec.empirical_chsh - 2.0 * sqrt2) <=
              5.0 * rec.std_error);
        CHECK_NEAR(rec.p_joint, 1.0, 0.0);
        CHECK_NEAR(rec.damped_chsh, 2.0 * sqrt2, 1e-12);
        CHECK_REL(rec.std_error, std::sqrt(2.0 / 200000.0), 0.05);

        // std_error is the quadrature sum of the four runs
        double quad = 0.0;
        std::uint64_t min_c = cfg.trials;
        const auto& s = cfg.setting;
        const SpinDirection* dirs[4][2] = {{&s.a1, &s.b1},
                                           {&s.a1, &s.b2},
                                           {&s.a2, &s.b1},
                                           {&s.a2, &s.b2}};
        for (unsigned i = 0; i < 4; ++i) {
            const CorrelatorSample run =
                sample_run(cfg, 0.0, *dirs[i][0], *dirs[i][1], i);
            quad += run.std_error * run.std_error;
            min_c = std::min(min_c, run.coincidences);
        }
        CHECK_NEAR(rec.std_error, std::sqrt(quad), 1e-15);
        CHECK(rec.coincidences == min_c);

        // starvation propagates the flag
        ExperimentConfig starved = cfg;
        starved.trials = 20;
        starved.strategy = DetectorStrategy::make_static(10.0);
        const RunRecord none = estimate_chsh(starved, 0.0);
        CHECK(none.zero_coincidences);
        CHECK(none.empirical_chsh == 0.0);
    }

    // LHV streams: deterministic extremal hits exactly 2, random mixtures
    // stay inside the classical bound
    {
        ExperimentConfig cfg = base_config();
        cfg.trials = 50000;
        cfg.seed = 21;
        const spin_chsh::LhvModel extremal({1.0}, {{1, 1, 1, -1}});
        const RunRecord rec = estimate_chsh_lhv(extremal, cfg, 0.0);
        CHECK(rec.empirical_chsh == 2.0);
        CHECK(rec.std_error == 0.0);

        const rng::CounterRng model_rng(4242);
        for (std::uint64_t i = 0; i < 20; ++i) {
            const auto model = random_lhv_model(model_rng, i, 1 + i % 5);
            const RunRecord r = estimate_chsh_lhv(model, cfg, 0.0);
            CHECK(std::abs(r.empirical_chsh) <= 2.0 + 5.0 * r.std_error);
        }

        // determinism across thread counts holds here too
        const auto model = random_lhv_model(model_rng, 3, 4);
        const RunRecord r1 = estimate_chsh_lhv(model, cfg, 0.0, 1);
        const RunRecord r5 = estimate_chsh_lhv(model, cfg, 0.0, 5);
        CHECK(r1.empirical_chsh == r5.empirical_chsh &&
              r1.coincidences == r5.coincidences);
    }

    // trials_for_significance: baseline, inverse-p scaling, t^2 growth,
    // infinite flags, and a Monte Carlo check of the variance model
    {
        ExperimentConfig cfg = base_config();
        const double n0 = trials_for_significance(cfg, 0.0, 5.0);
        CHECK_REL(n0, 72.85533905932733, 1e-12);
        // closed reference: 2 k^2 / (2 sqrt2 - 2)^2
        CHECK_REL(n0, 2.0 * 25.0 / std::pow(2.0 * sqrt2 - 2.0, 2), 1e-12);

        ExperimentConfig damped = base_config();
        damped.strategy =
            DetectorStrategy::make_static(std::sqrt(std::log(100.0)));
        CHECK_REL(trials_for_significance(damped, 0.0, 5.0), 100.0 * n0,
                  1e-10);

        ExperimentConfig adaptive = base_config();
        adaptive.p0 = 1.0;
        adaptive.strategy = DetectorStrategy::make_adaptive();
        const double ratio = trials_for_significance(adaptive, 1000.0, 5.0) /
                             trials_for_significance(adaptive, 100.0, 5.0);
        CHECK(ratio > 90.0 && ratio < 110.0);

        // dead detector: infinite requirement, flagged not thrown
        ExperimentConfig dead = base_config();
        dead.strategy = DetectorStrategy::make_static(1e6);
        CHECK(std::isinf(trials_for_significance(dead, 0.0, 5.0)));

        // non-violating setting: the k-sigma excess never happens
        ExperimentConfig flat = base_config();
        flat.setting = spin_chsh::ChshSetting{z, x, z, z};
        CHECK(std::isinf(trials_for_significance(flat, 0.0, 5.0)));

        // replicate spread of S matches the k-sigma design point
        ExperimentConfig probe = base_config();
        probe.trials = 5000;
        double sum = 0.0, sum2 = 0.0;
        const int reps = 200;
        for (int rep = 0; rep < reps; ++rep) {
            probe.seed = 1000 + static_cast<std::uint64_t>(rep);
            const RunRecord rec = estimate_chsh(probe, 0.0);
            sum += rec.empirical_chsh;
            sum2 += rec.empirical_chsh * rec.empirical_chsh;
        }
        const double mean = sum / reps;
        const double var = sum2 / reps - mean * mean;
        // predicted Var(S) = 2 / coincidences
        CHECK_REL(var, 2.0 / 5000.0, 0.35);
        CHECK_NEAR(mean, 2.0 * sqrt2, 5.0 * std::sqrt(2.0 / 5000.0 / reps));
    }

    // thread cap resolution from the environment
    {
        unsetenv("CLUSTERBELL_THREADS");
        CHECK(resolve_thread_cap() >= 1);
        setenv("CLUSTERBELL_THREADS", "3", 1);
        CHECK(resolve_thread_cap() == 3);
        setenv("CLUSTERBELL_THREADS", "0", 1);
        CHECK_THROWS(resolve_thread_cap(), std::invalid_argument);
        setenv("CLUSTERBELL_THREADS", "lots", 1);
        CHECK_THROWS(resolve_thread_cap(), std::invalid_argument);
        unsetenv("CLUSTERBELL_THREADS");
    }

    return test_summary("test_experiment");
}
