#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fc/collapse.hpp"
#include "fc/model.hpp"

namespace fc {

enum class ScheduleKind { SingleRepeated, XorCyclic, RandomSamples };

struct RunConfig {
    std::uint64_t seed = 42;
    double eta = 0.05;
    long iters = 200;
    FcVariant variant = FcVariant::Weights;
    ScheduleKind schedule = ScheduleKind::SingleRepeated;
    Encoding encoding = Encoding::PlusMinusOne;
    RDenominatorReading r_reading = RDenominatorReading::Squared;
    double tolerance = 1e-12;
    StateReference state_ref = StateReference::Unit;
};

// Per-iteration record of the lock-step run, plus the identity residuals the
// sweep summarizes.
struct TraceRow {
    long iteration = 0;
    double y_bp = 0.0, y_fc = 0.0, abs_err = 0.0;
    GateTransition gate1, gate2;
    bool unsupported = false;

    // collapsed-side snapshot after the step
    double r5 = 0.0, r6 = 0.0, p = 0.0, q = 0.0, w5 = 0.0, w6 = 0.0;

    // closed-form effective weights under the configured denominator reading;
    // NaN outside single-input compensation runs or past an unsupported
    // closed-form branch
    double r5_closed = 0.0, r6_closed = 0.0;

    // |v1' w5' + v2' w6' - v1c (w5'+p) - v2c (w6'+q)|, oracle left side
    double output_identity_err = 0.0;
    // max over nodes of |dv' w' - vc p|, oracle dv'
    double node_identity_err = 0.0;
    // |(w5'+p) v1c| scaled check on active->dead steps, else 0
    double annihilation_err = 0.0;
    // worst relative recurrence residual of the oracle step itself
    double recurrence_rel_err = 0.0;
};

// counts[t1][t2] indexed by Transition of node 1 / node 2
struct GateHistogram {
    std::array<std::array<long, 4>, 4> counts{};

    long& at(Transition t1, Transition t2) {
        return counts[static_cast<int>(t1)][static_cast<int>(t2)];
    }
    long at(Transition t1, Transition t2) const {
        return counts[static_cast<int>(t1)][static_cast<int>(t2)];
    }
    long total() const;
    void merge(const GateHistogram& other);
};

struct EquivalenceReport {
    std::vector<TraceRow> rows;
    double max_abs_err = 0.0;
    std::optional<long> first_divergence_iter;
    GateHistogram gate_histogram;
    long unsupported_steps = 0;
    RunConfig config;
    int init_attempts = 0;

    // deviation of the closed-form effective weights from the oracle under
    // each denominator reading; tracked on single-input compensation runs
    std::optional<double> r_dev_squared;
    std::optional<double> r_dev_linear;
    std::optional<RDenominatorReading> selected_reading;
};

// Runs the oracle and the selected collapsed variant in lock-step from an
// identical seeded initialization. Deterministic for a fixed config.
EquivalenceReport run_equivalence(const RunConfig& config);

// The canonical XOR-task run: seed 42, eta 0.05, 200 iterations, +/-1
// encoding. The weight- and compensation-update variants run the task's
// single-input regime; the state variant cycles all four corners.
EquivalenceReport xor_experiment(FcVariant variant);

RunConfig canonical_config(FcVariant variant);

struct InvariantStats {
    long checked = 0;
    long violations = 0;
    double worst = 0.0;

    void absorb(double err, double tol);
    void merge(const InvariantStats& other);
};

struct SweepRunResult {
    std::uint64_t seed = 0;
    double eta = 0.0;
    double max_abs_err = 0.0;
    long unsupported_steps = 0;
    double output_identity_worst = 0.0;
    double node_identity_worst = 0.0;
    double annihilation_worst = 0.0;
    double recurrence_worst = 0.0;
    std::string error; // non-empty when the run aborted
};

struct SweepSummary {
    std::vector<SweepRunResult> runs;
    InvariantStats output_identity; // |oracle output - collapsed output| <= 1e-12
    InvariantStats node_identity;   // per-node |dv' w' - vc p| <= 1e-13
    InvariantStats annihilation;    // scaled residual <= 1e-14 on active->dead
    InvariantStats recurrence;      // relative residual <= 1e-14
    GateHistogram gates;
    long unsupported_steps = 0;
    double max_abs_err = 0.0;
};

inline constexpr double kOutputIdentityTolerance = 1e-12;
inline constexpr double kNodeIdentityTolerance = 1e-13;
inline constexpr double kAnnihilationTolerance = 1e-14;
inline constexpr double kRecurrenceTolerance = 1e-14;

enum class Execution { Serial, Parallel };

// Runs `n_seeds` lock-step runs with seeds base.seed, base.seed+1, ... and a
// per-run learning rate drawn log-uniformly from [1e-3, 1e-1]. Identity
// residuals on steps flagged unsupported are counted separately, not checked.
// Execution::Parallel distributes runs across OpenMP threads; the merged
// summary is identical to the serial one.
SweepSummary property_sweep(long n_seeds, const RunConfig& base,
                            Execution exec = Execution::Serial);

} // namespace fc
