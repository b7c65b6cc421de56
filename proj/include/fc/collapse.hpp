#pragma once

#include <utility>

#include "fc/errors.hpp"
#include "fc/model.hpp"

namespace fc {

enum class GateState : unsigned char { Active, Dead };

// Activity of one hidden node's ReLU before and after a single update.
struct GateTransition {
    GateState before = GateState::Active;
    GateState after = GateState::Active;

    friend bool operator==(const GateTransition&, const GateTransition&) = default;
};

enum class Transition : int { ActiveActive = 0, ActiveDead = 1, DeadDead = 2, DeadActive = 3 };

inline Transition kind(GateTransition t) {
    if (t.before == GateState::Active)
        return t.after == GateState::Active ? Transition::ActiveActive : Transition::ActiveDead;
    return t.after == GateState::Active ? Transition::DeadActive : Transition::DeadDead;
}

const char* transition_token(GateTransition t);

// Active means strictly positive pre-activation; s = 0 counts as dead.
GateTransition classify_gate(double s_before, double s_after);

enum class FcVariant { Weights, Comp, State };

// How the propagated first-layer state is stored. UnitReference keeps the
// sum/difference projections relative to input (1,1), which makes the
// recombination an exact identity. RawReference stores them at the most
// recent input, as the update equations literally read; it is kept only as
// an experimental mode because it provably drifts on sign-mixed inputs.
enum class StateReference { Unit, Raw };

// Collapsed-network state: frozen first-layer constants plus the scalars the
// collapsed update rules need. The first layer itself is never updated; its
// accumulated influence lives in the drift projections and in the
// compensations p, q.
struct CollapsedState {
    // frozen at initialization
    double w1c = 0.0, w2c = 0.0, w3c = 0.0, w4c = 0.0;
    double s1c = 0.0, s2c = 0.0; // reference pre-activations
    double v1c = 0.0, v2c = 0.0; // frozen reference activations
    Sample reference;

    // trainable last-layer weights and their initial values
    double w5 = 0.0, w6 = 0.0;
    double w5_init = 0.0, w6_init = 0.0;

    // drift of the first-layer sum/difference projections relative to the
    // frozen constants; zero at initialization (unit-reference storage)
    double d_sum1 = 0.0, d_dif1 = 0.0;
    double d_sum2 = 0.0, d_dif2 = 0.0;

    // raw-reference storage (experimental mode only)
    double raw_s1 = 0.0, raw_S1 = 0.0;
    double raw_s2 = 0.0, raw_S2 = 0.0;

    // current compensation weights and their accumulated closed forms
    double p = 0.0, q = 0.0;
    double P_acc = 0.0, Q_acc = 0.0;

    // running sums for the branch conditions A_n, B_n and the effective
    // weight denominators: sum of dE/dY * w5 (resp. w6) per iteration
    double sumA = 0.0, sumB = 0.0;

    double eta = 0.0;
    StateReference state_ref = StateReference::Unit;

    // pre-activation at the end of the previous step, for cross-input gate
    // bookkeeping
    double prev_post_s1 = 0.0, prev_post_s2 = 0.0;
    bool stepped = false;

    // transitions of the most recent step
    GateTransition last_t1, last_t2;

    // propagated unit-reference states: s = w1+w2, S = w1-w2 (and the node-2
    // analogues), reconstructed from the frozen part plus the drift
    double unit_s1() const { return (w1c + w2c) + d_sum1; }
    double unit_S1() const { return (w1c - w2c) + d_dif1; }
    double unit_s2() const { return (w3c + w4c) + d_sum2; }
    double unit_S2() const { return (w3c - w4c) + d_dif2; }

    // hidden pre-activations at an arbitrary input, recombined from the
    // frozen first layer and the tracked drift
    double pre_activation1(const Sample& sample) const;
    double pre_activation2(const Sample& sample) const;

    // effective last-layer weights under the variant's split
    double r5() const { return w5 + p; }
    double r6() const { return w6 + q; }
};

CollapsedState init_collapsed(const NetParams& params, const Sample& reference,
                              double eta,
                              StateReference state_ref = StateReference::Unit);

struct CompStep {
    double p_step = 0.0, q_step = 0.0;
    GateTransition gate1, gate2;
};

// Single-update compensation from the reference state: updates w5, w6 from
// the frozen activations, classifies each node's gate transition, and
// returns the branch value
//   active->active: -eta * dE/dY * w5'^2 * (x1^2 + x2^2) / v1c
//   active->dead:   -w5'   (the node's contribution is annihilated)
//   dead->dead:     0
// Throws DegenerateConstant when a dividing reference activation is zero and
// UnsupportedBranch for dead->active.
CompStep comp_step(const CollapsedState& state, const Sample& sample, double dE_dY);

// Closed-form accumulated compensation for node 1 (P) / node 2 (Q):
//   active->active: w5'^3 (x1^2 + x2^2) / (3 v1c^2)
//   active->dead:   w5'^2 / (2 eta dE/dY v1c)
//   dead->dead:     0
double accumulate_P(const CollapsedState& state, const Sample& sample,
                    double dE_dY, GateTransition gate);
double accumulate_Q(const CollapsedState& state, const Sample& sample,
                    double dE_dY, GateTransition gate);

// The two printed readings of the effective-weight denominator sum disagree
// on the power of (x1^2 + x2^2) in the active->active branch; both are
// implemented and the harness records which one tracks the oracle better.
enum class RDenominatorReading { Squared, Linear };

struct REffective {
    double r5 = 0.0, r6 = 0.0;
    Transition branch5 = Transition::ActiveActive;
    Transition branch6 = Transition::ActiveActive;
};

// Effective last-layer weights after n iterations per the closed-form branch
// equations, keyed on the sign pattern of (A_{n-1}, A_n). Accrues this
// iteration's dE/dY * w5 (resp. w6) into the running sums. n = 0 returns the
// bare weights. Throws UnsupportedBranch on a dead->active sign pattern or a
// vanishing denominator.
REffective r_update(CollapsedState& state, const Sample& sample, double dE_dY,
                    long n, RDenominatorReading reading);

// Cross-input compensation update, literally as printed:
//   p@ = p - eta * dE/dY * w5'^2 (x1 x1@ + x2 x2@) / v1'@
// where v1'@ is the post-update activation at the next input (the state is
// expected to be post-update). Throws DegenerateConstant when that
// activation is zero.
std::pair<double, double> comp_cross_input(const CollapsedState& state,
                                           const Sample& prev, const Sample& next,
                                           double dE_dY);

struct FcOutput {
    double y_fc = 0.0;
    double r5 = 0.0, r6 = 0.0;
    GateTransition gate1, gate2;
};

// Collapsed-network forward pass.
//   Weights: y = v1c (w5 + p) + v2c (w6 + q), w5/w6 trained, p/q the drift
//            compensation for the current input
//   Comp:    same formula with w5/w6 frozen at their initial values and p/q
//            carrying the whole update
//   State:   y = w5 ReLU(s1) + w6 ReLU(s2) over the propagated states
// gate1/gate2 report the most recent step's transitions.
FcOutput fc_forward(const CollapsedState& state, const Sample& sample, FcVariant variant);

struct FcStepResult {
    GateTransition gate1, gate2;
    // set when the step entered the cross-input dead->active regime the
    // compensation formulas do not cover (Weights/Comp variants only)
    bool unsupported = false;
};

// Advances the collapsed state one iteration with the given error derivative
// (normally the collapsed network's own y_fc - y_g). next_sample is needed
// only by the raw-reference experimental mode, which re-expresses its stored
// states at the upcoming input.
FcStepResult fc_step(CollapsedState& state, const Sample& sample, double dE_dY,
                     FcVariant variant, const Sample* next_sample = nullptr);

// Functional form of the state-variant advance.
CollapsedState state_step(const CollapsedState& state, const Sample& sample,
                          double dE_dY);

// The scalars a collapsed network needs at inference time: two frozen
// activations and two effective weights -- four against the full network's
// six.
struct CollapsedInference {
    double v1c = 0.0, v2c = 0.0;
    double r5 = 0.0, r6 = 0.0;

    static constexpr int scalar_count = 4;

    double predict() const { return v1c * r5 + v2c * r6; }
};

CollapsedInference make_inference(const CollapsedState& state, FcVariant variant);

} // namespace fc
