#include "fc/collapse.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fc {

const char* transition_token(GateTransition t) {
    switch (kind(t)) {
    case Transition::ActiveActive: return "active_active";
    case Transition::ActiveDead:   return "active_dead";
    case Transition::DeadDead:     return "dead_dead";
    case Transition::DeadActive:   return "dead_active";
    }
    return "?";
}

GateTransition classify_gate(double s_before, double s_after) {
    const auto gate = [](double s) {
        return s > 0.0 ? GateState::Active : GateState::Dead;
    };
    return {gate(s_before), gate(s_after)};
}

double CollapsedState::pre_activation1(const Sample& sample) const {
    const double dw1 = 0.5 * (d_sum1 + d_dif1);
    const double dw2 = 0.5 * (d_sum1 - d_dif1);
    return (w1c * sample.x1 + w2c * sample.x2) + (dw1 * sample.x1 + dw2 * sample.x2);
}

double CollapsedState::pre_activation2(const Sample& sample) const {
    const double dw3 = 0.5 * (d_sum2 + d_dif2);
    const double dw4 = 0.5 * (d_sum2 - d_dif2);
    return (w3c * sample.x1 + w4c * sample.x2) + (dw3 * sample.x1 + dw4 * sample.x2);
}

CollapsedState init_collapsed(const NetParams& params, const Sample& reference,
                              double eta, StateReference state_ref) {
    if (!(eta >= 0.0)) throw std::invalid_argument("init_collapsed: eta must be >= 0");
    CollapsedState st;
    st.w1c = params.w1;
    st.w2c = params.w2;
    st.w3c = params.w3;
    st.w4c = params.w4;
    st.s1c = params.w1 * reference.x1 + params.w2 * reference.x2;
    st.s2c = params.w3 * reference.x1 + params.w4 * reference.x2;
    st.v1c = relu(st.s1c);
    st.v2c = relu(st.s2c);
    st.reference = reference;
    st.w5 = st.w5_init = params.w5;
    st.w6 = st.w6_init = params.w6;
    st.eta = eta;
    st.state_ref = state_ref;
    if (state_ref == StateReference::Raw) {
        st.raw_s1 = st.s1c;
        st.raw_S1 = params.w1 * reference.x1 - params.w2 * reference.x2;
        st.raw_s2 = st.s2c;
        st.raw_S2 = params.w3 * reference.x1 - params.w4 * reference.x2;
    }
    const GateState g1 = st.s1c > 0.0 ? GateState::Active : GateState::Dead;
    const GateState g2 = st.s2c > 0.0 ? GateState::Active : GateState::Dead;
    st.last_t1 = {g1, g1};
    st.last_t2 = {g2, g2};
    st.prev_post_s1 = st.s1c;
    st.prev_post_s2 = st.s2c;
    return st;
}

CompStep comp_step(const CollapsedState& state, const Sample& sample, double dE_dY) {
    const double nx = sample.x1 * sample.x1 + sample.x2 * sample.x2;
    const double s1 = state.pre_activation1(sample);
    const double s2 = state.pre_activation2(sample);
    const double v1 = relu(s1);
    const double v2 = relu(s2);
    const double w5p = state.w5 - state.eta * dE_dY * v1;
    const double w6p = state.w6 - state.eta * dE_dY * v2;
    const double s1a = s1 > 0.0 ? s1 - state.eta * dE_dY * w5p * nx : s1;
    const double s2a = s2 > 0.0 ? s2 - state.eta * dE_dY * w6p * nx : s2;

    const auto branch = [&](GateTransition t, double w_post, double vc) {
        switch (kind(t)) {
        case Transition::ActiveActive:
            if (vc == 0.0)
                throw DegenerateConstant("comp_step: zero reference activation");
            return -(state.eta * dE_dY) * w_post * w_post * nx / vc;
        case Transition::ActiveDead:
            return -w_post;
        case Transition::DeadDead:
            return 0.0;
        case Transition::DeadActive:
            throw UnsupportedBranch("comp_step: dead->active transition has no compensation formula");
        }
        return 0.0;
    };

    CompStep out;
    out.gate1 = classify_gate(s1, s1a);
    out.gate2 = classify_gate(s2, s2a);
    out.p_step = branch(out.gate1, w5p, state.v1c);
    out.q_step = branch(out.gate2, w6p, state.v2c);
    return out;
}

namespace {

double accumulated_compensation(double w_post, double vc, double eta, double dE_dY,
                                double nx, GateTransition gate, const char* who) {
    switch (kind(gate)) {
    case Transition::ActiveActive:
        if (vc == 0.0) throw DegenerateConstant(std::string(who) + ": zero reference activation");
        return w_post * w_post * w_post * nx / (3.0 * vc * vc);
    case Transition::ActiveDead:
        if (vc == 0.0) throw DegenerateConstant(std::string(who) + ": zero reference activation");
        if (dE_dY == 0.0)
            throw ZeroErrorSingularity(std::string(who) + ": active->dead form divides by dE/dY");
        return w_post * w_post / (2.0 * eta * dE_dY * vc);
    case Transition::DeadDead:
        return 0.0;
    case Transition::DeadActive:
        throw UnsupportedBranch(std::string(who) + ": dead->active transition has no closed form");
    }
    return 0.0;
}

} // namespace

double accumulate_P(const CollapsedState& state, const Sample& sample,
                    double dE_dY, GateTransition gate) {
    const double nx = sample.x1 * sample.x1 + sample.x2 * sample.x2;
    const double v1 = relu(state.pre_activation1(sample));
    const double w5p = state.w5 - state.eta * dE_dY * v1;
    return accumulated_compensation(w5p, state.v1c, state.eta, dE_dY, nx, gate, "accumulate_P");
}

double accumulate_Q(const CollapsedState& state, const Sample& sample,
                    double dE_dY, GateTransition gate) {
    const double nx = sample.x1 * sample.x1 + sample.x2 * sample.x2;
    const double v2 = relu(state.pre_activation2(sample));
    const double w6p = state.w6 - state.eta * dE_dY * v2;
    return accumulated_compensation(w6p, state.v2c, state.eta, dE_dY, nx, gate, "accumulate_Q");
}

REffective r_update(CollapsedState& state, const Sample& sample, double dE_dY,
                    long n, RDenominatorReading reading) {
    if (n < 0) throw std::invalid_argument("r_update: n must be >= 0");
    REffective r;
    if (n == 0) {
        r.r5 = state.w5;
        r.r6 = state.w6;
        return r;
    }
    const double x1 = sample.x1, x2 = sample.x2;
    const double nx = x1 * x1 + x2 * x2;
    const double pow_term = reading == RDenominatorReading::Squared ? nx * nx : nx;

    const auto node = [&](double wc_a, double wc_b, double w, double vc, double sum_in,
                          double& sum_out, Transition& branch) {
        const double a_prev = (wc_a + sum_in * x1) * x1 + (wc_b + sum_in * x2) * x2;
        const double sum = sum_in + dE_dY * w;
        const double a_cur = (wc_a + sum * x1) * x1 + (wc_b + sum * x2) * x2;
        sum_out = sum;
        if (a_prev > 0.0 && a_cur > 0.0) {
            branch = Transition::ActiveActive;
            const double denom = 3.0 * (vc + sum * pow_term);
            if (denom == 0.0)
                throw UnsupportedBranch("r_update: vanishing active-active denominator");
            return w + w * w * w * nx / denom;
        }
        if (a_prev > 0.0 && a_cur <= 0.0) {
            branch = Transition::ActiveDead;
            const double denom = 2.0 * state.eta * dE_dY * (vc + sum * nx);
            if (denom == 0.0)
                throw UnsupportedBranch("r_update: vanishing active-dead denominator");
            return w + w * w / denom;
        }
        if (a_prev <= 0.0 && a_cur <= 0.0) {
            branch = Transition::DeadDead;
            return w;
        }
        throw UnsupportedBranch("r_update: dead->active sign pattern has no update equation");
    };

    double sumA_next = state.sumA;
    double sumB_next = state.sumB;
    r.r5 = node(state.w1c, state.w2c, state.w5, state.v1c, state.sumA, sumA_next, r.branch5);
    r.r6 = node(state.w3c, state.w4c, state.w6, state.v2c, state.sumB, sumB_next, r.branch6);
    state.sumA = sumA_next;
    state.sumB = sumB_next;
    return r;
}

std::pair<double, double> comp_cross_input(const CollapsedState& state,
                                           const Sample& prev, const Sample& next,
                                           double dE_dY) {
    const double ip = prev.x1 * next.x1 + prev.x2 * next.x2;
    const double v1_next = relu(state.pre_activation1(next));
    const double v2_next = relu(state.pre_activation2(next));
    if (v1_next == 0.0 || v2_next == 0.0)
        throw DegenerateConstant("comp_cross_input: zero activation at the next input");
    const double p_new = state.p - state.eta * dE_dY * state.w5 * state.w5 * ip / v1_next;
    const double q_new = state.q - state.eta * dE_dY * state.w6 * state.w6 * ip / v2_next;
    return {p_new, q_new};
}

namespace {

void require_constants(const CollapsedState& st, const char* who) {
    if (st.v1c == 0.0 || st.v2c == 0.0)
        throw DegenerateConstant(std::string(who) + ": a frozen reference activation is zero");
}

} // namespace

FcOutput fc_forward(const CollapsedState& state, const Sample& sample, FcVariant variant) {
    FcOutput out;
    out.gate1 = state.last_t1;
    out.gate2 = state.last_t2;

    double s1, s2;
    if (state.state_ref == StateReference::Raw) {
        s1 = state.raw_s1;
        s2 = state.raw_s2;
    } else {
        s1 = state.pre_activation1(sample);
        s2 = state.pre_activation2(sample);
    }
    const double v1 = relu(s1);
    const double v2 = relu(s2);

    switch (variant) {
    case FcVariant::State:
        out.r5 = state.w5;
        out.r6 = state.w6;
        out.y_fc = state.w5 * v1 + state.w6 * v2;
        break;
    case FcVariant::Weights: {
        require_constants(state, "fc_forward");
        const double p = (v1 - state.v1c) * state.w5 / state.v1c;
        const double q = (v2 - state.v2c) * state.w6 / state.v2c;
        out.r5 = state.w5 + p;
        out.r6 = state.w6 + q;
        out.y_fc = state.v1c * out.r5 + state.v2c * out.r6;
        break;
    }
    case FcVariant::Comp: {
        require_constants(state, "fc_forward");
        const double p = (v1 * state.w5 - state.v1c * state.w5_init) / state.v1c;
        const double q = (v2 * state.w6 - state.v2c * state.w6_init) / state.v2c;
        out.r5 = state.w5_init + p;
        out.r6 = state.w6_init + q;
        out.y_fc = state.v1c * out.r5 + state.v2c * out.r6;
        break;
    }
    }
    return out;
}

FcStepResult fc_step(CollapsedState& state, const Sample& sample, double dE_dY,
                     FcVariant variant, const Sample* next_sample) {
    const double x1 = sample.x1, x2 = sample.x2;
    const double eta = state.eta;

    double s1_pre, s2_pre;
    if (state.state_ref == StateReference::Raw) {
        s1_pre = state.raw_s1;
        s2_pre = state.raw_s2;
    } else {
        s1_pre = state.pre_activation1(sample);
        s2_pre = state.pre_activation2(sample);
    }
    const double v1 = relu(s1_pre);
    const double v2 = relu(s2_pre);

    const double w5p = state.w5 - eta * dE_dY * v1;
    const double w6p = state.w6 - eta * dE_dY * v2;

    double s1_post, s2_post;
    if (state.state_ref == StateReference::Raw) {
        // update at the current input, then re-express at the upcoming one
        const double nx = x1 * x1 + x2 * x2;
        const double dx = x1 * x1 - x2 * x2;
        double s1p = s1_pre, S1p = state.raw_S1;
        double s2p = s2_pre, S2p = state.raw_S2;
        if (s1_pre > 0.0) {
            s1p = s1_pre - eta * dE_dY * w5p * nx;
            S1p = state.raw_S1 - eta * dE_dY * w5p * dx;
        }
        if (s2_pre > 0.0) {
            s2p = s2_pre - eta * dE_dY * w6p * nx;
            S2p = state.raw_S2 - eta * dE_dY * w6p * dx;
        }
        s1_post = s1p;
        s2_post = s2p;
        const Sample& nxt = next_sample != nullptr ? *next_sample : sample;
        state.raw_s1 = 0.5 * (s1p + S1p) * nxt.x1 + 0.5 * (s1p - S1p) * nxt.x2;
        state.raw_S1 = 0.5 * (s1p + S1p) * nxt.x1 - 0.5 * (s1p - S1p) * nxt.x2;
        state.raw_s2 = 0.5 * (s2p + S2p) * nxt.x1 + 0.5 * (s2p - S2p) * nxt.x2;
        state.raw_S2 = 0.5 * (s2p + S2p) * nxt.x1 - 0.5 * (s2p - S2p) * nxt.x2;
    } else {
        if (s1_pre > 0.0) {
            state.d_sum1 -= eta * dE_dY * w5p * (x1 + x2);
            state.d_dif1 -= eta * dE_dY * w5p * (x1 - x2);
        }
        if (s2_pre > 0.0) {
            state.d_sum2 -= eta * dE_dY * w6p * (x1 + x2);
            state.d_dif2 -= eta * dE_dY * w6p * (x1 - x2);
        }
        s1_post = state.pre_activation1(sample);
        s2_post = state.pre_activation2(sample);
    }

    FcStepResult result;
    result.gate1 = classify_gate(s1_pre, s1_post);
    result.gate2 = classify_gate(s2_pre, s2_post);

    if (variant != FcVariant::State && state.stepped) {
        // a node that ended the previous step dead and arrives active at this
        // input is the cross-input case the compensation formulas do not cover
        if (state.prev_post_s1 <= 0.0 && s1_pre > 0.0) result.unsupported = true;
        if (state.prev_post_s2 <= 0.0 && s2_pre > 0.0) result.unsupported = true;
    }

    if (variant != FcVariant::State) {
        require_constants(state, "fc_step");
        const double P_now = accumulate_P(state, sample, dE_dY, result.gate1);
        const double Q_now = accumulate_Q(state, sample, dE_dY, result.gate2);
        if (variant == FcVariant::Weights) {
            state.P_acc = P_now;
            state.Q_acc = Q_now;
        } else {
            state.P_acc += P_now;
            state.Q_acc += Q_now;
        }
    }

    state.w5 = w5p;
    state.w6 = w6p;

    const double v1_post = relu(s1_post);
    const double v2_post = relu(s2_post);
    switch (variant) {
    case FcVariant::Weights:
        state.p = (v1_post - state.v1c) * state.w5 / state.v1c;
        state.q = (v2_post - state.v2c) * state.w6 / state.v2c;
        break;
    case FcVariant::Comp:
        state.p = (v1_post * state.w5 - state.v1c * state.w5_init) / state.v1c;
        state.q = (v2_post * state.w6 - state.v2c * state.w6_init) / state.v2c;
        break;
    case FcVariant::State:
        break;
    }

    state.prev_post_s1 = s1_post;
    state.prev_post_s2 = s2_post;
    state.stepped = true;
    state.last_t1 = result.gate1;
    state.last_t2 = result.gate2;
    return result;
}

CollapsedState state_step(const CollapsedState& state, const Sample& sample, double dE_dY) {
    CollapsedState next = state;
    fc_step(next, sample, dE_dY, FcVariant::State);
    return next;
}

CollapsedInference make_inference(const CollapsedState& state, FcVariant variant) {
    CollapsedInference inf;
    inf.v1c = state.v1c;
    inf.v2c = state.v2c;
    if (variant == FcVariant::State) {
        require_constants(state, "make_inference");
        const double v1 = relu(state.pre_activation1(state.reference));
        const double v2 = relu(state.pre_activation2(state.reference));
        inf.r5 = state.w5 * v1 / state.v1c;
        inf.r6 = state.w6 * v2 / state.v2c;
    } else {
        const FcOutput out = fc_forward(state, state.reference, variant);
        inf.r5 = out.r5;
        inf.r6 = out.r6;
    }
    return inf;
}

} // namespace fc
