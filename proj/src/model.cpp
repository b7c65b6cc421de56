#include "fc/model.hpp"

#include <cmath>
#include <stdexcept>

namespace fc {

bool NetParams::all_finite() const {
    return std::isfinite(w1) && std::isfinite(w2) && std::isfinite(w3) &&
           std::isfinite(w4) && std::isfinite(w5) && std::isfinite(w6);
}

const Sample& Schedule::at(long iter) const {
    if (samples.empty()) throw std::invalid_argument("Schedule: empty sample list");
    if (mode == ScheduleMode::SingleRepeated) return samples.front();
    return samples[static_cast<std::size_t>(iter) % samples.size()];
}

ForwardTrace forward(const NetParams& params, const Sample& sample) {
    ForwardTrace t;
    t.s1 = params.w1 * sample.x1 + params.w2 * sample.x2;
    t.s2 = params.w3 * sample.x1 + params.w4 * sample.x2;
    t.v1 = relu(t.s1);
    t.v2 = relu(t.s2);
    t.y = params.w5 * t.v1 + params.w6 * t.v2;
    t.dE_dY = t.y - sample.y_g;
    return t;
}

std::pair<NetParams, ForwardTrace> bp_step(const NetParams& params,
                                           const Sample& sample, double eta) {
    if (!(eta > 0.0)) throw std::invalid_argument("bp_step: eta must be > 0");
    const ForwardTrace t = forward(params, sample);
    const double e = t.dE_dY;

    NetParams next = params;
    next.w5 = params.w5 - eta * e * t.v1;
    next.w6 = params.w6 - eta * e * t.v2;
    // First layer consumes the already-updated output weights.
    if (t.s1 > 0.0) {
        next.w1 = params.w1 - eta * e * next.w5 * sample.x1;
        next.w2 = params.w2 - eta * e * next.w5 * sample.x2;
    }
    if (t.s2 > 0.0) {
        next.w3 = params.w3 - eta * e * next.w6 * sample.x1;
        next.w4 = params.w4 - eta * e * next.w6 * sample.x2;
    }
    return {next, t};
}

std::pair<NetParams, ForwardTrace> bp_step_simultaneous(const NetParams& params,
                                                        const Sample& sample,
                                                        double eta) {
    if (!(eta > 0.0)) throw std::invalid_argument("bp_step_simultaneous: eta must be > 0");
    const ForwardTrace t = forward(params, sample);
    const double e = t.dE_dY;

    NetParams next = params;
    next.w5 = params.w5 - eta * e * t.v1;
    next.w6 = params.w6 - eta * e * t.v2;
    if (t.s1 > 0.0) {
        next.w1 = params.w1 - eta * e * params.w5 * sample.x1;
        next.w2 = params.w2 - eta * e * params.w5 * sample.x2;
    }
    if (t.s2 > 0.0) {
        next.w3 = params.w3 - eta * e * params.w6 * sample.x1;
        next.w4 = params.w4 - eta * e * params.w6 * sample.x2;
    }
    return {next, t};
}

std::vector<std::pair<NetParams, ForwardTrace>> run_bp(const NetParams& params,
                                                       const Schedule& schedule,
                                                       double eta, long iters) {
    if (iters < 1) throw std::invalid_argument("run_bp: iters must be >= 1");
    std::vector<std::pair<NetParams, ForwardTrace>> out;
    out.reserve(static_cast<std::size_t>(iters));
    NetParams cur = params;
    for (long n = 0; n < iters; ++n) {
        auto [next, trace] = bp_step(cur, schedule.at(n), eta);
        out.emplace_back(next, trace);
        cur = next;
    }
    return out;
}

NetParams random_params(Rng& rng) {
    NetParams p;
    p.w1 = rng.symmetric();
    p.w2 = rng.symmetric();
    p.w3 = rng.symmetric();
    p.w4 = rng.symmetric();
    p.w5 = rng.symmetric();
    p.w6 = rng.symmetric();
    return p;
}

NetParams nondegenerate_params(Rng& rng, const Sample& reference, int max_attempts) {
    for (int i = 0; i < max_attempts; ++i) {
        NetParams p = random_params(rng);
        const double s1 = p.w1 * reference.x1 + p.w2 * reference.x2;
        const double s2 = p.w3 * reference.x1 + p.w4 * reference.x2;
        if (s1 > 0.0 && s2 > 0.0) return p;
    }
    throw DegenerateInit("nondegenerate_params: resampling budget exhausted; "
                         "reference input keeps killing a hidden node");
}

Schedule single_repeated_schedule(Encoding encoding) {
    Schedule s;
    s.mode = ScheduleMode::SingleRepeated;
    s.encoding = encoding;
    switch (encoding) {
    case Encoding::PlusMinusOne: s.samples = {{1.0, 1.0, -1.0}}; break;
    case Encoding::ZeroOne:      s.samples = {{1.0, 1.0, 0.0}}; break;
    case Encoding::Free:         s.samples = {{1.0, 1.0, -1.0}}; break;
    }
    return s;
}

Schedule xor_schedule(Encoding encoding) {
    Schedule s;
    s.mode = ScheduleMode::Cyclic;
    s.encoding = encoding;
    if (encoding == Encoding::ZeroOne) {
        s.samples = {{1.0, 1.0, 0.0}, {1.0, 0.0, 1.0}, {0.0, 1.0, 1.0}, {0.0, 0.0, 0.0}};
    } else {
        s.samples = {{1.0, 1.0, -1.0}, {1.0, -1.0, 1.0}, {-1.0, 1.0, 1.0}, {-1.0, -1.0, -1.0}};
    }
    return s;
}

Schedule random_schedule(std::uint64_t seed, long n) {
    if (n < 1) throw std::invalid_argument("random_schedule: n must be >= 1");
    Rng rng(seed);
    Schedule s;
    s.mode = ScheduleMode::Cyclic;
    s.encoding = Encoding::Free;
    s.samples.reserve(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) {
        Sample smp;
        smp.x1 = rng.symmetric();
        smp.x2 = rng.symmetric();
        smp.y_g = rng.symmetric();
        s.samples.push_back(smp);
    }
    return s;
}

} // namespace fc
