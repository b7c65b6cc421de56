#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "fc/errors.hpp"

namespace fc {

inline double relu(double s) { return s > 0.0 ? s : 0.0; }

// The six scalar weights of the 2-2-1 network. w1..w4 feed the two hidden
// nodes, w5/w6 connect them to the output.
struct NetParams {
    double w1 = 0.0, w2 = 0.0, w3 = 0.0, w4 = 0.0;
    double w5 = 0.0, w6 = 0.0;

    static constexpr int weight_count = 6;

    bool all_finite() const;
    friend bool operator==(const NetParams&, const NetParams&) = default;
};

enum class Encoding { PlusMinusOne, ZeroOne, Free };

struct Sample {
    double x1 = 0.0, x2 = 0.0;
    double y_g = 0.0; // gold label

    friend bool operator==(const Sample&, const Sample&) = default;
};

// Everything the forward pass produces for one sample.
struct ForwardTrace {
    double s1 = 0.0, s2 = 0.0; // hidden pre-activations
    double v1 = 0.0, v2 = 0.0; // post-ReLU activations
    double y = 0.0;            // network output
    double dE_dY = 0.0;        // y - y_g for the squared loss
};

enum class ScheduleMode { SingleRepeated, Cyclic };

struct Schedule {
    std::vector<Sample> samples;
    ScheduleMode mode = ScheduleMode::SingleRepeated;
    Encoding encoding = Encoding::PlusMinusOne;

    const Sample& at(long iter) const;
};

ForwardTrace forward(const NetParams& params, const Sample& sample);

// One training step in the order the update rule prescribes: output-layer
// weights first, then the gated first-layer updates built from the
// already-updated w5, w6. A hidden node's incoming weights move only while
// its pre-activation is strictly positive.
std::pair<NetParams, ForwardTrace> bp_step(const NetParams& params,
                                           const Sample& sample, double eta);

// Textbook simultaneous update (first layer sees the pre-update w5, w6).
// Kept for side-by-side documentation runs only; the harness never uses it.
std::pair<NetParams, ForwardTrace> bp_step_simultaneous(const NetParams& params,
                                                        const Sample& sample,
                                                        double eta);

// Iterates bp_step over the schedule. Deterministic for fixed inputs.
std::vector<std::pair<NetParams, ForwardTrace>> run_bp(const NetParams& params,
                                                       const Schedule& schedule,
                                                       double eta, long iters);

// Deterministic seeded generator. The uniform mapping is spelled out here so
// results do not depend on the standard library's distribution internals.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // [0, 1)
    double unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
    // [-1, 1)
    double symmetric() { return 2.0 * unit() - 1.0; }
    std::uint64_t raw() { return gen_(); }

private:
    std::mt19937_64 gen_;
};

NetParams random_params(Rng& rng);

// Resamples until both hidden nodes are alive on the reference sample, so the
// compensation divisions are well defined. Throws DegenerateInit when the
// attempt budget runs out.
NetParams nondegenerate_params(Rng& rng, const Sample& reference,
                               int max_attempts = 10000);

// The (1,1) corner of the XOR set under the given encoding, repeated forever.
Schedule single_repeated_schedule(Encoding encoding);

// All four XOR corners, cycled. (1,1) comes first so the reference input
// keeps both hidden nodes alive under either encoding.
Schedule xor_schedule(Encoding encoding);

// n samples with inputs and labels uniform in [-1,1], cycled once each.
Schedule random_schedule(std::uint64_t seed, long n);

} // namespace fc
