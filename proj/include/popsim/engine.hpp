#pragma once

#include <concepts>
#include <cstdint>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "popsim/protocol.hpp"

namespace popsim {

template <typename P>
concept PairwiseProtocol = requires(const P& p, StateValue x) {
    { p.name() } -> std::convertible_to<std::string_view>;
    { p.initial_state() } -> std::same_as<StateValue>;
    { p.min_population() } -> std::convertible_to<std::size_t>;
    { p.transition(x, x) } -> std::same_as<StatePair>;
};

/// Raised when a run reaches a configuration with no contender left.
class InvariantViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Uniform random scheduler over ordered pairs of distinct agents.
///
/// Uses std::mt19937_64 (fully specified by the standard, so sequences are
/// identical across platforms) and Lemire's multiply-shift rejection for
/// unbiased bounded integers. Equal index pairs are rejected and redrawn.
class Scheduler {
public:
    explicit Scheduler(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const noexcept { return seed_; }

    /// Uniform integer in [0, bound). bound must be positive.
    std::uint64_t uniform_below(std::uint64_t bound);

    struct Pair {
        std::size_t initiator;
        std::size_t responder;
    };

    /// Uniform over the n(n-1) ordered pairs of distinct agents (0-based).
    Pair sample_pair(std::size_t n) {
        for (;;) {
            const auto i = static_cast<std::size_t>(uniform_below(n));
            const auto j = static_cast<std::size_t>(uniform_below(n));
            if (i != j) return {i, j};
        }
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

/// One applied interaction, reported for tracing and tests.
struct Interaction {
    std::size_t initiator;
    std::size_t responder;
    StateValue x, y;
    StateValue x_new, y_new;
};

/// Agent-indexed configuration with cached contender count and the largest
/// magnitude seen so far. Agents are indexed 0..n-1.
class Population {
public:
    /// All n agents in the protocol's initial state. Rejects populations the
    /// protocol cannot handle (n <= 2 for LM).
    template <PairwiseProtocol P>
    static Population create(const P& protocol, std::size_t n) {
        if (n < protocol.min_population()) {
            if (protocol.min_population() == 3)
                throw std::invalid_argument("n must exceed 2 for LM (got n=" + std::to_string(n) +
                                            "): symmetric rules cannot elect a leader among two agents");
            throw std::invalid_argument("n must be at least " + std::to_string(protocol.min_population()) +
                                        " for " + std::string(protocol.name()) + ", got " + std::to_string(n));
        }
        return Population(std::vector<StateValue>(n, protocol.initial_state()));
    }

    /// Arbitrary configuration with no population-size guard. Test harnesses
    /// use this to reach configurations that create() refuses.
    static Population from_states(std::vector<StateValue> states) { return Population(std::move(states)); }

    std::size_t size() const noexcept { return states_.size(); }
    std::span<const StateValue> states() const noexcept { return states_; }
    StateValue operator[](std::size_t agent) const { return states_[agent]; }

    std::size_t contenders() const noexcept { return contenders_; }
    StateValue max_abs_seen() const noexcept { return max_abs_; }
    std::uint64_t steps() const noexcept { return steps_; }
    /// steps / n, computed only for reporting.
    double parallel_time() const noexcept { return static_cast<double>(steps_) / static_cast<double>(size()); }

    /// Full rescan, independent of the cached counter.
    std::size_t count_contenders() const noexcept;

    /// Apply the protocol to the given ordered pair of distinct agents.
    /// Throws InvariantViolation if no contender would remain.
    template <PairwiseProtocol P>
    Interaction interact(const P& protocol, std::size_t initiator, std::size_t responder) {
        StateValue& a = states_[initiator];
        StateValue& b = states_[responder];
        const Interaction rec{initiator, responder, a, b, 0, 0};
        const auto [na, nb] = protocol.transition(a, b);
        commit(a, b, na, nb);
        return {rec.initiator, rec.responder, rec.x, rec.y, na, nb};
    }

    /// One scheduler step: sample a pair and interact.
    template <PairwiseProtocol P>
    Interaction step(const P& protocol, Scheduler& scheduler) {
        const auto [i, j] = scheduler.sample_pair(size());
        return interact(protocol, i, j);
    }

private:
    explicit Population(std::vector<StateValue> states);

    void commit(StateValue& a, StateValue& b, StateValue na, StateValue nb) {
        const auto before = static_cast<std::ptrdiff_t>(is_contender(a)) + is_contender(b);
        const auto after = static_cast<std::ptrdiff_t>(is_contender(na)) + is_contender(nb);
        if (static_cast<std::ptrdiff_t>(contenders_) + after - before <= 0) {
            throw InvariantViolation("no contender left at step " + std::to_string(steps_ + 1) + ": (" +
                                     std::to_string(a) + ", " + std::to_string(b) + ") -> (" +
                                     std::to_string(na) + ", " + std::to_string(nb) + ")");
        }
        contenders_ = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(contenders_) + after - before);
        max_abs_ = std::max({max_abs_, abs_value(na), abs_value(nb)});
        ++steps_;
        a = na;
        b = nb;
    }

    std::vector<StateValue> states_;
    std::size_t contenders_ = 0;
    StateValue max_abs_ = 0;
    std::uint64_t steps_ = 0;
};

/// Writes `step=<k> initiator=<i> responder=<j> x=.. y=.. x'=.. y'=.. contenders=<c>`
/// with 1-based agent ids.
void write_trace_line(std::ostream& out, std::uint64_t step, const Interaction& rec, std::size_t contenders);

struct SimulationOutcome {
    std::string protocol;
    std::size_t n = 0;
    /// Value ceiling; 0 for protocols without one.
    std::int32_t m = 0;
    std::uint64_t seed = 0;
    bool converged = false;
    std::uint64_t steps = 0;
    StateValue max_abs_value = 0;
    bool backup_triggered = false;

    double parallel_time() const noexcept {
        return n == 0 ? 0.0 : static_cast<double>(steps) / static_cast<double>(n);
    }

    friend bool operator==(const SimulationOutcome&, const SimulationOutcome&) = default;
};

/// 200 * n * ceil(log2 n)^3.
std::uint64_t default_max_steps(std::size_t n);

/// Run from the uniform initial configuration until exactly one contender
/// remains or max_steps interactions have been executed.
template <PairwiseProtocol P>
SimulationOutcome run_until_converged(const P& protocol, std::size_t n, std::uint64_t seed,
                                      std::uint64_t max_steps, std::ostream* trace = nullptr) {
    if (max_steps < 1) throw std::invalid_argument("max-steps must be at least 1");
    auto pop = Population::create(protocol, n);
    Scheduler scheduler(seed);
    if (trace != nullptr) {
        while (pop.contenders() != 1 && pop.steps() < max_steps) {
            const auto rec = pop.step(protocol, scheduler);
            write_trace_line(*trace, pop.steps(), rec, pop.contenders());
        }
    } else {
        while (pop.contenders() != 1 && pop.steps() < max_steps) pop.step(protocol, scheduler);
    }

    SimulationOutcome out;
    out.protocol = std::string(protocol.name());
    out.n = n;
    out.seed = seed;
    out.converged = pop.contenders() == 1;
    out.steps = pop.steps();
    out.max_abs_value = pop.max_abs_seen();
    if constexpr (requires { protocol.m(); }) {
        out.m = protocol.m();
        out.backup_triggered = out.max_abs_value >= protocol.m();
    }
    return out;
}

enum class ProtocolKind { LeaderMinion, Baseline };

/// "lm" or "baseline".
std::string_view to_string(ProtocolKind kind) noexcept;
/// Throws std::invalid_argument for unknown names.
ProtocolKind parse_protocol_kind(std::string_view name);

using AnyProtocol = std::variant<LeaderMinion, Baseline>;

/// m is ignored for the baseline.
AnyProtocol make_protocol(ProtocolKind kind, std::int32_t m);

SimulationOutcome run_until_converged(const AnyProtocol& protocol, std::size_t n, std::uint64_t seed,
                                      std::uint64_t max_steps, std::ostream* trace = nullptr);

}  // namespace popsim
