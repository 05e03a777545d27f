#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace popsim {

/// Agent state. Every protocol in this library uses the sign convention:
/// positive values are contenders (output Win), negative values are not.
/// Zero is never a valid state.
using StateValue = std::int32_t;
using StatePair = std::pair<StateValue, StateValue>;

enum class Output { Win, Lose };

constexpr bool is_contender(StateValue x) noexcept { return x > 0; }

constexpr StateValue abs_value(StateValue x) noexcept { return x < 0 ? -x : x; }

/// The Leader-Minion protocol with value ceiling m.
///
/// States are {-m, ..., -1} U {1, ..., m+1}. Contenders carry a positive value
/// and keep incrementing it on every win; a contender that meets a partner of
/// strictly larger magnitude (contender or minion) turns into a minion. Values
/// m and m+1 form a tie-breaker band: m+1 beats m, and the winner falls back
/// to m. Minions carry -max(|x|, |y|), saturating at -m.
class LeaderMinion {
public:
    /// Throws std::invalid_argument if m < 1.
    explicit LeaderMinion(std::int32_t m);

    std::int32_t m() const noexcept { return m_; }
    std::string_view name() const noexcept { return "lm"; }
    StateValue initial_state() const noexcept { return 1; }
    /// Symmetric protocols give no role to the initiator/responder ordering.
    bool symmetric() const noexcept { return true; }
    /// Below three agents the symmetric rules cannot break the initial tie.
    std::size_t min_population() const noexcept { return 3; }
    std::size_t num_states() const noexcept { return 2 * static_cast<std::size_t>(m_) + 1; }

    bool is_valid(StateValue x) const noexcept { return x != 0 && x >= -m_ && x <= m_ + 1; }

    /// Valid states in canonical order: -m, ..., -1, 1, ..., m+1.
    std::vector<StateValue> states() const;

    StateValue contend_priority(StateValue x, StateValue y) const noexcept {
        const StateValue top = std::max(abs_value(x), abs_value(y));
        return top == m_ + 1 ? m_ : top + 1;
    }

    StateValue minion_priority(StateValue x, StateValue y) const noexcept {
        const StateValue top = std::max(abs_value(x), abs_value(y));
        return top == m_ + 1 ? -m_ : -top;
    }

    StatePair transition(StateValue x, StateValue y) const noexcept {
        const StateValue ax = abs_value(x);
        const StateValue ay = abs_value(y);
        const StateValue nx = (is_contender(x) && ax >= ay) ? contend_priority(x, y) : minion_priority(x, y);
        const StateValue ny = (is_contender(y) && ay >= ax) ? contend_priority(x, y) : minion_priority(x, y);
        return {nx, ny};
    }

    Output output(StateValue x) const noexcept { return is_contender(x) ? Output::Win : Output::Lose; }

private:
    std::int32_t m_;
};

/// Two-state baseline: every agent starts as a leader; when two leaders meet
/// the responder becomes a follower.
enum class BaselineState : StateValue { Leader = 1, Follower = -1 };

class Baseline {
public:
    std::string_view name() const noexcept { return "baseline"; }
    StateValue initial_state() const noexcept { return static_cast<StateValue>(BaselineState::Leader); }
    bool symmetric() const noexcept { return false; }
    std::size_t min_population() const noexcept { return 2; }
    std::size_t num_states() const noexcept { return 2; }
    bool is_valid(StateValue x) const noexcept { return x == 1 || x == -1; }
    std::vector<StateValue> states() const { return {-1, 1}; }

    static std::pair<BaselineState, BaselineState> update(BaselineState initiator, BaselineState responder) noexcept {
        if (initiator == BaselineState::Leader && responder == BaselineState::Leader)
            return {BaselineState::Leader, BaselineState::Follower};
        return {initiator, responder};
    }

    StatePair transition(StateValue x, StateValue y) const noexcept {
        // Only (Leader, Leader) changes anything.
        return (x > 0 && y > 0) ? StatePair{x, -y} : StatePair{x, y};
    }

    Output output(StateValue x) const noexcept { return is_contender(x) ? Output::Win : Output::Lose; }
};

/// Type-erased protocol description. The verifier works on this, and test
/// code builds deliberately broken protocols with it.
class ProtocolSpec {
public:
    using Transition = std::function<StatePair(StateValue, StateValue)>;

    ProtocolSpec(std::string name, StateValue initial, std::vector<StateValue> states, Transition transition,
                 bool symmetric, std::size_t min_population = 2);

    /// Wraps a concrete protocol by computing transitions on demand.
    template <typename P>
    static ProtocolSpec from(const P& protocol) {
        return ProtocolSpec(std::string(protocol.name()), protocol.initial_state(), protocol.states(),
                            [protocol](StateValue x, StateValue y) { return protocol.transition(x, y); },
                            protocol.symmetric(), protocol.min_population());
    }

    /// Wraps a concrete protocol through a precomputed |Q| x |Q| table.
    template <typename P>
    static ProtocolSpec tabulated(const P& protocol) {
        return from(protocol).tabulate();
    }

    const std::string& name() const noexcept { return name_; }
    StateValue initial_state() const noexcept { return initial_; }
    bool symmetric() const noexcept { return symmetric_; }
    std::size_t min_population() const noexcept { return min_population_; }
    const std::vector<StateValue>& states() const noexcept { return states_; }
    std::size_t num_states() const noexcept { return states_.size(); }

    /// Position of x in states(), or npos if x is not a state.
    std::size_t index_of(StateValue x) const noexcept;
    bool is_valid(StateValue x) const noexcept { return index_of(x) != npos; }

    StatePair transition(StateValue x, StateValue y) const;
    Output output(StateValue x) const noexcept { return is_contender(x) ? Output::Win : Output::Lose; }

    /// Copy of this spec whose transitions come from a lookup table.
    ProtocolSpec tabulate() const;

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    std::string name_;
    StateValue initial_;
    std::vector<StateValue> states_;
    Transition transition_;
    bool symmetric_;
    std::size_t min_population_;
    StateValue offset_ = 0;
    std::vector<std::size_t> lookup_;  // value + offset_ -> index in states_
};

}  // namespace popsim
