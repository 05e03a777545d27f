#include "popsim/protocol.hpp"

#include <algorithm>
#include <stdexcept>

namespace popsim {

LeaderMinion::LeaderMinion(std::int32_t m) : m_(m) {
    if (m < 1) throw std::invalid_argument("m must be at least 1, got " + std::to_string(m));
}

std::vector<StateValue> LeaderMinion::states() const {
    std::vector<StateValue> out;
    out.reserve(num_states());
    for (StateValue v = -m_; v <= m_ + 1; ++v)
        if (v != 0) out.push_back(v);
    return out;
}

ProtocolSpec::ProtocolSpec(std::string name, StateValue initial, std::vector<StateValue> states,
                           Transition transition, bool symmetric, std::size_t min_population)
    : name_(std::move(name)),
      initial_(initial),
      states_(std::move(states)),
      transition_(std::move(transition)),
      symmetric_(symmetric),
      min_population_(min_population) {
    if (states_.empty()) throw std::invalid_argument("protocol " + name_ + " has no states");
    const auto [lo, hi] = std::minmax_element(states_.begin(), states_.end());
    offset_ = -*lo;
    lookup_.assign(static_cast<std::size_t>(*hi - *lo) + 1, npos);
    for (std::size_t i = 0; i < states_.size(); ++i) {
        auto& slot = lookup_[static_cast<std::size_t>(states_[i] + offset_)];
        if (slot != npos) throw std::invalid_argument("protocol " + name_ + " lists a state twice");
        slot = i;
    }
    if (index_of(initial_) == npos) throw std::invalid_argument("initial state of " + name_ + " is not a state");
}

std::size_t ProtocolSpec::index_of(StateValue x) const noexcept {
    const auto shifted = static_cast<std::int64_t>(x) + offset_;
    if (shifted < 0 || shifted >= static_cast<std::int64_t>(lookup_.size())) return npos;
    return lookup_[static_cast<std::size_t>(shifted)];
}

StatePair ProtocolSpec::transition(StateValue x, StateValue y) const { return transition_(x, y); }

ProtocolSpec ProtocolSpec::tabulate() const {
    const std::size_t k = states_.size();
    std::vector<StatePair> table(k * k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) table[i * k + j] = transition_(states_[i], states_[j]);

    auto self = *this;
    auto transition = [table = std::move(table), lookup = lookup_, offset = offset_, k](StateValue x,
                                                                                        StateValue y) {
        const auto ix = lookup.at(static_cast<std::size_t>(x + offset));
        const auto iy = lookup.at(static_cast<std::size_t>(y + offset));
        if (ix == npos || iy == npos) throw std::out_of_range("transition on a value outside the state space");
        return table[ix * k + iy];
    };
    return ProtocolSpec(name_, initial_, states_, std::move(transition), symmetric_, min_population_);
}

}  // namespace popsim
