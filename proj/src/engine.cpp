#include "popsim/engine.hpp"

#include <algorithm>
#include <bit>

namespace popsim {

std::uint64_t Scheduler::uniform_below(std::uint64_t bound) {
    // Lemire, "Fast Random Integer Generation in an Interval" (2019).
    std::uint64_t x = engine_();
    auto product = static_cast<unsigned __int128>(x) * bound;
    auto low = static_cast<std::uint64_t>(product);
    if (low < bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        while (low < threshold) {
            x = engine_();
            product = static_cast<unsigned __int128>(x) * bound;
            low = static_cast<std::uint64_t>(product);
        }
    }
    return static_cast<std::uint64_t>(product >> 64);
}

Population::Population(std::vector<StateValue> states) : states_(std::move(states)) {
    contenders_ = count_contenders();
    for (const auto v : states_) max_abs_ = std::max(max_abs_, abs_value(v));
}

std::size_t Population::count_contenders() const noexcept {
    return static_cast<std::size_t>(std::count_if(states_.begin(), states_.end(), is_contender));
}

void write_trace_line(std::ostream& out, std::uint64_t step, const Interaction& rec, std::size_t contenders) {
    out << "step=" << step << " initiator=" << rec.initiator + 1 << " responder=" << rec.responder + 1
        << " x=" << rec.x << " y=" << rec.y << " x'=" << rec.x_new << " y'=" << rec.y_new
        << " contenders=" << contenders << '\n';
}

std::uint64_t default_max_steps(std::size_t n) {
    const std::uint64_t log = n <= 1 ? 0 : std::bit_width(static_cast<std::uint64_t>(n) - 1);
    return 200 * static_cast<std::uint64_t>(n) * std::max<std::uint64_t>(log * log * log, 1);
}

std::string_view to_string(ProtocolKind kind) noexcept {
    return kind == ProtocolKind::LeaderMinion ? "lm" : "baseline";
}

ProtocolKind parse_protocol_kind(std::string_view name) {
    if (name == "lm") return ProtocolKind::LeaderMinion;
    if (name == "baseline") return ProtocolKind::Baseline;
    throw std::invalid_argument("unknown protocol '" + std::string(name) + "' (expected lm or baseline)");
}

AnyProtocol make_protocol(ProtocolKind kind, std::int32_t m) {
    if (kind == ProtocolKind::Baseline) return Baseline{};
    return LeaderMinion(m);
}

SimulationOutcome run_until_converged(const AnyProtocol& protocol, std::size_t n, std::uint64_t seed,
                                      std::uint64_t max_steps, std::ostream* trace) {
    return std::visit([&](const auto& p) { return run_until_converged(p, n, seed, max_steps, trace); },
                      protocol);
}

}  // namespace popsim
