#pragma once

#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "popsim/protocol.hpp"

namespace popsim {

/// Count of agents per state. Index k counts agents in protocol.states()[k],
/// i.e. the order -m, ..., -1, 1, ..., m+1 for LM and (Follower, Leader) for
/// the baseline.
using ConfigurationVector = std::vector<std::uint32_t>;

struct ConfigurationHash {
    std::size_t operator()(const ConfigurationVector& c) const noexcept;
};

class NodeCapExceeded : public std::runtime_error {
public:
    NodeCapExceeded(std::size_t cap, std::size_t frontier);
    std::size_t frontier() const noexcept { return frontier_; }

private:
    std::size_t frontier_;
};

/// Reachable configurations of a protocol from the all-initial state.
struct ReachabilityGraph {
    struct Edge {
        std::size_t to;
        StateValue initiator;  // interacting pair before the step
        StateValue responder;
        StateValue initiator_after;
        StateValue responder_after;
    };

    std::vector<StateValue> states;
    std::size_t n = 0;
    std::vector<ConfigurationVector> nodes;  // nodes[0] is the initial configuration
    std::vector<std::vector<Edge>> edges;    // one edge per applicable ordered state pair
    std::vector<std::size_t> parent;         // BFS tree; parent[0] == 0

    std::size_t size() const noexcept { return nodes.size(); }
    std::size_t contenders(std::size_t node) const;
    /// BFS path from the initial configuration to node, inclusive.
    std::vector<std::size_t> path_to(std::size_t node) const;
    /// e.g. {-2:3,+2:1}; zero counts omitted.
    std::string describe(std::size_t node) const;
};

/// Breadth-first closure of the initial configuration under every possible
/// interaction. Throws NodeCapExceeded when more than node_cap configurations
/// are discovered.
ReachabilityGraph build_reachability(const ProtocolSpec& protocol, std::size_t n, std::size_t node_cap = 10'000'000);

/// Strongly connected components with no edge leaving the component.
std::vector<std::vector<std::size_t>> bottom_sccs(const ReachabilityGraph& graph);

struct Verdict {
    std::string property;
    bool holds = true;
    std::vector<std::size_t> witness;  // node path; a failing configuration is last
    std::string detail;
};

Verdict check_always_one_contender(const ReachabilityGraph& graph);

/// Single-contender configurations only lead to single-contender
/// configurations, and every bottom SCC consists of single-contender
/// configurations.
Verdict check_single_contender_absorbing(const ReachabilityGraph& graph);

/// No interaction lowers an agent's magnitude except m+1 -> m.
Verdict check_monotone_values(const ReachabilityGraph& graph, std::int32_t m);

/// `VERIFY protocol=<p> n=<n> m=<m> property=<name> result=holds|fails nodes=<count>`,
/// followed on failure by the witness configurations, one per line.
void write_verdict(std::ostream& out, const Verdict& verdict, const ReachabilityGraph& graph,
                   std::string_view protocol, std::int32_t m);

}  // namespace popsim
