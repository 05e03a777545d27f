#include "popsim/verifier.hpp"

#include <algorithm>
#include <deque>
#include <unordered_map>

namespace popsim {

std::size_t ConfigurationHash::operator()(const ConfigurationVector& c) const noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto v : c) {
        h ^= v;
        h *= 0x100000001b3ULL;
    }
    return static_cast<std::size_t>(h);
}

NodeCapExceeded::NodeCapExceeded(std::size_t cap, std::size_t frontier)
    : std::runtime_error("reachability graph exceeded node cap " + std::to_string(cap) + " with frontier size " +
                         std::to_string(frontier)),
      frontier_(frontier) {}

std::size_t ReachabilityGraph::contenders(std::size_t node) const {
    std::size_t total = 0;
    for (std::size_t k = 0; k < states.size(); ++k)
        if (is_contender(states[k])) total += nodes[node][k];
    return total;
}

std::vector<std::size_t> ReachabilityGraph::path_to(std::size_t node) const {
    std::vector<std::size_t> path{node};
    while (node != 0) {
        node = parent[node];
        path.push_back(node);
    }
    std::reverse(path.begin(), path.end());
    return path;
}

std::string ReachabilityGraph::describe(std::size_t node) const {
    std::string out = "{";
    bool first = true;
    for (std::size_t k = 0; k < states.size(); ++k) {
        if (nodes[node][k] == 0) continue;
        if (!first) out += ',';
        first = false;
        if (states[k] > 0) out += '+';
        out += std::to_string(states[k]) + ':' + std::to_string(nodes[node][k]);
    }
    return out + "}";
}

ReachabilityGraph build_reachability(const ProtocolSpec& protocol, std::size_t n, std::size_t node_cap) {
    if (n < 2) throw std::invalid_argument("reachability needs at least two agents");
    if (n < protocol.min_population())
        throw std::invalid_argument("n=" + std::to_string(n) + " is below the minimum population for " +
                                    protocol.name());

    ReachabilityGraph g;
    g.states = protocol.states();
    g.n = n;
    const std::size_t k = g.states.size();

    // Transitions for every ordered state pair, as index pairs.
    std::vector<std::pair<std::size_t, std::size_t>> delta(k * k);
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = 0; b < k; ++b) {
            const auto [x, y] = protocol.transition(g.states[a], g.states[b]);
            const auto ix = protocol.index_of(x);
            const auto iy = protocol.index_of(y);
            if (ix == ProtocolSpec::npos || iy == ProtocolSpec::npos)
                throw std::logic_error("transition of " + protocol.name() + " leaves the state space on (" +
                                       std::to_string(g.states[a]) + ", " + std::to_string(g.states[b]) + ")");
            delta[a * k + b] = {ix, iy};
        }
    }

    std::unordered_map<ConfigurationVector, std::size_t, ConfigurationHash> index;
    auto discover = [&](ConfigurationVector c, std::size_t parent) -> std::size_t {
        const auto [it, inserted] = index.try_emplace(std::move(c), g.nodes.size());
        if (inserted) {
            if (g.nodes.size() >= node_cap) throw NodeCapExceeded(node_cap, g.nodes.size() - parent);
            g.nodes.push_back(it->first);
            g.edges.emplace_back();
            g.parent.push_back(parent);
        }
        return it->second;
    };

    ConfigurationVector initial(k, 0);
    initial[protocol.index_of(protocol.initial_state())] = static_cast<std::uint32_t>(n);
    discover(std::move(initial), 0);

    // Nodes are appended in BFS order, so the index itself is the queue.
    for (std::size_t cur = 0; cur < g.nodes.size(); ++cur) {
        for (std::size_t a = 0; a < k; ++a) {
            if (g.nodes[cur][a] == 0) continue;
            for (std::size_t b = 0; b < k; ++b) {
                if (g.nodes[cur][b] < (a == b ? 2u : 1u)) continue;
                const auto [na, nb] = delta[a * k + b];
                ConfigurationVector next = g.nodes[cur];
                --next[a];
                --next[b];
                ++next[na];
                ++next[nb];
                const std::size_t to = discover(std::move(next), cur);
                g.edges[cur].push_back({to, g.states[a], g.states[b], g.states[na], g.states[nb]});
            }
        }
    }
    return g;
}

std::vector<std::vector<std::size_t>> bottom_sccs(const ReachabilityGraph& graph) {
    // Iterative Tarjan.
    const std::size_t size = graph.size();
    constexpr std::size_t unvisited = static_cast<std::size_t>(-1);
    std::vector<std::size_t> order(size, unvisited), low(size, 0), component(size, unvisited);
    std::vector<bool> on_stack(size, false);
    std::vector<std::size_t> stack;
    std::vector<std::vector<std::size_t>> sccs;
    std::size_t counter = 0;

    struct Frame {
        std::size_t node;
        std::size_t next_edge;
    };
    std::vector<Frame> call;

    for (std::size_t root = 0; root < size; ++root) {
        if (order[root] != unvisited) continue;
        call.push_back({root, 0});
        order[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!call.empty()) {
            auto& frame = call.back();
            const auto v = frame.node;
            if (frame.next_edge < graph.edges[v].size()) {
                const auto w = graph.edges[v][frame.next_edge++].to;
                if (order[w] == unvisited) {
                    order[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    call.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], order[w]);
                }
                continue;
            }
            if (low[v] == order[v]) {
                std::vector<std::size_t> scc;
                std::size_t w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    component[w] = sccs.size();
                    scc.push_back(w);
                } while (w != v);
                std::sort(scc.begin(), scc.end());
                sccs.push_back(std::move(scc));
            }
            call.pop_back();
            if (!call.empty()) low[call.back().node] = std::min(low[call.back().node], low[v]);
        }
    }

    std::vector<std::vector<std::size_t>> bottom;
    for (std::size_t c = 0; c < sccs.size(); ++c) {
        const bool closed = std::all_of(sccs[c].begin(), sccs[c].end(), [&](std::size_t v) {
            return std::all_of(graph.edges[v].begin(), graph.edges[v].end(),
                               [&](const auto& e) { return component[e.to] == c; });
        });
        if (closed) bottom.push_back(std::move(sccs[c]));
    }
    std::sort(bottom.begin(), bottom.end());
    return bottom;
}

Verdict check_always_one_contender(const ReachabilityGraph& graph) {
    Verdict v{"always_one_contender", true, {}, {}};
    for (std::size_t node = 0; node < graph.size(); ++node) {
        if (graph.contenders(node) == 0) {
            v.holds = false;
            v.witness = graph.path_to(node);
            v.detail = "configuration without contenders: " + graph.describe(node);
            break;
        }
    }
    return v;
}

Verdict check_single_contender_absorbing(const ReachabilityGraph& graph) {
    Verdict v{"single_contender_absorbing", true, {}, {}};
    for (std::size_t node = 0; node < graph.size() && v.holds; ++node) {
        if (graph.contenders(node) != 1) continue;
        for (const auto& e : graph.edges[node]) {
            if (graph.contenders(e.to) != 1) {
                v.holds = false;
                v.witness = graph.path_to(node);
                v.witness.push_back(e.to);
                v.detail = "single-contender configuration " + graph.describe(node) + " reaches " +
                           graph.describe(e.to);
                break;
            }
        }
    }
    if (!v.holds) return v;
    for (const auto& scc : bottom_sccs(graph)) {
        for (const auto node : scc) {
            if (graph.contenders(node) != 1) {
                v.holds = false;
                v.witness = graph.path_to(node);
                v.detail = "bottom SCC of " + std::to_string(scc.size()) + " configurations contains " +
                           graph.describe(node) + " with " + std::to_string(graph.contenders(node)) +
                           " contenders";
                return v;
            }
        }
    }
    return v;
}

Verdict check_monotone_values(const ReachabilityGraph& graph, std::int32_t m) {
    Verdict v{"monotone_values", true, {}, {}};
    auto lowered = [m](StateValue before, StateValue after) {
        return abs_value(after) < abs_value(before) && !(abs_value(before) == m + 1 && abs_value(after) == m);
    };
    for (std::size_t node = 0; node < graph.size(); ++node) {
        for (const auto& e : graph.edges[node]) {
            if (lowered(e.initiator, e.initiator_after) || lowered(e.responder, e.responder_after)) {
                v.holds = false;
                v.witness = graph.path_to(node);
                v.witness.push_back(e.to);
                v.detail = "interaction (" + std::to_string(e.initiator) + ", " + std::to_string(e.responder) +
                           ") -> (" + std::to_string(e.initiator_after) + ", " + std::to_string(e.responder_after) +
                           ") lowers a magnitude";
                return v;
            }
        }
    }
    return v;
}

void write_verdict(std::ostream& out, const Verdict& verdict, const ReachabilityGraph& graph,
                   std::string_view protocol, std::int32_t m) {
    out << "VERIFY protocol=" << protocol << " n=" << graph.n << " m=" << m << " property=" << verdict.property
        << " result=" << (verdict.holds ? "holds" : "fails") << " nodes=" << graph.size() << '\n';
    if (verdict.holds) return;
    out << "  " << verdict.detail << '\n';
    for (std::size_t i = 0; i < verdict.witness.size(); ++i)
        out << "  witness[" << i << "] " << graph.describe(verdict.witness[i]) << '\n';
}

}  // namespace popsim
