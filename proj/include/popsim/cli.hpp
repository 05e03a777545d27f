#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "popsim/engine.hpp"

namespace popsim::cli {

enum ExitCode : int {
    kOk = 0,
    kRuntimeFailure = 1,
    kUsageError = 2,
    kPropertyFailure = 3,
};

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Subcommand { Run, Sweep, Verify, Aggregate };

struct CliConfig {
    Subcommand subcommand = Subcommand::Run;
    ProtocolKind protocol = ProtocolKind::LeaderMinion;
    std::size_t n = 1000;                   // run
    std::vector<std::size_t> n_list;        // sweep, verify
    std::optional<std::int32_t> m;          // run/sweep; empty means auto
    std::vector<std::int32_t> m_list;       // verify
    std::uint64_t seed = 0;
    bool seed_from_entropy = false;
    std::size_t trials = 100;
    std::optional<std::uint64_t> max_steps;  // empty: 200 n ceil(log2 n)^3
    std::string out_path;
    std::string aggregate_path;  // sweep: optional aggregate CSV
    std::string in_path;         // aggregate
    std::size_t threads = 1;
    std::size_t node_cap = 10'000'000;
    bool trace = false;
};

/// Parses and validates argv. threads_env is the value of POPSIM_THREADS
/// (null if unset). Throws UsageError naming the offending flag. Returns
/// std::nullopt when help was requested and printed to out.
std::optional<CliConfig> parse_args(const std::vector<std::string>& args, const char* threads_env, std::ostream& out);

/// One line describing the fully resolved configuration.
std::string describe(const CliConfig& config);

/// Model-checks one instance and prints its two VERIFY lines. Returns
/// kPropertyFailure if either property fails.
int verify_instance(const ProtocolSpec& spec, std::size_t n, std::int32_t m, std::size_t node_cap,
                    std::ostream& out);

/// Executes a parsed configuration; returns an ExitCode.
int execute(const CliConfig& config, std::ostream& out, std::ostream& err);

/// parse_args + execute with the exit-code taxonomy applied.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace popsim::cli
