#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "popsim/engine.hpp"

namespace popsim {

/// ceil(log2 n)^3, the default value ceiling for a population of n.
std::int32_t auto_m(std::size_t n);

/// Powers of two 2^5 ... 2^17.
std::vector<std::size_t> default_n_grid();

struct SweepPlan {
    ProtocolKind protocol = ProtocolKind::LeaderMinion;
    std::vector<std::size_t> n_list = default_n_grid();
    std::optional<std::int32_t> m;  // empty: auto_m(n)
    std::size_t trials_per_n = 100;
    std::uint64_t base_seed = 0;
    std::optional<std::uint64_t> max_steps;  // empty: default_max_steps(n)
    std::size_t threads = 1;

    std::int32_t m_for(std::size_t n) const { return m ? *m : auto_m(n); }
    std::uint64_t max_steps_for(std::size_t n) const { return max_steps ? *max_steps : default_max_steps(n); }
};

/// base_seed XOR a splitmix64 hash of (n, trial). Depends on nothing else, so
/// a trial's result does not depend on which sweep it ran in.
std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t n, std::size_t trial);

struct ExperimentRecord {
    SimulationOutcome outcome;
    std::size_t trial = 0;
    /// Set when the engine raised; outcome then carries converged=false.
    std::optional<std::string> error;

    friend bool operator==(const ExperimentRecord&, const ExperimentRecord&) = default;
};

ExperimentRecord run_trial(const SweepPlan& plan, std::size_t n, std::size_t trial);

/// All n_list x trials_per_n trials, sorted by (n, trial). Output does not
/// depend on plan.threads.
std::vector<ExperimentRecord> run_sweep(const SweepPlan& plan);

struct AggregateRow {
    std::size_t n = 0;
    std::size_t trials = 0;
    // Statistics over converged trials only; NaN when none converged.
    double mean_parallel_time = 0;
    double min_parallel_time = 0;
    double max_parallel_time = 0;
    double stddev_parallel_time = 0;  // sample standard deviation, 0 for one trial
    double frac_backup = 0;           // over all trials
    double frac_converged = 0;
};

/// One row per distinct n, ascending. Throws std::invalid_argument on empty input.
std::vector<AggregateRow> aggregate(std::span<const ExperimentRecord> records);

inline constexpr std::string_view kRecordsHeader =
    "protocol,n,m,trial,seed,steps,parallel_time,max_abs_value,backup_triggered,converged";
inline constexpr std::string_view kAggregateHeader =
    "n,trials,mean_parallel_time,min_parallel_time,max_parallel_time,stddev_parallel_time,frac_backup,frac_converged";

/// Header plus one row per record, rows sorted by (n, trial).
void write_records_csv(std::ostream& out, std::span<const ExperimentRecord> records);
void write_records_csv(const std::filesystem::path& path, std::span<const ExperimentRecord> records);

std::vector<ExperimentRecord> read_records_csv(std::istream& in);
std::vector<ExperimentRecord> read_records_csv(const std::filesystem::path& path);

void write_aggregates_csv(std::ostream& out, std::span<const AggregateRow> rows);
void write_aggregates_csv(const std::filesystem::path& path, std::span<const AggregateRow> rows);

}  // namespace popsim
