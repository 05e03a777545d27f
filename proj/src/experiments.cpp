#include "popsim/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

namespace popsim {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::vector<ExperimentRecord> sorted(std::span<const ExperimentRecord> records) {
    std::vector<ExperimentRecord> out(records.begin(), records.end());
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return std::tie(a.outcome.n, a.trial) < std::tie(b.outcome.n, b.trial);
    });
    return out;
}

[[noreturn]] void io_error(const std::filesystem::path& path, std::string_view what) {
    throw std::runtime_error(std::string(what) + " " + path.string() + ": " + std::strerror(errno));
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

bool parse_bool(const std::string& s) {
    if (s == "true") return true;
    if (s == "false") return false;
    throw std::invalid_argument("expected true or false, got '" + s + "'");
}

}  // namespace

std::int32_t auto_m(std::size_t n) {
    const auto log = static_cast<std::int32_t>(n <= 1 ? 0 : std::bit_width(static_cast<std::uint64_t>(n) - 1));
    return std::max(log * log * log, 1);
}

std::vector<std::size_t> default_n_grid() {
    std::vector<std::size_t> grid;
    for (int e = 5; e <= 17; ++e) grid.push_back(std::size_t{1} << e);
    return grid;
}

std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t n, std::size_t trial) {
    return base_seed ^ splitmix64(splitmix64(static_cast<std::uint64_t>(n)) ^ static_cast<std::uint64_t>(trial));
}

ExperimentRecord run_trial(const SweepPlan& plan, std::size_t n, std::size_t trial) {
    ExperimentRecord rec;
    rec.trial = trial;
    const auto seed = trial_seed(plan.base_seed, n, trial);
    const auto m = plan.protocol == ProtocolKind::LeaderMinion ? plan.m_for(n) : 0;
    try {
        rec.outcome = run_until_converged(make_protocol(plan.protocol, m), n, seed, plan.max_steps_for(n));
    } catch (const std::exception& e) {
        rec.outcome = SimulationOutcome{};
        rec.outcome.protocol = std::string(to_string(plan.protocol));
        rec.outcome.n = n;
        rec.outcome.m = m;
        rec.outcome.seed = seed;
        rec.error = e.what();
    }
    return rec;
}

std::vector<ExperimentRecord> run_sweep(const SweepPlan& plan) {
    if (plan.trials_per_n < 1) throw std::invalid_argument("trials per n must be at least 1");
    struct Job {
        std::size_t n, trial;
    };
    std::vector<Job> jobs;
    for (const auto n : plan.n_list)
        for (std::size_t t = 0; t < plan.trials_per_n; ++t) jobs.push_back({n, t});

    std::vector<ExperimentRecord> records(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) records[i] = run_trial(plan, jobs[i].n, jobs[i].trial);
    };
    const std::size_t threads = std::clamp<std::size_t>(plan.threads, 1, std::max<std::size_t>(jobs.size(), 1));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    return sorted(records);
}

std::vector<AggregateRow> aggregate(std::span<const ExperimentRecord> records) {
    if (records.empty()) throw std::invalid_argument("cannot aggregate an empty record set");
    std::map<std::size_t, std::vector<const ExperimentRecord*>> by_n;
    for (const auto& r : records) by_n[r.outcome.n].push_back(&r);

    std::vector<AggregateRow> rows;
    for (const auto& [n, group] : by_n) {
        AggregateRow row;
        row.n = n;
        row.trials = group.size();
        std::vector<double> times;
        std::size_t backups = 0;
        for (const auto* r : group) {
            if (r->outcome.backup_triggered) ++backups;
            if (r->outcome.converged) times.push_back(r->outcome.parallel_time());
        }
        row.frac_backup = static_cast<double>(backups) / static_cast<double>(group.size());
        row.frac_converged = static_cast<double>(times.size()) / static_cast<double>(group.size());
        if (times.empty()) {
            const double nan = std::numeric_limits<double>::quiet_NaN();
            row.mean_parallel_time = row.min_parallel_time = row.max_parallel_time = row.stddev_parallel_time = nan;
        } else {
            double sum = 0;
            for (const auto t : times) sum += t;
            row.mean_parallel_time = sum / static_cast<double>(times.size());
            const auto [lo, hi] = std::minmax_element(times.begin(), times.end());
            row.min_parallel_time = *lo;
            row.max_parallel_time = *hi;
            double sq = 0;
            for (const auto t : times) sq += (t - row.mean_parallel_time) * (t - row.mean_parallel_time);
            row.stddev_parallel_time = times.size() > 1 ? std::sqrt(sq / static_cast<double>(times.size() - 1)) : 0.0;
        }
        rows.push_back(row);
    }
    return rows;
}

void write_records_csv(std::ostream& out, std::span<const ExperimentRecord> records) {
    out << kRecordsHeader << '\n';
    for (const auto& r : sorted(records)) {
        const auto& o = r.outcome;
        out << o.protocol << ',' << o.n << ',' << o.m << ',' << r.trial << ',' << o.seed << ',' << o.steps << ','
            << fixed6(o.parallel_time()) << ',' << o.max_abs_value << ',' << (o.backup_triggered ? "true" : "false")
            << ',' << (o.converged ? "true" : "false") << '\n';
    }
}

void write_records_csv(const std::filesystem::path& path, std::span<const ExperimentRecord> records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) io_error(path, "cannot open for writing");
    write_records_csv(out, records);
    out.flush();
    if (!out) io_error(path, "failed writing");
}

std::vector<ExperimentRecord> read_records_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kRecordsHeader)
        throw std::invalid_argument("records CSV: missing or unexpected header");
    std::vector<ExperimentRecord> records;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split(line);
        if (f.size() != 10)
            throw std::invalid_argument("records CSV line " + std::to_string(lineno) + ": expected 10 fields, got " +
                                        std::to_string(f.size()));
        try {
            ExperimentRecord r;
            r.outcome.protocol = f[0];
            r.outcome.n = std::stoull(f[1]);
            r.outcome.m = std::stoi(f[2]);
            r.trial = std::stoull(f[3]);
            r.outcome.seed = std::stoull(f[4]);
            r.outcome.steps = std::stoull(f[5]);
            // f[6] (parallel_time) is derived from steps and n.
            r.outcome.max_abs_value = std::stoi(f[7]);
            r.outcome.backup_triggered = parse_bool(f[8]);
            r.outcome.converged = parse_bool(f[9]);
            records.push_back(std::move(r));
        } catch (const std::logic_error& e) {
            throw std::invalid_argument("records CSV line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return records;
}

std::vector<ExperimentRecord> read_records_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) io_error(path, "cannot open for reading");
    try {
        return read_records_csv(in);
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(path.string() + ": " + e.what());
    }
}

void write_aggregates_csv(std::ostream& out, std::span<const AggregateRow> rows) {
    out << kAggregateHeader << '\n';
    for (const auto& r : rows) {
        out << r.n << ',' << r.trials << ',' << fixed6(r.mean_parallel_time) << ',' << fixed6(r.min_parallel_time)
            << ',' << fixed6(r.max_parallel_time) << ',' << fixed6(r.stddev_parallel_time) << ','
            << fixed6(r.frac_backup) << ',' << fixed6(r.frac_converged) << '\n';
    }
}

void write_aggregates_csv(const std::filesystem::path& path, std::span<const AggregateRow> rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) io_error(path, "cannot open for writing");
    write_aggregates_csv(out, rows);
    out.flush();
    if (!out) io_error(path, "failed writing");
}

}  // namespace popsim
