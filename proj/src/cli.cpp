#include "popsim/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

#include "popsim/experiments.hpp"
#include "popsim/verifier.hpp"

namespace popsim::cli {

namespace {

std::string_view subcommand_name(Subcommand s) {
    switch (s) {
        case Subcommand::Run: return "run";
        case Subcommand::Sweep: return "sweep";
        case Subcommand::Verify: return "verify";
        case Subcommand::Aggregate: return "aggregate";
    }
    return "?";
}

std::optional<std::int32_t> parse_m(const std::string& text) {
    if (text == "auto") return std::nullopt;
    std::size_t pos = 0;
    long long value = 0;
    try {
        value = std::stoll(text, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos != text.size() || value < 1 || value > (1 << 30))
        throw UsageError("--m: expected 'auto' or a positive integer, got '" + text + "'");
    return static_cast<std::int32_t>(value);
}

std::size_t resolve_threads(std::optional<std::size_t> flag, const char* env) {
    if (flag) {
        if (*flag == 0) throw UsageError("--threads must be at least 1");
        return *flag;
    }
    if (env != nullptr && *env != '\0') {
        std::size_t pos = 0;
        unsigned long long value = 0;
        try {
            value = std::stoull(env, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != std::string_view(env).size() || value == 0)
            throw UsageError(std::string("POPSIM_THREADS: expected a positive integer, got '") + env + "'");
        return value;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void check_population(ProtocolKind protocol, std::size_t n, std::string_view flag) {
    if (protocol == ProtocolKind::LeaderMinion && n <= 2)
        throw UsageError(std::string(flag) + ": n must exceed 2 for LM (got " + std::to_string(n) +
                         "); the symmetric rules cannot elect a leader among two agents");
    if (n < 2) throw UsageError(std::string(flag) + ": n must be at least 2, got " + std::to_string(n));
}

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

int run_single(const CliConfig& c, std::ostream& out, std::ostream& err) {
    const std::int32_t m = c.protocol == ProtocolKind::LeaderMinion ? (c.m ? *c.m : auto_m(c.n)) : 0;
    const auto max_steps = c.max_steps ? *c.max_steps : default_max_steps(c.n);
    const auto outcome =
        run_until_converged(make_protocol(c.protocol, m), c.n, c.seed, max_steps, c.trace ? &out : nullptr);
    if (!c.out_path.empty()) {
        const ExperimentRecord rec{outcome, 0, std::nullopt};
        write_records_csv(c.out_path, std::span(&rec, 1));
    }
    out << "protocol=" << outcome.protocol << " n=" << outcome.n << " m=" << outcome.m << " seed=" << outcome.seed
        << " converged=" << (outcome.converged ? "true" : "false") << " steps=" << outcome.steps
        << " parallel_time=" << fixed6(outcome.parallel_time()) << " max_abs_value=" << outcome.max_abs_value
        << " backup_triggered=" << (outcome.backup_triggered ? "true" : "false") << '\n';
    if (!outcome.converged) err << "warning: step cap " << max_steps << " reached before convergence\n";
    return kOk;
}

void print_aggregates(std::ostream& out, const std::vector<AggregateRow>& rows,
                      const std::vector<ExperimentRecord>& records) {
    for (const auto& row : rows) {
        std::int32_t m = 0;
        for (const auto& r : records)
            if (r.outcome.n == row.n) m = r.outcome.m;
        out << "n=" << row.n << " m=" << m << " trials=" << row.trials
            << " mean_parallel_time=" << fixed6(row.mean_parallel_time)
            << " frac_converged=" << fixed6(row.frac_converged) << '\n';
    }
}

int run_sweep_command(const CliConfig& c, std::ostream& out, std::ostream& err) {
    SweepPlan plan;
    plan.protocol = c.protocol;
    plan.n_list = c.n_list;
    plan.m = c.m;
    plan.trials_per_n = c.trials;
    plan.base_seed = c.seed;
    plan.max_steps = c.max_steps;
    plan.threads = c.threads;
    const auto records = run_sweep(plan);
    for (const auto& r : records)
        if (r.error) err << "error: n=" << r.outcome.n << " trial=" << r.trial << ": " << *r.error << '\n';
    write_records_csv(c.out_path, records);
    const auto rows = aggregate(records);
    if (!c.aggregate_path.empty()) write_aggregates_csv(c.aggregate_path, rows);
    print_aggregates(out, rows, records);
    return kOk;
}

int run_verify(const CliConfig& c, std::ostream& out) {
    int code = kOk;
    const std::vector<std::int32_t> baseline_m{0};
    const auto& ms = c.protocol == ProtocolKind::LeaderMinion ? c.m_list : baseline_m;
    for (const auto n : c.n_list) {
        for (const auto m : ms) {
            const auto spec = c.protocol == ProtocolKind::LeaderMinion ? ProtocolSpec::tabulated(LeaderMinion(m))
                                                                       : ProtocolSpec::from(Baseline{});
            code = std::max(code, verify_instance(spec, n, m, c.node_cap, out));
        }
    }
    return code;
}

int run_aggregate(const CliConfig& c, std::ostream& out) {
    const auto records = read_records_csv(c.in_path);
    const auto rows = aggregate(records);
    if (c.out_path.empty()) {
        write_aggregates_csv(out, rows);
    } else {
        write_aggregates_csv(c.out_path, rows);
        print_aggregates(out, rows, records);
    }
    return kOk;
}

}  // namespace

int verify_instance(const ProtocolSpec& spec, std::size_t n, std::int32_t m, std::size_t node_cap,
                    std::ostream& out) {
    const auto graph = build_reachability(spec, n, node_cap);
    bool all_hold = true;
    for (const auto& verdict : {check_always_one_contender(graph), check_single_contender_absorbing(graph)}) {
        write_verdict(out, verdict, graph, spec.name(), m);
        all_hold = all_hold && verdict.holds;
    }
    return all_hold ? kOk : kPropertyFailure;
}

std::optional<CliConfig> parse_args(const std::vector<std::string>& args, const char* threads_env,
                                    std::ostream& out) {
    CLI::App app{"Population protocol leader election: simulation, sweeps, and exhaustive verification", "popsim"};
    app.require_subcommand(1);

    std::string protocol = "lm";
    std::size_t n = 1000;
    std::string m_text = "auto";
    std::optional<std::uint64_t> seed;
    std::size_t trials = 100;
    std::optional<std::uint64_t> max_steps;
    std::string out_path;
    std::string aggregate_path;
    std::string in_path;
    std::optional<std::size_t> threads;
    std::vector<std::size_t> n_list;
    std::vector<std::int32_t> m_list{1, 2, 3};
    std::vector<std::size_t> verify_n{3, 4, 5};
    std::size_t node_cap = 10'000'000;
    bool trace = false;

    auto add_protocol = [&](CLI::App* sub) {
        sub->add_option("--protocol", protocol, "lm or baseline")->check(CLI::IsMember({"lm", "baseline"}))
            ->capture_default_str();
    };

    auto* run = app.add_subcommand("run", "Simulate one execution until a single contender remains");
    add_protocol(run);
    run->add_option("--n", n, "Population size")->capture_default_str();
    run->add_option("--m", m_text, "Value ceiling, or 'auto' for ceil(log2 n)^3")->capture_default_str();
    run->add_option("--seed", seed, "PRNG seed (default: drawn from system entropy and printed)");
    run->add_option("--max-steps", max_steps, "Step cap (default 200 n ceil(log2 n)^3)");
    run->add_option("--out", out_path, "Also write the outcome as a records CSV");
    run->add_flag("--trace", trace, "Print every interaction");

    auto* sweep = app.add_subcommand("sweep", "Monte Carlo sweep over population sizes");
    add_protocol(sweep);
    sweep->add_option("--n-list", n_list, "Comma-separated population sizes (default 2^5..2^17)")->delimiter(',');
    sweep->add_option("--m", m_text, "Value ceiling, or 'auto'")->capture_default_str();
    sweep->add_option("--trials", trials, "Trials per population size")->capture_default_str();
    sweep->add_option("--seed", seed, "Base seed (default: drawn from system entropy and printed)");
    sweep->add_option("--max-steps", max_steps, "Step cap per trial (default 200 n ceil(log2 n)^3)");
    sweep->add_option("--out", out_path, "Records CSV path")->capture_default_str();
    sweep->add_option("--aggregate-out", aggregate_path, "Aggregate CSV path");
    sweep->add_option("--threads", threads, "Worker threads (default: POPSIM_THREADS or hardware concurrency)");

    auto* verify = app.add_subcommand("verify", "Exhaustively model-check small instances");
    add_protocol(verify);
    verify->add_option("--n", verify_n, "Comma-separated population sizes")->delimiter(',')->capture_default_str();
    verify->add_option("--m", m_list, "Comma-separated value ceilings (LM only)")->delimiter(',')
        ->capture_default_str();
    verify->add_option("--node-cap", node_cap, "Maximum number of configurations")->capture_default_str();

    auto* agg = app.add_subcommand("aggregate", "Aggregate a records CSV per population size");
    agg->add_option("--in", in_path, "Records CSV")->required();
    agg->add_option("--out", out_path, "Aggregate CSV path (default: standard output)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return std::nullopt;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return std::nullopt;
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }

    CliConfig c;
    if (run->parsed()) c.subcommand = Subcommand::Run;
    else if (sweep->parsed()) c.subcommand = Subcommand::Sweep;
    else if (verify->parsed()) c.subcommand = Subcommand::Verify;
    else c.subcommand = Subcommand::Aggregate;

    c.protocol = parse_protocol_kind(protocol);
    c.n = n;
    c.m = parse_m(m_text);
    c.trials = trials;
    c.max_steps = max_steps;
    c.trace = trace;
    c.node_cap = node_cap;
    c.in_path = in_path;
    c.out_path = out_path;
    c.aggregate_path = aggregate_path;
    if (seed) {
        c.seed = *seed;
    } else {
        std::random_device rd;
        c.seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
        c.seed_from_entropy = true;
    }
    if (max_steps && *max_steps == 0) throw UsageError("--max-steps must be at least 1");

    switch (c.subcommand) {
        case Subcommand::Run:
            check_population(c.protocol, c.n, "--n");
            if (c.protocol == ProtocolKind::LeaderMinion && !c.m) c.m = auto_m(c.n);
            break;
        case Subcommand::Sweep:
            c.n_list = n_list.empty() ? default_n_grid() : n_list;
            for (const auto v : c.n_list) check_population(c.protocol, v, "--n-list");
            if (c.trials < 1) throw UsageError("--trials must be at least 1");
            if (c.out_path.empty()) c.out_path = "sweep_records.csv";
            c.threads = resolve_threads(threads, threads_env);
            break;
        case Subcommand::Verify:
            c.n_list = verify_n;
            for (const auto v : c.n_list) check_population(c.protocol, v, "--n");
            for (const auto v : m_list)
                if (v < 1) throw UsageError("--m: value ceilings must be at least 1, got " + std::to_string(v));
            c.m_list = m_list;
            break;
        case Subcommand::Aggregate:
            break;
    }
    return c;
}

std::string describe(const CliConfig& c) {
    std::ostringstream s;
    auto join = [&](const auto& values) {
        for (std::size_t i = 0; i < values.size(); ++i) s << (i ? "," : "") << values[i];
    };
    s << "config: subcommand=" << subcommand_name(c.subcommand);
    switch (c.subcommand) {
        case Subcommand::Run:
            s << " protocol=" << to_string(c.protocol) << " n=" << c.n << " m=" << (c.m ? *c.m : 0)
              << " seed=" << c.seed << (c.seed_from_entropy ? " (from entropy)" : "")
              << " max_steps=" << (c.max_steps ? *c.max_steps : default_max_steps(c.n))
              << " trace=" << (c.trace ? "true" : "false") << " out=" << (c.out_path.empty() ? "-" : c.out_path);
            break;
        case Subcommand::Sweep:
            s << " protocol=" << to_string(c.protocol) << " n-list=";
            join(c.n_list);
            s << " m=" << (c.m ? std::to_string(*c.m) : "auto") << " trials=" << c.trials << " seed=" << c.seed
              << (c.seed_from_entropy ? " (from entropy)" : "") << " max_steps="
              << (c.max_steps ? std::to_string(*c.max_steps) : "default") << " threads=" << c.threads
              << " out=" << c.out_path << " aggregate-out=" << (c.aggregate_path.empty() ? "-" : c.aggregate_path);
            break;
        case Subcommand::Verify:
            s << " protocol=" << to_string(c.protocol) << " n=";
            join(c.n_list);
            s << " m=";
            join(c.m_list);
            s << " node_cap=" << c.node_cap;
            break;
        case Subcommand::Aggregate:
            s << " in=" << c.in_path << " out=" << (c.out_path.empty() ? "-" : c.out_path);
            break;
    }
    return s.str();
}

int execute(const CliConfig& config, std::ostream& out, std::ostream& err) {
    switch (config.subcommand) {
        case Subcommand::Run: return run_single(config, out, err);
        case Subcommand::Sweep: return run_sweep_command(config, out, err);
        case Subcommand::Verify: return run_verify(config, out);
        case Subcommand::Aggregate: return run_aggregate(config, out);
    }
    return kRuntimeFailure;
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    std::optional<CliConfig> config;
    try {
        config = parse_args(std::vector<std::string>(argv + 1, argv + argc), std::getenv("POPSIM_THREADS"), out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\nRun with --help for usage.\n";
        return kUsageError;
    }
    if (!config) return kOk;
    err << describe(*config) << '\n';
    try {
        return execute(*config, out, err);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kRuntimeFailure;
    }
}

}  // namespace popsim::cli
