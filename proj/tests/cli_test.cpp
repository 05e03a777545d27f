#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "popsim/cli.hpp"
#include "popsim/experiments.hpp"

using namespace popsim;
using namespace popsim::cli;

namespace {

CliConfig parse(std::vector<std::string> args, const char* env = nullptr) {
    std::ostringstream help;
    auto c = parse_args(args, env, help);
    REQUIRE(c.has_value());
    return *c;
}

struct Result {
    int code;
    std::string out, err;
};

Result invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "popsim");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::size_t count(const std::string& text, const std::string& needle) {
    std::size_t total = 0;
    for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++total;
    return total;
}

}  // namespace

TEST_CASE("run with auto m") {
    const auto c = parse({"run", "--protocol", "lm", "--n", "1000", "--m", "auto", "--seed", "42"});
    CHECK(c.subcommand == Subcommand::Run);
    CHECK(c.protocol == ProtocolKind::LeaderMinion);
    CHECK(c.n == 1000);
    REQUIRE(c.m.has_value());
    CHECK(*c.m == 1000);
    CHECK(c.seed == 42);
    CHECK_FALSE(c.seed_from_entropy);
}

TEST_CASE("two LM agents is a usage error") {
    std::ostringstream help;
    try {
        (void)parse_args({"run", "--n", "2", "--protocol", "lm"}, nullptr, help);
        FAIL("expected usage error");
    } catch (const UsageError& e) {
        CHECK(std::string(e.what()).find("n must exceed 2") != std::string::npos);
    }
    CHECK(parse({"run", "--n", "2", "--protocol", "baseline"}).n == 2);
}

TEST_CASE("sweep defaults") {
    const auto c = parse({"sweep"}, "3");
    CHECK(c.subcommand == Subcommand::Sweep);
    CHECK(c.protocol == ProtocolKind::LeaderMinion);
    CHECK(c.trials == 100);
    CHECK_FALSE(c.m.has_value());
    CHECK(c.n_list == default_n_grid());
    CHECK(c.seed_from_entropy);
    CHECK(c.threads == 3);
    CHECK(describe(c).find("m=auto") != std::string::npos);
    CHECK(describe(c).find("(from entropy)") != std::string::npos);
}

TEST_CASE("thread resolution") {
    CHECK(parse({"sweep", "--threads", "2"}, "5").threads == 2);
    CHECK(parse({"sweep"}, "5").threads == 5);
    CHECK(parse({"sweep"}).threads >= 1);
    std::ostringstream help;
    CHECK_THROWS_AS(parse_args({"sweep"}, "many", help), UsageError);
    CHECK_THROWS_AS(parse_args({"sweep", "--threads", "0"}, nullptr, help), UsageError);
}

TEST_CASE("usage errors name the flag") {
    std::ostringstream help;
    auto message = [&](std::vector<std::string> args) {
        try {
            (void)parse_args(args, nullptr, help);
        } catch (const UsageError& e) {
            return std::string(e.what());
        }
        return std::string("<no error>");
    };
    CHECK(message({"run", "--frobnicate", "1"}).find("--frobnicate") != std::string::npos);
    CHECK(message({"run", "--m", "zero"}).find("--m") != std::string::npos);
    CHECK(message({"run", "--protocol", "raft"}).find("--protocol") != std::string::npos);
    CHECK(message({"verify", "--m", "0"}).find("--m") != std::string::npos);
    CHECK(message({"sweep", "--n-list", "8,2"}).find("--n-list") != std::string::npos);
    CHECK(message({}) != "<no error>");
}

TEST_CASE("exit codes") {
    CHECK(invoke({"run", "--bogus"}).code == kUsageError);
    CHECK(invoke({"run", "--n", "2"}).code == kUsageError);
    CHECK(invoke({"aggregate", "--in", "/nonexistent/records.csv"}).code == kRuntimeFailure);
    CHECK(invoke({"--help"}).code == kOk);

    const LeaderMinion lm(2);
    const ProtocolSpec broken(
        "broken", 1, lm.states(),
        [lm](StateValue x, StateValue y) {
            if (x > 0 && y > 0 && x == y) return StatePair{lm.minion_priority(x, y), lm.minion_priority(x, y)};
            return lm.transition(x, y);
        },
        true, 3);
    std::ostringstream out;
    CHECK(verify_instance(broken, 4, 2, 1000, out) == kPropertyFailure);
    CHECK(out.str().find("result=fails") != std::string::npos);
}

TEST_CASE("verify prints two holding properties") {
    const auto r = invoke({"verify", "--n", "4", "--m", "2"});
    CHECK(r.code == kOk);
    CHECK(count(r.out, "result=holds") == 2);
    CHECK(r.out.find("VERIFY protocol=lm n=4 m=2 property=always_one_contender result=holds nodes=20\n") !=
          std::string::npos);
    CHECK(r.out.find("VERIFY protocol=lm n=4 m=2 property=single_contender_absorbing result=holds nodes=20\n") !=
          std::string::npos);
    CHECK(r.err.rfind("config: subcommand=verify", 0) == 0);

    const auto base = invoke({"verify", "--protocol", "baseline", "--n", "3"});
    CHECK(base.code == kOk);
    CHECK(count(base.out, "result=holds") == 2);
}

TEST_CASE("run is reproducible") {
    const auto a = invoke({"run", "--protocol", "lm", "--n", "1000", "--seed", "7"});
    const auto b = invoke({"run", "--protocol", "lm", "--n", "1000", "--seed", "7"});
    CHECK(a.code == kOk);
    CHECK(a.out == b.out);
    CHECK(a.out.rfind("protocol=lm n=1000 m=1000 seed=7 converged=true", 0) == 0);

    const auto c = invoke({"run", "--n", "50"});
    CHECK(c.code == kOk);
    CHECK(c.err.find("(from entropy)") != std::string::npos);
}

TEST_CASE("run trace") {
    const auto r = invoke({"run", "--n", "5", "--seed", "3", "--trace"});
    CHECK(r.code == kOk);
    CHECK(r.out.rfind("step=1 initiator=", 0) == 0);
}

TEST_CASE("sweep and aggregate files") {
    const auto dir = std::filesystem::temp_directory_path() / "popsim_cli_test";
    std::filesystem::create_directories(dir);
    const auto records = (dir / "r.csv").string();
    const auto agg = (dir / "a.csv").string();
    const auto r = invoke({"sweep", "--n-list", "32,64,128", "--trials", "5", "--seed", "1", "--threads", "2", "--out",
                           records, "--aggregate-out", agg});
    CHECK(r.code == kOk);
    CHECK(count(r.out, "\n") == 3);
    std::ifstream in(records);
    std::string line;
    std::size_t lines = 0;
    while (std::getline(in, line)) ++lines;
    CHECK(lines == 16);

    const auto again = invoke({"aggregate", "--in", records});
    CHECK(again.code == kOk);
    std::ifstream a(agg);
    std::stringstream written;
    written << a.rdbuf();
    CHECK(again.out == written.str());
    std::filesystem::remove_all(dir);
}
