#include <cstdio>
#include <cstdlib>
#include <string>

#include "doctest.h"
#include "trv/io.hpp"

namespace {

// Runs the CLI through the shell, capturing combined stdout/stderr and the
// exit code.
int run_cli(const std::string& args, std::string& output) {
    const std::string cmd = std::string("\"") + TRV_CLI_PATH + "\" " + args + " 2>&1";
    output.clear();
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    std::size_t got;
    while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) output.append(buf, got);
    const int status = pclose(pipe);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* kQuad = "--family '{\"family\":\"monic_additive\",\"d\":2}'";
const char* kCubic = "--family '{\"family\":\"cubic\"}'";

} // namespace

TEST_CASE("solve emits the superstable parameter as JSON") {
    std::string out;
    const int rc = run_cli(std::string("solve ") + kQuad + " --q 3 --bracket -1.8 -1.7", out);
    CHECK(rc == 0);
    CHECK(out.find("\"q\":3") != std::string::npos);
    CHECK(out.find("-1.754877666246692") != std::string::npos);
    CHECK(!out.empty());
    CHECK(out.back() == '\n');
}

TEST_CASE("certify reports Q = 1/2 and positivity at the period-2 center") {
    std::string out;
    const int rc = run_cli(std::string("certify ") + kQuad + " --c -1", out);
    CHECK(rc == 0);
    CHECK(out.find("\"positive\": true") != std::string::npos);
    CHECK(out.find("0.5") != std::string::npos);
}

TEST_CASE("usage errors exit 2 with usage text") {
    std::string out;
    CHECK(run_cli("", out) == 2);
    CHECK(out.find("Usage") != std::string::npos);
    CHECK(run_cli(std::string("solve ") + kQuad + " --q 3 --bracket -1.8 -1.7 --bogus",
                  out) == 2);
    CHECK(run_cli(std::string("scan ") + kQuad + " --range -2 0 --format tiff", out) == 2);
    CHECK(run_cli("solve --q 3 --bracket -1.8 -1.7", out) == 2); // family missing
}

TEST_CASE("computational failures exit 1 with a JSON error") {
    std::string out;
    const int rc = run_cli(std::string("solve ") + kQuad + " --q 3 --bracket -1.3 -1.2", out);
    CHECK(rc == 1);
    CHECK(out.rfind("{\"error\":", 0) == 0);
    CHECK(out.find("\"message\":") != std::string::npos);

    const int rc2 = run_cli("certify --family '{\"family\":\"nope\"}' --c -1", out);
    CHECK(rc2 == 1);
    CHECK(out.rfind("{\"error\":", 0) == 0);
}

TEST_CASE("scan CSV carries the convention comment and header") {
    std::string out;
    const int rc = run_cli(std::string("scan ") + kQuad +
                               " --range -2 0.25 --grid 9 --n 12 --kmax 8",
                           out);
    CHECK(rc == 0);
    CHECK(out.rfind("# kneading_convention:", 0) == 0);
    CHECK(out.find("\nc,kneading,lambda_n,entropy\n") != std::string::npos);

    // Empty range: header only, no failure.
    std::string empty;
    CHECK(run_cli(std::string("scan ") + kQuad + " --range 1 1 --grid 9", empty) == 0);
    CHECK(empty.find("c,kneading,lambda_n,entropy\n") != std::string::npos);
    CHECK(empty.find("escaped") == std::string::npos);

    std::string svg;
    CHECK(run_cli(std::string("scan ") + kQuad + " --range 1 1 --format svg", svg) == 0);
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("<line") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);
}

TEST_CASE("repeated invocations are byte-identical") {
    const std::string matrix[] = {
        std::string("solve ") + kQuad + " --q 4 --bracket -2 -1.9",
        std::string("certify ") + kQuad + " --c -1.7548776662466927",
        std::string("spectrum ") + kQuad + " --c -1",
        std::string("scan ") + kQuad + " --range -2 0.25 --grid 17 --n 12 --kmax 8",
        std::string("lift ") + kQuad + " --c -1 --kmax 5 --theta 0.785 --n 200",
        std::string("bones ") + kCubic + " --q 1 --c 1 --range 0 6 --grid 50 --n 8",
        std::string("entropy ") + kQuad + " --range -2 -1 --grid 9 --n 10",
        std::string("scan ") + kQuad + " --range -2 0 --grid 33 --format svg --n 40 --kmax 60",
    };
    for (const std::string& args : matrix) {
        std::string first, second;
        CHECK(run_cli(args, first) == 0);
        CHECK(run_cli(args, second) == 0);
        CHECK(first == second);
        CHECK(!first.empty());
        CHECK(first.back() == '\n');
    }
}

TEST_CASE("worker count does not change scan output") {
    std::string serial, pooled;
    const std::string base =
        std::string("scan ") + kQuad + " --range -2 0.25 --grid 33 --n 12 --kmax 8";
    CHECK(run_cli(base + " --jobs 1", serial) == 0);
    CHECK(run_cli(base + " --jobs 4", pooled) == 0);
    CHECK(serial == pooled);
}

TEST_CASE("--out writes the same bytes as stdout") {
    std::string streamed;
    const std::string args = std::string("entropy ") + kQuad + " --c -2 --n 10";
    CHECK(run_cli(args, streamed) == 0);
    const char* path = "test_cli_out.tmp";
    std::string silent;
    CHECK(run_cli(args + " --out " + path, silent) == 0);
    CHECK(silent.empty());
    CHECK(trv::read_text_file(path) == streamed);
    std::remove(path);
}
