#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <doctest.h>

#include "rtv/commands.hpp"
#include "rtv/config.hpp"
#include "rtv/errors.hpp"

using namespace rtv;
namespace fs = std::filesystem;

namespace {

const std::string bump_text = R"([profile]
family = bump
rho_minus = 1
rho_plus = 3
a = 1

[physical]
g = 1
mu = 1
k = 1
)";

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("rtvisc_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string error_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("minimal config receives the documented defaults") {
    const auto c = parse_config(bump_text);
    CHECK(c.numerical.tol == 1e-8);
    CHECK(c.numerical.n_elements == 256);
    CHECK(c.numerical.n_modes == 8);
    CHECK(c.numerical.eps_star == 0.0);
    REQUIRE(c.k_values.size() == 1);
    CHECK(c.k_values[0] == 1.0);
    const ReducedProblem p(c.make_profile(), c.physical(1.0), c.numerical);
    CHECK(p.eps_star() == doctest::Approx(1e-2 * p.lambda_max()).epsilon(1e-14));
}

TEST_CASE("negative viscosity is rejected naming physical.mu") {
    std::string text = bump_text;
    text.replace(text.find("mu = 1"), 6, "mu = -1");
    CHECK(error_of(text).find("physical.mu") != std::string::npos);
}

TEST_CASE("k range 1..4 with count 4 gives the integer grid") {
    std::string text = bump_text;
    text.replace(text.find("k = 1"), 5, "k_min = 1\nk_max = 4\nk_count = 4");
    const auto c = parse_config(text);
    REQUIRE(c.k_values.size() == 4);
    for (int i = 0; i < 4; ++i) CHECK(c.k_values[static_cast<std::size_t>(i)] == doctest::Approx(i + 1.0));
}

TEST_CASE("unknown key names the key and its section") {
    const auto msg = error_of(bump_text + "colour = red\n");
    CHECK(msg.find("colour") != std::string::npos);
    CHECK(msg.find("physical") != std::string::npos);
}

TEST_CASE("missing key reports the expected schema fragment") {
    std::string text = bump_text;
    text.erase(text.find("g = 1\n"), 6);
    const auto msg = error_of(text);
    CHECK(msg.find("physical.g") != std::string::npos);
    CHECK(msg.find("expected") != std::string::npos);
}

TEST_CASE("dispersion with three modes writes three deterministic rows") {
    auto c = parse_config(bump_text + "\n[numerical]\nn_modes = 3\n");
    const auto d1 = scratch("disp1"), d2 = scratch("disp2");
    std::ostringstream log;
    CHECK(run_command("dispersion", c, {.out_dir = d1.string(), .threads = 1, .seed = 1}, log) == 0);
    CHECK(run_command("dispersion", c, {.out_dir = d2.string(), .threads = 2, .seed = 7}, log) == 0);
    const auto a = slurp(d1 / "dispersion.csv"), b = slurp(d2 / "dispersion.csv");
    std::istringstream in(a);
    std::string line;
    std::getline(in, line);
    CHECK(line == "k,n,lambda_n,residual,coercivity_margin,N_eps_star");
    int rows = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 3);
    CHECK(a == b);
}

TEST_CASE("unknown command is a usage error") {
    const auto c = parse_config(bump_text);
    std::ostringstream log;
    try {
        run_command("frobnicate", c, {}, log);
        FAIL("expected a usage error");
    } catch (const ConfigError& e) {
        CHECK(e.tag() == "usage");
    }
}

TEST_CASE("verify on the bump fixture passes every check") {
    const auto c = parse_config(bump_text + "\n[numerical]\nn_modes = 8\n");
    std::ostringstream log;
    const int code = run_command("verify", c, {.out_dir = scratch("verify").string(), .threads = 0, .seed = 1}, log);
    CAPTURE(log.str());
    CHECK(code == 0);
}
