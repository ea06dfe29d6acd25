#include "entlab/driver.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <limits>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace entlab;
namespace fs = std::filesystem;

namespace {

const char* small_config = R"(resolution: 1024
lambda_grid: [0.25, 0.5]
t_grid: [0.5]
checks: [functionals, deficits, poincare]
distributions:
  - {name: g, family: gaussian}
  - {name: l, family: logistic, params: {scale: 1}}
pairs:
  - [g, g]
  - [g, l]
)";

std::string message_of(const std::string& yaml) {
    try {
        parse_config(yaml, "test.yaml");
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("entlab_test_" + name);
    fs::remove_all(p);
    return p;
}

} // namespace

TEST_CASE("config parses") {
    const ExperimentConfig c = parse_config(small_config);
    CHECK(c.resolution == 1024);
    CHECK(c.distributions.size() == 2);
    CHECK(c.distribution("l").spec.kind == FamilyKind::logistic);
    CHECK(c.pairs.size() == 2);
    CHECK_FALSE(c.checks.lemmas);
    CHECK(c.checks.functionals);
}

TEST_CASE("malformed lambda names the field and line") {
    std::string yaml = small_config;
    yaml.replace(yaml.find("[0.25, 0.5]"), 11, "[0.25, 1.5]");
    const std::string msg = message_of(yaml);
    CHECK(msg.find("lambda_grid") != std::string::npos);
    CHECK(msg.find("test.yaml:2") != std::string::npos);
}

TEST_CASE("config errors") {
    CHECK(message_of("resolution: 100\n").find("resolution") != std::string::npos);
    CHECK(message_of("bogus: 1\n").find("bogus") != std::string::npos);
    std::string dup = small_config;
    dup.replace(dup.find("name: l"), 7, "name: g");
    CHECK(message_of(dup).find("not unique") != std::string::npos);
    std::string bad_pair = small_config;
    bad_pair.replace(bad_pair.find("[g, l]"), 6, "[g, q]");
    CHECK(message_of(bad_pair).find("unknown distribution 'q'") != std::string::npos);
    std::string bad_param = small_config;
    bad_param.replace(bad_param.find("scale: 1"), 8, "scale: -1");
    CHECK(message_of(bad_param).find("scale must be > 0") != std::string::npos);
    CHECK(message_of("distributions: [\n").find("test.yaml:") != std::string::npos);
}

TEST_CASE("built-in config matches the shipped file") {
    const ExperimentConfig a = default_config();
    CHECK(a.pairs.size() == 6);
    std::ifstream in(std::string(ENTLAB_SOURCE_DIR) + "/configs/default.yaml");
    REQUIRE(in);
    std::stringstream ss;
    ss << in.rdbuf();
    const ExperimentConfig b = parse_config(ss.str());
    CHECK(b.distributions.size() == a.distributions.size());
    CHECK(b.pairs == a.pairs);
    CHECK(b.lambda_grid == a.lambda_grid);
}

TEST_CASE("csv numbers use 12 significant digits") {
    CHECK(csv_number(1.0 / 3.0) == "0.333333333333");
    CHECK(csv_number(std::numeric_limits<double>::quiet_NaN()) == "nan");
    CHECK(csv_number(-std::numeric_limits<double>::infinity()) == "-inf");
}

TEST_CASE("output directory resolution") {
    ExperimentConfig c = parse_config(small_config);
    c.output_dir = "given";
    CHECK(output_directory(c) == "given");
    c.output_dir.clear();
    setenv("ENTLAB_OUTPUT_DIR", "from_env", 1);
    CHECK(output_directory(c) == "from_env");
    unsetenv("ENTLAB_OUTPUT_DIR");
    CHECK(output_directory(c) == "entlab-out");
}

TEST_CASE("run writes deterministic CSVs and plots") {
    ExperimentConfig c = parse_config(small_config);
    const fs::path a = scratch_dir("a"), b = scratch_dir("b");
    c.output_dir = a.string();
    const RunSummary s = run(c, {});
    CHECK(s.pass());
    CHECK(s.asserted > 0);
    c.output_dir = b.string();
    run(c, {});
    for (const char* f : {"functionals.csv", "deficits.csv", "poincare.csv"}) {
        INFO(f);
        CHECK(fs::exists(a / f));
        CHECK(slurp(a / f) == slurp(b / f));
    }
    const std::string header = slurp(a / "deficits.csv").substr(0, slurp(a / "deficits.csv").find('\n'));
    CHECK(header == "d0,d1,lambda,type,deficit,bound,margin,c0,c1,err,bound_asserted,smoothing_time,pass");
    CHECK(fs::exists(a / "deficit_g__l.svg"));
    CHECK(slurp(a / "deficit_g__l.svg").find("<svg") == 0);
    fs::remove_all(a);
    fs::remove_all(b);
}
