#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>

#include "weylab/experiments.hpp"

using namespace weylab;
namespace fs = std::filesystem;

namespace {

struct Scratch {
    fs::path dir;
    Scratch() {
        dir = fs::temp_directory_path() / ("weylab_cli_" + std::to_string(::getpid()));
        fs::create_directories(dir);
    }
    ~Scratch() {
        std::error_code ec;
        fs::remove_all(dir, ec);
    }
    fs::path write(const std::string& name, const std::string& text) const {
        std::ofstream(dir / name) << text;
        return dir / name;
    }
};

struct Run {
    int rc;
    std::string out;
};

Run cli(const std::string& args, const fs::path& scratch) {
    const fs::path out = scratch / "stdout.txt";
    const std::string cmd = std::string("\"") + WEYLAB_CLI_PATH + "\" " + args + " > \"" + out.string() + "\" 2>&1";
    const int st = std::system(cmd.c_str());
    std::ifstream in(out);
    std::stringstream ss;
    ss << in.rdbuf();
    return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, ss.str()};
}

json read_json(const fs::path& p) {
    std::ifstream in(p);
    return json::parse(in);
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

TEST(Config, DefaultsAreMerged) {
    const auto c = parse_config(json{{"experiment", "mauceri-check"}});
    EXPECT_EQ(c.context.N, 64);
    EXPECT_EQ(c.param<int>("l"), 2);
    EXPECT_EQ(c.workers, 1);
    EXPECT_EQ(c.multiplier.family, "heat");
}

TEST(Config, UserValuesOverrideDefaults) {
    const auto c = parse_config(json{{"experiment", "mauceri-check"}, {"params", {{"l", 0}}}, {"multiplier", {{"family", "identity"}}}});
    EXPECT_EQ(c.param<int>("l"), 0);
    EXPECT_EQ(c.multiplier.family, "identity");
}

TEST(Config, RejectsBadInput) {
    EXPECT_THROW(parse_config(json{{"experiment", "nope"}}), ConfigError);
    EXPECT_THROW(parse_config(json{{"experiment", "calibrate"}, {"bogus", 1}}), ConfigError);
    EXPECT_THROW(parse_config(json{{"experiment", "calibrate"}, {"context", {{"N", "many"}}}}), ConfigError);
    EXPECT_THROW(parse_config(json{{"experiment", "calibrate"}, {"multiplier", {{"family", "magic"}}}}), ConfigError);
    EXPECT_THROW(parse_config(json{{"experiment", "calibrate"}, {"workers", 0}}), ConfigError);
    EXPECT_THROW(parse_config(json::array()), ConfigError);
    const auto c = parse_config(json{{"experiment", "mauceri-check"}});
    EXPECT_THROW(c.param<int>("missing"), ConfigError);
    EXPECT_THROW(c.param<int>("side"), ConfigError);
}

TEST(Config, HashIsDeterministicAndSensitive) {
    const auto a = parse_config(json{{"experiment", "rbound"}});
    const auto b = parse_config(json{{"experiment", "rbound"}, {"panel", {{"seed", 7}}}});  // equal to the default
    const auto c = parse_config(json{{"experiment", "rbound"}, {"panel", {{"seed", 8}}}});
    EXPECT_EQ(a.hash_hex(), b.hash_hex());
    EXPECT_NE(a.hash_hex(), c.hash_hex());
    EXPECT_EQ(a.hash_hex().size(), 16u);
}

TEST(Config, ShippedConfigsValidate) {
    for (const auto& e : fs::directory_iterator(fs::path(WEYLAB_SOURCE_DIR) / "configs")) {
        const auto c = load_config(e.path().string());
        if (e.path().stem() == "capacity-error")
            EXPECT_THROW(validate_config(c), CapacityError);
        else
            EXPECT_NO_THROW(validate_config(c)) << e.path();
    }
}

TEST(Registry, SixteenExperiments) {
    EXPECT_EQ(experiment_registry().size(), 16u);
    for (const auto& e : experiment_registry()) {
        EXPECT_NO_THROW(parse_config(json{{"experiment", e.name}})) << e.name;
        EXPECT_FALSE(e.description.empty());
    }
}

TEST(Checks, Relations) {
    EXPECT_TRUE(make_check("a", 1.0, "<", 2.0).pass);
    EXPECT_FALSE(make_check("a", 2.0, "<", 2.0).pass);
    EXPECT_TRUE(make_check("a", 2.0, "<=", 2.0).pass);
    EXPECT_TRUE(make_check("a", 1.5, "in", 1.0, 2.0).pass);
    EXPECT_FALSE(make_check("a", 2.5, "in", 1.0, 2.0).pass);
    EXPECT_FALSE(make_check("a", NAN, ">=", 0.0).pass);
    EXPECT_FALSE(make_check("a", INFINITY, ">", 0.0).pass);
}

TEST(Cli, ListExperiments) {
    Scratch s;
    const auto r = cli("list-experiments", s.dir);
    EXPECT_EQ(r.rc, 0);
    int lines = 0;
    for (char ch : r.out) lines += ch == '\n';
    EXPECT_EQ(lines, 16);
    EXPECT_NE(r.out.find("counterexample-16"), std::string::npos);
}

TEST(Cli, ExitCodes) {
    Scratch s;
    EXPECT_EQ(cli("validate \"" + s.write("bad.json", R"({"experiment":"calibrate","bogus":1})").string() + "\"", s.dir).rc, 2);
    EXPECT_EQ(cli("validate \"" + s.write("broken.json", "{ not json").string() + "\"", s.dir).rc, 2);
    EXPECT_EQ(cli("validate \"" + (fs::path(WEYLAB_SOURCE_DIR) / "configs/capacity-error.json").string() + "\"", s.dir).rc, 3);
    EXPECT_EQ(cli("validate \"" + (s.dir / "absent.json").string() + "\"", s.dir).rc, 5);
    EXPECT_EQ(cli("frobnicate", s.dir).rc, 2);
    const auto ok = cli("validate \"" + (fs::path(WEYLAB_SOURCE_DIR) / "configs/calibrate.json").string() + "\"", s.dir);
    EXPECT_EQ(ok.rc, 0);
    EXPECT_NE(ok.out.find(load_config((fs::path(WEYLAB_SOURCE_DIR) / "configs/calibrate.json").string()).hash_hex()),
              std::string::npos);
}

TEST(Cli, FailingCheckExitsFour) {
    Scratch s;
    // an impossible calibration tolerance
    const auto cfg = s.write("tight.json", R"({"experiment":"calibrate","params":{"tol":0.0}})");
    const auto r = cli("run \"" + cfg.string() + "\" --out \"" + (s.dir / "runs").string() + "\"", s.dir);
    EXPECT_EQ(r.rc, 4);
    const auto rep = read_json(fs::path(first_line(r.out)) / "report.json");
    EXPECT_EQ(rep["status"], "check-failed");
}

TEST(Cli, ExportRiesz) {
    Scratch s;
    const auto path = s.dir / "riesz.bin";
    const auto r = cli("export-matrix riesz --N 32 --out \"" + path.string() + "\"", s.dir);
    ASSERT_EQ(r.rc, 0) << r.out;
    const auto ctx = HermiteContext::build(1, 32, 14.0, 224);
    const auto R = load_operator(path.string(), ctx);
    for (int k = 1; k < 32; ++k) EXPECT_NEAR(std::abs(R.entries()(k - 1, k)), std::sqrt(2.0 * k / (2.0 * k + 1.0)), 1e-14);
    EXPECT_EQ(cli("export-matrix nonsense --out \"" + path.string() + "\"", s.dir).rc, 2);
}

TEST(Cli, MauceriIdentityOrderZero) {
    Scratch s;
    const auto cfg = s.write("m.json", R"({"experiment":"mauceri-check","multiplier":{"family":"identity"},"params":{"l":0}})");
    const auto r = cli("run \"" + cfg.string() + "\" --out \"" + (s.dir / "runs").string() + "\"", s.dir);
    ASSERT_EQ(r.rc, 0) << r.out;
    const auto rep = read_json(fs::path(first_line(r.out)) / "report.json");
    EXPECT_EQ(rep["results"]["constant"].get<double>(), 0.5);
    EXPECT_EQ(rep["status"], "ok");
    EXPECT_TRUE(fs::exists(fs::path(first_line(r.out)) / "mauceri_table.csv"));
    EXPECT_TRUE(fs::exists(fs::path(first_line(r.out)) / "summary.txt"));
}

TEST(Cli, CounterexampleGrowth) {
    Scratch s;
    const auto cfg = s.write("c.json", R"({"experiment":"counterexample-16","params":{"alphas":[16,64]}})");
    const auto r = cli("run \"" + cfg.string() + "\" --out \"" + (s.dir / "runs").string() + "\"", s.dir);
    ASSERT_EQ(r.rc, 0) << r.out;
    const auto rep = read_json(fs::path(first_line(r.out)) / "report.json");
    EXPECT_NEAR(rep["results"]["ratio_64_16"].get<double>(), 2.0, 0.2);
    EXPECT_LT(rep["results"]["max_rel_diff"].get<double>(), 1e-8);
}

TEST(Cli, CalibrateRunIsReproducible) {
    Scratch s;
    const auto cfg = (fs::path(WEYLAB_SOURCE_DIR) / "configs/calibrate.json").string();
    const auto a = cli("run \"" + cfg + "\" --workers 1 --out \"" + (s.dir / "a").string() + "\"", s.dir);
    const auto b = cli("run \"" + cfg + "\" --workers 1 --out \"" + (s.dir / "b").string() + "\"", s.dir);
    ASSERT_EQ(a.rc, 0) << a.out;
    ASSERT_EQ(b.rc, 0) << b.out;
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), {});
    };
    EXPECT_EQ(slurp(fs::path(first_line(a.out)) / "report.json"), slurp(fs::path(first_line(b.out)) / "report.json"));
    EXPECT_EQ(fs::path(first_line(a.out)).filename(), fs::path(first_line(b.out)).filename());
}
