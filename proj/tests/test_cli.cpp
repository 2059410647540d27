#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
};

Run run(const std::string& args) {
    const std::string cmd = std::string(NEXTJUMP_CLI_PATH) + " " + args + " 2>&1";
    Run r;
    FILE* f = popen(cmd.c_str(), "r");
    REQUIRE(f != nullptr);
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, f)) > 0) r.out.append(buf, n);
    const int st = pclose(f);
    r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string first_line(const fs::path& p) {
    std::ifstream in(p);
    std::string l;
    std::getline(in, l);
    return l;
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("nextjump_cli_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& f) const { return (path / f).string(); }
};

}  // namespace

TEST_CASE("scenario outputs carry the documented columns") {
    TempDir d;
    struct Case {
        std::string args, file, header;
    };
    const Case cases[] = {
        {"cavity-w --nbar 4 --kappa 1 --tmax 6", "w.csv", "t,W,D"},
        {"figure1", "fig1.csv", "tau,eps,eps_dr,Y"},
        {"atom3-null --tmax 5 --npoints 51", "a.csv", "t,W,abs_c0,abs_c1,abs_c2,abs_c1_closed"},
        {"cavity-detuned --tmax 2 --npoints 21", "det.csv", "t,W,D,re_alpha,im_alpha"},
        {"heterodyne-sse --tmax 0.2", "sse.csv", "t,re_alpha,im_alpha,re_beta,im_beta,re_T,im_T,log_norm2"},
        {"heterodyne-current --npaths 20 --t 1", "cur.csv", "path,re_I,im_I,abs_I,log_weight"},
        {"telegraph --ntraj 4 --tmax 100", "tel.csv", "t,trajectory,channel,gap,dark"},
        {"transmon-multiscale --tmax 2", "ms.csv", "t,c_g0"},
    };
    for (const auto& c : cases) {
        CAPTURE(c.args);
        const auto r = run(c.args + " --out " + d / c.file);
        REQUIRE(r.code == 0);
        CHECK(first_line(d.path / c.file) == c.header);
        const auto side = nlohmann::json::parse(slurp(d.path / fs::path(c.file).replace_extension(".json")));
        CHECK(side.contains("config"));
        CHECK(side.contains("summary"));
        CHECK(side["summary"].contains("wall_seconds"));
    }
    SUBCASE("default output name") {
        const fs::path cwd = fs::current_path();
        fs::current_path(d.path);
        const auto r = run("cavity-w --npoints 11");
        fs::current_path(cwd);
        CHECK(r.code == 0);
        CHECK(fs::exists(d.path / "w.csv"));
    }
}

TEST_CASE("reruns are byte-identical") {
    TempDir d;
    const std::string a = d / "a.csv", b = d / "b.csv";
    REQUIRE(run("telegraph --epsilon 0.05 --ntraj 200 --tmax 100 --seed 7 --out " + a).code == 0);
    REQUIRE(run("telegraph --epsilon 0.05 --ntraj 200 --tmax 100 --seed 7 --out " + b).code == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK(slurp(a).find('\r') == std::string::npos);
    REQUIRE(run("telegraph --epsilon 0.05 --ntraj 200 --tmax 100 --seed 8 --out " + b).code == 0);
    CHECK(slurp(a) != slurp(b));
}

TEST_CASE("exit codes") {
    TempDir d;
    CHECK(run("cavity-w --kappa -1 --out " + d / "x.csv").code == 2);
    CHECK(run("cavity-w --bogus 3").code == 2);
    CHECK(run("no-such-scenario").code == 2);
    CHECK(run("cavity-w --config " + d / "missing.json").code == 4);
    CHECK(run("cavity-w --out /nonexistent-dir/x.csv").code == 4);
    {
        std::ofstream(d / "bad.json") << "{ not json";
    }
    CHECK(run("cavity-w --config " + d / "bad.json").code == 2);
    {
        std::ofstream(d / "unknown.json") << R"({"scenario": "cavity-w", "warp": 9})";
    }
    CHECK(run("cavity-w --config " + d / "unknown.json").code == 2);
    CHECK(run("validate fast --only 99").code == 2);
}

TEST_CASE("config round trip") {
    TempDir d;
    const auto r1 = run("cavity-w --nbar 9 --seed 3 --out " + d / "w.csv" + " --dump-config");
    REQUIRE(r1.code == 0);
    {
        std::ofstream(d / "c.json") << r1.out;
    }
    const auto r2 = run("cavity-w --config " + d / "c.json" + " --dump-config");
    REQUIRE(r2.code == 0);
    CHECK(r1.out == r2.out);
    const auto j = nlohmann::json::parse(r1.out);
    CHECK(j["nbar"] == 9.0);
    CHECK(j["seed"] == 3);
    CHECK(j["scenario"] == "cavity-w");
    SUBCASE("flags override the file") {
        const auto r3 = run("cavity-w --config " + d / "c.json" + " --nbar 16 --dump-config");
        CHECK(nlohmann::json::parse(r3.out)["nbar"] == 16.0);
    }
    SUBCASE("config for another scenario is refused") {
        CHECK(run("figure1 --config " + d / "c.json").code == 2);
    }
}

TEST_CASE("validate fault injection isolates the erfc checks") {
    const auto ok = run("validate fast --only 1 13");
    CHECK(ok.code == 0);
    const auto bad = run("validate fast --only 1 13 --inject-erfc-fault");
    CHECK(bad.code == 1);
    CHECK(bad.out.find("[PASS] criterion  1") != std::string::npos);
    CHECK(bad.out.find("[FAIL] criterion 13") != std::string::npos);
}
