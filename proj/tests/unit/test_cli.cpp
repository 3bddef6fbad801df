#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using covar::cli::run;
using covar::testing::read_file;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result invoke(std::vector<std::string> args) {
    std::ostringstream o;
    std::ostringstream e;
    const int code = run(args, o, e);
    return {code, o.str(), e.str()};
}

// Fresh scratch directory per test case.
fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("covar_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

// File content without the '#' provenance lines.
std::string body(const fs::path& p) {
    std::ifstream in(p);
    std::string out;
    std::string line;
    while (std::getline(in, line))
        if (line.empty() || line[0] != '#') out += line + "\n";
    return out;
}

void write(const fs::path& p, const std::string& text) {
    std::ofstream(p) << text;
}

}  // namespace

TEST_CASE("limits reports catalog levels", "[cli][limits]") {
    const Result r = invoke({"limits", "--family", "clayton", "--theta", "1", "--q", "0.5", "--p", "0.1", "--format", "json"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("\"v_qp_asymptotic\": 0.1") != std::string::npos);
    CHECK(r.out.find("\"v_qp_exact\": 0.0909090909") != std::string::npos);
    CHECK(r.out.find("\"regime\": \"attraction\"") != std::string::npos);

    const Result lim = invoke({"limits", "--kappa", "2", "--xi", "0"});
    REQUIRE(lim.code == 0);
    CHECK(lim.out.find("delta_covar_limit") != std::string::npos);

    const Result table = invoke({"limits", "--family", "ips*", "--theta", "1"});
    CHECK(table.code == 0);
    CHECK(table.out.find("undefined") != std::string::npos);
}

TEST_CASE("usage errors exit 2", "[cli][exit]") {
    CHECK(invoke({}).code == 2);
    CHECK(invoke({"limits"}).code == 2);
    CHECK(invoke({"limits", "--family", "clayton", "--theta", "-3"}).code == 2);
    CHECK(invoke({"limits", "--family", "nosuch", "--theta", "1"}).code == 2);
    CHECK(invoke({"simulate", "--family", "clayton", "--theta", "1", "--k-rule", "bogus"}).code == 2);
    CHECK(invoke({"estimate"}).code == 2);
    CHECK(invoke({"--help"}).code == 0);
}

TEST_CASE("input problems exit 3 or 4", "[cli][exit]") {
    const fs::path dir = scratch("input");
    CHECK(invoke({"estimate", "--input", (dir / "missing.csv").string()}).code == 3);

    write(dir / "bad.csv", "u,v\n0.1,0.2\n0.3,abc\n");
    const Result bad = invoke({"estimate", "--input", (dir / "bad.csv").string()});
    CHECK(bad.code == 4);
    CHECK(bad.err.find("line 3") != std::string::npos);

    write(dir / "ragged.csv", "u,v\n0.1,0.2\n0.3\n");
    CHECK(invoke({"estimate", "--input", (dir / "ragged.csv").string()}).code == 4);

    write(dir / "short.csv", "u,v\n0.1,0.2\n0.3,0.4\n");
    CHECK(invoke({"estimate", "--input", (dir / "short.csv").string(), "--k", "5"}).code == 4);

    write(dir / "dates.csv", "date,value_i,value_s\n2020-01-02,0.1,0.2\n2020-13-01,0.1,0.2\n");
    CHECK(invoke({"analyze", "--input", (dir / "dates.csv").string(), "--out", (dir / "a").string()}).code == 4);

    // Output directory below a regular file cannot be created.
    write(dir / "file", "x");
    const Result io = invoke({"simulate", "--family", "clayton", "--theta", "1", "--deterministic-only", "--out",
                              (dir / "file" / "sub").string()});
    CHECK(io.code == 3);
}

TEST_CASE("a run with no usable window exits 5", "[cli][exit]") {
    const fs::path dir = scratch("flat");
    using namespace std::chrono;
    sys_days day{year_month_day{year{2001}, month{1}, std::chrono::day{1}}};
    std::ostringstream csv;
    csv << "date,value_i,value_s\n";
    for (int t = 0; t < 300; ++t, day += days{1}) {
        const year_month_day ymd{day};
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                      static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
        csv << buf << ",0,0\n";
    }
    write(dir / "flat.csv", csv.str());
    const Result r = invoke({"analyze", "--input", (dir / "flat.csv").string(), "--window", "300", "--out",
                             (dir / "out").string()});
    CHECK(r.code == 5);
    CHECK(fs::exists(dir / "out" / "report.csv"));
}

TEST_CASE("config file values are overridden by flags", "[cli][config]") {
    const fs::path dir = scratch("config");
    write(dir / "run.cfg", "family = clayton\ntheta=1\nq = 0.5\np=0.1\nformat=json\n");
    const Result r = invoke({"limits", "--config", (dir / "run.cfg").string()});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("\"v_qp_exact\": 0.0909090909") != std::string::npos);
    const Result o = invoke({"limits", "--config", (dir / "run.cfg").string(), "--p", "0.05"});
    REQUIRE(o.code == 0);
    CHECK(o.out.find("\"p\": 0.05") != std::string::npos);

    write(dir / "bad.cfg", "nosuchkey=1\n");
    CHECK(invoke({"limits", "--config", (dir / "bad.cfg").string()}).code == 2);
    CHECK(invoke({"limits", "--config", (dir / "none.cfg").string()}).code == 3);
}

TEST_CASE("simulate writes deterministic reports", "[cli][simulate]") {
    const fs::path dir = scratch("simulate");
    const std::vector<std::string> base{"simulate", "--family", "frank", "--theta", "3", "--n", "400", "--reps", "2",
                                        "--seed", "5"};
    auto with_out = [&](const std::string& sub, const std::string& threads) {
        auto a = base;
        a.insert(a.end(), {"--threads", threads, "--out", (dir / sub).string()});
        return a;
    };
    REQUIRE(invoke(with_out("a", "1")).code == 0);
    REQUIRE(invoke(with_out("b", "3")).code == 0);
    const std::string report = read_file((dir / "a" / "report.csv").string());
    CHECK(report.rfind("# schema_version=1\n", 0) == 0);
    CHECK(report.find("kind,n,rep,k,seed,p,metric,value") != std::string::npos);
    CHECK(report == read_file((dir / "b" / "report.csv").string()));
    CHECK(read_file((dir / "a" / "summary.json").string()) == read_file((dir / "b" / "summary.json").string()));

    const Result det = invoke({"simulate", "--family", "clayton", "--theta", "1", "--deterministic-only", "--out",
                               (dir / "det").string()});
    REQUIRE(det.code == 0);
    const std::string d = read_file((dir / "det" / "report.csv").string());
    CHECK(d.find("theory") != std::string::npos);
    CHECK(d.find("\nestimate,") == std::string::npos);
}

TEST_CASE("synth and estimate round trip", "[cli][estimate]") {
    const fs::path dir = scratch("estimate");
    const std::string pair = (dir / "pair.csv").string();
    REQUIRE(invoke({"synth", "--family", "clayton", "--theta", "2", "--n", "3000", "--seed", "3", "--output", pair}).code == 0);
    const std::string text = read_file(pair);
    CHECK(text.find("date,value_i,value_s") != std::string::npos);
    REQUIRE(invoke({"synth", "--family", "clayton", "--theta", "2", "--n", "3000", "--seed", "3", "--output",
                    (dir / "again.csv").string()}).code == 0);
    CHECK(read_file((dir / "again.csv").string()) == text);

    const Result e = invoke({"estimate", "--input", pair, "--k", "100", "--out", (dir / "est").string()});
    REQUIRE(e.code == 0);
    const std::string json = read_file((dir / "est" / "summary.json").string());
    CHECK(json.find("\"regime\": \"attraction\"") != std::string::npos);
    CHECK(json.find("\"r_hat\"") != std::string::npos);

    // Comonotone pairs sit at the comonotone floor.
    std::ostringstream como;
    como << "u,v\n";
    for (int i = 1; i <= 2000; ++i) como << i << "," << 2 * i << "\n";
    write(dir / "como.csv", como.str());
    const Result c = invoke({"estimate", "--input", (dir / "como.csv").string()});
    REQUIRE(c.code == 0);
    CHECK(c.out.find("attraction") != std::string::npos);
}

TEST_CASE("analyze accepts wide and long layouts", "[cli][analyze]") {
    const fs::path dir = scratch("analyze");
    const std::string pair = (dir / "pair.csv").string();
    REQUIRE(invoke({"synth", "--theta", "2", "--n", "1100", "--seed", "9", "--output", pair}).code == 0);

    // Rewrite the wide file in long form.
    std::ifstream in(pair);
    std::ostringstream lng;
    lng << "date,series,value\n";
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("date", 0) == 0) continue;
        const auto a = line.find(',');
        const auto b = line.find(',', a + 1);
        lng << line.substr(0, a) << ",i," << line.substr(a + 1, b - a - 1) << "\n";
        lng << line.substr(0, a) << ",s," << line.substr(b + 1) << "\n";
    }
    write(dir / "long.csv", lng.str());

    const std::vector<std::string> opts{"--window", "1000", "--step", "100", "--marginal", "passthrough"};
    auto args = [&](const std::string& input, const std::string& out) {
        std::vector<std::string> a{"analyze", "--input", input, "--out", (dir / out).string()};
        a.insert(a.end(), opts.begin(), opts.end());
        return a;
    };
    REQUIRE(invoke(args(pair, "wide")).code == 0);
    REQUIRE(invoke(args((dir / "long.csv").string(), "long")).code == 0);
    const std::string wide = body(dir / "wide" / "series.csv");
    CHECK(wide.find("window_id,date,t,var,covar") != std::string::npos);
    CHECK(wide == body(dir / "long" / "series.csv"));
    const std::string report = read_file((dir / "wide" / "report.csv").string());
    CHECK(report.find("\n1,ok,") != std::string::npos);

    CHECK(invoke({"analyze", "--input", pair, "--window", "5000", "--out", (dir / "big").string()}).code == 4);
}
