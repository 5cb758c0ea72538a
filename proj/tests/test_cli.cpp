#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "json.hpp"

#include "ngnn/cli.hpp"
#include "ngnn/errors.hpp"
#include "ngnn/graph.hpp"

using namespace ngnn;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

Run run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli_dispatch(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("ngnn_cli_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

int run_binary(const std::string& args, std::string* captured = nullptr) {
    const std::string cmd = std::string("\"") + NGNN_CLI_PATH + "\" " + args + " 2>/dev/null";
    FILE* pipe = ::popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string text;
    char buf[4096];
    while (const std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) text.append(buf, n);
    const int status = ::pclose(pipe);
    if (captured) *captured = text;
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST_CASE("parse_int_list") {
    CHECK(parse_int_list("3..6,10") == std::vector<int>{3, 4, 5, 6, 10});
    CHECK(parse_int_list("7") == std::vector<int>{7});
    CHECK_THROWS_AS(parse_int_list(""), InvalidInput);
    CHECK_THROWS_AS(parse_int_list("x"), InvalidInput);
    CHECK_THROWS_AS(parse_int_list("5..3"), InvalidInput);
    CHECK_THROWS_AS(parse_int_list("1,,2"), InvalidInput);
}

TEST_CASE("usage errors") {
    CHECK(run({}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({"wl", "--a", "x"}).code == 2);
    CHECK(run({"forward", "--graph", "x", "--mode", "bogus"}).code == 2);
    const auto help = run({"--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("simulate") != std::string::npos);
    CHECK(run({"wl", "--a", "/nonexistent/a", "--b", "/nonexistent/b"}).code == 1);
}

TEST_CASE("generate and wl") {
    TempDir dir;
    CHECK(run({"generate", "--builtin", "two_triangles", "--out", dir / "tt.txt"}).code == 0);
    CHECK(run({"generate", "--builtin", "hexagon", "--out", dir / "hex.txt"}).code == 0);
    CHECK(read_graph_file(dir / "tt.txt") == builtin(Builtin::two_triangles));

    const auto r = run({"wl", "--a", dir / "tt.txt", "--b", dir / "hex.txt"});
    CHECK(r.code == 0);
    CHECK(r.out.rfind("indistinguishable\n", 0) == 0);

    CHECK(run({"generate", "--cycle-pair", "4", "--which", "1", "--out", dir / "c8.txt"}).code == 0);
    const auto d = run({"wl", "--a", dir / "tt.txt", "--b", dir / "c8.txt"});
    CHECK(d.out.rfind("distinguishable\n", 0) == 0);

    const auto reg = run({"generate", "--regular", "10", "--degree", "3", "--seed", "4"});
    CHECK(reg.code == 0);
    CHECK(parse_graph(reg.out) == random_regular(10, 3, 4));
    CHECK(run({"generate"}).code == 2);
    CHECK(run({"generate", "--builtin", "nope"}).code == 1);
    CHECK(run({"generate", "--regular", "9", "--degree", "3"}).code == 1);
}

TEST_CASE("extract") {
    TempDir dir;
    run({"generate", "--builtin", "two_triangles", "--out", dir / "tt.txt"});
    const auto r = run({"extract", "--graph", dir / "tt.txt", "--root", "0", "--height", "1", "--de", "spd,resistance"});
    REQUIRE(r.code == 0);
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    CHECK(line == "3 3");
    for (int i = 0; i < 3; ++i) std::getline(in, line);
    std::getline(in, line);
    CHECK(line == "local,origin,dist,de0,de1,de2,de3,de4");
    std::getline(in, line);
    CHECK(line == "0,0,0,1,1,0,0,0");
    std::getline(in, line);
    CHECK(line.rfind("1,1,1,1,0,1,0,0.666666666666666", 0) == 0);
    CHECK(run({"extract", "--graph", dir / "tt.txt", "--root", "9", "--height", "1"}).code == 1);
}

TEST_CASE("forward") {
    TempDir dir;
    run({"generate", "--builtin", "two_triangles", "--out", dir / "tt.txt"});
    run({"generate", "--builtin", "hexagon", "--out", dir / "hex.txt"});
    const std::vector<std::string> common{"--mode", "plain", "--layers", "2", "--hidden", "4", "--seed", "1"};
    auto args = [&](const std::string& g) {
        std::vector<std::string> a{"forward", "--graph", g};
        a.insert(a.end(), common.begin(), common.end());
        return a;
    };
    const auto a = run(args(dir / "tt.txt")), b = run(args(dir / "hex.txt"));
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(std::count(a.out.begin(), a.out.end(), ',') == 3);

    const auto na = run({"forward", "--graph", dir / "tt.txt", "--height", "1", "--layers", "1", "--nodes"});
    const auto nb = run({"forward", "--graph", dir / "hex.txt", "--height", "1", "--layers", "1", "--nodes"});
    CHECK(na.code == 0);
    CHECK(na.out != nb.out);
    CHECK(std::count(na.out.begin(), na.out.end(), '\n') == 7);
}

TEST_CASE("train") {
    TempDir dir;
    const auto r = run({"train", "--task", "exp-analog", "--ks", "3,4", "--copies", "2", "--height", "2",
                        "--layers", "1", "--hidden", "4", "--epochs", "3", "--out", dir / "report.json"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(slurp(dir / "report.json"));
    CHECK(j["loss_curve"].size() == 3);
    CHECK(j["metric"] == "accuracy");
    CHECK(j["epochs"] == 3);
    CHECK(j["diverged"] == false);
    CHECK(j["config"]["height"] == 2);
    CHECK(j["hyper"]["lr"] == 0.01);
    CHECK(r.err.find("accuracy") != std::string::npos);
}

TEST_CASE("simulate") {
    TempDir dir;
    const auto r = run({"simulate", "--ns", "10,20", "--hs", "1..9", "--graphs", "4", "--out", dir / "sim.csv"});
    REQUIRE(r.code == 0);
    const auto csv = slurp(dir / "sim.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 19);
    CHECK(csv.rfind("n,h,frac_indist_node_pairs,frac_indist_graph_pairs,h_lower,h_upper,seconds\n", 0) == 0);
    const auto meta = nlohmann::json::parse(slurp(dir / "sim.csv.meta.json"));
    CHECK(meta["graphs_per_n"] == 4);
    CHECK(meta["rows"] == 18);
    CHECK(run({"simulate", "--ns", "10", "--hs", "1", "--graphs", "4"}).code == 2);
    CHECK(run({"simulate", "--ns", "11", "--hs", "1", "--graphs", "4", "--out", dir / "x.csv"}).code == 1);
}

TEST_CASE("bench") {
    const auto r = run({"bench", "--ns", "40,80", "--height", "1", "--layers", "1", "--repeats", "1"});
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind("n,c,d,visited_nodes,seconds\n", 0) == 0);
    CHECK(r.out.find("# slope,") != std::string::npos);
}

TEST_CASE("binary entry point") {
    CHECK(run_binary("") == 2);
    CHECK(run_binary("nonsense") == 2);
    std::string text;
    CHECK(run_binary("generate --builtin hexagon", &text) == 0);
    CHECK(text == serialize_graph(builtin(Builtin::hexagon)));
}
