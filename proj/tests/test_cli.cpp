#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

namespace {

const char* cli = NVM_CLI_PATH;

int run(const std::string& args) {
    const std::string cmd = std::string(cli) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TmpDir {
    std::string path;
    TmpDir() {
        char tmpl[] = "/tmp/nvm_cli_XXXXXX";
        path = mkdtemp(tmpl);
    }
    std::string file(const std::string& name) const { return path + "/" + name; }
};

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("simulate is byte deterministic") {
    TmpDir dir;
    const std::string base = "simulate --family complete --n 2 --eps 1.0 --t 1000 --seed 1 --out ";
    REQUIRE(run(base + dir.file("a")) == 0);
    REQUIRE(run(base + dir.file("b")) == 0);
    const std::string a = slurp(dir.file("a.bits"));
    CHECK(!a.empty());
    CHECK(a == slurp(dir.file("b.bits")));
}

TEST_CASE("oracle prints the closed form value") {
    TmpDir dir;
    REQUIRE(run("oracle --family complete --n 5 --eps 0.3 --d 2 --out " + dir.file("o.csv")) ==
            0);
    const std::string csv = slurp(dir.file("o.csv"));
    CHECK(csv.find("graph,epsilon,quantity,value,stderr,source") == 0);  // header row first
    CHECK(csv.find("0.178598") != std::string::npos);                    // p2(K5, 0.3)
    CHECK(csv.find("closed_form") != std::string::npos);
}

TEST_CASE("sweep emits a flagged sign change for a genuinely crossing pair") {
    TmpDir dir;
    REQUIRE(run("sweep --a bipartite:3,1 --b bipartite:2,2 --d 2 --grid 0.05:0.95:0.05 --out " +
                dir.file("s.csv")) == 0);
    const std::string csv = slurp(dir.file("s.csv"));
    CHECK(csv.find("sign_change_next") != std::string::npos);
    CHECK(csv.find(",1\n") != std::string::npos);  // at least one flagged row

    REQUIRE(run("sweep --a complete:3 --b complete:5 --d 2 --grid 0.05:0.95:0.05 --out " +
                dir.file("k.csv")) == 0);
    CHECK(slurp(dir.file("k.csv")).find(",1\n") == std::string::npos);  // strictly ordered
}

TEST_CASE("stats runs on a stored trace") {
    TmpDir dir;
    REQUIRE(run("simulate --family complete:5 --eps 0.3 --t 200000 --seed 9 --out " +
                dir.file("tr")) == 0);
    REQUIRE(run("stats --trace " + dir.file("tr") + " --d 2 --windows 2 --out " +
                dir.file("st.csv")) == 0);
    const std::string csv = slurp(dir.file("st.csv"));
    CHECK(csv.find("plain(2)") != std::string::npos);
    CHECK(csv.find("pd_hat(2)") != std::string::npos);
    CHECK(csv.find("window(00)") != std::string::npos);
}

TEST_CASE("jsonl format is supported") {
    TmpDir dir;
    REQUIRE(run("oracle --family cycle:4 --eps 0.5 --d 2 --format jsonl --out " +
                dir.file("o.jsonl")) == 0);
    const std::string text = slurp(dir.file("o.jsonl"));
    CHECK(text.find("\"value\"") != std::string::npos);
    CHECK(text.find("pair_chain") != std::string::npos);
}

TEST_CASE("validation failures exit with code 2") {
    CHECK(run("oracle --family complete --n 1 --eps 0.3 --d 2 --out /tmp/nvm_unused.csv") == 2);
    CHECK(run("simulate --family lattice:2 --eps 0.5 --t 100 --out /tmp/nvm_unused") == 2);
    CHECK(run("nosuchcommand") == 2);
    CHECK(run("oracle --nosuchflag 3") == 2);
}

TEST_CASE("capacity failures exit with code 3") {
    CHECK(run("simulate --family complete:2 --eps 0.5 --t 8589934593 --out /tmp/nvm_unused") ==
          3);
}

TEST_CASE("stored edge lists feed back into the pipeline") {
    TmpDir dir;
    REQUIRE(run("gen --family random:10:4 --out " + dir.file("g.edges")) == 0);
    REQUIRE(run("simulate --family file:" + dir.file("g.edges") +
                " --eps 0.4 --t 5000 --seed 2 --out " + dir.file("tr")) == 0);
    REQUIRE(run("oracle --family file:" + dir.file("g.edges") + " --eps 0.4 --d 2 --out " +
                dir.file("o.csv")) == 0);
    CHECK(slurp(dir.file("o.csv")).find("pair_chain") != std::string::npos);
}

TEST_CASE("lattice oracle uses the requested replica budget") {
    TmpDir dir;
    REQUIRE(run("oracle --family lattice:2 --eps 0.2 --d 2 --replicas 20000 --seed 3 --out " +
                dir.file("lat.csv")) == 0);
    const std::string csv = slurp(dir.file("lat.csv"));
    CHECK(csv.find("monte_carlo") != std::string::npos);
    CHECK(csv.find("lattice:2") != std::string::npos);
}

TEST_CASE("manifest rerun reproduces outputs byte for byte") {
    TmpDir dir;
    const std::string out = dir.file("d.csv");
    REQUIRE(run("distinguish --a complete:6 --b complete:8 --eps 0.3 --d 2 --t 131072 --seed 5 "
                "--out " + out) == 0);
    const std::string first = slurp(out);
    const std::string manifest = slurp(out + ".manifest.json");
    CHECK(manifest.find("\"command\": \"distinguish\"") != std::string::npos);
    std::remove(out.c_str());
    REQUIRE(run("--config " + out + ".manifest.json") == 0);
    CHECK(slurp(out) == first);
}

TEST_CASE("config values are overridden by flags") {
    TmpDir dir;
    const std::string cfg = dir.file("cfg.json");
    {
        std::ofstream out(cfg);
        out << R"({"command":"oracle","family":"complete:5","eps":0.3,"d":2,"out":")"
            << dir.file("o1.csv") << R"("})";
    }
    REQUIRE(run("--config " + cfg) == 0);
    CHECK(slurp(dir.file("o1.csv")).find("complete:5") != std::string::npos);
    REQUIRE(run("oracle --config " + cfg + " --family complete:7 --out " + dir.file("o2.csv")) ==
            0);
    CHECK(slurp(dir.file("o2.csv")).find("complete:7") != std::string::npos);
}

TEST_CASE("unknown config fields are rejected") {
    TmpDir dir;
    const std::string cfg = dir.file("bad.json");
    {
        std::ofstream out(cfg);
        out << R"({"command":"oracle","family":"complete:5","bogus":1})";
    }
    CHECK(run("--config " + cfg) == 2);
}

TEST_SUITE_END();
