#include "frd/report.hpp"

#include <doctest.h>
#include <json.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const fs::path root = fs::temp_directory_path() / "frd-cli";

struct Result {
    int status = -1;
    std::string out;
    std::string err;
};

Result run(const std::string& args) {
    fs::create_directories(root);
    const fs::path o = root / "stdout.txt", e = root / "stderr.txt";
    const std::string cmd = std::string(FRD_BINARY) + " " + args + " >" + o.string() + " 2>" + e.string();
    const int raw = std::system(cmd.c_str());
    Result r;
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = frd::read_text(o.string());
    r.err = frd::read_text(e.string());
    return r;
}

// small configuration: one compared scale, proxy at n = 2
std::string small_config(const std::string& name, const std::string& extra = "") {
    const fs::path dir = root / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    const fs::path p = dir / "run.conf";
    frd::write_text(p.string(), "n_max = 1\nn_ref = 2\na_values = 0, 1, 4\nk_orders = 0, 1\nquad_panels = 2\n"
                                "quad_nodes = 4\nquad_tail_panels = 1\noutput_dir = " +
                                    (dir / "out").string() + "\n" + extra);
    return p.string();
}

std::map<std::string, std::string> tree(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& f : fs::recursive_directory_iterator(dir))
        if (f.is_regular_file() && f.path().filename() != "run_stats.json")
            files[fs::relative(f.path(), dir).string()] = frd::read_text(f.path().string());
    return files;
}

nlohmann::json stats(const fs::path& dir, const std::string& cmd) {
    return nlohmann::json::parse(frd::read_text((dir / cmd / "run_stats.json").string()));
}

} // namespace

TEST_CASE("decompose is deterministic and the second run hits the cache") {
    const std::string conf = small_config("determinism");
    const fs::path base = fs::path(conf).parent_path(), cache = base / "cache";
    const Result a = run("--config " + conf + " --cache-dir " + cache.string() + " decompose --output-dir " +
                         (base / "one").string());
    REQUIRE(a.status == 0);
    CHECK(stats(base / "one", "decompose")["dirichlet_solves"].get<long>() > 0);
    const Result b = run("--config " + conf + " --cache-dir " + cache.string() + " decompose --output-dir " +
                         (base / "two").string());
    REQUIRE(b.status == 0);
    CHECK(stats(base / "two", "decompose")["dirichlet_solves"].get<long>() == 0);
    const auto t1 = tree(base / "one"), t2 = tree(base / "two");
    CHECK(t1.size() > 3);
    CHECK(t1 == t2);
    CHECK(t1.count("decompose/residuals.csv") == 1);
    CHECK(t1.count("decompose/gamma_a1_n1.kernel.frd") == 1);
}

TEST_CASE("verify passes on the small configuration and reports the a = 0 mass") {
    const std::string conf = small_config("verify");
    const Result r = run("--config " + conf + " verify");
    CHECK(r.status == 0);
    const auto j = nlohmann::json::parse(frd::read_text((fs::path(conf).parent_path() / "out/verify/checks.json").string()));
    CHECK(j["all_pass"].get<bool>());
    int unit = 0;
    for (const auto& c : j["checks"])
        if (c["name"] == "poisson-mass-unit") {
            ++unit;
            CHECK(c["measured"].get<double>() <= 1e-10);
        }
    CHECK(unit > 0);
}

TEST_CASE("an injected range fault fails verification") {
    const std::string conf = small_config("fault");
    const Result r = run("--config " + conf + " verify --inject-fault");
    CHECK(r.status == 1);
    CHECK(r.out.find("FAIL range-gamma") != std::string::npos);
}

TEST_CASE("verify without cached tables names the missing keys") {
    const std::string conf = small_config("missing");
    const fs::path empty = fs::path(conf).parent_path() / "empty-cache";
    fs::create_directories(empty);
    const Result r = run("--config " + conf + " --cache-dir " + empty.string() + " verify --require-cached");
    CHECK(r.status == 3);
    CHECK(r.err.find("poisson") != std::string::npos);
    CHECK(r.err.find("n1") != std::string::npos);
}

TEST_CASE("configuration errors exit with status 2") {
    const std::string bad = small_config("bad", "colour = blue\n");
    const Result r = run("--config " + bad + " verify");
    CHECK(r.status == 2);
    CHECK(r.err.find("colour") != std::string::npos);
    CHECK(run("frobnicate").status == 2);
    CHECK(run("--config /nonexistent/file.conf verify").status == 2);
    const Result cap = run("--config " + small_config("cap", "memory_cap_mb = 0.5\n") + " decompose");
    CHECK(cap.status == 2);
    CHECK(cap.err.find("refusing") != std::string::npos);
    const Result dim = run("--config " + small_config("dim", "d = 2\n") + " verify");
    CHECK(dim.status == 2);
    CHECK(dim.err.find("override") != std::string::npos);
}

TEST_CASE("export writes plot-ready slices") {
    const std::string conf = small_config("export");
    const Result r = run("--config " + conf + " export --what kernels");
    REQUIRE(r.status == 0);
    int kernels = 0, symbols = 0;
    for (const auto& f : fs::directory_iterator(fs::path(conf).parent_path() / "out/export")) {
        const std::string name = f.path().filename().string();
        kernels += name.find("_kernel.csv") != std::string::npos;
        symbols += name.find("_symbol.csv") != std::string::npos;
    }
    CHECK(kernels > 0);
    CHECK(symbols == 0);
}

TEST_CASE("decompose to n_max = 3 at a = 1 has decreasing residuals") {
    const fs::path dir = root / "deep";
    fs::remove_all(dir);
    frd::write_text((dir / "run.conf").string(), "n_max = 3\nn_ref = 4\na_values = 1\noutput_dir = " + (dir / "out").string() + "\n");
    REQUIRE(run("--config " + (dir / "run.conf").string() + " decompose").status == 0);
    std::istringstream in(frd::read_text((dir / "out/decompose/residuals.csv").string()));
    std::string line;
    std::getline(in, line);
    CHECK(line == "a,N,residual,tail_bound");
    double prev = INFINITY;
    int rows = 0;
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string a, N, res, tail;
        std::getline(ss, a, ',');
        std::getline(ss, N, ',');
        std::getline(ss, res, ',');
        std::getline(ss, tail, ',');
        CHECK(std::stoi(N) == rows);
        CHECK(std::stod(res) < prev);
        CHECK(std::stod(res) < std::stod(tail));
        prev = std::stod(res);
        ++rows;
    }
    CHECK(rows == 4);
}

TEST_CASE("rates rows cover every configured (a, k, n) and re-parse exactly") {
    const fs::path dir = root / "rates";
    fs::remove_all(dir);
    frd::write_text((dir / "run.conf").string(),
                    "n_max = 3\nn_ref = 4\na_values = 0, 1\nk_orders = 0\noutput_dir = " + (dir / "out").string() + "\n");
    const Result r = run("--config " + (dir / "run.conf").string() + " rates");
    REQUIRE(r.status == 0);
    const std::string csv = frd::read_text((dir / "out/rates/rates.csv").string());
    const auto rows = frd::parse_rates_csv(csv);
    CHECK(frd::rates_csv(rows) == csv);
    for (double a : {0.0, 1.0})
        for (int n = 1; n <= 3; ++n) {
            bool found = false;
            for (const auto& row : rows)
                if (row.quantity == "gamma-vs-proxy:L1_k" && row.a_or_alpha == a && row.n == n && row.k == 0) {
                    found = true;
                    CHECK(row.fitted_rate <= -0.35);
                }
            CHECK(found);
        }
    const auto j = nlohmann::json::parse(frd::read_text((dir / "out/rates/rates.json").string()));
    CHECK(j["metadata"]["mollifier"] == "bump");
    CHECK(j["metadata"]["torus_factor"] == 16);
}
