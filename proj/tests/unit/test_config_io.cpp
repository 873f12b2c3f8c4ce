#include "frd/cache.hpp"
#include "frd/config.hpp"
#include "frd/errors.hpp"
#include "frd/fluctuation.hpp"
#include "frd/report.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

using namespace frd;
namespace fs = std::filesystem;

namespace {

std::string scratch_dir(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("frd-io-" + name);
    fs::remove_all(p);
    return p.string();
}

} // namespace

TEST_CASE("config parsing") {
    const RunConfig c = parse_config("# comment\n d = 3\nL=4 # block scale\n\na_values = 0, 1.5,4\nk_orders=0,1\n"
                                     "n_max = 2\nn_ref = 3\ntight_range = false\nalpha = 0.5\n");
    CHECK(c.L == 4);
    CHECK(c.n_max == 2);
    CHECK(c.a_values == std::vector<double>{0.0, 1.5, 4.0});
    CHECK(c.k_orders == std::vector<int>{0, 1});
    REQUIRE(c.alpha.has_value());
    CHECK(*c.alpha == 0.5);
    CHECK_NOTHROW(c.validate());
    CHECK(parse_config("p = 3\n").L == 8);
    CHECK_FALSE(parse_config("alpha = none\n").alpha.has_value());
}

TEST_CASE("config errors name the offending line or key") {
    auto msg = [](const std::string& text) {
        try {
            parse_config(text);
        } catch (const ConfigurationError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(msg("d = 3\nbogus = 1\n").find("line 2") != std::string::npos);
    CHECK(msg("d = 3\nbogus = 1\n").find("bogus") != std::string::npos);
    CHECK(msg("d = 3\nd = 4\n").find("duplicate") != std::string::npos);
    CHECK(msg("novalue\n").find("line 1") != std::string::npos);
    CHECK(msg("n_max = two\n").find("n_max") != std::string::npos);
    CHECK(msg("tight_range = maybe\n").find("tight_range") != std::string::npos);
    CHECK(msg("a_values = 1, x\n").find("a_values") != std::string::npos);
}

TEST_CASE("config validation") {
    RunConfig c;
    CHECK_NOTHROW(c.validate());
    c.torus_factor = 12;
    CHECK_THROWS_AS(c.validate(), ConfigurationError);
    c = RunConfig{};
    c.n_ref = c.n_max;
    CHECK_THROWS_AS(c.validate(), ConfigurationError);
    c = RunConfig{};
    c.alpha = 2.0;
    CHECK_THROWS_AS(c.validate(), ParameterError);
    c = RunConfig{};
    c.a_values = {-1.0};
    CHECK_THROWS_AS(c.validate(), ParameterError);
    c = RunConfig{};
    c.d = 2;
    CHECK_THROWS_AS(c.validate(), ParameterError);
    c.allow_low_dimension = true;
    c.alpha = 1.0;
    CHECK_NOTHROW(c.validate());
    c = RunConfig{};
    c.L = 3;
    CHECK_THROWS_AS(c.validate(), ParameterError);
    c = RunConfig{};
    c.tight_range = true;
    CHECK_THROWS_AS(c.validate(), ConfigurationError);
    c.n_max = 4;
    c.n_ref = 5;
    CHECK_NOTHROW(c.validate());
    CHECK(RunConfig{}.decay_n() == 2);
}

TEST_CASE("canonical config text parses back to itself") {
    RunConfig c;
    c.a_values = {0.0, 0.1, 1.0 / 3.0};
    c.alpha = 1.25;
    c.cache_dir = "/tmp/some cache";
    c.seed = 99;
    c.mass_term = MassTerm::unit;
    c.tight_range = true;
    c.n_max = 4;
    c.n_ref = 5;
    const RunConfig back = parse_config(c.to_text());
    CHECK(back.to_text() == c.to_text());
    CHECK(back.a_values == c.a_values);
    CHECK(back.mass_term == MassTerm::unit);
    CHECK(back.cache_dir == c.cache_dir);
}

TEST_CASE("cost estimate refuses oversized runs") {
    RunConfig c;
    CHECK_NOTHROW(enforce_memory_cap(c));
    const CostEstimate e = estimate_cost(c);
    CHECK(e.peak_bytes > 0.0);
    CHECK(e.report().find("MiB") != std::string::npos);
    c.n_max = 5;
    c.n_ref = 6;
    try {
        enforce_memory_cap(c);
        FAIL("expected a refusal");
    } catch (const ConfigurationError& err) {
        CHECK(std::string(err.what()).find("proxy grid") != std::string::npos);
    }
    c = RunConfig{};
    c.memory_cap_mb = 1.0;
    CHECK_THROWS_AS(enforce_memory_cap(c), ConfigurationError);
}

TEST_CASE("cache encoding round trip and integrity") {
    CacheHeader h;
    h.kind = CacheKind::kernel;
    h.n = 3;
    h.m = 2;
    h.geometry = 3;
    h.a = 0.1;
    std::vector<double> payload{1.0, -0.0, std::numeric_limits<double>::denorm_min(), 1e308, M_PI};
    const auto bytes = encode_cache(h, payload);
    CHECK(bytes.size() == 4 + 7 * 4 + 8 + 8 + 8 * payload.size() + 8);
    CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "FRD1");
    // little-endian a
    std::uint64_t a_bits = 0;
    for (int i = 0; i < 8; ++i) a_bits |= static_cast<std::uint64_t>(bytes[32 + i]) << (8 * i);
    CHECK(std::bit_cast<double>(a_bits) == 0.1);
    const auto back = decode_cache(bytes);
    REQUIRE(back.has_value());
    CHECK(back->first == h);
    CHECK(back->second.size() == payload.size());
    for (std::size_t i = 0; i < payload.size(); ++i)
        CHECK(std::bit_cast<std::uint64_t>(back->second[i]) == std::bit_cast<std::uint64_t>(payload[i]));

    for (std::size_t pos : {std::size_t{0}, std::size_t{10}, std::size_t{50}, bytes.size() - 1}) {
        auto bad = bytes;
        bad[pos] ^= 0x40;
        CHECK_FALSE(decode_cache(bad).has_value());
    }
    auto cut = bytes;
    cut.pop_back();
    CHECK_FALSE(decode_cache(cut).has_value());
    CHECK(fnv1a64(reinterpret_cast<const unsigned char*>("a"), 1) == 0xaf63dc4c8601ec8cULL);

    CacheHeader other = h;
    other.a = 0.2;
    CHECK(other.key() != h.key());
}

TEST_CASE("disk cache: corrupted entries are ignored and rebuilt") {
    const std::string dir = scratch_dir("corrupt");
    const auto spec = LatticeSpec::make(3, 2, 1);
    EngineOptions o;
    o.cache_dir = dir;
    std::vector<double> ref;
    {
        Engine e(spec, o);
        ref = e.gamma_symbol(1, 1.0).values;
    }
    int corrupted = 0;
    for (const auto& f : fs::directory_iterator(dir)) {
        std::fstream s(f.path(), std::ios::in | std::ios::out | std::ios::binary);
        s.seekp(60);
        s.put('\x7f');
        ++corrupted;
    }
    REQUIRE(corrupted > 0);
    Engine again(spec, o);
    CHECK(again.gamma_symbol(1, 1.0).values == ref);
    CHECK(again.solves() > 0);
    for (const auto& p : again.poisson_log()) CHECK_FALSE(p.from_cache);
    // rebuilt entries are valid again
    Engine third(spec, o);
    CHECK(third.gamma_symbol(1, 1.0).values == ref);
    CHECK(third.solves() == 0);

    const DiskCache c(dir);
    CacheHeader h;
    h.n = 7;
    CHECK_FALSE(c.contains(h));
    c.store(h, {1.0, 2.0});
    CHECK(c.contains(h));
    CacheHeader mismatch = h;
    mismatch.m = 1;
    fs::copy_file(c.path_for(h), c.path_for(mismatch));
    CHECK_FALSE(c.load(mismatch).has_value());  // header inside the file disagrees with its name
}

TEST_CASE("rates CSV round trip keeps every bit") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(-1e3, 1e3);
    std::vector<RateRow> rows;
    for (int i = 0; i < 200; ++i)
        rows.push_back(RateRow{"gamma-vs-proxy:L1_k", i % 4, U(rng), i % 3, std::exp(U(rng) / 50), U(rng) * 1e-7,
                               -0.5, i % 2 == 0});
    rows.push_back(RateRow{"x", 1, 0.1, 0, 5e-324, 1.0 / 3.0, -1.0, true});
    const auto back = parse_rates_csv(rates_csv(rows));
    CHECK(back == rows);
    CHECK(rates_csv(rows).substr(0, 65) == "quantity,n,a_or_alpha,k,norm_value,fitted_rate,expected_rate,pass");
    CHECK_THROWS_AS(parse_rates_csv("bad header\n"), Error);
    CHECK(format_double(0.1) == "0.10000000000000001");
}

TEST_CASE("report rows carry per-row parameters") {
    RateReport r;
    r.quantity = "a-decay";
    r.norm = "L1_k";
    r.scales = {2, 2, 2};
    r.values = {1.0, 0.5, 0.25};
    r.row_params = {1.0, 4.0, 16.0};
    r.fitted_rate = -0.6;
    r.expected_rate = 0.0;
    r.pass = true;
    const auto rows = rows_of(r);
    REQUIRE(rows.size() == 3);
    CHECK(rows[2].a_or_alpha == 16.0);
    CHECK(rows[0].quantity == "a-decay:L1_k");
    const std::string js = rates_json({r}, RunConfig{}, "rates");
    CHECK(js.find("\"mollifier\": \"bump\"") != std::string::npos);
    CHECK(js.find("\"torus_factor\": 16") != std::string::npos);
    CHECK(js.find("\"slack\"") != std::string::npos);
}
