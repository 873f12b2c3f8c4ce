#include "frd/report.hpp"

#include "frd/errors.hpp"

#include <json.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace frd {

std::vector<RateRow> rows_of(const RateReport& r) {
    std::vector<RateRow> rows;
    for (std::size_t i = 0; i < r.scales.size(); ++i)
        rows.push_back(RateRow{r.quantity + ":" + r.norm, r.scales[i], r.row_params.empty() ? r.param : r.row_params[i],
                               r.k, r.values[i], r.fitted_rate,
                               r.expected_rate, r.pass});
    return rows;
}

std::string format_double(double x) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    if (ec != std::errc{}) throw Error("number formatting failed");
    return std::string(buf, p);
}

namespace {

const char* kHeader = "quantity,n,a_or_alpha,k,norm_value,fitted_rate,expected_rate,pass";

double parse_double(const std::string& s) {
    double x = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (ec != std::errc{} || p != s.data() + s.size()) throw Error("bad number in CSV: '" + s + "'");
    return x;
}

} // namespace

std::string rates_csv(const std::vector<RateRow>& rows) {
    std::string out = std::string(kHeader) + "\n";
    for (const auto& r : rows) {
        out += r.quantity + "," + std::to_string(r.n) + "," + format_double(r.a_or_alpha) + "," + std::to_string(r.k) +
               "," + format_double(r.norm_value) + "," + format_double(r.fitted_rate) + "," +
               format_double(r.expected_rate) + "," + (r.pass ? "true" : "false") + "\n";
    }
    return out;
}

std::vector<RateRow> parse_rates_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kHeader) throw Error("unexpected CSV header");
    std::vector<RateRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() != 8) throw Error("CSV row with " + std::to_string(f.size()) + " fields");
        RateRow r;
        r.quantity = f[0];
        r.n = std::stoi(f[1]);
        r.a_or_alpha = parse_double(f[2]);
        r.k = std::stoi(f[3]);
        r.norm_value = parse_double(f[4]);
        r.fitted_rate = parse_double(f[5]);
        r.expected_rate = parse_double(f[6]);
        r.pass = f[7] == "true";
        rows.push_back(r);
    }
    return rows;
}

namespace {

nlohmann::ordered_json metadata(const RunConfig& cfg) {
    nlohmann::ordered_json m;
    m["d"] = cfg.d;
    m["L"] = cfg.L;
    m["n_max"] = cfg.n_max;
    m["n_ref"] = cfg.n_ref;
    m["a_values"] = cfg.a_values;
    if (cfg.alpha)
        m["alpha"] = *cfg.alpha;
    else
        m["alpha"] = nullptr;
    m["mollifier"] = cfg.mollifier;
    m["torus_factor"] = cfg.torus_factor;
    m["tight_range"] = cfg.tight_range;
    m["mass_term"] = cfg.mass_term == MassTerm::unit ? "unit" : "resolvent";
    m["k_orders"] = cfg.k_orders;
    m["quadrature"] = {{"panels", cfg.quad_panels}, {"nodes", cfg.quad_nodes}, {"tail_panels", cfg.quad_tail_panels},
                       {"cutoff", cfg.quad_cutoff}};
    m["seed"] = cfg.seed;
    return m;
}

} // namespace

std::string rates_json(const std::vector<RateReport>& reports, const RunConfig& cfg, const std::string& command) {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["metadata"] = metadata(cfg);
    j["reports"] = nlohmann::ordered_json::array();
    for (const auto& r : reports) {
        nlohmann::ordered_json e;
        e["quantity"] = r.quantity;
        e["norm"] = r.norm;
        e["a_or_alpha"] = r.param;
        e["k"] = r.k;
        e["scales"] = r.scales;
        e["values"] = r.values;
        if (!r.row_params.empty()) e["row_params"] = r.row_params;
        e["fitted_rate"] = r.fitted_rate;
        e["expected_rate"] = r.expected_rate;
        e["tolerance"] = {{"rule", "fitted_rate <= expected_rate + slack"}, {"slack", r.slack}};
        e["pass"] = r.pass;
        e["fit_skipped"] = r.fit_skipped;
        e["note"] = r.note;
        j["reports"].push_back(e);
    }
    return j.dump(2) + "\n";
}

std::string checks_csv(const std::vector<Check>& checks) {
    std::string out = "check,scope,measured,threshold,pass,detail\n";
    for (const auto& c : checks)
        out += c.name + "," + c.scope + "," + format_double(c.measured) + "," + format_double(c.threshold) + "," +
               (c.pass ? "true" : "false") + "," + c.detail + "\n";
    return out;
}

std::string checks_json(const std::vector<Check>& checks, const RunConfig& cfg) {
    nlohmann::ordered_json j;
    j["command"] = "verify";
    j["metadata"] = metadata(cfg);
    bool all = true;
    j["checks"] = nlohmann::ordered_json::array();
    for (const auto& c : checks) {
        all = all && c.pass;
        j["checks"].push_back({{"name", c.name},
                               {"scope", c.scope},
                               {"measured", c.measured},
                               {"threshold", c.threshold},
                               {"margin", c.threshold - c.measured},
                               {"pass", c.pass},
                               {"detail", c.detail}});
    }
    j["all_pass"] = all;
    return j.dump(2) + "\n";
}

void write_text(const std::string& path, const std::string& text) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error("cannot write " + path);
    f << text;
    if (!f) throw Error("write failed for " + path);
}

std::string read_text(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot read " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

} // namespace frd
