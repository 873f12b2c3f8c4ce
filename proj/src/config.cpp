#include "frd/config.hpp"

#include "frd/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>

namespace frd {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double to_double(const std::string& key, const std::string& v) {
    double x = 0.0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc{} || p != v.data() + v.size() || !std::isfinite(x))
        throw ConfigurationError("key '" + key + "': not a number: '" + v + "'");
    return x;
}

long long to_int(const std::string& key, const std::string& v) {
    long long x = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc{} || p != v.data() + v.size())
        throw ConfigurationError("key '" + key + "': not an integer: '" + v + "'");
    return x;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigurationError("key '" + key + "': expected true or false, got '" + v + "'");
}

std::string fmt(double x) {
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

template <class T>
std::string join(const std::vector<T>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ", ";
        if constexpr (std::is_floating_point_v<T>)
            s += fmt(v[i]);
        else
            s += std::to_string(v[i]);
    }
    return s;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"d", [](RunConfig& c, const std::string& k, const std::string& v) { c.d = static_cast<int>(to_int(k, v)); }},
        {"L", [](RunConfig& c, const std::string& k, const std::string& v) { c.L = static_cast<int>(to_int(k, v)); }},
        {"p",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             const long long p = to_int(k, v);
             if (p < 1 || p > 8) throw ConfigurationError("key 'p' must lie in 1..8");
             c.L = 1 << p;
         }},
        {"n_max", [](RunConfig& c, const std::string& k, const std::string& v) { c.n_max = static_cast<int>(to_int(k, v)); }},
        {"a_values",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.a_values.clear();
             for (const auto& s : split_list(v)) c.a_values.push_back(to_double(k, s));
         }},
        {"alpha",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             if (v == "none" || v.empty())
                 c.alpha.reset();
             else
                 c.alpha = to_double(k, v);
         }},
        {"mollifier", [](RunConfig& c, const std::string&, const std::string& v) { c.mollifier = v; }},
        {"torus_factor",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.torus_factor = static_cast<int>(to_int(k, v)); }},
        {"tight_range", [](RunConfig& c, const std::string& k, const std::string& v) { c.tight_range = to_bool(k, v); }},
        {"k_orders",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.k_orders.clear();
             for (const auto& s : split_list(v)) c.k_orders.push_back(static_cast<int>(to_int(k, s)));
         }},
        {"n_ref", [](RunConfig& c, const std::string& k, const std::string& v) { c.n_ref = static_cast<int>(to_int(k, v)); }},
        {"quad_panels",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.quad_panels = static_cast<int>(to_int(k, v)); }},
        {"quad_nodes",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.quad_nodes = static_cast<int>(to_int(k, v)); }},
        {"quad_tail_panels",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.quad_tail_panels = static_cast<int>(to_int(k, v));
         }},
        {"quad_cutoff", [](RunConfig& c, const std::string& k, const std::string& v) { c.quad_cutoff = to_double(k, v); }},
        {"reconstruct_radius",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.reconstruct_radius = static_cast<int>(to_int(k, v));
         }},
        {"decay_scale",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.decay_scale = static_cast<int>(to_int(k, v)); }},
        {"cache_dir", [](RunConfig& c, const std::string&, const std::string& v) { c.cache_dir = v; }},
        {"seed",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             const long long s = to_int(k, v);
             if (s < 0) throw ConfigurationError("key 'seed' must be non-negative");
             c.seed = static_cast<std::uint64_t>(s);
         }},
        {"memory_cap_mb", [](RunConfig& c, const std::string& k, const std::string& v) { c.memory_cap_mb = to_double(k, v); }},
        {"mass_term",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             if (v == "resolvent")
                 c.mass_term = MassTerm::resolvent;
             else if (v == "unit")
                 c.mass_term = MassTerm::unit;
             else
                 throw ConfigurationError("key '" + k + "': expected resolvent or unit");
         }},
        {"output_dir", [](RunConfig& c, const std::string&, const std::string& v) { c.output_dir = v; }},
        {"allow_low_dimension",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.allow_low_dimension = to_bool(k, v); }},
        {"threads", [](RunConfig& c, const std::string& k, const std::string& v) { c.threads = static_cast<int>(to_int(k, v)); }},
    };
    return table;
}

} // namespace

LatticeSpec RunConfig::spec() const { return LatticeSpec::make(d, L, n_max, allow_low_dimension); }

void RunConfig::validate() const {
    const LatticeSpec s = spec();
    if (n_max < 1) throw ConfigurationError("n_max must be at least 1");
    if (a_values.empty()) throw ConfigurationError("a_values must not be empty");
    for (double a : a_values)
        if (!(a >= 0.0)) throw ParameterError("resolvent parameters must be non-negative");
    if (alpha && !(*alpha > 0.0 && *alpha < 2.0)) throw ParameterError("alpha must lie in (0, 2)");
    if (alpha && !(*alpha < d)) throw ParameterError("alpha must be below d");
    if (mollifier != "bump") throw ConfigurationError("unknown mollifier profile '" + mollifier + "'");
    if (torus_factor < 13) throw ConfigurationError("torus_factor must be at least 13");
    if (k_orders.empty()) throw ConfigurationError("k_orders must not be empty");
    for (int k : k_orders)
        if (k < 0) throw ParameterError("Sobolev orders must be non-negative");
    if (n_ref <= n_max) throw ConfigurationError("n_ref must exceed n_max");
    if (quad_panels < 1 || quad_nodes < 2 || quad_tail_panels < 0)
        throw ConfigurationError("quadrature needs panels >= 1, nodes >= 2, tail panels >= 0");
    if (quad_cutoff < 0.0) throw ConfigurationError("quad_cutoff must be non-negative");
    if (reconstruct_radius < 0) throw ConfigurationError("reconstruct_radius must be non-negative");
    if (decay_scale < -1 || decay_scale > n_max) throw ConfigurationError("decay_scale must lie in 0..n_max, or be -1");
    if (!(memory_cap_mb > 0.0)) throw ConfigurationError("memory_cap_mb must be positive");
    if (threads < 1) throw ConfigurationError("threads must be at least 1");
    if (tight_range && s.ipow(n_max) < 16) throw ConfigurationError("tight_range needs L^n_max >= 16");
}

std::string RunConfig::to_text() const {
    std::ostringstream os;
    os << "d = " << d << "\n"
       << "L = " << L << "\n"
       << "n_max = " << n_max << "\n"
       << "a_values = " << join(a_values) << "\n"
       << "alpha = " << (alpha ? fmt(*alpha) : std::string("none")) << "\n"
       << "mollifier = " << mollifier << "\n"
       << "torus_factor = " << torus_factor << "\n"
       << "tight_range = " << (tight_range ? "true" : "false") << "\n"
       << "k_orders = " << join(k_orders) << "\n"
       << "n_ref = " << n_ref << "\n"
       << "quad_panels = " << quad_panels << "\n"
       << "quad_nodes = " << quad_nodes << "\n"
       << "quad_tail_panels = " << quad_tail_panels << "\n"
       << "quad_cutoff = " << fmt(quad_cutoff) << "\n"
       << "reconstruct_radius = " << reconstruct_radius << "\n"
       << "decay_scale = " << decay_scale << "\n"
       << "cache_dir = " << cache_dir << "\n"
       << "seed = " << seed << "\n"
       << "memory_cap_mb = " << fmt(memory_cap_mb) << "\n"
       << "mass_term = " << (mass_term == MassTerm::unit ? "unit" : "resolvent") << "\n"
       << "output_dir = " << output_dir << "\n"
       << "allow_low_dimension = " << (allow_low_dimension ? "true" : "false") << "\n"
       << "threads = " << threads << "\n";
    return os.str();
}

RunConfig parse_config(const std::string& text) {
    RunConfig c;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    std::map<std::string, int> seen;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigurationError("line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        auto it = setters().find(key);
        if (it == setters().end())
            throw ConfigurationError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        if (seen.count(key))
            throw ConfigurationError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        seen[key] = lineno;
        it->second(c, key, value);
    }
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigurationError("cannot read config file " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

std::string CostEstimate::report() const {
    std::ostringstream os;
    os << std::fixed << std::setprecision(1);
    os << "estimated peak memory " << peak_bytes / 1048576.0 << " MiB\n";
    for (const auto& [k, v] : items) os << "  " << k << ": " << v / 1048576.0 << " MiB\n";
    return os.str();
}

CostEstimate estimate_cost(const RunConfig& c) {
    CostEstimate e;
    const double L = c.L;
    auto octant = [&](int n) {
        const double M = c.torus_factor * L * std::pow(L, n);
        return std::pow(M / 2 + 1, c.d);
    };
    // symbol, kernel, one averaging symbol and a transform buffer on the finest grid
    e.items["proxy grid (n_ref)"] = 4.0 * 8.0 * octant(c.n_ref);
    e.items["largest compared grid (n_max)"] = 4.0 * 8.0 * octant(c.n_max);
    double poisson = 0.0;
    for (int m = 0; m <= c.n_ref; ++m) {
        const double s = std::pow(L, c.n_ref - m + 1);
        const double boundary = 2.0 * c.d * std::pow(s - 1, c.d - 1);
        const double reach = std::pow(L, c.n_ref - m - 1);
        const double sources = std::pow(2 * std::ceil(reach) + 1, c.d);
        poisson = std::max(poisson, 8.0 * boundary * sources + 8.0 * std::pow(s - 1, c.d) * 2.0 * c.threads);
    }
    e.items["Poisson table"] = poisson;
    double n_kernels = 0.0;
    for (int n = 0; n <= c.n_max; ++n) n_kernels += (n + 1) * std::pow(std::pow(L, n + 1) + 1, c.d) * 8.0;
    e.items["cached averaging kernels"] = n_kernels * c.a_values.size();
    for (const auto& [k, v] : e.items) e.peak_bytes += v;
    return e;
}

void enforce_memory_cap(const RunConfig& c) {
    const CostEstimate e = estimate_cost(c);
    if (e.peak_bytes > c.memory_cap_mb * 1048576.0)
        throw ConfigurationError("refusing to run: memory estimate exceeds memory_cap_mb = " +
                                 std::to_string(c.memory_cap_mb) + "\n" + e.report());
}

} // namespace frd
