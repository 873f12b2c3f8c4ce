#include "frd/commands.hpp"

#include "frd/errors.hpp"
#include "frd/resolvent.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <map>
#include <numbers>
#include <sstream>

namespace frd {

namespace {

using Clock = std::chrono::steady_clock;

std::string scope(int n, double a) { return "n=" + std::to_string(n) + " a=" + format_double(a); }

std::string path_in(const RunConfig& cfg, const std::string& sub, const std::string& file) {
    return (std::filesystem::path(cfg.output_dir) / sub / file).string();
}

double a_at_scale(const RunConfig& cfg, double a, int n) {
    return a * std::pow(static_cast<double>(cfg.L), 2.0 * n);
}

void write_run_stats(const RunConfig& cfg, const std::string& command, const Engine& engine, Clock::time_point t0) {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["dirichlet_solves"] = engine.solves();
    long built = 0, cached = 0;
    for (const auto& p : engine.poisson_log()) (p.from_cache ? cached : built)++;
    j["poisson_tables_built"] = built;
    j["poisson_tables_from_cache"] = cached;
    j["seconds"] = std::chrono::duration<double>(Clock::now() - t0).count();
    write_text(path_in(cfg, command, "run_stats.json"), j.dump(2) + "\n");
}

CacheHeader artifact_header(const Engine& engine, CacheKind kind, int n, double a) {
    CacheHeader h = engine.poisson_header(n, 0, a);
    h.kind = kind;
    return h;
}

std::pair<double, double> extremes(const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return {*lo, *hi};
}

} // namespace

Engine make_engine(const RunConfig& cfg, bool require_cached) {
    cfg.validate();
    EngineOptions o;
    o.torus_factor = cfg.torus_factor;
    o.geometry = cfg.tight_range ? Geometry::tight : Geometry::standard;
    o.mass_term = cfg.mass_term;
    o.cache_dir = cfg.cache_dir;
    o.require_cached = require_cached;
    o.threads = cfg.threads;
    if (require_cached && cfg.cache_dir.empty()) throw ConfigurationError("require-cached needs a cache directory");
    return Engine(cfg.spec(), o);
}

std::vector<Check> verify_checks(Engine& engine, const RunConfig& cfg, bool inject_fault) {
    const LatticeSpec spec = cfg.spec();
    std::vector<double> as = cfg.a_values;
    std::sort(as.begin(), as.end());
    as.erase(std::unique(as.begin(), as.end()), as.end());

    if (engine.options().require_cached) {
        DiskCache cache(cfg.cache_dir);
        std::vector<std::string> missing;
        for (double a : as)
            for (int n = 0; n <= cfg.n_max; ++n)
                for (int m = 0; m <= n; ++m) {
                    const CacheHeader h = engine.poisson_header(n, m, a_at_scale(cfg, a, n));
                    if (!cache.contains(h)) missing.push_back(h.key());
                }
        if (!missing.empty()) {
            std::string msg = "missing cached artifacts:";
            for (const auto& k : missing) msg += " " + k;
            throw MissingArtifacts(msg);
        }
    }

    std::vector<Check> checks;
    // total Poisson mass per source, keyed by (n, m) then a
    std::map<std::pair<int, int>, std::vector<std::pair<double, std::vector<double>>>> masses;
    for (double a : as) {
        for (int n = 0; n <= cfg.n_max; ++n) {
            const double an = a_at_scale(cfg, a, n);
            for (int m = 0; m <= n; ++m) {
                const PoissonKernelTable t = engine.poisson(n, m, an);
                std::vector<double> tot(t.source_count());
                for (std::size_t i = 0; i < tot.size(); ++i) tot[i] = t.total_mass(i);
                const auto [lo, hi] = extremes(tot);
                const std::string sc = scope(n, an) + " m=" + std::to_string(m);
                if (an == 0.0) {
                    const double dev = std::max(std::abs(lo - 1.0), std::abs(hi - 1.0));
                    checks.push_back({"poisson-mass-unit", sc, dev <= 1e-10, dev, 1e-10, "max |mass - 1|"});
                } else {
                    checks.push_back({"poisson-mass-defective", sc, hi < 1.0, hi, 1.0, "max mass, must stay below 1"});
                }
                masses[{n, m}].emplace_back(an, std::move(tot));
            }

            Check abound{"averaging-symbol-bound", scope(n, an), true, 0.0, 1.0 + 1e-12, "sup_p |A_m(p)| over m"};
            for (int m = 0; m <= n; ++m) {
                const EvenSymbol s = engine.averaging(n, m, an)->symbol();
                for (double v : s.values) abound.measured = std::max(abound.measured, std::abs(v));
            }
            abound.pass = abound.measured <= abound.threshold;
            checks.push_back(abound);

            try {
                const FluctuationCovariance base = engine.base(n, an);
                const double ex = range_excess(base.kernel, base.declared_range);
                checks.push_back({"range-base", scope(n, an), ex <= 1e-9, ex, 1e-9,
                                  "max |Gamma_eps_n(x)| / Gamma(0) for |x|_inf >= L"});
                const auto [lo, hi] = extremes(base.symbol.values);
                const double neg = hi > 0 ? -lo / hi : -lo;
                checks.push_back({"positivity-base", scope(n, an), neg <= 1e-12, neg, 1e-12, "-min / max of symbol"});
                const EvenSymbol G = green_symbol_grid(ResolventParams::make(an, base.grid), true);
                double ratio = 0.0;
                for (std::size_t i = 1; i < G.values.size(); ++i)
                    ratio = std::max(ratio, base.symbol.values[i] / G.values[i]);
                checks.push_back({"base-below-green", scope(n, an), ratio <= 1.0 + 1e-12, ratio, 1.0 + 1e-12,
                                  "max over p != 0 of Gamma_eps_n / G"});

                FluctuationCovariance g = n == 0 ? base : engine.gamma(n, an);
                if (inject_fault && n == cfg.n_max && a == as.front()) {
                    std::vector<int> j(spec.d, 0);
                    j[0] = std::min(g.kernel.extent, static_cast<int>(std::ceil(g.declared_range / g.grid.eps)) + 1);
                    g.kernel.values[g.kernel.index(j.data())] += 1e-3 * std::abs(g.kernel.at0());
                }
                const double gx = range_excess(g.kernel, g.declared_range);
                checks.push_back({"range-gamma", scope(n, an), gx <= 1e-9, gx, 1e-9,
                                  "max |Gamma_n(x)| / Gamma_n(0) beyond the declared range"});
                const auto [glo, ghi] = extremes(g.symbol.values);
                const double gneg = ghi > 0 ? -glo / ghi : -glo;
                checks.push_back({"positivity-gamma", scope(n, an), gneg <= 1e-12, gneg, 1e-12, "-min / max of symbol"});
            } catch (const ZeroModeError& e) {
                checks.push_back({"zero-mode", scope(n, an), false, 1.0, 0.0, e.what()});
            }
        }
    }
    for (const auto& [nm, list] : masses) {
        for (std::size_t i = 1; i < list.size(); ++i) {
            double worst = -1e300;
            for (std::size_t s = 0; s < list[i].second.size(); ++s)
                worst = std::max(worst, list[i].second[s] - list[i - 1].second[s]);
            const std::string sc = "n=" + std::to_string(nm.first) + " m=" + std::to_string(nm.second) + " a=" +
                                   format_double(list[i - 1].first) + "->" + format_double(list[i].first);
            checks.push_back({"poisson-mass-decreasing", sc, worst < 0.0, worst, 0.0,
                              "max over sources of the mass increment"});
        }
    }
    return checks;
}

std::vector<RateReport> rate_reports(Engine& engine, const RunConfig& cfg) {
    const LatticeSpec spec = cfg.spec();
    std::vector<int> scales;
    for (int n = 1; n <= cfg.n_max; ++n) scales.push_back(n);
    const int k_max = *std::max_element(cfg.k_orders.begin(), cfg.k_orders.end());
    const ComparisonLattice lat = comparison_lattice(spec, scales, cfg.tight_range, k_max);

    std::vector<RateReport> out;
    std::map<int, std::vector<std::pair<double, double>>> decay;  // k -> (a, norm at decay_scale)
    for (double a : cfg.a_values) {
        const Sample proxy = sample_covariance(continuum_proxy(engine, a, cfg.n_ref), lat, true);
        std::vector<Sample> samples;
        for (int n : scales) samples.push_back(sample_covariance(engine.gamma(n, a), lat, true));
        for (int k : cfg.k_orders) {
            RateReport r = convergence_rate("gamma-vs-proxy", spec, a, k, RateNorm::sobolev, samples, proxy, lat);
            if (a > 0.0)
                for (std::size_t i = 0; i < r.scales.size(); ++i)
                    if (r.scales[i] == cfg.decay_n()) decay[k].emplace_back(a, r.values[i]);
            out.push_back(std::move(r));
        }
        out.push_back(convergence_rate("gamma-vs-proxy", spec, a, 0, RateNorm::sup, samples, proxy, lat));
        out.push_back(convergence_rate("gamma-vs-proxy", spec, a, 0, RateNorm::sup_grad, samples, proxy, lat));

        std::vector<SymbolGap> details;
        RateReport sg = symbol_gap_diag(spec, a, scales, cfg.torus_factor, &details);
        double ratio = 0.0;
        for (const auto& d : details) ratio = std::max(ratio, d.max_ratio);
        sg.note = "small-p ratio constant " + format_double(ratio);
        out.push_back(std::move(sg));
        for (int m = 0; m <= 1; ++m) {
            std::vector<int> ms;
            for (int n : scales)
                if (n >= m) ms.push_back(n);
            if (ms.size() >= 3) out.push_back(averaging_gap_diag(engine, a, m, ms, cfg.n_ref));
        }
    }
    for (const auto& [k, pts] : decay) {
        if (pts.size() < 2) continue;
        RateReport r;
        r.quantity = "a-decay";
        r.norm = "L1_k";
        r.k = k;
        double mx = 0.0, my = 0.0;
        for (const auto& [a, v] : pts) {
            r.scales.push_back(cfg.decay_n());
            r.values.push_back(v);
            r.row_params.push_back(a);
            mx += std::sqrt(a);
            my += std::log(v);
        }
        mx /= pts.size();
        my /= pts.size();
        double sxy = 0.0, sxx = 0.0;
        for (const auto& [a, v] : pts) {
            sxy += (std::sqrt(a) - mx) * (std::log(v) - my);
            sxx += (std::sqrt(a) - mx) * (std::sqrt(a) - mx);
        }
        r.param = pts.back().first;
        r.fitted_rate = sxy / sxx;
        r.expected_rate = 0.0;
        r.slack = 0.0;
        r.pass = r.fitted_rate < 0.0;
        r.note = "slope of log norm against sqrt(a); fitted c = " + format_double(-r.fitted_rate);
        out.push_back(std::move(r));
    }
    return out;
}

LevyOutcome levy_outcome(Engine& engine, const RunConfig& cfg) {
    if (!cfg.alpha) throw ConfigurationError("the levy command needs alpha");
    const LatticeSpec spec = cfg.spec();
    const double alpha = *cfg.alpha;
    LevyOutcome o;
    o.decay_rate = fit_mass_decay(engine, 1, {4.0, 16.0, 64.0});
    if (!(o.decay_rate > 0.0)) throw Error("no exponential decay in a to set the quadrature cut-off");
    const double T = cfg.quad_cutoff > 0.0 ? cfg.quad_cutoff : levy_cutoff(alpha, o.decay_rate);
    o.params = LevyParams::make(spec.d, alpha, T, cfg.quad_panels, cfg.quad_nodes, cfg.quad_tail_panels);
    o.normalization =
        levy_normalization_integral(levy_quadrature(alpha, T, cfg.quad_panels, cfg.quad_nodes, cfg.quad_tail_panels));
    o.normalization_exact = std::numbers::pi / std::sin(std::numbers::pi * alpha / 2.0);

    std::vector<int> scales;
    for (int n = 1; n <= cfg.n_max; ++n) scales.push_back(n);
    const int k_max = *std::max_element(cfg.k_orders.begin(), cfg.k_orders.end());
    const ComparisonLattice lat = comparison_lattice(spec, scales, cfg.tight_range, k_max);

    std::vector<FluctuationCovariance> gammas;
    std::vector<Sample> samples;
    for (int n = 0; n <= cfg.n_max; ++n) {
        gammas.push_back(levy_gamma(engine, n, o.params));
        engine.clear_kernels();
        if (n >= 1) samples.push_back(sample_covariance(gammas.back(), lat, false));
    }
    const Sample proxy = sample_covariance(levy_gamma(engine, cfg.n_ref, o.params), lat, false);
    for (int k : cfg.k_orders)
        o.reports.push_back(convergence_rate("levy-vs-proxy", spec, alpha, k, RateNorm::sobolev, samples, proxy, lat));
    o.reports.push_back(convergence_rate("levy-vs-proxy", spec, alpha, 0, RateNorm::sup, samples, proxy, lat));
    o.reconstruction = levy_reconstruct(spec, o.params, gammas, 2);
    return o;
}

int cmd_decompose(const RunConfig& cfg, const RunOptions&, std::ostream& out) {
    const auto t0 = Clock::now();
    enforce_memory_cap(cfg);
    Engine engine = make_engine(cfg);
    std::string residuals = "a,N,residual,tail_bound\n";
    std::string scales = "a,n,a_n,gamma0,symbol_min,symbol_max,range_excess\n";
    bool decreasing = true;
    for (double a : cfg.a_values) {
        const DecompositionResult r = reconstruct(engine, a, cfg.n_max, cfg.reconstruct_radius);
        for (std::size_t N = 0; N < r.residual.size(); ++N) {
            residuals += format_double(a) + "," + std::to_string(N) + "," + format_double(r.residual[N]) + "," +
                         format_double(r.tail_bound[N]) + "\n";
            if (N > 0 && !(r.residual[N] < r.residual[N - 1])) decreasing = false;
        }
        for (const ScaleEntry& e : r.gammas) {
            scales += format_double(a) + "," + std::to_string(e.n) + "," + format_double(e.a_n) + "," +
                      format_double(e.gamma0) + "," + format_double(e.symbol_min) + "," +
                      format_double(e.symbol_max) + "," + format_double(e.range_excess) + "\n";
            const std::string stem = "gamma_a" + format_double(a) + "_n" + std::to_string(e.n);
            std::vector<double> kp{static_cast<double>(e.kernel.extent)};
            kp.insert(kp.end(), e.kernel.values.begin(), e.kernel.values.end());
            write_cache_file(path_in(cfg, "decompose", stem + ".kernel.frd"),
                             artifact_header(engine, CacheKind::kernel, e.n, e.a_n), kp);
            std::vector<double> sp{static_cast<double>(e.symbol.N())};
            sp.insert(sp.end(), e.symbol.values.begin(), e.symbol.values.end());
            write_cache_file(path_in(cfg, "decompose", stem + ".symbol.frd"),
                             artifact_header(engine, CacheKind::symbol, e.n, e.a_n), sp);
        }
        engine.clear_kernels();
        out << "decompose a=" << format_double(a) << " residual(N=" << cfg.n_max
            << ")=" << format_double(r.residual.back()) << "\n";
    }
    write_text(path_in(cfg, "decompose", "residuals.csv"), residuals);
    write_text(path_in(cfg, "decompose", "scales.csv"), scales);
    write_run_stats(cfg, "decompose", engine, t0);
    out << "dirichlet solves: " << engine.solves() << "\n";
    if (!decreasing) out << "note: residual not strictly decreasing for some a\n";
    return 0;
}

int cmd_verify(const RunConfig& cfg, const RunOptions& opt, std::ostream& out) {
    const auto t0 = Clock::now();
    enforce_memory_cap(cfg);
    Engine engine = make_engine(cfg, opt.require_cached);
    const std::vector<Check> checks = verify_checks(engine, cfg, opt.inject_fault);
    write_text(path_in(cfg, "verify", "checks.csv"), checks_csv(checks));
    write_text(path_in(cfg, "verify", "checks.json"), checks_json(checks, cfg));
    write_run_stats(cfg, "verify", engine, t0);
    bool all = true;
    for (const auto& c : checks) {
        all = all && c.pass;
        if (!c.pass)
            out << "FAIL " << c.name << " [" << c.scope << "] measured " << format_double(c.measured) << " threshold "
                << format_double(c.threshold) << "\n";
    }
    out << (all ? "verify: all " : "verify: failures among ") << checks.size() << " checks\n";
    return all ? 0 : 1;
}

int cmd_rates(const RunConfig& cfg, const RunOptions&, std::ostream& out) {
    const auto t0 = Clock::now();
    enforce_memory_cap(cfg);
    Engine engine = make_engine(cfg);
    const std::vector<RateReport> reports = rate_reports(engine, cfg);
    std::vector<RateRow> rows;
    for (const auto& r : reports) {
        const auto rr = rows_of(r);
        rows.insert(rows.end(), rr.begin(), rr.end());
        out << r.quantity << ":" << r.norm << " param=" << format_double(r.param) << " k=" << r.k
            << " fitted=" << format_double(r.fitted_rate) << (r.pass ? " pass" : " FAIL") << "\n";
    }
    write_text(path_in(cfg, "rates", "rates.csv"), rates_csv(rows));
    write_text(path_in(cfg, "rates", "rates.json"), rates_json(reports, cfg, "rates"));
    write_run_stats(cfg, "rates", engine, t0);
    return 0;
}

int cmd_levy(const RunConfig& cfg, const RunOptions&, std::ostream& out) {
    const auto t0 = Clock::now();
    enforce_memory_cap(cfg);
    Engine engine = make_engine(cfg);
    const LevyOutcome o = levy_outcome(engine, cfg);
    std::vector<RateRow> rows;
    for (const auto& r : o.reports) {
        const auto rr = rows_of(r);
        rows.insert(rows.end(), rr.begin(), rr.end());
        out << r.quantity << ":" << r.norm << " k=" << r.k << " fitted=" << format_double(r.fitted_rate)
            << (r.pass ? " pass" : " FAIL") << "\n";
    }
    write_text(path_in(cfg, "levy", "levy.csv"), rates_csv(rows));
    nlohmann::ordered_json j = nlohmann::ordered_json::parse(rates_json(o.reports, cfg, "levy"));
    j["quadrature"] = {{"cutoff", o.params.T},
                       {"decay_rate", o.decay_rate},
                       {"normalization", o.normalization},
                       {"normalization_exact", o.normalization_exact}};
    j["reconstruction"] = {{"residual", o.reconstruction.residual},
                           {"tail_bound", o.reconstruction.tail_bound},
                           {"g0", o.reconstruction.g0}};
    write_text(path_in(cfg, "levy", "levy.json"), j.dump(2) + "\n");
    std::string res = "N,residual,tail_bound\n";
    for (std::size_t N = 0; N < o.reconstruction.residual.size(); ++N)
        res += std::to_string(N) + "," + format_double(o.reconstruction.residual[N]) + "," +
               format_double(o.reconstruction.tail_bound[N]) + "\n";
    write_text(path_in(cfg, "levy", "residuals.csv"), res);
    write_run_stats(cfg, "levy", engine, t0);
    out << "normalization " << format_double(o.normalization) << " exact " << format_double(o.normalization_exact)
        << "\n";
    return 0;
}

int cmd_export(const RunConfig& cfg, const RunOptions& opt, std::ostream& out) {
    const auto t0 = Clock::now();
    enforce_memory_cap(cfg);
    if (opt.export_what != "all" && opt.export_what != "kernels" && opt.export_what != "symbols")
        throw ConfigurationError("export target must be kernels, symbols or all");
    Engine engine = make_engine(cfg);
    int files = 0;
    for (double a : cfg.a_values) {
        for (int n = 0; n <= cfg.n_max; ++n) {
            const FluctuationCovariance c = engine.gamma(n, a);
            const std::string stem = "gamma_a" + format_double(a) + "_n" + std::to_string(n);
            const int d = c.grid.d;
            std::vector<int> j(d, 0);
            if (opt.export_what != "symbols") {
                std::string s = "x1,value\n";
                const int reach = std::min(c.kernel.extent, static_cast<int>(std::ceil(c.declared_range / c.grid.eps)) + 2);
                for (int x = 0; x <= reach; ++x) {
                    j[0] = x;
                    s += format_double(x * c.grid.eps) + "," + format_double(c.kernel.at(j.data())) + "\n";
                }
                write_text(path_in(cfg, "export", stem + "_kernel.csv"), s);
                ++files;
            }
            if (opt.export_what != "kernels") {
                std::string s = "p1,value\n";
                for (int k = 0; k < c.symbol.N(); ++k)
                    s += format_double(c.grid.momentum(k)) + "," +
                         format_double(c.symbol.values[static_cast<std::size_t>(k) * ipow_size(c.symbol.N(), d - 1)]) +
                         "\n";
                write_text(path_in(cfg, "export", stem + "_symbol.csv"), s);
                ++files;
            }
        }
        engine.clear_kernels();
    }
    write_run_stats(cfg, "export", engine, t0);
    out << "exported " << files << " files\n";
    return 0;
}

} // namespace frd
