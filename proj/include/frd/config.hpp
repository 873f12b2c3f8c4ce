#pragma once

#include "frd/dirichlet.hpp"
#include "frd/lattice.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace frd {

// Flat `key = value` run configuration.  Lists are comma separated; `#` starts a comment.
struct RunConfig {
    int d = 3;
    int L = 2;
    int n_max = 3;
    std::vector<double> a_values{0.0, 1.0, 4.0, 16.0};
    std::optional<double> alpha = 1.0;
    std::string mollifier = "bump";
    int torus_factor = 16;
    bool tight_range = false;
    std::vector<int> k_orders{0, 2};
    int n_ref = 4;
    int quad_panels = 16;
    int quad_nodes = 16;
    int quad_tail_panels = 4;
    double quad_cutoff = 0.0;  // 0: derived from the decay rate
    int reconstruct_radius = 4;
    int decay_scale = -1;  // -1: min(2, n_max)
    std::string cache_dir;
    std::uint64_t seed = 20240917;
    double memory_cap_mb = 4096.0;
    MassTerm mass_term = MassTerm::resolvent;
    std::string output_dir = "frd-out";
    bool allow_low_dimension = false;
    int threads = 1;

    LatticeSpec spec() const;
    int decay_n() const { return decay_scale < 0 ? std::min(2, n_max) : decay_scale; }
    // Throws ConfigurationError / ParameterError / InvalidScale on a violated invariant.
    void validate() const;
    std::string to_text() const;  // canonical rendering, parses back to the same config
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

struct CostEstimate {
    double peak_bytes = 0.0;
    std::map<std::string, double> items;  // bytes per component
    std::string report() const;
};
CostEstimate estimate_cost(const RunConfig& c);
// Refuses with the cost report when the estimate exceeds the configured cap.
void enforce_memory_cap(const RunConfig& c);

} // namespace frd
