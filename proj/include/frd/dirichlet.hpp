#pragma once

#include "frd/lattice.hpp"

#include <atomic>
#include <cstddef>
#include <vector>

namespace frd {

// resolvent: (-Laplacian + a) h = 0;  unit: the variant (-Laplacian + 1) h = 0.
enum class MassTerm { resolvent, unit };

// (-Laplacian^D + a) on the interior of a cube, diagonalised by sine modes.
// Everything is in lattice units: the operator is -Laplacian_1 + a eps^2.
class DirichletOperator {
public:
    DirichletOperator(const CubeRegion& cube, double a, MassTerm mass = MassTerm::resolvent);

    const CubeRegion& cube() const { return cube_; }
    double a() const { return a_; }
    MassTerm mass_term() const { return mass_; }
    double site_mass() const { return mu_; }

    // Row x of the inverse, indexed by CubeRegion::interior_index.
    std::vector<double> green_row(const int* x) const;
    // Solve K h = b on the interior.
    std::vector<double> solve_interior(const std::vector<double>& b) const;
    // Apply K to an interior vector (zero Dirichlet data).
    std::vector<double> apply(const std::vector<double>& h) const;

    long solves() const { return solves_.load(); }

private:
    CubeRegion cube_;
    double a_;
    MassTerm mass_;
    double mu_;
    std::vector<double> lambda_;  // eigenvalues on the sine-mode grid
    mutable std::atomic<long> solves_{0};
};

// f indexed by CubeRegion::boundary_index; returns h on the interior.
std::vector<double> solve_dirichlet(const DirichletOperator& op, const std::vector<double>& f);

struct PoissonKernelTable {
    CubeRegion cube;
    double a = 0.0;
    MassTerm mass_term = MassTerm::resolvent;
    SiteList sources;
    // Rows for sources with sorted non-negative coordinates; every other source is
    // reached through a reflection/permutation of the cube.
    SiteList canonical;
    std::vector<std::vector<double>> canonical_masses;  // over boundary sites
    std::vector<std::size_t> source_canonical;
    std::vector<int> source_perm;   // d entries per source
    std::vector<int> source_sign;   // d entries per source
    long solves = 0;

    std::size_t source_count() const { return sources.size(); }
    std::size_t boundary_count() const { return cube.boundary.size(); }
    // Mass from source i onto boundary site u (lattice coordinates).
    double mass(std::size_t i, const int* u) const;
    std::vector<double> masses(std::size_t i) const;
    double total_mass(std::size_t i) const;
    // Boundary indices image[b] such that mass(i, boundary b) = canonical row[image[b]].
    std::vector<std::size_t> boundary_image(std::size_t i) const;
    const std::vector<double>& row_of(std::size_t i) const { return canonical_masses[source_canonical[i]]; }
};

PoissonKernelTable poisson_kernel(const CubeRegion& cube, double a, const SiteList& sources,
                                  MassTerm mass = MassTerm::resolvent, int threads = 1);
PoissonKernelTable poisson_kernel(const DirichletOperator& op, const SiteList& sources, int threads = 1);

// Sorted absolute coordinates together with the map taking x to them.
void canonical_form(const int* x, int d, int* canon, int* perm, int* sign);

} // namespace frd
