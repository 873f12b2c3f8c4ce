#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace frd {

struct LatticeSpec {
    int d = 3;
    int L = 2;
    int p = 1;
    int n_max = 3;

    // L must be 2^p with p >= 1; d < 3 needs the override.
    static LatticeSpec make(int d, int L, int n_max, bool allow_low_dimension = false);

    double eps(int n) const;
    // Edge length of the m-th cube, L^{-(m-1)}, divided by 16 for the tight geometry.
    double R(int m, bool tight = false) const;
    // L^k as an integer, k >= 0.
    long ipow(int k) const;
};

struct TorusGrid {
    int d = 3;
    double eps = 1.0;
    int M = 2;

    static TorusGrid make(int d, double eps, int M);
    // Grid of the n-th scale with physical side torus_factor * L.
    static TorusGrid for_scale(const LatticeSpec& spec, int n, int torus_factor);

    double side() const { return M * eps; }
    std::size_t sites() const;
    int half() const { return M / 2; }
    std::size_t octant_size() const;
    double momentum(int k) const;
    double cell() const;  // eps^d
    bool operator==(const TorusGrid& o) const { return d == o.d && eps == o.eps && M == o.M; }
};

enum class Geometry { standard, tight };

struct SiteList {
    int d = 0;
    std::vector<int> coords;

    std::size_t size() const { return d ? coords.size() / d : 0; }
    const int* operator[](std::size_t i) const { return coords.data() + i * d; }
    void push(const int* x) { coords.insert(coords.end(), x, x + d); }
};

// Sites are stored in units of eps relative to the cube centre.
struct CubeRegion {
    TorusGrid grid;
    int n = 0;
    int m = 0;
    Geometry geometry = Geometry::standard;
    double R = 1.0;
    int s = 2;  // edge in lattice units
    SiteList interior;
    SiteList boundary;

    int half() const { return s / 2; }
    bool is_interior(const int* x) const;
    bool is_boundary(const int* x) const;
    std::size_t interior_index(const int* x) const;
    std::size_t boundary_index(const int* u) const;
    // distance in lattice units from x to the complement of the interior
    int layers_inside(const int* x) const;
};

CubeRegion make_cube(const LatticeSpec& spec, int n, int m, Geometry geometry = Geometry::standard,
                     int torus_factor = 16);
// Cube of edge s lattice sites on an arbitrary grid.
CubeRegion make_cube_sites(const TorusGrid& grid, int s);

// Full periodic field, site j in [0, M) per axis; j >= M/2 stands for j - M.
struct LatticeField {
    TorusGrid grid;
    std::vector<double> values;

    explicit LatticeField(const TorusGrid& g, double fill = 0.0);
    std::size_t index(const int* j) const;  // wraps
    double at(const int* j) const { return values[index(j)]; }
};

struct FourierSymbol {
    TorusGrid grid;
    std::vector<std::complex<double>> values;
};

LatticeField forward_diff(const LatticeField& f, int axis, int order = 1);

// f^(p) = eps^d sum_x f(x) e^{-ipx};  f(x) = side^{-d} sum_p f^(p) e^{ipx}
FourierSymbol fourier_transform(const LatticeField& f);
LatticeField inverse_fourier_transform(const FourierSymbol& s);

// Kernel invariant under coordinate reflections, stored on the octant 0..extent per axis.
struct RealKernel {
    TorusGrid grid;
    int extent = 0;
    std::vector<double> values;
    double support_radius = 0.0;  // declared, physical units

    RealKernel() = default;
    RealKernel(const TorusGrid& g, int ext, double radius = 0.0);
    std::size_t index(const int* j) const;  // j with |j_i| <= extent
    double at(const int* j) const;          // any j in lattice units, 0 outside the stored box
    double at0() const { return values.empty() ? 0.0 : values[0]; }
};

// Real symbol of an even kernel on the octant of the momentum grid, k = 0..M/2.
struct EvenSymbol {
    TorusGrid grid;
    std::vector<double> values;

    EvenSymbol() = default;
    explicit EvenSymbol(const TorusGrid& g, double fill = 0.0);
    int N() const { return grid.M / 2 + 1; }
};

EvenSymbol symbol_of(const RealKernel& k);
// eps^d sum_x k(x) e^{-ipx} at an arbitrary momentum.
double symbol_at(const RealKernel& k, const double* p);

// The symbol of an even kernel evaluated one slab (fixed first momentum index) at a time.
class SymbolSlabs {
public:
    explicit SymbolSlabs(const RealKernel& k);
    std::size_t slab_size() const { return slab_; }
    // out has slab_size() entries, the octant values with first index k0.
    void slab(int k0, double* out) const;

private:
    int N_ = 0;
    int e1_ = 0;
    std::size_t slab_ = 0;
    bool full_ = false;
    std::vector<double> table_;  // N x e1 cosine weights
    std::vector<double> data_;   // e1 x slab partial sums, or the full symbol
};
RealKernel kernel_of(const EvenSymbol& s, double support_radius = 0.0);

LatticeField to_field(const RealKernel& k);
FourierSymbol to_fourier(const EvenSymbol& s);

// Subsample onto a coarser grid of the same side.
RealKernel restrict_kernel(const RealKernel& k, const TorusGrid& coarse);
// Keep only the low-index momenta of a finer grid of the same side.
EvenSymbol restrict_symbol(const EvenSymbol& s, const TorusGrid& coarse);

// Octant helpers.
std::size_t octant_flat(const int* k, int d, int n);
void octant_unflat(std::size_t i, int d, int n, int* k);
std::size_t ipow_size(std::size_t base, int e);

} // namespace frd
