#pragma once

// Sampled functions on a box in C^n = R^{2n} and on (C^n box) x (t-interval).

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "weylab/errors.hpp"
#include "weylab/hermite_core.hpp"

namespace weylab {

/// Uniform grid over [-L, L)^{2n}; coordinate i along any axis is -L + i*h.
struct GridSpec {
    int n = 1;
    double L = 8.0;
    int m = 64;

    double h() const { return 2.0 * L / m; }
    double coord(int i) const { return -L + i * h(); }
    std::size_t count() const {
        std::size_t c = 1;
        for (int a = 0; a < 2 * n; ++a) c *= static_cast<std::size_t>(m);
        return c;
    }
    double cell_volume() const { return std::pow(h(), 2 * n); }

    void validate() const {
        if (n < 1) throw ConfigError("grid dimension must be >= 1");
        if (m < 4 || m % 2 != 0) throw GridError("points per axis must be even and >= 4");
        if (!(L > 0.0)) throw ConfigError("grid half-width must be positive");
    }

    friend bool operator==(const GridSpec& a, const GridSpec& b) {
        return a.n == b.n && a.L == b.L && a.m == b.m;
    }
};

/// Worker cap for data-parallel loops. 1 keeps every reduction in index order.
inline int& default_workers() {
    static int w = 1;
    return w;
}

/// Complex samples on a GridSpec. Flat storage: axes ordered
/// (x_1..x_n, y_1..y_n), last axis fastest.
class PhaseGridFunction {
public:
    PhaseGridFunction() = default;
    explicit PhaseGridFunction(GridSpec spec) : spec_(spec), values_(Eigen::VectorXcd::Zero(spec.count())) {
        spec_.validate();
    }
    PhaseGridFunction(GridSpec spec, Eigen::VectorXcd values) : spec_(spec), values_(std::move(values)) {
        spec_.validate();
        if (static_cast<std::size_t>(values_.size()) != spec_.count())
            throw GridMismatchError("sample count does not match grid");
    }

    /// n = 1 convenience: samples fn(x, y).
    static PhaseGridFunction sample(const GridSpec& spec, const std::function<cplx(double, double)>& fn) {
        if (spec.n != 1) throw DomainError("two-argument sampler requires n = 1");
        PhaseGridFunction f(spec);
        for (int ix = 0; ix < spec.m; ++ix)
            for (int iy = 0; iy < spec.m; ++iy) f(ix, iy) = fn(spec.coord(ix), spec.coord(iy));
        return f;
    }

    /// Any n: fn receives the 2n coordinates (x_1..x_n, y_1..y_n).
    static PhaseGridFunction sample_nd(const GridSpec& spec, const std::function<cplx(const std::vector<double>&)>& fn) {
        PhaseGridFunction f(spec);
        std::vector<double> c(2 * spec.n);
        for (std::size_t k = 0; k < spec.count(); ++k) {
            std::size_t r = k;
            for (int a = 2 * spec.n - 1; a >= 0; --a) {
                c[a] = spec.coord(static_cast<int>(r % spec.m));
                r /= spec.m;
            }
            f.values_[static_cast<Eigen::Index>(k)] = fn(c);
        }
        return f;
    }

    const GridSpec& spec() const { return spec_; }
    const Eigen::VectorXcd& values() const { return values_; }
    Eigen::VectorXcd& values() { return values_; }

    cplx& operator()(int ix, int iy) { return values_[static_cast<Eigen::Index>(ix) * spec_.m + iy]; }
    cplx operator()(int ix, int iy) const { return values_[static_cast<Eigen::Index>(ix) * spec_.m + iy]; }

    /// Value at (ix, iy), zero outside the index box.
    cplx at_or_zero(int ix, int iy) const {
        if (ix < 0 || iy < 0 || ix >= spec_.m || iy >= spec_.m) return 0.0;
        return (*this)(ix, iy);
    }

    /// Discrete L^p norm (Riemann sum); p = +inf gives the sup norm.
    double norm(double p = 2.0) const {
        if (std::isinf(p)) return values_.cwiseAbs().maxCoeff();
        if (p == 2.0) return std::sqrt(values_.squaredNorm() * spec_.cell_volume());
        double s = 0.0;
        for (Eigen::Index i = 0; i < values_.size(); ++i) s += std::pow(std::abs(values_[i]), p);
        return std::pow(s * spec_.cell_volume(), 1.0 / p);
    }

    /// Weighted L^p norm (sum |f|^p w h^{2n})^{1/p}.
    double weighted_norm(const PhaseGridFunction& w, double p) const {
        check_same(w);
        double s = 0.0;
        for (Eigen::Index i = 0; i < values_.size(); ++i) s += std::pow(std::abs(values_[i]), p) * w.values_[i].real();
        return std::pow(s * spec_.cell_volume(), 1.0 / p);
    }

    cplx inner(const PhaseGridFunction& g) const {
        check_same(g);
        return values_.dot(g.values_) * spec_.cell_volume();
    }

    PhaseGridFunction conj() const { return {spec_, values_.conjugate()}; }
    PhaseGridFunction abs() const { return {spec_, values_.cwiseAbs().cast<cplx>()}; }

    PhaseGridFunction& operator+=(const PhaseGridFunction& g) {
        check_same(g);
        values_ += g.values_;
        return *this;
    }
    PhaseGridFunction& operator-=(const PhaseGridFunction& g) {
        check_same(g);
        values_ -= g.values_;
        return *this;
    }
    PhaseGridFunction& operator*=(cplx s) {
        values_ *= s;
        return *this;
    }
    friend PhaseGridFunction operator+(PhaseGridFunction a, const PhaseGridFunction& b) { return a += b; }
    friend PhaseGridFunction operator-(PhaseGridFunction a, const PhaseGridFunction& b) { return a -= b; }
    friend PhaseGridFunction operator*(PhaseGridFunction a, cplx s) { return a *= s; }
    friend PhaseGridFunction operator*(cplx s, PhaseGridFunction a) { return a *= s; }

    /// Pointwise product.
    PhaseGridFunction times(const PhaseGridFunction& g) const {
        check_same(g);
        return {spec_, values_.cwiseProduct(g.values_)};
    }

    void check_same(const PhaseGridFunction& g) const {
        if (!(spec_ == g.spec_)) throw GridMismatchError("grid functions live on different grids");
    }

private:
    GridSpec spec_;
    Eigen::VectorXcd values_;
};

/// Fraction of the L^2 mass sitting in the outer frame of the box (the cells
/// within max(2 cells, L/8) of an edge). Large values mean the box clips f.
inline double boundary_mass(const PhaseGridFunction& f) {
    const auto& s = f.spec();
    const int band = std::max(2, static_cast<int>(std::ceil(s.m / 16.0)));
    double outer = 0.0, total = 0.0;
    for (std::size_t k = 0; k < s.count(); ++k) {
        std::size_t r = k;
        bool edge = false;
        for (int a = 0; a < 2 * s.n; ++a) {
            const int i = static_cast<int>(r % s.m);
            r /= s.m;
            if (i < band || i >= s.m - band) edge = true;
        }
        const double v = std::norm(f.values()[static_cast<Eigen::Index>(k)]);
        total += v;
        if (edge) outer += v;
    }
    return total > 0.0 ? outer / total : 0.0;
}

// PhaseGridFunction file: char[8] "WEYLPGF1", u32 n, f64 L, u32 m, then
// m^{2n} (re, im) f64 pairs in flat order.
inline void save_grid_function(const PhaseGridFunction& f, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    const std::uint32_t n = f.spec().n, m = f.spec().m;
    const double L = f.spec().L;
    out.write("WEYLPGF1", 8);
    out.write(reinterpret_cast<const char*>(&n), 4);
    out.write(reinterpret_cast<const char*>(&L), 8);
    out.write(reinterpret_cast<const char*>(&m), 4);
    for (Eigen::Index i = 0; i < f.values().size(); ++i) {
        const double re = f.values()[i].real(), im = f.values()[i].imag();
        out.write(reinterpret_cast<const char*>(&re), 8);
        out.write(reinterpret_cast<const char*>(&im), 8);
    }
    if (!out) throw IoError("write failed for " + path);
}

inline PhaseGridFunction load_grid_function(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    char magic[8];
    std::uint32_t n, m;
    double L;
    in.read(magic, 8);
    in.read(reinterpret_cast<char*>(&n), 4);
    in.read(reinterpret_cast<char*>(&L), 8);
    in.read(reinterpret_cast<char*>(&m), 4);
    if (!in || std::memcmp(magic, "WEYLPGF1", 8) != 0) throw IoError(path + " is not a grid function file");
    GridSpec spec{static_cast<int>(n), L, static_cast<int>(m)};
    spec.validate();
    Eigen::VectorXcd v(static_cast<Eigen::Index>(spec.count()));
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        double re, im;
        in.read(reinterpret_cast<char*>(&re), 8);
        in.read(reinterpret_cast<char*>(&im), 8);
        v[i] = cplx(re, im);
    }
    if (!in) throw IoError(path + ": truncated payload");
    return {spec, std::move(v)};
}

/// Loads a weight profile and checks it is real and strictly positive.
inline PhaseGridFunction load_weight(const std::string& path) {
    auto w = load_grid_function(path);
    for (Eigen::Index i = 0; i < w.values().size(); ++i)
        if (!(w.values()[i].real() > 0.0) || w.values()[i].imag() != 0.0)
            throw ConfigError(path + ": weight must be real and strictly positive");
    return w;
}

// ---- differentiation on the z-grid (n = 1) ---------------------------------

/// Periodic spectral differentiation matrix for m equispaced points with
/// spacing h (even m, Nyquist mode zeroed).
inline RMatrix spectral_diff_matrix(int m, double h) {
    RMatrix D = RMatrix::Zero(m, m);
    const double scale = kPi / (m * h);  // (2 pi / (m h)) / 2
    for (int j = 0; j < m; ++j)
        for (int l = 0; l < m; ++l) {
            if (j == l) continue;
            const int d = j - l;
            const double sgn = (d % 2 == 0) ? 1.0 : -1.0;
            D(j, l) = sgn * scale / std::tan(kPi * d / m);
        }
    return D;
}

/// Second-order centered difference with one-sided second-order stencils at the ends.
inline RMatrix fd_diff_matrix(int m, double h) {
    RMatrix D = RMatrix::Zero(m, m);
    for (int j = 1; j + 1 < m; ++j) {
        D(j, j - 1) = -0.5 / h;
        D(j, j + 1) = 0.5 / h;
    }
    D(0, 0) = -1.5 / h;
    D(0, 1) = 2.0 / h;
    D(0, 2) = -0.5 / h;
    D(m - 1, m - 1) = 1.5 / h;
    D(m - 1, m - 2) = -2.0 / h;
    D(m - 1, m - 3) = 0.5 / h;
    return D;
}

enum class DiffScheme { finite_difference, spectral };

/// d/dx (axis 0) or d/dy (axis 1) of an n = 1 grid function.
inline PhaseGridFunction partial(const PhaseGridFunction& f, int axis, DiffScheme scheme) {
    const auto& s = f.spec();
    if (s.n != 1) throw DomainError("grid differentiation is implemented for n = 1");
    const RMatrix D = scheme == DiffScheme::spectral ? spectral_diff_matrix(s.m, s.h()) : fd_diff_matrix(s.m, s.h());
    Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> F(f.values().data(), s.m, s.m);
    Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> R =
        axis == 0 ? Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>(D.cast<cplx>() * F)
                  : Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>(F * D.transpose().cast<cplx>());
    PhaseGridFunction out(s);
    std::memcpy(out.values().data(), R.data(), sizeof(cplx) * s.count());
    return out;
}

/// Compact centered second difference [1, -2, 1] / h^2 (one-sided at the ends).
inline RMatrix fd_second_diff_matrix(int m, double h) {
    RMatrix D = RMatrix::Zero(m, m);
    const double c = 1.0 / (h * h);
    for (int j = 1; j + 1 < m; ++j) {
        D(j, j - 1) = c;
        D(j, j) = -2.0 * c;
        D(j, j + 1) = c;
    }
    D.row(0) = D.row(1);
    D.row(m - 1) = D.row(m - 2);
    return D;
}

/// d^2/dx^2 (axis 0) or d^2/dy^2 (axis 1).
inline PhaseGridFunction partial2(const PhaseGridFunction& f, int axis, DiffScheme scheme) {
    const auto& s = f.spec();
    if (s.n != 1) throw DomainError("grid differentiation is implemented for n = 1");
    RMatrix D;
    if (scheme == DiffScheme::spectral) {
        const RMatrix D1 = spectral_diff_matrix(s.m, s.h());
        D = D1 * D1;
    } else {
        D = fd_second_diff_matrix(s.m, s.h());
    }
    PhaseGridFunction out(s);
    for (int a = 0; a < s.m; ++a)
        for (int b = 0; b < s.m; ++b) {
            cplx acc = 0.0;
            for (int c = 0; c < s.m; ++c) {
                const double d = D(axis == 0 ? a : b, c);
                if (d != 0.0) acc += d * (axis == 0 ? f(c, b) : f(a, c));
            }
            out(a, b) = acc;
        }
    return out;
}

/// Multiplies by a function of the coordinates (n = 1).
inline PhaseGridFunction multiply_by(const PhaseGridFunction& f, const std::function<cplx(double, double)>& g) {
    const auto& s = f.spec();
    if (s.n != 1) throw DomainError("coordinate multiplication is implemented for n = 1");
    PhaseGridFunction out = f;
    for (int ix = 0; ix < s.m; ++ix)
        for (int iy = 0; iy < s.m; ++iy) out(ix, iy) *= g(s.coord(ix), s.coord(iy));
    return out;
}

/// B f = x df/dx + y df/dy (the dilation generator on C^1).
inline PhaseGridFunction euler_operator(const PhaseGridFunction& f, DiffScheme scheme) {
    auto fx = multiply_by(partial(f, 0, scheme), [](double x, double) { return cplx(x); });
    auto fy = multiply_by(partial(f, 1, scheme), [](double, double y) { return cplx(y); });
    return fx + fy;
}

/// Restricts to the inner box |x|,|y| < frac * L (zero outside).
inline PhaseGridFunction window(const PhaseGridFunction& f, double frac) {
    const double r = frac * f.spec().L;
    return multiply_by(f, [&](double x, double y) { return cplx(std::abs(x) < r && std::abs(y) < r ? 1.0 : 0.0); });
}

// ---- Heisenberg grid --------------------------------------------------------

/// t-grid over [-L_t, L_t) with T points.
struct TimeGrid {
    double L = kPi;
    int T = 64;

    double dt() const { return 2.0 * L / T; }
    double coord(int k) const { return -L + k * dt(); }
    /// Frequency spacing of the DFT lattice, 2 pi / (2 L_t).
    double dlambda() const { return kPi / L; }

    void validate() const {
        if (T < 2 || (T & (T - 1)) != 0) throw GridError("t-grid size must be a power of two");
        if (!(L > 0.0)) throw ConfigError("t half-width must be positive");
    }
    friend bool operator==(const TimeGrid& a, const TimeGrid& b) { return a.L == b.L && a.T == b.T; }
};

/// f(z, t): rows are z-points (PhaseGridFunction flat order), columns t-points.
class HeisenbergGridFunction {
public:
    HeisenbergGridFunction() = default;
    HeisenbergGridFunction(GridSpec z, TimeGrid t)
        : z_(z), t_(t), values_(CMatrix::Zero(static_cast<Eigen::Index>(z.count()), t.T)) {
        z_.validate();
        t_.validate();
    }
    HeisenbergGridFunction(GridSpec z, TimeGrid t, CMatrix values) : z_(z), t_(t), values_(std::move(values)) {
        z_.validate();
        t_.validate();
        if (values_.rows() != static_cast<Eigen::Index>(z_.count()) || values_.cols() != t_.T)
            throw GridMismatchError("sample array does not match (z, t) grid");
    }

    const GridSpec& zgrid() const { return z_; }
    const TimeGrid& tgrid() const { return t_; }
    const CMatrix& values() const { return values_; }
    CMatrix& values() { return values_; }

    PhaseGridFunction slice(int k) const { return {z_, values_.col(k)}; }
    void set_slice(int k, const PhaseGridFunction& f) {
        if (!(f.spec() == z_)) throw GridMismatchError("slice grid mismatch");
        values_.col(k) = f.values();
    }

    /// L^p norm over z and t.
    double norm(double p = 2.0) const {
        const double vol = z_.cell_volume() * t_.dt();
        if (std::isinf(p)) return values_.cwiseAbs().maxCoeff();
        if (p == 2.0) return std::sqrt(values_.squaredNorm() * vol);
        double s = 0.0;
        for (Eigen::Index j = 0; j < values_.cols(); ++j)
            for (Eigen::Index i = 0; i < values_.rows(); ++i) s += std::pow(std::abs(values_(i, j)), p);
        return std::pow(s * vol, 1.0 / p);
    }

private:
    GridSpec z_;
    TimeGrid t_;
    CMatrix values_;
};

// HeisenbergGridFunction file: char[8] "WEYLHGF1", u32 n, f64 L_z, u32 m,
// f64 L_t, u32 T, then (re, im) pairs, t fastest within each z-point.
inline void save_heisenberg_function(const HeisenbergGridFunction& f, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    const std::uint32_t n = f.zgrid().n, m = f.zgrid().m, T = f.tgrid().T;
    const double Lz = f.zgrid().L, Lt = f.tgrid().L;
    out.write("WEYLHGF1", 8);
    out.write(reinterpret_cast<const char*>(&n), 4);
    out.write(reinterpret_cast<const char*>(&Lz), 8);
    out.write(reinterpret_cast<const char*>(&m), 4);
    out.write(reinterpret_cast<const char*>(&Lt), 8);
    out.write(reinterpret_cast<const char*>(&T), 4);
    for (Eigen::Index i = 0; i < f.values().rows(); ++i)
        for (Eigen::Index k = 0; k < f.values().cols(); ++k) {
            const double re = f.values()(i, k).real(), im = f.values()(i, k).imag();
            out.write(reinterpret_cast<const char*>(&re), 8);
            out.write(reinterpret_cast<const char*>(&im), 8);
        }
    if (!out) throw IoError("write failed for " + path);
}

inline HeisenbergGridFunction load_heisenberg_function(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    char magic[8];
    std::uint32_t n, m, T;
    double Lz, Lt;
    in.read(magic, 8);
    in.read(reinterpret_cast<char*>(&n), 4);
    in.read(reinterpret_cast<char*>(&Lz), 8);
    in.read(reinterpret_cast<char*>(&m), 4);
    in.read(reinterpret_cast<char*>(&Lt), 8);
    in.read(reinterpret_cast<char*>(&T), 4);
    if (!in || std::memcmp(magic, "WEYLHGF1", 8) != 0) throw IoError(path + " is not a Heisenberg grid file");
    HeisenbergGridFunction f(GridSpec{static_cast<int>(n), Lz, static_cast<int>(m)}, TimeGrid{Lt, static_cast<int>(T)});
    for (Eigen::Index i = 0; i < f.values().rows(); ++i)
        for (Eigen::Index k = 0; k < f.values().cols(); ++k) {
            double re, im;
            in.read(reinterpret_cast<char*>(&re), 8);
            in.read(reinterpret_cast<char*>(&im), 8);
            f.values()(i, k) = cplx(re, im);
        }
    if (!in) throw IoError(path + ": truncated payload");
    return f;
}

}  // namespace weylab
