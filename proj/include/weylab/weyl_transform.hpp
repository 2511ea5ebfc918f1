#pragma once

// Weyl transform W(f) = sum_z f(z) W(z) h_z^{2n} on a phase-space grid, its
// inverse k(z) = (2 pi)^{-n} tr(W(z)^* M), twisted convolution, multipliers,
// special Hermite functions and the resampling helpers around them.
//
// W(z) phi(xi) = exp(i (x.xi + x.y/2)) phi(xi + y), z = x + i y. Its matrix is
// Phi(z)_{ab} = <W(z) h_b, h_a>, evaluated by trapezoid quadrature on the xi grid.
// With h_z an integer multiple of h_xi the translation is an index shift.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <map>
#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <memory>
#include <mutex>
#include <random>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "weylab/errors.hpp"
#include "weylab/grid.hpp"
#include "weylab/hermite_core.hpp"
#include "weylab/parallel.hpp"

namespace weylab {

// Frozen constants. calibrate() re-measures them; the test suite checks the
// measured values against these.
inline constexpr double kPlancherelConstant = 2.0 * kPi;        // ||W(f)||_HS^2 / ||f||_2^2 (n = 1)
inline constexpr double kInversionConstant = 1.0 / (2.0 * kPi);  // k = c tr(W(z)^* M)      (n = 1)
inline const double kSpecialHermiteNorm = 1.0 / std::sqrt(2.0 * kPi);

inline double plancherel_constant(int n) { return std::pow(2.0 * kPi, n); }
inline double inversion_constant(int n) { return std::pow(2.0 * kPi, -n); }

struct Diagnostics {
    double boundary_mass = 0.0;
    std::vector<std::string> warnings;
};

/// Phase-space point used for the grid point z = (x, y): (xs x, ys y).
/// for_lambda: (sigma s x, s y), s = sqrt|lambda|, sigma = sign(lambda), which
/// realizes W_lambda in the lambda-scaled basis. unit_basis: (lambda x, y), the
/// same representation written in the unscaled basis.
struct PointScaling {
    double xs = 1.0;
    double ys = 1.0;
    double basis = 1.0;  // basis tag carried by transformed matrices

    static PointScaling for_lambda(double lambda) {
        if (lambda == 0.0 || !std::isfinite(lambda)) throw DomainError("lambda must be a nonzero real");
        const double s = std::sqrt(std::abs(lambda));
        return {lambda > 0 ? s : -s, s, lambda};
    }
    static PointScaling unit_basis(double lambda) {
        if (lambda == 0.0 || !std::isfinite(lambda)) throw DomainError("lambda must be a nonzero real");
        return {lambda, 1.0, 1.0};
    }
    bool unit() const { return xs == 1.0 && ys == 1.0; }
    double jacobian() const { return std::abs(xs * ys); }
};

namespace detail {

inline void require_n1(const HermiteContext& ctx, const GridSpec& spec, const char* what) {
    if (ctx.n() != 1 || spec.n != 1) throw DomainError(std::string(what) + " is implemented for n = 1");
}

inline void check_spec_matches(const HermiteContext& ctx, const GridSpec& spec) {
    if (ctx.n() != spec.n) throw GridMismatchError("grid dimension differs from context dimension");
}

/// Integer xi-index shift for a translation by `shift`, or false.
inline bool lattice_shift(const HermiteContext& ctx, double shift, long& k) {
    const double q = shift / ctx.step();
    k = std::lround(q);
    return std::abs(q - static_cast<double>(k)) < 1e-9;
}

inline void check_alignment(const HermiteContext& ctx, const GridSpec& spec, double s = 1.0) {
    long k;
    if (!lattice_shift(ctx, s * spec.h(), k) || !lattice_shift(ctx, s * spec.L, k))
        throw AlignmentError("z-grid spacing " + std::to_string(s * spec.h()) +
                             " is not an integer multiple of h_xi = " + std::to_string(ctx.step()));
}

/// G[i, b] = h_b(xi_i + shift); lattice shifts reuse the samples, other shifts
/// evaluate the recurrence.
inline RMatrix shifted_samples(const HermiteContext& ctx, double shift) {
    const int P = ctx.points(), N = ctx.N();
    RMatrix G = RMatrix::Zero(P, N);
    long k;
    if (lattice_shift(ctx, shift, k)) {
        for (int i = 0; i < P; ++i) {
            const long j = i + k;
            if (j >= 0 && j < P) G.row(i) = ctx.samples().row(j);
        }
        return G;
    }
    std::vector<double> buf(N);
    for (int i = 0; i < P; ++i) {
        ctx.evaluate(ctx.grid()[i] + shift, buf.data());
        for (int b = 0; b < N; ++b) G(i, b) = buf[b];
    }
    return G;
}

/// E[i, ix] = exp(i x' xi_i) with x' = xs x_ix.
inline CMatrix xi_phase_table(const HermiteContext& ctx, const GridSpec& spec, PointScaling sc) {
    CMatrix E(ctx.points(), spec.m);
    for (int ix = 0; ix < spec.m; ++ix) {
        const double xp = sc.xs * spec.coord(ix);
        for (int i = 0; i < ctx.points(); ++i) E(i, ix) = std::polar(1.0, xp * ctx.grid()[i]);
    }
    return E;
}

inline RMatrix kron_r(const RMatrix& a, const RMatrix& b) { return kron(a, b); }

inline CMatrix kron_c(const CMatrix& a, const CMatrix& b) {
    CMatrix r(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            r.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return r;
}

/// One-dimensional Phi at (x, y), already mapped through the point scaling.
inline CMatrix point_matrix_1d(const HermiteContext& ctx, double x, double y) {
    const RMatrix G = shifted_samples(ctx, y);
    const int P = ctx.points();
    Eigen::VectorXcd e(P);
    for (int i = 0; i < P; ++i) e[i] = std::polar(ctx.step(), x * (ctx.grid()[i] + 0.5 * y));
    const CMatrix Hc = ctx.samples().cast<cplx>();
    return Hc.transpose() * e.asDiagonal() * G.cast<cplx>();
}

}  // namespace detail

/// Phi(z) for z = (x_1..x_n, y_1..y_n); tensor product over coordinates.
inline CMatrix weyl_point_matrix(const HermiteContext& ctx, const std::vector<double>& z) {
    if (static_cast<int>(z.size()) != 2 * ctx.n()) throw DomainError("point must have 2n coordinates");
    CMatrix r = CMatrix::Identity(1, 1);
    for (int j = 0; j < ctx.n(); ++j) {
        long k;
        if (!detail::lattice_shift(ctx, z[ctx.n() + j], k))
            throw AlignmentError("y-coordinate " + std::to_string(z[ctx.n() + j]) + " is off the xi lattice");
        r = detail::kron_c(r, detail::point_matrix_1d(ctx, z[j], z[ctx.n() + j]));
    }
    return r;
}

inline CMatrix weyl_point_matrix(const HermiteContext& ctx, double x, double y) {
    return weyl_point_matrix(ctx, std::vector<double>{x, y});
}

/// Lazily materialized Phi(z) for every point of one grid.
class WeylMatrixCache {
public:
    WeylMatrixCache(ContextPtr ctx, GridSpec spec) : ctx_(std::move(ctx)), spec_(spec) {
        detail::check_spec_matches(*ctx_, spec_);
        detail::check_alignment(*ctx_, spec_);
    }

    const GridSpec& spec() const { return spec_; }
    const HermiteContext& context() const { return *ctx_; }

    std::shared_ptr<const CMatrix> get(std::size_t flat) const {
        {
            std::shared_lock lock(mu_);
            auto it = entries_.find(flat);
            if (it != entries_.end()) return it->second;
        }
        auto m = std::make_shared<const CMatrix>(weyl_point_matrix(*ctx_, point(flat)));
        std::unique_lock lock(mu_);
        entries_[flat] = m;  // duplicates are identical, last write wins
        return m;
    }

    std::vector<double> point(std::size_t flat) const {
        std::vector<double> c(2 * spec_.n);
        for (int a = 2 * spec_.n - 1; a >= 0; --a) {
            c[a] = spec_.coord(static_cast<int>(flat % spec_.m));
            flat /= spec_.m;
        }
        return c;
    }

    std::size_t materialized() const {
        std::shared_lock lock(mu_);
        return entries_.size();
    }

    // File: char[8] "WEYLCAC1", u64 context hash, u32 n, f64 L, u32 m, u64 count,
    // then per entry u64 flat index and the row-major (re, im) matrix.
    void save(const std::string& path) const {
        std::shared_lock lock(mu_);
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError("cannot open " + path + " for writing");
        const std::uint64_t hash = ctx_->hash(), count = entries_.size();
        const std::uint32_t n = spec_.n, m = spec_.m;
        out.write("WEYLCAC1", 8);
        out.write(reinterpret_cast<const char*>(&hash), 8);
        out.write(reinterpret_cast<const char*>(&n), 4);
        out.write(reinterpret_cast<const char*>(&spec_.L), 8);
        out.write(reinterpret_cast<const char*>(&m), 4);
        out.write(reinterpret_cast<const char*>(&count), 8);
        std::vector<std::size_t> keys;
        for (const auto& kv : entries_) keys.push_back(kv.first);
        std::sort(keys.begin(), keys.end());
        for (auto key : keys) {
            const std::uint64_t k64 = key;
            out.write(reinterpret_cast<const char*>(&k64), 8);
            const CMatrix& M = *entries_.at(key);
            for (Eigen::Index i = 0; i < M.rows(); ++i)
                for (Eigen::Index j = 0; j < M.cols(); ++j) {
                    const double re = M(i, j).real(), im = M(i, j).imag();
                    out.write(reinterpret_cast<const char*>(&re), 8);
                    out.write(reinterpret_cast<const char*>(&im), 8);
                }
        }
        if (!out) throw IoError("write failed for " + path);
    }

    /// Loads entries written by save(). A file made for another context or grid
    /// is ignored (the cache stays empty) and false is returned.
    bool load(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw IoError("cannot open " + path);
        char magic[8];
        std::uint64_t hash, count;
        std::uint32_t n, m;
        double L;
        in.read(magic, 8);
        in.read(reinterpret_cast<char*>(&hash), 8);
        in.read(reinterpret_cast<char*>(&n), 4);
        in.read(reinterpret_cast<char*>(&L), 8);
        in.read(reinterpret_cast<char*>(&m), 4);
        in.read(reinterpret_cast<char*>(&count), 8);
        if (!in || std::memcmp(magic, "WEYLCAC1", 8) != 0) throw IoError(path + " is not a Weyl matrix cache");
        if (hash != ctx_->hash() || !(GridSpec{static_cast<int>(n), L, static_cast<int>(m)} == spec_)) return false;
        const int S = ctx_->size();
        std::unordered_map<std::size_t, std::shared_ptr<const CMatrix>> loaded;
        for (std::uint64_t c = 0; c < count; ++c) {
            std::uint64_t key;
            in.read(reinterpret_cast<char*>(&key), 8);
            CMatrix M(S, S);
            for (int i = 0; i < S; ++i)
                for (int j = 0; j < S; ++j) {
                    double re, im;
                    in.read(reinterpret_cast<char*>(&re), 8);
                    in.read(reinterpret_cast<char*>(&im), 8);
                    M(i, j) = cplx(re, im);
                }
            loaded[key] = std::make_shared<const CMatrix>(std::move(M));
        }
        if (!in) throw IoError(path + ": truncated cache file");
        std::unique_lock lock(mu_);
        entries_ = std::move(loaded);
        return true;
    }

private:
    ContextPtr ctx_;
    GridSpec spec_;
    mutable std::shared_mutex mu_;
    mutable std::unordered_map<std::size_t, std::shared_ptr<const CMatrix>> entries_;
};

/// Reference forward transform through the cache: sum_z f(z) Phi(z) h_z^{2n}.
/// Any n; O(grid * N^{2n}) and meant for cross-checks.
inline OperatorMatrix weyl_transform_generic(const ContextPtr& ctx, const PhaseGridFunction& f,
                                             const WeylMatrixCache& cache) {
    if (!(cache.spec() == f.spec())) throw GridMismatchError("cache grid differs from function grid");
    CMatrix W = CMatrix::Zero(ctx->size(), ctx->size());
    for (std::size_t k = 0; k < f.spec().count(); ++k) {
        const cplx v = f.values()[static_cast<Eigen::Index>(k)];
        if (v != 0.0) W += v * *cache.get(k);
    }
    return {ctx, W * f.spec().cell_volume()};
}

/// Reference inverse through the cache.
inline PhaseGridFunction inverse_weyl_generic(const ContextPtr& ctx, const OperatorMatrix& M,
                                              const WeylMatrixCache& cache) {
    PhaseGridFunction k(cache.spec());
    const double c = inversion_constant(ctx->n());
    for (std::size_t p = 0; p < cache.spec().count(); ++p)
        k.values()[static_cast<Eigen::Index>(p)] = c * (cache.get(p)->conjugate().cwiseProduct(M.entries())).sum();
    return k;
}

/// W_lambda(f) in the lambda-scaled basis (scaling = identity gives W(f)).
/// n = 1 fast path: W = H^T Q H h_xi h_z^2 with Q banded when y-shifts are on
/// the xi lattice, otherwise one shifted sample block per y.
inline OperatorMatrix weyl_transform(const ContextPtr& ctx, const PhaseGridFunction& f,
                                     PointScaling sc = {}, Diagnostics* diag = nullptr) {
    const auto& spec = f.spec();
    detail::check_spec_matches(*ctx, spec);
    if (ctx->n() != 1) {
        WeylMatrixCache cache(ctx, spec);
        return weyl_transform_generic(ctx, f, cache);
    }
    if (sc.unit()) detail::check_alignment(*ctx, spec);
    if (diag) {
        diag->boundary_mass = boundary_mass(f);
        if (diag->boundary_mass > 0.01)
            diag->warnings.push_back("CapacityError(warning): " + std::to_string(100 * diag->boundary_mass) +
                                     "% of the mass sits at the box boundary");
    }
    const int P = ctx->points(), m = spec.m;
    const CMatrix E = detail::xi_phase_table(*ctx, spec, sc);
    // Fm[ix, iy] = f(x, y) exp(i x' y' / 2)
    CMatrix Fm(m, m);
    for (int ix = 0; ix < m; ++ix)
        for (int iy = 0; iy < m; ++iy) {
            const double xp = sc.xs * spec.coord(ix), yp = sc.ys * spec.coord(iy);
            Fm(ix, iy) = f(ix, iy) * std::polar(1.0, 0.5 * xp * yp);
        }
    const CMatrix Gy = E * Fm;  // column iy: g_y(xi_i) = sum_x f(x,y) e^{i x'(xi_i + y'/2)}
    const CMatrix Hc = ctx->samples().cast<cplx>();
    const double w = ctx->step() * spec.cell_volume();

    bool on_lattice = true;
    std::vector<long> shift(m);
    for (int iy = 0; iy < m; ++iy) on_lattice &= detail::lattice_shift(*ctx, sc.ys * spec.coord(iy), shift[iy]);

    if (on_lattice) {
        CMatrix Q = CMatrix::Zero(P, P);
        for (int iy = 0; iy < m; ++iy)
            for (int i = 0; i < P; ++i) {
                const long j = i + shift[iy];
                if (j >= 0 && j < P) Q(i, j) += Gy(i, iy);
            }
        return {ctx, Hc.transpose() * Q * Hc * w, 0, sc.basis};
    }
    CMatrix W = CMatrix::Zero(ctx->N(), ctx->N());
    for (int iy = 0; iy < m; ++iy) {
        const RMatrix G = detail::shifted_samples(*ctx, sc.ys * spec.coord(iy));
        W.noalias() += Hc.transpose() * (Gy.col(iy).asDiagonal() * G.cast<cplx>());
    }
    return {ctx, W * w, 0, sc.basis};
}

inline OperatorMatrix weyl_transform_lambda(const ContextPtr& ctx, const PhaseGridFunction& f, double lambda) {
    return weyl_transform(ctx, f, PointScaling::for_lambda(lambda));
}

namespace detail {

/// sum_{ab} conj(Phi(z')_{ab}) K_{ab} for every grid point (z' the scaled point).
inline PhaseGridFunction pairing(const ContextPtr& ctx, const CMatrix& K, const GridSpec& spec, PointScaling sc) {
    require_n1(*ctx, spec, "grid pairing");
    if (sc.unit()) check_alignment(*ctx, spec);
    const int P = ctx->points(), m = spec.m;
    const CMatrix Hc = ctx->samples().cast<cplx>();
    const CMatrix HK = Hc * K;  // P x N
    CMatrix V(P, m);            // V(i, iy) = sum_ab H[i,a] K_ab h_b(xi_i + y')
    bool on_lattice = true;
    std::vector<long> shift(m);
    for (int iy = 0; iy < m; ++iy) on_lattice &= lattice_shift(*ctx, sc.ys * spec.coord(iy), shift[iy]);
    if (on_lattice) {
        const CMatrix R = HK * Hc.transpose();  // R(i, j) = sum_ab H[i,a] K_ab H[j,b]
        for (int iy = 0; iy < m; ++iy)
            for (int i = 0; i < P; ++i) {
                const long j = i + shift[iy];
                V(i, iy) = (j >= 0 && j < P) ? R(i, j) : cplx(0.0);
            }
    } else {
        for (int iy = 0; iy < m; ++iy) {
            const RMatrix G = shifted_samples(*ctx, sc.ys * spec.coord(iy));
            V.col(iy) = (HK.array() * G.cast<cplx>().array()).rowwise().sum();
        }
    }
    const CMatrix E = xi_phase_table(*ctx, spec, sc);
    const CMatrix Kz = E.adjoint() * V * ctx->step();  // (ix, iy)
    PhaseGridFunction out(spec);
    for (int ix = 0; ix < m; ++ix)
        for (int iy = 0; iy < m; ++iy) {
            const double xp = sc.xs * spec.coord(ix), yp = sc.ys * spec.coord(iy);
            out(ix, iy) = Kz(ix, iy) * std::polar(1.0, -0.5 * xp * yp);
        }
    return out;
}

}  // namespace detail

/// k(z) = (2 pi)^{-n} |lambda|^n tr(W_lambda(z)^* M) with M in the lambda-scaled basis.
inline PhaseGridFunction inverse_weyl(const ContextPtr& ctx, const OperatorMatrix& M, const GridSpec& spec,
                                      PointScaling sc = {}) {
    detail::check_spec_matches(*ctx, spec);
    if (ctx->n() != 1) {
        WeylMatrixCache cache(ctx, spec);
        return inverse_weyl_generic(ctx, M, cache);
    }
    auto k = detail::pairing(ctx, M.entries(), spec, sc);
    k *= inversion_constant(1) * sc.jacobian();
    return k;
}

inline PhaseGridFunction inverse_weyl_lambda(const ContextPtr& ctx, const OperatorMatrix& M, const GridSpec& spec,
                                             double lambda) {
    return inverse_weyl(ctx, M, spec, PointScaling::for_lambda(lambda));
}

/// sum_{ab} K_{ab} Phi(z)_{ab}: the grid function whose coefficients are K.
inline PhaseGridFunction synthesize(const ContextPtr& ctx, const CMatrix& K, const GridSpec& spec) {
    return detail::pairing(ctx, K.conjugate(), spec, {}).conj();
}

/// z -> Phi(z)_{ab}.
inline PhaseGridFunction matrix_coefficient(const ContextPtr& ctx, int a, int b, const GridSpec& spec) {
    CMatrix K = CMatrix::Zero(ctx->N(), ctx->N());
    K(a, b) = 1.0;
    return synthesize(ctx, K, spec);
}

/// Phi_{alpha beta}(z) = c <W(z) h_alpha, h_beta> = c Phi(z)_{beta alpha},
/// c = (2 pi)^{-1/2}. Unit L^2 norm, and W(conj Phi_{alpha beta}) = sqrt(2 pi) |h_beta><h_alpha|.
inline PhaseGridFunction special_hermite_fn(const ContextPtr& ctx, int alpha, int beta, const GridSpec& spec) {
    if (alpha < 0 || beta < 0 || alpha >= ctx->N() || beta >= ctx->N())
        throw TruncationError("special Hermite index outside the truncation");
    auto f = matrix_coefficient(ctx, beta, alpha, spec);
    f *= kSpecialHermiteNorm;
    return f;
}

inline PhaseGridFunction special_hermite_fn(const ContextPtr& ctx, const MultiIndex& alpha, const MultiIndex& beta,
                                            const GridSpec& spec) {
    if (alpha.size() != 1 || beta.size() != 1) throw DomainError("special Hermite functions on grids need n = 1");
    return special_hermite_fn(ctx, alpha[0], beta[0], spec);
}

/// Random f with Hermite coefficients confined to the block [0, band]^2,
/// normalized to unit L^2 norm.
template <class Rng>
PhaseGridFunction random_band_limited(const ContextPtr& ctx, const GridSpec& spec, int band, Rng& rng) {
    if (band >= ctx->N()) throw TruncationError("band limit exceeds truncation");
    std::normal_distribution<double> g(0.0, 1.0);
    CMatrix K = CMatrix::Zero(ctx->N(), ctx->N());
    for (int a = 0; a <= band; ++a)
        for (int b = 0; b <= band; ++b) K(a, b) = cplx(g(rng), g(rng));
    auto f = synthesize(ctx, K, spec);
    const double nrm = f.norm();
    if (nrm == 0.0) throw ZeroNorm("random band-limited function vanished");
    f *= 1.0 / nrm;
    return f;
}

/// (f x g)(z) = sum_w f(z - w) g(w) exp(sign * (i/2) Im(z conj w)) h_z^2;
/// translates leaving the box count as zero. sign = +1 makes W(f x g) = W(f) W(g).
inline PhaseGridFunction twisted_convolve(const PhaseGridFunction& f, const PhaseGridFunction& g, int sign = +1,
                                          Diagnostics* diag = nullptr) {
    f.check_same(g);
    const auto& s = f.spec();
    if (s.n != 1) throw DomainError("twisted convolution is implemented for n = 1");
    const int m = s.m, half = m / 2;
    // Im(z conj w) = b c - a d for z = a + i b, w = c + i d.
    CMatrix ph(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) ph(i, j) = std::polar(1.0, 0.5 * sign * s.coord(i) * s.coord(j));
    PhaseGridFunction out(s);
    const double vol = s.cell_volume();
    parallel_for(static_cast<std::size_t>(m), default_workers(), [&](std::size_t ia_) {
        const int ia = static_cast<int>(ia_);
        for (int ib = 0; ib < m; ++ib) {
            cplx acc = 0.0;
            for (int ic = 0; ic < m; ++ic) {
                const int ka = ia - ic + half;
                if (ka < 0 || ka >= m) continue;
                cplx inner = 0.0;
                for (int id = 0; id < m; ++id) {
                    const int kb = ib - id + half;
                    if (kb < 0 || kb >= m) continue;
                    inner += f(ka, kb) * g(ic, id) * std::conj(ph(ia, id));
                }
                acc += inner * ph(ib, ic);
            }
            out(ia, ib) = acc * vol;
        }
    });
    if (diag) {
        diag->boundary_mass = boundary_mass(out);
        if (diag->boundary_mass > 0.01) diag->warnings.push_back("twisted convolution has mass at the box boundary");
    }
    return out;
}

/// T_m f = W^{-1}(m W(f)), optionally for the lambda-scaled representation.
inline PhaseGridFunction apply_multiplier(const ContextPtr& ctx, const OperatorMatrix& m, const PhaseGridFunction& f,
                                          PointScaling sc = {}) {
    const auto W = weyl_transform(ctx, f, sc);
    return inverse_weyl(ctx, m * W, f.spec(), sc);
}

/// Same as apply_multiplier but with m acting on the right: W(T f) = W(f) m.
inline PhaseGridFunction apply_right_multiplier(const ContextPtr& ctx, const OperatorMatrix& m,
                                                const PhaseGridFunction& f, PointScaling sc = {}) {
    const auto W = weyl_transform(ctx, f, sc);
    return inverse_weyl(ctx, W * m, f.spec(), sc);
}

// ---- resampling --------------------------------------------------------------

/// 8-point tensor Lagrange interpolation at an arbitrary (x, y); zero outside the box.
inline cplx interpolate(const PhaseGridFunction& f, double x, double y) {
    constexpr int P = 12;  // tensor Lagrange stencil; 8 points leaves ~1e-5 on h = 0.375 Gaussians
    const auto& s = f.spec();
    const double h = s.h();
    const double u = (x + s.L) / h, v = (y + s.L) / h;
    if (u < -0.5 || v < -0.5 || u > s.m - 0.5 || v > s.m - 0.5) return 0.0;
    const int iu = static_cast<int>(std::floor(u)) - (P / 2 - 1), iv = static_cast<int>(std::floor(v)) - (P / 2 - 1);
    std::array<double, P> wu{}, wv{};
    for (int a = 0; a < P; ++a) {
        double pu = 1.0, pv = 1.0;
        for (int b = 0; b < P; ++b) {
            if (b == a) continue;
            pu *= (u - (iu + b)) / static_cast<double>(a - b);
            pv *= (v - (iv + b)) / static_cast<double>(a - b);
        }
        wu[a] = pu;
        wv[a] = pv;
    }
    cplx acc = 0.0;
    for (int a = 0; a < P; ++a) {
        if (wu[a] == 0.0) continue;
        cplx row = 0.0;
        for (int b = 0; b < P; ++b) row += wv[b] * f.at_or_zero(iu + a, iv + b);
        acc += wu[a] * row;
    }
    return acc;
}

/// (delta_r f)(z) = f(r z) on the same grid. Integer r is exact; other r need
/// interpolation enabled.
inline PhaseGridFunction dilate(const PhaseGridFunction& f, double r, bool interpolate_off_lattice = false) {
    const auto& s = f.spec();
    if (s.n != 1) throw DomainError("dilation is implemented for n = 1");
    if (!(r > 0.0)) throw DomainError("dilation factor must be positive");
    const long ri = std::lround(r);
    const bool exact = std::abs(r - static_cast<double>(ri)) < 1e-12;
    if (!exact && !interpolate_off_lattice)
        throw ResampleError("dilation by " + std::to_string(r) + " does not map the grid into itself");
    PhaseGridFunction out(s);
    const int half = s.m / 2;
    for (int ix = 0; ix < s.m; ++ix)
        for (int iy = 0; iy < s.m; ++iy) {
            if (exact) {
                out(ix, iy) = f.at_or_zero(static_cast<int>(ri * (ix - half) + half), static_cast<int>(ri * (iy - half) + half));
            } else {
                out(ix, iy) = interpolate(f, r * s.coord(ix), r * s.coord(iy));
            }
        }
    return out;
}

/// Same samples read on a grid r times wider: the result is z -> f(z / r), exactly.
inline PhaseGridFunction relabel(const PhaseGridFunction& f, double r) {
    GridSpec s = f.spec();
    s.L *= r;
    return {s, f.values()};
}

/// (e_lambda f)(x, y) = exp((i/2) lambda x.y) f(x, y).
inline PhaseGridFunction twist_modulate(const PhaseGridFunction& f, double lambda) {
    return multiply_by(f, [&](double x, double y) { return std::polar(1.0, 0.5 * lambda * x * y); });
}

/// Rf(z) = (2 pi)^{-1} int f(e^{i theta} z) d theta with Q equispaced angles (n = 1),
/// for several functions on one grid at once: each rotated-point stencil is
/// built once and applied to all of them.
inline void polyradial_project_many(const std::vector<PhaseGridFunction*>& fs, int Q = 64) {
    if (fs.empty()) return;
    const auto s = fs.front()->spec();
    if (s.n != 1) throw DomainError("polyradial projection is implemented for n = 1");
    if (Q < 64) throw ConfigError("polyradial projection needs at least 64 angles");
    for (const auto* f : fs) fs.front()->check_same(*f);
    constexpr int P = 12;  // same stencil as interpolate()
    const Eigen::Index F = static_cast<Eigen::Index>(fs.size());
    CMatrix V(F, s.count());  // one column per grid point
    for (Eigen::Index r = 0; r < F; ++r) V.row(r) = fs[static_cast<std::size_t>(r)]->values().transpose();
    CMatrix out = CMatrix::Zero(F, s.count());
    std::vector<double> c(Q), sn(Q);
    for (int q = 0; q < Q; ++q) {
        c[q] = std::cos(2.0 * kPi * q / Q);
        sn[q] = std::sin(2.0 * kPi * q / Q);
    }
    const double h = s.h();
    // coord(i) = h (i - m/2), so |z|^2 / h^2 is an integer: the average is evaluated
    // once per circle and copied to every grid point on it
    std::map<long, std::vector<Eigen::Index>> circles;
    for (int ix = 0; ix < s.m; ++ix)
        for (int iy = 0; iy < s.m; ++iy) {
            const long a = 2L * ix - s.m, b = 2L * iy - s.m;  // twice the offset, stays integral for odd m
            circles[a * a + b * b].push_back(static_cast<Eigen::Index>(ix) * s.m + iy);
        }
    std::vector<const std::vector<Eigen::Index>*> work;
    for (const auto& [k, pts] : circles) work.push_back(&pts);
    parallel_for(work.size(), default_workers(), [&](std::size_t w) {
        const auto& pts = *work[w];
        const double x = s.coord(static_cast<int>(pts.front() / s.m)), y = s.coord(static_cast<int>(pts.front() % s.m));
        Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(F);
        for (int q = 0; q < Q; ++q) {
            const double u = (c[q] * x - sn[q] * y + s.L) / h, v = (sn[q] * x + c[q] * y + s.L) / h;
            if (u < -0.5 || v < -0.5 || u > s.m - 0.5 || v > s.m - 0.5) continue;
            const int iu = static_cast<int>(std::floor(u)) - (P / 2 - 1), iv = static_cast<int>(std::floor(v)) - (P / 2 - 1);
            std::array<double, P> wu{}, wv{};
            for (int a = 0; a < P; ++a) {
                double pu = 1.0, pv = 1.0;
                for (int b = 0; b < P; ++b) {
                    if (b == a) continue;
                    pu *= (u - (iu + b)) / static_cast<double>(a - b);
                    pv *= (v - (iv + b)) / static_cast<double>(a - b);
                }
                wu[a] = pu;
                wv[a] = pv;
            }
            for (int a = 0; a < P; ++a) {
                const int i = iu + a;
                if (i < 0 || i >= s.m || wu[a] == 0.0) continue;
                for (int b = 0; b < P; ++b) {
                    const int j = iv + b;
                    if (j < 0 || j >= s.m) continue;
                    acc += (wu[a] * wv[b]) * V.col(static_cast<Eigen::Index>(i) * s.m + j);
                }
            }
        }
        acc /= static_cast<double>(Q);
        for (const auto k : pts) out.col(k) = acc;
    });
    for (Eigen::Index r = 0; r < F; ++r) fs[static_cast<std::size_t>(r)]->values() = out.row(r).transpose();
}

inline PhaseGridFunction polyradial_project(const PhaseGridFunction& f, int Q = 64) {
    PhaseGridFunction g = f;
    polyradial_project_many({&g}, Q);
    return g;
}

// ---- calibration -------------------------------------------------------------

struct CalibrationRecord {
    double plancherel = 0.0;     // ||W(f)||^2 / ||f||^2
    double inversion = 0.0;      // k / tr(W(z)^* W(f))
    double special_norm = 0.0;   // c with ||c Phi(.)_{00}||_2 = 1
    double drift = 0.0;          // max relative change across the refinement
    bool stable = false;
};

/// Measures the three normalization constants on Gaussians at a base and a
/// refined resolution (h_xi and h_z halved) and reports the finer values.
inline CalibrationRecord calibrate(int N = 64, double L_xi = 14.0, int points = 224, GridSpec spec = {1, 8.0, 64},
                                   double tol = 1e-6) {
    auto measure = [&](int pts, GridSpec g, double& pl, double& inv, double& sn) {
        auto ctx = HermiteContext::build(1, N, L_xi, pts);
        auto f = PhaseGridFunction::sample(g, [](double x, double y) { return cplx(std::exp(-0.5 * (x * x + y * y))); });
        const auto W = weyl_transform(ctx, f);
        pl = W.entries().squaredNorm() / (f.norm() * f.norm());
        const auto tr = detail::pairing(ctx, W.entries(), g, {});
        inv = std::real(f.inner(f)) / std::real(tr.inner(f));
        const auto p00 = matrix_coefficient(ctx, 0, 0, g);
        sn = 1.0 / p00.norm();
    };
    double p1, i1, s1, p2, i2, s2;
    measure(points, spec, p1, i1, s1);
    GridSpec fine = spec;
    fine.m *= 2;
    measure(points * 2, fine, p2, i2, s2);
    CalibrationRecord r{p2, i2, s2, 0.0, false};
    r.drift = std::max({std::abs(p2 - p1) / p2, std::abs(i2 - i1) / i2, std::abs(s2 - s1) / s2});
    r.stable = r.drift < tol;
    return r;
}

}  // namespace weylab
