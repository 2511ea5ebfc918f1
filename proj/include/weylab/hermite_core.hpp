#pragma once

// Truncated Hermite-basis linear algebra on L^2(R^n).
//
// Basis: normalized Hermite functions h_k (physicists' convention), tensorized
// over n coordinates. Multi-indices are stored in lexicographic order with the
// first coordinate most significant, so the flat index of (a_1,...,a_n) is
// sum_j a_j N^(n-j). Matrix entry (alpha, beta) is <M h_beta, h_alpha>.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "weylab/errors.hpp"

namespace weylab {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;
using MultiIndex = std::vector<int>;

inline constexpr double kPi = std::numbers::pi;

/// Normalized Hermite functions h_0..h_{N-1} at xi, written to out[0..N).
inline void hermite_functions(int N, double xi, double* out) {
    out[0] = std::pow(kPi, -0.25) * std::exp(-0.5 * xi * xi);
    if (N > 1) out[1] = std::sqrt(2.0) * xi * out[0];
    for (int k = 1; k + 1 < N; ++k)
        out[k + 1] = std::sqrt(2.0 / (k + 1)) * xi * out[k] -
                     std::sqrt(static_cast<double>(k) / (k + 1)) * out[k - 1];
}

inline std::uint64_t fnv1a(const void* data, std::size_t len,
                           std::uint64_t h = 1469598103934665603ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

/// The arena every operator lives in: dimension, truncation and the sampled
/// Hermite functions on a uniform xi-grid {-L + i h}.
class HermiteContext {
public:
    static std::shared_ptr<const HermiteContext> build(int n, int N, double L_xi, int points) {
        if (n < 1) throw DomainError("dimension n must be >= 1");
        if (N < 4) throw DomainError("truncation N must be >= 4");
        if (points < 8) throw DomainError("xi grid needs at least 8 points");
        if (!(L_xi > 0.0)) throw DomainError("xi half-width must be positive");
        const double needed = std::sqrt(2.0 * N + 1.0) + 2.0;
        if (L_xi < needed)
            throw CapacityError("xi half-width " + std::to_string(L_xi) +
                                " does not capture h_{N-1}; need >= " + std::to_string(needed));
        if (points < 2.0 * L_xi / 0.5)
            throw GridError("xi grid under-resolved: " + std::to_string(points) + " points over [-" +
                            std::to_string(L_xi) + ", " + std::to_string(L_xi) + ")");
        return std::shared_ptr<const HermiteContext>(new HermiteContext(n, N, L_xi, points));
    }

    int n() const { return n_; }
    int N() const { return N_; }
    /// Number of basis functions, N^n.
    int size() const { return size_; }

    double half_width() const { return L_; }
    double step() const { return h_; }
    int points() const { return points_; }
    const Eigen::VectorXd& grid() const { return grid_; }
    /// points x N matrix of h_k(xi_i).
    const RMatrix& samples() const { return samples_; }

    std::uint64_t hash() const { return hash_; }

    /// h_0..h_{N-1} at an arbitrary point, with the same discrete normalization
    /// as the grid samples.
    void evaluate(double xi, double* out) const {
        hermite_functions(N_, xi, out);
        for (int k = 0; k < N_; ++k) out[k] /= norms_[k];
    }

    MultiIndex multi_index(int flat) const {
        MultiIndex a(n_);
        for (int j = n_ - 1; j >= 0; --j) {
            a[j] = flat % N_;
            flat /= N_;
        }
        return a;
    }

    int flat_index(const MultiIndex& a) const {
        if (static_cast<int>(a.size()) != n_) throw DomainError("multi-index has wrong length");
        int flat = 0;
        for (int j = 0; j < n_; ++j) {
            if (a[j] < 0 || a[j] >= N_) throw DomainError("multi-index entry out of truncation");
            flat = flat * N_ + a[j];
        }
        return flat;
    }

    int coordinate(int flat, int j) const {
        for (int r = n_ - 1; r > j; --r) flat /= N_;
        return flat % N_;
    }

    int level(int flat) const {
        int s = 0;
        for (int j = 0; j < n_; ++j) {
            s += flat % N_;
            flat /= N_;
        }
        return s;
    }

    /// All alpha_j <= N-1-margin.
    bool is_interior(int flat, int margin) const {
        for (int j = 0; j < n_; ++j) {
            if (flat % N_ > N_ - 1 - margin) return false;
            flat /= N_;
        }
        return true;
    }

private:
    HermiteContext(int n, int N, double L, int points)
        : n_(n), N_(N), L_(L), h_(2.0 * L / points), points_(points) {
        size_ = 1;
        for (int j = 0; j < n_; ++j) size_ *= N_;
        grid_.resize(points_);
        for (int i = 0; i < points_; ++i) grid_[i] = -L_ + i * h_;
        samples_.resize(points_, N_);
        std::vector<double> buf(N_);
        for (int i = 0; i < points_; ++i) {
            hermite_functions(N_, grid_[i], buf.data());
            for (int k = 0; k < N_; ++k) samples_(i, k) = buf[k];
        }
        norms_.resize(N_);
        for (int k = 0; k < N_; ++k) {
            norms_[k] = std::sqrt(samples_.col(k).squaredNorm() * h_);
            samples_.col(k) /= norms_[k];
        }
        const double spec[4] = {double(n_), double(N_), L_, double(points_)};
        hash_ = fnv1a(spec, sizeof(spec));
    }

    int n_, N_;
    int size_ = 1;
    double L_, h_;
    int points_;
    Eigen::VectorXd grid_;
    RMatrix samples_;
    std::vector<double> norms_;
    std::uint64_t hash_ = 0;
};

using ContextPtr = std::shared_ptr<const HermiteContext>;

/// Complex N^n x N^n matrix in the truncated Hermite basis.
///
/// `margin` counts boundary layers of the truncation that are no longer
/// trustworthy (each ladder-operator commutator adds one). `basis_lambda`
/// records the lambda of the scaled basis h^lambda_k(xi) = |lambda|^{1/4} h_k(sqrt|lambda| xi)
/// the entries refer to; 1 is the standard basis.
class OperatorMatrix {
public:
    OperatorMatrix() = default;
    OperatorMatrix(ContextPtr ctx, CMatrix entries, int margin = 0, double basis_lambda = 1.0)
        : ctx_(std::move(ctx)), entries_(std::move(entries)), margin_(margin),
          basis_lambda_(basis_lambda) {
        if (!ctx_) throw DomainError("operator matrix needs a context");
        if (entries_.rows() != ctx_->size() || entries_.cols() != ctx_->size())
            throw DomainError("operator matrix shape does not match context");
    }

    static OperatorMatrix zero(ContextPtr ctx) {
        const int s = ctx->size();
        return {std::move(ctx), CMatrix::Zero(s, s)};
    }
    static OperatorMatrix identity(ContextPtr ctx) {
        const int s = ctx->size();
        return {std::move(ctx), CMatrix::Identity(s, s)};
    }

    const HermiteContext& context() const { return *ctx_; }
    const ContextPtr& context_ptr() const { return ctx_; }
    const CMatrix& entries() const { return entries_; }
    CMatrix& entries() { return entries_; }
    int size() const { return static_cast<int>(entries_.rows()); }
    int margin() const { return margin_; }
    double basis_lambda() const { return basis_lambda_; }

    OperatorMatrix with_margin(int margin) const {
        OperatorMatrix r = *this;
        r.margin_ = margin;
        return r;
    }
    OperatorMatrix in_basis(double lambda) const {
        OperatorMatrix r = *this;
        r.basis_lambda_ = lambda;
        return r;
    }

    OperatorMatrix adjoint() const {
        return {ctx_, entries_.adjoint(), margin_, basis_lambda_};
    }

    double hs_norm() const { return entries_.norm(); }
    double op_norm() const {
        Eigen::JacobiSVD<CMatrix> svd(entries_);
        return svd.singularValues()(0);
    }

    /// Max |entry| over rows and columns that are interior for `margin`.
    double interior_max_abs(int margin) const {
        double m = 0.0;
        const auto& c = *ctx_;
        for (int i = 0; i < size(); ++i) {
            if (!c.is_interior(i, margin)) continue;
            for (int j = 0; j < size(); ++j)
                if (c.is_interior(j, margin)) m = std::max(m, std::abs(entries_(i, j)));
        }
        return m;
    }

    /// HS norm of the interior block for `margin`.
    double interior_hs_norm(int margin) const {
        double s = 0.0;
        const auto& c = *ctx_;
        for (int i = 0; i < size(); ++i) {
            if (!c.is_interior(i, margin)) continue;
            for (int j = 0; j < size(); ++j)
                if (c.is_interior(j, margin)) s += std::norm(entries_(i, j));
        }
        return std::sqrt(s);
    }

    OperatorMatrix& operator+=(const OperatorMatrix& o) {
        check_same(o);
        entries_ += o.entries_;
        margin_ = std::max(margin_, o.margin_);
        return *this;
    }
    OperatorMatrix& operator-=(const OperatorMatrix& o) {
        check_same(o);
        entries_ -= o.entries_;
        margin_ = std::max(margin_, o.margin_);
        return *this;
    }
    OperatorMatrix& operator*=(cplx s) {
        entries_ *= s;
        return *this;
    }

    friend OperatorMatrix operator+(OperatorMatrix a, const OperatorMatrix& b) { return a += b; }
    friend OperatorMatrix operator-(OperatorMatrix a, const OperatorMatrix& b) { return a -= b; }
    friend OperatorMatrix operator*(OperatorMatrix a, cplx s) { return a *= s; }
    friend OperatorMatrix operator*(cplx s, OperatorMatrix a) { return a *= s; }
    friend OperatorMatrix operator*(const OperatorMatrix& a, const OperatorMatrix& b) {
        a.check_same(b);
        return {a.ctx_, a.entries_ * b.entries_, std::max(a.margin_, b.margin_), a.basis_lambda_};
    }

private:
    void check_same(const OperatorMatrix& o) const {
        if (ctx_ != o.ctx_ && (ctx_->n() != o.ctx_->n() || ctx_->N() != o.ctx_->N()))
            throw DomainError("operator matrices live on different contexts");
    }

    ContextPtr ctx_;
    CMatrix entries_;
    int margin_ = 0;
    double basis_lambda_ = 1.0;
};

inline OperatorMatrix commutator(const OperatorMatrix& a, const OperatorMatrix& b) {
    return a * b - b * a;
}

namespace detail {

inline RMatrix kron(const RMatrix& a, const RMatrix& b) {
    RMatrix r(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            r.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return r;
}

/// I (x) ... (x) one_d (x) ... (x) I with one_d in slot j (0-based).
inline RMatrix embed(const RMatrix& one_d, int n, int j) {
    const auto N = one_d.rows();
    RMatrix r = RMatrix::Identity(1, 1);
    for (int s = 0; s < n; ++s) r = kron(r, s == j ? one_d : RMatrix::Identity(N, N));
    return r;
}

inline void check_coordinate(const HermiteContext& ctx, int j) {
    if (j < 1 || j > ctx.n()) throw DomainError("coordinate index out of range 1..n");
}

}  // namespace detail

/// A_j = d/dxi_j + xi_j:  A_j h_alpha = sqrt(2 alpha_j) h_{alpha - e_j}.
inline OperatorMatrix annihilation(const ContextPtr& ctx, int j) {
    detail::check_coordinate(*ctx, j);
    const int N = ctx->N();
    RMatrix a = RMatrix::Zero(N, N);
    for (int k = 1; k < N; ++k) a(k - 1, k) = std::sqrt(2.0 * k);
    return {ctx, detail::embed(a, ctx->n(), j - 1).cast<cplx>(), 1};
}

/// A_j^* = -d/dxi_j + xi_j:  A_j^* h_alpha = sqrt(2 alpha_j + 2) h_{alpha + e_j}; the
/// image of level N-1 leaves the truncation and is dropped.
inline OperatorMatrix creation(const ContextPtr& ctx, int j) {
    detail::check_coordinate(*ctx, j);
    const int N = ctx->N();
    RMatrix a = RMatrix::Zero(N, N);
    for (int k = 0; k + 1 < N; ++k) a(k + 1, k) = std::sqrt(2.0 * k + 2.0);
    return {ctx, detail::embed(a, ctx->n(), j - 1).cast<cplx>(), 1};
}

/// Diagonal matrix with entries d(flat index).
inline OperatorMatrix diagonal_operator(const ContextPtr& ctx, const std::function<cplx(int)>& d) {
    CMatrix m = CMatrix::Zero(ctx->size(), ctx->size());
    for (int i = 0; i < ctx->size(); ++i) m(i, i) = d(i);
    return {ctx, std::move(m)};
}

/// H = -Delta + |x|^2, diagonal with 2|alpha| + n.
inline OperatorMatrix hermite_operator(const ContextPtr& ctx) {
    const int n = ctx->n();
    return diagonal_operator(ctx, [&](int i) { return cplx(2.0 * ctx->level(i) + n); });
}

/// P_j: projection onto the eigenspace 2j + n.
inline OperatorMatrix projection(const ContextPtr& ctx, int j) {
    if (j < 0 || j > ctx->N() - 1)
        throw TruncationError("eigenlevel " + std::to_string(j) + " is not complete in the truncation");
    return diagonal_operator(ctx, [&](int i) { return cplx(ctx->level(i) == j ? 1.0 : 0.0); });
}

/// Levels j with 2^{k-1} <= 2j + n < 2^k.
inline std::vector<int> dyadic_levels(int n, int k) {
    std::vector<int> levels;
    const long lo = 1L << (k - 1), hi = 1L << k;
    for (int j = 0; 2L * j + n < hi; ++j)
        if (2L * j + n >= lo) levels.push_back(j);
    return levels;
}

/// A dyadic block is usable when 2^k <= 2(N-1) + n.
inline bool dyadic_block_inside(const HermiteContext& ctx, int k) {
    return k >= 1 && k < 62 && (1L << k) <= 2L * (ctx.N() - 1) + ctx.n();
}

inline int max_dyadic_index(const HermiteContext& ctx) {
    int k = 0;
    while (dyadic_block_inside(ctx, k + 1)) ++k;
    return k;
}

/// chi_k = sum of P_j over 2^{k-1} <= 2j + n < 2^k.
inline OperatorMatrix dyadic_projection(const ContextPtr& ctx, int k) {
    if (!dyadic_block_inside(*ctx, k))
        throw TruncationError("dyadic block k=" + std::to_string(k) + " [2^{k-1}, 2^k) exceeds the truncated spectrum");
    const int n = ctx->n();
    const long lo = 1L << (k - 1), hi = 1L << k;
    return diagonal_operator(ctx, [&](int i) {
        const long e = 2L * ctx->level(i) + n;
        return cplx(e >= lo && e < hi ? 1.0 : 0.0);
    });
}

/// phi(H + shift) by the spectral theorem. Nonpositive shifted eigenvalues map
/// to 0 (pseudo-inverse convention).
inline OperatorMatrix spectral_function(const ContextPtr& ctx, const std::function<double(double)>& phi,
                                        double shift = 0.0) {
    const int n = ctx->n();
    return diagonal_operator(ctx, [&](int i) {
        const double e = 2.0 * ctx->level(i) + n + shift;
        if (e <= 0.0) return cplx(0.0);
        const double v = phi(e);
        if (!std::isfinite(v))
            throw DomainError("spectral function is not finite at eigenvalue " + std::to_string(e));
        return cplx(v);
    });
}

/// A_j(lambda), A_j^*(lambda), H(lambda) expressed in the lambda-scaled basis.
struct ScaledOperators {
    double lambda;
    std::vector<OperatorMatrix> annihilation;
    std::vector<OperatorMatrix> creation;
    OperatorMatrix hermite;
};

inline ScaledOperators scaled_operators(const ContextPtr& ctx, double lambda) {
    if (lambda == 0.0 || !std::isfinite(lambda)) throw DomainError("lambda must be a nonzero real");
    const double a = std::abs(lambda);
    ScaledOperators s{lambda, {}, {}, (a * hermite_operator(ctx)).in_basis(lambda)};
    for (int j = 1; j <= ctx->n(); ++j) {
        s.annihilation.push_back((std::sqrt(a) * annihilation(ctx, j)).in_basis(lambda));
        s.creation.push_back((std::sqrt(a) * creation(ctx, j)).in_basis(lambda));
    }
    return s;
}

// OperatorMatrix file format (little-endian):
//   char[8]  "WEYLOPM1"
//   u32 n, u32 N, u32 order_tag (1 = lexicographic multi-index order)
//   i32 margin, f64 basis_lambda
//   u64 rows, u64 cols
//   rows*cols pairs of f64 (re, im), row-major
inline constexpr char kOperatorMagic[8] = {'W', 'E', 'Y', 'L', 'O', 'P', 'M', '1'};
inline constexpr std::uint32_t kLexicographicOrder = 1;

inline void save_operator(const OperatorMatrix& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    const std::uint32_t hdr[3] = {static_cast<std::uint32_t>(m.context().n()),
                                  static_cast<std::uint32_t>(m.context().N()), kLexicographicOrder};
    const std::int32_t margin = m.margin();
    const double lam = m.basis_lambda();
    const std::uint64_t dims[2] = {static_cast<std::uint64_t>(m.size()), static_cast<std::uint64_t>(m.size())};
    out.write(kOperatorMagic, 8);
    out.write(reinterpret_cast<const char*>(hdr), sizeof(hdr));
    out.write(reinterpret_cast<const char*>(&margin), sizeof(margin));
    out.write(reinterpret_cast<const char*>(&lam), sizeof(lam));
    out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
    for (int i = 0; i < m.size(); ++i)
        for (int j = 0; j < m.size(); ++j) {
            const double re = m.entries()(i, j).real(), im = m.entries()(i, j).imag();
            out.write(reinterpret_cast<const char*>(&re), 8);
            out.write(reinterpret_cast<const char*>(&im), 8);
        }
    if (!out) throw IoError("write failed for " + path);
}

inline OperatorMatrix load_operator(const std::string& path, const ContextPtr& ctx) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    char magic[8];
    std::uint32_t hdr[3];
    std::int32_t margin;
    double lam;
    std::uint64_t dims[2];
    in.read(magic, 8);
    in.read(reinterpret_cast<char*>(hdr), sizeof(hdr));
    in.read(reinterpret_cast<char*>(&margin), sizeof(margin));
    in.read(reinterpret_cast<char*>(&lam), sizeof(lam));
    in.read(reinterpret_cast<char*>(dims), sizeof(dims));
    if (!in || std::memcmp(magic, kOperatorMagic, 8) != 0) throw IoError(path + " is not an operator matrix file");
    if (hdr[2] != kLexicographicOrder) throw IoError(path + ": unknown multi-index order tag");
    if (static_cast<int>(hdr[0]) != ctx->n() || static_cast<int>(hdr[1]) != ctx->N())
        throw IoError(path + ": (n, N) does not match the context");
    if (dims[0] != static_cast<std::uint64_t>(ctx->size()) || dims[1] != dims[0])
        throw IoError(path + ": matrix shape does not match N^n");
    CMatrix e(ctx->size(), ctx->size());
    for (int i = 0; i < ctx->size(); ++i)
        for (int j = 0; j < ctx->size(); ++j) {
            double re, im;
            in.read(reinterpret_cast<char*>(&re), 8);
            in.read(reinterpret_cast<char*>(&im), 8);
            e(i, j) = cplx(re, im);
        }
    if (!in) throw IoError(path + ": truncated payload");
    return {ctx, std::move(e), margin, lam};
}

}  // namespace weylab
