#pragma once

// Non-commutative derivations delta m = [m, A], delta-bar m = [A^*, m], the
// Mauceri-type dyadic Hilbert-Schmidt table, heat bands S_j and the kernel
// decay / smoothness statistics of the band kernels.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "weylab/errors.hpp"
#include "weylab/grid.hpp"
#include "weylab/hermite_core.hpp"
#include "weylab/parallel.hpp"
#include "weylab/weyl_transform.hpp"

namespace weylab {

// ---- derivations -----------------------------------------------------------

inline OperatorMatrix delta(const OperatorMatrix& m, int j) {
    const auto A = annihilation(m.context_ptr(), j);
    return commutator(m, A).in_basis(m.basis_lambda()).with_margin(m.margin() + 1);
}

inline OperatorMatrix delta_bar(const OperatorMatrix& m, int j) {
    const auto Ad = creation(m.context_ptr(), j);
    return commutator(Ad, m).in_basis(m.basis_lambda()).with_margin(m.margin() + 1);
}

/// delta^alpha delta-bar^beta m (delta-bar applied first).
inline OperatorMatrix multi_derivation(const OperatorMatrix& m, const MultiIndex& alpha, const MultiIndex& beta) {
    const auto& ctx = m.context();
    if (static_cast<int>(alpha.size()) != ctx.n() || static_cast<int>(beta.size()) != ctx.n())
        throw DomainError("derivation multi-index has wrong length");
    int order = 0;
    for (int j = 0; j < ctx.n(); ++j) {
        if (alpha[j] < 0 || beta[j] < 0) throw DomainError("negative derivation order");
        order += alpha[j] + beta[j];
    }
    if (4 * order > ctx.N())
        throw MarginExhausted("derivation order " + std::to_string(order) + " exceeds N/4 = " + std::to_string(ctx.N() / 4));
    OperatorMatrix r = m;
    for (int j = 0; j < ctx.n(); ++j)
        for (int b = 0; b < beta[j]; ++b) r = delta_bar(r, j + 1);
    for (int j = 0; j < ctx.n(); ++j)
        for (int a = 0; a < alpha[j]; ++a) r = delta(r, j + 1);
    return r;
}

/// n = 1 shorthand.
inline OperatorMatrix multi_derivation(const OperatorMatrix& m, int alpha, int beta) {
    return multi_derivation(m, MultiIndex{alpha}, MultiIndex{beta});
}

/// delta_j(lambda) m = |lambda|^{-1/2} [m, A_j(lambda)], m in the lambda-scaled basis.
inline OperatorMatrix scaled_delta(const OperatorMatrix& m, int j, double lambda) {
    const auto s = scaled_operators(m.context_ptr(), lambda);
    const double c = 1.0 / std::sqrt(std::abs(lambda));
    return (c * commutator(m, s.annihilation[j - 1])).in_basis(lambda).with_margin(m.margin() + 1);
}

/// delta-bar_j(lambda) m = |lambda|^{-1/2} [A_j^*(lambda), m].
inline OperatorMatrix scaled_delta_bar(const OperatorMatrix& m, int j, double lambda) {
    const auto s = scaled_operators(m.context_ptr(), lambda);
    const double c = 1.0 / std::sqrt(std::abs(lambda));
    return (c * commutator(s.creation[j - 1], m)).in_basis(lambda).with_margin(m.margin() + 1);
}

// ---- Mauceri table -----------------------------------------------------------

enum class Side { left, right };

struct MauceriEntry {
    MultiIndex alpha, beta;
    std::vector<double> per_block;  // aligned with MauceriReport::blocks
    double sup = 0.0;
    int argmax_block = 0;
};

struct MauceriReport {
    int order = 0;
    Side side = Side::left;
    std::vector<int> blocks;          // dyadic indices used
    std::vector<int> excluded_blocks; // k >= 1 not fully inside the valid range
    std::vector<MauceriEntry> table;
    double constant = 0.0;
};

namespace detail {

inline void enumerate_orders(int n, int total, MultiIndex& cur, int pos, std::vector<MultiIndex>& out) {
    if (pos == n) {
        out.push_back(cur);
        return;
    }
    for (int v = 0; v <= total; ++v) {
        cur[pos] = v;
        enumerate_orders(n, total - v, cur, pos + 1, out);
    }
}

inline std::vector<MultiIndex> multi_indices_up_to(int n, int total) {
    std::vector<MultiIndex> out;
    MultiIndex cur(n);
    enumerate_orders(n, total, cur, 0, out);
    return out;
}

inline int order_of(const MultiIndex& a) {
    int s = 0;
    for (int v : a) s += v;
    return s;
}

}  // namespace detail

/// Table of sup_k 2^{k(|alpha|+|beta|-n)} ||(delta^alpha dbar^beta m) chi_k||_HS^2
/// (left) or ||chi_k (...)||_HS^2 (right) over |alpha|+|beta| <= l. Blocks are
/// restricted to levels inside the interior left by the derivation margin.
inline MauceriReport mauceri_constant(const OperatorMatrix& m, int l, Side side = Side::left) {
    const auto& ctx = m.context();
    const int n = ctx.n(), N = ctx.N();
    if (l < 0) throw DomainError("order must be nonnegative");
    if (4 * l > N) throw MarginExhausted("order l exceeds N/4");
    MauceriReport rep;
    rep.order = l;
    rep.side = side;
    const int margin_max = m.margin() + l;
    const int kmax = max_dyadic_index(ctx);
    for (int k = 1; k <= kmax; ++k) {
        // every level of the block must satisfy level <= N - 1 - margin in each coordinate;
        // with |alpha| = level this is guaranteed when 2^k <= 2(N - 1 - margin) + n
        if ((1L << k) <= 2L * (N - 1 - margin_max) + n)
            rep.blocks.push_back(k);
        else
            rep.excluded_blocks.push_back(k);
    }
    for (int k = kmax + 1; k <= kmax + 2; ++k) rep.excluded_blocks.push_back(k);
    if (rep.blocks.empty()) throw TruncationError("no dyadic block lies inside the truncation interior");

    const auto orders = detail::multi_indices_up_to(n, l);
    for (const auto& a : orders)
        for (const auto& b : orders) {
            const int ord = detail::order_of(a) + detail::order_of(b);
            if (ord > l) continue;
            const auto D = multi_derivation(m, a, b);
            MauceriEntry e{a, b, {}, 0.0, 0};
            for (int k : rep.blocks) {
                const long lo = 1L << (k - 1), hi = 1L << k;
                double s = 0.0;
                for (int i = 0; i < ctx.size(); ++i) {
                    if (!ctx.is_interior(i, D.margin())) continue;
                    for (int c = 0; c < ctx.size(); ++c) {
                        if (!ctx.is_interior(c, D.margin())) continue;
                        // block index sits on the column (left) or the row (right)
                        const int blk = side == Side::left ? c : i;
                        const long ev = 2L * ctx.level(blk) + n;
                        if (ev < lo || ev >= hi) continue;
                        s += std::norm(D.entries()(i, c));
                    }
                }
                const double v = std::ldexp(s, k * (ord - n));
                e.per_block.push_back(v);
                if (v > e.sup) {
                    e.sup = v;
                    e.argmax_block = k;
                }
            }
            rep.constant = std::max(rep.constant, e.sup);
            rep.table.push_back(std::move(e));
        }
    return rep;
}

// ---- heat bands ----------------------------------------------------------------

inline double band_time(int j) { return std::ldexp(1.0, -j); }

/// S_j = sum_k (e^{-2k t_j} - e^{-2k t_{j+1}}) P_k.
inline OperatorMatrix heat_band(const ContextPtr& ctx, int j) {
    if (j < 1) throw DomainError("band index must be >= 1");
    const double tj = band_time(j), tj1 = band_time(j + 1);
    return diagonal_operator(ctx, [&](int i) {
        const double k = ctx->level(i);
        return cplx(std::exp(-2.0 * k * tj) - std::exp(-2.0 * k * tj1));
    });
}

/// e^{n t} e^{-t H}.
inline OperatorMatrix normalized_heat(const ContextPtr& ctx, double t) {
    const int n = ctx->n();
    return spectral_function(ctx, [&](double e) { return std::exp(n * t) * std::exp(-t * e); });
}

/// S_j via e^{n t_j} e^{-t_j H} - e^{n t_{j+1}} e^{-t_{j+1} H}.
inline OperatorMatrix heat_band_semigroup_form(const ContextPtr& ctx, int j) {
    return normalized_heat(ctx, band_time(j)) - normalized_heat(ctx, band_time(j + 1));
}

/// [m_0, m_1, ..., m_J] with m_0 = m e^{n t_1} e^{-t_1 H}, m_j = m S_j.
inline std::vector<OperatorMatrix> band_decompose(const OperatorMatrix& m, int J) {
    if (J < 1) throw DomainError("J must be >= 1");
    const auto& ctx = m.context_ptr();
    std::vector<OperatorMatrix> out;
    out.push_back(m * normalized_heat(ctx, band_time(1)));
    for (int j = 1; j <= J; ++j) out.push_back(m * heat_band(ctx, j));
    return out;
}

/// ||m_0 - sum_{j<=J} m_j - m e^{n t_{J+1}} e^{-t_{J+1} H}||_max.
inline double telescoping_residual(const OperatorMatrix& m, int J) {
    const auto bands = band_decompose(m, J);
    CMatrix acc = bands[0].entries();
    for (int j = 1; j <= J; ++j) acc -= bands[j].entries();
    acc -= (m * normalized_heat(m.context_ptr(), band_time(J + 1))).entries();
    return acc.cwiseAbs().maxCoeff();
}

/// k_j = W^{-1}(m_j), j = 0..J.
inline std::vector<PhaseGridFunction> band_kernels(const OperatorMatrix& m, int J, const GridSpec& grid) {
    const auto bands = band_decompose(m, J);
    std::vector<PhaseGridFunction> out(bands.size());
    parallel_for(bands.size(), default_workers(),
                 [&](std::size_t j) { out[j] = inverse_weyl(m.context_ptr(), bands[j], grid); });
    return out;
}

// ---- decay / smoothness statistics ------------------------------------------------

struct DecayReport {
    int band = 0;
    double t_band = 0.0;   // t_j
    double t_next = 0.0;   // t_{j+1}
    double r_min = 1.0, r_max = 0.0;
    std::vector<double> powers;                    // s values
    std::vector<double> annulus_edges;             // radii; annulus a = [edges[a], edges[a+1])
    std::vector<std::vector<double>> annulus_sup;  // [a][s] sup |z|^s |k(z)|
    std::vector<double> sup;                       // [s] over the whole window
    std::vector<double> u_norms;                   // |u| per panel entry
    std::vector<double> smoothness;                // per u: sup |z|^{2n+1/2} |k(z-u)e^{...} - k(z)| / |u|^{1/2}
    std::vector<double> smoothness_ratio;          // per u: smoothness / min(t_j^{1/4}/|u|^{1/2}, |u|^{1/2}/t_{j+1}^{1/4})
    double decay_ratio = 0.0;                      // sup |z|^{2n+1/2}|k| / t_{j+1}^{1/4}
    double smoothness_max_ratio = 0.0;             // max over u of smoothness_ratio
    double l2_weighted = 0.0;                      // (int_window |z|^{2n+1} |k|^2)^{1/2}
    std::vector<double> l2_difference;             // per u: (int |z|^{2n+1} |k(z-u)e^{...} - k(z)|^2)^{1/2}
    int twist_sign = -1;
};

/// Grid offsets (in cells) of the default u-panel.
inline std::vector<std::pair<int, int>> default_u_panel() {
    return {{1, 0}, {0, 1}, {1, 1}, {2, 0}, {0, 2}, {2, 2}, {4, 0}, {0, 4}, {3, 3}};
}

/// Statistics of one band kernel over the annulus 1 <= |z| <= L_z / 2. The twisted
/// difference uses k(z - u) exp(sign (i/2) Im(z conj u)) - k(z).
inline DecayReport decay_report(const PhaseGridFunction& k, int j, const std::vector<std::pair<int, int>>& u_panel,
                                int twist_sign = -1) {
    const auto& s = k.spec();
    if (s.n != 1) throw DomainError("decay report is implemented for n = 1");
    const int n = 1, m = s.m, half = m / 2;
    DecayReport r;
    r.band = j;
    r.t_band = band_time(j);
    r.t_next = band_time(j + 1);
    r.r_min = 1.0;
    r.r_max = s.L / 2.0;
    r.twist_sign = twist_sign;
    r.powers = {2.0 * n, 2.0 * n + 0.5, 2.0 * n + 1.0, 2.0 * n + 2.0};
    r.annulus_edges = {1.0, 2.0, 4.0, r.r_max};
    while (r.annulus_edges.size() > 2 && r.annulus_edges[r.annulus_edges.size() - 2] >= r.r_max)
        r.annulus_edges.erase(r.annulus_edges.end() - 2);
    const int na = static_cast<int>(r.annulus_edges.size()) - 1;
    r.annulus_sup.assign(na, std::vector<double>(r.powers.size(), 0.0));
    r.sup.assign(r.powers.size(), 0.0);

    bool any = false;
    double l2 = 0.0;
    const double s_main = 2.0 * n + 0.5;
    double main_sup = 0.0;
    for (int ix = 0; ix < m; ++ix)
        for (int iy = 0; iy < m; ++iy) {
            const double x = s.coord(ix), y = s.coord(iy), rad = std::hypot(x, y);
            if (rad < r.r_min || rad > r.r_max) continue;
            any = true;
            int a = 0;
            while (a + 1 < na && rad >= r.annulus_edges[a + 1]) ++a;
            const double v = std::abs(k(ix, iy));
            for (std::size_t p = 0; p < r.powers.size(); ++p) {
                const double w = std::pow(rad, r.powers[p]) * v;
                r.annulus_sup[a][p] = std::max(r.annulus_sup[a][p], w);
                r.sup[p] = std::max(r.sup[p], w);
            }
            main_sup = std::max(main_sup, std::pow(rad, s_main) * v);
            l2 += std::pow(rad, 2.0 * n + 1.0) * v * v;
        }
    if (!any) throw WindowError("annulus window 1 <= |z| <= L_z/2 contains no grid points");
    r.l2_weighted = std::sqrt(l2 * s.cell_volume());
    r.decay_ratio = main_sup / std::pow(r.t_next, 0.25);

    for (const auto& [ux_i, uy_i] : u_panel) {
        const double ux = ux_i * s.h(), uy = uy_i * s.h(), un = std::hypot(ux, uy);
        if (2.0 * un >= r.r_max) throw WindowError("u-panel entry too large for the window");
        r.u_norms.push_back(un);
        if (un == 0.0) {
            r.smoothness.push_back(0.0);
            r.smoothness_ratio.push_back(0.0);
            r.l2_difference.push_back(0.0);
            continue;
        }
        double sup = 0.0, l2d = 0.0;
        for (int ix = 0; ix < m; ++ix)
            for (int iy = 0; iy < m; ++iy) {
                const double x = s.coord(ix), y = s.coord(iy), rad = std::hypot(x, y);
                if (rad < r.r_min || rad > r.r_max || rad <= 2.0 * un) continue;
                const int jx = ix - ux_i, jy = iy - uy_i;
                (void)half;
                const cplx shifted = k.at_or_zero(jx, jy);
                // Im(z conj u) = y ux - x uy
                const double im = y * ux - x * uy;
                const cplx d = shifted * std::polar(1.0, 0.5 * twist_sign * im) - k(ix, iy);
                sup = std::max(sup, std::pow(rad, s_main) * std::abs(d));
                l2d += std::pow(rad, 2.0 * n + 1.0) * std::norm(d);
            }
        const double stat = sup / std::sqrt(un);
        const double env = std::min(std::pow(r.t_band, 0.25) / std::sqrt(un), std::sqrt(un) / std::pow(r.t_next, 0.25));
        r.smoothness.push_back(stat);
        r.smoothness_ratio.push_back(stat / env);
        r.l2_difference.push_back(std::sqrt(l2d * s.cell_volume()));
        r.smoothness_max_ratio = std::max(r.smoothness_max_ratio, stat / env);
    }
    return r;
}

// ---- dyadic shape of derivatives of S_j -----------------------------------------

struct ShapeRow {
    int block = 0;            // dyadic index k of chi_k
    double x = 0.0;           // 2^k t_{j+1}
    double hs2 = 0.0;         // ||chi_k dbar^gamma delta^rho S_j||_HS^2
    double normalized = 0.0;  // hs2 / (t_{j+1}^2 2^{k(n + 2 - gamma - rho)})
};

struct ShapeTable {
    int band = 0, gamma = 0, rho = 0;
    std::vector<ShapeRow> rows;
    double fall = 0.0;                 // normalized(first) / normalized(last)
    std::vector<double> poly_excess;   // per q in {1,2,3}: max_x x^q v(x) / (x_0^q v(x_0))
    bool rapid = false;                // every poly_excess <= 10
};

/// Normalized ||chi_k dbar^gamma delta^rho S||_HS^2 for k = k_first..kmax, where S
/// is S_j (or any supplied operator). Blocks must sit inside the interior left
/// by the derivation margin.
inline ShapeTable band_derivative_decay(const OperatorMatrix& S, int j, int gamma, int rho, int k_first = 2) {
    const auto& ctx = S.context();
    const int n = ctx.n();
    if (n != 1) throw DomainError("shape table is implemented for n = 1");
    ShapeTable t;
    t.band = j;
    t.gamma = gamma;
    t.rho = rho;
    const auto D = multi_derivation(S, rho, gamma);  // delta^rho dbar^gamma; commute up to truncation
    const double tn = band_time(j + 1);
    const int margin = D.margin();
    for (int k = std::max(1, k_first);; ++k) {
        if ((1L << k) > 2L * (ctx.N() - 1 - margin) + n) break;
        const long lo = 1L << (k - 1), hi = 1L << k;
        double s = 0.0;
        for (int i = 0; i < ctx.size(); ++i) {
            const long ev = 2L * ctx.level(i) + n;
            if (ev < lo || ev >= hi) continue;
            for (int c = 0; c < ctx.size(); ++c)
                if (ctx.is_interior(c, margin)) s += std::norm(D.entries()(i, c));
        }
        ShapeRow row{k, std::ldexp(tn, k), s, s / (tn * tn * std::ldexp(1.0, k * (n + 2 - gamma - rho)))};
        t.rows.push_back(row);
    }
    if (t.rows.empty()) throw TruncationError("no admissible dyadic block for the shape table");
    const auto& f = t.rows.front();
    const auto& l = t.rows.back();
    t.fall = l.normalized > 0.0 ? f.normalized / l.normalized : std::numeric_limits<double>::infinity();
    t.rapid = true;
    for (int q = 1; q <= 3; ++q) {
        const double base = std::pow(f.x, q) * f.normalized;
        double mx = 0.0;
        for (const auto& r : t.rows) mx = std::max(mx, std::pow(r.x, q) * r.normalized);
        const double ex = base > 0.0 ? mx / base : std::numeric_limits<double>::infinity();
        t.poly_excess.push_back(ex);
        if (!(ex <= 10.0)) t.rapid = false;
    }
    return t;
}

}  // namespace weylab
