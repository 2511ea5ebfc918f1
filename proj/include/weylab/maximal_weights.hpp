#pragma once

// Dyadic maximal machinery on the n = 1 phase-space grid: Hardy-Littlewood
// (dyadic sizes, shifted by half a side as well), dyadic, M_s, the twisted sharp
// maximal function, A_p constants, weighted ratios and BMO commutators.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "weylab/errors.hpp"
#include "weylab/grid.hpp"
#include "weylab/parallel.hpp"

namespace weylab {

struct Cube {
    int i0, j0, side;  // cells [i0, i0+side) x [j0, j0+side)
};

/// Nested dyadic cubes over the m x m grid. Top cubes have the largest power
/// of two dividing m as side; leaves are single cells.
class DyadicCubeSystem {
public:
    explicit DyadicCubeSystem(const GridSpec& spec) : spec_(spec) {
        if (spec.n != 1) throw DomainError("dyadic cube system is implemented for n = 1");
        int top = 1;
        while (spec.m % (top * 2) == 0) top *= 2;
        for (int s = top; s >= 1; s /= 2) sides_.push_back(s);
    }

    const GridSpec& spec() const { return spec_; }
    /// Sides from the top level down to 1.
    const std::vector<int>& sides() const { return sides_; }
    int top_side() const { return sides_.front(); }

    /// All cubes of a given side.
    std::vector<Cube> level(int side) const {
        std::vector<Cube> out;
        for (int i = 0; i + side <= spec_.m; i += side)
            for (int j = 0; j + side <= spec_.m; j += side) out.push_back({i, j, side});
        return out;
    }

    std::vector<Cube> all() const {
        std::vector<Cube> out;
        for (int s : sides_) {
            auto l = level(s);
            out.insert(out.end(), l.begin(), l.end());
        }
        return out;
    }

    /// Dyadic cubes plus their translates by half a side in x, y or both, kept
    /// when they fit inside the box.
    std::vector<Cube> all_with_shifts() const {
        std::vector<Cube> out = all();
        for (int s : sides_) {
            if (s < 2) continue;
            const int h = s / 2;
            for (int dx : {0, h})
                for (int dy : {0, h}) {
                    if (dx == 0 && dy == 0) continue;
                    for (int i = dx; i + s <= spec_.m; i += s)
                        for (int j = dy; j + s <= spec_.m; j += s) out.push_back({i, j, s});
                }
        }
        return out;
    }

    /// The cube of side `side` containing cell (i, j).
    Cube containing(int i, int j, int side) const { return {(i / side) * side, (j / side) * side, side}; }

    /// Geometric centre of the cube's sample points.
    std::pair<double, double> center(const Cube& q) const {
        const double h = spec_.h();
        return {-spec_.L + (q.i0 + 0.5 * (q.side - 1)) * h, -spec_.L + (q.j0 + 0.5 * (q.side - 1)) * h};
    }

private:
    GridSpec spec_;
    std::vector<int> sides_;
};

namespace detail {

/// Summed-area table of a real m x m field stored (i, j) -> i * m + j.
class AreaSums {
public:
    AreaSums(const std::vector<double>& v, int m) : m_(m), s_((m + 1) * (m + 1), 0.0) {
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                s_[(i + 1) * (m + 1) + j + 1] =
                    v[i * m + j] + s_[i * (m + 1) + j + 1] + s_[(i + 1) * (m + 1) + j] - s_[i * (m + 1) + j];
    }
    double sum(const Cube& q) const {
        const int a = q.i0, b = q.j0, c = q.i0 + q.side, d = q.j0 + q.side;
        return s_[c * (m_ + 1) + d] - s_[a * (m_ + 1) + d] - s_[c * (m_ + 1) + b] + s_[a * (m_ + 1) + b];
    }
    double mean(const Cube& q) const { return sum(q) / (static_cast<double>(q.side) * q.side); }

private:
    int m_;
    std::vector<double> s_;
};

inline std::vector<double> abs_field(const PhaseGridFunction& f, double power = 1.0) {
    std::vector<double> v(f.spec().count());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = std::pow(std::abs(f.values()[static_cast<Eigen::Index>(k)]), power);
    return v;
}

/// out(p) = max over cubes containing p of value(cube).
inline PhaseGridFunction sup_over_cubes(const GridSpec& spec, const std::vector<Cube>& cubes,
                                        const std::vector<double>& value) {
    std::vector<double> best(spec.count(), 0.0);
    for (std::size_t c = 0; c < cubes.size(); ++c) {
        const auto& q = cubes[c];
        for (int i = q.i0; i < q.i0 + q.side; ++i)
            for (int j = q.j0; j < q.j0 + q.side; ++j) {
                double& b = best[static_cast<std::size_t>(i) * spec.m + j];
                b = std::max(b, value[c]);
            }
    }
    PhaseGridFunction out(spec);
    for (std::size_t k = 0; k < best.size(); ++k) out.values()[static_cast<Eigen::Index>(k)] = best[k];
    return out;
}

inline void require_n1(const GridSpec& s, const char* what) {
    if (s.n != 1) throw DomainError(std::string(what) + " is implemented for n = 1");
}

}  // namespace detail

/// M_d f: sup of |f|-averages over the dyadic cubes containing the point.
inline PhaseGridFunction dyadic_maximal(const PhaseGridFunction& f) {
    detail::require_n1(f.spec(), "dyadic maximal function");
    const DyadicCubeSystem sys(f.spec());
    const detail::AreaSums sums(detail::abs_field(f), f.spec().m);
    const auto cubes = sys.all();
    std::vector<double> val(cubes.size());
    for (std::size_t c = 0; c < cubes.size(); ++c) val[c] = sums.mean(cubes[c]);
    return detail::sup_over_cubes(f.spec(), cubes, val);
}

/// Hardy-Littlewood maximal function restricted to cubes of dyadic side:
/// the dyadic grid plus its half-side translates inside the box.
inline PhaseGridFunction hl_maximal(const PhaseGridFunction& f) {
    detail::require_n1(f.spec(), "maximal function");
    const DyadicCubeSystem sys(f.spec());
    const detail::AreaSums sums(detail::abs_field(f), f.spec().m);
    const auto cubes = sys.all_with_shifts();
    std::vector<double> val(cubes.size());
    for (std::size_t c = 0; c < cubes.size(); ++c) val[c] = sums.mean(cubes[c]);
    return detail::sup_over_cubes(f.spec(), cubes, val);
}

/// M_s f = (M |f|^s)^{1/s}.
inline PhaseGridFunction m_s(const PhaseGridFunction& f, double s) {
    if (s < 1.0) throw DomainError("M_s needs s >= 1");
    PhaseGridFunction p(f.spec());
    for (Eigen::Index k = 0; k < p.values().size(); ++k) p.values()[k] = std::pow(std::abs(f.values()[k]), s);
    auto M = hl_maximal(p);
    for (Eigen::Index k = 0; k < M.values().size(); ++k) M.values()[k] = std::pow(M.values()[k].real(), 1.0 / s);
    return M;
}

/// Mean oscillation of f e^{-(i/2) Im(z conj u)} over one cube, u its centre.
inline double twisted_oscillation(const PhaseGridFunction& f, const DyadicCubeSystem& sys, const Cube& q) {
    const auto& s = f.spec();
    const auto [ua, ub] = sys.center(q);
    const int cnt = q.side * q.side;
    std::vector<cplx> g(static_cast<std::size_t>(cnt));
    cplx mean = 0.0;
    int t = 0;
    for (int i = q.i0; i < q.i0 + q.side; ++i)
        for (int j = q.j0; j < q.j0 + q.side; ++j, ++t) {
            const double x = s.coord(i), y = s.coord(j);
            // Im(z conj u) = y a - x b
            g[t] = f(i, j) * std::polar(1.0, -0.5 * (y * ua - x * ub));
            mean += g[t];
        }
    mean /= static_cast<double>(cnt);
    double osc = 0.0;
    for (const auto& v : g) osc += std::abs(v - mean);
    return osc / cnt;
}

/// Twisted sharp maximal function over dyadic cubes.
inline PhaseGridFunction twisted_sharp(const PhaseGridFunction& f) {
    detail::require_n1(f.spec(), "twisted sharp maximal function");
    const DyadicCubeSystem sys(f.spec());
    const auto cubes = sys.all();
    std::vector<double> val(cubes.size());
    parallel_for(cubes.size(), default_workers(), [&](std::size_t c) { val[c] = twisted_oscillation(f, sys, cubes[c]); });
    return detail::sup_over_cubes(f.spec(), cubes, val);
}

// ---- weights -----------------------------------------------------------------

/// [w]_{A_p} over dyadic cubes: sup_Q <w>_Q <w^{-1/(p-1)}>_Q^{p-1}.
inline double ap_constant(const PhaseGridFunction& w, double p) {
    detail::require_n1(w.spec(), "A_p constant");
    if (!(p > 1.0)) throw DomainError("A_p constant needs p > 1");
    const int m = w.spec().m;
    std::vector<double> a(w.spec().count()), b(w.spec().count());
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double v = w.values()[static_cast<Eigen::Index>(k)].real();
        if (!(v > 0.0)) throw DomainError("weight must be strictly positive");
        a[k] = v;
        b[k] = std::pow(v, -1.0 / (p - 1.0));
    }
    const detail::AreaSums sa(a, m), sb(b, m);
    const DyadicCubeSystem sys(w.spec());
    double best = 0.0;
    for (const auto& q : sys.all()) best = std::max(best, sa.mean(q) * std::pow(sb.mean(q), p - 1.0));
    return best;
}

/// [w]_{A_1} over dyadic cubes: sup_Q <w>_Q / min_Q w.
inline double a1_constant(const PhaseGridFunction& w) {
    detail::require_n1(w.spec(), "A_1 constant");
    const int m = w.spec().m;
    std::vector<double> a(w.spec().count());
    for (std::size_t k = 0; k < a.size(); ++k) a[k] = w.values()[static_cast<Eigen::Index>(k)].real();
    const detail::AreaSums sa(a, m);
    const DyadicCubeSystem sys(w.spec());
    double best = 0.0;
    for (const auto& q : sys.all()) {
        double mn = std::numeric_limits<double>::infinity();
        for (int i = q.i0; i < q.i0 + q.side; ++i)
            for (int j = q.j0; j < q.j0 + q.side; ++j) mn = std::min(mn, a[static_cast<std::size_t>(i) * m + j]);
        best = std::max(best, sa.mean(q) / mn);
    }
    return best;
}

struct WeightProfile {
    PhaseGridFunction w;
    double p = 2.0;
    double ap = 0.0;
    std::string tag;
};

/// |z + eps|^a with eps = (h/2)(1 + i), keeping the singularity off the grid.
inline PhaseGridFunction power_weight(const GridSpec& spec, double a) {
    const double e = 0.5 * spec.h();
    return PhaseGridFunction::sample(spec, [&](double x, double y) { return cplx(std::pow(std::hypot(x + e, y + e), a)); });
}

inline WeightProfile make_power_profile(const GridSpec& spec, double a, double p) {
    WeightProfile wp{power_weight(spec, a), p, 0.0, "power a=" + std::to_string(a)};
    wp.ap = ap_constant(wp.w, p);
    return wp;
}

struct ApStability {
    double coarse = 0.0, fine = 0.0, ratio = 0.0;
    bool stable = false;     // |ratio - 1| <= tol
    bool divergent = false;  // grows by more than tol under refinement
};

/// A_p constant of a power weight at two resolutions of the same box.
inline ApStability ap_refinement(double a, double p, const GridSpec& coarse, const GridSpec& fine, double tol = 0.2) {
    ApStability r;
    r.coarse = ap_constant(power_weight(coarse, a), p);
    r.fine = ap_constant(power_weight(fine, a), p);
    r.ratio = r.fine / r.coarse;
    r.stable = std::abs(r.ratio - 1.0) <= tol;
    r.divergent = r.ratio > 1.0 + tol;
    return r;
}

// ---- operator statistics ---------------------------------------------------------

using GridOperator = std::function<PhaseGridFunction(const PhaseGridFunction&)>;

struct WeightedRatioStats {
    std::vector<double> ratios;
    double max_ratio = 0.0;
    double ap = 0.0;       // [w]_{A_p}
    double ap_half = 0.0;  // [w]_{A_{p/2}} (A_1 when p = 2)
};

inline WeightedRatioStats weighted_ratio(const GridOperator& T, const std::vector<PhaseGridFunction>& panel,
                                         const PhaseGridFunction& w, double p) {
    if (!(p > 1.0)) throw DomainError("weighted ratio needs p > 1");
    WeightedRatioStats st;
    st.ap = ap_constant(w, p);
    st.ap_half = p / 2.0 > 1.0 ? ap_constant(w, p / 2.0) : a1_constant(w);
    for (const auto& f : panel) {
        const double den = f.weighted_norm(w, p);
        if (den == 0.0) throw ZeroNorm("panel function has zero weighted norm");
        const double r = T(f).weighted_norm(w, p) / den;
        st.ratios.push_back(r);
        st.max_ratio = std::max(st.max_ratio, r);
    }
    return st;
}

/// sup_v M~#(Tf)(v) / M_s f(v), with 0/0 = 0.
inline double pointwise_domination(const PhaseGridFunction& Tf, const PhaseGridFunction& f, double s) {
    if (!(s > 1.0)) throw DomainError("domination statistic needs s > 1");
    const auto num = twisted_sharp(Tf);
    const auto den = m_s(f, s);
    double best = 0.0;
    for (Eigen::Index k = 0; k < num.values().size(); ++k) {
        const double a = num.values()[k].real(), b = den.values()[k].real();
        if (a == 0.0) continue;
        if (b == 0.0) return std::numeric_limits<double>::infinity();
        best = std::max(best, a / b);
    }
    return best;
}

/// Dyadic BMO seminorm: sup_Q (1/|Q|) sum_Q |b - b_Q|.
inline double bmo_norm(const PhaseGridFunction& b) {
    detail::require_n1(b.spec(), "BMO norm");
    const DyadicCubeSystem sys(b.spec());
    double best = 0.0;
    for (const auto& q : sys.all()) {
        cplx mean = 0.0;
        for (int i = q.i0; i < q.i0 + q.side; ++i)
            for (int j = q.j0; j < q.j0 + q.side; ++j) mean += b(i, j);
        mean /= static_cast<double>(q.side) * q.side;
        double osc = 0.0;
        for (int i = q.i0; i < q.i0 + q.side; ++i)
            for (int j = q.j0; j < q.j0 + q.side; ++j) osc += std::abs(b(i, j) - mean);
        best = std::max(best, osc / (static_cast<double>(q.side) * q.side));
    }
    return best;
}

struct CommutatorStats {
    double bmo = 0.0;
    std::vector<double> ratios;  // ||[b,T]f||_p / (||b||_* ||f||_p)
    double max_ratio = 0.0;
    double max_commutator_norm = 0.0;
    bool exact_zero = false;  // ||b||_* = 0 and every commutator vanished
};

inline CommutatorStats bmo_commutator(const PhaseGridFunction& b, const GridOperator& T,
                                      const std::vector<PhaseGridFunction>& panel, double p) {
    if (!(p > 1.0)) throw DomainError("commutator statistic needs 1 < p");
    CommutatorStats st;
    st.bmo = bmo_norm(b);
    if (st.bmo == 0.0) {
        // b is constant on the grid and commutes with every linear T
        for (const auto& f : panel) {
            if (f.norm(p) == 0.0) throw ZeroNorm("panel function has zero norm");
            st.ratios.push_back(0.0);
        }
        st.exact_zero = true;
        return st;
    }
    for (const auto& f : panel) {
        const auto c = b.times(T(f)) - T(b.times(f));
        const double cn = c.norm(p), fn = f.norm(p);
        if (fn == 0.0) throw ZeroNorm("panel function has zero norm");
        st.max_commutator_norm = std::max(st.max_commutator_norm, cn);
        const double r = cn / (st.bmo * fn);
        st.ratios.push_back(r);
        st.max_ratio = std::max(st.max_ratio, r);
    }
    return st;
}

}  // namespace weylab
