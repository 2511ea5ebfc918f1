#pragma once

// Functions on the Heisenberg group sampled on (z, t) grids, their lambda-fibers
// (DFT in t), per-fiber Weyl multipliers, the special-Hermite vector fields, the
// convolution identity for multipliers that are convolutions in xi, and the
// sublaplacian / polyradial experiments.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "weylab/errors.hpp"
#include "weylab/grid.hpp"
#include "weylab/hermite_core.hpp"
#include "weylab/parallel.hpp"
#include "weylab/rbound_lab.hpp"
#include "weylab/weyl_transform.hpp"

namespace weylab {

// ---- fibers ------------------------------------------------------------------------

struct FiberSet {
    GridSpec zgrid;
    TimeGrid tgrid;
    std::vector<int> freq;                 // lattice index k, lambda = k * dlambda (k != 0)
    std::vector<double> lambdas;
    std::vector<PhaseGridFunction> fibers;
    PhaseGridFunction zero;                // lambda = 0 fiber, never acted on
    std::vector<std::string> warnings;

    double lambda_at(std::size_t i) const { return lambdas[i]; }
    int index_of(double lambda) const {
        for (std::size_t i = 0; i < lambdas.size(); ++i)
            if (std::abs(lambdas[i] - lambda) < 1e-12) return static_cast<int>(i);
        return -1;
    }
};

namespace detail {

inline int freq_index(int j, int T) { return j - T / 2; }  // column j of the DFT -> k in [-T/2, T/2)

}  // namespace detail

/// f^lambda(z) = sum_t e^{i lambda t} f(z, t) dt for lambda on the lattice k pi / L_t.
inline FiberSet fiber_transform(const HeisenbergGridFunction& f) {
    const auto& tg = f.tgrid();
    tg.validate();
    f.zgrid().validate();
    const int T = tg.T;
    CMatrix E(T, T);  // E(k_t, j) = e^{i lambda_j t_k} dt
    for (int k = 0; k < T; ++k)
        for (int j = 0; j < T; ++j)
            E(k, j) = std::polar(tg.dt(), detail::freq_index(j, T) * tg.dlambda() * tg.coord(k));
    const CMatrix F = f.values() * E;
    FiberSet s;
    s.zgrid = f.zgrid();
    s.tgrid = tg;
    for (int j = 0; j < T; ++j) {
        const int k = detail::freq_index(j, T);
        PhaseGridFunction g(f.zgrid(), F.col(j));
        if (k == 0) {
            s.zero = std::move(g);
            continue;
        }
        s.freq.push_back(k);
        s.lambdas.push_back(k * tg.dlambda());
        s.fibers.push_back(std::move(g));
    }
    return s;
}

/// f(z, t) = (2 pi)^{-1} sum_lambda e^{-i lambda t} f^lambda(z) dlambda.
inline HeisenbergGridFunction fiber_inverse(const FiberSet& s) {
    const auto& tg = s.tgrid;
    tg.validate();
    const int T = tg.T;
    if (static_cast<int>(s.fibers.size()) != T - 1) throw GridError("fiber set does not cover the frequency lattice");
    CMatrix F(static_cast<Eigen::Index>(s.zgrid.count()), T);
    for (int j = 0; j < T; ++j) {
        const int k = detail::freq_index(j, T);
        if (k == 0) {
            F.col(j) = s.zero.values();
        } else {
            const auto it = std::find(s.freq.begin(), s.freq.end(), k);
            if (it == s.freq.end()) throw GridError("missing fiber " + std::to_string(k));
            F.col(j) = s.fibers[it - s.freq.begin()].values();
        }
    }
    CMatrix E(T, T);  // E(j, k_t) = e^{-i lambda_j t_k} dlambda / (2 pi)
    for (int j = 0; j < T; ++j)
        for (int k = 0; k < T; ++k)
            E(j, k) = std::polar(tg.dlambda() / (2.0 * kPi), -detail::freq_index(j, T) * tg.dlambda() * tg.coord(k));
    return {s.zgrid, tg, F * E};
}

/// Sum_lambda ||f^lambda||_2^2 dlambda / (2 pi), zero fiber included.
inline double fiber_energy(const FiberSet& s) {
    double e = std::pow(s.zero.norm(), 2);
    for (const auto& g : s.fibers) e += std::pow(g.norm(), 2);
    return e * s.tgrid.dlambda() / (2.0 * kPi);
}

/// Circular shift of the t-samples by `steps` lattice points: g(z, t) = f(z, t - steps dt).
inline HeisenbergGridFunction t_translate(const HeisenbergGridFunction& f, int steps) {
    const int T = f.tgrid().T;
    CMatrix out(f.values().rows(), T);
    for (int k = 0; k < T; ++k) out.col(((k + steps) % T + T) % T) = f.values().col(k);
    return {f.zgrid(), f.tgrid(), out};
}

/// g(z) e^{-i lambda t}: a single fiber at lambda of size 2 L_t g.
inline HeisenbergGridFunction pure_tone(const PhaseGridFunction& g, const TimeGrid& tg, double lambda) {
    CMatrix v(static_cast<Eigen::Index>(g.spec().count()), tg.T);
    for (int k = 0; k < tg.T; ++k) v.col(k) = g.values() * std::polar(1.0, -lambda * tg.coord(k));
    return {g.spec(), tg, v};
}

// ---- per-fiber multipliers --------------------------------------------------------------

/// |lambda| = 4^k (k >= 0): sqrt|lambda| is a power of two and the conjugating
/// dilation is an exact relabeling of the grid.
inline bool whitelisted(double lambda) {
    const double a = std::abs(lambda);
    if (a < 1.0) return false;
    const double k = std::log(a) / std::log(4.0);
    const long kr = std::lround(k);
    return std::abs(a - std::pow(4.0, static_cast<double>(kr))) < 1e-9 * a;
}

/// R f(x, y) = f(-x, y) (zero where -x leaves the box).
inline PhaseGridFunction reflect_x(const PhaseGridFunction& f) {
    const auto& s = f.spec();
    if (s.n != 1) throw DomainError("reflection is implemented for n = 1");
    PhaseGridFunction out(s);
    for (int ix = 0; ix < s.m; ++ix)
        for (int iy = 0; iy < s.m; ++iy) out(ix, iy) = f.at_or_zero(s.m - ix, iy);
    return out;
}

enum class FiberPath { conjugation, scaled_basis, unit_basis };

/// U[j, a] = <h_a(lambda), h_j> with h_a(lambda)(xi) = |lambda|^{1/4} h_a(|lambda|^{1/2} xi), by
/// quadrature on the xi grid: U m U^T carries a scaled-basis matrix to the unscaled basis.
inline RMatrix dilation_change_of_basis(const ContextPtr& ctx, double lambda) {
    if (ctx->n() != 1) throw DomainError("change of basis is implemented for n = 1");
    const double s = std::sqrt(std::abs(lambda));
    const int P = ctx->points(), N = ctx->N();
    RMatrix G(P, N);
    std::vector<double> buf(N);
    for (int i = 0; i < P; ++i) {
        ctx->evaluate(s * ctx->grid()[i], buf.data());
        for (int a = 0; a < N; ++a) G(i, a) = std::sqrt(s) * buf[a];
    }
    return ctx->samples().transpose() * G * ctx->step();
}

struct FiberOptions {
    bool interpolate = false;         // allow lambdas off the whitelist (scaled-basis path)
    FiberPath path = FiberPath::conjugation;
    double skip_rel = 1e-13;          // fibers below this fraction of the largest are zeroed, not acted on
};

/// T^lambda_m g for one fiber, with m given in the lambda-scaled basis, acting on
/// the left (W(Tg) = m W(g)) or on the right (W(Tg) = W(g) m).
///   conjugation: lambda < 0 via x-reflection, then relabel by sqrt|lambda|, apply
///                the lambda = 1 multiplier, relabel back (whitelist only);
///   scaled_basis: W_lambda directly with scaled phase-space points;
///   unit_basis:   W_lambda in the unscaled basis (points (lambda x, y)) with m
///                 carried over by the dilation change of basis.
inline PhaseGridFunction apply_fiber_operator(const ContextPtr& ctx, const OperatorMatrix& m, const PhaseGridFunction& g,
                                              double lambda, Side side = Side::left, FiberOptions opt = {}) {
    if (lambda == 0.0) throw DomainError("the lambda = 0 fiber carries no representation");
    if (is_identity(m)) return g;
    const bool wl = whitelisted(lambda);
    if (!wl && !opt.interpolate)
        throw ResampleError("lambda = " + std::to_string(lambda) + " is not on the dilation whitelist");
    auto unit_apply = [&](const PhaseGridFunction& f, PointScaling sc) {
        return side == Side::left ? apply_multiplier(ctx, m, f, sc) : apply_right_multiplier(ctx, m, f, sc);
    };
    if (opt.path == FiberPath::unit_basis) {
        const CMatrix U = dilation_change_of_basis(ctx, lambda).cast<cplx>();
        const OperatorMatrix mu(ctx, U * m.entries() * U.transpose());
        const auto sc = PointScaling::unit_basis(lambda);
        const auto W = weyl_transform(ctx, g, sc);
        return inverse_weyl(ctx, side == Side::left ? mu * W : W * mu, g.spec(), sc);
    }
    if (!wl || opt.path == FiberPath::scaled_basis) return unit_apply(g, PointScaling::for_lambda(lambda));
    const double r = std::sqrt(std::abs(lambda));
    const auto in = lambda < 0 ? reflect_x(g) : g;
    auto out = relabel(unit_apply(relabel(in, r), {}), 1.0 / r);
    return lambda < 0 ? reflect_x(out) : out;
}

namespace detail {

inline double max_fiber_norm(const FiberSet& s) {
    double mx = 0.0;
    for (const auto& g : s.fibers) mx = std::max(mx, g.norm());
    return mx;
}

}  // namespace detail

/// Apply lambda -> op(lambda) to every nonzero fiber in parallel; the zero
/// fiber passes through unchanged (with a warning when it is not negligible).
inline FiberSet apply_fiber_family(const ContextPtr& ctx, const std::function<OperatorMatrix(double)>& op,
                                   const FiberSet& in, Side side = Side::left, FiberOptions opt = {}) {
    FiberSet out = in;
    const double mx = detail::max_fiber_norm(in);
    std::vector<char> active(in.fibers.size(), 0);
    for (std::size_t i = 0; i < in.fibers.size(); ++i) active[i] = mx > 0.0 && in.fibers[i].norm() > opt.skip_rel * mx;
    for (std::size_t i = 0; i < in.fibers.size(); ++i)
        if (active[i] && !whitelisted(in.lambdas[i]) && !opt.interpolate)
            throw ResampleError("fiber lambda = " + std::to_string(in.lambdas[i]) +
                                " is off the dilation whitelist; enable interpolation");
    std::vector<OperatorMatrix> mats(in.fibers.size());
    for (std::size_t i = 0; i < in.fibers.size(); ++i)
        if (active[i]) mats[i] = op(in.lambdas[i]);
    parallel_for(in.fibers.size(), default_workers(), [&](std::size_t i) {
        if (active[i])
            out.fibers[i] = apply_fiber_operator(ctx, mats[i], in.fibers[i], in.lambdas[i], side, opt);
        else
            out.fibers[i] = PhaseGridFunction(in.zgrid);
    });
    if (in.zero.norm() > opt.skip_rel * std::max(mx, 1e-300))
        out.warnings.push_back("FiberExcluded: lambda = 0 fiber passed through unchanged");
    return out;
}

inline FiberSet apply_fiber_multiplier(const MultiplierFamily& fam, const FiberSet& in, FiberOptions opt = {}) {
    return apply_fiber_family(fam.ctx, [&](double l) { return fam.at(l); }, in, Side::left, opt);
}

/// T_m f on the Heisenberg grid: fibers, multiplier per fiber, inverse.
inline HeisenbergGridFunction heisenberg_multiplier(const MultiplierFamily& fam, const HeisenbergGridFunction& f,
                                                    FiberOptions opt = {}, std::vector<std::string>* warnings = nullptr) {
    const auto out = apply_fiber_multiplier(fam, fiber_transform(f), opt);
    if (warnings) warnings->insert(warnings->end(), out.warnings.begin(), out.warnings.end());
    return fiber_inverse(out);
}

/// L^{1/2} f: right multiplication by H(lambda)^{1/2} on every fiber.
inline HeisenbergGridFunction sublaplacian_sqrt(const ContextPtr& ctx, const HeisenbergGridFunction& f,
                                                FiberOptions opt = {}, std::vector<std::string>* warnings = nullptr) {
    auto op = [&](double l) {
        const double a = std::abs(l);
        return spectral_function(ctx, [a](double e) { return std::sqrt(a * e); }).in_basis(l);
    };
    const auto out = apply_fiber_family(ctx, op, fiber_transform(f), Side::right, opt);
    if (warnings) warnings->insert(warnings->end(), out.warnings.begin(), out.warnings.end());
    return fiber_inverse(out);
}

/// Polyradial projection of f(., t) for every t, computed fiberwise (R commutes
/// with the t-DFT); negligible fibers are left as they are.
inline HeisenbergGridFunction polyradial_slices(const HeisenbergGridFunction& f, int Q = 64, double skip_rel = 1e-13) {
    auto fs = fiber_transform(f);
    double mx = fs.zero.norm();
    for (const auto& g : fs.fibers) mx = std::max(mx, g.norm());
    std::vector<PhaseGridFunction*> todo;
    if (fs.zero.norm() > skip_rel * mx) todo.push_back(&fs.zero);
    for (auto& g : fs.fibers)
        if (g.norm() > skip_rel * mx) todo.push_back(&g);
    polyradial_project_many(todo, Q);
    return fiber_inverse(fs);
}

// ---- two-path scaling test ---------------------------------------------------------------

struct ScalingCheck {
    double lambda = 0.0;
    double rel_diff = 0.0;         // ||conjugation - unit_basis|| / ||conjugation||
    double rel_diff_scaled = 0.0;  // ||conjugation - scaled_basis|| / ||conjugation|| (same samples; ~ rounding)
    double norm = 0.0;
};

inline ScalingCheck scaling_two_path(const ContextPtr& ctx, const OperatorMatrix& m, const PhaseGridFunction& g,
                                     double lambda) {
    if (!whitelisted(lambda)) throw ResampleError("two-path test needs a whitelisted lambda");
    const auto a = apply_fiber_operator(ctx, m, g, lambda, Side::left, {false, FiberPath::conjugation});
    const auto b = apply_fiber_operator(ctx, m, g, lambda, Side::left, {false, FiberPath::unit_basis});
    const auto c2 = apply_fiber_operator(ctx, m, g, lambda, Side::left, {false, FiberPath::scaled_basis});
    ScalingCheck c;
    c.lambda = lambda;
    c.norm = a.norm();
    const double d = c.norm > 0.0 ? c.norm : 1.0;
    c.rel_diff = (a - b).norm() / d;
    c.rel_diff_scaled = (a - c2).norm() / d;
    return c;
}

// ---- vector fields ----------------------------------------------------------------------

struct VectorFieldRow {
    std::string name;
    double residual = 0.0;            // identity in the form that holds for this transform
    double residual_as_stated = 0.0;  // textbook arrangement (side / constant), for the record
};

struct VectorFieldTable {
    double lambda = 1.0;
    double h = 0.0;
    std::vector<VectorFieldRow> rows;
    double max_residual() const {
        double m = 0.0;
        for (const auto& r : rows) m = std::max(m, r.residual);
        return m;
    }
};

/// Residuals of the Z, Z-bar (left and right), z, z-bar multiplication and L_lambda
/// identities, derivatives by centered differences on the grid:
///   Z = d_z - (l/4) zbar : W(Z f) = -(i/2) A^* W      Z^R = d_z + (l/4) zbar : W(Z^R f) = -(i/2) W A^*
///   Zb = d_zb + (l/4) z  : W(Zb f) = -(i/2) A W       Zb^R = d_zb - (l/4) z  : W(Zb^R f) = -(i/2) W A
///   l W(z f) = i [W, A],  l W(zbar f) = -i [W, A^*],  L_l = -((X^R)^2 + (Y^R)^2) : W(L_l f) = W H
/// with A = A(l), W = W_l. Differences are measured in HS norm on interior indices
/// (margin 2), relative to the size of the group (first-order fields, coordinate
/// multiplications, L_l), so an identity whose right side vanishes still gets a
/// meaningful relative figure.
inline VectorFieldTable vector_field_checks(const ContextPtr& ctx, double lambda, const PhaseGridFunction& f,
                                            DiffScheme scheme = DiffScheme::finite_difference) {
    if (!(lambda > 0.0)) throw DomainError("vector-field identities are checked for lambda > 0");
    const auto sc = PointScaling::for_lambda(lambda);
    const auto s = scaled_operators(ctx, lambda);
    const auto& A = s.annihilation[0];
    const auto& Ad = s.creation[0];
    const auto& H = s.hermite;
    const cplx I(0.0, 1.0);
    const double l = lambda;
    const int mg = 2;
    VectorFieldTable t;
    t.lambda = lambda;
    t.h = f.spec().h();

    const auto fx = partial(f, 0, scheme), fy = partial(f, 1, scheme);
    const auto dz = (fx - fy * I) * cplx(0.5);
    const auto dzb = (fx + fy * I) * cplx(0.5);
    const auto zf = multiply_by(f, [](double x, double y) { return cplx(x, y); });
    const auto zbf = multiply_by(f, [](double x, double y) { return cplx(x, -y); });
    auto W = [&](const PhaseGridFunction& g) { return weyl_transform(ctx, g, sc).in_basis(lambda); };
    const auto Wf = W(f);

    struct Item {
        std::string name;
        OperatorMatrix lhs, rhs, stated;
    };
    auto emit = [&](const std::vector<Item>& group) {
        double scale = 0.0;
        for (const auto& it : group) scale = std::max({scale, it.lhs.interior_hs_norm(mg), it.rhs.interior_hs_norm(mg)});
        for (const auto& it : group) {
            const double d = (it.lhs - it.rhs).interior_hs_norm(mg), ds = (it.lhs - it.stated).interior_hs_norm(mg);
            t.rows.push_back({it.name, scale > 0.0 ? d / scale : d, scale > 0.0 ? ds / scale : ds});
        }
    };

    emit({{"Z", W(dz - zbf * cplx(l / 4)), Ad * Wf * (-0.5 * I), Wf * Ad * I},
          {"Zbar", W(dzb + zf * cplx(l / 4)), A * Wf * (-0.5 * I), Wf * A * I},
          {"Z^R", W(dz + zbf * cplx(l / 4)), Wf * Ad * (-0.5 * I), Ad * Wf * I},
          {"Zbar^R", W(dzb - zf * cplx(l / 4)), Wf * A * (-0.5 * I), A * Wf * I}});
    emit({{"z", W(zf) * cplx(l), commutator(Wf, A) * I, commutator(Wf, Ad) * (2.0 * I)},
          {"zbar", W(zbf) * cplx(l), commutator(Wf, Ad) * (-I), commutator(A, Wf) * (2.0 * I)}});

    // (X^R)^2 + (Y^R)^2 with X^R = d_x - (i l/2) y, Y^R = d_y + (i l/2) x:
    //   f_xx + f_yy - i l y f_x + i l x f_y - (l^2/4)(x^2 + y^2) f
    const auto lap = partial2(f, 0, scheme) + partial2(f, 1, scheme);
    const auto rot = multiply_by(fy, [](double x, double) { return cplx(x); }) -
                     multiply_by(fx, [](double, double y) { return cplx(y); });
    const auto pot = multiply_by(f, [&](double x, double y) { return cplx(0.25 * l * l * (x * x + y * y)); });
    const auto Lf = (lap + rot * (I * l) - pot) * cplx(-1.0);
    emit({{"L_lambda", W(Lf), Wf * H, Wf * H}});
    return t;
}

// ---- convolution multipliers -----------------------------------------------------------------

struct KernelSpec {
    enum class Kind { gaussian, delta, custom } kind = Kind::gaussian;
    double width = 0.75;
    double center = 0.0;
    std::function<double(double)> fn;  // custom kernels

    double operator()(double eta) const {
        if (kind == Kind::custom) return fn(eta);
        const double u = (eta - center) / width;
        return std::exp(-0.5 * u * u) / (std::sqrt(2.0 * kPi) * width);
    }
};

/// Matrix of phi -> k * phi in the lambda-scaled basis by quadrature on the xi grid.
inline OperatorMatrix convolution_matrix(const ContextPtr& ctx, const KernelSpec& k, double lambda) {
    if (ctx->n() != 1) throw DomainError("convolution multipliers are implemented for n = 1");
    if (k.kind == KernelSpec::Kind::delta) return OperatorMatrix::identity(ctx).in_basis(lambda);
    const int P = ctx->points();
    const double s = std::sqrt(std::abs(lambda)), h = ctx->step();
    RMatrix K(P, P);
    for (int u = 0; u < P; ++u)
        for (int v = 0; v < P; ++v) K(u, v) = k((ctx->grid()[u] - ctx->grid()[v]) / s);
    const RMatrix M = ctx->samples().transpose() * K * ctx->samples() * (h * h / s);
    return OperatorMatrix(ctx, M.cast<cplx>()).in_basis(lambda);
}

/// S_2 g(x, y) = sum_eta k(eta) g(x, y + eta) h over the y-lattice (delta: identity).
inline PhaseGridFunction convolve_y(const PhaseGridFunction& g, const KernelSpec& k) {
    if (k.kind == KernelSpec::Kind::delta) return g;
    const auto& s = g.spec();
    const double h = s.h();
    std::vector<double> w(2 * s.m - 1);
    for (int d = -(s.m - 1); d <= s.m - 1; ++d) w[d + s.m - 1] = k(d * h) * h;
    PhaseGridFunction out(s);
    for (int ix = 0; ix < s.m; ++ix)
        for (int iy = 0; iy < s.m; ++iy) {
            cplx acc = 0.0;
            for (int jy = 0; jy < s.m; ++jy) acc += w[jy - iy + s.m - 1] * g(ix, jy);
            out(ix, iy) = acc;
        }
    return out;
}

struct ConvolutionCheck {
    double lambda = 1.0;
    double residual = 0.0;   // relative L^2
    PhaseGridFunction left, right;
};

/// T^lambda_{S(lambda)} f (through the fiber machinery) against e_lambda S_2 e_{-lambda} f.
inline ConvolutionCheck convolution_identity_check(const ContextPtr& ctx, const KernelSpec& k, double lambda, const PhaseGridFunction& f,
                                  FiberOptions opt = {}) {
    ConvolutionCheck c;
    c.lambda = lambda;
    c.left = apply_fiber_operator(ctx, convolution_matrix(ctx, k, lambda), f, lambda, Side::left, opt);
    c.right = twist_modulate(convolve_y(twist_modulate(f, -lambda), k), lambda);
    const double nr = c.right.norm();
    c.residual = nr > 0.0 ? (c.left - c.right).norm() / nr : (c.left - c.right).norm();
    return c;
}

// ---- sublaplacian and polyradial experiments ------------------------------------------------

struct FiberRatioStats {
    double p = 2.0;
    std::vector<double> ratios;
    double max_ratio = 0.0;
    std::vector<std::string> warnings;
};

/// ||T_m f||_p / ||L^{1/2} f||_p per panel function.
inline FiberRatioStats sublaplacian_ratio_experiment(const MultiplierFamily& fam, const std::vector<HeisenbergGridFunction>& panel,
                                            double p, FiberOptions opt = {}) {
    FiberRatioStats st;
    st.p = p;
    for (const auto& f : panel) {
        const auto Tf = heisenberg_multiplier(fam, f, opt, &st.warnings);
        const auto Lf = sublaplacian_sqrt(fam.ctx, f, opt);
        const double den = Lf.norm(p);
        if (den == 0.0) throw ZeroNorm("L^{1/2} f vanishes");
        st.ratios.push_back(Tf.norm(p) / den);
        st.max_ratio = std::max(st.max_ratio, st.ratios.back());
    }
    return st;
}

/// ||R T_m R f||_p / ||f||_p per panel function.
inline FiberRatioStats polyradial_ratio_experiment(const MultiplierFamily& fam, const std::vector<HeisenbergGridFunction>& panel,
                                             double p, FiberOptions opt = {}) {
    FiberRatioStats st;
    st.p = p;
    for (const auto& f : panel) {
        const double den = f.norm(p);
        if (den == 0.0) throw ZeroNorm("panel function vanishes");
        const auto g = polyradial_slices(heisenberg_multiplier(fam, polyradial_slices(f), opt, &st.warnings));
        st.ratios.push_back(g.norm(p) / den);
        st.max_ratio = std::max(st.max_ratio, st.ratios.back());
    }
    return st;
}

/// Panel of sums of pure tones g_lambda(z) e^{-i lambda t}, g_lambda random with
/// Hermite coefficients in [0, band]^2 of the lambda-scaled basis.
inline std::vector<HeisenbergGridFunction> tone_panel(const ContextPtr& ctx, const GridSpec& zg, const TimeGrid& tg,
                                                      const std::vector<double>& lambdas, int count, int band,
                                                      std::uint64_t seed) {
    std::vector<HeisenbergGridFunction> out;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (int c = 0; c < count; ++c) {
        HeisenbergGridFunction f(zg, tg, CMatrix::Zero(static_cast<Eigen::Index>(zg.count()), tg.T));
        for (double l : lambdas) {
            CMatrix K = CMatrix::Zero(ctx->N(), ctx->N());
            for (int a = 0; a <= band; ++a)
                for (int b = 0; b <= band; ++b) K(a, b) = cplx(nd(rng), nd(rng));
            // function whose W_l transform is K, up to the inversion constant
            const auto g = inverse_weyl(ctx, OperatorMatrix(ctx, K), zg, PointScaling::for_lambda(l));
            const auto tone = pure_tone(g * cplx(1.0 / g.norm()), tg, l);
            f.values() += tone.values();
        }
        out.push_back(std::move(f));
    }
    return out;
}

}  // namespace weylab
