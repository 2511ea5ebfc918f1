#pragma once

// Rademacher-average estimates of R-bounds on finite panels, multiplier
// families over lambda, the lambda-derivative decomposition of T^lambda_{m(lambda)},
// the xi.grad factorization identities and the Riesz-transform growth computation.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "weylab/derivation_calculus.hpp"
#include "weylab/errors.hpp"
#include "weylab/grid.hpp"
#include "weylab/hermite_core.hpp"
#include "weylab/maximal_weights.hpp"
#include "weylab/parallel.hpp"
#include "weylab/weyl_transform.hpp"

namespace weylab {

// ---- Rademacher averages ---------------------------------------------------------

enum class SignMode { exact, sampled };

struct RBoundReport {
    double p = 2.0;
    int members = 0;
    SignMode mode = SignMode::exact;
    std::uint64_t seed = 0;
    std::size_t patterns = 0;
    // max over tuples of (E||sum r_j T_j f_j||_p^p / E||sum r_j f_j||_p^p)^{1/p}
    double constant = 0.0;
    // same with first moments E||.||_p
    double constant_first_moment = 0.0;
    // max over tuples of ||(sum |T_j f_j|^2)^{1/2}||_p / ||(sum |f_j|^2)^{1/2}||_p
    double square_function = 0.0;
    std::vector<double> tuple_ratios;
    std::size_t argmax_tuple = 0;
    std::string label = "lower estimate over the tested panel";
};

namespace detail {

inline double lp_power(const Eigen::VectorXcd& v, double p, double vol) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) s += std::pow(std::abs(v[i]), p);
    return s * vol;
}

/// Sign pattern d for J members: bit j of d (exact) or a seeded stream keyed by d.
inline std::vector<int> sign_pattern(std::size_t d, int J, SignMode mode, std::uint64_t seed) {
    std::vector<int> r(J);
    if (mode == SignMode::exact) {
        for (int j = 0; j < J; ++j) r[j] = (d >> j) & 1U ? -1 : 1;
    } else {
        std::seed_seq ss{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                         static_cast<std::uint32_t>(d), static_cast<std::uint32_t>(d >> 32)};
        std::mt19937_64 g(ss);
        for (int j = 0; j < J; ++j) r[j] = (g() >> 63) ? -1 : 1;
    }
    return r;
}

}  // namespace detail

/// R-bound estimate of {T_1..T_J} on a panel of J-tuples (f_1..f_J).
inline RBoundReport rademacher_estimate(const std::vector<GridOperator>& members,
                                        const std::vector<std::vector<PhaseGridFunction>>& tuples, double p,
                                        SignMode mode = SignMode::exact, std::uint64_t seed = 0, int draws = 512) {
    const int J = static_cast<int>(members.size());
    if (J < 1) throw DomainError("need at least one member");
    if (!(p >= 1.0)) throw DomainError("p must be >= 1");
    if (mode == SignMode::exact && J > 12) throw ModeError("exact sign enumeration is limited to J <= 12");
    if (mode == SignMode::sampled && draws < 512) throw ModeError("sampled mode needs at least 512 draws");
    RBoundReport rep;
    rep.p = p;
    rep.members = J;
    rep.mode = mode;
    rep.seed = seed;
    rep.patterns = mode == SignMode::exact ? (std::size_t{1} << J) : static_cast<std::size_t>(draws);

    for (std::size_t t = 0; t < tuples.size(); ++t) {
        const auto& tup = tuples[t];
        if (static_cast<int>(tup.size()) != J) throw DomainError("tuple length differs from family size");
        const auto& spec = tup[0].spec();
        const double vol = spec.cell_volume();
        std::vector<PhaseGridFunction> Tf(J);
        for (int j = 0; j < J; ++j) Tf[j] = members[j](tup[j]);

        std::vector<double> num_p(rep.patterns), den_p(rep.patterns), num_1(rep.patterns), den_1(rep.patterns);
        parallel_for(rep.patterns, default_workers(), [&](std::size_t d) {
            const auto r = detail::sign_pattern(d, J, mode, seed);
            Eigen::VectorXcd a = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(spec.count()));
            Eigen::VectorXcd b = a;
            for (int j = 0; j < J; ++j) {
                a += static_cast<double>(r[j]) * Tf[j].values();
                b += static_cast<double>(r[j]) * tup[j].values();
            }
            num_p[d] = detail::lp_power(a, p, vol);
            den_p[d] = detail::lp_power(b, p, vol);
            num_1[d] = std::pow(num_p[d], 1.0 / p);
            den_1[d] = std::pow(den_p[d], 1.0 / p);
        });
        double np = 0, dp = 0, n1 = 0, d1 = 0;
        for (std::size_t d = 0; d < rep.patterns; ++d) {
            np += num_p[d];
            dp += den_p[d];
            n1 += num_1[d];
            d1 += den_1[d];
        }
        if (dp == 0.0) throw ZeroNorm("Rademacher average of the tuple vanishes");
        const double ratio = std::pow(np / dp, 1.0 / p);
        rep.tuple_ratios.push_back(ratio);
        if (ratio > rep.constant) {
            rep.constant = ratio;
            rep.argmax_tuple = t;
        }
        rep.constant_first_moment = std::max(rep.constant_first_moment, n1 / d1);

        Eigen::VectorXd sq_t = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spec.count())), sq_f = sq_t;
        for (int j = 0; j < J; ++j) {
            sq_t += Tf[j].values().cwiseAbs2();
            sq_f += tup[j].values().cwiseAbs2();
        }
        double st = 0.0, sf = 0.0;
        for (Eigen::Index i = 0; i < sq_t.size(); ++i) {
            st += std::pow(sq_t[i], p / 2.0);
            sf += std::pow(sq_f[i], p / 2.0);
        }
        if (sf > 0.0) rep.square_function = std::max(rep.square_function, std::pow(st / sf, 1.0 / p));
    }
    return rep;
}

// ---- multiplier families ---------------------------------------------------------

/// lambda -> m(lambda) as a matrix in the lambda-scaled basis. `derivative`, when
/// present, is d/dlambda of that matrix (the moving basis is accounted for in
/// derivative_terms).
struct MultiplierFamily {
    std::string tag;
    ContextPtr ctx;
    std::vector<double> samples;
    std::function<OperatorMatrix(double)> matrix;
    std::function<OperatorMatrix(double)> derivative;

    OperatorMatrix at(double lambda) const {
        if (lambda == 0.0) throw DomainError("families are defined on nonzero lambda");
        return matrix(lambda).in_basis(lambda);
    }

    /// Analytic derivative when available, else a central difference of matrix().
    OperatorMatrix scaled_derivative(double lambda, double h = 1e-4) const {
        if (derivative) return derivative(lambda).in_basis(lambda);
        if (std::abs(lambda) <= h) throw DomainError("finite-difference step crosses lambda = 0");
        return ((matrix(lambda + h) - matrix(lambda - h)) * cplx(0.5 / h)).in_basis(lambda);
    }

    void validate() const {
        if (!ctx || !matrix) throw ConfigError("multiplier family is incomplete");
        for (std::size_t i = 0; i < samples.size(); ++i) {
            if (samples[i] == 0.0) throw DomainError("lambda samples must be nonzero");
            if (i > 0 && !(samples[i] > samples[i - 1])) throw DomainError("lambda samples must be sorted");
        }
    }
};

/// A H^{-1/2} = A(lambda) H(lambda)^{-1/2} in the scaled basis (lambda-independent).
inline OperatorMatrix riesz_matrix(const ContextPtr& ctx, int j = 1) {
    return annihilation(ctx, j) * spectral_function(ctx, [](double e) { return 1.0 / std::sqrt(e); });
}

inline MultiplierFamily riesz_family(const ContextPtr& ctx, std::vector<double> lambdas, int j = 1) {
    const auto R = riesz_matrix(ctx, j);
    MultiplierFamily f{"riesz", ctx, std::move(lambdas), [R](double) { return R; },
                       [ctx](double) { return OperatorMatrix::zero(ctx); }};
    f.validate();
    return f;
}

/// phi(H(lambda)) = phi(|lambda| H) in the scaled basis.
inline MultiplierFamily spectral_family(const ContextPtr& ctx, std::function<double(double)> phi,
                                        std::vector<double> lambdas, std::string tag = "spectral",
                                        std::function<double(double)> dphi = {}) {
    MultiplierFamily f;
    f.tag = std::move(tag);
    f.ctx = ctx;
    f.samples = std::move(lambdas);
    f.matrix = [ctx, phi](double l) {
        const double a = std::abs(l);
        return spectral_function(ctx, [&](double e) { return phi(a * e); });
    };
    if (dphi)
        f.derivative = [ctx, dphi](double l) {
            const double a = std::abs(l), sg = l > 0 ? 1.0 : -1.0;
            return spectral_function(ctx, [&](double e) { return sg * e * dphi(a * e); });
        };
    f.validate();
    return f;
}

/// e^{-H(lambda)}.
inline MultiplierFamily heat_family(const ContextPtr& ctx, std::vector<double> lambdas) {
    return spectral_family(
        ctx, [](double t) { return std::exp(-t); }, std::move(lambdas), "heat", [](double t) { return -std::exp(-t); });
}

inline bool is_identity(const OperatorMatrix& m) {
    return m.entries().isIdentity(0.0);
}

/// T^lambda_m f computed in the lambda-scaled basis (the identity multiplier is
/// returned exactly).
inline PhaseGridFunction apply_lambda_multiplier(const ContextPtr& ctx, const OperatorMatrix& m,
                                                 const PhaseGridFunction& f, double lambda) {
    if (is_identity(m)) return f;
    if (m.entries().isZero(0.0)) return PhaseGridFunction(f.spec());
    return apply_multiplier(ctx, m, f, PointScaling::for_lambda(lambda));
}

// ---- xi . grad and the lambda-derivative identity ------------------------------------

/// Matrix of xi_j d/dxi_j from (A_j^2 - A_j^{*2} + [A_j^*, A_j]) / 4 (same in every
/// scaled basis, since xi.grad commutes with dilations).
inline OperatorMatrix xi_grad_matrix(const ContextPtr& ctx) {
    OperatorMatrix X = OperatorMatrix::zero(ctx);
    for (int j = 1; j <= ctx->n(); ++j) {
        const auto A = annihilation(ctx, j), Ad = creation(ctx, j);
        X += (A * A - Ad * Ad + commutator(Ad, A)) * cplx(0.25);
    }
    return X.with_margin(2);
}

/// xi d/dxi by quadrature: <h_a, xi h_b'> with h_b' from spectral differentiation
/// of the xi-grid samples (n = 1). Independent of the ladder-operator route.
inline OperatorMatrix xi_grad_quadrature(const ContextPtr& ctx) {
    if (ctx->n() != 1) throw DomainError("quadrature route is implemented for n = 1");
    const RMatrix D = spectral_diff_matrix(ctx->points(), ctx->step());
    const RMatrix dH = D * ctx->samples();
    const RMatrix xdH = ctx->grid().asDiagonal() * dH;
    const RMatrix X = ctx->samples().transpose() * xdH * ctx->step();
    return {ctx, X.cast<cplx>()};
}

struct DerivativeTerms {
    double lambda = 1.0, h_fd = 0.0;
    PhaseGridFunction lhs;             // 2 lambda d/dlambda T f (central difference)
    PhaseGridFunction commutator_B;    // [B, T] f
    PhaseGridFunction xi_grad;         // T_{[m, xi.grad]} f
    PhaseGridFunction lambda_deriv;    // T_{2 lambda m'} f, m' the operator derivative
    double residual_plus = 0.0;        // lhs - ([B,T] + T_{[m,xi.grad]} + T_{2 lambda m'})
    double residual_minus = 0.0;       // lhs - ([B,T] - T_{[m,xi.grad]} + T_{2 lambda m'})
    double lhs_norm = 0.0;
};

struct DerivativeStudy {
    DerivativeTerms coarse, fine;      // steps h and h/2
    double halving_plus = 0.0;         // residual_plus(h) / residual_plus(h/2)
    double halving_minus = 0.0;
    std::string winner;                // "+[m, xi.grad]", "-[m, xi.grad]" or "none"
};

/// Terms of 2 lambda d/dlambda T^lambda_{m(lambda)} f = [B, T] f + T_{[m, xi.grad]} f +
/// T_{2 lambda m'} f. In the scaled basis with matrix M(lambda) the operator
/// derivative is m' = M' - [M, X] / (2 lambda). Residuals are relative L^2 on the
/// inner half of the box.
inline DerivativeTerms derivative_terms(const MultiplierFamily& fam, double lambda, double h_fd,
                                        const PhaseGridFunction& f, DiffScheme scheme = DiffScheme::spectral) {
    if (!(h_fd > 0.0) || std::abs(lambda) <= h_fd) throw DomainError("step must be positive and keep lambda +- h nonzero");
    const auto& ctx = fam.ctx;
    DerivativeTerms d;
    d.lambda = lambda;
    d.h_fd = h_fd;
    const auto Tp = apply_lambda_multiplier(ctx, fam.at(lambda + h_fd), f, lambda + h_fd);
    const auto Tm = apply_lambda_multiplier(ctx, fam.at(lambda - h_fd), f, lambda - h_fd);
    d.lhs = (Tp - Tm) * cplx(lambda / h_fd);

    const auto M = fam.at(lambda);
    const auto Tf = apply_lambda_multiplier(ctx, M, f, lambda);
    d.commutator_B = euler_operator(Tf, scheme) - apply_lambda_multiplier(ctx, M, euler_operator(f, scheme), lambda);

    const auto X = xi_grad_matrix(ctx).in_basis(lambda);
    const auto MX = commutator(M, X).in_basis(lambda);
    d.xi_grad = apply_lambda_multiplier(ctx, MX, f, lambda);
    const auto mprime = fam.scaled_derivative(lambda) - MX * cplx(1.0 / (2.0 * lambda));
    d.lambda_deriv = apply_lambda_multiplier(ctx, (mprime * cplx(2.0 * lambda)).in_basis(lambda), f, lambda);

    const auto lw = window(d.lhs, 0.5);
    d.lhs_norm = lw.norm();
    const auto plus = window(d.lhs - d.commutator_B - d.xi_grad - d.lambda_deriv, 0.5);
    const auto minus = window(d.lhs - d.commutator_B + d.xi_grad - d.lambda_deriv, 0.5);
    if (d.lhs_norm == 0.0) {
        d.residual_plus = plus.norm();
        d.residual_minus = minus.norm();
    } else {
        d.residual_plus = plus.norm() / d.lhs_norm;
        d.residual_minus = minus.norm() / d.lhs_norm;
    }
    return d;
}

/// derivative_terms at h and h/2. Throws FDStepError when the residual at h is
/// above `tol` for the better convention and halving shows it is dominated by
/// the O(h^2) term (ratio > 2).
inline DerivativeStudy derivative_study(const MultiplierFamily& fam, double lambda, double h_fd,
                                        const PhaseGridFunction& f, double tol = 1e-2,
                                        DiffScheme scheme = DiffScheme::spectral) {
    DerivativeStudy s;
    s.coarse = derivative_terms(fam, lambda, h_fd, f, scheme);
    s.fine = derivative_terms(fam, lambda, 0.5 * h_fd, f, scheme);
    auto ratio = [](double a, double b) { return b > 0.0 ? a / b : (a == 0.0 ? 1.0 : INFINITY); };
    s.halving_plus = ratio(s.coarse.residual_plus, s.fine.residual_plus);
    s.halving_minus = ratio(s.coarse.residual_minus, s.fine.residual_minus);
    const bool plus_ok = s.coarse.residual_plus < tol, minus_ok = s.coarse.residual_minus < tol;
    s.winner = plus_ok && !minus_ok ? "+[m, xi.grad]" : (!plus_ok && minus_ok ? "-[m, xi.grad]" : "none");
    const double best = std::min(s.coarse.residual_plus, s.coarse.residual_minus);
    const double best_halving = s.coarse.residual_plus <= s.coarse.residual_minus ? s.halving_plus : s.halving_minus;
    if (best > tol && best_halving > 2.0)
        throw FDStepError("finite-difference step " + std::to_string(h_fd) + " too large: residual " +
                          std::to_string(best) + " shrinks " + std::to_string(best_halving) + "x under halving");
    return s;
}

// ---- xi.grad factorization identities --------------------------------------------------

struct XiGradResiduals {
    double canonical = 0.0;        // [A^*(l), A(l)] + 2 l I on the interior
    double factorization = 0.0;    // 4 l xi.grad (quadrature) vs A(l)^2 - A^*(l)^2 + [A^*, A], levels <= N/2
    double four_term = 0.0;        // 4 l [m, xi.grad] vs the four-term expansion, interior
    double commutator_norm = 0.0;  // ||[m, xi.grad]|| on the interior
};

inline XiGradResiduals xi_grad_identities(const OperatorMatrix& m, double lambda) {
    const auto& ctx = m.context_ptr();
    if (ctx->N() < 8) throw MarginExhausted("interior margin below 2");
    const auto s = scaled_operators(ctx, lambda);
    const auto& A = s.annihilation[0];
    const auto& Ad = s.creation[0];
    XiGradResiduals r;
    const auto canon = commutator(Ad, A) + OperatorMatrix::identity(ctx) * cplx(2.0 * std::abs(lambda));
    r.canonical = canon.interior_max_abs(1);

    const auto fact = A * A - Ad * Ad + commutator(Ad, A);
    if (ctx->n() == 1) {
        const auto quad = xi_grad_quadrature(ctx) * cplx(4.0 * std::abs(lambda));
        const int half = ctx->N() / 2;
        double mx = 0.0;
        for (int a = 0; a <= half; ++a)
            for (int b = 0; b <= half; ++b) mx = std::max(mx, std::abs(quad.entries()(a, b) - fact.entries()(a, b)));
        r.factorization = mx;
    }

    const auto X4 = fact;  // 4 lambda xi.grad
    const auto lhs = commutator(m, X4);
    const double sl = std::sqrt(std::abs(lambda));
    const auto dm = scaled_delta(m, 1, lambda), dbm = scaled_delta_bar(m, 1, lambda);
    const auto rhs = (dm * A + A * dm + dbm * Ad + Ad * dbm) * cplx(sl);
    r.four_term = (lhs - rhs).interior_max_abs(3);
    r.commutator_norm = lhs.interior_max_abs(3);
    return r;
}

// ---- Riesz transform growth -------------------------------------------------------------

struct GrowthRow {
    int alpha = 0;
    double direct = 0.0;       // ||S||_HS from the assembled matrix
    double closed_form = 0.0;  // sqrt of the two-term closed form
    double rel_diff = 0.0;     // |direct^2 - closed^2| / closed^2
};

struct GrowthTable {
    int beta = 0;
    std::vector<GrowthRow> rows;
    double identity_residual_bar = 0.0;  // dbar H^{-1/2} - ((H-2)^{-1/2} - H^{-1/2}) A^*
    double identity_residual = 0.0;      // delta H^{-1/2} - (H^{-1/2} - (H+2)^{-1/2}) A
    double identity_residual_flipped = 0.0;  // same with the opposite sign on the right-hand side
    double slope = 0.0;                  // log-log slope of ||S|| vs alpha over alpha in [8, 64] (when present)
    double ratio_64_16 = 0.0;            // ||S(64)|| / ||S(16)|| when both present
    bool monotone = false;
};

/// For m = A H^{-1/2} and f = conj(Phi_{alpha beta}) (unit norm, W(f) = sqrt(2 pi) |h_beta><h_alpha|),
/// S = (dbar m) W(f) A^* + (delta m) W(f) A and the closed form
/// ||S||^2 = 2 pi [(2 alpha + 2) ||delta m h_beta||^2 + 2 alpha ||dbar m h_beta||^2].
inline GrowthTable riesz_growth_counterexample(const ContextPtr& ctx, const std::vector<int>& alphas, int beta) {
    if (ctx->n() != 1) throw DomainError("counterexample is computed for n = 1");
    const int N = ctx->N();
    for (int a : alphas)
        if (a < 1 || a + 2 >= N) throw TruncationError("alpha " + std::to_string(a) + " needs alpha + 2 < N");
    if (beta < 0 || beta >= N - 2) throw TruncationError("beta must be < N - 2");
    GrowthTable t;
    t.beta = beta;
    const auto m = riesz_matrix(ctx);
    const auto dm = delta(m, 1), dbm = delta_bar(m, 1);
    const auto A = annihilation(ctx, 1), Ad = creation(ctx, 1);

    const auto Hm = spectral_function(ctx, [](double e) { return 1.0 / std::sqrt(e); });
    const auto Hm2 = spectral_function(ctx, [](double e) { return 1.0 / std::sqrt(e); }, -2.0);
    const auto Hp2 = spectral_function(ctx, [](double e) { return 1.0 / std::sqrt(e); }, 2.0);
    t.identity_residual_bar = (delta_bar(Hm, 1) - (Hm2 - Hm) * Ad).interior_max_abs(2);
    // A f(H) = f(H + 2) A, so [H^{-1/2}, A] = (H^{-1/2} - (H+2)^{-1/2}) A
    t.identity_residual = (delta(Hm, 1) - (Hm - Hp2) * A).interior_max_abs(2);
    t.identity_residual_flipped = (delta(Hm, 1) - (Hp2 - Hm) * A).interior_max_abs(2);

    const double s = std::sqrt(2.0 * kPi);
    const Eigen::VectorXcd dm_hb = dm.entries().col(beta), dbm_hb = dbm.entries().col(beta);
    for (int a : alphas) {
        CMatrix W = CMatrix::Zero(N, N);
        W(beta, a) = s;
        const CMatrix S = dbm.entries() * W * Ad.entries() + dm.entries() * W * A.entries();
        GrowthRow r;
        r.alpha = a;
        r.direct = S.norm();
        const double closed2 = s * s * ((2.0 * a + 2.0) * dm_hb.squaredNorm() + 2.0 * a * dbm_hb.squaredNorm());
        r.closed_form = std::sqrt(closed2);
        r.rel_diff = std::abs(r.direct * r.direct - closed2) / closed2;
        t.rows.push_back(r);
    }
    t.monotone = true;
    for (std::size_t i = 1; i < t.rows.size(); ++i)
        if (!(t.rows[i].direct > t.rows[i - 1].direct) || !(t.rows[i].alpha > t.rows[i - 1].alpha)) t.monotone = false;
    // least-squares slope over alpha in [8, 64]
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (const auto& r : t.rows)
        if (r.alpha >= 8 && r.alpha <= 64) {
            const double x = std::log(r.alpha), y = std::log(r.direct);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            ++cnt;
        }
    if (cnt >= 2) t.slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
    double s16 = 0, s64 = 0;
    for (const auto& r : t.rows) {
        if (r.alpha == 16) s16 = r.direct;
        if (r.alpha == 64) s64 = r.direct;
    }
    if (s16 > 0 && s64 > 0) t.ratio_64_16 = s64 / s16;
    return t;
}

/// ||[B, T_R] f||_2 / ||f||_2 for f = conj(Phi_{alpha beta}) on a grid, per alpha,
/// together with the singleton R-bound estimate over each prefix of the panel.
struct CommutatorGrowth {
    std::vector<int> alphas;
    std::vector<double> per_alpha;     // single-function ratios
    std::vector<double> prefix_bound;  // R-bound estimate over tuples with alpha <= alphas[k]
    bool increasing = false;
};

inline CommutatorGrowth riesz_commutator_growth(const ContextPtr& ctx, const GridSpec& grid,
                                                const std::vector<int>& alphas, int beta, double p = 2.0) {
    const auto R = riesz_matrix(ctx);
    GridOperator BT = [&](const PhaseGridFunction& f) {
        return euler_operator(apply_multiplier(ctx, R, f), DiffScheme::spectral) -
               apply_multiplier(ctx, R, euler_operator(f, DiffScheme::spectral));
    };
    CommutatorGrowth g;
    g.alphas = alphas;
    std::vector<std::vector<PhaseGridFunction>> tuples;
    for (int a : alphas) {
        auto f = special_hermite_fn(ctx, a, beta, grid).conj();
        tuples.push_back({f});
        const auto rep = rademacher_estimate({BT}, tuples, p);
        g.per_alpha.push_back(rep.tuple_ratios.back());
        g.prefix_bound.push_back(rep.constant);
    }
    g.increasing = true;
    for (std::size_t i = 1; i < g.per_alpha.size(); ++i)
        if (!(g.per_alpha[i] > g.per_alpha[i - 1])) g.increasing = false;
    return g;
}

}  // namespace weylab
