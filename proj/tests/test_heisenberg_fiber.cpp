#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "weylab/heisenberg_fiber.hpp"

using namespace weylab;

namespace {

const TimeGrid tg{kPi, 64};

ContextPtr ctx224() {
    static const auto c = HermiteContext::build(1, 64, 14.0, 224);
    return c;
}
ContextPtr ctx448() {
    static const auto c = HermiteContext::build(1, 64, 14.0, 448);
    return c;
}

HeisenbergGridFunction random_heisenberg(const GridSpec& g, std::uint64_t seed, bool real) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    HeisenbergGridFunction f(g, tg);
    for (Eigen::Index i = 0; i < f.values().rows(); ++i)
        for (Eigen::Index k = 0; k < f.values().cols(); ++k) f.values()(i, k) = cplx(nd(rng), real ? 0.0 : nd(rng));
    return f;
}

// band-limited at scale 1 on the doubled box, then compressed by sqrt|lambda|
PhaseGridFunction natural(const GridSpec& g, double lambda, std::uint64_t seed, int band = 4) {
    const double s = std::sqrt(std::abs(lambda));
    GridSpec wide = g;
    wide.L *= s;
    std::mt19937_64 rng(seed);
    return relabel(random_band_limited(ctx448(), wide, band, rng), 1.0 / s);
}

double rel(const PhaseGridFunction& a, const PhaseGridFunction& b) { return (a - b).norm() / b.norm(); }

}  // namespace

TEST(Fibers, PureToneLandsInOneFiber) {
    const GridSpec g{1, 12.0, 16};
    const auto base = PhaseGridFunction::sample(g, [](double x, double y) { return cplx(std::exp(-0.1 * (x * x + y * y)), x); });
    const double l0 = 3.0 * tg.dlambda();
    const auto fs = fiber_transform(pure_tone(base, tg, l0));
    const int idx = fs.index_of(l0);
    ASSERT_GE(idx, 0);
    EXPECT_LT((fs.fibers[idx] - base * cplx(2.0 * tg.L)).norm(INFINITY), 1e-12 * base.norm(INFINITY) * 2.0 * tg.L);
    EXPECT_LT(fs.zero.norm(), 1e-12 * base.norm() * 2.0 * tg.L);
    for (std::size_t i = 0; i < fs.fibers.size(); ++i)
        if (static_cast<int>(i) != idx) EXPECT_LT(fs.fibers[i].norm(), 1e-12 * base.norm() * 2.0 * tg.L);
}

TEST(Fibers, RoundTripAndParseval) {
    const auto f = random_heisenberg(GridSpec{1, 4.0, 16}, 3, false);
    const auto fs = fiber_transform(f);
    EXPECT_LT((fiber_inverse(fs).values() - f.values()).norm() / f.values().norm(), 1e-10);
    EXPECT_NEAR(fiber_energy(fs) / std::pow(f.norm(), 2), 1.0, 1e-10);
}

TEST(Fibers, RealDataHasHermitianFibers) {
    const auto fs = fiber_transform(random_heisenberg(GridSpec{1, 4.0, 16}, 4, true));
    for (std::size_t i = 0; i < fs.lambdas.size(); ++i) {
        const int j = fs.index_of(-fs.lambdas[i]);
        if (j < 0) continue;  // the unpaired Nyquist frequency
        PhaseGridFunction c(fs.fibers[i].spec(), fs.fibers[i].values().conjugate());
        EXPECT_LT((fs.fibers[j] - c).norm(INFINITY), 1e-12);
    }
}

TEST(Fibers, TranslationCovariance) {
    const GridSpec g{1, 6.0, 64};
    const auto fam = heat_family(ctx448(), {1.0, 4.0});
    auto f = pure_tone(natural(g, 1.0, 5), tg, 1.0);
    f.values() += pure_tone(natural(g, 4.0, 6), tg, 4.0).values();
    const auto a = heisenberg_multiplier(fam, t_translate(f, 7));
    const auto b = t_translate(heisenberg_multiplier(fam, f), 7);
    EXPECT_LT((a.values() - b.values()).norm() / b.values().norm(), 1e-12);
}

TEST(FiberOperator, IdentityFamilyLeavesFibersAlone) {
    const GridSpec g{1, 6.0, 64};
    MultiplierFamily id{"identity", ctx448(), {1.0},
                        [](double) { return OperatorMatrix::identity(ctx448()); }, nullptr};
    const auto fs = fiber_transform(pure_tone(natural(g, 1.0, 1), tg, 1.0));
    const auto out = apply_fiber_multiplier(id, fs);
    // identity up to the transform round trip
    for (std::size_t i = 0; i < fs.fibers.size(); ++i)
        EXPECT_LE((out.fibers[i] - fs.fibers[i]).norm(), 1e-10 * std::max(1.0, fs.fibers[i].norm()));
}

TEST(FiberOperator, LambdaOneIsPlainMultiplier) {
    const GridSpec g{1, 12.0, 64};
    const auto m = spectral_function(ctx224(), [](double t) { return std::exp(-0.5 * t); });
    const auto f = natural(g, 1.0, 2);
    EXPECT_EQ((apply_fiber_operator(ctx224(), m, f, 1.0) - apply_multiplier(ctx224(), m, f)).norm(), 0.0);
}

TEST(FiberOperator, ScalingTwoPathAtFour) {
    const GridSpec g{1, 6.0, 64};
    for (double l : {4.0, -4.0}) {
        const auto f = natural(g, l, 5);
        const auto fam = spectral_family(ctx448(), [](double e) { return std::exp(-0.05 * e); }, {l}, "exp");
        EXPECT_LT(scaling_two_path(ctx448(), fam.at(l), f, l).rel_diff, 1e-3) << "lambda " << l;
    }
}

TEST(FiberOperator, OffWhitelistNeedsInterpolation) {
    const GridSpec g{1, 12.0, 64};
    const auto m = spectral_function(ctx224(), [](double t) { return std::exp(-0.2 * t); });
    const auto f = natural(g, 1.0, 3);
    EXPECT_THROW(apply_fiber_operator(ctx224(), m.in_basis(2.0), f, 2.0), ResampleError);
    FiberOptions opt;
    opt.interpolate = true;
    EXPECT_NO_THROW(apply_fiber_operator(ctx224(), m.in_basis(2.0), f, 2.0, Side::left, opt));
}

TEST(VectorFields, ZeroInput) {
    const GridSpec g{1, 8.0, 64};
    const auto t = vector_field_checks(ctx224(), 1.0, PhaseGridFunction(g));
    for (const auto& r : t.rows) EXPECT_EQ(r.residual, 0.0) << r.name;
}

TEST(VectorFields, GroundFunctionAndRefinement) {
    const GridSpec g{1, 8.0, 64}, gf{1, 8.0, 128};
    const auto a = vector_field_checks(ctx224(), 1.0, special_hermite_fn(ctx224(), 0, 0, g));
    const auto b = vector_field_checks(ctx224(), 1.0, special_hermite_fn(ctx224(), 0, 0, gf));
    ASSERT_EQ(a.rows.size(), b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        EXPECT_LT(a.rows[i].residual, 1e-2) << a.rows[i].name;
        if (a.rows[i].residual > 1e-8) EXPECT_NEAR(a.rows[i].residual / b.rows[i].residual, 4.0, 0.6) << a.rows[i].name;
    }
}

TEST(Convolution, DeltaKernelIsIdentity) {
    const GridSpec g{1, 12.0, 64};
    KernelSpec d;
    d.kind = KernelSpec::Kind::delta;
    const auto f = natural(g, 1.0, 4);
    const auto c = convolution_identity_check(ctx224(), d, 1.0, f);
    EXPECT_LT(rel(c.left, f), 1e-12);
    EXPECT_LT(rel(c.right, f), 1e-12);
}

TEST(Convolution, GaussianKernel) {
    const GridSpec g{1, 12.0, 64};
    const auto f = natural(g, 1.0, 4);
    EXPECT_LT(convolution_identity_check(ctx224(), KernelSpec{}, 1.0, f).residual, 1e-3);
}

TEST(Convolution, LinearInKernel) {
    const GridSpec g{1, 12.0, 64};
    const auto f = natural(g, 1.0, 4);
    KernelSpec k1, k2, k12;
    k2.width = 1.1;
    k2.center = 0.4;
    k12.kind = KernelSpec::Kind::custom;
    k12.fn = [&](double e) { return k1(e) + k2(e); };
    const auto a = convolution_identity_check(ctx224(), k1, 1.0, f), b = convolution_identity_check(ctx224(), k2, 1.0, f);
    const auto c = convolution_identity_check(ctx224(), k12, 1.0, f);
    EXPECT_LT(rel(a.left + b.left, c.left), 1e-12);
    EXPECT_LT(rel(a.right + b.right, c.right), 1e-12);
}

TEST(Experiments, IdentityFamilyRatios) {
    const GridSpec g{1, 6.0, 64};
    const auto panel = tone_panel(ctx448(), g, tg, {1.0, -1.0, 4.0, -4.0}, 2, 3, 11);
    MultiplierFamily id{"identity", ctx448(), {1.0},
                        [](double) { return OperatorMatrix::identity(ctx448()); }, nullptr};
    EXPECT_LE(polyradial_ratio_experiment(id, panel, 2.0).max_ratio, 1.0 + 1e-3);
}

TEST(Experiments, RieszSingleFiber) {
    const GridSpec g{1, 12.0, 64};
    const auto f = pure_tone(natural(g, 1.0, 8), tg, 1.0);
    const auto st = sublaplacian_ratio_experiment(riesz_family(ctx224(), {1.0}), {f}, 2.0);
    EXPECT_LE(st.max_ratio, 1.0 + 1e-3);
}

TEST(Experiments, HeatRatiosStable) {
    std::vector<double> mx;
    for (int m : {64, 96}) {
        const GridSpec g{1, 6.0, m};
        const auto panel = tone_panel(ctx448(), g, tg, {1.0, -1.0, 4.0, -4.0}, 2, 3, 11);
        const auto st = sublaplacian_ratio_experiment(heat_family(ctx448(), {-4.0, -1.0, 1.0, 4.0}), panel, 2.0);
        EXPECT_TRUE(std::isfinite(st.max_ratio));
        mx.push_back(st.max_ratio);
    }
    EXPECT_NEAR(mx[1] / mx[0], 1.0, 0.3);
}

TEST(Polyradial, CommutesWithHeatFamily) {
    const GridSpec g{1, 9.0, 96};
    const auto fam = heat_family(ctx448(), {-1.0, 1.0});
    auto f = pure_tone(natural(g, 1.0, 9, 3), tg, 1.0);
    const auto a = polyradial_slices(heisenberg_multiplier(fam, f));
    const auto b = heisenberg_multiplier(fam, polyradial_slices(f));
    EXPECT_LT((a.values() - b.values()).norm() / a.values().norm(), 1e-3);
}
