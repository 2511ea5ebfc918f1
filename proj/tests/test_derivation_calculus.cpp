#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "weylab/derivation_calculus.hpp"

using namespace weylab;

namespace {

const ContextPtr& ctx() {
    static const auto c = HermiteContext::build(1, 64, 14.0, 224);
    return c;
}
const GridSpec grid{1, 12.0, 64};

OperatorMatrix random_banded(std::uint64_t seed, int bw = 3) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    CMatrix M = CMatrix::Zero(64, 64);
    for (int a = 0; a < 64; ++a)
        for (int b = std::max(0, a - bw); b <= std::min(63, a + bw); ++b) M(a, b) = cplx(nd(rng), nd(rng));
    return OperatorMatrix(ctx(), M);
}

OperatorMatrix heat() { return spectral_function(ctx(), [](double t) { return std::exp(-t); }); }

}  // namespace

TEST(Derivations, IdentityIsAnnihilated) {
    const auto I = OperatorMatrix::identity(ctx());
    EXPECT_EQ(delta(I, 1).entries().norm(), 0.0);
    EXPECT_EQ(delta_bar(I, 1).entries().norm(), 0.0);
}

TEST(Derivations, DeltaOfCreation) {
    const auto d = delta(creation(ctx(), 1), 1);
    const auto target = OperatorMatrix::identity(ctx()) * cplx(-2.0);
    EXPECT_LT((d - target).interior_max_abs(1), 1e-12);
}

TEST(Derivations, Leibniz) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto m1 = random_banded(seed), m2 = random_banded(seed + 10);
        const auto lhs = multi_derivation(m1 * m2, 1, 0);
        const auto rhs = delta(m1, 1) * m2 + m1 * delta(m2, 1);
        EXPECT_LT((lhs - rhs).interior_max_abs(lhs.margin() + 4), 1e-12);
        const auto lb = multi_derivation(m1 * m2, 0, 1);
        const auto rb = delta_bar(m1, 1) * m2 + m1 * delta_bar(m2, 1);
        EXPECT_LT((lb - rb).interior_max_abs(lb.margin() + 4), 1e-12);
    }
}

TEST(Derivations, MarginGrowsWithOrder) {
    const auto m = heat();
    EXPECT_EQ(m.margin(), 0);
    EXPECT_EQ(delta(m, 1).margin(), 1);
    EXPECT_EQ(multi_derivation(m, 2, 1).margin(), 3);
}

TEST(ScaledDerivation, LambdaOneIsPlain) {
    const auto m = random_banded(7);
    EXPECT_LT((scaled_delta(m, 1, 1.0) - delta(m, 1)).entries().norm(), 1e-14);
    EXPECT_LT((scaled_delta_bar(m, 1, 1.0) - delta_bar(m, 1)).entries().norm(), 1e-14);
}

TEST(ScaledDerivation, ScaledHermite) {
    for (double l : {0.5, 3.0, -2.0}) {
        const auto s = scaled_operators(ctx(), l);
        const auto direct = commutator(s.hermite, s.annihilation[0]) * cplx(1.0 / std::sqrt(std::abs(l)));
        EXPECT_LT((scaled_delta(s.hermite, 1, l) - direct).interior_max_abs(1), 1e-12 * std::abs(l) * 64);
        // [H, A] = -2A, so the result is -2 sqrt|l| A in the unscaled basis
        const auto closed = annihilation(ctx(), 1) * cplx(-2.0 * std::abs(l));
        EXPECT_LT((scaled_delta(s.hermite, 1, l) - closed).interior_max_abs(1), 1e-10);
    }
    EXPECT_EQ(scaled_delta(OperatorMatrix::identity(ctx()), 1, 2.5).entries().norm(), 0.0);
}

TEST(Mauceri, IdentityOrderZero) {
    const auto r = mauceri_constant(OperatorMatrix::identity(ctx()), 0);
    EXPECT_DOUBLE_EQ(r.constant, 0.5);
    ASSERT_EQ(r.table.size(), 1u);
    EXPECT_EQ(r.table[0].argmax_block, 1);
}

TEST(Mauceri, IdentityHigherRowsVanish) {
    for (int l : {1, 2, 4}) {
        const auto r = mauceri_constant(OperatorMatrix::identity(ctx()), l);
        for (const auto& e : r.table)
            if (detail::order_of(e.alpha) + detail::order_of(e.beta) >= 1) EXPECT_EQ(e.sup, 0.0);
        EXPECT_DOUBLE_EQ(r.constant, 0.5);
    }
}

TEST(Mauceri, HeatOrderTwoRegression) {
    const auto r = mauceri_constant(heat(), 2);
    for (const auto& e : r.table) EXPECT_TRUE(std::isfinite(e.sup));
    EXPECT_NEAR(r.constant, 5.107549307432806, 1e-9);
}

TEST(Mauceri, RightSideOfDiagonalMatchesLeft) {
    const auto l = mauceri_constant(heat(), 2, Side::left), r = mauceri_constant(heat(), 2, Side::right);
    EXPECT_NEAR(l.constant, r.constant, 1e-12 * l.constant);
}

namespace {

void expect_same_table(const MauceriReport& a, const MauceriReport& b) {
    ASSERT_EQ(a.table.size(), b.table.size());
    for (std::size_t i = 0; i < a.table.size(); ++i)
        EXPECT_NEAR(a.table[i].sup, b.table[i].sup, 1e-10 * std::max(1.0, a.table[i].sup));
    EXPECT_NEAR(a.constant, b.constant, 1e-10 * std::max(1.0, a.constant));
}

}  // namespace

// Phase conjugations that commute with H. A linear phase rotates A by a scalar, so
// any m keeps its table; for diagonal m arbitrary per-level phases do.
TEST(Mauceri, LinearPhaseConjugation) {
    const auto U = diagonal_operator(ctx(), [](int i) { return std::polar(1.0, 0.7 * ctx()->level(i)); });
    const auto m = random_banded(4);
    expect_same_table(mauceri_constant(m, 2), mauceri_constant(U * m * U.adjoint(), 2));
}

TEST(Mauceri, DiagonalUnderArbitraryPhases) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> ud(0.0, 2.0 * kPi);
    std::vector<double> th(64);
    for (auto& t : th) t = ud(rng);
    const auto U = diagonal_operator(ctx(), [&](int i) { return std::polar(1.0, th[ctx()->level(i)]); });
    expect_same_table(mauceri_constant(heat(), 2), mauceri_constant(U * heat() * U.adjoint(), 2));
}

TEST(HeatBands, GroundEntryVanishes) { EXPECT_EQ(heat_band(ctx(), 1).entries()(0, 0), cplx(0.0)); }

TEST(HeatBands, ClosedFormsAgree) {
    for (int j = 1; j <= 8; ++j)
        EXPECT_LT((heat_band(ctx(), j) - heat_band_semigroup_form(ctx(), j)).entries().cwiseAbs().maxCoeff(), 1e-14);
}

TEST(HeatBands, Telescoping) { EXPECT_LT(telescoping_residual(OperatorMatrix::identity(ctx()), 8), 1e-12); }

TEST(HeatBands, PartialSumsApproachMultiplier) {
    const auto m = heat();
    double prev = INFINITY;
    for (int J = 1; J <= 10; ++J) {
        EXPECT_LT(telescoping_residual(m, J), 1e-12);
        const auto bands = band_decompose(m, J);
        CMatrix acc = bands[0].entries();
        for (int j = 1; j <= J; ++j) acc -= bands[j].entries();
        const double gap = (m.entries() - acc).norm();
        EXPECT_LT(gap, prev) << "J = " << J;
        prev = gap;
    }
}

TEST(BandKernels, GroundProjectionHasNoFirstBand) {
    const auto k = band_kernels(projection(ctx(), 0), 2, grid);
    EXPECT_EQ(k[1].norm(), 0.0);
    const auto ref = PhaseGridFunction::sample(grid, [](double x, double y) { return cplx(std::exp(-(x * x + y * y) / 4)); });
    const cplx c = k[0](32, 32) / ref(32, 32);
    EXPECT_LT((k[0] - ref * c).norm(INFINITY), 1e-10);
}

TEST(BandKernels, DiagonalMultiplierIsEven) {
    const auto k = band_kernels(OperatorMatrix::identity(ctx()), 4, grid)[4];
    double worst = 0.0;
    for (int i = 1; i < grid.m; ++i)
        for (int j = 1; j < grid.m; ++j) worst = std::max(worst, std::abs(k(i, j).real() - k(grid.m - i, grid.m - j).real()));
    EXPECT_LT(worst, 1e-8);
}

TEST(BandKernels, MassBalance) {
    const int J = 5;
    const auto m = heat();
    const auto k = band_kernels(m, J, grid);
    PhaseGridFunction acc = k[0];
    for (int j = 1; j <= J; ++j) acc -= k[j];
    const auto tail = inverse_weyl(ctx(), m * normalized_heat(ctx(), band_time(J + 1)), grid);
    EXPECT_LT((acc - tail).norm(INFINITY), 1e-8);
}

TEST(Decay, ZeroKernel) {
    auto pan = default_u_panel();
    pan.push_back({0, 0});
    const auto r = decay_report(PhaseGridFunction(grid), 2, pan);
    EXPECT_EQ(r.decay_ratio, 0.0);
    EXPECT_EQ(r.smoothness_max_ratio, 0.0);
    for (double v : r.sup) EXPECT_EQ(v, 0.0);
}

TEST(Decay, ZeroShiftRowVanishes) {
    const auto k = band_kernels(heat(), 3, grid)[3];
    const auto r = decay_report(k, 3, {{0, 0}, {1, 0}});
    EXPECT_EQ(r.smoothness[0], 0.0);
    EXPECT_GT(r.smoothness[1], 0.0);
}

TEST(Decay, HeatEnvelopesDoNotBlowUp) {
    const auto k = band_kernels(heat(), 6, grid);
    std::vector<double> dec, smo;
    for (int j = 1; j <= 6; ++j) {
        const auto r = decay_report(k[j], j, default_u_panel());
        dec.push_back(r.decay_ratio);
        smo.push_back(r.smoothness_max_ratio);
    }
    for (auto* v : {&dec, &smo}) {
        auto s = *v;
        std::sort(s.begin(), s.end());
        const double med = 0.5 * (s[2] + s[3]);
        EXPECT_LE(s.back() / med, 3.0);
        EXPECT_GT(s.front(), 0.0);
    }
}

TEST(Shape, FiniteAndPositive) {
    const auto t = band_derivative_decay(heat_band(ctx(), 3), 3, 0, 0);
    ASSERT_FALSE(t.rows.empty());
    for (const auto& r : t.rows) {
        EXPECT_TRUE(std::isfinite(r.normalized));
        EXPECT_GT(r.normalized, 0.0);
    }
}

TEST(Shape, RapidDecreaseFirstBand) {
    for (auto [g, r] : std::vector<std::pair<int, int>>{{0, 0}, {1, 0}, {0, 1}}) {
        const auto t = band_derivative_decay(heat_band(ctx(), 1), 1, g, r);
        EXPECT_GE(t.fall, 1e3) << "gamma " << g << " rho " << r;
    }
}

TEST(Shape, ZeroOperator) {
    const auto t = band_derivative_decay(OperatorMatrix::zero(ctx()), 2, 1, 0);
    for (const auto& r : t.rows) EXPECT_EQ(r.normalized, 0.0);
}
