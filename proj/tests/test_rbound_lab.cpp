#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "weylab/rbound_lab.hpp"

using namespace weylab;

namespace {

const ContextPtr& ctx() {
    static const auto c = HermiteContext::build(1, 64, 14.0, 224);
    return c;
}
const GridSpec grid{1, 12.0, 64};

std::vector<PhaseGridFunction> panel(int count, std::uint64_t seed, int band = 4) {
    std::mt19937_64 rng(seed);
    std::vector<PhaseGridFunction> out;
    for (int i = 0; i < count; ++i) out.push_back(random_band_limited(ctx(), grid, band, rng));
    return out;
}

GridOperator scale(double c) {
    return [c](const PhaseGridFunction& f) { return f * cplx(c); };
}

GridOperator multiplier(const OperatorMatrix& m) {
    return [m](const PhaseGridFunction& f) { return apply_multiplier(m.context_ptr(), m, f); };
}

}  // namespace

TEST(Rademacher, SingleScaledIdentity) {
    std::vector<std::vector<PhaseGridFunction>> t;
    for (const auto& f : panel(3, 1)) t.push_back({f});
    for (double c : {-2.5, 0.5, 3.0}) EXPECT_NEAR(rademacher_estimate({scale(c)}, t, 3.0).constant, std::abs(c), 1e-13);
}

TEST(Rademacher, DegenerateTupleIsolatesMember) {
    const auto f = panel(1, 2)[0];
    const auto r = rademacher_estimate({scale(1.0), scale(2.0)}, {{f * cplx(0.0), f}}, 2.0);
    EXPECT_NEAR(r.constant, 2.0, 1e-13);
}

TEST(Rademacher, OrthogonalProjectionsContract) {
    const auto fs = panel(6, 3);
    std::vector<std::vector<PhaseGridFunction>> t;
    for (std::size_t i = 0; i + 1 < fs.size(); i += 2) t.push_back({fs[i], fs[i + 1]});
    const auto r = rademacher_estimate({multiplier(projection(ctx(), 0)), multiplier(projection(ctx(), 1))}, t, 2.0);
    EXPECT_EQ(r.patterns, 4u);
    EXPECT_LE(r.constant, 1.0 + 1e-3);
    EXPECT_LE(r.square_function, 1.0 + 1e-3);
}

TEST(Rademacher, MonotoneUnderAddingMembers) {
    const auto fs = panel(4, 12);
    const auto T1 = multiplier(spectral_function(ctx(), [](double t) { return std::exp(-0.3 * t); }));
    const auto T2 = multiplier(projection(ctx(), 1));
    const auto T3 = scale(1.5);
    std::vector<std::vector<PhaseGridFunction>> one, two, three;
    const PhaseGridFunction zero(grid);
    for (const auto& f : fs) {
        one.push_back({f});
        two.push_back({f, zero});
        three.push_back({f, zero, zero});
    }
    two.push_back({fs[0], fs[1]});
    three.push_back({fs[0], fs[1], zero});
    three.push_back({fs[2], fs[3], fs[0]});
    for (double p : {2.0, 3.0}) {
        const double c1 = rademacher_estimate({T1}, one, p).constant;
        const double c2 = rademacher_estimate({T1, T2}, two, p).constant;
        const double c3 = rademacher_estimate({T1, T2, T3}, three, p).constant;
        EXPECT_GE(c2, c1 * (1.0 - 1e-12)) << "p = " << p;
        EXPECT_GE(c3, c2 * (1.0 - 1e-12)) << "p = " << p;
    }
}

TEST(Rademacher, SampledModeIsSeeded) {
    const auto fs = panel(2, 4);
    std::vector<GridOperator> members;
    for (int i = 0; i < 14; ++i) members.push_back(scale(1.0 + 0.1 * i));
    std::vector<PhaseGridFunction> tuple;
    for (int i = 0; i < 14; ++i) tuple.push_back(fs[i % 2]);
    EXPECT_THROW(rademacher_estimate(members, {tuple}, 2.0), ModeError);
    EXPECT_THROW(rademacher_estimate(members, {tuple}, 2.0, SignMode::sampled, 1, 100), ModeError);
    const auto a = rademacher_estimate(members, {tuple}, 2.0, SignMode::sampled, 77);
    const auto b = rademacher_estimate(members, {tuple}, 2.0, SignMode::sampled, 77);
    EXPECT_EQ(a.constant, b.constant);
    EXPECT_GE(a.constant, 1.0);
    EXPECT_LE(a.constant, 2.3 + 1e-12);
}

TEST(Rademacher, ZeroTupleRejected) {
    EXPECT_THROW(rademacher_estimate({scale(1.0)}, {{PhaseGridFunction(grid)}}, 2.0), ZeroNorm);
}

TEST(Families, RieszEntries) {
    const auto R = riesz_matrix(ctx());
    for (int k = 1; k < 64; ++k) EXPECT_NEAR(R.entries()(k - 1, k).real(), std::sqrt(2.0 * k) / std::sqrt(2.0 * k + 1.0), 1e-14);
    CMatrix rest = R.entries();
    for (int k = 1; k < 64; ++k) rest(k - 1, k) = 0.0;
    EXPECT_EQ(rest.norm(), 0.0);
    EXPECT_LE(R.op_norm(), 1.0);
}

TEST(Families, UnitSpectralFunctionIsIdentity) {
    const auto fam = spectral_family(ctx(), [](double) { return 1.0; }, {-2.0, 1.0, 3.0}, "one", [](double) { return 0.0; });
    for (double l : {-2.0, 1.0, 3.0}) {
        EXPECT_TRUE(is_identity(fam.at(l)));
        EXPECT_EQ(fam.scaled_derivative(l).entries().norm(), 0.0);
    }
}

TEST(Families, HeatDerivativeMatchesDifference) {
    const auto fam = heat_family(ctx(), {1.0, 2.0});
    MultiplierFamily fd = fam;
    fd.derivative = nullptr;
    for (double l : {1.0, -2.0}) {
        const auto a = fam.scaled_derivative(l), b = fd.scaled_derivative(l, 1e-5);
        EXPECT_LT((a - b).entries().cwiseAbs().maxCoeff(), 1e-8);
    }
}

TEST(Derivative, ConstantFamilyHasNoTerms) {
    const auto fam = spectral_family(ctx(), [](double) { return 1.0; }, {1.0}, "one", [](double) { return 0.0; });
    const auto f = panel(1, 5)[0];
    const auto d = derivative_terms(fam, 1.0, 0.05, f);
    EXPECT_EQ(d.lhs.norm(), 0.0);
    EXPECT_LT(d.commutator_B.norm(), 1e-12 * f.norm() * 100);
    EXPECT_EQ(d.xi_grad.norm(), 0.0);
    EXPECT_EQ(d.lambda_deriv.norm(), 0.0);
}

TEST(Derivative, HeatFamilyOneConventionCloses) {
    const auto fam = heat_family(ctx(), {1.0});
    const auto f = panel(1, 7)[0];
    const auto s = derivative_study(fam, 1.0, 0.05, f);
    EXPECT_EQ(s.winner, "+[m, xi.grad]");
    EXPECT_LT(s.coarse.residual_plus, 1e-2);
    EXPECT_GT(s.coarse.residual_minus, 1e-1);
    EXPECT_NEAR(s.halving_plus, 4.0, 0.5);
    const auto small = derivative_terms(fam, 1.0, 1e-3, f);
    EXPECT_LT(small.residual_plus, 1e-2);
}

TEST(Derivative, OversizedStepIsReported) {
    const auto fam = heat_family(ctx(), {1.0});
    const auto f = panel(1, 7)[0];
    EXPECT_THROW(derivative_study(fam, 1.0, 0.4, f), FDStepError);
}

TEST(XiGrad, CanonicalAndFourTerm) {
    const auto heat = heat_family(ctx(), {1.0, 2.5});
    for (double l : {1.0, 2.5, -0.5}) {
        const auto r = xi_grad_identities(heat.at(l), l);
        EXPECT_LT(r.canonical, 1e-12 * std::max(1.0, std::abs(l)) * 64);
        EXPECT_LT(r.four_term, 1e-10 * std::max(1.0, r.commutator_norm));
        EXPECT_LT(r.factorization, 1e-6 * std::abs(l));
    }
    const auto id = xi_grad_identities(OperatorMatrix::identity(ctx()), 1.0);
    EXPECT_EQ(id.commutator_norm, 0.0);
}

TEST(Counterexample, ClosedFormAndGrowth) {
    const auto big = HermiteContext::build(1, 128, 20.0, 320);
    const auto t = riesz_growth_counterexample(big, {1, 2, 4, 8, 16, 32, 64}, 0);
    for (const auto& r : t.rows) EXPECT_LT(r.rel_diff, 1e-8) << "alpha " << r.alpha;
    EXPECT_LT(t.identity_residual_bar, 1e-12);
    EXPECT_LT(t.identity_residual, 1e-12);
    // the right-hand side with the opposite sign does not hold
    EXPECT_GT(t.identity_residual_flipped, 0.5);
    EXPECT_NEAR(t.slope, 0.5, 0.05);
    EXPECT_NEAR(t.ratio_64_16, 2.0, 0.2);
    EXPECT_TRUE(t.monotone);
}

TEST(Counterexample, NeedsRoomAboveAlpha) {
    EXPECT_THROW(riesz_growth_counterexample(ctx(), {80}, 0), Error);
}

TEST(CommutatorGrowth, IncreasesWithAlpha) {
    const auto g = riesz_commutator_growth(ctx(), grid, {1, 2, 4, 8}, 0);
    EXPECT_TRUE(g.increasing);
    for (std::size_t i = 1; i < g.per_alpha.size(); ++i) EXPECT_GT(g.per_alpha[i], g.per_alpha[i - 1]);
    for (std::size_t i = 1; i < g.prefix_bound.size(); ++i) EXPECT_GE(g.prefix_bound[i], g.prefix_bound[i - 1] - 1e-12);
}
