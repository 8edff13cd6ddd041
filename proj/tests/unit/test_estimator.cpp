#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "bma/estimator.hpp"
#include "bma/simulator.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace bma;
using namespace bma::estimator;
using units::ml;
using units::mm;
using units::pi;

namespace {

const double sweep[] = {0.6, 0.8, 1.0, 1.25, 1.5, 1.75, 2.0};

} // namespace

TEST(PredictPressure, MatchesEnergyOverVolume) {
    const auto cfg = fixture::config();
    for (double v_ml : sweep) {
        const double v = ml(v_ml);
        const auto m = evaluate_model(v, 0.0, cfg);
        EXPECT_EQ(m.deformed.k, 0.0);
        EXPECT_EQ(m.deformed.c_c, 0.0);
        EXPECT_NEAR(predict_pressure(v, cfg), m.v_m * m.stretch.W / v, 1e-9);
        EXPECT_GT(predict_pressure(v, cfg), 0.0);
    }
}

TEST(PredictPressure, RejectsBelowModelRange) {
    const auto cfg = fixture::config();
    EXPECT_THROW(predict_pressure(ml(0.05), cfg), OutOfRange);
    EXPECT_THROW(predict_pressure(NAN, cfg), OutOfRange);
    EXPECT_THROW(predict_pressure(ml(2.5), cfg), OutOfRange) << "beyond the calibrated range";
}

TEST(PredictPressure, ProportionalToCoefficients) {
    auto cfg = fixture::config();
    const double p = predict_pressure(ml(1.0), cfg);
    cfg.coeffs = cfg.coeffs.scaled(3.0);
    EXPECT_NEAR(predict_pressure(ml(1.0), cfg), 3.0 * p, 1e-9 * p);
}

TEST(EstimateForce, Examples) {
    EXPECT_DOUBLE_EQ(estimate_force(2.0, 3.0, 1.0, 4.0, 0.5), 4.0);
    EXPECT_DOUBLE_EQ(estimate_force(1.0, 1.0, 1.0, 1.0, 0.1), 0.0);
    EXPECT_LT(estimate_force(1.0, 1.0, 2.0, 1.0, 0.1), 0.0);
    EXPECT_THROW(estimate_force(1.0, 1.0, 1.0, 1.0, 0.0), DegenerateGeometry);
}

TEST(SliceIndentation, Examples) {
    const auto r = slice_indentation(mm(5.0), mm(8.0), 2000.0, 0.05);
    EXPECT_FALSE(r.saturated);
    EXPECT_NEAR(units::to_mm(r.h4), 1.39483783, 1e-8);
    EXPECT_EQ(slice_indentation(mm(5.0), mm(8.0), 2000.0, 0.0).h4, 0.0);
    const double full = pi * mm(5.0) * mm(5.0) * 2000.0;
    EXPECT_NEAR(slice_indentation(mm(5.0), mm(8.0), 2000.0, full).h4, mm(8.0), 1e-9);
    const auto over = slice_indentation(mm(5.0), mm(8.0), 2000.0, 1.01 * full);
    EXPECT_TRUE(over.saturated);
    EXPECT_EQ(over.h4, mm(8.0));
    EXPECT_THROW(slice_indentation(mm(5.0), mm(8.0), 0.0, 0.01), InvalidArgument);
}

// Property: the slice at depth h4 carries exactly F = p * pi * (half-width)^2.
TEST(SliceIndentation, ForceBalanceOnSliceArea) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> axis(mm(2.0), mm(12.0)), pressure(500.0, 20000.0), frac(0.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        const double a = axis(rng), c = axis(rng), p = pressure(rng);
        const double F = frac(rng) * pi * a * a * p;
        const auto s = slice_indentation(a, c, p, F);
        ASSERT_FALSE(s.saturated);
        const double w = oracle::slice_half_width(a, c, s.h4);
        EXPECT_NEAR(p * pi * w * w, F, 1e-9 * std::max(F, 1e-6));
    }
}

TEST(Step, NoContactFixedPoint) {
    for (std::size_t inner : {std::size_t{1}, std::size_t{50}}) {
        const auto cfg = fixture::config(inner);
        for (double v_ml : sweep) {
            const double v = ml(v_ml);
            const auto r = step({}, v, predict_pressure(v, cfg), cfg);
            EXPECT_LE(std::abs(r.estimate.F), 1e-9) << v_ml;
            EXPECT_LE(r.estimate.h2, 1e-9) << v_ml;
            EXPECT_GE(r.estimate.h2, 0.0);
            EXPECT_NEAR(r.estimate.p_hat, r.estimate.p, 1e-9 * r.estimate.p);
        }
    }
}

TEST(Step, BelowModelRangeIsNotModeled) {
    const auto cfg = fixture::config();
    const EstimatorState s{mm(0.3), 4};
    const auto r = step(s, ml(0.05), 1000.0, cfg);
    EXPECT_TRUE(r.estimate.flags.has(Flag::below_model_range));
    EXPECT_FALSE(r.estimate.modeled());
    EXPECT_TRUE(std::isnan(r.estimate.F));
    EXPECT_EQ(r.next.h2_prev, mm(0.3));
    EXPECT_EQ(r.next.step_index, 5u);
}

TEST(Step, RejectsNonFiniteInputs) {
    const auto cfg = fixture::config();
    EXPECT_THROW(step({}, ml(1.0), NAN, cfg), InvalidArgument);
    EXPECT_THROW(step({}, INFINITY, 1000.0, cfg), InvalidArgument);
}

TEST(Step, ResetsCollapsedIndentation) {
    const auto cfg = fixture::config();
    const double v = ml(1.0);
    const double h1 = cfg.fit(v);
    const auto r = step({h1, 0}, v, predict_pressure(v, cfg), cfg);
    EXPECT_TRUE(r.estimate.flags.has(Flag::indentation_reset));
    EXPECT_LE(r.estimate.h2, 1e-9);
}

TEST(Step, NonPositivePressureFlagsAndKeepsRunning) {
    const auto cfg = fixture::config();
    const auto r = step({}, ml(1.0), -50.0, cfg);
    EXPECT_TRUE(r.estimate.flags.has(Flag::nonpositive_pressure));
    EXPECT_EQ(r.estimate.h4, 0.0);
    EXPECT_GE(r.estimate.h2, 0.0);
}

// Property: with projection on, h2 stays inside [0, h1] whatever the input.
TEST(Step, ClampInvariantUnderAdversarialInput) {
    const auto cfg = fixture::config();
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> vol(ml(0.1), ml(2.0)), logp(0.0, 7.0), frac(-0.5, 1.5), sign(-1.0, 1.0);
    std::size_t flagged = 0;
    for (int i = 0; i < 2000; ++i) {
        const double v = vol(rng);
        const double h1 = cfg.fit(v);
        const double p = (sign(rng) < -0.8 ? -1.0 : 1.0) * std::pow(10.0, logp(rng));
        const EstimatorState s{frac(rng) * h1, 0};
        StepResult r;
        try {
            r = step(s, v, p, cfg);
        } catch (const Error&) {
            continue;
        }
        EXPECT_GE(r.estimate.h2, 0.0);
        EXPECT_LE(r.estimate.h2, r.estimate.h1);
        EXPECT_EQ(r.next.h2_prev, r.estimate.h2);
        if (r.estimate.flags.has(Flag::clamped_low) || r.estimate.flags.has(Flag::clamped_high))
            ++flagged;
    }
    EXPECT_GT(flagged, 0u);
}

TEST(Step, ClampOffLeavesRawUpdate) {
    auto cfg = fixture::config();
    cfg.clamp = ClampMode::off;
    const double v = ml(1.0);
    const auto r = step({}, v, 0.5 * predict_pressure(v, cfg), cfg);
    EXPECT_TRUE(r.estimate.flags.has(Flag::clamped_low));
    EXPECT_LT(r.estimate.h2, 0.0);
}

// Property: scaling the material and the pressure by s scales the force by s
// and leaves the indentation unchanged.
TEST(Step, MaterialPressureScaling) {
    auto cfg = fixture::config();
    const double v = ml(1.2);
    const auto eq = simulator::equilibrium(v, 0.08, cfg);
    const auto a = step({eq.h2, 0}, v, eq.p, cfg);
    for (double s : {0.25, 4.0}) {
        auto scaled = cfg;
        scaled.coeffs = cfg.coeffs.scaled(s);
        const auto b = step({eq.h2, 0}, v, s * eq.p, scaled);
        EXPECT_NEAR(b.estimate.F, s * a.estimate.F, 1e-9 * s);
        EXPECT_NEAR(b.estimate.h2, a.estimate.h2, 1e-12);
    }
}

TEST(Step, SingleUpdateSettlesOnlyAfterManySteps) {
    const auto cfg = fixture::config(1);
    const double v = ml(1.0);
    const auto eq = simulator::equilibrium(v, 0.05, cfg);
    EstimatorState s;
    std::vector<double> err;
    for (int i = 0; i < 200; ++i) {
        const auto r = step(s, v, eq.p, cfg);
        err.push_back(std::abs(r.estimate.h2 - eq.h2));
        s = r.next;
    }
    EXPECT_GT(err[4], 1e-6) << "five single updates do not reach the fixed point";
    EXPECT_LT(err.back(), 1e-10);
    for (std::size_t i = 1; i < err.size(); ++i)
        EXPECT_LE(err[i], err[i - 1] + 1e-15);
}

TEST(Step, InnerIterationsReachEquilibriumInOneSample) {
    const auto cfg = fixture::config(50);
    for (double v_ml : {0.8, 1.0, 1.5, 2.0})
        for (double F : {0.01, 0.1, 0.4}) {
            const auto eq = simulator::equilibrium(ml(v_ml), F, cfg);
            const auto r = step({}, ml(v_ml), eq.p, cfg);
            EXPECT_FALSE(r.estimate.flags.has(Flag::not_converged));
            EXPECT_NEAR(r.estimate.F, F, 1e-7) << v_ml;
            EXPECT_NEAR(r.estimate.h2, eq.h2, 1e-10) << v_ml;
        }
}

namespace {

std::vector<Sample> noisy_trace(std::size_t n) {
    const auto cfg = fixture::config();
    std::mt19937_64 rng(9);
    std::normal_distribution<double> noise(0.0, 20.0);
    std::vector<Sample> s;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = ml(0.05 + 1.9 * static_cast<double>(i % 97) / 96.0);
        const double p = v >= cfg.v_min_model ? predict_pressure(v, cfg) + 300.0 + noise(rng) : 500.0;
        s.push_back({0.01 * static_cast<double>(i), v, p});
    }
    return s;
}

} // namespace

TEST(Run, Deterministic) {
    const auto cfg = fixture::config(20);
    const auto samples = noisy_trace(400);
    const auto a = run(samples, cfg);
    const auto b = run(samples, cfg);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(std::isnan(a[i].F), std::isnan(b[i].F));
        if (!std::isnan(a[i].F)) {
            EXPECT_EQ(a[i].F, b[i].F);
            EXPECT_EQ(a[i].h2, b[i].h2);
        }
        EXPECT_EQ(a[i].flags.bits(), b[i].flags.bits());
    }
}

// Property: restarting from the carried state at sample k replays the suffix.
TEST(Run, SuffixReplay) {
    const auto cfg = fixture::config();
    const auto samples = noisy_trace(300);
    const auto full = run(samples, cfg);
    for (std::size_t k : {std::size_t{1}, std::size_t{57}, std::size_t{150}}) {
        EstimatorState s;
        for (std::size_t i = 0; i < k; ++i)
            if (full[i].modeled())
                s.h2_prev = full[i].h2;
        const auto tail = run(std::span(samples).subspan(k), cfg, s);
        for (std::size_t i = 0; i < tail.size(); ++i)
            if (tail[i].modeled()) {
                EXPECT_EQ(tail[i].h2, full[k + i].h2) << k + i;
            }
    }
}

TEST(Run, FailedStepKeepsTraceGoing) {
    const auto cfg = fixture::config();
    std::vector<Sample> s = {{0.0, ml(1.0), 9000.0}, {0.01, ml(1.0), NAN}, {0.02, ml(1.0), 9000.0}};
    const auto out = run(s, cfg);
    ASSERT_EQ(out.size(), 3u);
    EXPECT_TRUE(out[1].flags.has(Flag::step_failed));
    EXPECT_FALSE(out[1].modeled());
    EXPECT_EQ(out[1].h2, out[0].h2);
    EXPECT_TRUE(out[2].modeled());
}

TEST(PressureFilter, PassThroughAndLowPass) {
    PressureFilter none(0.0);
    EXPECT_EQ(none(0.0, 5.0), 5.0);
    EXPECT_EQ(none(0.1, 9.0), 9.0);
    PressureFilter lp(0.1);
    EXPECT_EQ(lp(0.0, 0.0), 0.0);
    EXPECT_DOUBLE_EQ(lp(0.1, 10.0), 5.0);
    double y = 0.0;
    for (int i = 2; i < 200; ++i)
        y = lp(0.1 * i, 10.0);
    EXPECT_NEAR(y, 10.0, 1e-9);
}

TEST(Flags, NamesJoinedInBitOrder) {
    Flags f;
    EXPECT_EQ(f.str(), "");
    f.set(Flag::clamped_high);
    f.set(Flag::below_model_range);
    EXPECT_EQ(f.str(), "below-model-range|clamped-high");
}

TEST(Rmse, Examples) {
    const std::vector<double> a = {1.0, 2.0, 3.0};
    EXPECT_EQ(rmse(a, a), 0.0);
    const std::vector<double> z = {0.0, 0.0}, t = {3.0, 4.0};
    EXPECT_DOUBLE_EQ(rmse(z, t), std::sqrt(12.5));
    EXPECT_THROW(rmse(a, t), LengthMismatch);
    EXPECT_THROW(rmse(std::vector<double>{}, std::vector<double>{}), LengthMismatch);
}
