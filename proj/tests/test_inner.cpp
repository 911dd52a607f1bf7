/*
 * Copyright 2026 The eeofdma Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include "support.hpp"

#include <cmath>
#include <eeofdma/inner.hpp>
#include <eeofdma/solver_gee.hpp>
#include <gtest/gtest.h>
#include <numbers>
#include <random>
#include <vector>

using namespace eeofdma;
using test_support::rel_diff;

namespace {

/// Golden-section maximizer used as an independent scalar oracle.
template <typename F>
double golden_max(F&& f, double lo, double hi)
{
	double const r = (std::sqrt(5.0)-1)/2;
	double a = lo, b = hi;
	for (int i = 0; i < 300 && b-a > 1e-15*std::max(1.0, b); ++i)
	{
		double const c = b-r*(b-a), d = a+r*(b-a);
		if (f(c) > f(d))
		{
			b = d;
		}
		else
		{
			a = c;
		}
	}
	return 0.5*(a+b);
}

BoxBudgetSet row_set(std::size_t n, double lower, double upper, double budget)
{
	return {Matrix<double>(1, n, lower), Matrix<double>(1, n, upper), {budget}};
}

} // namespace

// ---------------------------------------------------------------------------
// Dinkelbach
// ---------------------------------------------------------------------------

TEST(Dinkelbach, ScalarRatioOptimum)
{
	auto f = [](double p) { return std::log2(1+p); };
	auto g = [](double p) { return 1+p; };
	auto argmax = [&](double pi, double) {
		return golden_max([&](double p) { return f(p)-pi*g(p); }, 0.0, 10.0);
	};
	DinkelbachOptions o;
	o.epsilon = 1e-9;
	o.relative = false;
	auto res = dinkelbach(f, g, argmax, 1.0, o);
	EXPECT_NEAR(res.point, std::numbers::e-1, 1e-6);
	EXPECT_NEAR(f(res.point)/g(res.point), std::numbers::log2e/std::numbers::e, 1e-12);
	EXPECT_NEAR(f(res.point)/g(res.point), 0.53074, 1e-5);
	EXPECT_TRUE(res.state.flag);
	EXPECT_GE(res.state.gap(), 0.0);
	EXPECT_LT(res.state.gap(), o.epsilon);

	// independent grid over [0, 10]
	double best = 0, best_p = 0;
	for (int i = 0; i <= 1000000; ++i)
	{
		double const p = 10.0*i/1e6;
		if (f(p)/g(p) > best)
		{
			best = f(p)/g(p);
			best_p = p;
		}
	}
	EXPECT_NEAR(best_p, res.point, 2e-5);
}

TEST(Dinkelbach, PiHistoryIncreases)
{
	auto f = [](double p) { return std::log2(1+4*p); };
	auto g = [](double p) { return 0.3+2*p; };
	auto argmax = [&](double pi, double) {
		return golden_max([&](double p) { return f(p)-pi*g(p); }, 0.0, 5.0);
	};
	auto res = dinkelbach(f, g, argmax, 5.0);
	for (std::size_t i = 1; i < res.state.pi_history.size(); ++i)
	{
		EXPECT_GT(res.state.pi_history[i], res.state.pi_history[i-1]);
	}
	EXPECT_LE(std::abs(res.state.pi-f(res.point)/g(res.point)), res.state.epsilon/g(res.point));
}

TEST(Dinkelbach, ConstantDenominatorStopsAfterOneUpdate)
{
	int calls = 0;
	auto f = [](double p) { return -(p-2)*(p-2); };
	auto g = [](double) { return 1.0; };
	auto argmax = [&](double, double) {
		++calls;
		return 2.0;
	};
	auto res = dinkelbach(f, g, argmax, 0.0);
	EXPECT_EQ(res.point, 2.0);
	EXPECT_LE(calls, 2);
}

TEST(Dinkelbach, ZeroNumeratorExitsImmediately)
{
	auto f = [](double) { return 0.0; };
	auto g = [](double p) { return 1+p; };
	auto argmax = [](double, double x) { return x; };
	auto res = dinkelbach(f, g, argmax, 0.5);
	EXPECT_EQ(res.state.iteration, 1);
	EXPECT_EQ(res.state.pi, 0.0);
	EXPECT_TRUE(res.state.flag);
}

TEST(Dinkelbach, RoundCapRaisesWithState)
{
	// an argmax that ignores pi keeps the gap open
	auto f = [](double p) { return p; };
	auto g = [](double) { return 1.0; };
	double next = 1.0;
	auto argmax = [&](double, double) { return next *= 2; };
	DinkelbachOptions o;
	o.max_rounds = 5;
	try
	{
		dinkelbach(f, g, argmax, 0.0, o);
		FAIL() << "expected dinkelbach_error";
	}
	catch (dinkelbach_error const& e)
	{
		EXPECT_EQ(e.state.iteration, 5);
		EXPECT_FALSE(e.state.flag);
	}
}

// ---------------------------------------------------------------------------
// concave_max
// ---------------------------------------------------------------------------

TEST(ConcaveMax, UnconstrainedQuadraticInLogSpace)
{
	Matrix<double> q0(1, 3);
	q0(0, 0) = std::log(0.5);
	q0(0, 1) = std::log(2.0);
	q0(0, 2) = std::log(0.01);
	auto oracle = [&](Matrix<double> const& x, Matrix<double>& g) {
		double v = 0;
		for (std::size_t i = 0; i < 3; ++i)
		{
			double const d = x.flat()[i]-q0.flat()[i];
			v -= d*d;
			g.flat()[i] = -2*d;
		}
		return v;
	};
	ConcaveMaxOptions o;
	o.tol = 1e-9;
	o.scale = 1;
	auto r = concave_max(oracle, row_set(3, 1e-6, 10, infinity), Matrix<double>(1, 3, 0.0), o);
	EXPECT_TRUE(r.converged);
	for (std::size_t i = 0; i < 3; ++i)
	{
		EXPECT_NEAR(r.x.flat()[i], q0.flat()[i], 1e-6);
	}
}

TEST(ConcaveMax, SymmetricBudgetOptimum)
{
	double const budget = 3.0;
	std::size_t const n = 4;
	auto oracle = [&](Matrix<double> const& x, Matrix<double>& g) {
		double v = 0;
		for (std::size_t i = 0; i < n; ++i)
		{
			v += x.flat()[i];
			g.flat()[i] = 1;
		}
		return v;
	};
	Matrix<double> start(1, n);
	for (std::size_t i = 0; i < n; ++i)
	{
		start.flat()[i] = std::log(0.1*(i+1));
	}
	ConcaveMaxOptions o;
	o.tol = 1e-10;
	o.scale = 1;
	auto r = concave_max(oracle, row_set(n, 1e-9, budget, budget), start, o);
	for (std::size_t i = 0; i < n; ++i)
	{
		EXPECT_NEAR(std::exp(r.x.flat()[i]), budget/n, 1e-6);
	}
}

TEST(ConcaveMax, LinearSpaceBoxOptimum)
{
	// maximize -sum (p - t)^2 with targets partly outside the box
	std::vector<double> const target{-1.0, 0.4, 3.0};
	auto oracle = [&](Matrix<double> const& x, Matrix<double>& g) {
		double v = 0;
		for (std::size_t i = 0; i < 3; ++i)
		{
			double const d = x.flat()[i]-target[i];
			v -= d*d;
			g.flat()[i] = -2*d;
		}
		return v;
	};
	ConcaveMaxOptions o;
	o.space = Space::linear;
	o.tol = 1e-10;
	o.scale = 1;
	auto r = concave_max(oracle, row_set(3, 0.0, 1.0, infinity), Matrix<double>(1, 3, 0.5), o);
	EXPECT_NEAR(r.x(0, 0), 0.0, 1e-9);
	EXPECT_NEAR(r.x(0, 1), 0.4, 1e-8);
	EXPECT_NEAR(r.x(0, 2), 1.0, 1e-9);
}

TEST(ConcaveMax, DetectsConvexObjective)
{
	auto oracle = [](Matrix<double> const& x, Matrix<double>& g) {
		g(0, 0) = 2*x(0, 0);
		g(0, 1) = 2*x(0, 1);
		return x(0, 0)*x(0, 0)+x(0, 1)*x(0, 1);
	};
	ConcaveMaxOptions o;
	o.space = Space::linear;
	Matrix<double> start(1, 2);
	start(0, 0) = 0.3;
	start(0, 1) = -0.2;
	EXPECT_THROW(concave_max(oracle, row_set(2, -10, 10, infinity), start, o), line_search_error);
}

TEST(ConcaveMax, SingleBsParametricProblemMatchesWaterfilling)
{
	std::mt19937_64 rng(21);
	for (int trial = 0; trial < 20; ++trial)
	{
		test_support::RandomSpec spec;
		spec.m_bs = 1;
		spec.n_sub = 4;
		NetworkInstance inst = test_support::random_instance(rng, spec);
		Schedule const k = best_schedule(inst, PowerMatrix(1, 4, 1.0), ScheduleRule::rate);
		ScaCoefficients const c = expand_at(inst, PowerMatrix(1, 4, 0.1*(trial+1)), k);
		double const pi = 0.05*(trial+1);
		auto oracle = [&](Matrix<double> const& q, Matrix<double>& grad) {
			return detail::parametric_value(inst, k, c, pi, to_power(q), grad);
		};
		ConcaveMaxOptions o;
		o.tol = 1e-10;
		o.scale = 1;
		BoxBudgetSet const set = BoxBudgetSet::for_instance(inst);
		auto r = concave_max(oracle, set, to_log_power(inst, PowerMatrix(1, 4, 1e-3)), o);

		// p_n = (B alpha_n / ln2) / (pi gamma_n + lambda)
		std::vector<double> a(4), b(4, 0.0), d(4), lo(4);
		for (std::size_t n = 0; n < 4; ++n)
		{
			a[n] = inst.bandwidth_hz*c.alpha(0, n)/std::numbers::ln2;
			d[n] = pi*inst.gamma(0, n);
		}
		auto wf = waterfill_bisect(a, b, d, inst.constraint.bs_limits()[0]);
		for (std::size_t n = 0; n < 4; ++n)
		{
			double const floor = set.lower(0, n);
			double const expect = std::max(wf.powers[n], floor);
			EXPECT_LE(rel_diff(std::exp(r.x(0, n)), expect), 1e-6) << "trial " << trial << " slot " << n;
		}
	}
}

// ---------------------------------------------------------------------------
// Waterfilling
// ---------------------------------------------------------------------------

TEST(Waterfill, HandExample)
{
	std::vector<double> const a{1, 1}, b{1, 3}, d{0, 0};
	auto r = waterfill_bisect(a, b, d, 2.0);
	EXPECT_NEAR(r.lambda, 1.0/3.0, 1e-12);
	EXPECT_NEAR(r.powers[0], 2.0, 1e-12);
	EXPECT_NEAR(r.powers[1], 0.0, 1e-12);
	EXPECT_TRUE(r.binding);

	// grid over p1 with p2 = 2 - p1
	double best = -1, best_p = 0;
	for (int i = 0; i <= 1000000; ++i)
	{
		double const p1 = 2.0*i/1e6;
		double const v = std::log2(1+p1)+std::log2(1+(2-p1)/3);
		if (v > best)
		{
			best = v;
			best_p = p1;
		}
	}
	EXPECT_NEAR(best_p, 2.0, 1e-6);
}

TEST(Waterfill, NonBindingBudget)
{
	std::vector<double> const a{2, 1, 4}, b{0.5, 2, 0}, d{1, 1, 2};
	auto r = waterfill_bisect(a, b, d, 1e9);
	EXPECT_EQ(r.lambda, 0.0);
	EXPECT_FALSE(r.binding);
	EXPECT_DOUBLE_EQ(r.powers[0], 1.5);
	EXPECT_DOUBLE_EQ(r.powers[1], 0.0);
	EXPECT_DOUBLE_EQ(r.powers[2], 2.0);
}

TEST(Waterfill, AllSlotsOff)
{
	std::vector<double> const a{1, 1}, b{2, 5}, d{1, 0.5};
	auto r = waterfill_bisect(a, b, d, 1.0);
	EXPECT_EQ(r.lambda, 0.0);
	EXPECT_EQ(r.powers[0], 0.0);
	EXPECT_EQ(r.powers[1], 0.0);
}

TEST(Waterfill, RejectsInvalidInput)
{
	std::vector<double> const a{1}, b{1}, d{0};
	EXPECT_THROW(waterfill_bisect(a, b, d, 0.0), std::invalid_argument);
	std::vector<double> const neg{-1};
	EXPECT_THROW(waterfill_bisect(neg, b, d, 1.0), std::invalid_argument);
	std::vector<double> const two{1, 1};
	EXPECT_THROW(waterfill_bisect(two, b, d, 1.0), std::invalid_argument);
}

TEST(Waterfill, KktConditionsHold)
{
	std::mt19937_64 rng(3);
	std::uniform_real_distribution<double> u(0.0, 1.0);
	for (int t = 0; t < 1000; ++t)
	{
		std::size_t const n = 1+rng()%8;
		std::vector<double> a(n), b(n), d(n), caps(n);
		for (std::size_t i = 0; i < n; ++i)
		{
			a[i] = std::pow(10.0, 2*u(rng)-1);
			b[i] = std::pow(10.0, 3*u(rng)-2);
			d[i] = u(rng) < 0.3 ? 0.0 : std::pow(10.0, 2*u(rng)-1);
			caps[i] = std::pow(10.0, 2*u(rng)-1);
		}
		bool const use_caps = t%2 == 1;
		double const budget = std::pow(10.0, 2*u(rng)-1);
		auto r = use_caps ? waterfill_bisect(a, b, d, budget, std::span<double const>(caps))
		                  : waterfill_bisect(a, b, d, budget);
		double sum = 0;
		for (std::size_t i = 0; i < n; ++i)
		{
			double const cap = use_caps ? caps[i] : infinity;
			double const p = r.powers[i];
			sum += p;
			ASSERT_GE(p, 0.0);
			ASSERT_LE(p, cap);
			// stationarity of a ln(p + b) - (lambda + d) p on the box
			double const slope = a[i]/(p+b[i])-(r.lambda+d[i]);
			double const scl = std::max(1.0, r.lambda+d[i]);
			if (p > 1e-12 && p < cap*(1-1e-12))
			{
				EXPECT_LE(std::abs(slope), 1e-9*scl) << "interior slot";
			}
			else if (p <= 1e-12)
			{
				EXPECT_LE(slope, 1e-9*scl) << "slot at zero";
			}
			else
			{
				EXPECT_GE(slope, -1e-9*scl) << "slot at cap";
			}
		}
		EXPECT_LE(sum, budget*(1+1e-12));
		EXPECT_GE(r.lambda, 0.0);
		EXPECT_LE(r.lambda*(budget-sum), 1e-9*std::max(1.0, r.lambda*budget));
	}
}

// ---------------------------------------------------------------------------
// Fixed point
// ---------------------------------------------------------------------------

TEST(FixedPoint, SingleBsClosedForm)
{
	NetworkInstance inst = test_support::scalar_instance(1, 1, 1, 10, std::numbers::ln2);
	inst.constraint = PowerConstraint::per_subcarrier(Matrix<double>(1, 1, 10.0));
	Schedule const k(1, 1, 0);
	ScaCoefficients c{Matrix<double>(1, 1, 1.0), Matrix<double>(1, 1, 0.0), Matrix<double>(1, 1, 1e300)};
	auto r = interference_fixed_point(inst, k, c, 2.0, Matrix<double>(1, 1, 10.0));
	EXPECT_NEAR(r.power(0, 0), 0.5, 1e-12);
	auto r0 = interference_fixed_point(inst, k, c, 0.0, Matrix<double>(1, 1, 10.0));
	EXPECT_EQ(r0.power(0, 0), 10.0);
}

namespace {

struct MapCase
{
	NetworkInstance inst;
	Schedule k;
	ScaCoefficients c;
	double pi;
};

MapCase random_map_case(std::mt19937_64& rng)
{
	test_support::RandomSpec spec;
	spec.m_bs = 3;
	spec.n_sub = 2;
	spec.kind = PowerConstraint::Kind::per_subcarrier;
	MapCase mc{test_support::random_instance(rng, spec), {}, {}, 0};
	std::uniform_real_distribution<double> u(0.0, 1.0);
	PowerMatrix ref(3, 2);
	for (double& v : ref.flat())
	{
		v = std::pow(10.0, 2*u(rng)-2);
	}
	mc.k = best_schedule(mc.inst, ref, ScheduleRule::rate);
	mc.c = expand_at(mc.inst, ref, mc.k);
	mc.pi = std::pow(10.0, 2*u(rng)-1);
	return mc;
}

} // namespace

TEST(FixedPoint, StandardInterferenceFunctionProperties)
{
	std::mt19937_64 rng(4);
	std::uniform_real_distribution<double> u(0.0, 1.0);
	for (int t = 0; t < 1000; ++t)
	{
		MapCase const mc = random_map_case(rng);
		PowerMatrix p(3, 2), bigger(3, 2), scaled(3, 2);
		double const mu = 1+3*u(rng);
		for (std::size_t i = 0; i < p.size(); ++i)
		{
			p.flat()[i] = std::pow(10.0, 3*u(rng)-2);
			bigger.flat()[i] = p.flat()[i]*(1+u(rng));
			scaled.flat()[i] = mu*p.flat()[i];
		}
		auto const tp = interference_map(mc.inst, mc.k, mc.c, mc.pi, p);
		auto const tb = interference_map(mc.inst, mc.k, mc.c, mc.pi, bigger);
		auto const ts = interference_map(mc.inst, mc.k, mc.c, mc.pi, scaled);
		for (std::size_t i = 0; i < p.size(); ++i)
		{
			EXPECT_GT(tp.flat()[i], 0.0);
			EXPECT_GE(tb.flat()[i], tp.flat()[i]*(1-1e-14));
			EXPECT_GT(mu*tp.flat()[i], ts.flat()[i]);
		}
	}
}

TEST(FixedPoint, SymmetricInstanceGivesSymmetricPowers)
{
	NetworkInstance inst = make_instance(2, 1, 1.0, {{0}, {1}});
	inst.gains(0, 0, 0) = inst.gains(1, 1, 0) = 20;
	inst.gains(1, 0, 0) = inst.gains(0, 1, 0) = 2;
	inst.constraint = PowerConstraint::per_subcarrier(Matrix<double>(2, 1, 5.0));
	Schedule k(2, 1);
	k(1, 0) = 1;
	ScaCoefficients const c = expand_at(inst, PowerMatrix(2, 1, 0.5), k);
	double const pi = 1.5;
	auto fp = interference_fixed_point(inst, k, c, pi, Matrix<double>(2, 1, 5.0), 1e-13);
	EXPECT_NEAR(fp.power(0, 0), fp.power(1, 0), 1e-12*fp.power(0, 0));

	auto oracle = [&](Matrix<double> const& q, Matrix<double>& grad) {
		return detail::parametric_value(inst, k, c, pi, to_power(q), grad);
	};
	ConcaveMaxOptions o;
	o.tol = 1e-10;
	o.scale = 1;
	auto r = concave_max(oracle, BoxBudgetSet::for_instance(inst), Matrix<double>(2, 1, 0.0), o);
	EXPECT_LE(rel_diff(std::exp(r.x(0, 0)), fp.power(0, 0)), 1e-5);
	EXPECT_LE(rel_diff(std::exp(r.x(1, 0)), fp.power(1, 0)), 1e-5);
}

TEST(FixedPoint, AgreesWithGradientAscentOnBoundRatio)
{
	std::mt19937_64 rng(14);
	for (int t = 0; t < 30; ++t)
	{
		MapCase const mc = random_map_case(rng);
		Matrix<double> const q0 = to_log_power(mc.inst, detail::max_power_matrix(mc.inst));
		GeeOptions fp_opts, cm_opts;
		fp_opts.engine = GeeInnerEngine::fixed_point;
		cm_opts.engine = GeeInnerEngine::concave_max;
		cm_opts.inner_tol = 1e-9;
		auto a = detail::maximize_bound_ratio(mc.inst, mc.k, mc.c, q0, fp_opts);
		auto b = detail::maximize_bound_ratio(mc.inst, mc.k, mc.c, q0, cm_opts);
		double const ha = bound_h(mc.inst, mc.k, mc.c, a.q);
		double const hb = bound_h(mc.inst, mc.k, mc.c, b.q);
		EXPECT_LE(rel_diff(ha, hb), 1e-4) << "case " << t;
	}
}

// ---------------------------------------------------------------------------
// Separable budgeted allocation
// ---------------------------------------------------------------------------

TEST(BudgetedAllocation, MatchesWaterfillForLogUtilities)
{
	std::vector<double> const a{1, 2, 0.5}, b{0.5, 1, 0.1};
	std::vector<double> const lo(3, 0.0), hi(3, 100.0);
	auto deriv = [&](std::size_t i, double p) { return a[i]/(p+b[i]); };
	auto r = budgeted_concave_allocation(deriv, lo, hi, 2.0);
	auto wf = waterfill_bisect(a, b, std::vector<double>(3, 0.0), 2.0);
	for (std::size_t i = 0; i < 3; ++i)
	{
		EXPECT_NEAR(r.powers[i], wf.powers[i], 1e-10);
	}
	EXPECT_NEAR(r.lambda, wf.lambda, 1e-10);
}

TEST(BudgetedAllocation, SlackBudgetReachesUnconstrainedPeaks)
{
	// derivative 1/(1+p) - 0.25 peaks at p = 3; second slot capped at 1
	std::vector<double> const lo(2, 0.0), hi{10.0, 1.0};
	auto deriv = [](std::size_t, double p) { return 1/(1+p)-0.25; };
	auto r = budgeted_concave_allocation(deriv, lo, hi, 100.0);
	EXPECT_NEAR(r.powers[0], 3.0, 1e-12);
	EXPECT_EQ(r.powers[1], 1.0);
	EXPECT_EQ(r.lambda, 0.0);
}
