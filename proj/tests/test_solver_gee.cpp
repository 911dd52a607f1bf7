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

#include <algorithm>
#include <cmath>
#include <eeofdma/oracle.hpp>
#include <limits>
#include <eeofdma/solver_gee.hpp>
#include <gtest/gtest.h>
#include <numbers>
#include <random>

using namespace eeofdma;
using test_support::rel_diff;

namespace {

/// Root of a (x + c) / (1 + a x) = ln(1 + a x) by plain bisection.
double scalar_gee_peak(double a, double c)
{
	double lo = 0, hi = 1e6;
	for (int i = 0; i < 200; ++i)
	{
		double const mid = 0.5*(lo+hi);
		(a*(mid+c)/(1+a*mid) > std::log1p(a*mid) ? lo : hi) = mid;
	}
	return 0.5*(lo+hi);
}

/// Outer loop run to stationarity rather than to the default objective-change rule.
GeeOptions converged_options(Regime mode = Regime::interference)
{
	GeeOptions o;
	o.mode = mode;
	o.rel_tol = 1e-10;
	o.outer_max_iter = 1000;
	return o;
}

void expect_dinkelbach_exact(SolverReport const& r)
{
	ASSERT_FALSE(r.dinkelbach_runs.empty());
	for (auto const& st : r.dinkelbach_runs)
	{
		EXPECT_TRUE(st.flag);
		EXPECT_GE(st.gap(), 0.0);
		EXPECT_LT(st.gap(), st.epsilon);
		EXPECT_LE(std::abs(st.pi-st.f_val/st.g_val), st.epsilon/st.g_val);
	}
}

void expect_monotone(SolverReport const& r)
{
	double prev = r.initial_objective;
	for (double v : r.objective_trace)
	{
		EXPECT_GE(v, prev-1e-9*std::abs(prev));
		prev = v;
	}
}

} // namespace

TEST(SolveGee, ScalarOptimum)
{
	NetworkInstance const inst = test_support::scalar_instance(10, 1, 1, 10);
	double const x = scalar_gee_peak(10, 1);
	EXPECT_NEAR(x, 0.7175, 1e-4);
	for (Regime mode : {Regime::interference, Regime::noise_limited})
	{
		auto res = solve_gee(inst, converged_options(mode));
		EXPECT_NEAR(res.allocation.power(0, 0), 0.7175, 1e-3);
		EXPECT_NEAR(res.allocation.power(0, 0), x, 1e-4);
		EXPECT_NEAR(gee(inst, res.allocation), std::log2(1+10*x)/(1+x), 1e-9);
		expect_dinkelbach_exact(res.report);
	}
}

TEST(SolveGee, TinyBudget)
{
	NetworkInstance const inst = test_support::scalar_instance(10, 1, 1, 1e-12);
	auto res = solve_gee(inst);
	EXPECT_LE(res.allocation.power(0, 0), 1e-12*(1+1e-9));
	EXPECT_LT(gee(inst, res.allocation), 1e-10);
}

TEST(SolveGee, DefaultStopNearScalarOptimum)
{
	NetworkInstance const inst = test_support::scalar_instance(10, 1, 1, 10);
	auto res = solve_gee(inst);
	EXPECT_TRUE(res.report.converged);
	EXPECT_NEAR(res.allocation.power(0, 0), 0.7175, 1e-2);
	EXPECT_GE(gee(inst, res.allocation), std::log2(1+10*0.7175)/(1+0.7175)*(1-1e-4));
}

TEST(SolveGee, VanishingStaticPowerDrivesPowerToFloor)
{
	for (Regime mode : {Regime::interference, Regime::noise_limited})
	{
		double prev = std::numeric_limits<double>::infinity();
		for (double theta : {1e-3, 1e-6, 1e-9, 1e-12})
		{
			NetworkInstance const inst = test_support::scalar_instance(10, theta, 1, 10);
			GeeOptions o = converged_options(mode);
			o.dinkelbach_eps = 1e-13;
			auto res = solve_gee(inst, o);
			double const p = res.allocation.power(0, 0);
			double const x = scalar_gee_peak(10, theta);
			double const best = std::log2(1+10*x)/(theta+x);
			EXPECT_LT(p, prev);
			prev = p;
			if (mode == Regime::noise_limited)
			{
				EXPECT_LE(rel_diff(p, x), 1e-3) << "theta " << theta;
			}
			EXPECT_GE(gee(inst, res.allocation), best*(1-1e-2)) << "theta " << theta;
		}
		EXPECT_LT(prev, mode == Regime::noise_limited ? 1e-5 : 1e-3);
	}
}

TEST(SolveGeeNl, BudgetBoundTwoSlotWaterfill)
{
	NetworkInstance inst = make_instance(1, 2, std::numbers::ln2, {{0}});
	inst.gains(0, 0, 0) = 1;
	inst.gains(0, 0, 1) = 1.0/3.0;
	inst.theta.fill(50.0);
	inst.constraint = PowerConstraint::per_bs({2.0});
	GeeOptions o;
	o.mode = Regime::noise_limited;
	auto res = solve_gee(inst, o);
	EXPECT_NEAR(res.allocation.power(0, 0), 2.0, 1e-9);
	EXPECT_EQ(res.allocation.power(0, 1), 0.0);
}

TEST(SolveGeeNl, IdenticalSlotsGetEqualPower)
{
	NetworkInstance inst = make_instance(1, 3, 1.0, {{0}});
	for (std::size_t n = 0; n < 3; ++n)
	{
		inst.gains(0, 0, n) = 7;
	}
	inst.constraint = PowerConstraint::per_bs({0.9});
	GeeOptions o;
	o.mode = Regime::noise_limited;
	auto res = solve_gee(inst, o);
	EXPECT_NEAR(res.allocation.power(0, 0), res.allocation.power(0, 1), 1e-12);
	EXPECT_NEAR(res.allocation.power(0, 1), res.allocation.power(0, 2), 1e-12);
}

TEST(SolveGeeNl, IdenticalIndependentBsMatchSingleBsSolve)
{
	std::mt19937_64 rng(31);
	test_support::RandomSpec spec;
	spec.m_bs = 1;
	spec.n_sub = 3;
	spec.noise_limited = true;
	NetworkInstance const one = test_support::random_instance(rng, spec);
	NetworkInstance two = make_instance(2, 3, one.bandwidth_hz, {{0, 1}, {2, 3}});
	for (std::size_t m = 0; m < 2; ++m)
	{
		for (std::size_t n = 0; n < 3; ++n)
		{
			two.theta(m, n) = one.theta(0, n);
			two.gamma(m, n) = one.gamma(0, n);
			for (std::size_t u = 0; u < 2; ++u)
			{
				two.gains(m, 2*m+u, n) = one.gains(0, u, n);
			}
		}
	}
	two.constraint = PowerConstraint::per_bs({one.constraint.bs_limits()[0], one.constraint.bs_limits()[0]});
	GeeOptions o;
	o.mode = Regime::noise_limited;
	auto const a = solve_gee(one, o);
	auto const b = solve_gee(two, o);
	for (std::size_t m = 0; m < 2; ++m)
	{
		for (std::size_t n = 0; n < 3; ++n)
		{
			EXPECT_NEAR(b.allocation.power(m, n), a.allocation.power(0, n), 1e-8*std::max(1.0, a.allocation.power(0, n)));
		}
	}
}

TEST(SolveGeeNl, GlobalOptimalityAgainstGrid)
{
	std::mt19937_64 rng(32);
	for (int t = 0; t < 10; ++t)
	{
		test_support::RandomSpec spec;
		spec.noise_limited = true;
		spec.kind = t%2 ? PowerConstraint::Kind::per_bs : PowerConstraint::Kind::per_subcarrier;
		NetworkInstance const inst = test_support::random_instance(rng, spec);
		GeeOptions o;
		o.mode = Regime::noise_limited;
		auto const res = solve_gee(inst, o);
		auto const grid = grid_search(inst, 50);
		EXPECT_GE(gee(inst, res.allocation), grid.gee*(1-1e-2)) << "instance " << t;
		expect_monotone(res.report);
		EXPECT_TRUE(res.report.converged);
	}
}

TEST(SolveGee, MonotoneTraceExactDinkelbachAndStationarity)
{
	std::mt19937_64 rng(33);
	for (int t = 0; t < 20; ++t)
	{
		test_support::RandomSpec spec;
		spec.m_bs = 3;
		spec.n_sub = 4;
		spec.kind = t%2 ? PowerConstraint::Kind::per_bs : PowerConstraint::Kind::per_subcarrier;
		NetworkInstance const inst = test_support::random_instance(rng, spec);
		auto const res = solve_gee(inst);
		expect_monotone(res.report);
		expect_dinkelbach_exact(res.report);
		EXPECT_LE(res.report.objective_trace.size(), 50u);
		auto const tight = solve_gee(inst, converged_options());
		EXPECT_TRUE(tight.report.converged);
		expect_monotone(tight.report);
		EXPECT_LE(tight.report.kkt_residual, 1e-4) << "instance " << t;
		EXPECT_GE(gee(inst, tight.allocation), gee(inst, res.allocation)*(1-1e-9));
		EXPECT_NO_THROW(validate(inst, res.allocation));
		if (res.report.converged && res.report.objective_trace.size() >= 2)
		{
			auto const& tr = res.report.objective_trace;
			EXPECT_LT(rel_diff(tr[tr.size()-1], tr[tr.size()-2]), 1e-4);
		}
	}
}

TEST(SolveGee, InnerEnginesAgree)
{
	std::mt19937_64 rng(34);
	for (int t = 0; t < 10; ++t)
	{
		test_support::RandomSpec spec;
		spec.m_bs = 3;
		spec.n_sub = 2;
		spec.kind = t%2 ? PowerConstraint::Kind::per_bs : PowerConstraint::Kind::per_subcarrier;
		NetworkInstance const inst = test_support::random_instance(rng, spec);
		GeeOptions fp, cm;
		fp.engine = GeeInnerEngine::fixed_point;
		cm.engine = GeeInnerEngine::concave_max;
		double const a = gee(inst, solve_gee(inst, fp).allocation);
		double const b = gee(inst, solve_gee(inst, cm).allocation);
		EXPECT_LE(rel_diff(a, b), 1e-3) << "instance " << t;
	}
}

TEST(SolveGee, ImprovesOnFullPower)
{
	std::mt19937_64 rng(35);
	for (int t = 0; t < 10; ++t)
	{
		test_support::RandomSpec spec;
		spec.m_bs = 3;
		spec.n_sub = 3;
		NetworkInstance const inst = test_support::random_instance(rng, spec);
		auto const res = solve_gee(inst);
		EXPECT_GE(gee(inst, res.allocation), res.report.initial_objective*(1-1e-12));
	}
}
