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

/**
 * \file eeofdma/solver_gee.hpp
 *
 * \brief Global energy efficiency maximization.
 *
 * The interference-limited solver alternates three steps starting from full
 * power:
 *  1. expand the log bound at the current SINRs,
 *  2. maximize the bounded ratio f / g over q = ln p with Dinkelbach's
 *     procedure, each subproblem solved by the stationarity fixed point
 *     (row waterfilling under a per-BS budget) with projected gradient
 *     ascent as the fallback,
 *  3. reschedule every slot to its highest-rate user.
 *
 * The noise-limited solver drops cross gains; each Dinkelbach subproblem
 * then decouples into one waterfilling problem per BS and the result is
 * globally optimal.
 */

#ifndef EEOFDMA_SOLVER_GEE_HPP
#define EEOFDMA_SOLVER_GEE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <eeofdma/inner.hpp>
#include <eeofdma/matrix.hpp>
#include <eeofdma/model.hpp>
#include <eeofdma/report.hpp>
#include <eeofdma/sca.hpp>
#include <limits>
#include <numbers>
#include <vector>

namespace eeofdma {

enum class GeeInnerEngine
{
	automatic,   ///< fixed point, falling back to gradient ascent if it stalls
	concave_max, ///< always projected gradient ascent
	fixed_point  ///< always the fixed point
};

struct GeeOptions: SolverOptions
{
	double dinkelbach_eps = 1e-6;
	GeeInnerEngine engine = GeeInnerEngine::automatic;
};

namespace detail {

/// Value and q-gradient of f - pi g at power p.
inline double parametric_value(NetworkInstance const& inst,
                               Schedule const& k,
                               ScaCoefficients const& c,
                               double pi,
                               PowerMatrix const& p,
                               Matrix<double>& grad)
{
	auto const st = link_state(inst, p, k);
	grad = grad_f_p(inst, k, c, p, st);
	double f = 0;
	double g = 0;
	for (std::size_t m = 0; m < inst.m_bs; ++m)
	{
		for (std::size_t n = 0; n < inst.n_sub; ++n)
		{
			f += bounded_log_rate(c.alpha(m, n), c.beta(m, n), st.sinr(m, n));
			g += consumed(inst, p, m, n);
			grad(m, n) -= pi*inst.gamma(m, n)*p(m, n);
		}
	}
	return inst.bandwidth_hz*f-pi*g;
}

/// Slot-wise strongest served user; the noise-limited rate rule at any p > 0.
inline Schedule strongest_schedule(NetworkInstance const& inst)
{
	Schedule k(inst.m_bs, inst.n_sub);
	for (std::size_t m = 0; m < inst.m_bs; ++m)
	{
		for (std::size_t n = 0; n < inst.n_sub; ++n)
		{
			std::size_t best = inst.cells[m].front();
			for (std::size_t s : inst.cells[m])
			{
				double const gs = inst.gains(m, s, n);
				double const gb = inst.gains(m, best, n);
				if (gs > gb || (gs == gb && s < best))
				{
					best = s;
				}
			}
			k(m, n) = best;
		}
	}
	return k;
}

struct FractionalSolve
{
	Matrix<double> q;
	DinkelbachState state;
	int inner_iterations = 0;
};

/// Maximizes the bounded ratio h = f / g for fixed (k, c) from q0.
inline FractionalSolve maximize_bound_ratio(NetworkInstance const& inst,
                                            Schedule const& k,
                                            ScaCoefficients const& c,
                                            Matrix<double> const& q0,
                                            GeeOptions const& opts)
{
	BoxBudgetSet const set = BoxBudgetSet::for_instance(inst);
	int iterations = 0;

	auto f = [&](Matrix<double> const& q) { return bound_f(inst, k, c, q); };
	auto g = [&](Matrix<double> const& q) { return bound_g(inst, q); };
	auto argmax = [&](double pi, Matrix<double> const& warm) -> Matrix<double> {
		if (opts.engine != GeeInnerEngine::concave_max)
		{
			try
			{
				auto fp = interference_fixed_point(inst, k, c, pi, set, 1e-10, to_power(warm), 2000);
				iterations += fp.iterations;
				return to_log_power(inst, fp.power);
			}
			catch (fixed_point_error const&)
			{
				if (opts.engine == GeeInnerEngine::fixed_point)
				{
					throw;
				}
				iterations += 2000;
			}
		}
		ConcaveMaxOptions co;
		co.tol = opts.inner_tol;
		co.scale = std::max({f(warm), pi*g(warm), std::numeric_limits<double>::min()});
		auto oracle = [&](Matrix<double> const& q, Matrix<double>& grad) {
			return parametric_value(inst, k, c, pi, to_power(q), grad);
		};
		auto r = concave_max(oracle, set, warm, co);
		iterations += r.iterations;
		return std::move(r.x);
	};

	DinkelbachOptions dopts;
	dopts.epsilon = opts.dinkelbach_eps;
	auto res = dinkelbach(f, g, argmax, q0, dopts);
	return {std::move(res.point), std::move(res.state), iterations};
}

} // namespace detail

/// Noise-limited GEE maximization (cross gains ignored); globally optimal.
inline SolveResult<Allocation> solve_gee_nl(NetworkInstance const& inst, GeeOptions const& opts = {})
{
	validate(inst);
	opts.validate();
	NetworkInstance const nl = decoupled(inst);
	PowerMatrix p = detail::max_power_matrix(nl);
	Schedule k = best_schedule(nl, p, ScheduleRule::rate);
	detail::OuterTracker tr(opts, gee(nl, {p, k}));
	double const a = nl.bandwidth_hz/std::numbers::ln2;

	while (true)
	{
		k = detail::strongest_schedule(nl);
		auto f = [&](PowerMatrix const& x) { return sum_rate(nl, {x, k}); };
		auto g = [&](PowerMatrix const& x) { return consumed_power_total(nl, x); };
		int fills = 0;
		auto argmax = [&](double pi, PowerMatrix const&) {
			PowerMatrix out(nl.m_bs, nl.n_sub);
			for (std::size_t m = 0; m < nl.m_bs; ++m)
			{
				std::vector<double> lv(nl.n_sub, a), off(nl.n_sub), d(nl.n_sub), caps(nl.n_sub);
				for (std::size_t n = 0; n < nl.n_sub; ++n)
				{
					double const gain = nl.gains(m, k(m, n), n);
					off[n] = gain > 0 ? 1.0/gain : infinity;
					d[n] = pi*nl.gamma(m, n);
					caps[n] = nl.constraint.slot_cap(m, n);
				}
				double const budget = nl.constraint.is_per_bs() ? nl.constraint.bs_limits()[m] : infinity;
				auto wf = waterfill_bisect(lv, off, d, budget, std::span<double const>(caps));
				std::copy(wf.powers.begin(), wf.powers.end(), out.row(m).begin());
				++fills;
			}
			return out;
		};
		DinkelbachOptions dopts;
		dopts.epsilon = opts.dinkelbach_eps;
		DinkelbachResult<PowerMatrix> res;
		try
		{
			res = dinkelbach(f, g, argmax, p, dopts);
		}
		catch (dinkelbach_error const& e)
		{
			tr.report.dinkelbach_runs.push_back(e.state);
			throw solver_error(e.what(), tr.report);
		}
		tr.report.dinkelbach_runs.push_back(res.state);
		double const prev = gee(nl, {p, k});
		if (gee(nl, {res.point, k}) >= prev)
		{
			p = std::move(res.point);
		}
		if (tr.record(gee(nl, {p, k}), fills))
		{
			break;
		}
	}
	Matrix<double> const q = to_log_power(nl, p);
	double const value = gee(nl, {p, k});
	tr.report.kkt_residual = value > 0 ? kkt_residual_log(nl, to_power(q), grad_gee_q(nl, k, q), value) : 0;
	return {detail::snap_off_slots(nl, std::move(p), std::move(k)), std::move(tr.report)};
}

/**
 * GEE maximization by sequential log-bound tightening. Dispatches to
 * solve_gee_nl when opts.mode is noise_limited. The returned trace holds the
 * exact GEE after each outer iteration and is non-decreasing.
 */
inline SolveResult<Allocation> solve_gee(NetworkInstance const& inst, GeeOptions const& opts = {})
{
	if (opts.mode == Regime::noise_limited)
	{
		return solve_gee_nl(inst, opts);
	}
	validate(inst);
	opts.validate();
	PowerMatrix p = detail::max_power_matrix(inst);
	Schedule k = best_schedule(inst, p, ScheduleRule::rate);
	detail::OuterTracker tr(opts, gee(inst, {p, k}));
	Matrix<double> q = to_log_power(inst, p);

	while (true)
	{
		ScaCoefficients const c = expand_at(inst, p, k);
		detail::FractionalSolve inner;
		try
		{
			inner = detail::maximize_bound_ratio(inst, k, c, q, opts);
		}
		catch (dinkelbach_error const& e)
		{
			tr.report.dinkelbach_runs.push_back(e.state);
			throw solver_error(e.what(), tr.report);
		}
		catch (std::runtime_error const& e)
		{
			throw solver_error(e.what(), tr.report);
		}
		tr.report.dinkelbach_runs.push_back(inner.state);
		// keep the incumbent if the inner solve lost ground on the bound
		if (bound_h(inst, k, c, inner.q) >= bound_h(inst, k, c, q))
		{
			q = std::move(inner.q);
		}
		p = to_power(q);
		k = best_schedule(inst, p, ScheduleRule::rate);
		if (tr.record(gee(inst, {p, k}), inner.inner_iterations))
		{
			break;
		}
	}
	double const value = gee(inst, {p, k});
	tr.report.kkt_residual = value > 0 ? kkt_residual_log(inst, p, grad_gee_q(inst, k, q), value) : 0;
	return {detail::snap_off_slots(inst, std::move(p), std::move(k)), std::move(tr.report)};
}

} // namespace eeofdma

#endif // EEOFDMA_SOLVER_GEE_HPP
