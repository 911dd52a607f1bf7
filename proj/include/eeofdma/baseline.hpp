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
 * \file eeofdma/baseline.hpp
 *
 * \brief Reference allocations: full power and sum-rate maximization.
 */

#ifndef EEOFDMA_BASELINE_HPP
#define EEOFDMA_BASELINE_HPP

#include <algorithm>
#include <cstddef>
#include <eeofdma/inner.hpp>
#include <eeofdma/model.hpp>
#include <eeofdma/report.hpp>
#include <eeofdma/sca.hpp>
#include <eeofdma/solver_gee.hpp>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

namespace eeofdma {

/// Every slot at its cap (per-subcarrier) or at P_max / N (per-BS).
inline Allocation max_power(NetworkInstance const& inst)
{
	validate(inst);
	PowerMatrix p = detail::max_power_matrix(inst);
	Schedule k = best_schedule(inst, p, ScheduleRule::rate);
	return {std::move(p), std::move(k)};
}

/// Noise-limited sum-rate: per-BS classical waterfilling on the strongest users.
inline SolveResult<Allocation> solve_sumrate_nl(NetworkInstance const& inst, SolverOptions const& opts = {})
{
	validate(inst);
	opts.validate();
	NetworkInstance const nl = decoupled(inst);
	PowerMatrix p = detail::max_power_matrix(nl);
	Schedule k = best_schedule(nl, p, ScheduleRule::rate);
	detail::OuterTracker tr(opts, sum_rate(nl, {p, k}));
	double const a = nl.bandwidth_hz/std::numbers::ln2;
	while (true)
	{
		k = detail::strongest_schedule(nl);
		PowerMatrix pn(nl.m_bs, nl.n_sub);
		for (std::size_t m = 0; m < nl.m_bs; ++m)
		{
			std::vector<double> lv(nl.n_sub, a), off(nl.n_sub), d(nl.n_sub, 0.0), caps(nl.n_sub);
			for (std::size_t n = 0; n < nl.n_sub; ++n)
			{
				double const g = nl.gains(m, k(m, n), n);
				off[n] = g > 0 ? 1.0/g : infinity;
				caps[n] = nl.constraint.slot_cap(m, n);
			}
			double const budget = nl.constraint.is_per_bs() ? nl.constraint.bs_limits()[m] : infinity;
			auto wf = waterfill_bisect(lv, off, d, budget, std::span<double const>(caps));
			std::copy(wf.powers.begin(), wf.powers.end(), pn.row(m).begin());
		}
		if (sum_rate(nl, {pn, k}) >= sum_rate(nl, {p, k}))
		{
			p = std::move(pn);
		}
		if (tr.record(sum_rate(nl, {p, k}), static_cast<int>(nl.m_bs)))
		{
			break;
		}
	}
	return {detail::snap_off_slots(nl, std::move(p), std::move(k)), std::move(tr.report)};
}

/**
 * Sum-rate maximization with the same log-bound tightening loop as the GEE
 * solver, the inner problem being the bounded sum-rate alone.
 */
inline SolveResult<Allocation> solve_sumrate(NetworkInstance const& inst, SolverOptions const& opts = {})
{
	if (opts.mode == Regime::noise_limited)
	{
		return solve_sumrate_nl(inst, opts);
	}
	validate(inst);
	opts.validate();
	PowerMatrix p = detail::max_power_matrix(inst);
	Schedule k = best_schedule(inst, p, ScheduleRule::rate);
	detail::OuterTracker tr(opts, sum_rate(inst, {p, k}));
	BoxBudgetSet const set = BoxBudgetSet::for_instance(inst);
	Matrix<double> q = to_log_power(inst, p);
	while (true)
	{
		ScaCoefficients const c = expand_at(inst, p, k);
		ConcaveMaxOptions co;
		co.tol = opts.inner_tol;
		co.scale = std::max(bound_f(inst, k, c, q), std::numeric_limits<double>::min());
		auto oracle = [&](Matrix<double> const& x, Matrix<double>& grad) {
			return detail::parametric_value(inst, k, c, 0.0, to_power(x), grad);
		};
		ConcaveMaxResult r;
		try
		{
			r = concave_max(oracle, set, q, co);
		}
		catch (std::runtime_error const& e)
		{
			throw solver_error(e.what(), tr.report);
		}
		if (bound_f(inst, k, c, r.x) >= bound_f(inst, k, c, q))
		{
			q = std::move(r.x);
		}
		p = to_power(q);
		k = best_schedule(inst, p, ScheduleRule::rate);
		if (tr.record(sum_rate(inst, {p, k}), r.iterations))
		{
			break;
		}
	}
	double const value = sum_rate(inst, {p, k});
	if (value > 0)
	{
		ScaCoefficients const c = expand_at(inst, p, k);
		tr.report.kkt_residual = kkt_residual_log(inst, p, grad_f_q(inst, k, c, q), value);
	}
	return {detail::snap_off_slots(inst, std::move(p), std::move(k)), std::move(tr.report)};
}

} // namespace eeofdma

#endif // EEOFDMA_BASELINE_HPP
