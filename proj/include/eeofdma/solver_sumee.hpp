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
 * \file eeofdma/solver_sumee.hpp
 *
 * \brief Weighted sum of per-slot energy efficiencies.
 *
 * With the schedule fixed, a stationary point satisfies, for every active
 * slot of BS m,
 *
 *   p = (B/ln2) Q / (lambda_m + C + L) - (1 + I) / G,
 *
 * where I is the received interference, Q = w / (theta + gamma p) an
 * equivalent rate weight, C = w gamma R / (theta + gamma p)^2 the marginal
 * power cost and L the interference leakage priced at the victims' Q. The
 * interference-limited solver freezes Q, C, L at the previous iterate and
 * solves one waterfilling problem per BS, refreshing I BS by BS.
 *
 * Without interference every summand depends on one slot only and is
 * pseudo-concave in its power; capping each slot at its unconstrained peak
 * makes the problem concave, which the noise-limited solver exploits.
 */

#ifndef EEOFDMA_SOLVER_SUMEE_HPP
#define EEOFDMA_SOLVER_SUMEE_HPP

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
#include <span>
#include <stdexcept>
#include <vector>

namespace eeofdma {

struct SumEeOptions: SolverOptions
{
	/// Revert a BS update whenever it lowers Sum-EE.
	bool monotone_guard = false;
};

struct SumEeTerms
{
	Matrix<double> interference; ///< I
	Matrix<double> eq_weight;    ///< Q, 1/W
	Matrix<double> power_cost;   ///< C, bit/s/W^2
	Matrix<double> leakage;      ///< L, bit/s/W^2
};

inline SumEeTerms sumee_terms(NetworkInstance const& inst, Allocation const& a)
{
	detail::check_shape(inst, a.power);
	auto const st = detail::link_state(inst, a.power, a.schedule);
	std::size_t const M = inst.m_bs, N = inst.n_sub;
	SumEeTerms t{st.interf, Matrix<double>(M, N), Matrix<double>(M, N), Matrix<double>(M, N)};
	double const scale = inst.bandwidth_hz/std::numbers::ln2;
	for (std::size_t m = 0; m < M; ++m)
	{
		for (std::size_t n = 0; n < N; ++n)
		{
			double const w = inst.weights(a.schedule(m, n), n);
			double const cost = detail::consumed(inst, a.power, m, n);
			double const r = detail::rate_of_sinr(inst.bandwidth_hz, st.sinr(m, n));
			t.eq_weight(m, n) = w/cost;
			t.power_cost(m, n) = w*inst.gamma(m, n)*r/(cost*cost);
		}
	}
	for (std::size_t n = 0; n < N; ++n)
	{
		for (std::size_t m = 0; m < M; ++m)
		{
			double acc = 0;
			for (std::size_t j = 0; j < M; ++j)
			{
				if (j != m)
				{
					acc += t.eq_weight(j, n)*inst.gains(m, a.schedule(j, n), n)*st.sinr(j, n)/st.total(j, n);
				}
			}
			t.leakage(m, n) = scale*acc;
		}
	}
	return t;
}

struct SumEePowerUpdate
{
	PowerMatrix power;
	std::vector<double> lambda; ///< per-BS budget multiplier (0 under per-subcarrier caps)
};

namespace detail {

/// Modified waterfilling for row m with interference row I.
inline WaterfillResult sumee_row(NetworkInstance const& inst,
                                 Schedule const& k,
                                 SumEeTerms const& t,
                                 std::size_t m,
                                 std::span<double const> interf)
{
	std::size_t const N = inst.n_sub;
	double const scale = inst.bandwidth_hz/std::numbers::ln2;
	std::vector<double> a(N), b(N), d(N), caps(N);
	for (std::size_t n = 0; n < N; ++n)
	{
		double const gain = inst.gains(m, k(m, n), n);
		a[n] = scale*t.eq_weight(m, n);
		b[n] = gain > 0 ? (1.0+interf[n])/gain : infinity;
		d[n] = t.power_cost(m, n)+t.leakage(m, n);
		caps[n] = inst.constraint.slot_cap(m, n);
	}
	double const budget = inst.constraint.is_per_bs() ? inst.constraint.bs_limits()[m] : infinity;
	return waterfill_bisect(a, b, d, budget, std::span<double const>(caps));
}

/// Received interference on every slot of row m at power p.
inline std::vector<double> interference_row(NetworkInstance const& inst, PowerMatrix const& p, Schedule const& k, std::size_t m)
{
	std::vector<double> out(inst.n_sub);
	for (std::size_t n = 0; n < inst.n_sub; ++n)
	{
		out[n] = interference(inst, p, m, k(m, n), n);
	}
	return out;
}

/**
 * Noise-limited rescheduling: slots carrying power use the objective's rule
 * at that power; silent slots go to the user with the largest weighted gain
 * (the rule's limit as p -> 0+).
 */
inline Schedule nl_schedule(NetworkInstance const& nl, PowerMatrix const& p, ScheduleRule rule)
{
	Schedule k = best_schedule(nl, p, rule);
	for (std::size_t m = 0; m < nl.m_bs; ++m)
	{
		for (std::size_t n = 0; n < nl.n_sub; ++n)
		{
			if (p(m, n) > 0)
			{
				continue;
			}
			double best = -1;
			for (std::size_t s : nl.cells[m])
			{
				double const w = rule == ScheduleRule::rate ? 1.0 : nl.weights(s, n);
				double const score = w*nl.gains(m, s, n);
				if (score > best)
				{
					best = score;
					k(m, n) = s;
				}
			}
		}
	}
	return k;
}

} // namespace detail

/// One power update with all terms (including I) frozen.
inline SumEePowerUpdate sumee_power_update(NetworkInstance const& inst, Schedule const& k, SumEeTerms const& terms)
{
	SumEePowerUpdate out{PowerMatrix(inst.m_bs, inst.n_sub), std::vector<double>(inst.m_bs, 0.0)};
	for (std::size_t m = 0; m < inst.m_bs; ++m)
	{
		auto wf = detail::sumee_row(inst, k, terms, m, terms.interference.row(m));
		std::copy(wf.powers.begin(), wf.powers.end(), out.power.row(m).begin());
		out.lambda[m] = wf.lambda;
	}
	return out;
}

/**
 * Relative violation of the Sum-EE stationarity system at (p, k):
 * dSumEE/dp = (B/ln2) Q G / (1 + I + pG) - C - L balanced against the
 * per-BS multiplier on active slots, bounded by it on silent ones, and
 * non-negative on capped ones. Each slot is scaled by the sum of the
 * magnitudes of its terms.
 */
inline double sumee_kkt_residual(NetworkInstance const& inst, Allocation const& a)
{
	SumEeTerms const t = sumee_terms(inst, a);
	double const scale = inst.bandwidth_hz/std::numbers::ln2;
	double worst = 0;
	std::vector<double> d(inst.n_sub), mag(inst.n_sub);
	for (std::size_t m = 0; m < inst.m_bs; ++m)
	{
		double row_sum = 0;
		for (std::size_t n = 0; n < inst.n_sub; ++n)
		{
			double const gain = inst.gains(m, a.schedule(m, n), n);
			double const own = scale*t.eq_weight(m, n)*gain/(1.0+t.interference(m, n)+a.power(m, n)*gain);
			d[n] = own-t.power_cost(m, n)-t.leakage(m, n);
			mag[n] = own+t.power_cost(m, n)+t.leakage(m, n);
			row_sum += a.power(m, n);
		}
		double lambda = 0;
		if (inst.constraint.is_per_bs() && row_sum >= inst.constraint.bs_limits()[m]*(1-1e-7))
		{
			double acc = 0, wsum = 0;
			for (std::size_t n = 0; n < inst.n_sub; ++n)
			{
				if (a.power(m, n) > 0 && mag[n] > 0)
				{
					acc += d[n]/(mag[n]*mag[n]);
					wsum += 1.0/(mag[n]*mag[n]);
				}
			}
			lambda = wsum > 0 ? std::max(0.0, acc/wsum) : 0.0;
		}
		for (std::size_t n = 0; n < inst.n_sub; ++n)
		{
			if (mag[n] == 0)
			{
				continue;
			}
			double const r = d[n]-lambda;
			double v = std::abs(r);
			if (a.power(m, n) <= 0)
			{
				v = std::max(0.0, r);
			}
			else if (!inst.constraint.is_per_bs() && a.power(m, n) >= inst.constraint.slot_cap(m, n)*(1-1e-12))
			{
				v = std::max(0.0, -r);
			}
			worst = std::max(worst, v/mag[n]);
		}
	}
	return worst;
}

/**
 * Peak of u(x) = log2(1 + a x) / (x + c): the root of
 * a (x + c) / (1 + a x) = ln(1 + a x). Returns 0 when a <= 0.
 */
inline double nl_slot_cap(double a, double c)
{
	if (!(a > 0))
	{
		return 0.0;
	}
	if (!(c > 0))
	{
		throw std::invalid_argument("nl_slot_cap: c must be positive");
	}
	auto h = [&](double x) { return a*(x+c)/(1.0+a*x)-std::log1p(a*x); };
	double hi = 1.0;
	while (h(hi) > 0)
	{
		hi *= 2;
		if (!std::isfinite(hi))
		{
			throw std::runtime_error("nl_slot_cap: could not bracket the peak");
		}
	}
	double lo = 0;
	while (hi-lo > 1e-13*hi)
	{
		double const mid = 0.5*(lo+hi);
		(h(mid) > 0 ? lo : hi) = mid;
	}
	return 0.5*(lo+hi);
}

/// Per-slot peak powers of the noise-limited efficiency for schedule k.
inline Matrix<double> nl_caps(NetworkInstance const& inst, Schedule const& k)
{
	Matrix<double> caps(inst.m_bs, inst.n_sub);
	for (std::size_t m = 0; m < inst.m_bs; ++m)
	{
		for (std::size_t n = 0; n < inst.n_sub; ++n)
		{
			double const c = inst.theta(m, n)/inst.gamma(m, n);
			caps(m, n) = nl_slot_cap(inst.gains(m, k(m, n), n), c);
		}
	}
	return caps;
}

namespace detail {

/// Per-BS allocation of sum_n phi_n(p_n) over [lower, min(peak, cap)] and the budget.
template <typename Deriv>
PowerMatrix nl_concave_rows(NetworkInstance const& nl,
                            Matrix<double> const& peak,
                            Matrix<double> const& lower,
                            Deriv&& deriv)
{
	PowerMatrix p(nl.m_bs, nl.n_sub);
	for (std::size_t m = 0; m < nl.m_bs; ++m)
	{
		std::vector<double> lo(nl.n_sub), hi(nl.n_sub);
		for (std::size_t n = 0; n < nl.n_sub; ++n)
		{
			hi[n] = std::min(peak(m, n), nl.constraint.slot_cap(m, n));
			lo[n] = std::min(lower(m, n), hi[n]);
		}
		double const budget = nl.constraint.is_per_bs() ? nl.constraint.bs_limits()[m] : infinity;
		auto res = budgeted_concave_allocation([&](std::size_t n, double x) { return deriv(m, n, x); }, lo, hi, budget);
		std::copy(res.powers.begin(), res.powers.end(), p.row(m).begin());
	}
	return p;
}

} // namespace detail

/// Noise-limited Sum-EE (cross gains ignored).
inline SolveResult<Allocation> solve_sumee_nl(NetworkInstance const& inst, SumEeOptions const& opts = {})
{
	validate(inst);
	opts.validate();
	NetworkInstance const nl = decoupled(inst);
	PowerMatrix p = detail::max_power_matrix(nl);
	Schedule k = best_schedule(nl, p, ScheduleRule::weighted_rate);
	detail::OuterTracker tr(opts, sum_ee(nl, {p, k}));
	double const bw = nl.bandwidth_hz;
	Matrix<double> const zeros(nl.m_bs, nl.n_sub, 0.0);

	while (true)
	{
		Schedule const kn = detail::nl_schedule(nl, p, ScheduleRule::weighted_rate);
		if (sum_ee(nl, {p, kn}) >= sum_ee(nl, {p, k}))
		{
			k = kn;
		}
		auto deriv = [&](std::size_t m, std::size_t n, double x) {
			double const g = nl.gains(m, k(m, n), n);
			double const cost = nl.theta(m, n)+nl.gamma(m, n)*x;
			double const w = nl.weights(k(m, n), n);
			return w*bw*(g/((1.0+g*x)*std::numbers::ln2*cost)-nl.gamma(m, n)*std::log2(1.0+g*x)/(cost*cost));
		};
		PowerMatrix const pn = detail::nl_concave_rows(nl, nl_caps(nl, k), zeros, deriv);
		if (sum_ee(nl, {pn, k}) >= sum_ee(nl, {p, k}))
		{
			p = pn;
		}
		if (tr.record(sum_ee(nl, {p, k}), 1))
		{
			break;
		}
	}
	tr.report.kkt_residual = sumee_kkt_residual(nl, {p, k});
	return {detail::snap_off_slots(nl, std::move(p), std::move(k)), std::move(tr.report)};
}

/**
 * Sum-EE maximization by the frozen-term iteration described above,
 * starting from full power. Dispatches to solve_sumee_nl when opts.mode is
 * noise_limited. Convergence is not guaranteed; the report says whether the
 * relative-change rule was met.
 */
inline SolveResult<Allocation> solve_sumee(NetworkInstance const& inst, SumEeOptions const& opts = {})
{
	if (opts.mode == Regime::noise_limited)
	{
		return solve_sumee_nl(inst, opts);
	}
	validate(inst);
	opts.validate();
	PowerMatrix p = detail::max_power_matrix(inst);
	Schedule k = best_schedule(inst, p, ScheduleRule::weighted_rate);
	detail::OuterTracker tr(opts, sum_ee(inst, {p, k}));

	while (true)
	{
		SumEeTerms const terms = sumee_terms(inst, {p, k});
		PowerMatrix next = p;
		for (std::size_t m = 0; m < inst.m_bs; ++m)
		{
			auto const interf = detail::interference_row(inst, next, k, m);
			auto const wf = detail::sumee_row(inst, k, terms, m, interf);
			if (opts.monotone_guard)
			{
				PowerMatrix trial = next;
				std::copy(wf.powers.begin(), wf.powers.end(), trial.row(m).begin());
				if (sum_ee(inst, {trial, k}) >= sum_ee(inst, {next, k}))
				{
					next = std::move(trial);
				}
			}
			else
			{
				std::copy(wf.powers.begin(), wf.powers.end(), next.row(m).begin());
			}
		}
		p = std::move(next);
		k = best_schedule(inst, p, ScheduleRule::weighted_rate);
		if (tr.record(sum_ee(inst, {p, k}), static_cast<int>(inst.m_bs)))
		{
			break;
		}
	}
	tr.report.kkt_residual = sumee_kkt_residual(inst, {p, k});
	return {detail::snap_off_slots(inst, std::move(p), std::move(k)), std::move(tr.report)};
}

} // namespace eeofdma

#endif // EEOFDMA_SOLVER_SUMEE_HPP
