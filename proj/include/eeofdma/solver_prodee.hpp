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
 * \file eeofdma/solver_prodee.hpp
 *
 * \brief Weighted product of per-slot energy efficiencies, maximized in the
 *  log domain.
 *
 * Each outer iteration replaces every rate by its log bound expanded at the
 * current SINRs; the resulting log-product bound is concave in q = ln p on
 * the region where all bounded rates stay positive. That region is kept by a
 * logarithmic barrier whose weight is driven to zero over a few continuation
 * rounds, followed by a barrier-free polish. Every slot keeps a strictly
 * positive power since a silent slot sends the objective to -inf.
 */

#ifndef EEOFDMA_SOLVER_PRODEE_HPP
#define EEOFDMA_SOLVER_PRODEE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <eeofdma/inner.hpp>
#include <eeofdma/matrix.hpp>
#include <eeofdma/model.hpp>
#include <eeofdma/report.hpp>
#include <eeofdma/sca.hpp>
#include <eeofdma/solver_sumee.hpp>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace eeofdma {

struct ProdEeOptions: SolverOptions
{
	/// Barrier weights, relative to the largest user weight.
	double barrier_start = 1e-2;
	double barrier_end = 1e-8;
	double barrier_factor = 0.1;
};

namespace detail {

/// Throws std::domain_error if some slot has no served user with a positive gain.
inline void check_prodee_structure(NetworkInstance const& inst)
{
	for (std::size_t m = 0; m < inst.m_bs; ++m)
	{
		for (std::size_t n = 0; n < inst.n_sub; ++n)
		{
			bool any = false;
			for (std::size_t s : inst.cells[m])
			{
				any = any || inst.gains(m, s, n) > 0;
			}
			if (!any)
			{
				throw std::domain_error("Prod-EE infeasible: BS " + std::to_string(m) + " has no reachable user on subcarrier "
				                        + std::to_string(n));
			}
		}
	}
}

inline double max_weight(NetworkInstance const& inst)
{
	return *std::max_element(inst.weights.flat().begin(), inst.weights.flat().end());
}

/**
 * Value and q-gradient of the log-product bound plus mu sum ln(bounded rate).
 * Returns -inf when a bounded rate term is not positive.
 */
inline double barrier_phi(NetworkInstance const& inst,
                          Schedule const& k,
                          ScaCoefficients const& c,
                          double mu,
                          PowerMatrix const& p,
                          Matrix<double>& grad)
{
	auto const st = link_state(inst, p, k);
	std::size_t const M = inst.m_bs, N = inst.n_sub;
	Matrix<double> coef(M, N); // (w + mu) / T
	double value = 0;
	for (std::size_t m = 0; m < M; ++m)
	{
		for (std::size_t n = 0; n < N; ++n)
		{
			double const t = bounded_log_rate(c.alpha(m, n), c.beta(m, n), st.sinr(m, n));
			if (!(t > 0) || !std::isfinite(t))
			{
				return -std::numeric_limits<double>::infinity();
			}
			double const w = inst.weights(k(m, n), n);
			double const cost = consumed(inst, p, m, n);
			value += w*std::log(t*inst.bandwidth_hz/cost)+mu*std::log(t);
			coef(m, n) = (w+mu)/t;
		}
	}
	for (std::size_t n = 0; n < N; ++n)
	{
		for (std::size_t m = 0; m < M; ++m)
		{
			double acc = coef(m, n)*c.alpha(m, n);
			for (std::size_t j = 0; j < M; ++j)
			{
				if (j != m && c.alpha(j, n) != 0)
				{
					acc -= coef(j, n)*c.alpha(j, n)*p(m, n)*inst.gains(m, k(j, n), n)/(1.0+st.interf(j, n));
				}
			}
			double const w = inst.weights(k(m, n), n);
			grad(m, n) = acc/std::numbers::ln2-w*inst.gamma(m, n)*p(m, n)/consumed(inst, p, m, n);
		}
	}
	return value;
}

} // namespace detail

/// Noise-limited Prod-EE (cross gains ignored); every slot stays on.
inline SolveResult<Allocation> solve_prodee_nl(NetworkInstance const& inst, ProdEeOptions const& opts = {})
{
	validate(inst);
	opts.validate();
	detail::check_prodee_structure(inst);
	NetworkInstance const nl = decoupled(inst);
	PowerMatrix p = detail::max_power_matrix(nl);
	Schedule k = best_schedule(nl, p, ScheduleRule::prod);
	detail::OuterTracker tr(opts, prod_ee_log(nl, {p, k}));
	Matrix<double> floors(nl.m_bs, nl.n_sub);
	for (std::size_t m = 0; m < nl.m_bs; ++m)
	{
		for (std::size_t n = 0; n < nl.n_sub; ++n)
		{
			floors(m, n) = power_floor(nl, m, n);
		}
	}

	while (true)
	{
		Schedule const kn = best_schedule(nl, p, ScheduleRule::prod);
		if (prod_ee_log(nl, {p, kn}) >= prod_ee_log(nl, {p, k}))
		{
			k = kn;
		}
		auto deriv = [&](std::size_t m, std::size_t n, double x) {
			double const g = nl.gains(m, k(m, n), n);
			double const w = nl.weights(k(m, n), n);
			return w*(g/((1.0+g*x)*std::log1p(g*x))-nl.gamma(m, n)/(nl.theta(m, n)+nl.gamma(m, n)*x));
		};
		PowerMatrix const pn = detail::nl_concave_rows(nl, nl_caps(nl, k), floors, deriv);
		if (prod_ee_log(nl, {pn, k}) >= prod_ee_log(nl, {p, k}))
		{
			p = pn;
		}
		if (tr.record(prod_ee_log(nl, {p, k}), 1))
		{
			break;
		}
	}
	Matrix<double> const q = to_log_power(nl, p);
	tr.report.kkt_residual = kkt_residual_log(nl, p, grad_prodee_q(nl, k, q), detail::max_weight(nl));
	return {Allocation{std::move(p), std::move(k)}, std::move(tr.report)};
}

/**
 * ln Prod-EE maximization by sequential log-bound tightening from full power.
 * Dispatches to solve_prodee_nl when opts.mode is noise_limited. The trace
 * holds ln Prod-EE after each outer iteration and is non-decreasing.
 */
inline SolveResult<Allocation> solve_prodee(NetworkInstance const& inst, ProdEeOptions const& opts = {})
{
	if (opts.mode == Regime::noise_limited)
	{
		return solve_prodee_nl(inst, opts);
	}
	validate(inst);
	opts.validate();
	if (!(opts.barrier_start >= opts.barrier_end) || !(opts.barrier_end > 0) || !(opts.barrier_factor > 0)
	    || !(opts.barrier_factor < 1))
	{
		throw std::invalid_argument("invalid barrier schedule");
	}
	detail::check_prodee_structure(inst);
	PowerMatrix p = detail::max_power_matrix(inst);
	Schedule k = best_schedule(inst, p, ScheduleRule::prod);
	detail::OuterTracker tr(opts, prod_ee_log(inst, {p, k}));
	BoxBudgetSet const set = BoxBudgetSet::for_instance(inst);
	double const wmax = detail::max_weight(inst);
	double wsum = 0;
	for (std::size_t m = 0; m < inst.m_bs; ++m)
	{
		for (std::size_t n = 0; n < inst.n_sub; ++n)
		{
			wsum += inst.weights(k(m, n), n);
		}
	}

	std::vector<double> barrier;
	for (double mu = opts.barrier_start; mu >= opts.barrier_end*(1-1e-9); mu *= opts.barrier_factor)
	{
		barrier.push_back(mu*wmax);
	}
	barrier.push_back(0.0);

	Matrix<double> q = to_log_power(inst, p);
	while (true)
	{
		ScaCoefficients const c = expand_at(inst, p, k);
		Matrix<double> qn = q;
		int iterations = 0;
		try
		{
			for (double mu : barrier)
			{
				ConcaveMaxOptions co;
				co.tol = opts.inner_tol;
				co.scale = wsum;
				auto oracle = [&](Matrix<double> const& x, Matrix<double>& grad) {
					return detail::barrier_phi(inst, k, c, mu, to_power(x), grad);
				};
				auto r = concave_max(oracle, set, qn, co);
				iterations += r.iterations;
				qn = std::move(r.x);
			}
		}
		catch (std::runtime_error const& e)
		{
			throw solver_error(e.what(), tr.report);
		}
		if (bound_phi(inst, k, c, qn) >= bound_phi(inst, k, c, q))
		{
			q = std::move(qn);
		}
		p = to_power(q);
		k = best_schedule(inst, p, ScheduleRule::prod);
		if (tr.record(prod_ee_log(inst, {p, k}), iterations))
		{
			break;
		}
	}
	tr.report.kkt_residual = kkt_residual_log(inst, p, grad_prodee_q(inst, k, q), wmax);
	return {Allocation{std::move(p), std::move(k)}, std::move(tr.report)};
}

} // namespace eeofdma

#endif // EEOFDMA_SOLVER_PRODEE_HPP
