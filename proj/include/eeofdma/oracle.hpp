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
 * \file eeofdma/oracle.hpp
 *
 * \brief Exhaustive search over a per-slot power grid and all schedules, for
 *  toy instances.
 *
 * For fixed powers the best schedule is slot-separable for every objective,
 * and all objectives are sums over subcarriers of per-subcarrier terms (GEE
 * being a ratio of two such sums). The search therefore tabulates, for each
 * subcarrier and each grid point of its M powers, the best per-objective
 * contributions, then enumerates the product of these tables.
 */

#ifndef EEOFDMA_ORACLE_HPP
#define EEOFDMA_ORACLE_HPP

#include <cmath>
#include <cstddef>
#include <eeofdma/matrix.hpp>
#include <eeofdma/model.hpp>
#include <eeofdma/sca.hpp>
#include <limits>
#include <stdexcept>
#include <vector>

namespace eeofdma {

struct GridSearchResult
{
	Allocation gee_alloc;
	double gee = 0;
	Allocation sumee_alloc;
	double sumee = 0;
	Allocation prodee_alloc;
	double prodee_log = -std::numeric_limits<double>::infinity();
	Allocation sumrate_alloc;
	double sumrate = 0;
};

/// {0} (unless positive_only) followed by `points` geometric levels from p_floor to cap.
inline std::vector<double> power_grid(double floor, double cap, std::size_t points, bool positive_only)
{
	std::vector<double> g;
	if (!positive_only)
	{
		g.push_back(0.0);
	}
	if (points == 1)
	{
		g.push_back(cap);
		return g;
	}
	double const ratio = std::log(cap/floor)/static_cast<double>(points-1);
	for (std::size_t i = 0; i < points; ++i)
	{
		g.push_back(i+1 == points ? cap : floor*std::exp(ratio*static_cast<double>(i)));
	}
	return g;
}

/**
 * Best allocation per objective over the grid. Requires M N <= 4 and at most
 * 1e8 power combinations. The slot cap is P_max (per-BS, combinations over
 * budget skipped) or the per-subcarrier limit.
 */
inline GridSearchResult grid_search(NetworkInstance const& inst, std::size_t points_per_dim, bool positive_only = false)
{
	validate(inst);
	std::size_t const M = inst.m_bs, N = inst.n_sub;
	if (M*N > 4)
	{
		throw std::invalid_argument("grid_search: instance too large (M N must be <= 4)");
	}
	if (points_per_dim == 0)
	{
		throw std::invalid_argument("grid_search: need at least one grid point");
	}
	std::size_t const levels = points_per_dim+(positive_only ? 0 : 1);
	if (std::pow(static_cast<double>(levels), static_cast<double>(M*N)) > 1e8)
	{
		throw std::invalid_argument("grid_search: grid too large (more than 1e8 combinations)");
	}

	std::vector<std::vector<double>> grids(M*N); // per slot m*N + n
	for (std::size_t m = 0; m < M; ++m)
	{
		for (std::size_t n = 0; n < N; ++n)
		{
			grids[m*N+n] = power_grid(power_floor(inst, m, n), inst.constraint.slot_cap(m, n), points_per_dim, positive_only);
		}
	}

	// per subcarrier table over the M-dimensional grid
	std::size_t combos = 1;
	for (std::size_t m = 0; m < M; ++m)
	{
		combos *= levels;
	}
	struct Entry
	{
		double rate, cost, sumee, prodee;
		std::vector<std::size_t> k_rate, k_sumee, k_prod;
	};
	std::vector<std::vector<Entry>> table(N, std::vector<Entry>(combos));
	PowerMatrix p(M, N, 0.0);
	constexpr double neg_inf = -std::numeric_limits<double>::infinity();
	for (std::size_t n = 0; n < N; ++n)
	{
		for (std::size_t c = 0; c < combos; ++c)
		{
			std::size_t rem = c;
			for (std::size_t m = 0; m < M; ++m)
			{
				p(m, n) = grids[m*N+n][rem%levels];
				rem /= levels;
			}
			Entry e{0, 0, 0, 0, std::vector<std::size_t>(M), std::vector<std::size_t>(M), std::vector<std::size_t>(M)};
			for (std::size_t m = 0; m < M; ++m)
			{
				double const cost = detail::consumed(inst, p, m, n);
				double best_r = -1, best_w = -1, best_l = neg_inf;
				e.k_prod[m] = inst.cells[m].front();
				for (std::size_t s : inst.cells[m])
				{
					double const r = detail::rate_of_sinr(inst.bandwidth_hz, detail::sinr(inst, p, m, s, n));
					double const w = inst.weights(s, n);
					double const l = r > 0 ? w*std::log(r/cost) : neg_inf;
					if (r > best_r)
					{
						best_r = r;
						e.k_rate[m] = s;
					}
					if (w*r/cost > best_w)
					{
						best_w = w*r/cost;
						e.k_sumee[m] = s;
					}
					if (l > best_l)
					{
						best_l = l;
						e.k_prod[m] = s;
					}
				}
				e.rate += best_r;
				e.cost += cost;
				e.sumee += best_w;
				e.prodee += best_l;
			}
			table[n][c] = std::move(e);
		}
	}

	GridSearchResult res;
	res.gee = -1;
	res.sumee = -1;
	res.sumrate = -1;
	std::vector<std::size_t> idx(N, 0), best_gee, best_sumee, best_prod, best_rate;
	std::size_t total = 1;
	for (std::size_t n = 0; n < N; ++n)
	{
		total *= combos;
	}
	for (std::size_t t = 0; t < total; ++t)
	{
		std::size_t rem = t;
		for (std::size_t n = 0; n < N; ++n)
		{
			idx[n] = rem%combos;
			rem /= combos;
		}
		if (inst.constraint.is_per_bs())
		{
			bool ok = true;
			for (std::size_t m = 0; m < M && ok; ++m)
			{
				double s = 0;
				for (std::size_t n = 0; n < N; ++n)
				{
					std::size_t r = idx[n];
					for (std::size_t l = 0; l < m; ++l)
					{
						r /= levels;
					}
					s += grids[m*N+n][r%levels];
				}
				ok = s <= inst.constraint.bs_limits()[m]*(1+1e-12);
			}
			if (!ok)
			{
				continue;
			}
		}
		double rate = 0, cost = 0, se = 0, pe = 0;
		for (std::size_t n = 0; n < N; ++n)
		{
			Entry const& e = table[n][idx[n]];
			rate += e.rate;
			cost += e.cost;
			se += e.sumee;
			pe += e.prodee;
		}
		if (rate/cost > res.gee)
		{
			res.gee = rate/cost;
			best_gee = idx;
		}
		if (se > res.sumee)
		{
			res.sumee = se;
			best_sumee = idx;
		}
		if (pe > res.prodee_log || best_prod.empty())
		{
			res.prodee_log = std::max(pe, res.prodee_log);
			best_prod = idx;
		}
		if (rate > res.sumrate)
		{
			res.sumrate = rate;
			best_rate = idx;
		}
	}

	auto build = [&](std::vector<std::size_t> const& choice, int which) {
		Allocation a{PowerMatrix(M, N), Schedule(M, N)};
		for (std::size_t n = 0; n < N; ++n)
		{
			std::size_t rem = choice[n];
			Entry const& e = table[n][choice[n]];
			for (std::size_t m = 0; m < M; ++m)
			{
				a.power(m, n) = grids[m*N+n][rem%levels];
				rem /= levels;
				a.schedule(m, n) = which == 0 ? e.k_rate[m] : (which == 1 ? e.k_sumee[m] : e.k_prod[m]);
			}
		}
		return a;
	};
	res.gee_alloc = build(best_gee, 0);
	res.sumrate_alloc = build(best_rate, 0);
	res.sumee_alloc = build(best_sumee, 1);
	res.prodee_alloc = build(best_prod, 2);
	return res;
}

} // namespace eeofdma

#endif // EEOFDMA_ORACLE_HPP
