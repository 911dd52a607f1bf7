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
 * \file eeofdma/inner.hpp
 *
 * \brief Inner-problem engines shared by the outer solvers:
 *  - Dinkelbach's parametric loop for concave-convex ratios,
 *  - a projected gradient ascent over box + per-row budget sets,
 *  - bisection waterfilling,
 *  - the fixed-point iteration of the per-subcarrier stationarity map,
 *  - a dual bisection for separable concave budget problems.
 */

#ifndef EEOFDMA_INNER_HPP
#define EEOFDMA_INNER_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <eeofdma/matrix.hpp>
#include <eeofdma/model.hpp>
#include <eeofdma/sca.hpp>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace eeofdma {

inline constexpr double infinity = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Dinkelbach
// ---------------------------------------------------------------------------

struct DinkelbachState
{
	double pi = 0;        ///< ratio parameter of the last solved subproblem
	double f_val = 0;     ///< numerator at the returned point
	double g_val = 0;     ///< denominator at the returned point
	double epsilon = 0;   ///< absolute threshold used for the exit test
	int iteration = 0;
	bool flag = false;    ///< exit test satisfied
	std::vector<double> pi_history;

	double gap() const { return f_val-pi*g_val; }
};

struct DinkelbachOptions
{
	double epsilon = 1e-6;
	/// When set, the exit threshold is epsilon * |f| (relative ratio gap).
	bool relative = true;
	int max_rounds = 30;
};

class dinkelbach_error: public std::runtime_error
{
public:
	dinkelbach_error(std::string const& what, DinkelbachState st)
	: std::runtime_error(what), state(std::move(st))
	{
	}

	DinkelbachState state;
};

template <typename Point>
struct DinkelbachResult
{
	Point point;
	DinkelbachState state;
};

/**
 * Maximizes f / g by solving max f - pi g for an increasing sequence of pi.
 *
 * \param argmax callable (pi, warm_start) -> Point maximizing f - pi g.
 *
 * On exit 0 <= f - pi g < epsilon at the returned point, and pi is the ratio
 * of the previous iterate.
 */
template <typename Point, typename F, typename G, typename Argmax>
DinkelbachResult<Point> dinkelbach(F&& f, G&& g, Argmax&& argmax, Point start, DinkelbachOptions const& opts = {})
{
	DinkelbachState st;
	Point x = std::move(start);
	for (int round = 1; round <= opts.max_rounds; ++round)
	{
		x = argmax(st.pi, x);
		double const fv = f(x);
		double const gv = g(x);
		st.iteration = round;
		st.f_val = fv;
		st.g_val = gv;
		st.epsilon = opts.relative
		             ? std::max(opts.epsilon*std::abs(fv), std::numeric_limits<double>::min())
		             : opts.epsilon;
		if (fv-st.pi*gv < st.epsilon)
		{
			st.flag = true;
			return {std::move(x), std::move(st)};
		}
		st.pi = fv/gv;
		st.pi_history.push_back(st.pi);
	}
	throw dinkelbach_error("Dinkelbach procedure did not converge", std::move(st));
}

// ---------------------------------------------------------------------------
// Box + budget sets and projected gradient ascent
// ---------------------------------------------------------------------------

/// {lower <= p <= upper, sum_n p(m, n) <= row_budget[m]} in power space.
struct BoxBudgetSet
{
	Matrix<double> lower;
	Matrix<double> upper;
	std::vector<double> row_budget; ///< +inf where a row is unconstrained

	static BoxBudgetSet for_instance(NetworkInstance const& inst)
	{
		BoxBudgetSet set{Matrix<double>(inst.m_bs, inst.n_sub),
		                 Matrix<double>(inst.m_bs, inst.n_sub),
		                 std::vector<double>(inst.m_bs, infinity)};
		for (std::size_t m = 0; m < inst.m_bs; ++m)
		{
			for (std::size_t n = 0; n < inst.n_sub; ++n)
			{
				set.lower(m, n) = power_floor(inst, m, n);
				set.upper(m, n) = inst.constraint.slot_cap(m, n);
			}
			if (inst.constraint.is_per_bs())
			{
				set.row_budget[m] = inst.constraint.bs_limits()[m];
			}
		}
		return set;
	}
};

enum class Space
{
	log_power, ///< variable q = ln p; steps scaled by p^2 in the projection metric
	linear     ///< variable p; Euclidean projection
};

struct ConcaveMaxOptions
{
	double tol = 1e-6;
	/// Objective scale for the relative stationarity test; <= 0 means |F(start)|.
	double scale = 0;
	int max_iter = 5000;
	double armijo = 1e-4;
	Space space = Space::log_power;
};

struct ConcaveMaxResult
{
	Matrix<double> x;
	double value = 0;
	double residual = 0;
	int iterations = 0;
	bool converged = false;
};

class line_search_error: public std::runtime_error
{
public:
	using std::runtime_error::runtime_error;
};

namespace detail {

/**
 * Weighted projection of y onto the set: x = clip(y - nu w, lower, upper) per
 * row, nu >= 0 the smallest value meeting the row budget.
 */
inline void project_rows(BoxBudgetSet const& set,
                         Matrix<double> const& y,
                         Matrix<double> const& w,
                         Matrix<double>& out)
{
	std::size_t const cols = y.cols();
	for (std::size_t m = 0; m < y.rows(); ++m)
	{
		auto clip_sum = [&](double nu) {
			double s = 0;
			for (std::size_t n = 0; n < cols; ++n)
			{
				s += std::clamp(y(m, n)-nu*w(m, n), set.lower(m, n), set.upper(m, n));
			}
			return s;
		};
		double const budget = set.row_budget[m];
		double nu = 0;
		if (std::isfinite(budget) && clip_sum(0) > budget)
		{
			double hi = 0;
			for (std::size_t n = 0; n < cols; ++n)
			{
				hi = std::max(hi, (y(m, n)-set.lower(m, n))/w(m, n));
			}
			double lo = 0;
			for (int it = 0; it < 200 && hi-lo > 1e-17*hi; ++it)
			{
				double const mid = 0.5*(lo+hi);
				(clip_sum(mid) > budget ? lo : hi) = mid;
			}
			nu = hi;
		}
		for (std::size_t n = 0; n < cols; ++n)
		{
			out(m, n) = std::clamp(y(m, n)-nu*w(m, n), set.lower(m, n), set.upper(m, n));
		}
	}
}

inline double max_abs(Matrix<double> const& x)
{
	double v = 0;
	for (double e : x.flat())
	{
		v = std::max(v, std::abs(e));
	}
	return v;
}

inline double dot(Matrix<double> const& a, Matrix<double> const& b)
{
	double s = 0;
	for (std::size_t i = 0; i < a.size(); ++i)
	{
		s += a.flat()[i]*b.flat()[i];
	}
	return s;
}

/// Power-space view of a point, projection weights and step direction.
struct SpaceMap
{
	Space space;

	void to_power(Matrix<double> const& x, Matrix<double>& p) const
	{
		for (std::size_t i = 0; i < x.size(); ++i)
		{
			p.flat()[i] = space == Space::log_power ? std::exp(x.flat()[i]) : x.flat()[i];
		}
	}

	void from_power(Matrix<double> const& p, Matrix<double>& x) const
	{
		for (std::size_t i = 0; i < x.size(); ++i)
		{
			x.flat()[i] = space == Space::log_power ? std::log(p.flat()[i]) : p.flat()[i];
		}
	}

	/// Power-space ascent direction and metric weights at p for gradient g.
	void direction(Matrix<double> const& p, Matrix<double> const& g, Matrix<double>& d, Matrix<double>& w) const
	{
		for (std::size_t i = 0; i < p.size(); ++i)
		{
			double const pi = p.flat()[i];
			if (space == Space::log_power)
			{
				d.flat()[i] = pi*g.flat()[i];
				w.flat()[i] = pi*pi;
			}
			else
			{
				d.flat()[i] = g.flat()[i];
				w.flat()[i] = 1.0;
			}
		}
	}

	/// First-order predicted increase sum_i g_p,i (x_i - p_i).
	double predicted(Matrix<double> const& p, Matrix<double> const& g, Matrix<double> const& pn) const
	{
		double s = 0;
		for (std::size_t i = 0; i < p.size(); ++i)
		{
			double const dp = pn.flat()[i]-p.flat()[i];
			s += space == Space::log_power ? g.flat()[i]*dp/p.flat()[i] : g.flat()[i]*dp;
		}
		return s;
	}
};

} // namespace detail

/**
 * Maximizes a concave objective over a BoxBudgetSet by projected gradient
 * ascent with Barzilai-Borwein trial steps and Armijo backtracking along the
 * projection arc. Accepted steps never decrease the objective.
 *
 * \param oracle callable (x, grad&) -> value; returns -inf (or NaN) outside
 *  its domain. x and grad live in the chosen Space.
 *
 * Throws line_search_error when no ascent step exists away from
 * stationarity, or when positive curvature (non-concavity) is observed.
 */
template <typename Oracle>
ConcaveMaxResult concave_max(Oracle&& oracle,
                             BoxBudgetSet const& set,
                             Matrix<double> const& start,
                             ConcaveMaxOptions const& opts = {})
{
	detail::SpaceMap const map{opts.space};
	std::size_t const rows = start.rows();
	std::size_t const cols = start.cols();
	Matrix<double> x(rows, cols), p(rows, cols), grad(rows, cols);
	Matrix<double> xn(rows, cols), pn(rows, cols), gn(rows, cols);
	Matrix<double> d(rows, cols), w(rows, cols), y(rows, cols);

	// feasible start
	map.to_power(start, p);
	{
		Matrix<double> const ones(rows, cols, 1.0);
		detail::project_rows(set, p, ones, pn);
		p = pn;
	}
	map.from_power(p, x);

	ConcaveMaxResult res;
	double value = oracle(x, grad);
	if (!std::isfinite(value))
	{
		throw std::invalid_argument("concave_max: start point outside the objective domain");
	}
	double const scale = opts.scale > 0 ? opts.scale : std::max(std::abs(value), std::numeric_limits<double>::min());

	auto step = [&](double t, Matrix<double> const& base_p, Matrix<double>& out_p) {
		for (std::size_t i = 0; i < base_p.size(); ++i)
		{
			y.flat()[i] = base_p.flat()[i]+t*d.flat()[i];
		}
		detail::project_rows(set, y, w, out_p);
	};

	auto residual_at = [&]() {
		double const gmax = detail::max_abs(grad);
		if (gmax == 0)
		{
			return 0.0;
		}
		double const tr = 1e-3/gmax;
		map.direction(p, grad, d, w);
		step(tr, p, pn);
		double r = 0;
		for (std::size_t i = 0; i < p.size(); ++i)
		{
			double const dx = opts.space == Space::log_power
			                  ? std::log(pn.flat()[i]/p.flat()[i])
			                  : pn.flat()[i]-p.flat()[i];
			r = std::max(r, std::abs(dx)/tr);
		}
		return r/scale;
	};

	double t = 1.0/std::max(detail::max_abs(grad), std::numeric_limits<double>::min());
	int stalled = 0;
	int it = 0;
	for (; it < opts.max_iter; ++it)
	{
		res.residual = residual_at();
		if (res.residual <= opts.tol)
		{
			res.converged = true;
			break;
		}
		map.direction(p, grad, d, w);
		bool accepted = false;
		double new_value = value;
		double pred = 0;
		double trial = t;
		for (int ls = 0; ls < 80; ++ls, trial *= 0.5)
		{
			step(trial, p, pn);
			pred = map.predicted(p, grad, pn);
			if (pred <= 0)
			{
				break;
			}
			map.from_power(pn, xn);
			new_value = oracle(xn, gn);
			if (std::isfinite(new_value) && new_value >= value+opts.armijo*pred)
			{
				accepted = true;
				break;
			}
		}
		if (!accepted)
		{
			// no representable ascent step: stationary to working precision
			if (pred <= 1e-13*scale || res.residual <= 1e3*opts.tol)
			{
				res.converged = res.residual <= 1e3*opts.tol;
				break;
			}
			throw line_search_error("concave_max: line search failed (objective not concave?)");
		}

		double ss = 0, sy = 0, yy = 0;
		for (std::size_t i = 0; i < x.size(); ++i)
		{
			double const s = xn.flat()[i]-x.flat()[i];
			double const yv = gn.flat()[i]-grad.flat()[i];
			ss += s*s;
			sy += s*yv;
			yy += yv*yv;
		}
		if (sy > 1e-3*std::sqrt(ss*yy) && std::sqrt(yy) > 1e-8*scale)
		{
			throw line_search_error("concave_max: positive curvature detected (objective not concave)");
		}
		t = sy < 0 ? std::clamp(ss/(-sy), 1e-30, 1e30) : 2*trial;

		stalled = (new_value-value <= 1e-15*scale) ? stalled+1 : 0;
		x = xn;
		p = pn;
		grad = gn;
		value = new_value;
		if (stalled >= 20)
		{
			res.residual = residual_at();
			res.converged = res.residual <= 1e3*opts.tol;
			++it;
			break;
		}
	}
	if (it == opts.max_iter)
	{
		res.residual = residual_at();
		res.converged = res.residual <= opts.tol;
	}
	res.x = std::move(x);
	res.value = value;
	res.iterations = it;
	return res;
}

// ---------------------------------------------------------------------------
// Waterfilling
// ---------------------------------------------------------------------------

struct WaterfillResult
{
	std::vector<double> powers;
	double lambda = 0;
	bool binding = false;
};

/**
 * Solves p_n = clamp(a_n / (lambda + d_n) - b_n, 0, cap_n) with
 * sum_n p_n <= budget and lambda (budget - sum p) = 0, by bisection on
 * lambda. budget may be +inf; a slot with lambda + d_n = 0 takes its cap.
 */
inline WaterfillResult waterfill_bisect(std::span<double const> a,
                                        std::span<double const> b,
                                        std::span<double const> d,
                                        double budget,
                                        std::optional<std::span<double const>> caps = std::nullopt)
{
	std::size_t const n = a.size();
	if (b.size() != n || d.size() != n || (caps && caps->size() != n))
	{
		throw std::invalid_argument("waterfill: size mismatch");
	}
	if (!(budget > 0))
	{
		throw std::invalid_argument("waterfill: budget must be positive");
	}
	for (std::size_t i = 0; i < n; ++i)
	{
		if (!(a[i] >= 0) || !(b[i] >= 0) || !(d[i] >= 0))
		{
			throw std::invalid_argument("waterfill: levels, offsets and constants must be non-negative");
		}
	}
	WaterfillResult res;
	res.powers.assign(n, 0.0);
	auto fill = [&](double lambda, std::vector<double>& out) {
		double s = 0;
		for (std::size_t i = 0; i < n; ++i)
		{
			double const cap = caps ? (*caps)[i] : infinity;
			double const den = lambda+d[i];
			double v = 0;
			if (a[i] > 0)
			{
				v = den > 0 ? a[i]/den-b[i] : infinity;
			}
			v = std::min(std::max(v, 0.0), cap);
			out[i] = v;
			s += v;
		}
		return s;
	};

	double const s0 = fill(0.0, res.powers);
	if (s0 <= budget)
	{
		res.lambda = 0;
		res.binding = std::isfinite(budget) && s0 >= budget*(1-1e-9);
		return res;
	}
	std::vector<double> tmp(n);
	double hi = 1.0;
	int grow = 0;
	while (fill(hi, tmp) > budget)
	{
		hi *= 2;
		if (++grow > 4000 || !std::isfinite(hi))
		{
			throw std::runtime_error("waterfill: could not bracket the multiplier");
		}
	}
	double lo = 0;
	double s_hi = fill(hi, tmp);
	for (int it = 0; it < 400; ++it)
	{
		if (budget-s_hi <= 1e-13*budget || hi-lo <= 1e-17*hi)
		{
			break;
		}
		double const mid = 0.5*(lo+hi);
		double const s = fill(mid, tmp);
		if (s > budget)
		{
			lo = mid;
		}
		else
		{
			hi = mid;
			s_hi = s;
		}
	}
	fill(hi, res.powers);
	res.lambda = hi;
	res.binding = true;
	return res;
}

// ---------------------------------------------------------------------------
// Per-subcarrier fixed point
// ---------------------------------------------------------------------------

/**
 * Right-hand side of the per-subcarrier stationarity condition of
 * max f - pi g (without the cap):
 *
 *   alpha_m B / (gamma_m pi ln2 + B sum_{j != m} alpha_j G_{m,k(j)} / (1 + I_j(p))).
 *
 * A zero denominator yields +inf.
 */
inline Matrix<double> interference_map(NetworkInstance const& inst,
                                       Schedule const& k,
                                       ScaCoefficients const& c,
                                       double pi,
                                       PowerMatrix const& p)
{
	auto const st = detail::link_state(inst, p, k);
	double const bw = inst.bandwidth_hz;
	Matrix<double> out(inst.m_bs, inst.n_sub);
	for (std::size_t n = 0; n < inst.n_sub; ++n)
	{
		for (std::size_t m = 0; m < inst.m_bs; ++m)
		{
			double leak = 0;
			for (std::size_t j = 0; j < inst.m_bs; ++j)
			{
				if (j != m && c.alpha(j, n) != 0)
				{
					leak += c.alpha(j, n)*inst.gains(m, k(j, n), n)/(1.0+st.interf(j, n));
				}
			}
			double const num = c.alpha(m, n)*bw;
			double const den = inst.gamma(m, n)*pi*std::numbers::ln2+bw*leak;
			out(m, n) = num == 0 ? 0.0 : (den > 0 ? num/den : infinity);
		}
	}
	return out;
}

struct FixedPointResult
{
	PowerMatrix power;
	int iterations = 0;
};

class fixed_point_error: public std::runtime_error
{
public:
	using std::runtime_error::runtime_error;
};

/**
 * Fixed point of the stationarity map over a box + budget set. Each sweep
 * freezes the leakage at the current powers and solves every row as
 *
 *   p_n = clamp((B alpha_n / ln2) / (gamma_n pi + lambda + (B / ln2) leak_n), lower_n, upper_n)
 *
 * with lambda >= 0 the row's budget multiplier. Without budgets this is the
 * capped interference map. Stops when the largest relative change is below
 * tol; throws fixed_point_error after max_iter sweeps.
 */
inline FixedPointResult interference_fixed_point(NetworkInstance const& inst,
                                                 Schedule const& k,
                                                 ScaCoefficients const& c,
                                                 double pi,
                                                 BoxBudgetSet const& set,
                                                 double tol = 1e-8,
                                                 std::optional<PowerMatrix> start = std::nullopt,
                                                 int max_iter = 10000)
{
	if (!(pi >= 0))
	{
		throw std::invalid_argument("fixed point: pi must be non-negative");
	}
	std::size_t const M = inst.m_bs, N = inst.n_sub;
	double const scale = inst.bandwidth_hz/std::numbers::ln2;
	FixedPointResult res;
	res.power = start ? *start : set.upper;
	std::vector<double> a(N), b(N, 0.0), d(N), caps(N);
	PowerMatrix next(M, N);
	for (int it = 1; it <= max_iter; ++it)
	{
		auto const st = detail::link_state(inst, res.power, k);
		for (std::size_t m = 0; m < M; ++m)
		{
			for (std::size_t n = 0; n < N; ++n)
			{
				double leak = 0;
				for (std::size_t j = 0; j < M; ++j)
				{
					if (j != m && c.alpha(j, n) != 0)
					{
						leak += c.alpha(j, n)*inst.gains(m, k(j, n), n)/(1.0+st.interf(j, n));
					}
				}
				a[n] = scale*c.alpha(m, n);
				d[n] = inst.gamma(m, n)*pi+scale*leak;
				caps[n] = set.upper(m, n);
			}
			double const budget = set.row_budget[m];
			if (std::isfinite(budget))
			{
				auto const wf = waterfill_bisect(a, b, d, budget, std::span<double const>(caps));
				std::copy(wf.powers.begin(), wf.powers.end(), next.row(m).begin());
			}
			else
			{
				for (std::size_t n = 0; n < N; ++n)
				{
					next(m, n) = a[n] == 0 ? 0.0 : (d[n] > 0 ? std::min(a[n]/d[n], caps[n]) : caps[n]);
				}
			}
		}
		double change = 0;
		for (std::size_t m = 0; m < M; ++m)
		{
			for (std::size_t n = 0; n < N; ++n)
			{
				double const v = std::max(next(m, n), set.lower(m, n));
				double const old = res.power(m, n);
				change = std::max(change, std::abs(v-old)/std::max(v, old));
				next(m, n) = v;
			}
		}
		std::swap(res.power, next);
		res.iterations = it;
		if (change <= tol)
		{
			return res;
		}
	}
	throw fixed_point_error("fixed point iteration exceeded its iteration cap");
}

/// Per-subcarrier form: caps only, floors at power_floor_ratio * cap.
inline FixedPointResult interference_fixed_point(NetworkInstance const& inst,
                                                 Schedule const& k,
                                                 ScaCoefficients const& c,
                                                 double pi,
                                                 Matrix<double> const& caps,
                                                 double tol = 1e-8,
                                                 std::optional<PowerMatrix> start = std::nullopt,
                                                 int max_iter = 10000)
{
	BoxBudgetSet set{Matrix<double>(caps.rows(), caps.cols()), caps, std::vector<double>(caps.rows(), infinity)};
	for (std::size_t i = 0; i < caps.size(); ++i)
	{
		set.lower.flat()[i] = power_floor_ratio*caps.flat()[i];
	}
	return interference_fixed_point(inst, k, c, pi, set, tol, std::move(start), max_iter);
}

// ---------------------------------------------------------------------------
// Separable concave budget allocation
// ---------------------------------------------------------------------------

/**
 * Maximizes sum_n phi_n(p_n) subject to sum_n p_n <= budget and
 * lower_n <= p_n <= upper_n, each phi_n concave on its box. deriv(n, p)
 * returns phi_n'(p), non-increasing in p. Solved by bisection on the budget
 * multiplier with an inner bisection inverting each derivative.
 */
template <typename Deriv>
WaterfillResult budgeted_concave_allocation(Deriv&& deriv,
                                            std::span<double const> lower,
                                            std::span<double const> upper,
                                            double budget)
{
	std::size_t const n = lower.size();
	WaterfillResult res;
	res.powers.assign(n, 0.0);
	auto slot_power = [&](std::size_t i, double lambda) {
		if (deriv(i, upper[i]) >= lambda)
		{
			return upper[i];
		}
		if (deriv(i, lower[i]) <= lambda)
		{
			return lower[i];
		}
		double lo = lower[i], hi = upper[i];
		for (int it = 0; it < 200 && hi-lo > 1e-15*hi; ++it)
		{
			double const mid = 0.5*(lo+hi);
			(deriv(i, mid) > lambda ? lo : hi) = mid;
		}
		return lo;
	};
	auto fill = [&](double lambda, std::vector<double>& out) {
		double s = 0;
		for (std::size_t i = 0; i < n; ++i)
		{
			out[i] = slot_power(i, lambda);
			s += out[i];
		}
		return s;
	};
	if (fill(0.0, res.powers) <= budget)
	{
		return res;
	}
	std::vector<double> tmp(n);
	double hi = 1.0;
	for (int grow = 0; fill(hi, tmp) > budget; ++grow)
	{
		if (grow > 4000)
		{
			throw std::runtime_error("budgeted allocation: could not bracket the multiplier");
		}
		hi *= 2;
	}
	double lo = 0;
	for (int it = 0; it < 200 && hi-lo > 1e-15*hi; ++it)
	{
		double const mid = 0.5*(lo+hi);
		(fill(mid, tmp) > budget ? lo : hi) = mid;
	}
	fill(hi, res.powers);
	res.lambda = hi;
	res.binding = true;
	return res;
}

} // namespace eeofdma

#endif // EEOFDMA_INNER_HPP
