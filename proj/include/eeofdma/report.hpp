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
 * \file eeofdma/report.hpp
 *
 * \brief Solver options, convergence bookkeeping and stationarity residuals
 *  shared by the outer solvers.
 */

#ifndef EEOFDMA_REPORT_HPP
#define EEOFDMA_REPORT_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <eeofdma/inner.hpp>
#include <eeofdma/matrix.hpp>
#include <eeofdma/model.hpp>
#include <eeofdma/sca.hpp>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace eeofdma {

enum class StopReason { tolerance, max_iter };

enum class Regime { interference, noise_limited };

inline char const* to_string(StopReason r)
{
	return r == StopReason::tolerance ? "tolerance" : "max_iter";
}

struct SolverReport
{
	/// Objective after each outer iteration (initial point excluded).
	std::vector<double> objective_trace;
	/// Objective at the initial (maximum power) point.
	double initial_objective = 0;
	int iterations = 0;
	bool converged = false;
	StopReason stop_reason = StopReason::max_iter;
	/// Scaled stationarity residual at the returned point.
	double kkt_residual = 0;
	/// Inner solver iterations spent in each outer iteration.
	std::vector<int> inner_iteration_totals;
	/// Final state of every Dinkelbach run (GEE solvers only).
	std::vector<DinkelbachState> dinkelbach_runs;
};

/// Failure inside a solve; carries the report up to the failing iteration.
class solver_error: public std::runtime_error
{
public:
	solver_error(std::string const& what, SolverReport partial)
	: std::runtime_error(what), report(std::move(partial))
	{
	}

	SolverReport report;
};

struct SolverOptions
{
	int outer_max_iter = 50;
	double rel_tol = 1e-4;
	double inner_tol = 1e-7;
	Regime mode = Regime::interference;

	void validate() const
	{
		if (outer_max_iter < 1)
		{
			throw std::invalid_argument("outer_max_iter must be at least 1");
		}
		if (!(rel_tol > 0) || !(inner_tol > 0))
		{
			throw std::invalid_argument("tolerances must be positive");
		}
	}
};

template <typename A>
struct SolveResult
{
	A allocation;
	SolverReport report;
};

namespace detail {

/// Records outer iterates and applies |f_l - f_{l-1}| / |f_{l-1}| < rel_tol.
class OuterTracker
{
public:
	OuterTracker(SolverOptions const& opts, double initial)
	: opts_(opts), prev_(initial)
	{
		report.initial_objective = initial;
	}

	/// Returns true when the loop should stop.
	bool record(double value, int inner_iterations)
	{
		report.objective_trace.push_back(value);
		report.inner_iteration_totals.push_back(inner_iterations);
		report.iterations = static_cast<int>(report.objective_trace.size());
		double const denom = std::abs(prev_);
		double const change = denom > 0 ? std::abs(value-prev_)/denom : std::abs(value-prev_);
		prev_ = value;
		if (change < opts_.rel_tol)
		{
			report.converged = true;
			report.stop_reason = StopReason::tolerance;
			return true;
		}
		if (report.iterations >= opts_.outer_max_iter)
		{
			report.converged = false;
			report.stop_reason = StopReason::max_iter;
			return true;
		}
		return false;
	}

	SolverReport report;

private:
	SolverOptions opts_;
	double prev_;
};

/// Allocation with slots at or below 10 p_floor reported as exactly zero.
inline Allocation snap_off_slots(NetworkInstance const& inst, PowerMatrix p, Schedule k)
{
	for (std::size_t m = 0; m < inst.m_bs; ++m)
	{
		for (std::size_t n = 0; n < inst.n_sub; ++n)
		{
			if (p(m, n) <= 10*power_floor(inst, m, n))
			{
				p(m, n) = 0;
			}
		}
	}
	return {std::move(p), std::move(k)};
}

inline PowerMatrix max_power_matrix(NetworkInstance const& inst)
{
	PowerMatrix p(inst.m_bs, inst.n_sub);
	for (std::size_t m = 0; m < inst.m_bs; ++m)
	{
		for (std::size_t n = 0; n < inst.n_sub; ++n)
		{
			p(m, n) = inst.constraint.slot_budget(m, n, inst.n_sub);
		}
	}
	return p;
}

} // namespace detail

/**
 * Stationarity residual of a log-power problem whose feasible set is the
 * instance's constraint plus the power floor.
 *
 * grad_q is the objective gradient with respect to q = ln p. Per-BS budgets
 * contribute lambda_m p (lambda_m fitted by nonnegative least squares when the
 * budget is tight), caps and floors contribute sign-constrained multipliers.
 * The largest violation is divided by scale.
 */
inline double kkt_residual_log(NetworkInstance const& inst,
                               PowerMatrix const& p,
                               Matrix<double> const& grad_q,
                               double scale)
{
	double worst = 0;
	for (std::size_t m = 0; m < inst.m_bs; ++m)
	{
		double lambda = 0;
		if (inst.constraint.is_per_bs())
		{
			double sum = 0, gp = 0, pp = 0;
			for (std::size_t n = 0; n < inst.n_sub; ++n)
			{
				sum += p(m, n);
				gp += grad_q(m, n)*p(m, n);
				pp += p(m, n)*p(m, n);
			}
			if (sum >= inst.constraint.bs_limits()[m]*(1-1e-7) && pp > 0)
			{
				lambda = std::max(0.0, gp/pp);
			}
		}
		for (std::size_t n = 0; n < inst.n_sub; ++n)
		{
			double const r = grad_q(m, n)-lambda*p(m, n);
			double const floor = power_floor(inst, m, n);
			bool const at_floor = p(m, n) <= floor*(1+1e-6);
			bool const at_cap = !inst.constraint.is_per_bs()
			                    && p(m, n) >= inst.constraint.slot_cap(m, n)*(1-1e-9);
			double v = std::abs(r);
			if (at_floor)
			{
				v = std::max(0.0, r);
			}
			else if (at_cap)
			{
				v = std::max(0.0, -r);
			}
			worst = std::max(worst, v);
		}
	}
	return worst/scale;
}

} // namespace eeofdma

#endif // EEOFDMA_REPORT_HPP
