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
 * \file eeofdma/model.hpp
 *
 * \brief Network instance, allocations and the rate / power / energy
 *  efficiency models of a coordinated downlink OFDMA cluster.
 *
 * Gains are stored noise-normalized, G = |H|^2 / N, so the SINR of BS m
 * serving user s on subcarrier n is
 *
 *   p_m G_{m,s} / (1 + sum_{l != m} p_l G_{l,s}).
 *
 * Three figures of merit are evaluated:
 *  - GEE: total rate over total consumed power,
 *  - Sum-EE: weighted sum of the per-slot efficiencies R / (theta + gamma p),
 *  - Prod-EE: weighted product of the per-slot efficiencies (handled in the
 *    log domain).
 */

#ifndef EEOFDMA_MODEL_HPP
#define EEOFDMA_MODEL_HPP

#include <cmath>
#include <cstddef>
#include <eeofdma/matrix.hpp>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace eeofdma {

/// Powers below this level are reported as exactly zero.
inline constexpr double reported_zero_power = 1e-15;

class PowerConstraint
{
public:
	enum class Kind { per_bs, per_subcarrier };

	PowerConstraint() = default;

	/// Sum over subcarriers of p[m][n] <= pmax[m].
	static PowerConstraint per_bs(std::vector<double> pmax)
	{
		PowerConstraint c;
		c.limits_ = std::move(pmax);
		return c;
	}

	/// p[m][n] <= pmax(m, n).
	static PowerConstraint per_subcarrier(Matrix<double> pmax)
	{
		PowerConstraint c;
		c.limits_ = std::move(pmax);
		return c;
	}

	Kind kind() const noexcept
	{
		return limits_.index() == 0 ? Kind::per_bs : Kind::per_subcarrier;
	}

	bool is_per_bs() const noexcept { return kind() == Kind::per_bs; }

	std::vector<double> const& bs_limits() const { return std::get<0>(limits_); }
	Matrix<double> const& slot_limits() const { return std::get<1>(limits_); }

	/// Largest power a single slot may carry.
	double slot_cap(std::size_t m, std::size_t n) const
	{
		return is_per_bs() ? bs_limits()[m] : slot_limits()(m, n);
	}

	/// Share of the budget attributed to one slot (even split under per-BS).
	double slot_budget(std::size_t m, std::size_t n, std::size_t n_sub) const
	{
		return is_per_bs() ? bs_limits()[m]/static_cast<double>(n_sub) : slot_limits()(m, n);
	}

	/// Total power BS m may radiate.
	double bs_total(std::size_t m) const
	{
		if (is_per_bs())
		{
			return bs_limits()[m];
		}
		double s = 0;
		for (double v : slot_limits().row(m))
		{
			s += v;
		}
		return s;
	}

	void validate(std::size_t m_bs, std::size_t n_sub) const
	{
		auto positive = [](double v) { return std::isfinite(v) && v > 0; };
		if (is_per_bs())
		{
			if (bs_limits().size() != m_bs)
			{
				throw std::invalid_argument("per-BS power limits must have one entry per BS");
			}
			for (double v : bs_limits())
			{
				if (!positive(v))
				{
					throw std::invalid_argument("power limits must be positive and finite");
				}
			}
		}
		else
		{
			auto const& lim = slot_limits();
			if (lim.rows() != m_bs || lim.cols() != n_sub)
			{
				throw std::invalid_argument("per-subcarrier power limits must be M x N");
			}
			for (double v : lim.flat())
			{
				if (!positive(v))
				{
					throw std::invalid_argument("power limits must be positive and finite");
				}
			}
		}
	}

	bool satisfied_by(PowerMatrix const& p, double rel_tol = 1e-9) const
	{
		for (std::size_t m = 0; m < p.rows(); ++m)
		{
			double row_sum = 0;
			for (std::size_t n = 0; n < p.cols(); ++n)
			{
				double const v = p(m, n);
				if (!(v >= 0) || !std::isfinite(v))
				{
					return false;
				}
				if (!is_per_bs() && v > slot_limits()(m, n)*(1+rel_tol))
				{
					return false;
				}
				row_sum += v;
			}
			if (is_per_bs() && row_sum > bs_limits()[m]*(1+rel_tol))
			{
				return false;
			}
		}
		return true;
	}

private:
	std::variant<std::vector<double>, Matrix<double>> limits_ = std::vector<double>{};
};

/// Immutable problem statement for one coordinated cluster.
struct NetworkInstance
{
	std::size_t m_bs = 0;
	std::size_t n_sub = 0;
	double bandwidth_hz = 0;
	/// cells[m] lists the users served by BS m; a partition of 0..U-1.
	std::vector<std::vector<std::size_t>> cells;
	/// Noise-normalized gains in 1/W, G(q, s, n).
	GainTensor gains;
	/// Static circuit power in W, M x N.
	Matrix<double> theta;
	/// Amplifier inefficiency (>= 1), M x N.
	Matrix<double> gamma;
	PowerConstraint constraint;
	/// w(s, n): weight of user s on subcarrier n.
	Matrix<double> weights;

	std::size_t n_users() const noexcept { return gains.n_users(); }

	double gain(std::size_t q, std::size_t s, std::size_t n) const { return gains(q, s, n); }

	double weight(std::size_t s, std::size_t n) const { return weights(s, n); }

	std::size_t serving_bs(std::size_t s) const
	{
		for (std::size_t m = 0; m < cells.size(); ++m)
		{
			for (std::size_t u : cells[m])
			{
				if (u == s)
				{
					return m;
				}
			}
		}
		throw std::out_of_range("user " + std::to_string(s) + " is not served by any BS");
	}

	bool serves(std::size_t m, std::size_t s) const
	{
		for (std::size_t u : cells.at(m))
		{
			if (u == s)
			{
				return true;
			}
		}
		return false;
	}
};

/**
 * Builds an instance of the requested shape with unit power model, unit
 * weights, zero gains and a 1 W per-BS budget. Callers overwrite the fields
 * they care about.
 */
inline NetworkInstance make_instance(std::size_t m_bs,
                                     std::size_t n_sub,
                                     double bandwidth_hz,
                                     std::vector<std::vector<std::size_t>> cells)
{
	std::size_t n_users = 0;
	for (auto const& c : cells)
	{
		n_users += c.size();
	}
	NetworkInstance inst;
	inst.m_bs = m_bs;
	inst.n_sub = n_sub;
	inst.bandwidth_hz = bandwidth_hz;
	inst.cells = std::move(cells);
	inst.gains = GainTensor(m_bs, n_users, n_sub, 0.0);
	inst.theta = Matrix<double>(m_bs, n_sub, 1.0);
	inst.gamma = Matrix<double>(m_bs, n_sub, 1.0);
	inst.constraint = PowerConstraint::per_bs(std::vector<double>(m_bs, 1.0));
	inst.weights = Matrix<double>(n_users, n_sub, 1.0);
	return inst;
}

/// Throws std::invalid_argument describing the first violated invariant.
inline void validate(NetworkInstance const& inst)
{
	if (inst.m_bs == 0 || inst.n_sub == 0)
	{
		throw std::invalid_argument("instance needs at least one BS and one subcarrier");
	}
	if (!(inst.bandwidth_hz > 0) || !std::isfinite(inst.bandwidth_hz))
	{
		throw std::invalid_argument("bandwidth must be positive");
	}
	if (inst.cells.size() != inst.m_bs)
	{
		throw std::invalid_argument("cells must list one user set per BS");
	}
	std::size_t const n_users = inst.gains.n_users();
	std::vector<int> seen(n_users, 0);
	for (auto const& cell : inst.cells)
	{
		if (cell.empty())
		{
			throw std::invalid_argument("every BS must serve at least one user");
		}
		for (std::size_t s : cell)
		{
			if (s >= n_users)
			{
				throw std::invalid_argument("cell lists an unknown user");
			}
			++seen[s];
		}
	}
	for (int c : seen)
	{
		if (c != 1)
		{
			throw std::invalid_argument("cells must partition the users");
		}
	}
	if (inst.gains.n_tx() != inst.m_bs || inst.gains.n_sub() != inst.n_sub)
	{
		throw std::invalid_argument("gain tensor shape mismatch");
	}
	for (double g : inst.gains.flat())
	{
		if (!std::isfinite(g) || g < 0)
		{
			throw std::invalid_argument("gains must be finite and non-negative");
		}
	}
	auto check_grid = [&](Matrix<double> const& x, std::size_t rows, char const* what, auto ok) {
		if (x.rows() != rows || x.cols() != inst.n_sub)
		{
			throw std::invalid_argument(std::string(what) + " has the wrong shape");
		}
		for (double v : x.flat())
		{
			if (!std::isfinite(v) || !ok(v))
			{
				throw std::invalid_argument(std::string(what) + " out of range");
			}
		}
	};
	check_grid(inst.theta, inst.m_bs, "theta", [](double v) { return v > 0; });
	check_grid(inst.gamma, inst.m_bs, "gamma", [](double v) { return v >= 1; });
	check_grid(inst.weights, n_users, "weights", [](double v) { return v > 0; });
	inst.constraint.validate(inst.m_bs, inst.n_sub);
}

/// Copy of the instance with every cross-BS gain zeroed (noise-limited view).
inline NetworkInstance decoupled(NetworkInstance inst)
{
	for (std::size_t q = 0; q < inst.m_bs; ++q)
	{
		for (std::size_t s = 0; s < inst.n_users(); ++s)
		{
			if (inst.serves(q, s))
			{
				continue;
			}
			for (std::size_t n = 0; n < inst.n_sub; ++n)
			{
				inst.gains(q, s, n) = 0;
			}
		}
	}
	return inst;
}

/// Candidate solution: per-slot power in W and scheduled user.
struct Allocation
{
	PowerMatrix power;
	Schedule schedule;

	/// Power of slot (m, n) with sub-1e-15 W values reported as zero.
	double power_at(std::size_t m, std::size_t n) const
	{
		double const v = power(m, n);
		return v < reported_zero_power ? 0.0 : v;
	}

	std::size_t user_at(std::size_t m, std::size_t n) const { return schedule(m, n); }
};

inline void validate(NetworkInstance const& inst, Allocation const& alloc, double rel_tol = 1e-9)
{
	if (alloc.power.rows() != inst.m_bs || alloc.power.cols() != inst.n_sub
	    || !alloc.power.same_shape(Matrix<double>(alloc.schedule.rows(), alloc.schedule.cols())))
	{
		throw std::invalid_argument("allocation shape mismatch");
	}
	if (!inst.constraint.satisfied_by(alloc.power, rel_tol))
	{
		throw std::invalid_argument("allocation violates the power constraint");
	}
	for (std::size_t m = 0; m < inst.m_bs; ++m)
	{
		for (std::size_t n = 0; n < inst.n_sub; ++n)
		{
			if (!inst.serves(m, alloc.schedule(m, n)))
			{
				throw std::invalid_argument("scheduled user not served by its BS");
			}
		}
	}
}

namespace detail {

/// Interference seen by user s on subcarrier n when BS m is its server.
inline double interference(NetworkInstance const& inst,
                           PowerMatrix const& p,
                           std::size_t m,
                           std::size_t s,
                           std::size_t n)
{
	double acc = 0;
	for (std::size_t l = 0; l < inst.m_bs; ++l)
	{
		if (l != m)
		{
			acc += p(l, n)*inst.gains(l, s, n);
		}
	}
	return acc;
}

inline double sinr(NetworkInstance const& inst,
                   PowerMatrix const& p,
                   std::size_t m,
                   std::size_t s,
                   std::size_t n)
{
	return p(m, n)*inst.gains(m, s, n)/(1.0+interference(inst, p, m, s, n));
}

inline double rate_of_sinr(double bandwidth_hz, double z)
{
	return bandwidth_hz*std::log1p(z)/std::numbers::ln2;
}

inline double consumed(NetworkInstance const& inst, PowerMatrix const& p, std::size_t m, std::size_t n)
{
	return inst.theta(m, n)+inst.gamma(m, n)*p(m, n);
}

inline void check_indices(NetworkInstance const& inst,
                          PowerMatrix const& p,
                          std::size_t m,
                          std::size_t s,
                          std::size_t n)
{
	if (m >= inst.m_bs || n >= inst.n_sub || s >= inst.n_users())
	{
		throw std::out_of_range("BS, user or subcarrier index out of range");
	}
	if (p.rows() != inst.m_bs || p.cols() != inst.n_sub)
	{
		throw std::invalid_argument("power matrix shape mismatch");
	}
	if (!inst.serves(m, s))
	{
		throw std::invalid_argument("user " + std::to_string(s) + " is not served by BS " + std::to_string(m));
	}
}

inline void check_shape(NetworkInstance const& inst, PowerMatrix const& p)
{
	if (p.rows() != inst.m_bs || p.cols() != inst.n_sub)
	{
		throw std::invalid_argument("power matrix shape mismatch");
	}
}

} // namespace detail

/// SINR of BS m serving user s on subcarrier n.
inline double sinr(NetworkInstance const& inst,
                   PowerMatrix const& p,
                   std::size_t m,
                   std::size_t s,
                   std::size_t n)
{
	detail::check_indices(inst, p, m, s, n);
	return detail::sinr(inst, p, m, s, n);
}

/// Achievable rate in bit/s.
inline double rate(NetworkInstance const& inst,
                   PowerMatrix const& p,
                   std::size_t m,
                   std::size_t s,
                   std::size_t n)
{
	return detail::rate_of_sinr(inst.bandwidth_hz, sinr(inst, p, m, s, n));
}

/// Rate of the user scheduled on slot (m, n).
inline double slot_rate(NetworkInstance const& inst, Allocation const& a, std::size_t m, std::size_t n)
{
	return detail::rate_of_sinr(inst.bandwidth_hz, detail::sinr(inst, a.power, m, a.schedule(m, n), n));
}

/// R / (theta + gamma p) for slot (m, n), in bit/s/W.
inline double slot_efficiency(NetworkInstance const& inst, Allocation const& a, std::size_t m, std::size_t n)
{
	return slot_rate(inst, a, m, n)/detail::consumed(inst, a.power, m, n);
}

/// Network power consumption in W.
inline double consumed_power_total(NetworkInstance const& inst, PowerMatrix const& p)
{
	detail::check_shape(inst, p);
	double acc = 0;
	for (std::size_t m = 0; m < inst.m_bs; ++m)
	{
		for (std::size_t n = 0; n < inst.n_sub; ++n)
		{
			acc += detail::consumed(inst, p, m, n);
		}
	}
	return acc;
}

inline double sum_rate(NetworkInstance const& inst, Allocation const& a)
{
	detail::check_shape(inst, a.power);
	double acc = 0;
	for (std::size_t m = 0; m < inst.m_bs; ++m)
	{
		for (std::size_t n = 0; n < inst.n_sub; ++n)
		{
			acc += slot_rate(inst, a, m, n);
		}
	}
	return acc;
}

/// Global energy efficiency in bit/s/W.
inline double gee(NetworkInstance const& inst, Allocation const& a)
{
	return sum_rate(inst, a)/consumed_power_total(inst, a.power);
}

/// Weighted sum of per-slot efficiencies in bit/s/W.
inline double sum_ee(NetworkInstance const& inst, Allocation const& a)
{
	detail::check_shape(inst, a.power);
	double acc = 0;
	for (std::size_t m = 0; m < inst.m_bs; ++m)
	{
		for (std::size_t n = 0; n < inst.n_sub; ++n)
		{
			acc += inst.weights(a.schedule(m, n), n)*slot_efficiency(inst, a, m, n);
		}
	}
	return acc;
}

/**
 * Natural log of the weighted product of per-slot efficiencies.
 * Throws std::domain_error when a scheduled rate is zero.
 */
inline double prod_ee_log(NetworkInstance const& inst, Allocation const& a)
{
	detail::check_shape(inst, a.power);
	double acc = 0;
	for (std::size_t m = 0; m < inst.m_bs; ++m)
	{
		for (std::size_t n = 0; n < inst.n_sub; ++n)
		{
			double const r = slot_rate(inst, a, m, n);
			if (!(r > 0))
			{
				throw std::domain_error("Prod-EE undefined: slot with zero rate");
			}
			acc += inst.weights(a.schedule(m, n), n)*std::log(r/detail::consumed(inst, a.power, m, n));
		}
	}
	return acc;
}

enum class ScheduleRule
{
	rate,          ///< argmax R (GEE, sum-rate)
	weighted_rate, ///< argmax w R (Sum-EE)
	prod           ///< argmax w ln(R / (theta + gamma p)) (Prod-EE)
};

/// Per-slot optimal user for fixed powers; ties go to the lowest user index.
inline Schedule best_schedule(NetworkInstance const& inst, PowerMatrix const& p, ScheduleRule rule)
{
	detail::check_shape(inst, p);
	constexpr double neg_inf = -std::numeric_limits<double>::infinity();
	Schedule k(inst.m_bs, inst.n_sub, 0);
	for (std::size_t m = 0; m < inst.m_bs; ++m)
	{
		for (std::size_t n = 0; n < inst.n_sub; ++n)
		{
			double const cost = detail::consumed(inst, p, m, n);
			double best = neg_inf;
			std::size_t best_user = std::numeric_limits<std::size_t>::max();
			for (std::size_t s : inst.cells[m])
			{
				double const r = detail::rate_of_sinr(inst.bandwidth_hz, detail::sinr(inst, p, m, s, n));
				double score = r;
				switch (rule)
				{
					case ScheduleRule::rate:
						break;
					case ScheduleRule::weighted_rate:
						score = inst.weights(s, n)*r;
						break;
					case ScheduleRule::prod:
						score = r > 0 ? inst.weights(s, n)*std::log(r/cost) : neg_inf;
						break;
				}
				if (score > best || (score == best && s < best_user))
				{
					best = score;
					best_user = s;
				}
			}
			k(m, n) = best_user;
		}
	}
	return k;
}

} // namespace eeofdma

#endif // EEOFDMA_MODEL_HPP
