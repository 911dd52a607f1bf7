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
 * \file eeofdma/sca.hpp
 *
 * \brief Logarithmic rate minorant used by the successive convex
 *  approximation solvers, in the log-power variable q = ln p.
 *
 * For a reference SINR zbar >= 0,
 *
 *   log2(1 + z) >= alpha log2(z) + beta,
 *   alpha = zbar / (1 + zbar),
 *   beta  = log2(1 + zbar) - alpha log2(zbar),
 *
 * with equality at z = zbar. Substituting the SINR and writing p = exp(q)
 * makes every bounded rate term concave in q, which is what the inner
 * solvers rely on.
 */

#ifndef EEOFDMA_SCA_HPP
#define EEOFDMA_SCA_HPP

#include <cmath>
#include <cstddef>
#include <eeofdma/matrix.hpp>
#include <eeofdma/model.hpp>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace eeofdma {

/// Relative level (w.r.t. the slot budget) that stands in for "off" in q-space.
inline constexpr double power_floor_ratio = 1e-12;

inline double power_floor(NetworkInstance const& inst, std::size_t m, std::size_t n)
{
	return power_floor_ratio*inst.constraint.slot_budget(m, n, inst.n_sub);
}

struct ScaCoefficients
{
	Matrix<double> alpha;
	Matrix<double> beta;
	Matrix<double> zbar;
};

/// Expansion constants of the log bound at zbar (zbar = 0 gives (0, 0)).
inline std::pair<double, double> alpha_beta(double zbar)
{
	if (!(zbar >= 0) || !std::isfinite(zbar))
	{
		throw std::invalid_argument("reference SINR must be finite and non-negative");
	}
	if (zbar == 0)
	{
		return {0.0, 0.0};
	}
	double const alpha = zbar/(1.0+zbar);
	double const beta = std::log1p(zbar)/std::numbers::ln2-alpha*std::log2(zbar);
	return {alpha, beta};
}

/// One slot of the bound: alpha log2(z) + beta, with 0 log2 0 = 0.
inline double bounded_log_rate(double alpha, double beta, double z)
{
	return alpha == 0 ? beta : alpha*std::log2(z)+beta;
}

/// Coefficients expanded at the SINRs of (p, k).
inline ScaCoefficients expand_at(NetworkInstance const& inst, PowerMatrix const& p, Schedule const& k)
{
	ScaCoefficients c{Matrix<double>(inst.m_bs, inst.n_sub),
	                  Matrix<double>(inst.m_bs, inst.n_sub),
	                  Matrix<double>(inst.m_bs, inst.n_sub)};
	for (std::size_t m = 0; m < inst.m_bs; ++m)
	{
		for (std::size_t n = 0; n < inst.n_sub; ++n)
		{
			double const z = detail::sinr(inst, p, m, k(m, n), n);
			auto [a, b] = alpha_beta(z);
			c.alpha(m, n) = a;
			c.beta(m, n) = b;
			c.zbar(m, n) = z;
		}
	}
	return c;
}

inline PowerMatrix to_power(Matrix<double> const& q)
{
	PowerMatrix p(q.rows(), q.cols());
	for (std::size_t i = 0; i < q.size(); ++i)
	{
		p.flat()[i] = std::exp(q.flat()[i]);
	}
	return p;
}

/// q = ln(max(p, floor)) so zero powers map to the slot floor.
inline Matrix<double> to_log_power(NetworkInstance const& inst, PowerMatrix const& p)
{
	Matrix<double> q(p.rows(), p.cols());
	for (std::size_t m = 0; m < p.rows(); ++m)
	{
		for (std::size_t n = 0; n < p.cols(); ++n)
		{
			q(m, n) = std::log(std::max(p(m, n), power_floor(inst, m, n)));
		}
	}
	return q;
}

struct LogPowerVector
{
	Matrix<double> q;
	Matrix<double> floor;

	static LogPowerVector from_power(NetworkInstance const& inst, PowerMatrix const& p)
	{
		LogPowerVector v{to_log_power(inst, p), Matrix<double>(inst.m_bs, inst.n_sub)};
		for (std::size_t m = 0; m < inst.m_bs; ++m)
		{
			for (std::size_t n = 0; n < inst.n_sub; ++n)
			{
				v.floor(m, n) = power_floor(inst, m, n);
			}
		}
		return v;
	}

	PowerMatrix power() const { return to_power(q); }
};

namespace detail {

/// Received useful power and interference for the scheduled users of (p, k).
struct LinkState
{
	Matrix<double> own;    ///< p_m G_{m,k(m,n)}
	Matrix<double> interf; ///< sum_{l != m} p_l G_{l,k(m,n)}

	double sinr(std::size_t m, std::size_t n) const { return own(m, n)/(1.0+interf(m, n)); }
	/// 1 + sum_l p_l G_{l,k(m,n)}
	double total(std::size_t m, std::size_t n) const { return 1.0+interf(m, n)+own(m, n); }
};

inline LinkState link_state(NetworkInstance const& inst, PowerMatrix const& p, Schedule const& k)
{
	LinkState st{Matrix<double>(inst.m_bs, inst.n_sub), Matrix<double>(inst.m_bs, inst.n_sub)};
	for (std::size_t m = 0; m < inst.m_bs; ++m)
	{
		for (std::size_t n = 0; n < inst.n_sub; ++n)
		{
			std::size_t const s = k(m, n);
			st.own(m, n) = p(m, n)*inst.gains(m, s, n);
			st.interf(m, n) = interference(inst, p, m, s, n);
		}
	}
	return st;
}

inline void check_coeffs(NetworkInstance const& inst, Schedule const& k, ScaCoefficients const& c, Matrix<double> const& q)
{
	auto ok = [&](auto const& x) { return x.rows() == inst.m_bs && x.cols() == inst.n_sub; };
	if (!ok(k) || !ok(c.alpha) || !ok(c.beta) || !ok(q))
	{
		throw std::invalid_argument("coefficient, schedule or log-power shape mismatch");
	}
}

/// d f / d q_m^n for f = B sum [alpha log2 SINR + beta], at power p.
inline Matrix<double> grad_f_p(NetworkInstance const& inst,
                               Schedule const& k,
                               ScaCoefficients const& c,
                               PowerMatrix const& p,
                               LinkState const& st)
{
	double const scale = inst.bandwidth_hz/std::numbers::ln2;
	Matrix<double> g(inst.m_bs, inst.n_sub);
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
			g(m, n) = scale*(c.alpha(m, n)-p(m, n)*leak);
		}
	}
	return g;
}

} // namespace detail

/// f = B sum_{m,n} [alpha log2 SINR + beta], in bit/s.
inline double bound_f(NetworkInstance const& inst, Schedule const& k, ScaCoefficients const& c, Matrix<double> const& q)
{
	detail::check_coeffs(inst, k, c, q);
	PowerMatrix const p = to_power(q);
	auto const st = detail::link_state(inst, p, k);
	double acc = 0;
	for (std::size_t m = 0; m < inst.m_bs; ++m)
	{
		for (std::size_t n = 0; n < inst.n_sub; ++n)
		{
			acc += bounded_log_rate(c.alpha(m, n), c.beta(m, n), st.sinr(m, n));
		}
	}
	return inst.bandwidth_hz*acc;
}

/// g = sum (theta + gamma exp(q)), in W.
inline double bound_g(NetworkInstance const& inst, Matrix<double> const& q)
{
	return consumed_power_total(inst, to_power(q));
}

inline double bound_h(NetworkInstance const& inst, Schedule const& k, ScaCoefficients const& c, Matrix<double> const& q)
{
	return bound_f(inst, k, c, q)/bound_g(inst, q);
}

/// Gradient of f with respect to q.
inline Matrix<double> grad_f_q(NetworkInstance const& inst, Schedule const& k, ScaCoefficients const& c, Matrix<double> const& q)
{
	detail::check_coeffs(inst, k, c, q);
	PowerMatrix const p = to_power(q);
	return detail::grad_f_p(inst, k, c, p, detail::link_state(inst, p, k));
}

/// Closed-form gradient of h = f / g with respect to q.
inline Matrix<double> grad_h_q(NetworkInstance const& inst, Schedule const& k, ScaCoefficients const& c, Matrix<double> const& q)
{
	PowerMatrix const p = to_power(q);
	double const g = consumed_power_total(inst, p);
	double const h = bound_f(inst, k, c, q)/g;
	Matrix<double> grad = grad_f_q(inst, k, c, q);
	for (std::size_t m = 0; m < inst.m_bs; ++m)
	{
		for (std::size_t n = 0; n < inst.n_sub; ++n)
		{
			grad(m, n) = grad(m, n)/g-inst.gamma(m, n)*p(m, n)*h/g;
		}
	}
	return grad;
}

/// Closed-form gradient of GEE(exp(q), k) with respect to q.
inline Matrix<double> grad_gee_q(NetworkInstance const& inst, Schedule const& k, Matrix<double> const& q)
{
	PowerMatrix const p = to_power(q);
	auto const st = detail::link_state(inst, p, k);
	double const g = consumed_power_total(inst, p);
	double rates = 0;
	for (std::size_t m = 0; m < inst.m_bs; ++m)
	{
		for (std::size_t n = 0; n < inst.n_sub; ++n)
		{
			rates += std::log1p(st.sinr(m, n))/std::numbers::ln2;
		}
	}
	double const value = inst.bandwidth_hz*rates/g;
	double const scale = inst.bandwidth_hz/std::numbers::ln2;
	Matrix<double> grad(inst.m_bs, inst.n_sub);
	for (std::size_t n = 0; n < inst.n_sub; ++n)
	{
		for (std::size_t m = 0; m < inst.m_bs; ++m)
		{
			double term = st.own(m, n)/st.total(m, n);
			for (std::size_t j = 0; j < inst.m_bs; ++j)
			{
				if (j != m)
				{
					term -= st.sinr(j, n)*p(m, n)*inst.gains(m, k(j, n), n)/st.total(j, n);
				}
			}
			grad(m, n) = scale*term/g-inst.gamma(m, n)*p(m, n)*value/g;
		}
	}
	return grad;
}

/**
 * Log-product bound sum w ln[(alpha log2 SINR + beta) / ((theta + gamma p) / B)].
 * Throws std::domain_error if a bounded rate term is not positive.
 */
inline double bound_phi(NetworkInstance const& inst, Schedule const& k, ScaCoefficients const& c, Matrix<double> const& q)
{
	detail::check_coeffs(inst, k, c, q);
	PowerMatrix const p = to_power(q);
	auto const st = detail::link_state(inst, p, k);
	double acc = 0;
	for (std::size_t m = 0; m < inst.m_bs; ++m)
	{
		for (std::size_t n = 0; n < inst.n_sub; ++n)
		{
			double const t = bounded_log_rate(c.alpha(m, n), c.beta(m, n), st.sinr(m, n));
			if (!(t > 0))
			{
				throw std::domain_error("log-product bound undefined: bounded rate term not positive");
			}
			double const cost = detail::consumed(inst, p, m, n)/inst.bandwidth_hz;
			acc += inst.weights(k(m, n), n)*std::log(t/cost);
		}
	}
	return acc;
}

/// Gradient of bound_phi with respect to q (caller guarantees positivity).
inline Matrix<double> grad_phi_q(NetworkInstance const& inst, Schedule const& k, ScaCoefficients const& c, Matrix<double> const& q)
{
	detail::check_coeffs(inst, k, c, q);
	PowerMatrix const p = to_power(q);
	auto const st = detail::link_state(inst, p, k);
	Matrix<double> wt(inst.m_bs, inst.n_sub); // w_j / T_j
	for (std::size_t m = 0; m < inst.m_bs; ++m)
	{
		for (std::size_t n = 0; n < inst.n_sub; ++n)
		{
			wt(m, n) = inst.weights(k(m, n), n)/bounded_log_rate(c.alpha(m, n), c.beta(m, n), st.sinr(m, n));
		}
	}
	Matrix<double> grad(inst.m_bs, inst.n_sub);
	for (std::size_t n = 0; n < inst.n_sub; ++n)
	{
		for (std::size_t m = 0; m < inst.m_bs; ++m)
		{
			double acc = wt(m, n)*c.alpha(m, n);
			for (std::size_t j = 0; j < inst.m_bs; ++j)
			{
				if (j != m && c.alpha(j, n) != 0)
				{
					acc -= wt(j, n)*c.alpha(j, n)*p(m, n)*inst.gains(m, k(j, n), n)/(1.0+st.interf(j, n));
				}
			}
			double const w = inst.weights(k(m, n), n);
			grad(m, n) = acc/std::numbers::ln2-w*inst.gamma(m, n)*p(m, n)/detail::consumed(inst, p, m, n);
		}
	}
	return grad;
}

/// Gradient of ln Prod-EE(exp(q), k) with respect to q (all rates positive).
inline Matrix<double> grad_prodee_q(NetworkInstance const& inst, Schedule const& k, Matrix<double> const& q)
{
	PowerMatrix const p = to_power(q);
	auto const st = detail::link_state(inst, p, k);
	Matrix<double> wl(inst.m_bs, inst.n_sub); // w_j / ln(1 + SINR_j)
	for (std::size_t m = 0; m < inst.m_bs; ++m)
	{
		for (std::size_t n = 0; n < inst.n_sub; ++n)
		{
			wl(m, n) = inst.weights(k(m, n), n)/std::log1p(st.sinr(m, n));
		}
	}
	Matrix<double> grad(inst.m_bs, inst.n_sub);
	for (std::size_t n = 0; n < inst.n_sub; ++n)
	{
		for (std::size_t m = 0; m < inst.m_bs; ++m)
		{
			double acc = wl(m, n)*st.own(m, n)/st.total(m, n);
			for (std::size_t j = 0; j < inst.m_bs; ++j)
			{
				if (j != m)
				{
					acc -= wl(j, n)*st.sinr(j, n)*p(m, n)*inst.gains(m, k(j, n), n)/st.total(j, n);
				}
			}
			double const w = inst.weights(k(m, n), n);
			grad(m, n) = acc-w*inst.gamma(m, n)*p(m, n)/detail::consumed(inst, p, m, n);
		}
	}
	return grad;
}

} // namespace eeofdma

#endif // EEOFDMA_SCA_HPP
