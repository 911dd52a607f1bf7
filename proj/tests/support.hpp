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


// Random instance generators shared by the test executables.

#ifndef EEOFDMA_TESTS_SUPPORT_HPP
#define EEOFDMA_TESTS_SUPPORT_HPP

#include <cmath>
#include <cstddef>
#include <eeofdma/model.hpp>
#include <random>
#include <vector>

namespace eeofdma::test_support {

struct RandomSpec
{
	std::size_t m_bs = 2;
	std::size_t n_sub = 2;
	std::size_t users_per_bs = 2;
	PowerConstraint::Kind kind = PowerConstraint::Kind::per_bs;
	bool noise_limited = false;
	double bandwidth_hz = 1.0;
};

inline std::vector<std::vector<std::size_t>> block_cells(std::size_t m_bs, std::size_t users_per_bs)
{
	std::vector<std::vector<std::size_t>> cells(m_bs);
	for (std::size_t m = 0; m < m_bs; ++m)
	{
		for (std::size_t u = 0; u < users_per_bs; ++u)
		{
			cells[m].push_back(m*users_per_bs+u);
		}
	}
	return cells;
}

/// Serving gains 10^U(-0.5, 2.5), cross gains 10^U(-1.5, 1), theta U(0.2, 1), gamma U(1, 4).
inline NetworkInstance random_instance(std::mt19937_64& rng, RandomSpec const& spec = {})
{
	std::uniform_real_distribution<double> u(0.0, 1.0);
	auto decade = [&](double lo, double hi) { return std::pow(10.0, lo+(hi-lo)*u(rng)); };
	NetworkInstance inst = make_instance(spec.m_bs, spec.n_sub, spec.bandwidth_hz, block_cells(spec.m_bs, spec.users_per_bs));
	for (std::size_t q = 0; q < spec.m_bs; ++q)
	{
		for (std::size_t s = 0; s < inst.n_users(); ++s)
		{
			for (std::size_t n = 0; n < spec.n_sub; ++n)
			{
				bool const own = inst.serves(q, s);
				inst.gains(q, s, n) = own ? decade(-0.5, 2.5) : (spec.noise_limited ? 0.0 : decade(-1.5, 1.0));
			}
		}
	}
	for (std::size_t m = 0; m < spec.m_bs; ++m)
	{
		for (std::size_t n = 0; n < spec.n_sub; ++n)
		{
			inst.theta(m, n) = 0.2+0.8*u(rng);
			inst.gamma(m, n) = 1.0+3.0*u(rng);
		}
	}
	for (double& w : inst.weights.flat())
	{
		w = 0.2+0.8*u(rng);
	}
	if (spec.kind == PowerConstraint::Kind::per_bs)
	{
		std::vector<double> pmax(spec.m_bs);
		for (double& v : pmax)
		{
			v = decade(-0.5, 1.5);
		}
		inst.constraint = PowerConstraint::per_bs(std::move(pmax));
	}
	else
	{
		Matrix<double> caps(spec.m_bs, spec.n_sub);
		for (double& v : caps.flat())
		{
			v = decade(-1.0, 1.0);
		}
		inst.constraint = PowerConstraint::per_subcarrier(std::move(caps));
	}
	return inst;
}

/// Single BS, single subcarrier, single user.
inline NetworkInstance scalar_instance(double gain, double theta, double gamma, double pmax, double bandwidth = 1.0)
{
	NetworkInstance inst = make_instance(1, 1, bandwidth, {{0}});
	inst.gains(0, 0, 0) = gain;
	inst.theta(0, 0) = theta;
	inst.gamma(0, 0) = gamma;
	inst.constraint = PowerConstraint::per_bs({pmax});
	return inst;
}

inline double rel_diff(double a, double b)
{
	return std::abs(a-b)/std::max({std::abs(a), std::abs(b), 1e-300});
}

} // namespace eeofdma::test_support

#endif // EEOFDMA_TESTS_SUPPORT_HPP
