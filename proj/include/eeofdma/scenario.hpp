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
 * \file eeofdma/scenario.hpp
 *
 * \brief Random realizations of a three-cell coordinated cluster embedded in
 *  a 27-site hexagonal layout.
 *
 * Sites 0..2 are mutually adjacent and coordinate; the other 24 sites are
 * the lattice points closest to the trio's centroid and only raise the
 * noise floor of each user by their average received power:
 *
 *   N_s = F N0 B + P_out PL0 sum_j (d0 / d_js)^eta xi_js.
 *
 * Coordinated links combine distance path loss, log-normal shadowing drawn
 * per link and unit-mean exponential (Rayleigh power) fading drawn per
 * subcarrier.
 */

#ifndef EEOFDMA_SCENARIO_HPP
#define EEOFDMA_SCENARIO_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <eeofdma/matrix.hpp>
#include <eeofdma/model.hpp>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

namespace eeofdma {

inline constexpr double speed_of_light = 299792458.0;

inline double dbm_to_watt(double dbm)
{
	return std::pow(10.0, (dbm-30.0)/10.0);
}

inline double watt_to_dbm(double w)
{
	return 10.0*std::log10(w)+30.0;
}

struct ScenarioConfig
{
	std::size_t n_sub = 16;
	double bandwidth_hz = 180e3;
	std::size_t users_per_bs = 3;
	double carrier_hz = 1.8e9;
	double ref_distance_m = 100;
	double pathloss_exp = 4;
	double shadowing_sigma_db = 8;
	double noise_figure_db = 3;
	double noise_psd_dbm_hz = -174;
	/// Average per-subcarrier power of every uncoordinated site; -inf isolates the cluster.
	double p_out_dbm = -std::numeric_limits<double>::infinity();
	std::vector<double> theta_w{0.25, 0.5, 0.75};
	double gamma = 3.8;
	double inter_site_distance_m = 500;
	std::uint64_t seed = 1;
	/// Total budget: per BS, or split evenly over subcarriers.
	double pmax_dbm = 35;
	PowerConstraint::Kind constraint = PowerConstraint::Kind::per_subcarrier;
	/// Per-BS user weights; empty means 1 / (M N) everywhere.
	std::vector<double> bs_weights;

	std::size_t m_bs() const noexcept { return theta_w.size(); }

	void validate() const
	{
		auto pos = [](double v) { return std::isfinite(v) && v > 0; };
		if (n_sub == 0 || users_per_bs == 0)
		{
			throw std::invalid_argument("n_sub and users_per_bs must be positive");
		}
		if (!pos(bandwidth_hz) || !pos(carrier_hz) || !pos(ref_distance_m) || !pos(pathloss_exp)
		    || !pos(inter_site_distance_m))
		{
			throw std::invalid_argument("physical parameters must be positive");
		}
		if (!(shadowing_sigma_db >= 0) || !std::isfinite(noise_figure_db) || !std::isfinite(noise_psd_dbm_hz))
		{
			throw std::invalid_argument("invalid noise or shadowing parameter");
		}
		if (std::isnan(p_out_dbm) || p_out_dbm == std::numeric_limits<double>::infinity())
		{
			throw std::invalid_argument("p_out_dbm must be finite or -inf");
		}
		if (m_bs() != 3)
		{
			throw std::invalid_argument("the layout coordinates exactly three sites (theta_w needs 3 entries)");
		}
		for (double t : theta_w)
		{
			if (!pos(t))
			{
				throw std::invalid_argument("theta must be positive");
			}
		}
		if (!(gamma >= 1) || !std::isfinite(gamma))
		{
			throw std::invalid_argument("gamma must be >= 1");
		}
		if (!std::isfinite(pmax_dbm))
		{
			throw std::invalid_argument("pmax_dbm must be finite");
		}
		if (!bs_weights.empty())
		{
			if (bs_weights.size() != m_bs())
			{
				throw std::invalid_argument("bs_weights needs one entry per coordinated BS");
			}
			for (double w : bs_weights)
			{
				if (!pos(w))
				{
					throw std::invalid_argument("weights must be positive");
				}
			}
		}
	}
};

struct Point
{
	double x = 0;
	double y = 0;
};

inline double distance(Point a, Point b)
{
	return std::hypot(a.x-b.x, a.y-b.y);
}

/// Free-space attenuation at the reference distance, (lambda / (4 pi d0))^2.
inline double reference_path_loss(ScenarioConfig const& cfg)
{
	double const lambda = speed_of_light/cfg.carrier_hz;
	double const r = lambda/(4*std::numbers::pi*cfg.ref_distance_m);
	return r*r;
}

/// PL0 (d0 / d)^eta with d clamped to d0 from below.
inline double path_loss_linear(ScenarioConfig const& cfg, double d)
{
	if (!(d > 0))
	{
		throw std::invalid_argument("distance must be positive");
	}
	double const ratio = cfg.ref_distance_m/std::max(d, cfg.ref_distance_m);
	return reference_path_loss(cfg)*std::pow(ratio, cfg.pathloss_exp);
}

/// F N0 B in W.
inline double thermal_noise(ScenarioConfig const& cfg)
{
	return dbm_to_watt(cfg.noise_psd_dbm_hz+cfg.noise_figure_db)*cfg.bandwidth_hz;
}

/**
 * Noise variance of a user: thermal noise plus the average power received
 * from the uncoordinated sites. interferer_distances[j] and shadowing[j]
 * (linear) describe the link from uncoordinated site j.
 */
inline double noise_variance(ScenarioConfig const& cfg,
                             std::vector<double> const& interferer_distances,
                             std::vector<double> const& shadowing)
{
	double const thermal = thermal_noise(cfg);
	if (cfg.p_out_dbm == -std::numeric_limits<double>::infinity())
	{
		return thermal;
	}
	double acc = 0;
	for (std::size_t j = 0; j < interferer_distances.size(); ++j)
	{
		acc += path_loss_linear(cfg, interferer_distances[j])*shadowing.at(j);
	}
	return thermal+dbm_to_watt(cfg.p_out_dbm)*acc;
}

/// 27 sites: the coordinated trio followed by the 24 nearest lattice sites to its centroid.
inline std::vector<Point> hex_sites(double isd)
{
	double const h = isd*std::sqrt(3.0)/2;
	std::vector<Point> trio{{0, 0}, {isd, 0}, {isd/2, h}};
	Point const centroid{isd/2, h/3};
	std::vector<std::pair<std::pair<double, double>, Point>> rest;
	for (int i = -6; i <= 6; ++i)
	{
		for (int j = -6; j <= 6; ++j)
		{
			Point const pt{i*isd+j*isd/2, j*h};
			bool in_trio = (i == 0 && j == 0) || (i == 1 && j == 0) || (i == 0 && j == 1);
			if (!in_trio)
			{
				double const d = std::round(distance(pt, centroid)*1e6)/1e6;
				rest.push_back({{d, std::atan2(pt.y-centroid.y, pt.x-centroid.x)}, pt});
			}
		}
	}
	std::sort(rest.begin(), rest.end(), [](auto const& a, auto const& b) { return a.first < b.first; });
	std::vector<Point> sites = trio;
	for (std::size_t i = 0; i < 24; ++i)
	{
		sites.push_back(rest[i].second);
	}
	return sites;
}

/// Whether pt lies in the hexagonal cell (flat sides toward the neighbors) of a site.
inline bool in_hex_cell(Point site, Point pt, double isd)
{
	double const dx = pt.x-site.x;
	double const dy = pt.y-site.y;
	for (int k = 0; k < 3; ++k)
	{
		double const a = k*std::numbers::pi/3;
		if (std::abs(dx*std::cos(a)+dy*std::sin(a)) > isd/2)
		{
			return false;
		}
	}
	return true;
}

/// SplitMix64 step; decorrelates (seed, drop) pairs.
inline std::uint64_t splitmix64(std::uint64_t x)
{
	x += 0x9E3779B97F4A7C15ULL;
	x = (x ^ (x >> 30))*0xBF58476D1CE4E5B9ULL;
	x = (x ^ (x >> 27))*0x94D049BB133111EBULL;
	return x ^ (x >> 31);
}

inline std::uint64_t drop_seed(std::uint64_t seed, std::uint64_t drop)
{
	return splitmix64(splitmix64(seed)^splitmix64(drop+0x632BE59BD9B4E019ULL));
}

struct Scenario
{
	std::vector<Point> sites;          ///< 27 sites, coordinated ones first
	std::vector<Point> users;          ///< users of BS m are m*U .. m*U + U - 1
	Matrix<double> shadowing;          ///< linear, sites x users
	Matrix<double> noise_w;            ///< users x subcarriers
	NetworkInstance instance;
};

/// Applies cfg's power budget (kind and level) to an instance.
inline void apply_power_limit(NetworkInstance& inst, PowerConstraint::Kind kind, double pmax_dbm)
{
	double const pmax = dbm_to_watt(pmax_dbm);
	if (kind == PowerConstraint::Kind::per_bs)
	{
		inst.constraint = PowerConstraint::per_bs(std::vector<double>(inst.m_bs, pmax));
	}
	else
	{
		inst.constraint = PowerConstraint::per_subcarrier(Matrix<double>(inst.m_bs, inst.n_sub, pmax/static_cast<double>(inst.n_sub)));
	}
}

inline void apply_bs_weights(NetworkInstance& inst, std::vector<double> const& bs_weights)
{
	double const uniform = 1.0/static_cast<double>(inst.m_bs*inst.n_sub);
	for (std::size_t m = 0; m < inst.m_bs; ++m)
	{
		for (std::size_t s : inst.cells[m])
		{
			for (std::size_t n = 0; n < inst.n_sub; ++n)
			{
				inst.weights(s, n) = bs_weights.empty() ? uniform : bs_weights[m];
			}
		}
	}
}

/**
 * Draws one realization. The draw sequence depends only on (cfg.seed, drop)
 * and the layout sizes, so realizations are comparable across P_out and
 * P_max values.
 */
inline Scenario draw_scenario(ScenarioConfig const& cfg, std::uint64_t drop = 0)
{
	cfg.validate();
	std::mt19937_64 rng(drop_seed(cfg.seed, drop));
	std::size_t const M = cfg.m_bs();
	std::size_t const U = cfg.users_per_bs;
	std::size_t const N = cfg.n_sub;
	double const isd = cfg.inter_site_distance_m;

	Scenario sc;
	sc.sites = hex_sites(isd);
	std::size_t const n_sites = sc.sites.size();

	double const radius = isd/std::sqrt(3.0);
	std::uniform_real_distribution<double> unif(-radius, radius);
	for (std::size_t m = 0; m < M; ++m)
	{
		for (std::size_t u = 0; u < U; ++u)
		{
			Point pt;
			do
			{
				pt = {sc.sites[m].x+unif(rng), sc.sites[m].y+unif(rng)};
			} while (!in_hex_cell(sc.sites[m], pt, isd));
			sc.users.push_back(pt);
		}
	}
	std::size_t const n_users = sc.users.size();

	std::normal_distribution<double> normal(0.0, 1.0);
	sc.shadowing = Matrix<double>(n_sites, n_users);
	for (std::size_t j = 0; j < n_sites; ++j)
	{
		for (std::size_t s = 0; s < n_users; ++s)
		{
			sc.shadowing(j, s) = std::pow(10.0, cfg.shadowing_sigma_db*normal(rng)/10.0);
		}
	}
	std::exponential_distribution<double> expo(1.0);
	GainTensor fading(M, n_users, N);
	for (double& v : fading.flat())
	{
		v = expo(rng);
	}

	sc.noise_w = Matrix<double>(n_users, N);
	for (std::size_t s = 0; s < n_users; ++s)
	{
		std::vector<double> dist, shad;
		for (std::size_t j = M; j < n_sites; ++j)
		{
			dist.push_back(distance(sc.sites[j], sc.users[s]));
			shad.push_back(sc.shadowing(j, s));
		}
		double const nv = noise_variance(cfg, dist, shad);
		for (std::size_t n = 0; n < N; ++n)
		{
			sc.noise_w(s, n) = nv;
		}
	}

	std::vector<std::vector<std::size_t>> cells(M);
	for (std::size_t s = 0; s < n_users; ++s)
	{
		cells[s/U].push_back(s);
	}
	NetworkInstance inst = make_instance(M, N, cfg.bandwidth_hz, std::move(cells));
	for (std::size_t q = 0; q < M; ++q)
	{
		for (std::size_t s = 0; s < n_users; ++s)
		{
			double const large = path_loss_linear(cfg, distance(sc.sites[q], sc.users[s]))*sc.shadowing(q, s);
			for (std::size_t n = 0; n < N; ++n)
			{
				inst.gains(q, s, n) = large*fading(q, s, n)/sc.noise_w(s, n);
			}
		}
	}
	for (std::size_t m = 0; m < M; ++m)
	{
		for (std::size_t n = 0; n < N; ++n)
		{
			inst.theta(m, n) = cfg.theta_w[m];
			inst.gamma(m, n) = cfg.gamma;
		}
	}
	apply_power_limit(inst, cfg.constraint, cfg.pmax_dbm);
	apply_bs_weights(inst, cfg.bs_weights);
	validate(inst);
	sc.instance = std::move(inst);
	return sc;
}

/// (1/N) sum_n R / (theta + gamma p) over the slots of BS m.
inline double avg_bs_efficiency(NetworkInstance const& inst, Allocation const& a, std::size_t m)
{
	if (m >= inst.m_bs)
	{
		throw std::out_of_range("BS index out of range");
	}
	double acc = 0;
	for (std::size_t n = 0; n < inst.n_sub; ++n)
	{
		acc += slot_efficiency(inst, a, m, n);
	}
	return acc/static_cast<double>(inst.n_sub);
}

} // namespace eeofdma

#endif // EEOFDMA_SCENARIO_HPP
