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
 * \file eeofdma/harness.hpp
 *
 * \brief Experiment plumbing: INI configuration, Monte Carlo sweeps over
 *  P_max and P_out, convergence traces and CSV output.
 *
 * Configuration layout (all powers in dBm, distances in meters):
 *
 *   [scenario]  physical layout, power model, seed, constraint kind, weights,
 *               and the single (pmax_dbm, p_out_dbm) point used by `trace`
 *               and `scenario`
 *   [sweep]     objective, nl, pmax_dbm list, pout_dbm list, drops, threads
 *   [solver]    outer_max_iter, rel_tol, inner_tol, dinkelbach_eps,
 *               monotone_guard
 *   [trace]     drop
 */

#ifndef EEOFDMA_HARNESS_HPP
#define EEOFDMA_HARNESS_HPP

#include <algorithm>
#include <array>
#include <atomic>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <eeofdma/baseline.hpp>
#include <eeofdma/model.hpp>
#include <eeofdma/report.hpp>
#include <eeofdma/scenario.hpp>
#include <eeofdma/solver_gee.hpp>
#include <eeofdma/solver_prodee.hpp>
#include <eeofdma/solver_sumee.hpp>
#include <fmt/format.h>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace eeofdma {

enum class Objective { gee, sumee, prodee, sumrate, maxpower };

inline std::string to_string(Objective o)
{
	switch (o)
	{
		case Objective::gee: return "gee";
		case Objective::sumee: return "sumee";
		case Objective::prodee: return "prodee";
		case Objective::sumrate: return "sumrate";
		case Objective::maxpower: return "maxpower";
	}
	return "?";
}

inline Objective objective_from_string(std::string const& s)
{
	for (Objective o : {Objective::gee, Objective::sumee, Objective::prodee, Objective::sumrate, Objective::maxpower})
	{
		if (to_string(o) == s)
		{
			return o;
		}
	}
	throw std::invalid_argument("unknown objective '" + s + "'");
}

struct SweepSpec
{
	Objective objective = Objective::gee;
	bool nl = false;
	std::vector<double> pmax_dbm{35};
	std::vector<double> pout_dbm{-std::numeric_limits<double>::infinity()};
	std::size_t drops = 1;
	/// Worker threads; 0 picks the hardware concurrency.
	std::size_t threads = 0;

	void validate() const
	{
		if (pmax_dbm.empty() || pout_dbm.empty())
		{
			throw std::invalid_argument("pmax_dbm and pout_dbm lists must be non-empty");
		}
		if (drops < 1)
		{
			throw std::invalid_argument("drops must be at least 1");
		}
	}
};

struct SolverSettings
{
	int outer_max_iter = 50;
	double rel_tol = 1e-4;
	double inner_tol = 1e-7;
	double dinkelbach_eps = 1e-6;
	bool monotone_guard = false;
};

struct ExperimentConfig
{
	ScenarioConfig scenario;
	SweepSpec sweep;
	SolverSettings solver;
	std::size_t trace_drop = 0;
};

class config_error: public std::runtime_error
{
public:
	using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string fmt_double(double v)
{
	if (std::isinf(v))
	{
		return v < 0 ? "-inf" : "inf";
	}
	if (std::isnan(v))
	{
		return "nan";
	}
	return fmt::format("{:.17g}", v);
}

inline std::string fmt_list(std::vector<double> const& v)
{
	std::string out;
	for (std::size_t i = 0; i < v.size(); ++i)
	{
		out += (i ? ", " : "")+fmt_double(v[i]);
	}
	return out;
}

inline std::string trim(std::string s)
{
	auto const b = s.find_first_not_of(" \t\r");
	auto const e = s.find_last_not_of(" \t\r");
	return b == std::string::npos ? std::string() : s.substr(b, e-b+1);
}

/// Line number of `key` inside `[section]` in the raw text (0 if absent).
inline int line_of(std::string const& text, std::string const& section, std::string const& key)
{
	std::istringstream in(text);
	std::string line, current;
	int no = 0;
	while (std::getline(in, line))
	{
		++no;
		std::string const t = trim(line);
		if (t.empty() || t[0] == ';' || t[0] == '#')
		{
			continue;
		}
		if (t.front() == '[')
		{
			current = trim(t.substr(1, t.find(']')-1));
			continue;
		}
		if (current == section && trim(t.substr(0, t.find('='))) == key)
		{
			return no;
		}
	}
	return 0;
}

class IniReader
{
public:
	IniReader(std::string text, std::string origin)
	: text_(std::move(text)), origin_(std::move(origin))
	{
		std::istringstream in(text_);
		try
		{
			boost::property_tree::ini_parser::read_ini(in, tree_);
		}
		catch (boost::property_tree::ini_parser_error const& e)
		{
			throw config_error(fmt::format("{}:{}: {}", origin_, e.line(), e.message()));
		}
		for (auto const& [name, sec] : tree_)
		{
			if (sec.empty() && !sec.data().empty())
			{
				throw config_error(fmt::format("{}:{}: key '{}' outside any section", origin_, line_of_global(name), name));
			}
		}
	}

	[[noreturn]] void fail(std::string const& section, std::string const& key, std::string const& msg) const
	{
		throw config_error(fmt::format("{}:{}: [{}] {}: {}", origin_, line_of(text_, section, key), section, key, msg));
	}

	bool has(std::string const& section, std::string const& key) const
	{
		auto sec = tree_.get_child_optional(section);
		return sec && sec->get_child_optional(boost::property_tree::ptree::path_type(key, '\0'));
	}

	std::string raw(std::string const& section, std::string const& key) const
	{
		used_.insert(section+"\n"+key);
		return trim(tree_.get_child(section).get<std::string>(boost::property_tree::ptree::path_type(key, '\0')));
	}

	void get(std::string const& section, std::string const& key, double& out) const
	{
		if (has(section, key))
		{
			out = parse_double(section, key, raw(section, key));
		}
	}

	void get(std::string const& section, std::string const& key, std::size_t& out) const
	{
		if (has(section, key))
		{
			double const v = parse_double(section, key, raw(section, key));
			if (!(v >= 0) || v != std::floor(v) || v > 1e15)
			{
				fail(section, key, "expected a non-negative integer");
			}
			out = static_cast<std::size_t>(v);
		}
	}

	void get(std::string const& section, std::string const& key, int& out) const
	{
		std::size_t v = static_cast<std::size_t>(std::max(out, 0));
		get(section, key, v);
		out = static_cast<int>(v);
	}

	void get(std::string const& section, std::string const& key, std::uint64_t& out, int) const
	{
		if (has(section, key))
		{
			std::string const s = raw(section, key);
			try
			{
				std::size_t pos = 0;
				if (s.empty() || s[0] < '0' || s[0] > '9')
				{
					throw std::invalid_argument(s);
				}
				out = std::stoull(s, &pos);
				if (pos != s.size())
				{
					throw std::invalid_argument(s);
				}
			}
			catch (std::exception const&)
			{
				fail(section, key, "expected an unsigned integer, got '" + s + "'");
			}
		}
	}

	void get(std::string const& section, std::string const& key, bool& out) const
	{
		if (has(section, key))
		{
			std::string const s = raw(section, key);
			if (s == "true" || s == "1" || s == "yes")
			{
				out = true;
			}
			else if (s == "false" || s == "0" || s == "no")
			{
				out = false;
			}
			else
			{
				fail(section, key, "expected true or false, got '" + s + "'");
			}
		}
	}

	void get_list(std::string const& section, std::string const& key, std::vector<double>& out) const
	{
		if (!has(section, key))
		{
			return;
		}
		std::string const s = raw(section, key);
		out.clear();
		std::stringstream ss(s);
		std::string item;
		while (std::getline(ss, item, ','))
		{
			out.push_back(parse_double(section, key, trim(item)));
		}
		if (out.empty())
		{
			fail(section, key, "empty list");
		}
	}

	/// Rejects keys or sections the loader never asked for.
	void reject_unknown() const
	{
		for (auto const& [name, sec] : tree_)
		{
			for (auto const& [key, value] : sec)
			{
				if (!used_.count(name+"\n"+key))
				{
					fail(name, key, "unknown key");
				}
			}
		}
	}

private:
	double parse_double(std::string const& section, std::string const& key, std::string const& s) const
	{
		try
		{
			std::size_t pos = 0;
			double const v = std::stod(s, &pos);
			if (pos != s.size())
			{
				throw std::invalid_argument(s);
			}
			return v;
		}
		catch (std::out_of_range const&)
		{
			fail(section, key, "number out of range: '" + s + "'");
		}
		catch (std::exception const&)
		{
			fail(section, key, "expected a number, got '" + s + "'");
		}
	}

	int line_of_global(std::string const& key) const
	{
		std::istringstream in(text_);
		std::string line;
		int no = 0;
		while (std::getline(in, line))
		{
			++no;
			std::string const t = trim(line);
			if (!t.empty() && t[0] != '[' && trim(t.substr(0, t.find('='))) == key)
			{
				return no;
			}
		}
		return 0;
	}

	std::string text_;
	std::string origin_;
	boost::property_tree::ptree tree_;
	mutable std::set<std::string> used_;
};

} // namespace detail

/// Parses an experiment configuration; errors carry "origin:line:".
inline ExperimentConfig parse_config(std::string const& text, std::string const& origin = "<config>")
{
	detail::IniReader ini(text, origin);
	ExperimentConfig cfg;
	ScenarioConfig& sc = cfg.scenario;
	std::string const s = "scenario";
	ini.get(s, "n_sub", sc.n_sub);
	ini.get(s, "bandwidth_hz", sc.bandwidth_hz);
	ini.get(s, "users_per_bs", sc.users_per_bs);
	ini.get(s, "carrier_hz", sc.carrier_hz);
	ini.get(s, "ref_distance_m", sc.ref_distance_m);
	ini.get(s, "pathloss_exp", sc.pathloss_exp);
	ini.get(s, "shadowing_sigma_db", sc.shadowing_sigma_db);
	ini.get(s, "noise_figure_db", sc.noise_figure_db);
	ini.get(s, "noise_psd_dbm_hz", sc.noise_psd_dbm_hz);
	ini.get(s, "p_out_dbm", sc.p_out_dbm);
	ini.get_list(s, "theta_w", sc.theta_w);
	ini.get(s, "gamma", sc.gamma);
	ini.get(s, "inter_site_distance_m", sc.inter_site_distance_m);
	ini.get(s, "seed", sc.seed, 0);
	ini.get(s, "pmax_dbm", sc.pmax_dbm);
	if (ini.has(s, "constraint"))
	{
		std::string const v = ini.raw(s, "constraint");
		if (v == "per-bs")
		{
			sc.constraint = PowerConstraint::Kind::per_bs;
		}
		else if (v == "per-subcarrier")
		{
			sc.constraint = PowerConstraint::Kind::per_subcarrier;
		}
		else
		{
			ini.fail(s, "constraint", "expected per-bs or per-subcarrier, got '" + v + "'");
		}
	}
	if (ini.has(s, "weights"))
	{
		if (ini.raw(s, "weights") == "uniform")
		{
			sc.bs_weights.clear();
		}
		else
		{
			ini.get_list(s, "weights", sc.bs_weights);
		}
	}

	std::string const w = "sweep";
	if (ini.has(w, "objective"))
	{
		try
		{
			cfg.sweep.objective = objective_from_string(ini.raw(w, "objective"));
		}
		catch (std::invalid_argument const& e)
		{
			ini.fail(w, "objective", e.what());
		}
	}
	ini.get(w, "nl", cfg.sweep.nl);
	ini.get_list(w, "pmax_dbm", cfg.sweep.pmax_dbm);
	ini.get_list(w, "pout_dbm", cfg.sweep.pout_dbm);
	ini.get(w, "drops", cfg.sweep.drops);
	ini.get(w, "threads", cfg.sweep.threads);

	std::string const v = "solver";
	ini.get(v, "outer_max_iter", cfg.solver.outer_max_iter);
	ini.get(v, "rel_tol", cfg.solver.rel_tol);
	ini.get(v, "inner_tol", cfg.solver.inner_tol);
	ini.get(v, "dinkelbach_eps", cfg.solver.dinkelbach_eps);
	ini.get(v, "monotone_guard", cfg.solver.monotone_guard);

	ini.get("trace", "drop", cfg.trace_drop);
	ini.reject_unknown();

	try
	{
		cfg.scenario.validate();
		cfg.sweep.validate();
	}
	catch (std::invalid_argument const& e)
	{
		throw config_error(origin + ": " + e.what());
	}
	return cfg;
}

inline ExperimentConfig load_config(std::string const& path)
{
	std::ifstream in(path);
	if (!in)
	{
		throw config_error("cannot open config file '" + path + "'");
	}
	std::stringstream ss;
	ss << in.rdbuf();
	return parse_config(ss.str(), path);
}

/// INI text that parse_config maps back to an equal configuration.
inline std::string to_ini(ExperimentConfig const& cfg)
{
	using detail::fmt_double;
	ScenarioConfig const& s = cfg.scenario;
	std::string out;
	out += "[scenario]\n";
	out += fmt::format("n_sub = {}\n", s.n_sub);
	out += "bandwidth_hz = "+fmt_double(s.bandwidth_hz)+"\n";
	out += fmt::format("users_per_bs = {}\n", s.users_per_bs);
	out += "carrier_hz = "+fmt_double(s.carrier_hz)+"\n";
	out += "ref_distance_m = "+fmt_double(s.ref_distance_m)+"\n";
	out += "pathloss_exp = "+fmt_double(s.pathloss_exp)+"\n";
	out += "shadowing_sigma_db = "+fmt_double(s.shadowing_sigma_db)+"\n";
	out += "noise_figure_db = "+fmt_double(s.noise_figure_db)+"\n";
	out += "noise_psd_dbm_hz = "+fmt_double(s.noise_psd_dbm_hz)+"\n";
	out += "p_out_dbm = "+fmt_double(s.p_out_dbm)+"\n";
	out += "theta_w = "+detail::fmt_list(s.theta_w)+"\n";
	out += "gamma = "+fmt_double(s.gamma)+"\n";
	out += "inter_site_distance_m = "+fmt_double(s.inter_site_distance_m)+"\n";
	out += fmt::format("seed = {}\n", s.seed);
	out += "pmax_dbm = "+fmt_double(s.pmax_dbm)+"\n";
	out += std::string("constraint = ")+(s.constraint == PowerConstraint::Kind::per_bs ? "per-bs" : "per-subcarrier")+"\n";
	out += "weights = "+(s.bs_weights.empty() ? std::string("uniform") : detail::fmt_list(s.bs_weights))+"\n";
	out += "\n[sweep]\n";
	out += "objective = "+to_string(cfg.sweep.objective)+"\n";
	out += std::string("nl = ")+(cfg.sweep.nl ? "true" : "false")+"\n";
	out += "pmax_dbm = "+detail::fmt_list(cfg.sweep.pmax_dbm)+"\n";
	out += "pout_dbm = "+detail::fmt_list(cfg.sweep.pout_dbm)+"\n";
	out += fmt::format("drops = {}\n", cfg.sweep.drops);
	out += fmt::format("threads = {}\n", cfg.sweep.threads);
	out += "\n[solver]\n";
	out += fmt::format("outer_max_iter = {}\n", cfg.solver.outer_max_iter);
	out += "rel_tol = "+fmt_double(cfg.solver.rel_tol)+"\n";
	out += "inner_tol = "+fmt_double(cfg.solver.inner_tol)+"\n";
	out += "dinkelbach_eps = "+fmt_double(cfg.solver.dinkelbach_eps)+"\n";
	out += std::string("monotone_guard = ")+(cfg.solver.monotone_guard ? "true" : "false")+"\n";
	out += "\n[trace]\n";
	out += fmt::format("drop = {}\n", cfg.trace_drop);
	return out;
}

// ---------------------------------------------------------------------------
// Solving and metrics
// ---------------------------------------------------------------------------

/// Runs the solver for `objective`; maxpower yields an empty report.
inline SolveResult<Allocation> solve_objective(NetworkInstance const& inst,
                                               Objective objective,
                                               bool nl,
                                               SolverSettings const& s)
{
	auto base = [&](SolverOptions& o) {
		o.outer_max_iter = s.outer_max_iter;
		o.rel_tol = s.rel_tol;
		o.inner_tol = s.inner_tol;
		o.mode = nl ? Regime::noise_limited : Regime::interference;
	};
	switch (objective)
	{
		case Objective::gee:
		{
			GeeOptions o;
			base(o);
			o.dinkelbach_eps = s.dinkelbach_eps;
			return solve_gee(inst, o);
		}
		case Objective::sumee:
		{
			SumEeOptions o;
			base(o);
			o.monotone_guard = s.monotone_guard;
			return solve_sumee(inst, o);
		}
		case Objective::prodee:
		{
			ProdEeOptions o;
			base(o);
			return solve_prodee(inst, o);
		}
		case Objective::sumrate:
		{
			SolverOptions o;
			base(o);
			return solve_sumrate(inst, o);
		}
		case Objective::maxpower:
		{
			SolverReport r;
			r.converged = true;
			r.stop_reason = StopReason::tolerance;
			return {max_power(nl ? decoupled(inst) : inst), r};
		}
	}
	throw std::logic_error("unhandled objective");
}

struct SlotEeStats
{
	std::vector<double> efficiency; ///< R / (theta + gamma p) per slot, row-major (m, n)
	double mean = 0;
	double stddev = 0;              ///< population standard deviation
	std::size_t silent = 0;         ///< slots with zero power
};

inline SlotEeStats per_slot_ee_stats(NetworkInstance const& inst, Allocation const& a)
{
	SlotEeStats st;
	for (std::size_t m = 0; m < inst.m_bs; ++m)
	{
		for (std::size_t n = 0; n < inst.n_sub; ++n)
		{
			st.efficiency.push_back(slot_efficiency(inst, a, m, n));
			st.silent += a.power_at(m, n) == 0 ? 1 : 0;
		}
	}
	double const count = static_cast<double>(st.efficiency.size());
	for (double e : st.efficiency)
	{
		st.mean += e/count;
	}
	double var = 0;
	for (double e : st.efficiency)
	{
		var += (e-st.mean)*(e-st.mean)/count;
	}
	st.stddev = std::sqrt(var);
	return st;
}

/// Prod-EE itself (the weighted geometric form), 0 when some slot is silent.
inline double prod_ee_value(NetworkInstance const& inst, Allocation const& a)
{
	for (std::size_t m = 0; m < inst.m_bs; ++m)
	{
		for (std::size_t n = 0; n < inst.n_sub; ++n)
		{
			if (!(slot_rate(inst, a, m, n) > 0))
			{
				return 0.0;
			}
		}
	}
	return std::exp(prod_ee_log(inst, a));
}

struct SweepRow
{
	double pmax_dbm = 0;
	double pout_dbm = 0;
	std::string drop;       ///< drop index, or "mean" / "std" for aggregates
	std::string objective;
	double gee = 0;
	double sumee = 0;
	double prodee = 0;
	double sumrate = 0;
	std::array<double, 3> p_rad_w{};
	double ee_slot_std = 0;
	double iterations = 0;
	std::string converged;  ///< "true", "false", "error", or the success count for aggregates
	std::string error;
};

inline constexpr char const* sweep_header =
	"pmax_dbm,pout_dbm,drop,objective_name,gee,sumee,prodee,sumrate,"
	"p_rad_bs1_w,p_rad_bs2_w,p_rad_bs3_w,ee_slot_std,iterations,converged";

/// Metrics of an allocation, evaluated on the instance it was solved for.
inline SweepRow evaluate_row(NetworkInstance const& inst, Allocation const& a)
{
	SweepRow r;
	r.gee = gee(inst, a);
	r.sumee = sum_ee(inst, a);
	r.prodee = prod_ee_value(inst, a);
	r.sumrate = sum_rate(inst, a);
	for (std::size_t m = 0; m < std::min<std::size_t>(inst.m_bs, 3); ++m)
	{
		double s = 0;
		for (std::size_t n = 0; n < inst.n_sub; ++n)
		{
			s += a.power_at(m, n);
		}
		r.p_rad_w[m] = s;
	}
	r.ee_slot_std = per_slot_ee_stats(inst, a).stddev;
	return r;
}

struct SweepResult
{
	std::vector<SweepRow> rows; ///< drop rows followed by mean and std rows per (pmax, pout)
	std::size_t errors = 0;
};

namespace detail {

inline void run_parallel(std::size_t tasks, std::size_t threads, auto&& work)
{
	if (threads == 0)
	{
		threads = std::max(1u, std::thread::hardware_concurrency());
	}
	threads = std::min(threads, tasks);
	std::atomic<std::size_t> next{0};
	auto worker = [&]() {
		for (std::size_t t = next++; t < tasks; t = next++)
		{
			work(t);
		}
	};
	if (threads <= 1)
	{
		worker();
		return;
	}
	std::vector<std::thread> pool;
	for (std::size_t i = 0; i < threads; ++i)
	{
		pool.emplace_back(worker);
	}
	for (auto& th : pool)
	{
		th.join();
	}
}

inline void aggregate(std::vector<SweepRow> const& drops, std::vector<SweepRow>& out)
{
	std::vector<SweepRow const*> ok;
	for (auto const& r : drops)
	{
		if (r.converged != "error")
		{
			ok.push_back(&r);
		}
	}
	SweepRow mean = drops.front(), sd = drops.front();
	mean.drop = "mean";
	sd.drop = "std";
	mean.converged = sd.converged = std::to_string(ok.size());
	mean.error.clear();
	sd.error.clear();
	double const count = static_cast<double>(ok.size());
	auto stat = [&](auto field, double& m_out, double& s_out) {
		double m = 0;
		for (auto const* r : ok)
		{
			m += field(*r);
		}
		m /= count;
		double v = 0;
		for (auto const* r : ok)
		{
			v += (field(*r)-m)*(field(*r)-m);
		}
		m_out = m;
		s_out = std::sqrt(v/count);
	};
	stat([](SweepRow const& r) { return r.gee; }, mean.gee, sd.gee);
	stat([](SweepRow const& r) { return r.sumee; }, mean.sumee, sd.sumee);
	stat([](SweepRow const& r) { return r.prodee; }, mean.prodee, sd.prodee);
	stat([](SweepRow const& r) { return r.sumrate; }, mean.sumrate, sd.sumrate);
	for (std::size_t m = 0; m < 3; ++m)
	{
		stat([m](SweepRow const& r) { return r.p_rad_w[m]; }, mean.p_rad_w[m], sd.p_rad_w[m]);
	}
	stat([](SweepRow const& r) { return r.ee_slot_std; }, mean.ee_slot_std, sd.ee_slot_std);
	stat([](SweepRow const& r) { return r.iterations; }, mean.iterations, sd.iterations);
	out.push_back(mean);
	out.push_back(sd);
}

} // namespace detail

/**
 * Full sweep: one scenario draw per (P_out, drop), solved for every P_max.
 * Rows come out in (pmax, pout, drop) order whatever the thread count.
 */
inline SweepResult run_sweep(ExperimentConfig const& cfg)
{
	cfg.scenario.validate();
	cfg.sweep.validate();
	SweepSpec const& sw = cfg.sweep;
	std::size_t const n_pmax = sw.pmax_dbm.size();
	std::size_t const n_pout = sw.pout_dbm.size();
	std::size_t const tasks = n_pout*sw.drops;
	// cell (pmax, pout, drop)
	std::vector<SweepRow> cells(n_pmax*tasks);
	auto cell = [&](std::size_t ip, std::size_t io, std::size_t d) -> SweepRow& {
		return cells[(ip*n_pout+io)*sw.drops+d];
	};

	detail::run_parallel(tasks, sw.threads, [&](std::size_t t) {
		std::size_t const io = t/sw.drops;
		std::size_t const d = t%sw.drops;
		ScenarioConfig sc = cfg.scenario;
		sc.p_out_dbm = sw.pout_dbm[io];
		Scenario scen;
		std::string draw_error;
		try
		{
			scen = draw_scenario(sc, d);
		}
		catch (std::exception const& e)
		{
			draw_error = e.what();
		}
		for (std::size_t ip = 0; ip < n_pmax; ++ip)
		{
			SweepRow row;
			try
			{
				if (!draw_error.empty())
				{
					throw std::runtime_error(draw_error);
				}
				NetworkInstance inst = scen.instance;
				apply_power_limit(inst, sc.constraint, sw.pmax_dbm[ip]);
				auto res = solve_objective(inst, sw.objective, sw.nl, cfg.solver);
				row = evaluate_row(inst, res.allocation);
				row.iterations = res.report.iterations;
				row.converged = res.report.converged ? "true" : "false";
			}
			catch (std::exception const& e)
			{
				double const nan = std::numeric_limits<double>::quiet_NaN();
				row.gee = row.sumee = row.prodee = row.sumrate = row.ee_slot_std = row.iterations = nan;
				row.p_rad_w = {nan, nan, nan};
				row.converged = "error";
				row.error = e.what();
			}
			row.pmax_dbm = sw.pmax_dbm[ip];
			row.pout_dbm = sw.pout_dbm[io];
			row.drop = std::to_string(d);
			row.objective = to_string(sw.objective);
			cell(ip, io, d) = std::move(row);
		}
	});

	SweepResult out;
	for (std::size_t ip = 0; ip < n_pmax; ++ip)
	{
		for (std::size_t io = 0; io < n_pout; ++io)
		{
			std::vector<SweepRow> group;
			for (std::size_t d = 0; d < sw.drops; ++d)
			{
				SweepRow const& r = cell(ip, io, d);
				out.errors += r.converged == "error" ? 1 : 0;
				out.rows.push_back(r);
				group.push_back(r);
			}
			detail::aggregate(group, out.rows);
		}
	}
	return out;
}

inline void write_sweep_csv(std::ostream& os, SweepResult const& res)
{
	using detail::fmt_double;
	os << "# units: pmax_dbm, pout_dbm in dBm; gee, sumee, prodee in bit/s/W; sumrate in bit/s;"
	      " p_rad_bs*_w in W; ee_slot_std in bit/s/W\n";
	os << "# drop = mean | std rows aggregate the drops above them (population std, errors excluded);"
	      " their converged column counts successful drops\n";
	os << sweep_header << '\n';
	for (auto const& r : res.rows)
	{
		os << fmt_double(r.pmax_dbm) << ',' << fmt_double(r.pout_dbm) << ',' << r.drop << ',' << r.objective << ','
		   << fmt_double(r.gee) << ',' << fmt_double(r.sumee) << ',' << fmt_double(r.prodee) << ','
		   << fmt_double(r.sumrate) << ',' << fmt_double(r.p_rad_w[0]) << ',' << fmt_double(r.p_rad_w[1]) << ','
		   << fmt_double(r.p_rad_w[2]) << ',' << fmt_double(r.ee_slot_std) << ',' << fmt_double(r.iterations) << ','
		   << r.converged << '\n';
	}
}

struct TraceResult
{
	SolverReport report;
	Allocation allocation;
};

/// One solve at the [scenario] operating point for drop cfg.trace_drop.
inline TraceResult run_trace(ExperimentConfig const& cfg)
{
	Scenario const sc = draw_scenario(cfg.scenario, cfg.trace_drop);
	auto res = solve_objective(sc.instance, cfg.sweep.objective, cfg.sweep.nl, cfg.solver);
	return {std::move(res.report), std::move(res.allocation)};
}

inline void write_trace_csv(std::ostream& os, ExperimentConfig const& cfg, SolverReport const& r)
{
	char const* unit = cfg.sweep.objective == Objective::prodee ? "natural log of bit/s/W"
	                   : cfg.sweep.objective == Objective::sumrate ? "bit/s" : "bit/s/W";
	os << "# objective " << to_string(cfg.sweep.objective) << " (" << unit << "); initial_objective = "
	   << detail::fmt_double(r.initial_objective) << "; converged = " << (r.converged ? "true" : "false")
	   << "; stop_reason = " << to_string(r.stop_reason) << '\n';
	os << "iter,objective_value\n";
	for (std::size_t i = 0; i < r.objective_trace.size(); ++i)
	{
		os << i+1 << ',' << detail::fmt_double(r.objective_trace[i]) << '\n';
	}
}

/// Writes positions.csv, gains.csv and noise.csv describing one drawn scenario.
inline void write_scenario_csv(std::string const& dir, Scenario const& sc)
{
	using detail::fmt_double;
	auto open = [&](char const* name) {
		std::ofstream f(dir+"/"+name);
		if (!f)
		{
			throw std::runtime_error(std::string("cannot write ")+dir+"/"+name);
		}
		return f;
	};
	{
		auto f = open("positions.csv");
		f << "# coordinates in m; sites 1-3 coordinate\nkind,index,x_m,y_m,serving_bs\n";
		for (std::size_t j = 0; j < sc.sites.size(); ++j)
		{
			f << "site," << j+1 << ',' << fmt_double(sc.sites[j].x) << ',' << fmt_double(sc.sites[j].y) << ",\n";
		}
		for (std::size_t s = 0; s < sc.users.size(); ++s)
		{
			f << "user," << s << ',' << fmt_double(sc.users[s].x) << ',' << fmt_double(sc.users[s].y) << ','
			  << sc.instance.serving_bs(s)+1 << '\n';
		}
	}
	{
		auto f = open("gains.csv");
		f << "# noise-normalized gain |H|^2 / N in 1/W\nbs,user,subcarrier,gain_per_w\n";
		NetworkInstance const& inst = sc.instance;
		for (std::size_t q = 0; q < inst.m_bs; ++q)
		{
			for (std::size_t s = 0; s < inst.n_users(); ++s)
			{
				for (std::size_t n = 0; n < inst.n_sub; ++n)
				{
					f << q+1 << ',' << s << ',' << n << ',' << fmt_double(inst.gains(q, s, n)) << '\n';
				}
			}
		}
	}
	{
		auto f = open("noise.csv");
		f << "# noise variance in W (thermal plus out-of-cluster)\nuser,subcarrier,noise_w\n";
		for (std::size_t s = 0; s < sc.noise_w.rows(); ++s)
		{
			for (std::size_t n = 0; n < sc.noise_w.cols(); ++n)
			{
				f << s << ',' << n << ',' << fmt_double(sc.noise_w(s, n)) << '\n';
			}
		}
	}
}

} // namespace eeofdma

#endif // EEOFDMA_HARNESS_HPP
