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


// Command-line front end for sweeps, convergence traces and scenario dumps.

#include <CLI11.hpp>
#include <eeofdma/harness.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

struct Overrides
{
	std::optional<std::uint64_t> seed;
	std::optional<std::size_t> drops;
	std::string out_dir = ".";
};

eeofdma::ExperimentConfig load(std::string const& path, Overrides const& ov)
{
	auto cfg = eeofdma::load_config(path);
	if (ov.seed)
	{
		cfg.scenario.seed = *ov.seed;
	}
	if (ov.drops)
	{
		cfg.sweep.drops = *ov.drops;
		cfg.sweep.validate();
	}
	return cfg;
}

std::ofstream open_out(Overrides const& ov, std::string const& name)
{
	std::filesystem::create_directories(ov.out_dir);
	std::string const path = (std::filesystem::path(ov.out_dir)/name).string();
	std::ofstream f(path);
	if (!f)
	{
		throw std::runtime_error("cannot write " + path);
	}
	std::cout << path << '\n';
	return f;
}

int cmd_sweep(std::string const& path, Overrides const& ov)
{
	auto const cfg = load(path, ov);
	auto const res = eeofdma::run_sweep(cfg);
	auto f = open_out(ov, "sweep.csv");
	eeofdma::write_sweep_csv(f, res);
	for (auto const& r : res.rows)
	{
		if (!r.error.empty())
		{
			std::cerr << "pmax " << r.pmax_dbm << " dBm, pout " << r.pout_dbm << " dBm, drop " << r.drop << ": "
			          << r.error << '\n';
		}
	}
	return static_cast<int>(std::min<std::size_t>(res.errors, 125));
}

int cmd_trace(std::string const& path, Overrides const& ov)
{
	auto const cfg = load(path, ov);
	eeofdma::TraceResult res;
	try
	{
		res = eeofdma::run_trace(cfg);
	}
	catch (eeofdma::solver_error const& e)
	{
		auto f = open_out(ov, "trace.csv");
		eeofdma::write_trace_csv(f, cfg, e.report);
		std::cerr << "solver failed: " << e.what() << '\n';
		return 1;
	}
	auto f = open_out(ov, "trace.csv");
	eeofdma::write_trace_csv(f, cfg, res.report);
	return 0;
}

int cmd_scenario(std::string const& path, Overrides const& ov)
{
	auto const cfg = load(path, ov);
	std::filesystem::create_directories(ov.out_dir);
	eeofdma::Scenario const sc = eeofdma::draw_scenario(cfg.scenario, cfg.trace_drop);
	eeofdma::write_scenario_csv(ov.out_dir, sc);
	for (char const* name : {"positions.csv", "gains.csv", "noise.csv"})
	{
		std::cout << (std::filesystem::path(ov.out_dir)/name).string() << '\n';
	}
	return 0;
}

} // namespace

int main(int argc, char** argv)
{
	CLI::App app{"Energy-efficient multi-cell OFDMA power allocation experiments"};
	app.require_subcommand(1);
	Overrides ov;
	std::uint64_t seed = 0;
	std::size_t drops = 0;
	auto* seed_opt = app.add_option("--seed", seed, "Override the scenario seed");
	auto* drops_opt = app.add_option("--drops", drops, "Override the number of drops")->check(CLI::PositiveNumber);
	app.add_option("--out-dir", ov.out_dir, "Directory for CSV output")->capture_default_str();

	std::string config;
	auto* sweep = app.add_subcommand("sweep", "Monte Carlo sweep over P_max and P_out");
	auto* trace = app.add_subcommand("trace", "Objective versus outer iteration for one drop");
	auto* scen = app.add_subcommand("scenario", "Dump one drawn scenario as CSV tables");
	for (auto* sub : {sweep, trace, scen})
	{
		sub->add_option("config", config, "INI configuration file")->required()->check(CLI::ExistingFile);
	}
	CLI11_PARSE(app, argc, argv);
	if (*seed_opt)
	{
		ov.seed = seed;
	}
	if (*drops_opt)
	{
		ov.drops = drops;
	}

	try
	{
		if (*sweep)
		{
			return cmd_sweep(config, ov);
		}
		if (*trace)
		{
			return cmd_trace(config, ov);
		}
		return cmd_scenario(config, ov);
	}
	catch (std::exception const& e)
	{
		std::cerr << "error: " << e.what() << '\n';
		return 1;
	}
}
