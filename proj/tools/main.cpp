// SPDX-License-Identifier: Apache-2.0
/*
Copyright (C) 2026 The Audit Arena Authors.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "arena/config.hpp"

namespace {

using namespace arena;

std::string out_dir_or_default(const std::string& configured)
{
	if(!configured.empty()) {
		return configured;
	}
	const char* env = std::getenv("AUDIT_ARENA_OUT");
	if(env != nullptr && env[0] != '\0') {
		return env;
	}
	return "out";
}

void print_flow(const MetricsLedger& m)
{
	const FlowCounters& f = m.flow;
	std::printf("generated            %lld\n",
	            static_cast<long long>(f.generated));
	std::printf("recorded             %lld\n",
	            static_cast<long long>(f.recorded));
	std::printf("dropped              %lld\n",
	            static_cast<long long>(f.dropped));
	std::printf("claimed              %lld\n",
	            static_cast<long long>(f.claimed));
	std::printf("consumed             %lld\n",
	            static_cast<long long>(f.consumed));
	std::printf("downstream_consumed  %lld\n",
	            static_cast<long long>(f.downstream_consumed));
	std::printf("reduced_away         %lld\n",
	            static_cast<long long>(f.reduced_away));
	std::printf("drop_fraction        %.6f\n", m.drop_fraction());
	for(const AppStats& st : m.apps) {
		std::printf("app %-16s emitted=%lld offered=%lld completed=%lld",
		            st.name.c_str(),
		            static_cast<long long>(st.events_emitted),
		            static_cast<long long>(st.events_offered),
		            static_cast<long long>(st.requests_completed));
		if(st.requests_completed > 0) {
			std::printf(" mean_latency_us=%.1f",
			            static_cast<double>(st.latency_sum_us) /
			                static_cast<double>(st.requests_completed));
		}
		std::printf("\n");
	}
}

int run_sim(const ResolvedConfig& cfg, const std::string& trace_path)
{
	ResolvedConfig local = cfg;
	local.trace_enabled = !trace_path.empty();
	Engine eng(local.sim_config());
	VirtualTime dur = cfg.experiment.duration > 0 ? cfg.experiment.duration
	                                              : seconds_us(1);
	eng.run_until(dur);
	print_flow(eng.metrics());
	if(!trace_path.empty()) {
		eng.trace().write_file(trace_path);
		std::printf("trace written to %s\n", trace_path.c_str());
	}
	return 0;
}

int run_rq1(const ExperimentSpec& e)
{
	SweepOptions opt;
	opt.seed = e.seed;
	if(e.duration > 0) {
		opt.duration = e.duration;
	}
	std::vector<std::int64_t> rates =
	    e.rates.empty() ? rq1_default_rates() : e.rates;
	SweepResult res = rq1_drop_sweep(e.preset, rates, opt);
	std::string path = write_csv_file(out_dir_or_default(e.out_dir), "rq1",
	                                  e.preset, e.seed, res.csv);
	for(const RatePoint& p : res.points) {
		std::printf("rate %8lld  generated %10lld  dropped %10lld  "
		            "drop_fraction %.6f\n",
		            static_cast<long long>(p.rate),
		            static_cast<long long>(p.generated),
		            static_cast<long long>(p.dropped), p.drop_fraction);
	}
	std::printf("csv: %s\n", path.c_str());
	return 0;
}

int run_pdos(const ExperimentSpec& e)
{
	PdosOptions opt;
	opt.seed = e.seed;
	opt.trials = e.trials;
	opt.success_any_dropped = e.success_any_dropped;
	if(e.duration > 0) {
		opt.duration = e.duration;
	}
	std::vector<PdosScenario> scenarios;
	if(e.scenario == "default" || e.scenario == "both") {
		scenarios.push_back(PdosScenario::DefaultLinux);
	}
	if(e.scenario == "cgroup" || e.scenario == "both") {
		scenarios.push_back(PdosScenario::CgroupIsolated);
	}
	for(PdosScenario sc : scenarios) {
		PdosResult res = pdos_trials(e.preset, sc, opt);
		std::string harness =
		    std::string("pdos-") + pdos_scenario_name(sc);
		std::string path = write_csv_file(out_dir_or_default(e.out_dir),
		                                  harness, e.preset, e.seed, res.csv);
		std::printf("success %s (%s scenario, preset %s)\n",
		            res.summary.c_str(), pdos_scenario_name(sc),
		            e.preset.c_str());
		std::printf("csv: %s\n", path.c_str());
	}
	return 0;
}

int run_pados(const ExperimentSpec& e)
{
	PadosOptions opt;
	opt.seed = e.seed;
	if(e.duration > 0) {
		opt.duration = e.duration;
	}
	if(!e.victim_rates.empty()) {
		opt.victim_rates_rps = e.victim_rates;
	}
	opt.scenario = e.scenario == "default" ? PdosScenario::DefaultLinux
	                                       : PdosScenario::CgroupIsolated;
	std::vector<std::string> archs =
	    e.archs.empty() ? std::vector<std::string>{e.preset} : e.archs;
	PadosResult res = pados_run(archs, opt);
	std::string path = write_csv_file(out_dir_or_default(e.out_dir), "pados",
	                                  e.preset, e.seed, res.csv);
	for(const PadosCurve& c : res.curves) {
		double lo = c.target_throughput_rps.front();
		double hi = lo;
		for(double v : c.target_throughput_rps) {
			lo = std::min(lo, v);
			hi = std::max(hi, v);
		}
		std::printf("arch %-18s target throughput min %8.2f  max %8.2f "
		            "req/s\n",
		            c.arch.c_str(), lo, hi);
	}
	std::printf("csv: %s\n", path.c_str());
	return 0;
}

int run_rq4(const ExperimentSpec& e)
{
	Rq4Options opt;
	opt.seed = e.seed;
	opt.offered_rate = e.offered_rate;
	if(e.duration > 0) {
		opt.duration = e.duration;
	}
	Rq4Result res = rq4_reduction_run(opt);
	std::string path = write_csv_file(out_dir_or_default(e.out_dir), "rq4",
	                                  "sysdig-cpr", e.seed, res.csv);
	std::printf("realized/offered        %.6f\n", res.realized_over_offered);
	std::printf("downstream/recorded     %.6f\n",
	            res.downstream_over_recorded);
	std::printf("csv: %s\n", path.c_str());
	return 0;
}

int run_rq5(const ExperimentSpec& e)
{
	Rq5Options opt;
	opt.seed = e.seed;
	if(!e.buffer_sizes.empty()) {
		opt.buffer_sizes_bytes = e.buffer_sizes;
	}
	Rq5Result res = rq5_buffer_sweep(e.preset, opt);
	std::string path = write_csv_file(out_dir_or_default(e.out_dir), "rq5",
	                                  e.preset, e.seed, res.csv);
	for(const Rq5Point& p : res.points) {
		std::printf("size %10llu B  events %8lld  drop_fraction %.6f  "
		            "first_drop_us %lld\n",
		            static_cast<unsigned long long>(p.size_bytes),
		            static_cast<long long>(p.buffer_events), p.drop_fraction,
		            static_cast<long long>(p.first_drop_us));
	}
	std::printf("csv: %s\n", path.c_str());
	return 0;
}

// Quick oracle-agreement suite: closed-form fluid predictions against
// short simulated runs, plus a byte-level determinism check.
int run_validate()
{
	int failures = 0;
	auto check = [&](bool ok, const std::string& what) {
		std::printf("%s %s\n", ok ? "PASS" : "FAIL", what.c_str());
		if(!ok) {
			failures++;
		}
	};

	{
		SweepOptions opt;
		opt.duration = seconds_us(30);
		opt.buffer_bytes_override = 2'064'384; // 16,384 records
		SweepResult res = rq1_drop_sweep("sysdig", {2'000, 10'000}, opt);
		double mu = 4'000.0;
		double b_ev = 16'384.0;
		double want0 = fluid_drop_fraction(2'000, mu, b_ev, 30.0);
		double want1 = fluid_drop_fraction(10'000, mu, b_ev, 30.0);
		check(res.points[0].drop_fraction == want0 && want0 == 0.0,
		      "fluid oracle: under-capacity rate drops nothing");
		check(std::abs(res.points[1].drop_fraction - want1) < 0.01,
		      "fluid oracle: overload drop fraction within 1% absolute");
	}
	{
		SweepOptions opt;
		opt.duration = seconds_us(5);
		SweepResult res = rq1_drop_sweep("nodrop", {32'000}, opt);
		check(res.points[0].dropped == 0 &&
		          res.points[0].generated == res.points[0].handled,
		      "self-consuming architecture: zero loss at 8x capacity");
	}
	{
		SweepOptions opt;
		opt.duration = seconds_us(2);
		SweepResult a = rq1_drop_sweep("sysdig", {12'000}, opt);
		SweepResult b = rq1_drop_sweep("sysdig", {12'000}, opt);
		check(a.csv == b.csv, "determinism: identical seeds, identical CSV");
	}
	if(failures == 0) {
		std::printf("validate: ok\n");
		return 0;
	}
	std::printf("validate: %d check(s) failed\n", failures);
	return 1;
}

int run_calibrate(const std::string& target)
{
	CalibrationResult res = calibrate(target, CostModel{});
	std::printf("%s\n", res.report.c_str());
	if(!res.feasible) {
		std::printf("calibration infeasible; no config emitted\n");
		return 1;
	}
	if(!res.identity) {
		std::printf("suggested config snippet:\n%s", res.snippet.c_str());
	}
	return 0;
}

} // namespace

int main(int argc, char** argv)
{
	CLI::App app{"audit-arena: deterministic simulator of OS auditing "
	             "architectures and their overload behavior"};
	app.require_subcommand(0, 1);

	bool flag_print_defaults = false;
	app.add_flag("--print-defaults", flag_print_defaults,
	             "Print a fully documented default config and exit");

	std::string config_path;
	std::string trace_path;
	CLI::App* cmd_run =
	    app.add_subcommand("run", "Run the harness named in a config file");
	cmd_run->add_option("config", config_path, "INI config path")->required();
	cmd_run->add_option("--trace", trace_path,
	                    "Write a transition trace (sim harness only)");

	ExperimentSpec flags;
	auto add_common = [&](CLI::App* cmd) {
		cmd->add_option("--preset", flags.preset, "Collector preset");
		cmd->add_option("--seed", flags.seed, "Base RNG seed");
		cmd->add_option("--out", flags.out_dir,
		                "Output directory (default $AUDIT_ARENA_OUT or out)");
		cmd->add_option("--duration-s", flags.duration,
		                "Simulated duration in seconds")
		    ->transform([](std::string s) {
			    return std::to_string(seconds_us(std::stod(s)));
		    });
	};

	CLI::App* cmd_rq1 = app.add_subcommand(
	    "rq1", "Offered-rate sweep: generated/handled/dropped per rate");
	add_common(cmd_rq1);
	cmd_rq1->add_option("--rates", flags.rates,
	                    "Comma-separated offered rates (events/s)")
	    ->delimiter(',');

	CLI::App* cmd_pdos = app.add_subcommand(
	    "pdos", "Marker-evasion trials against a saturated capture path");
	add_common(cmd_pdos);
	cmd_pdos->add_option("--trials", flags.trials, "Trial count");
	cmd_pdos->add_option("--scenario", flags.scenario,
	                     "default | cgroup | both");
	cmd_pdos->add_flag("--success-any-dropped", flags.success_any_dropped,
	                   "Count a trial as success if any marker dropped");

	CLI::App* cmd_pados = app.add_subcommand(
	    "pados", "Victim-rate sweep measuring target throughput loss");
	add_common(cmd_pados);
	cmd_pados->add_option("--scenario", flags.scenario, "default | cgroup");
	cmd_pados->add_option("--victim-rates", flags.victim_rates,
	                      "Comma-separated victim request rates (req/s)")
	    ->delimiter(',');
	cmd_pados->add_option("--archs", flags.archs,
	                      "Comma-separated presets to sweep")
	    ->delimiter(',');

	CLI::App* cmd_rq4 = app.add_subcommand(
	    "rq4", "Reduction-pipeline run reporting realized/offered ratio");
	add_common(cmd_rq4);
	cmd_rq4->add_option("--offered-rate", flags.offered_rate,
	                    "Offered events/s");

	CLI::App* cmd_rq5 = app.add_subcommand(
	    "rq5", "Buffer-size sweep: drop fraction and time to first drop");
	add_common(cmd_rq5);
	cmd_rq5->add_option("--buffer-sizes", flags.buffer_sizes,
	                    "Comma-separated buffer sizes in bytes")
	    ->delimiter(',');

	CLI::App* cmd_validate = app.add_subcommand(
	    "validate", "Run the oracle-agreement suite and print pass/fail");

	std::string calibrate_target;
	CLI::App* cmd_calibrate = app.add_subcommand(
	    "calibrate", "Suggest cost/config deltas for a named behavior");
	cmd_calibrate
	    ->add_option("target", calibrate_target,
	                 "ordering | audit-saturation | lttng-one-core")
	    ->required();

	CLI::App* cmd_defaults = app.add_subcommand(
	    "print-defaults", "Print a fully documented default config");

	try {
		app.parse(argc, argv);
	} catch(const CLI::ParseError& e) {
		int code = app.exit(e);
		return code == 0 ? 0 : 1;
	}

	try {
		if(flag_print_defaults || cmd_defaults->parsed()) {
			std::printf("%s", default_config_text().c_str());
			return 0;
		}
		if(cmd_run->parsed()) {
			ResolvedConfig cfg = parse_config_file(config_path);
			const std::string& h = cfg.experiment.harness;
			if(h == "sim") {
				return run_sim(cfg, trace_path);
			}
			if(h == "rq1") {
				return run_rq1(cfg.experiment);
			}
			if(h == "pdos") {
				return run_pdos(cfg.experiment);
			}
			if(h == "pados") {
				return run_pados(cfg.experiment);
			}
			if(h == "rq4") {
				return run_rq4(cfg.experiment);
			}
			return run_rq5(cfg.experiment);
		}
		if(cmd_rq1->parsed()) {
			return run_rq1(flags);
		}
		if(cmd_pdos->parsed()) {
			return run_pdos(flags);
		}
		if(cmd_pados->parsed()) {
			return run_pados(flags);
		}
		if(cmd_rq4->parsed()) {
			return run_rq4(flags);
		}
		if(cmd_rq5->parsed()) {
			return run_rq5(flags);
		}
		if(cmd_validate->parsed()) {
			return run_validate();
		}
		if(cmd_calibrate->parsed()) {
			return run_calibrate(calibrate_target);
		}
		std::printf("%s\n", app.help().c_str());
		return 0;
	} catch(const ConfigError& e) {
		std::fprintf(stderr, "config error: %s\n", e.what());
		return 1;
	} catch(const InvariantError& e) {
		std::fprintf(stderr, "invariant violation: %s\n", e.what());
		return 2;
	}
}
