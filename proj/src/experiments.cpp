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

#include "arena/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "arena/collector.hpp"
#include "arena/event.hpp"
#include "arena/workload.hpp"

namespace arena {

double fluid_drop_fraction(double lambda, double mu, double buffer_events,
                           double seconds)
{
	if(lambda <= 0.0 || seconds <= 0.0) {
		return 0.0;
	}
	double excess = (lambda - mu) * seconds - buffer_events;
	if(excess <= 0.0) {
		return 0.0;
	}
	return excess / (lambda * seconds);
}

double fluid_first_drop_us(double lambda, double mu, double buffer_events)
{
	if(lambda <= mu) {
		return -1.0;
	}
	return buffer_events / (lambda - mu) * 1e6;
}

namespace {

std::string fmt_double(double v)
{
	char buf[64];
	std::snprintf(buf, sizeof(buf), "%.6f", v);
	return buf;
}

std::string fmt_int(std::int64_t v)
{
	return std::to_string(v);
}

// Reference record size of the default [8, 100, 8] event shape; used to
// translate byte capacities into record counts for oracles.
std::uint32_t default_record_bytes()
{
	return record_size_for_args({8, 100, 8});
}

// Applies harness-level capacity overrides on top of a preset.
void apply_buffer_override(CollectorArch& arch, std::uint64_t bytes,
                           std::uint64_t records)
{
	if(bytes > 0 && arch.capacity_mode == CapacityMode::Bytes) {
		arch.buffer_bytes = bytes;
	}
	if(records > 0 && arch.capacity_mode == CapacityMode::Records) {
		arch.buffer_records = records;
	}
}

// The reference measurement topology: producer(s) pinned to core 0 and,
// for the single-thread collectors, a dedicated collector core so the
// drain rate equals 1e6/consume_cost exactly.
SimConfig sweep_config(const std::string& preset, std::int64_t rate,
                       std::uint64_t seed, std::uint64_t bytes_override,
                       std::uint64_t records_override)
{
	SimConfig cfg;
	cfg.machine.core_count = 2;
	cfg.seed = seed;
	if(preset != "none") {
		CollectorArch arch = make_preset(preset);
		apply_buffer_override(arch, bytes_override, records_override);
		if(arch.compute == ComputeMode::SingleThread) {
			arch.dedicated_core = true;
		}
		cfg.arch = arch;
	}
	SuperProducerSpec prod;
	prod.common.name = "producer";
	prod.common.pinned_core = 0;
	prod.peak_rate_per_proc = rate;
	prod.write_fraction = 1.0;
	cfg.apps.emplace_back(prod);
	return cfg;
}

} // namespace

std::vector<std::int64_t> rq1_default_rates()
{
	// Up to 20x the default consumer capacity of 4,000 events/s.
	return {1'000,  2'000,  4'000,  6'000,  8'000,  12'000,
	        16'000, 24'000, 32'000, 48'000, 64'000, 80'000};
}

SweepResult rq1_drop_sweep(const std::string& preset,
                           const std::vector<std::int64_t>& rates,
                           const SweepOptions& opt)
{
	if(rates.empty()) {
		throw ConfigError("rate sweep needs at least one rate");
	}
	for(std::size_t i = 1; i < rates.size(); ++i) {
		if(rates[i] <= rates[i - 1]) {
			throw ConfigError("rate sweep must be strictly ascending");
		}
	}
	SweepResult res;
	res.csv = "rate,generated,handled,dropped,drop_fraction\n";
	for(std::int64_t rate : rates) {
		SimConfig cfg = sweep_config(preset, rate, opt.seed,
		                             opt.buffer_bytes_override,
		                             opt.buffer_records_override);
		Engine eng(std::move(cfg));
		eng.run_until(opt.duration);
		const FlowCounters& f = eng.metrics().flow;
		RatePoint p;
		p.rate = rate;
		p.generated = f.generated;
		p.handled = f.recorded;
		p.dropped = f.dropped;
		p.drop_fraction = eng.metrics().drop_fraction();
		res.points.push_back(p);
		res.csv += fmt_int(p.rate) + "," + fmt_int(p.generated) + "," +
		           fmt_int(p.handled) + "," + fmt_int(p.dropped) + "," +
		           fmt_double(p.drop_fraction) + "\n";
	}
	return res;
}

// ---------------------------------------------------------------------
// PDoS
// ---------------------------------------------------------------------

const char* pdos_scenario_name(PdosScenario s)
{
	return s == PdosScenario::DefaultLinux ? "default" : "cgroup";
}

namespace {

// The three-step attack on a two-core desk machine: one malicious app
// (super-producer plus a dormant striker thread) saturates core 0's
// capture path, then emits 5 marker events at a seeded strike time. A
// benign request server runs on core 1; the collector floats in root.
SimConfig pdos_config(const std::string& preset, PdosScenario scenario,
                      std::uint64_t seed, VirtualTime duration)
{
	SimConfig cfg;
	cfg.machine.core_count = 2;
	cfg.seed = seed;
	std::string attacker_cg = "root";
	std::string target_cg = "root";
	if(scenario == PdosScenario::CgroupIsolated) {
		// Attacker allowance equals its natural one-core demand, so it
		// never exceeds its quota; target has ample headroom too.
		cfg.machine.cgroups.push_back(CgroupSpec{"attacker", 0.5});
		cfg.machine.cgroups.push_back(CgroupSpec{"target", 0.3});
		attacker_cg = "attacker";
		target_cg = "target";
	}
	CollectorArch arch = make_preset(preset);
	if(arch.capacity_mode == CapacityMode::Bytes) {
		// Desk-scale capture buffers; growable presets may still expand
		// by their grow factor.
		arch.buffer_bytes = 1u << 20;
	}
	cfg.arch = arch;

	SuperProducerSpec flood;
	flood.common.name = "attacker";
	flood.common.cgroup = attacker_cg;
	flood.common.pinned_core = 0;
	flood.peak_rate_per_proc = 250'000;
	flood.write_fraction = 1.0;
	cfg.apps.emplace_back(flood);

	MalwareSpec mal;
	mal.common.name = "malware";
	mal.common.cgroup = attacker_cg;
	mal.common.pinned_core = 0;
	mal.strike_min = seconds_us(1.8);
	mal.strike_max = seconds_us(2.8);
	mal.marker_count = 5;
	mal.inter_marker_gap = 10;
	cfg.apps.emplace_back(mal);

	ServerAppSpec target;
	target.common.name = "target";
	target.common.cgroup = target_cg;
	target.common.pinned_core = 1;
	target.request_cpu_cost = 100;
	target.events_per_request = 2;
	target.offered_rps = 2'000.0;
	target.concurrency = 4;
	cfg.apps.emplace_back(target);

	(void)duration;
	return cfg;
}

} // namespace

PdosResult pdos_trials(const std::string& preset, PdosScenario scenario,
                       const PdosOptions& opt)
{
	if(opt.trials < 1) {
		throw ConfigError("pdos needs at least one trial");
	}
	PdosResult res;
	res.trials = opt.trials;
	res.csv = "trial,success,markers_recorded,marker_count\n";
	for(std::int32_t trial = 0; trial < opt.trials; ++trial) {
		std::uint64_t trial_seed = mix_seed(opt.seed, trial);
		SimConfig cfg = pdos_config(preset, scenario, trial_seed, opt.duration);
		Engine eng(std::move(cfg));
		eng.run_until(opt.duration);
		const FlowCounters& f = eng.metrics().flow;
		AttackOutcome out;
		out.trial = trial;
		out.marker_count = static_cast<std::int32_t>(f.marker_generated);
		out.markers_recorded = static_cast<std::int32_t>(f.marker_recorded);
		out.success = opt.success_any_dropped ? (f.marker_dropped > 0)
		                                      : (f.marker_recorded == 0);
		if(out.success) {
			res.successes++;
		}
		res.outcomes.push_back(out);
		res.csv += fmt_int(out.trial) + "," + fmt_int(out.success ? 1 : 0) +
		           "," + fmt_int(out.markers_recorded) + "," +
		           fmt_int(out.marker_count) + "\n";
	}
	res.summary = std::to_string(res.successes) + "/" +
	              std::to_string(res.trials);
	return res;
}

// ---------------------------------------------------------------------
// PADoS
// ---------------------------------------------------------------------

namespace {

// One core split 20/80 between a modest request server (the target)
// and a provenance-heavy victim; the collector lives in root, outside
// both quotas. The y value is the target's realized requests/s.
SimConfig pados_config(const std::string& preset, PdosScenario scenario,
                       std::int64_t victim_rps, std::uint64_t seed)
{
	SimConfig cfg;
	cfg.machine.core_count = 1;
	// Timeslices comparable to a real scheduler's, so context-switch
	// overhead stays in the noise instead of skewing the quota split.
	cfg.machine.quantum = 10'000;
	cfg.seed = seed;
	std::string target_cg = "root";
	std::string victim_cg = "root";
	if(scenario == PdosScenario::CgroupIsolated) {
		cfg.machine.cgroups.push_back(CgroupSpec{"target", 0.2});
		cfg.machine.cgroups.push_back(CgroupSpec{"victim", 0.8});
		target_cg = "target";
		victim_cg = "victim";
	}
	if(preset != "none") {
		cfg.arch = make_preset(preset);
	}

	ServerAppSpec target;
	target.common.name = "target";
	target.common.cgroup = target_cg;
	target.request_cpu_cost = 2'000;
	target.events_per_request = 2;
	target.offered_rps = 0.0; // closed loop
	target.concurrency = 1;
	cfg.apps.emplace_back(target);

	ServerAppSpec victim;
	victim.common.name = "victim";
	victim.common.cgroup = victim_cg;
	victim.request_cpu_cost = 500;
	victim.events_per_request = 50;
	victim.offered_rps = static_cast<double>(victim_rps);
	victim.concurrency = 20;
	cfg.apps.emplace_back(victim);
	return cfg;
}

} // namespace

PadosResult pados_run(const std::vector<std::string>& presets,
                      const PadosOptions& opt)
{
	if(opt.victim_rates_rps.empty()) {
		throw ConfigError("pados needs at least one victim rate");
	}
	PadosResult res;
	res.victim_rates_rps = opt.victim_rates_rps;
	std::vector<std::string> arches;
	arches.push_back("none");
	for(const std::string& p : presets) {
		if(p != "none") {
			arches.push_back(p);
		}
	}
	res.csv = "arch,victim_rate_rps,target_throughput_rps\n";
	double secs = static_cast<double>(opt.duration) /
	              static_cast<double>(kMicrosPerSecond);
	for(const std::string& arch : arches) {
		PadosCurve curve;
		curve.arch = arch;
		for(std::int64_t rate : opt.victim_rates_rps) {
			SimConfig cfg = pados_config(arch, opt.scenario, rate, opt.seed);
			Engine eng(std::move(cfg));
			eng.run_until(opt.duration);
			const AppStats& st = eng.metrics().apps.at(0);
			double thr = static_cast<double>(st.requests_completed) / secs;
			curve.target_throughput_rps.push_back(thr);
			res.csv += arch + "," + fmt_int(rate) + "," + fmt_double(thr) +
			           "\n";
		}
		res.curves.push_back(curve);
	}
	return res;
}

// ---------------------------------------------------------------------
// RQ4
// ---------------------------------------------------------------------

Rq4Result rq4_reduction_run(const Rq4Options& opt)
{
	SimConfig cfg;
	cfg.machine.core_count = 1;
	cfg.seed = opt.seed;
	CollectorArch arch = make_preset("sysdig-cpr");
	// A small capture buffer keeps the end-of-run residual negligible
	// against the totals the ratios are computed from.
	arch.buffer_bytes = 16u << 10;
	cfg.arch = arch;

	SuperProducerSpec victim;
	victim.common.name = "victim";
	victim.peak_rate_per_proc = opt.offered_rate;
	victim.write_fraction = 1.0;
	cfg.apps.emplace_back(victim);

	Engine eng(std::move(cfg));
	eng.run_until(opt.duration);
	const FlowCounters& f = eng.metrics().flow;
	double secs = static_cast<double>(opt.duration) /
	              static_cast<double>(kMicrosPerSecond);
	Rq4Result res;
	res.generated = f.generated;
	res.recorded = f.recorded;
	res.downstream = f.downstream_consumed;
	res.realized_over_offered =
	    static_cast<double>(f.generated) /
	    (static_cast<double>(opt.offered_rate) * secs);
	res.downstream_over_recorded =
	    f.recorded == 0 ? 0.0
	                    : static_cast<double>(f.downstream_consumed) /
	                          static_cast<double>(f.recorded);
	res.csv = "metric,value\n";
	res.csv += "offered_rate," + fmt_int(opt.offered_rate) + "\n";
	res.csv += "generated," + fmt_int(res.generated) + "\n";
	res.csv += "recorded," + fmt_int(res.recorded) + "\n";
	res.csv += "downstream_consumed," + fmt_int(res.downstream) + "\n";
	res.csv += "realized_over_offered," +
	           fmt_double(res.realized_over_offered) + "\n";
	res.csv += "downstream_over_recorded," +
	           fmt_double(res.downstream_over_recorded) + "\n";
	return res;
}

// ---------------------------------------------------------------------
// RQ5
// ---------------------------------------------------------------------

Rq5Result rq5_buffer_sweep(const std::string& preset, const Rq5Options& opt)
{
	if(opt.buffer_sizes_bytes.empty()) {
		throw ConfigError("buffer sweep needs at least one size");
	}
	for(std::size_t i = 1; i < opt.buffer_sizes_bytes.size(); ++i) {
		if(opt.buffer_sizes_bytes[i] <= opt.buffer_sizes_bytes[i - 1]) {
			throw ConfigError("buffer sweep sizes must be ascending");
		}
	}
	const double mu = 1e6 / static_cast<double>(CostModel{}.consume_cost);
	const double lambda = static_cast<double>(opt.rate);
	Rq5Result res;
	res.csv = "size_bytes,buffer_events,drop_fraction,time_to_first_drop_us\n";
	for(std::uint64_t size : opt.buffer_sizes_bytes) {
		std::int64_t b_ev =
		    static_cast<std::int64_t>(size / default_record_bytes());
		double fill_us = fluid_first_drop_us(lambda, mu, b_ev);
		VirtualTime horizon =
		    fill_us > 0
		        ? static_cast<VirtualTime>(fill_us * opt.fill_time_multiple)
		        : seconds_us(30);
		SimConfig cfg = sweep_config(preset, opt.rate, opt.seed, size, 0);
		Engine eng(std::move(cfg));
		eng.run_until(horizon);
		Rq5Point p;
		p.size_bytes = size;
		p.buffer_events = b_ev;
		p.drop_fraction = eng.metrics().drop_fraction();
		p.first_drop_us = eng.metrics().first_drop_time;
		res.points.push_back(p);
		res.csv += fmt_int(static_cast<std::int64_t>(size)) + "," +
		           fmt_int(b_ev) + "," + fmt_double(p.drop_fraction) + "," +
		           fmt_int(p.first_drop_us) + "\n";
	}
	return res;
}

// ---------------------------------------------------------------------
// Calibration
// ---------------------------------------------------------------------

CalibrationResult calibrate(const std::string& target, const CostModel& costs)
{
	CalibrationResult res;
	if(target == "ordering") {
		// Reference point: lambda = 10,000 ev/s for 30 s against the
		// per-core-buffer presets. The fixed-size buffer must drop more
		// than the growable one.
		double mu = 1e6 / static_cast<double>(costs.consume_cost);
		CollectorArch sys = make_preset("sysdig");
		CollectorArch ltt = make_preset("lttng");
		double rec = default_record_bytes();
		double sys_drop = fluid_drop_fraction(
		    10'000, mu, static_cast<double>(sys.buffer_bytes) / rec, 30.0);
		double ltt_drop = fluid_drop_fraction(
		    10'000, mu, static_cast<double>(ltt.grow_max_bytes()) / rec, 30.0);
		if(sys_drop > ltt_drop) {
			res.identity = true;
			res.report = "fixed-size preset drops " + fmt_double(sys_drop) +
			             " vs growable " + fmt_double(ltt_drop) +
			             "; ordering already holds, no changes needed";
		} else {
			res.feasible = false;
			res.report = "configured capacities invert the drop ordering; "
			             "no cost fit can fix a capacity ordering";
		}
		return res;
	}
	if(target == "audit-saturation") {
		// Peak generation rate scales as 1/capture_cost, so a transport
		// penalty of 100x pins the message-queue preset at 1% of the
		// fastest preset's peak rate.
		std::uint32_t current = make_preset("audit").capture_cost_multiplier;
		const std::uint32_t needed = 100;
		if(current >= needed) {
			res.identity = true;
			res.report = "multiplier " + std::to_string(current) +
			             " already at or beyond " + std::to_string(needed);
		} else {
			res.snippet = "[collector]\npreset = audit\n"
			              "capture_cost_multiplier = " +
			              std::to_string(needed) + "\n";
			res.report =
			    "raise capture_cost_multiplier from " +
			    std::to_string(current) + " to " + std::to_string(needed) +
			    " so peak generation falls to 1% of the fastest preset";
		}
		return res;
	}
	if(target == "lttng-one-core") {
		// Zero drops on one core need grow capacity >= the 30 s backlog
		// at the single-core peak rate with the producer and collector
		// sharing the core evenly.
		double mu = 1e6 / static_cast<double>(costs.consume_cost);
		double peak = 1e6 / static_cast<double>(costs.kernel_record_cost) / 2.0;
		double backlog_ev = (peak - mu) * 30.0;
		CollectorArch ltt = make_preset("lttng");
		double rec = default_record_bytes();
		double have_ev = static_cast<double>(ltt.grow_max_bytes()) / rec;
		if(have_ev >= backlog_ev) {
			res.identity = true;
			res.report = "grow capacity already covers the one-core backlog";
			return res;
		}
		double needed_factor = std::ceil(
		    backlog_ev * rec / static_cast<double>(ltt.buffer_bytes));
		if(needed_factor > (1u << 20)) {
			res.feasible = false;
			res.report = "required grow factor exceeds any sane capacity";
			return res;
		}
		res.snippet = "[collector]\npreset = lttng\ngrow_factor = " +
		              fmt_int(static_cast<std::int64_t>(needed_factor)) + "\n";
		res.report = "raise grow_factor to " +
		             fmt_int(static_cast<std::int64_t>(needed_factor)) +
		             " to absorb the one-core 30 s backlog of " +
		             fmt_int(static_cast<std::int64_t>(backlog_ev)) +
		             " events";
		return res;
	}
	throw ConfigError("unknown calibration target '" + target +
	                  "'; valid: ordering | audit-saturation | lttng-one-core");
}

std::string write_csv_file(const std::string& dir, const std::string& harness,
                           const std::string& preset, std::uint64_t seed,
                           const std::string& csv)
{
	std::filesystem::path p(dir.empty() ? "." : dir);
	std::filesystem::create_directories(p);
	p /= harness + "_" + preset + "_" + std::to_string(seed) + ".csv";
	std::ofstream out(p, std::ios::binary);
	if(!out) {
		throw ConfigError("cannot write CSV file: " + p.string());
	}
	out << csv;
	return p.string();
}

} // namespace arena
