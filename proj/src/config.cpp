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

#include "arena/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace arena {

namespace {

std::string trim(const std::string& s)
{
	std::size_t b = 0;
	std::size_t e = s.size();
	while(b < e && std::isspace(static_cast<unsigned char>(s[b]))) {
		++b;
	}
	while(e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) {
		--e;
	}
	return s.substr(b, e - b);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value)
{
	throw ConfigError("invalid value for '" + key + "': '" + value + "'");
}

std::int64_t parse_i64(const std::string& key, const std::string& value)
{
	try {
		std::size_t pos = 0;
		std::int64_t v = std::stoll(value, &pos);
		if(pos != value.size()) {
			bad_value(key, value);
		}
		return v;
	} catch(const ConfigError&) {
		throw;
	} catch(const std::exception&) {
		bad_value(key, value);
	}
}

std::uint64_t parse_u64(const std::string& key, const std::string& value)
{
	std::int64_t v = parse_i64(key, value);
	if(v < 0) {
		bad_value(key, value);
	}
	return static_cast<std::uint64_t>(v);
}

double parse_f64(const std::string& key, const std::string& value)
{
	try {
		std::size_t pos = 0;
		double v = std::stod(value, &pos);
		if(pos != value.size()) {
			bad_value(key, value);
		}
		return v;
	} catch(const ConfigError&) {
		throw;
	} catch(const std::exception&) {
		bad_value(key, value);
	}
}

bool parse_bool(const std::string& key, const std::string& value)
{
	if(value == "true" || value == "yes" || value == "on" || value == "1") {
		return true;
	}
	if(value == "false" || value == "no" || value == "off" || value == "0") {
		return false;
	}
	bad_value(key, value);
}

std::vector<std::string> split_list(const std::string& value)
{
	std::vector<std::string> out;
	std::string item;
	std::istringstream in(value);
	while(std::getline(in, item, ',')) {
		item = trim(item);
		if(!item.empty()) {
			out.push_back(item);
		}
	}
	return out;
}

std::vector<std::int64_t> parse_i64_list(const std::string& key,
                                         const std::string& value)
{
	std::vector<std::int64_t> out;
	for(const std::string& item : split_list(value)) {
		out.push_back(parse_i64(key, item));
	}
	if(out.empty()) {
		bad_value(key, value);
	}
	return out;
}

std::vector<std::uint64_t> parse_u64_list(const std::string& key,
                                          const std::string& value)
{
	std::vector<std::uint64_t> out;
	for(const std::string& item : split_list(value)) {
		out.push_back(parse_u64(key, item));
	}
	if(out.empty()) {
		bad_value(key, value);
	}
	return out;
}

struct KeyValue {
	std::string key;
	std::string value;
	std::size_t line;
};

struct Section {
	std::string name;
	std::vector<KeyValue> entries;
};

[[noreturn]] void unknown_key(const std::string& key, const std::string& sect)
{
	throw ConfigError("unknown key '" + key + "' in section [" + sect + "]");
}

void apply_machine(const Section& sect, MachineSpec& m)
{
	for(const KeyValue& kv : sect.entries) {
		if(kv.key == "cores") {
			m.core_count =
			    static_cast<std::int32_t>(parse_i64(kv.key, kv.value));
		} else if(kv.key == "quantum_us") {
			m.quantum = parse_i64(kv.key, kv.value);
		} else if(kv.key == "period_us") {
			m.period = parse_i64(kv.key, kv.value);
		} else if(kv.key.rfind("cgroup.", 0) == 0) {
			std::string name = kv.key.substr(7);
			if(name.empty()) {
				unknown_key(kv.key, sect.name);
			}
			if(name == "root") {
				throw ConfigError("the root cgroup quota is fixed at 1.0");
			}
			double quota = parse_f64(kv.key, kv.value);
			bool found = false;
			for(CgroupSpec& g : m.cgroups) {
				if(g.name == name) {
					g.quota_fraction = quota;
					found = true;
				}
			}
			if(!found) {
				m.cgroups.push_back(CgroupSpec{name, quota});
			}
		} else {
			unknown_key(kv.key, sect.name);
		}
	}
}

void apply_costs(const Section& sect, CostModel& c)
{
	for(const KeyValue& kv : sect.entries) {
		if(kv.key == "kernel_record_cost_us") {
			c.kernel_record_cost = parse_i64(kv.key, kv.value);
		} else if(kv.key == "consume_cost_us") {
			c.consume_cost = parse_i64(kv.key, kv.value);
		} else if(kv.key == "consumer_load_cost_us") {
			c.consumer_load_cost = parse_i64(kv.key, kv.value);
		} else if(kv.key == "consumer_invoke_cost_us") {
			c.consumer_invoke_cost = parse_i64(kv.key, kv.value);
		} else if(kv.key == "consumer_exit_cost_us") {
			c.consumer_exit_cost = parse_i64(kv.key, kv.value);
		} else if(kv.key == "context_switch_cost_us") {
			c.context_switch_cost = parse_i64(kv.key, kv.value);
		} else {
			unknown_key(kv.key, sect.name);
		}
	}
}

void apply_collector(const Section& sect, std::optional<CollectorArch>& arch,
                     std::string& preset_name)
{
	// The preset picks the base shape regardless of key order; every
	// other key is an override on top of it.
	for(const KeyValue& kv : sect.entries) {
		if(kv.key == "preset") {
			preset_name = kv.value;
		}
	}
	if(preset_name == "none") {
		if(sect.entries.size() > 1) {
			throw ConfigError(
			    "collector overrides need a preset other than none");
		}
		arch.reset();
		return;
	}
	CollectorArch a = make_preset(preset_name);
	for(const KeyValue& kv : sect.entries) {
		if(kv.key == "preset") {
			continue;
		}
		if(kv.key == "buffer_bytes") {
			a.buffer_bytes = parse_u64(kv.key, kv.value);
		} else if(kv.key == "buffer_records") {
			a.buffer_records = parse_u64(kv.key, kv.value);
		} else if(kv.key == "grow_factor") {
			a.grow_factor =
			    static_cast<std::uint32_t>(parse_u64(kv.key, kv.value));
		} else if(kv.key == "claim_batch") {
			a.claim_batch =
			    static_cast<std::uint32_t>(parse_u64(kv.key, kv.value));
		} else if(kv.key == "capture_cost_multiplier") {
			a.capture_cost_multiplier =
			    static_cast<std::uint32_t>(parse_u64(kv.key, kv.value));
		} else if(kv.key == "dedicated_core") {
			a.dedicated_core = parse_bool(kv.key, kv.value);
		} else if(kv.key == "cgroup") {
			a.collector_cgroup = kv.value;
		} else if(kv.key == "reduction_capacity_per_core") {
			if(!a.reduction) {
				a.reduction = ReductionSpec{};
			}
			a.reduction->capacity_events_per_sec_per_core =
			    parse_i64(kv.key, kv.value);
		} else if(kv.key == "reduction_ratio") {
			if(!a.reduction) {
				a.reduction = ReductionSpec{};
			}
			a.reduction->reduction_ratio = parse_f64(kv.key, kv.value);
		} else {
			unknown_key(kv.key, sect.name);
		}
	}
	a.validate();
	arch = a;
}

AppSpec parse_workload(const Section& sect, const std::string& name)
{
	std::string type = "producer";
	for(const KeyValue& kv : sect.entries) {
		if(kv.key == "type") {
			type = kv.value;
		}
	}
	AppCommon common;
	common.name = name;
	auto common_key = [&](const KeyValue& kv) {
		if(kv.key == "type") {
			return true;
		}
		if(kv.key == "cgroup") {
			common.cgroup = kv.value;
			return true;
		}
		if(kv.key == "pinned_core") {
			common.pinned_core =
			    static_cast<CoreId>(parse_i64(kv.key, kv.value));
			return true;
		}
		if(kv.key == "arg_sizes") {
			common.arg_sizes.clear();
			for(std::uint64_t v : parse_u64_list(kv.key, kv.value)) {
				common.arg_sizes.push_back(static_cast<std::uint32_t>(v));
			}
			return true;
		}
		return false;
	};
	if(type == "producer") {
		SuperProducerSpec s;
		for(const KeyValue& kv : sect.entries) {
			if(common_key(kv)) {
				continue;
			}
			if(kv.key == "rate_per_proc") {
				s.peak_rate_per_proc = parse_i64(kv.key, kv.value);
			} else if(kv.key == "write_fraction") {
				s.write_fraction = parse_f64(kv.key, kv.value);
			} else if(kv.key == "processes") {
				s.process_count =
				    static_cast<std::int32_t>(parse_i64(kv.key, kv.value));
			} else if(kv.key == "stochastic") {
				s.stochastic = parse_bool(kv.key, kv.value);
			} else if(kv.key == "events_total") {
				s.events_total = parse_i64(kv.key, kv.value);
			} else {
				unknown_key(kv.key, sect.name);
			}
		}
		s.common = common;
		return s;
	}
	if(type == "server") {
		ServerAppSpec s;
		for(const KeyValue& kv : sect.entries) {
			if(common_key(kv)) {
				continue;
			}
			if(kv.key == "request_cpu_cost_us") {
				s.request_cpu_cost = parse_i64(kv.key, kv.value);
			} else if(kv.key == "events_per_request") {
				s.events_per_request =
				    static_cast<std::int32_t>(parse_i64(kv.key, kv.value));
			} else if(kv.key == "offered_rps") {
				s.offered_rps = parse_f64(kv.key, kv.value);
			} else if(kv.key == "concurrency") {
				s.concurrency =
				    static_cast<std::int32_t>(parse_i64(kv.key, kv.value));
			} else {
				unknown_key(kv.key, sect.name);
			}
		}
		s.common = common;
		return s;
	}
	if(type == "malware") {
		MalwareSpec s;
		for(const KeyValue& kv : sect.entries) {
			if(common_key(kv)) {
				continue;
			}
			if(kv.key == "strike_min_us") {
				s.strike_min = parse_i64(kv.key, kv.value);
			} else if(kv.key == "strike_max_us") {
				s.strike_max = parse_i64(kv.key, kv.value);
			} else if(kv.key == "marker_count") {
				s.marker_count =
				    static_cast<std::int32_t>(parse_i64(kv.key, kv.value));
			} else if(kv.key == "inter_marker_gap_us") {
				s.inter_marker_gap = parse_i64(kv.key, kv.value);
			} else {
				unknown_key(kv.key, sect.name);
			}
		}
		s.common = common;
		return s;
	}
	if(type == "probe") {
		MemoryProbeSpec s;
		for(const KeyValue& kv : sect.entries) {
			if(common_key(kv)) {
				continue;
			}
			if(kv.key == "probe_interval_us") {
				s.probe_interval = parse_i64(kv.key, kv.value);
			} else if(kv.key == "probe_count") {
				s.probe_count = parse_i64(kv.key, kv.value);
			} else {
				unknown_key(kv.key, sect.name);
			}
		}
		s.common = common;
		return s;
	}
	throw ConfigError("unknown workload type '" + type + "' in section [" +
	                  sect.name + "]; valid: producer | server | malware "
	                  "| probe");
}

void apply_experiment(const Section& sect, ExperimentSpec& e)
{
	for(const KeyValue& kv : sect.entries) {
		if(kv.key == "harness") {
			e.harness = kv.value;
		} else if(kv.key == "preset") {
			e.preset = kv.value;
		} else if(kv.key == "seed") {
			e.seed = parse_u64(kv.key, kv.value);
		} else if(kv.key == "duration_s") {
			e.duration = seconds_us(parse_f64(kv.key, kv.value));
		} else if(kv.key == "out") {
			e.out_dir = kv.value;
		} else if(kv.key == "rates") {
			e.rates = parse_i64_list(kv.key, kv.value);
		} else if(kv.key == "trials") {
			e.trials =
			    static_cast<std::int32_t>(parse_i64(kv.key, kv.value));
		} else if(kv.key == "scenario") {
			e.scenario = kv.value;
		} else if(kv.key == "success_any_dropped") {
			e.success_any_dropped = parse_bool(kv.key, kv.value);
		} else if(kv.key == "archs") {
			e.archs = split_list(kv.value);
		} else if(kv.key == "victim_rates") {
			e.victim_rates = parse_i64_list(kv.key, kv.value);
		} else if(kv.key == "offered_rate") {
			e.offered_rate = parse_i64(kv.key, kv.value);
		} else if(kv.key == "buffer_sizes") {
			e.buffer_sizes = parse_u64_list(kv.key, kv.value);
		} else {
			unknown_key(kv.key, sect.name);
		}
	}
	static const char* harnesses[] = {"sim",  "rq1", "pdos",
	                                  "pados", "rq4", "rq5"};
	bool ok = false;
	for(const char* h : harnesses) {
		if(e.harness == h) {
			ok = true;
		}
	}
	if(!ok) {
		throw ConfigError("unknown harness '" + e.harness +
		                  "'; valid: sim | rq1 | pdos | pados | rq4 | rq5");
	}
	if(e.scenario != "default" && e.scenario != "cgroup" &&
	   e.scenario != "both") {
		throw ConfigError("unknown scenario '" + e.scenario +
		                  "'; valid: default | cgroup | both");
	}
	if(e.preset != "none") {
		make_preset(e.preset); // throws on unknown names
	}
}

} // namespace

ResolvedConfig parse_config_text(const std::string& text)
{
	std::vector<Section> sections;
	std::istringstream in(text);
	std::string raw;
	std::size_t lineno = 0;
	Section* cur = nullptr;
	while(std::getline(in, raw)) {
		++lineno;
		std::string line = raw;
		std::size_t hash = line.find('#');
		if(hash != std::string::npos) {
			line = line.substr(0, hash);
		}
		line = trim(line);
		if(line.empty()) {
			continue;
		}
		if(line.front() == '[') {
			if(line.back() != ']' || line.size() < 3) {
				throw ConfigError("malformed section header at line " +
				                  std::to_string(lineno) + ": " + trim(raw));
			}
			sections.push_back(Section{line.substr(1, line.size() - 2), {}});
			cur = &sections.back();
			continue;
		}
		std::size_t eq = line.find('=');
		if(eq == std::string::npos) {
			throw ConfigError("expected 'key = value' at line " +
			                  std::to_string(lineno) + ": " + line);
		}
		if(cur == nullptr) {
			throw ConfigError("key outside any section at line " +
			                  std::to_string(lineno) + ": " + line);
		}
		KeyValue kv;
		kv.key = trim(line.substr(0, eq));
		kv.value = trim(line.substr(eq + 1));
		kv.line = lineno;
		if(kv.key.empty()) {
			throw ConfigError("empty key at line " + std::to_string(lineno));
		}
		cur->entries.push_back(kv);
	}

	ResolvedConfig cfg;
	std::string preset_name = "nodrop";
	std::vector<std::string> seen_workloads;
	for(const Section& sect : sections) {
		if(sect.name == "machine") {
			apply_machine(sect, cfg.machine);
		} else if(sect.name == "costs") {
			apply_costs(sect, cfg.costs);
		} else if(sect.name == "collector") {
			apply_collector(sect, cfg.arch, preset_name);
		} else if(sect.name == "experiment") {
			apply_experiment(sect, cfg.experiment);
		} else if(sect.name.rfind("workload.", 0) == 0) {
			std::string name = sect.name.substr(9);
			if(name.empty()) {
				throw ConfigError("workload section needs a name: [" +
				                  sect.name + "]");
			}
			if(std::find(seen_workloads.begin(), seen_workloads.end(),
			             name) != seen_workloads.end()) {
				throw ConfigError("duplicate workload section [" +
				                  sect.name + "]");
			}
			seen_workloads.push_back(name);
			cfg.apps.push_back(parse_workload(sect, name));
		} else {
			throw ConfigError("unknown section [" + sect.name +
			                  "]; valid: machine | costs | collector | "
			                  "workload.<name> | experiment");
		}
	}
	cfg.machine.validate();
	cfg.costs.validate();
	if(cfg.arch) {
		cfg.arch->validate();
	}
	return cfg;
}

ResolvedConfig parse_config_file(const std::string& path)
{
	std::ifstream in(path, std::ios::binary);
	if(!in) {
		throw ConfigError("cannot open config file: " + path);
	}
	std::ostringstream buf;
	buf << in.rdbuf();
	return parse_config_text(buf.str());
}

SimConfig ResolvedConfig::sim_config() const
{
	SimConfig cfg;
	cfg.machine = machine;
	cfg.costs = costs;
	cfg.arch = arch;
	cfg.apps = apps;
	cfg.seed = experiment.seed;
	cfg.trace_enabled = trace_enabled;
	return cfg;
}

std::string default_config_text()
{
	return R"(# audit-arena configuration; every key shown at its default.

[machine]
cores = 1
quantum_us = 1000
period_us = 100000
# Extra cgroups with CPU quotas (fraction of the whole machine):
# cgroup.victim = 0.8

[costs]
kernel_record_cost_us = 2
consume_cost_us = 250
consumer_load_cost_us = 1000
consumer_invoke_cost_us = 10
consumer_exit_cost_us = 10
context_switch_cost_us = 5

[collector]
# One of: sysdig | audit | lttng | camflow | sysdig-integrity |
# sysdig-cpr | nodrop | none
preset = nodrop
# Overrides (commented values are the preset's own defaults):
# buffer_bytes = 8388608
# buffer_records = 8192
# grow_factor = 8
# claim_batch = 64
# capture_cost_multiplier = 1
# dedicated_core = false
# cgroup = root
# reduction_capacity_per_core = 2000
# reduction_ratio = 0.70

# Workloads run only under the sim harness.
# [workload.hog]
# type = producer            # producer | server | malware | probe
# cgroup = root
# pinned_core = -1
# arg_sizes = 8, 100, 8
# rate_per_proc = 10000
# write_fraction = 1.0
# processes = 1
# stochastic = false
# events_total = 0

[experiment]
# sim | rq1 | pdos | pados | rq4 | rq5
harness = rq1
preset = nodrop
seed = 1
# duration_s = 30
# out = out
# rates = 1000, 2000, 4000          (rq1)
# trials = 100                      (pdos)
# scenario = both                   (pdos: default | cgroup | both)
# success_any_dropped = false       (pdos)
# archs = none, nodrop, sysdig-integrity   (pados)
# victim_rates = 200, 400, 600      (pados)
# offered_rate = 100000             (rq4)
# buffer_sizes = 524288, 1048576    (rq5)
)";
}

} // namespace arena
