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

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "arena/engine.hpp"
#include "arena/experiments.hpp"

namespace arena {

// What to run once the machine is described. "sim" executes the
// configured workloads directly; every other harness builds its own
// fixed topology and only takes preset/seed/duration/output knobs
// from the config.
struct ExperimentSpec {
	std::string harness = "rq1";
	std::string preset = "nodrop";
	std::uint64_t seed = 1;
	// 0 means use the harness default.
	VirtualTime duration = 0;
	std::string out_dir;
	// rq1
	std::vector<std::int64_t> rates;
	// pdos
	std::int32_t trials = 100;
	std::string scenario = "both"; // default | cgroup | both
	bool success_any_dropped = false;
	// pados
	std::vector<std::string> archs;
	std::vector<std::int64_t> victim_rates;
	// rq4
	std::int64_t offered_rate = 100'000;
	// rq5
	std::vector<std::uint64_t> buffer_sizes;
};

// Fully parsed configuration; sim_config() assembles the engine input.
struct ResolvedConfig {
	MachineSpec machine;
	CostModel costs;
	std::optional<CollectorArch> arch = make_preset("nodrop");
	std::vector<AppSpec> apps;
	ExperimentSpec experiment;
	bool trace_enabled = false;

	SimConfig sim_config() const;
};

// INI-style text: [section] headers, key = value lines, '#' comments.
// Unknown sections or keys raise ConfigError naming the offender.
ResolvedConfig parse_config_text(const std::string& text);
ResolvedConfig parse_config_file(const std::string& path);

// A fully commented config with every supported key at its default.
std::string default_config_text();

} // namespace arena
