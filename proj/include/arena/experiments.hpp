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

#include <cstdint>
#include <string>
#include <vector>

#include "arena/cost.hpp"
#include "arena/engine.hpp"
#include "arena/metrics.hpp"
#include "arena/types.hpp"

namespace arena {

// Closed-form loss fraction of a fluid queue with deterministic arrival
// rate lambda, drain rate mu, and a buffer of buffer_events records,
// observed over `seconds`: max(0, ((lambda-mu)*T - B) / (lambda*T)).
double fluid_drop_fraction(double lambda, double mu, double buffer_events,
                           double seconds);

// First moment the buffer overflows: B / (lambda - mu), in microseconds.
// Negative means never (lambda <= mu).
double fluid_first_drop_us(double lambda, double mu, double buffer_events);

// ---------------------------------------------------------------------
// RQ1: drop fraction vs offered rate.
// ---------------------------------------------------------------------

struct SweepOptions {
	// 0 keeps the preset's default buffer capacity.
	std::uint64_t buffer_bytes_override = 0;
	std::uint64_t buffer_records_override = 0;
	VirtualTime duration = seconds_us(30);
	std::uint64_t seed = 1;
};

struct RatePoint {
	std::int64_t rate = 0;
	std::int64_t generated = 0;
	std::int64_t handled = 0;
	std::int64_t dropped = 0;
	double drop_fraction = 0.0;
};

struct SweepResult {
	std::vector<RatePoint> points;
	std::string csv;
};

// One deterministic run per rate on the reference two-core topology:
// producer pinned to core 0, centralized collectors on a dedicated
// core. "none" as preset disables auditing entirely.
SweepResult rq1_drop_sweep(const std::string& preset,
                           const std::vector<std::int64_t>& rates,
                           const SweepOptions& opt);

// The default 12-point rate grid, up to 20x the consumer capacity.
std::vector<std::int64_t> rq1_default_rates();

// ---------------------------------------------------------------------
// PDoS: marker survival under super-producer saturation.
// ---------------------------------------------------------------------

enum class PdosScenario : std::uint8_t {
	DefaultLinux,   // everything in the root cgroup
	CgroupIsolated, // attacker and target capped by separate cgroups
};

const char* pdos_scenario_name(PdosScenario s);

struct PdosOptions {
	std::int32_t trials = 100;
	std::uint64_t seed = 1;
	// Strict success requires every marker dropped; the lax reading
	// counts a trial successful if any marker dropped.
	bool success_any_dropped = false;
	VirtualTime duration = seconds_us(3);
};

struct PdosResult {
	std::vector<AttackOutcome> outcomes;
	std::int32_t successes = 0;
	std::int32_t trials = 0;
	std::string csv;
	std::string summary; // "k/N"
};

PdosResult pdos_trials(const std::string& preset, PdosScenario scenario,
                       const PdosOptions& opt);

// ---------------------------------------------------------------------
// PADoS: co-located target throughput vs victim offered load.
// ---------------------------------------------------------------------

struct PadosOptions {
	// Capped so the baseline victim stays inside its CPU quota at every
	// point; the event rate still spans far past collector capacity.
	std::vector<std::int64_t> victim_rates_rps = {200, 400,  600, 800,
	                                              1000, 1200, 1400};
	std::uint64_t seed = 1;
	VirtualTime duration = seconds_us(30);
	// CgroupIsolated pins the target at 20% and the victim at 80%.
	PdosScenario scenario = PdosScenario::CgroupIsolated;
};

struct PadosCurve {
	std::string arch; // "none" is the No-Consumer baseline
	std::vector<double> target_throughput_rps;
};

struct PadosResult {
	std::vector<std::int64_t> victim_rates_rps;
	std::vector<PadosCurve> curves;
	std::string csv;
};

// Runs the cgroup-isolated 20/80 scenario for the No-Consumer baseline
// plus each named preset, returning one throughput curve per arch.
PadosResult pados_run(const std::vector<std::string>& presets,
                      const PadosOptions& opt);

// ---------------------------------------------------------------------
// RQ4: reduction futility under sysdig-cpr.
// ---------------------------------------------------------------------

struct Rq4Options {
	std::int64_t offered_rate = 100'000;
	std::uint64_t seed = 1;
	VirtualTime duration = seconds_us(30);
};

struct Rq4Result {
	double realized_over_offered = 0.0;
	double downstream_over_recorded = 0.0;
	std::int64_t generated = 0;
	std::int64_t recorded = 0;
	std::int64_t downstream = 0;
	std::string csv;
};

Rq4Result rq4_reduction_run(const Rq4Options& opt);

// ---------------------------------------------------------------------
// RQ5: buffer size vs drop fraction and time to first drop.
// ---------------------------------------------------------------------

struct Rq5Options {
	std::vector<std::uint64_t> buffer_sizes_bytes = {
	    512u << 10, 1u << 20, 2u << 20, 4u << 20, 8u << 20};
	std::int64_t rate = 40'000; // 10x the default consumer capacity
	std::uint64_t seed = 1;
	// Observation horizon per size, as a multiple of the fill time.
	double fill_time_multiple = 100.0;
};

struct Rq5Point {
	std::uint64_t size_bytes = 0;
	std::int64_t buffer_events = 0;
	double drop_fraction = 0.0;
	VirtualTime first_drop_us = -1; // -1 means no drop observed
};

struct Rq5Result {
	std::vector<Rq5Point> points;
	std::string csv;
};

Rq5Result rq5_buffer_sweep(const std::string& preset, const Rq5Options& opt);

// ---------------------------------------------------------------------
// Calibration: fits cost knobs to named reference behaviors and emits
// a config snippet. Never mutates defaults.
// ---------------------------------------------------------------------

struct CalibrationResult {
	bool identity = false;   // defaults already satisfy the target
	bool feasible = true;
	std::string snippet;     // config fragment to apply, empty if identity
	std::string report;
};

// Targets: "ordering" (per-core-buffer drop fraction ordering),
// "audit-saturation" (message-queue transport saturates at 1% of the
// fastest preset's peak rate), "lttng-one-core" (growable buffers big
// enough for zero single-core drops at the reference rate).
CalibrationResult calibrate(const std::string& target, const CostModel& costs);

// ---------------------------------------------------------------------
// CSV plumbing.
// ---------------------------------------------------------------------

// Writes csv to <dir>/<harness>_<preset>_<seed>.csv and returns the path.
std::string write_csv_file(const std::string& dir, const std::string& harness,
                           const std::string& preset, std::uint64_t seed,
                           const std::string& csv);

} // namespace arena
