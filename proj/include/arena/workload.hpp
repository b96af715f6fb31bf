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

#include <string>
#include <variant>
#include <vector>

#include "arena/types.hpp"

namespace arena {

// Fields shared by every application model.
struct AppCommon {
	std::string name;
	std::string cgroup = "root";
	// -1 lets the scheduler place threads anywhere.
	CoreId pinned_core = kNoId;
	// Serialized argument shape of every emitted event; [8, 100, 8]
	// mimics a write(fd, buf, count) with an oversized payload.
	std::vector<std::uint32_t> arg_sizes = {8, 100, 8};
};

// A tight emit loop: app-work gap then one audited syscall, repeated.
struct SuperProducerSpec {
	AppCommon common;
	std::int32_t process_count = 1;
	// Offered events per second per process at write_fraction 1.
	std::int64_t peak_rate_per_proc = 10'000;
	// Share of loop iterations that emit; the rest burn pure CPU.
	double write_fraction = 1.0;
	// Exponential inter-event gaps instead of deterministic ones.
	bool stochastic = false;
	// Stop after this many events per process; 0 means unbounded.
	std::int64_t events_total = 0;

	double offered_rate() const
	{
		return static_cast<double>(process_count) *
		       static_cast<double>(peak_rate_per_proc) * write_fraction;
	}
};

// Request-serving application. offered_rps > 0 gives an open-loop
// arrival stream dispatched to a worker pool; offered_rps == 0 gives a
// closed loop where each worker issues back-to-back requests.
struct ServerAppSpec {
	AppCommon common;
	VirtualTime request_cpu_cost = 100;
	std::int32_t events_per_request = 0;
	double offered_rps = 0.0;
	std::int32_t concurrency = 1;
};

// Dormant thread that wakes at a seeded strike time and emits
// marker-tagged command-and-control events through the normal pipeline.
struct MalwareSpec {
	AppCommon common;
	VirtualTime strike_min = 0;
	VirtualTime strike_max = 0; // == strike_min for a fixed strike time
	std::int32_t marker_count = 5;
	VirtualTime inter_marker_gap = 50;
};

// Adversary that periodically pokes its own consumer's protection
// region while the consumer is not Active; exists to exercise
// Violation logging.
struct MemoryProbeSpec {
	AppCommon common;
	VirtualTime probe_interval = 1'000;
	std::int64_t probe_count = 0; // 0 means unbounded
};

using AppSpec = std::variant<SuperProducerSpec, ServerAppSpec, MalwareSpec,
                             MemoryProbeSpec>;

const AppCommon& app_common(const AppSpec& spec);

} // namespace arena
