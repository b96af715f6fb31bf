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

#include "arena/buffer.hpp"
#include "arena/types.hpp"

namespace arena {

// Who runs the consuming computation.
enum class ComputeMode : std::uint8_t {
	SingleThread,   // one centralized collector thread
	PerCoreThreads, // one collector thread pinned per core
	Threadlet,      // in-thread consumer, no collector threads at all
};

enum class SyncMode : std::uint8_t {
	Async, // producers never wait; overflow drops or grows
	Sync,  // overflow stalls the producer until space exists
};

const char* compute_mode_name(ComputeMode m);
const char* sync_mode_name(SyncMode m);

// Pre-consumption filtering stage (collaborative provenance reduction).
// The filter itself has finite capacity; survivors proceed to the normal
// consume stage.
struct ReductionSpec {
	// Records the reduction stage can process per second per core.
	std::int64_t capacity_events_per_sec_per_core = 2'000;
	// Fraction of records discarded by the filter.
	double reduction_ratio = 0.70;

	VirtualTime cost_per_record() const
	{
		return kMicrosPerSecond / capacity_events_per_sec_per_core;
	}
};

// One point in the taxonomy: computation isolation x data isolation x
// synchronization, plus capacity and policy knobs.
struct CollectorArch {
	std::string name = "nodrop";
	ComputeMode compute = ComputeMode::Threadlet;
	BufferScheme scheme = BufferScheme::PerThread;
	SyncMode sync = SyncMode::Sync;
	OverflowPolicy overflow = OverflowPolicy::BlockProducer;
	CapacityMode capacity_mode = CapacityMode::Bytes;
	std::uint64_t buffer_bytes = 8u << 20;
	// Grow cap for GrowUpTo, as a multiple of the initial capacity.
	std::uint32_t grow_factor = 8;
	std::uint64_t buffer_records = 8'192;
	// Per-event capture cost multiplier (message-transport penalty for
	// the audit preset; 1 elsewhere).
	std::uint32_t capture_cost_multiplier = 1;
	// Records claimed per collector drain step.
	std::uint32_t claim_batch = 64;
	std::optional<ReductionSpec> reduction;
	// Harness option: reserve one extra core that only collector
	// threads may use.
	bool dedicated_core = false;
	std::string collector_cgroup = "root";

	std::uint64_t grow_max_bytes() const
	{
		return buffer_bytes * grow_factor;
	}

	void validate() const;
	LoggingBuffer make_buffer() const;
};

// Named presets, CLI-visible.
std::vector<std::string> preset_names();
CollectorArch make_preset(const std::string& name);

} // namespace arena
