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

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "arena/threadlet.hpp"
#include "arena/types.hpp"

namespace arena {

// Event-flow counters. Generation is counted when an emission resolves
// as stored or dropped; a producer stalled mid-push has not generated
// the event yet. This makes generated == recorded + dropped an exact
// identity at any instant.
struct FlowCounters {
	std::int64_t generated = 0;
	std::int64_t recorded = 0;
	std::int64_t dropped = 0;
	// Records claimed out of buffers by a consumer or collector.
	std::int64_t claimed = 0;
	// Records whose processing completed (includes reduction discards).
	std::int64_t consumed = 0;
	// Survivors of the reduction stage that reached the real consumer;
	// equals consumed when no reduction stage exists.
	std::int64_t downstream_consumed = 0;
	std::int64_t reduced_away = 0;

	std::int64_t marker_generated = 0;
	std::int64_t marker_recorded = 0;
	std::int64_t marker_dropped = 0;
};

struct ViolationLog {
	VirtualTime time = 0;
	ThreadId actor = kNoId;
	ThreadId region_owner = kNoId;
	AccessKind kind = AccessKind::Read;
};

struct SignalDelivery {
	VirtualTime time = 0;
	ThreadId target = kNoId;
	std::int32_t signal_id = 0;
	bool was_deferred = false;
};

// One cgroup's charge total within one accounting period, appended at
// each period boundary for the quota audit.
struct PeriodCharge {
	CgroupId cgroup = 0;
	VirtualTime period_start = 0;
	VirtualTime charged = 0;
	VirtualTime allowance = 0;
};

struct CoreLedger {
	VirtualTime busy = 0;        // thread work charged on this core
	VirtualTime switch_time = 0; // context-switch overhead
};

struct AppStats {
	std::string name;
	std::int64_t requests_completed = 0;
	std::int64_t requests_arrived = 0;
	double latency_sum_us = 0.0;
	std::int64_t events_emitted = 0;
	// Offered events for producers (what the schedule would emit
	// unthrottled); 0 when not applicable.
	std::int64_t events_offered = 0;
};

struct AttackOutcome {
	std::int32_t trial = 0;
	bool success = false;
	std::int32_t markers_recorded = 0;
	std::int32_t marker_count = 0;
};

struct MetricsLedger {
	FlowCounters flow;
	// cgroup x account charge matrix, microseconds.
	std::vector<std::array<VirtualTime, kAccountCount>> cgroup_account_us;
	std::vector<CoreLedger> cores;
	std::vector<PeriodCharge> period_log;
	std::vector<ViolationLog> violations;
	std::int64_t allowed_probes = 0;
	std::vector<SignalDelivery> signal_deliveries;
	std::vector<AppStats> apps;
	// End-of-run residuals, filled by finalize.
	std::int64_t residual_in_buffers = 0;
	std::int64_t in_flight = 0;
	VirtualTime first_drop_time = -1;
	VirtualTime duration = 0;

	VirtualTime cgroup_total_us(CgroupId g) const
	{
		VirtualTime sum = 0;
		for(VirtualTime v : cgroup_account_us[g]) {
			sum += v;
		}
		return sum;
	}

	double drop_fraction() const
	{
		if(flow.generated == 0) {
			return 0.0;
		}
		return static_cast<double>(flow.dropped) /
		       static_cast<double>(flow.generated);
	}
};

} // namespace arena
