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

#include "arena/types.hpp"

namespace arena {

// Every simulated action is priced from this table. Desk-scale defaults:
// the drain rate 10^6/consume_cost = 4,000 ev/s/core keeps 30-second
// sweeps cheap, and all acceptance checks are ratio-based rather than
// tied to the absolute constants.
struct CostModel {
	// In-kernel capture cost per event, charged to the emitting thread.
	// The real kernel-side figure is unpublished; this knob plus the
	// calibrate subcommand stand in for it.
	VirtualTime kernel_record_cost = 2;
	// Userspace processing cost per consumed record.
	VirtualTime consume_cost = 250;
	// One-time consumer image load (execve-like), per thread.
	VirtualTime consumer_load_cost = 1'000;
	// Entering/leaving consumer mode; no scheduler involvement.
	VirtualTime consumer_invoke_cost = 10;
	VirtualTime consumer_exit_cost = 10;
	// Core-level cost of switching between distinct threads, charged to
	// the system ledger rather than any cgroup.
	VirtualTime context_switch_cost = 5;

	void validate() const
	{
		if(kernel_record_cost < 0 || consume_cost <= 0 ||
		   consumer_load_cost < 0 || consumer_invoke_cost < 0 ||
		   consumer_exit_cost < 0 || context_switch_cost < 0) {
			throw ConfigError("cost model values must be non-negative "
			                  "(consume_cost strictly positive)");
		}
	}
};

} // namespace arena
