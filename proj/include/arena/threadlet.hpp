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
#include <optional>
#include <vector>

#include "arena/types.hpp"

namespace arena {

enum class ConsumerPhase : std::uint8_t {
	Uninitialized, // image never loaded
	Loaded,        // load cost paid, consumer dormant
	Active,        // executing inside the host thread
	Exiting,       // final activation after host thread exit
};

const char* consumer_phase_name(ConsumerPhase p);

enum class InvokeTrigger : std::uint8_t {
	BufferFull,
	ThreadExit,
};

enum class AccessKind : std::uint8_t { Read, Write };
enum class AccessResult : std::uint8_t { Allowed, Violation };

// The five protected sections of a consumer image. All carry the same
// protection key; names exist for trace output only.
enum class RegionSection : std::uint8_t {
	Code,
	Globals,
	Heap,
	Stack,
	MappedBuffer,
};

constexpr std::array<const char*, 5> kRegionSectionNames = {
    "code", "globals", "heap", "stack", "mapped_buffer"};

// Memory-protection-key domain of one thread's consumer. The base
// address is a seeded random draw; its only testable properties are
// distinctness across threads and reproducibility under seed.
struct ProtectionRegion {
	std::uint64_t base = 0;
	std::int32_t key = kNoId;
	ThreadId owner = kNoId;
};

// Host-thread privilege flags the consumer escalates while Active.
struct PrivilegeFlags {
	bool rlimit_unlimited = false;
	bool seccomp_disabled = false;
	bool capacity_raised = false;

	bool operator==(const PrivilegeFlags&) const = default;
};

struct DeferredSignal {
	std::int32_t signal_id = 0;
	VirtualTime arrival = 0;
};

// Per-thread consumer bookkeeping. The engine drives the lifecycle;
// this struct holds state plus the counters the invariants check.
struct ConsumerState {
	ConsumerPhase phase = ConsumerPhase::Uninitialized;
	bool load_paid = false;
	std::optional<PrivilegeFlags> saved_privileges;
	std::vector<DeferredSignal> deferred_signals;
	ProtectionRegion region;
	// Key permission register of the host thread; enabled iff Active.
	bool key_enabled = false;

	std::uint64_t activations = 0;
	std::uint64_t load_charges = 0;
	std::int64_t events_consumed = 0;
	// Open Active window start, or kNoTime when closed.
	VirtualTime window_open = -1;
	std::vector<std::pair<VirtualTime, VirtualTime>> windows;
};

// Pure protection-domain check: allowed iff the touching thread's own
// key-permission register covers the region's key. Keys are
// thread-local, so one thread can never open another's region.
AccessResult access_check(ThreadId actor, bool actor_key_enabled,
                          std::int32_t actor_key, const ProtectionRegion& region,
                          AccessKind kind);

} // namespace arena
