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
#include <vector>

#include "arena/types.hpp"

namespace arena {

// The three kinds of events an auditing framework records.
enum class EventKind : std::uint32_t {
	Syscall = 1,
	ThreadSwitch = 2,
	Signal = 3,
};

const char* event_kind_name(EventKind k);

// Wire format of one record:
//   metadata: kind tag (4) + timestamp (8) + tid (8) + total_size (4)
//   per argument: 2-byte length header + payload
// Arguments longer than kMaxArgBytes are truncated to kMaxArgBytes; the
// length header stores the truncated length.
constexpr std::uint32_t kMetadataBytes = 24;
constexpr std::uint32_t kArgHeaderBytes = 2;
constexpr std::uint32_t kMaxArgBytes = 80;

// A captured event before serialization. arg_sizes holds the original
// (pre-truncation) argument lengths in bytes. ThreadSwitch and Signal
// events always carry two 8-byte arguments (prev/next tid, signo/target).
struct SimEvent {
	EventKind kind = EventKind::Syscall;
	VirtualTime timestamp = 0;
	ThreadId tid = 0;
	std::vector<std::uint32_t> arg_sizes;
	// Marker events are attack traces the adversary needs evicted. The
	// flag lives here, outside the wire format: a marker encodes to
	// exactly the same bytes as an ordinary event of the same shape.
	bool marker = false;

	static SimEvent syscall(VirtualTime ts, ThreadId tid,
	                        std::vector<std::uint32_t> args,
	                        bool marker = false);
	static SimEvent thread_switch(VirtualTime ts, ThreadId tid);
	static SimEvent signal(VirtualTime ts, ThreadId tid);
};

// Serialized size in bytes, without materializing the record.
std::uint32_t record_size(const SimEvent& ev);

// Serialized size for a bare argument-shape, used on the capture hot
// path where only byte counts matter.
std::uint32_t record_size_for_args(const std::vector<std::uint32_t>& arg_sizes);

// A fully serialized record. Payload bytes are a deterministic pattern
// so encoding is reproducible across runs.
struct EventRecord {
	std::vector<std::uint8_t> bytes;

	std::uint32_t size() const { return static_cast<std::uint32_t>(bytes.size()); }
};

EventRecord encode(const SimEvent& ev);

} // namespace arena
