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
#include <deque>
#include <vector>

#include "arena/types.hpp"

namespace arena {

// How capture buffers are laid out across the machine.
enum class BufferScheme : std::uint8_t {
	PerThread, // one buffer per application thread
	PerCore,   // one buffer per CPU core
	Single,    // one buffer shared machine-wide
};

// What happens when a record does not fit.
enum class OverflowPolicy : std::uint8_t {
	DropNew,       // reject the incoming record, keep stored ones
	GrowUpTo,      // double capacity until it fits or the cap is reached,
	               // then reject like DropNew
	BlockProducer, // the pushing thread must wait for space
};

const char* buffer_scheme_name(BufferScheme s);
const char* overflow_policy_name(OverflowPolicy p);

enum class PushOutcome : std::uint8_t {
	Stored,
	Dropped,
	WouldBlock,
};

// Whether capacity is measured in bytes or in record slots. Message
// queues (audit) limit backlog by record count, ring buffers by bytes.
enum class CapacityMode : std::uint8_t {
	Bytes,
	Records,
};

// What a buffer keeps per stored record. Payload bytes are never
// materialized on the capture path; record_size() gives the same answer
// encode() would, so byte accounting is exact without the copy.
struct StoredRecord {
	std::uint32_t size_bytes = 0;
	bool marker = false;
};

struct BufferStats {
	// pushed counts every attempt that resolved (stored or dropped);
	// a blocked producer has not pushed yet and retries later.
	std::uint64_t pushed_count = 0;
	std::uint64_t stored_count = 0;
	std::uint64_t stored_bytes = 0;
	std::uint64_t popped_count = 0;
	std::uint64_t popped_bytes = 0;
	std::uint64_t dropped_count = 0;
	std::uint64_t dropped_bytes = 0;
	std::uint64_t would_block_count = 0;
	std::uint64_t peak_bytes = 0;
	std::uint64_t peak_len = 0;
	std::uint32_t grow_count = 0;
};

// A single FIFO capture buffer.
class LoggingBuffer {
public:
	LoggingBuffer() = default;

	static LoggingBuffer bytes_capacity(std::uint64_t capacity_bytes,
	                                    OverflowPolicy policy,
	                                    std::uint64_t max_bytes = 0);
	static LoggingBuffer records_capacity(std::uint64_t capacity_records,
	                                      OverflowPolicy policy);

	PushOutcome push(const StoredRecord& rec);
	// Claims up to max_records from the front into out (appended).
	// Space is freed immediately; processing cost is the caller's
	// problem. Returns the number claimed.
	std::size_t pop_batch(std::size_t max_records, std::vector<StoredRecord>& out);

	bool fits(std::uint32_t size_bytes) const;
	bool empty() const { return queue_.empty(); }
	std::size_t len() const { return queue_.size(); }
	std::uint64_t used_bytes() const { return used_bytes_; }
	std::uint64_t capacity_bytes() const { return capacity_bytes_; }
	std::uint64_t capacity_records() const { return capacity_records_; }
	CapacityMode mode() const { return mode_; }
	OverflowPolicy policy() const { return policy_; }
	const BufferStats& stats() const { return stats_; }

	// pushed == popped + dropped + residual, in records and in bytes.
	bool conservation_holds() const;

private:
	bool grow_to_fit(std::uint32_t size_bytes);

	CapacityMode mode_ = CapacityMode::Bytes;
	OverflowPolicy policy_ = OverflowPolicy::DropNew;
	std::uint64_t capacity_bytes_ = 0;
	std::uint64_t max_bytes_ = 0; // grow cap; only meaningful for GrowUpTo
	std::uint64_t capacity_records_ = 0;
	std::uint64_t used_bytes_ = 0;
	std::deque<StoredRecord> queue_;
	BufferStats stats_;
};

} // namespace arena
