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

#include "arena/buffer.hpp"

namespace arena {

const char* buffer_scheme_name(BufferScheme s)
{
	switch(s) {
	case BufferScheme::PerThread:
		return "per-thread";
	case BufferScheme::PerCore:
		return "per-core";
	case BufferScheme::Single:
		return "single";
	}
	return "unknown";
}

const char* overflow_policy_name(OverflowPolicy p)
{
	switch(p) {
	case OverflowPolicy::DropNew:
		return "drop-new";
	case OverflowPolicy::GrowUpTo:
		return "grow-up-to";
	case OverflowPolicy::BlockProducer:
		return "block-producer";
	}
	return "unknown";
}

LoggingBuffer LoggingBuffer::bytes_capacity(std::uint64_t capacity_bytes,
                                            OverflowPolicy policy,
                                            std::uint64_t max_bytes)
{
	if(capacity_bytes == 0) {
		throw ConfigError("buffer byte capacity must be positive");
	}
	if(policy == OverflowPolicy::GrowUpTo && max_bytes < capacity_bytes) {
		throw ConfigError("grow cap smaller than initial buffer capacity");
	}
	LoggingBuffer b;
	b.mode_ = CapacityMode::Bytes;
	b.policy_ = policy;
	b.capacity_bytes_ = capacity_bytes;
	b.max_bytes_ = max_bytes;
	return b;
}

LoggingBuffer LoggingBuffer::records_capacity(std::uint64_t capacity_records,
                                              OverflowPolicy policy)
{
	if(capacity_records == 0) {
		throw ConfigError("buffer record capacity must be positive");
	}
	if(policy == OverflowPolicy::GrowUpTo) {
		throw ConfigError("grow policy requires a byte-capacity buffer");
	}
	LoggingBuffer b;
	b.mode_ = CapacityMode::Records;
	b.policy_ = policy;
	b.capacity_records_ = capacity_records;
	return b;
}

bool LoggingBuffer::fits(std::uint32_t size_bytes) const
{
	if(mode_ == CapacityMode::Bytes) {
		return used_bytes_ + size_bytes <= capacity_bytes_;
	}
	return queue_.size() + 1 <= capacity_records_;
}

bool LoggingBuffer::grow_to_fit(std::uint32_t size_bytes)
{
	while(capacity_bytes_ < max_bytes_ && used_bytes_ + size_bytes > capacity_bytes_) {
		capacity_bytes_ = std::min(capacity_bytes_ * 2, max_bytes_);
		stats_.grow_count++;
	}
	return used_bytes_ + size_bytes <= capacity_bytes_;
}

PushOutcome LoggingBuffer::push(const StoredRecord& rec)
{
	if(mode_ == CapacityMode::Bytes && rec.size_bytes > capacity_bytes_ &&
	   !(policy_ == OverflowPolicy::GrowUpTo && rec.size_bytes <= max_bytes_)) {
		throw ConfigError("record larger than buffer capacity");
	}
	if(!fits(rec.size_bytes)) {
		switch(policy_) {
		case OverflowPolicy::DropNew:
			stats_.pushed_count++;
			stats_.dropped_count++;
			stats_.dropped_bytes += rec.size_bytes;
			return PushOutcome::Dropped;
		case OverflowPolicy::GrowUpTo:
			if(!grow_to_fit(rec.size_bytes)) {
				stats_.pushed_count++;
				stats_.dropped_count++;
				stats_.dropped_bytes += rec.size_bytes;
				return PushOutcome::Dropped;
			}
			break;
		case OverflowPolicy::BlockProducer:
			stats_.would_block_count++;
			return PushOutcome::WouldBlock;
		}
	}
	queue_.push_back(rec);
	used_bytes_ += rec.size_bytes;
	stats_.pushed_count++;
	stats_.stored_count++;
	stats_.stored_bytes += rec.size_bytes;
	stats_.peak_bytes = std::max(stats_.peak_bytes, used_bytes_);
	stats_.peak_len = std::max<std::uint64_t>(stats_.peak_len, queue_.size());
	return PushOutcome::Stored;
}

std::size_t LoggingBuffer::pop_batch(std::size_t max_records,
                                     std::vector<StoredRecord>& out)
{
	std::size_t n = std::min(max_records, queue_.size());
	for(std::size_t i = 0; i < n; ++i) {
		const StoredRecord& rec = queue_.front();
		used_bytes_ -= rec.size_bytes;
		stats_.popped_count++;
		stats_.popped_bytes += rec.size_bytes;
		out.push_back(rec);
		queue_.pop_front();
	}
	return n;
}

bool LoggingBuffer::conservation_holds() const
{
	bool counts = stats_.pushed_count == stats_.popped_count +
	                                     stats_.dropped_count + queue_.size();
	bool stored = stats_.stored_count == stats_.popped_count + queue_.size();
	bool bytes = stats_.stored_bytes == stats_.popped_bytes + used_bytes_;
	return counts && stored && bytes;
}

} // namespace arena
