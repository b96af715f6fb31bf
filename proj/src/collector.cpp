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

#include "arena/collector.hpp"

#include <cmath>

#include "arena/engine.hpp"

namespace arena {

const char* compute_mode_name(ComputeMode m)
{
	switch(m) {
	case ComputeMode::SingleThread:
		return "single-thread";
	case ComputeMode::PerCoreThreads:
		return "per-core-threads";
	case ComputeMode::Threadlet:
		return "threadlet";
	}
	return "unknown";
}

const char* sync_mode_name(SyncMode m)
{
	return m == SyncMode::Async ? "async" : "sync";
}

void CollectorArch::validate() const
{
	if(compute == ComputeMode::Threadlet) {
		if(scheme != BufferScheme::PerThread || sync != SyncMode::Sync) {
			throw ConfigError("threadlet compute requires per-thread "
			                  "buffers and sync mode");
		}
		if(overflow != OverflowPolicy::BlockProducer) {
			throw ConfigError("threadlet overflow must be block-producer "
			                  "(the block is the consumer handoff)");
		}
	}
	if(compute == ComputeMode::PerCoreThreads && scheme != BufferScheme::PerCore) {
		throw ConfigError("per-core collector threads require per-core buffers");
	}
	if(reduction.has_value()) {
		if(sync != SyncMode::Sync) {
			throw ConfigError("reduction requires sync mode");
		}
		if(reduction->capacity_events_per_sec_per_core <= 0 ||
		   reduction->reduction_ratio < 0.0 || reduction->reduction_ratio > 1.0) {
			throw ConfigError("bad reduction parameters");
		}
	}
	if(sync == SyncMode::Sync && overflow != OverflowPolicy::BlockProducer) {
		throw ConfigError("sync mode implies block-producer overflow");
	}
	if(sync == SyncMode::Async && overflow == OverflowPolicy::BlockProducer) {
		throw ConfigError("async mode cannot block producers");
	}
	if(capacity_mode == CapacityMode::Records && scheme != BufferScheme::Single) {
		throw ConfigError("record-capacity mode is for single message queues");
	}
	if(claim_batch == 0) {
		throw ConfigError("claim batch must be >= 1");
	}
	if(capture_cost_multiplier == 0) {
		throw ConfigError("capture cost multiplier must be >= 1");
	}
	if(capacity_mode == CapacityMode::Bytes && buffer_bytes == 0) {
		throw ConfigError("buffer bytes must be positive");
	}
	if(capacity_mode == CapacityMode::Records && buffer_records == 0) {
		throw ConfigError("buffer record capacity must be positive");
	}
	if(overflow == OverflowPolicy::GrowUpTo && grow_factor < 1) {
		throw ConfigError("grow factor must be >= 1");
	}
}

LoggingBuffer CollectorArch::make_buffer() const
{
	if(capacity_mode == CapacityMode::Records) {
		return LoggingBuffer::records_capacity(buffer_records, overflow);
	}
	if(overflow == OverflowPolicy::GrowUpTo) {
		return LoggingBuffer::bytes_capacity(buffer_bytes, overflow,
		                                     grow_max_bytes());
	}
	return LoggingBuffer::bytes_capacity(buffer_bytes, overflow);
}

std::vector<std::string> preset_names()
{
	return {"sysdig", "audit",      "lttng",      "camflow",
	        "nodrop", "sysdig-integrity", "sysdig-cpr"};
}

CollectorArch make_preset(const std::string& name)
{
	CollectorArch arch;
	arch.name = name;
	if(name == "sysdig") {
		arch.compute = ComputeMode::SingleThread;
		arch.scheme = BufferScheme::PerCore;
		arch.sync = SyncMode::Async;
		arch.overflow = OverflowPolicy::DropNew;
	} else if(name == "audit") {
		arch.compute = ComputeMode::SingleThread;
		arch.scheme = BufferScheme::Single;
		arch.sync = SyncMode::Async;
		arch.overflow = OverflowPolicy::DropNew;
		arch.capacity_mode = CapacityMode::Records;
		// Message-transport penalty: per-event capture is priced at 4x
		// kernel_record_cost, calibrated so this preset saturates near
		// 1% of the fastest framework's generation speed.
		arch.capture_cost_multiplier = 4;
	} else if(name == "lttng") {
		arch.compute = ComputeMode::SingleThread;
		arch.scheme = BufferScheme::PerCore;
		arch.sync = SyncMode::Async;
		arch.overflow = OverflowPolicy::GrowUpTo;
	} else if(name == "camflow") {
		arch.compute = ComputeMode::PerCoreThreads;
		arch.scheme = BufferScheme::PerCore;
		arch.sync = SyncMode::Async;
		arch.overflow = OverflowPolicy::GrowUpTo;
	} else if(name == "sysdig-integrity") {
		arch.compute = ComputeMode::SingleThread;
		arch.scheme = BufferScheme::PerCore;
		arch.sync = SyncMode::Sync;
		arch.overflow = OverflowPolicy::BlockProducer;
	} else if(name == "sysdig-cpr") {
		// The blocking variant with the kernel-side reduction stage in
		// front of the consumer. Reduction capacity is per core and the
		// filter runs as one thread per core, so drain scales linearly
		// with core count.
		arch.compute = ComputeMode::PerCoreThreads;
		arch.scheme = BufferScheme::PerCore;
		arch.sync = SyncMode::Sync;
		arch.overflow = OverflowPolicy::BlockProducer;
		arch.reduction = ReductionSpec{};
	} else if(name == "nodrop") {
		arch.compute = ComputeMode::Threadlet;
		arch.scheme = BufferScheme::PerThread;
		arch.sync = SyncMode::Sync;
		arch.overflow = OverflowPolicy::BlockProducer;
	} else {
		std::string valid;
		for(const std::string& p : preset_names()) {
			valid += valid.empty() ? p : (" | " + p);
		}
		throw ConfigError("unknown preset '" + name + "'; valid presets: " + valid);
	}
	arch.validate();
	return arch;
}

// ---------------------------------------------------------------------
// Centralized collector threads (single or per-core). Each thread
// sleeps until a push wakes it, then loops: claim a batch (freeing
// space instantly), pay the processing cost on CPU, repeat until its
// buffers are empty.
// ---------------------------------------------------------------------

namespace {

class CollectorProgram final : public ThreadProgram {
public:
	explicit CollectorProgram(const CollectorArch& arch) : arch_(arch) {}

	void on_start(Engine& eng, ThreadRt& t) override
	{
		(void)eng;
		(void)t; // stays asleep until the first push
	}

	void on_wake(Engine& eng, ThreadRt& t) override
	{
		eng.set_phase(t, 0, Account::CollectorWork, 0);
		eng.wake_thread(t);
	}

	void on_phase_done(Engine& eng, ThreadRt& t) override
	{
		switch(stage_) {
		case Stage::Scan:
			next_claim(eng, t);
			return;
		case Stage::Reduce: {
			// Exact floor-based keep counter: survivors through n seen
			// records = floor(n * keep). Long-run ratio is exact.
			std::int64_t keep_ppm = static_cast<std::int64_t>(
			    std::llround((1.0 - arch_.reduction->reduction_ratio) * 1e6));
			std::int64_t before = seen_ * keep_ppm / 1'000'000;
			seen_ += batch_;
			std::int64_t after = seen_ * keep_ppm / 1'000'000;
			survivors_ = after - before;
			std::int64_t discarded = batch_ - survivors_;
			eng.account_consumed(discarded, 0, discarded);
			if(survivors_ > 0) {
				stage_ = Stage::Consume;
				eng.set_phase(t, survivors_ * eng.costs().consume_cost,
				              Account::CollectorWork, 0);
			} else {
				stage_ = Stage::Scan;
				next_claim(eng, t);
			}
			return;
		}
		case Stage::Consume:
			eng.account_consumed(survivors_, survivors_, 0);
			stage_ = Stage::Scan;
			next_claim(eng, t);
			return;
		}
	}

private:
	enum class Stage : std::uint8_t { Scan, Reduce, Consume };

	void ensure_watched(Engine& eng, const ThreadRt& t)
	{
		if(watched_init_) {
			return;
		}
		watched_init_ = true;
		if(arch_.compute == ComputeMode::PerCoreThreads) {
			// A per-core collector owns exactly its core's buffer.
			if(t.pinned >= 0 &&
			   t.pinned < static_cast<CoreId>(eng.buffer_count())) {
				watched_.push_back(t.pinned);
			}
		} else {
			for(std::size_t b = 0; b < eng.buffer_count(); ++b) {
				watched_.push_back(static_cast<BufferId>(b));
			}
		}
	}

	void next_claim(Engine& eng, ThreadRt& t)
	{
		ensure_watched(eng, t);
		for(std::size_t i = 0; i < watched_.size(); ++i) {
			BufferId bid = watched_[(cursor_ + i) % watched_.size()];
			std::int64_t n = eng.claim_from_buffer(bid, arch_.claim_batch);
			if(n > 0) {
				cursor_ = (cursor_ + i + 1) % watched_.size();
				batch_ = n;
				if(arch_.reduction) {
					stage_ = Stage::Reduce;
					eng.set_phase(t, n * arch_.reduction->cost_per_record(),
					              Account::CollectorWork, 0);
				} else {
					survivors_ = n;
					stage_ = Stage::Consume;
					eng.set_phase(t, n * eng.costs().consume_cost,
					              Account::CollectorWork, 0);
				}
				return;
			}
		}
		stage_ = Stage::Scan;
		eng.set_phase(t, 0, Account::CollectorWork, 0);
		eng.sleep_thread(t);
	}

	CollectorArch arch_;
	std::vector<BufferId> watched_;
	bool watched_init_ = false;
	std::size_t cursor_ = 0;
	Stage stage_ = Stage::Scan;
	std::int64_t batch_ = 0;
	std::int64_t survivors_ = 0;
	std::int64_t seen_ = 0;
};

class CentralCollectorDriver final : public AppDriver {
public:
	explicit CentralCollectorDriver(const CollectorArch& arch) : arch_(arch) {}

	void install(Engine& eng, std::int32_t /*app_index*/) override
	{
		CgroupId g = eng.cgroup_id(arch_.collector_cgroup);
		ProcessId pid = eng.add_process(g);
		if(arch_.compute == ComputeMode::PerCoreThreads) {
			std::int32_t cores =
			    eng.config().machine.core_count;
			for(CoreId c = 0; c < cores; ++c) {
				ThreadRt& t = eng.add_thread(
				    pid, c, std::make_unique<CollectorProgram>(arch_), kNoId,
				    "collector.cpu" + std::to_string(c), {});
				t.is_collector = true;
			}
		} else {
			CoreId pin = kNoId;
			if(arch_.dedicated_core) {
				pin = eng.config().machine.core_count - 1;
			}
			ThreadRt& t = eng.add_thread(pid, pin,
			                             std::make_unique<CollectorProgram>(arch_),
			                             kNoId, "collector", {});
			t.is_collector = true;
		}
	}

	void on_action(Engine& eng, std::int64_t payload) override
	{
		(void)eng;
		(void)payload;
	}

private:
	CollectorArch arch_;
};

} // namespace

std::unique_ptr<AppDriver> make_collector_driver(const CollectorArch& arch)
{
	return std::make_unique<CentralCollectorDriver>(arch);
}

} // namespace arena
