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

#include <algorithm>
#include <deque>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "arena/buffer.hpp"
#include "arena/collector.hpp"
#include "arena/cost.hpp"
#include "arena/machine.hpp"
#include "arena/metrics.hpp"
#include "arena/threadlet.hpp"
#include "arena/trace.hpp"
#include "arena/workload.hpp"

namespace arena {

class Engine;
struct ThreadRt;

// ---------------------------------------------------------------------
// Action queue: the discrete-event core. Ties broken by insertion
// sequence so identical configs replay identically.
// ---------------------------------------------------------------------

enum class ActionKind : std::uint8_t {
	CoreAdvance,   // a = core id, b = segment generation
	ThreadWake,    // a = thread id
	AppAction,     // a = app index, b = driver-defined payload
	PeriodReset,   // no payload
	SignalInject,  // a = thread id, b = signal id
};

struct Action {
	VirtualTime at = 0;
	std::uint64_t seq = 0;
	ActionKind kind = ActionKind::CoreAdvance;
	std::int64_t a = 0;
	std::int64_t b = 0;
};

class ActionQueue {
public:
	void push(VirtualTime at, ActionKind kind, std::int64_t a, std::int64_t b)
	{
		heap_.push_back(Action{at, next_seq_++, kind, a, b});
		std::push_heap(heap_.begin(), heap_.end(), later);
	}

	bool empty() const { return heap_.empty(); }
	const Action& top() const { return heap_.front(); }

	Action pop()
	{
		std::pop_heap(heap_.begin(), heap_.end(), later);
		Action act = heap_.back();
		heap_.pop_back();
		return act;
	}

private:
	// Min-heap on (time, sequence).
	static bool later(const Action& x, const Action& y)
	{
		if(x.at != y.at) {
			return x.at > y.at;
		}
		return x.seq > y.seq;
	}

	std::vector<Action> heap_;
	std::uint64_t next_seq_ = 0;
};

// ---------------------------------------------------------------------
// Thread execution model. A thread runs one phase at a time; a phase is
// a stretch of CPU work with an optional trailing slice booked as
// KernelCapture (the audited syscall at the end of an app-work gap).
// Phases may be preempted at quantum boundaries and resumed later.
// ---------------------------------------------------------------------

struct Phase {
	VirtualTime total = 0;
	VirtualTime remaining = 0;
	VirtualTime capture_tail = 0;
	Account body = Account::AppWork;
};

enum class ThreadState : std::uint8_t {
	Runnable,
	Running,
	BlockedOnBuffer,
	Sleeping,
	Exited,
};

const char* thread_state_name(ThreadState s);

// Which consumer lifecycle stage the current phase belongs to; None
// means the phase is ordinary program work.
enum class ConsumerStage : std::uint8_t {
	None,
	Load,
	Invoke,
	Drain,
	Exit,
};

// Behavior of simulated threads. Programs set the next phase before
// emitting, so a capture that blocks or invokes the consumer resumes
// the saved phase seamlessly afterwards.
class ThreadProgram {
public:
	virtual ~ThreadProgram() = default;
	// Called once at run start; must leave the thread Runnable with a
	// phase set, or Sleeping.
	virtual void on_start(Engine& eng, ThreadRt& t) = 0;
	// Called when a non-consumer phase completes.
	virtual void on_phase_done(Engine& eng, ThreadRt& t) = 0;
	// Called by ThreadWake actions while Sleeping.
	virtual void on_wake(Engine& eng, ThreadRt& t) {}
};

struct ThreadRt {
	ThreadId id = kNoId;
	ProcessId pid = kNoId;
	CgroupId cgroup = 0;
	CoreId pinned = kNoId;
	bool is_collector = false;
	std::int32_t app_index = kNoId;
	std::string label;

	ThreadState state = ThreadState::Sleeping;
	Phase phase;
	std::unique_ptr<ThreadProgram> program;

	ConsumerState consumer;
	ConsumerStage stage = ConsumerStage::None;
	InvokeTrigger trigger = InvokeTrigger::BufferFull;
	Phase saved_phase;
	bool has_saved_phase = false;
	std::int64_t drain_claim = 0;

	StoredRecord pending;
	bool has_pending = false;
	BufferId blocked_on = kNoId;
	CoreId core = kNoId; // core currently occupied, kNoId when off-core

	PrivilegeFlags privileges;
	VirtualTime cpu_us = 0;
	VirtualTime consumer_us = 0;
	BufferId own_buffer = kNoId;
	std::uint32_t record_bytes = 0; // serialized size of this app's events
};

struct CoreRt {
	CoreId id = 0;
	ThreadId running = kNoId;
	ThreadId last_thread = kNoId;
	std::uint64_t seg_gen = 0;
	VirtualTime seg_start = 0;
	VirtualTime seg_len = 0;    // thread-work part of the segment
	VirtualTime seg_switch = 0; // switch overhead at the segment head
	VirtualTime quantum_left = 0;
	bool collector_only = false;
};

struct CgroupRt {
	CgroupSpec spec;
	VirtualTime allowance = 0; // per period
	VirtualTime used = 0;
	VirtualTime reserved = 0;
};

// Per-app driver: builds processes/threads at install time and handles
// app-level actions (request arrivals).
class AppDriver {
public:
	virtual ~AppDriver() = default;
	virtual void install(Engine& eng, std::int32_t app_index) = 0;
	virtual void on_action(Engine& eng, std::int64_t payload) {}
};

struct SimConfig {
	MachineSpec machine;
	CostModel costs;
	// Disengaged means No-Consumer: auditing absent, zero capture cost.
	std::optional<CollectorArch> arch;
	std::vector<AppSpec> apps;
	std::uint64_t seed = 1;
	bool trace_enabled = false;
};

// ---------------------------------------------------------------------
// The engine: single-threaded, deterministic, microsecond-resolution.
// ---------------------------------------------------------------------

class Engine {
public:
	explicit Engine(SimConfig cfg);

	void run_until(VirtualTime end);

	VirtualTime now() const { return now_; }
	const CostModel& costs() const { return cfg_.costs; }
	const SimConfig& config() const { return cfg_; }
	std::mt19937_64& rng() { return rng_; }
	const MetricsLedger& metrics() const { return ledger_; }
	const SimTrace& trace() const { return trace_; }
	bool capture_enabled() const { return cfg_.arch.has_value(); }
	// Per-event capture CPU cost including any transport penalty.
	VirtualTime capture_cost() const { return capture_cost_; }

	// --- program-facing API -------------------------------------------
	void set_phase(ThreadRt& t, VirtualTime len, Account body,
	               VirtualTime capture_tail);
	// Resolves an emission attempt. Returns true when the thread can
	// continue directly; false when it blocked or entered its consumer
	// (its next phase is saved and resumes later).
	bool capture_event(ThreadRt& t, bool marker);
	void sleep_thread(ThreadRt& t);
	void exit_thread(ThreadRt& t);
	void wake_thread(ThreadRt& t);
	void schedule(VirtualTime at, ActionKind kind, std::int64_t a,
	              std::int64_t b);
	AppStats& app_stats(std::int32_t app_index);
	// Adversarial probe of thread t's own consumer region.
	AccessResult probe_own_region(ThreadRt& t, AccessKind kind);
	// Collector-side claim: frees space, counts the claim, and wakes
	// blocked producers. Returns how many records were taken.
	std::int64_t claim_from_buffer(BufferId bid, std::size_t max);
	// Collector-side completion accounting; done == downstream + reduced.
	void account_consumed(std::int64_t done, std::int64_t downstream,
	                      std::int64_t reduced);

	// --- build API (drivers, engine construction) ---------------------
	ProcessId add_process(CgroupId cgroup);
	ThreadRt& add_thread(ProcessId pid, CoreId pinned,
	                     std::unique_ptr<ThreadProgram> program,
	                     std::int32_t app_index, const std::string& label,
	                     const std::vector<std::uint32_t>& arg_sizes);
	std::int32_t add_app_stats(const std::string& name);

	// --- white-box access for tests and audits ------------------------
	ThreadRt& thread(ThreadId id) { return *threads_.at(id); }
	std::size_t thread_count() const { return threads_.size(); }
	const CoreRt& core(CoreId id) const { return cores_.at(id); }
	const LoggingBuffer& buffer(BufferId id) const { return buffers_.at(id); }
	std::size_t buffer_count() const { return buffers_.size(); }
	const CgroupRt& cgroup(CgroupId id) const { return cgroups_.at(id); }
	CgroupId cgroup_id(const std::string& name) const;
	std::size_t cgroup_count() const { return cgroups_.size(); }
	void charge(ThreadRt& t, VirtualTime us, Account acct);
	void deliver_signal(ThreadRt& t, std::int32_t signal_id);
	void invoke_consumer(ThreadRt& t, InvokeTrigger trigger);

	// Throws InvariantError on any breach; called by finalize.
	void audit_all();

private:
	friend class CollectorDriver;

	void build_machine();
	void build_buffers();
	void start_threads();
	void finalize(VirtualTime end);

	void handle_core_advance(CoreId cid, std::uint64_t gen);
	void dispatch_completion(ThreadRt& t);
	void continue_or_release(CoreRt& c, ThreadRt& t);
	void plan_segment(CoreRt& c);
	void plan_segment_with_switch(CoreRt& c, VirtualTime switch_us);
	void try_dispatch(CoreRt& c);
	void kick_idle_cores();
	void release_core(CoreRt& c);
	void enqueue_runnable(ThreadRt& t);
	bool eligible(const CoreRt& c, const ThreadRt& t) const;
	VirtualTime cgroup_avail(const ThreadRt& t) const;
	void charge_segment(CoreRt& c, ThreadRt& t, VirtualTime elapsed);

	BufferId route_buffer(const ThreadRt& t) const;
	void note_store(const StoredRecord& rec, BufferId bid, ThreadRt& emitter);
	void note_drop(const StoredRecord& rec, ThreadRt& emitter);
	void block_on_buffer(ThreadRt& t, BufferId bid, const StoredRecord& rec,
	                     bool marker);
	void wake_waiters(BufferId bid);
	void wake_buffer_watcher(BufferId bid);

	// Consumer lifecycle steps (threadlet module logic).
	void consumer_stage_done(ThreadRt& t);
	void begin_drain(ThreadRt& t);
	void finish_consumer_exit(ThreadRt& t);

	void trace_thread(const ThreadRt& t, const std::string& transition);

	SimConfig cfg_;
	VirtualTime capture_cost_ = 0;
	VirtualTime end_ = 0;
	VirtualTime now_ = 0;
	bool started_ = false;
	ActionQueue queue_;
	std::mt19937_64 rng_;
	SimTrace trace_;
	MetricsLedger ledger_;

	std::vector<std::unique_ptr<ThreadRt>> threads_;
	std::vector<CoreRt> cores_;
	std::vector<CgroupRt> cgroups_;
	std::vector<std::int32_t> process_cgroup_;
	std::vector<LoggingBuffer> buffers_;
	std::vector<std::deque<ThreadId>> buffer_waiters_;
	std::vector<ThreadId> buffer_watcher_;
	std::deque<ThreadId> runq_;
	std::vector<std::unique_ptr<AppDriver>> drivers_;
	std::int32_t next_region_key_ = 1;

public:
	// Batch size collectors claim per drain step; mirrored from arch.
	std::uint32_t claim_batch() const
	{
		return cfg_.arch ? cfg_.arch->claim_batch : 64;
	}
	std::vector<StoredRecord>& claim_scratch() { return claim_scratch_; }

private:
	std::vector<StoredRecord> claim_scratch_;
};

// Implemented in workload.cpp / collector.cpp: turn specs into drivers.
std::unique_ptr<AppDriver> make_app_driver(const AppSpec& spec);
std::unique_ptr<AppDriver> make_collector_driver(const CollectorArch& arch);

} // namespace arena
