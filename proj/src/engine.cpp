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

#include "arena/engine.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "arena/event.hpp"

namespace arena {

const char* thread_state_name(ThreadState s)
{
	switch(s) {
	case ThreadState::Runnable:
		return "runnable";
	case ThreadState::Running:
		return "running";
	case ThreadState::BlockedOnBuffer:
		return "blocked_on_buffer";
	case ThreadState::Sleeping:
		return "sleeping";
	case ThreadState::Exited:
		return "exited";
	}
	return "unknown";
}

const char* consumer_phase_name(ConsumerPhase p)
{
	switch(p) {
	case ConsumerPhase::Uninitialized:
		return "uninitialized";
	case ConsumerPhase::Loaded:
		return "loaded";
	case ConsumerPhase::Active:
		return "active";
	case ConsumerPhase::Exiting:
		return "exiting";
	}
	return "unknown";
}

void SimTrace::write_file(const std::string& path) const
{
	std::ofstream out(path, std::ios::binary);
	if(!out) {
		throw ConfigError("cannot open trace file: " + path);
	}
	out << to_text();
}

AccessResult access_check(ThreadId actor, bool actor_key_enabled,
                          std::int32_t actor_key, const ProtectionRegion& region,
                          AccessKind /*kind*/)
{
	// Key permissions are thread-local: the actor's register can only
	// ever hold its own consumer's key, so access to a foreign region
	// is a violation no matter the actor's phase.
	if(actor_key_enabled && actor_key == region.key) {
		return AccessResult::Allowed;
	}
	return AccessResult::Violation;
}

// ---------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------

Engine::Engine(SimConfig cfg) : cfg_(std::move(cfg))
{
	cfg_.machine.validate();
	cfg_.costs.validate();
	if(cfg_.arch) {
		cfg_.arch->validate();
		if(cfg_.arch->dedicated_core) {
			if(cfg_.arch->compute != ComputeMode::SingleThread) {
				throw ConfigError("dedicated collector core requires the "
				                  "single-thread compute mode");
			}
			if(cfg_.machine.core_count < 2) {
				throw ConfigError("dedicated collector core needs >= 2 cores");
			}
		}
		capture_cost_ = cfg_.costs.kernel_record_cost *
		                cfg_.arch->capture_cost_multiplier;
	}
	if(cfg_.trace_enabled) {
		trace_.enable();
	}
	rng_.seed(mix_seed(cfg_.seed, 0));
	build_machine();

	for(const AppSpec& spec : cfg_.apps) {
		drivers_.push_back(make_app_driver(spec));
	}
	if(cfg_.arch && cfg_.arch->compute != ComputeMode::Threadlet) {
		drivers_.push_back(make_collector_driver(*cfg_.arch));
	}
	for(std::size_t i = 0; i < drivers_.size(); ++i) {
		drivers_[i]->install(*this, static_cast<std::int32_t>(i));
	}
	build_buffers();
}

void Engine::build_machine()
{
	cores_.resize(cfg_.machine.core_count);
	for(std::int32_t i = 0; i < cfg_.machine.core_count; ++i) {
		cores_[i].id = i;
	}
	if(cfg_.arch && cfg_.arch->dedicated_core) {
		cores_.back().collector_only = true;
	}
	for(const CgroupSpec& spec : cfg_.machine.cgroups) {
		CgroupRt g;
		g.spec = spec;
		g.allowance = static_cast<VirtualTime>(
		                  std::llround(spec.quota_fraction *
		                               static_cast<double>(cfg_.machine.period))) *
		              cfg_.machine.core_count;
		cgroups_.push_back(g);
	}
	ledger_.cgroup_account_us.assign(cgroups_.size(), {});
	ledger_.cores.assign(cores_.size(), CoreLedger{});
}

CgroupId Engine::cgroup_id(const std::string& name) const
{
	for(std::size_t i = 0; i < cgroups_.size(); ++i) {
		if(cgroups_[i].spec.name == name) {
			return static_cast<CgroupId>(i);
		}
	}
	throw ConfigError("unknown cgroup: " + name);
}

ProcessId Engine::add_process(CgroupId cgroup)
{
	if(cgroup < 0 || cgroup >= static_cast<CgroupId>(cgroups_.size())) {
		throw ConfigError("process references unknown cgroup id");
	}
	process_cgroup_.push_back(cgroup);
	return static_cast<ProcessId>(process_cgroup_.size() - 1);
}

ThreadRt& Engine::add_thread(ProcessId pid, CoreId pinned,
                             std::unique_ptr<ThreadProgram> program,
                             std::int32_t app_index, const std::string& label,
                             const std::vector<std::uint32_t>& arg_sizes)
{
	if(pid < 0 || pid >= static_cast<ProcessId>(process_cgroup_.size())) {
		throw ConfigError("thread references unknown process");
	}
	if(pinned != kNoId &&
	   (pinned < 0 || pinned >= static_cast<CoreId>(cores_.size()))) {
		throw ConfigError("thread pinned to unknown core: " + label);
	}
	auto t = std::make_unique<ThreadRt>();
	t->id = static_cast<ThreadId>(threads_.size());
	t->pid = pid;
	t->cgroup = process_cgroup_[pid];
	t->pinned = pinned;
	t->program = std::move(program);
	t->app_index = app_index;
	t->label = label;
	t->record_bytes = record_size_for_args(arg_sizes);
	if(cfg_.arch && cfg_.arch->compute == ComputeMode::Threadlet &&
	   !t->is_collector) {
		t->consumer.region.base = rng_();
		t->consumer.region.key = next_region_key_++;
		t->consumer.region.owner = t->id;
	}
	threads_.push_back(std::move(t));
	return *threads_.back();
}

std::int32_t Engine::add_app_stats(const std::string& name)
{
	AppStats st;
	st.name = name;
	ledger_.apps.push_back(st);
	return static_cast<std::int32_t>(ledger_.apps.size() - 1);
}

AppStats& Engine::app_stats(std::int32_t app_index)
{
	return ledger_.apps.at(app_index);
}

void Engine::build_buffers()
{
	if(!cfg_.arch) {
		return;
	}
	const CollectorArch& arch = *cfg_.arch;
	std::size_t count = 0;
	switch(arch.scheme) {
	case BufferScheme::PerThread: {
		for(auto& t : threads_) {
			if(!t->is_collector) {
				t->own_buffer = static_cast<BufferId>(count++);
			}
		}
		break;
	}
	case BufferScheme::PerCore:
		count = cores_.size();
		break;
	case BufferScheme::Single:
		count = 1;
		break;
	}
	for(std::size_t i = 0; i < count; ++i) {
		buffers_.push_back(arch.make_buffer());
	}
	buffer_waiters_.resize(count);
	buffer_watcher_.assign(count, kNoId);
	// Centralized collectors are woken by pushes into buffers they own.
	for(auto& t : threads_) {
		if(!t->is_collector) {
			continue;
		}
		if(arch.compute == ComputeMode::SingleThread) {
			for(std::size_t b = 0; b < count; ++b) {
				buffer_watcher_[b] = t->id;
			}
		} else if(arch.compute == ComputeMode::PerCoreThreads) {
			if(t->pinned >= 0 && t->pinned < static_cast<CoreId>(count)) {
				buffer_watcher_[t->pinned] = t->id;
			}
		}
	}
}

// ---------------------------------------------------------------------
// Run loop
// ---------------------------------------------------------------------

void Engine::run_until(VirtualTime end)
{
	if(started_) {
		throw InvariantError("run_until may only be called once per engine");
	}
	if(end < 0) {
		throw ConfigError("run duration must be non-negative");
	}
	started_ = true;
	end_ = end;
	ledger_.duration = end;
	trace_.record(0, "run", "start");
	start_threads();
	if(!threads_.empty() && cfg_.machine.period <= end) {
		queue_.push(cfg_.machine.period, ActionKind::PeriodReset, 0, 0);
	}
	while(!queue_.empty() && queue_.top().at <= end_) {
		Action act = queue_.pop();
		if(act.at < now_) {
			throw InvariantError("clock regression in action queue");
		}
		now_ = act.at;
		switch(act.kind) {
		case ActionKind::CoreAdvance:
			handle_core_advance(static_cast<CoreId>(act.a),
			                    static_cast<std::uint64_t>(act.b));
			break;
		case ActionKind::ThreadWake: {
			ThreadRt& t = thread(static_cast<ThreadId>(act.a));
			if(t.state == ThreadState::Sleeping) {
				t.program->on_wake(*this, t);
			}
			break;
		}
		case ActionKind::AppAction:
			drivers_.at(act.a)->on_action(*this, act.b);
			break;
		case ActionKind::PeriodReset: {
			for(std::size_t g = 0; g < cgroups_.size(); ++g) {
				ledger_.period_log.push_back(
				    PeriodCharge{static_cast<CgroupId>(g),
				                 now_ - cfg_.machine.period, cgroups_[g].used,
				                 cgroups_[g].allowance});
				cgroups_[g].used = 0;
			}
			queue_.push(now_ + cfg_.machine.period, ActionKind::PeriodReset, 0, 0);
			kick_idle_cores();
			break;
		}
		case ActionKind::SignalInject: {
			ThreadRt& t = thread(static_cast<ThreadId>(act.a));
			deliver_signal(t, static_cast<std::int32_t>(act.b));
			break;
		}
		}
	}
	now_ = end_;
	finalize(end);
	trace_.record(end_, "run", "end");
}

void Engine::start_threads()
{
	for(auto& t : threads_) {
		t->program->on_start(*this, *t);
	}
	for(CoreRt& c : cores_) {
		try_dispatch(c);
	}
}

void Engine::finalize(VirtualTime end)
{
	// Segments are always capped at end_, so no partial charges remain;
	// close the books and audit.
	VirtualTime last_boundary = threads_.empty()
	                                ? 0
	                                : (end / cfg_.machine.period) *
	                                      cfg_.machine.period;
	if(!threads_.empty() && last_boundary < end) {
		for(std::size_t g = 0; g < cgroups_.size(); ++g) {
			ledger_.period_log.push_back(PeriodCharge{static_cast<CgroupId>(g),
			                                          last_boundary,
			                                          cgroups_[g].used,
			                                          cgroups_[g].allowance});
		}
	}
	ledger_.residual_in_buffers = 0;
	for(const LoggingBuffer& b : buffers_) {
		ledger_.residual_in_buffers += static_cast<std::int64_t>(b.len());
	}
	ledger_.in_flight = ledger_.flow.claimed - ledger_.flow.consumed;
	audit_all();
}

// ---------------------------------------------------------------------
// Scheduling
// ---------------------------------------------------------------------

VirtualTime Engine::cgroup_avail(const ThreadRt& t) const
{
	// The root group is exempt from bandwidth control, as on a real
	// kernel: core capacity alone bounds it. Without the exemption a
	// segment that ends exactly on a period boundary posts its charge
	// after the refill and strands allowance at that period's end.
	if(t.cgroup == 0) {
		return std::numeric_limits<VirtualTime>::max() / 2;
	}
	const CgroupRt& g = cgroups_[t.cgroup];
	VirtualTime avail = g.allowance - g.used - g.reserved;
	return avail > 0 ? avail : 0;
}

bool Engine::eligible(const CoreRt& c, const ThreadRt& t) const
{
	if(t.pinned != kNoId && t.pinned != c.id) {
		return false;
	}
	if(c.collector_only && !t.is_collector) {
		return false;
	}
	return cgroup_avail(t) > 0;
}

void Engine::enqueue_runnable(ThreadRt& t)
{
	t.state = ThreadState::Runnable;
	t.core = kNoId;
	runq_.push_back(t.id);
}

void Engine::release_core(CoreRt& c)
{
	if(c.running != kNoId) {
		c.last_thread = c.running;
		c.running = kNoId;
	}
	c.seg_gen++;
	c.seg_len = 0;
	c.seg_switch = 0;
}

void Engine::try_dispatch(CoreRt& c)
{
	if(c.running != kNoId) {
		return;
	}
	for(auto it = runq_.begin(); it != runq_.end(); ++it) {
		ThreadRt& t = thread(*it);
		if(!eligible(c, t)) {
			continue;
		}
		runq_.erase(it);
		VirtualTime switch_us = 0;
		if(c.last_thread != kNoId && c.last_thread != t.id) {
			switch_us = cfg_.costs.context_switch_cost;
		}
		c.running = t.id;
		c.quantum_left = cfg_.machine.quantum;
		t.state = ThreadState::Running;
		t.core = c.id;
		plan_segment_with_switch(c, switch_us);
		return;
	}
}

void Engine::kick_idle_cores()
{
	if(runq_.empty()) {
		return;
	}
	for(CoreRt& c : cores_) {
		if(c.running == kNoId) {
			try_dispatch(c);
		}
	}
}

void Engine::plan_segment(CoreRt& c)
{
	plan_segment_with_switch(c, 0);
}

void Engine::plan_segment_with_switch(CoreRt& c, VirtualTime switch_us)
{
	ThreadRt& t = thread(c.running);
	if(t.phase.remaining == 0) {
		// Completion-only segment: a thread dispatched with a finished
		// (zero-length) phase pays any switch cost and completes via
		// the queue like everything else.
		c.seg_gen++;
		c.seg_start = now_;
		c.seg_len = 0;
		c.seg_switch = switch_us;
		queue_.push(now_ + switch_us, ActionKind::CoreAdvance, c.id,
		            static_cast<std::int64_t>(c.seg_gen));
		return;
	}
	VirtualTime budget = cgroup_avail(t);
	VirtualTime left = end_ - now_;
	VirtualTime len = t.phase.remaining;
	len = std::min(len, c.quantum_left);
	len = std::min(len, budget);
	len = std::min(len, left > switch_us ? left - switch_us : 0);
	if(len <= 0) {
		if(left <= switch_us) {
			// Out of simulated time; leave the thread in place, the run
			// loop is about to stop.
			return;
		}
		// Throttled mid-run: yield and let another thread in.
		enqueue_runnable(t);
		release_core(c);
		try_dispatch(c);
		return;
	}
	cgroups_[t.cgroup].reserved += len;
	c.seg_gen++;
	c.seg_start = now_;
	c.seg_len = len;
	c.seg_switch = switch_us;
	queue_.push(now_ + switch_us + len, ActionKind::CoreAdvance, c.id,
	            static_cast<std::int64_t>(c.seg_gen));
}

void Engine::charge(ThreadRt& t, VirtualTime us, Account acct)
{
	if(t.state != ThreadState::Running) {
		throw InvariantError("charge on a non-running thread: " + t.label);
	}
	if(us < 0) {
		throw InvariantError("negative charge");
	}
	ledger_.cgroup_account_us[t.cgroup][static_cast<std::size_t>(acct)] += us;
	cgroups_[t.cgroup].used += us;
	t.cpu_us += us;
	if(acct == Account::ConsumerWork) {
		t.consumer_us += us;
	}
	if(t.core != kNoId) {
		ledger_.cores[t.core].busy += us;
	}
}

void Engine::charge_segment(CoreRt& c, ThreadRt& t, VirtualTime /*elapsed*/)
{
	if(c.seg_switch > 0) {
		ledger_.cores[c.id].switch_time += c.seg_switch;
	}
	VirtualTime len = c.seg_len;
	if(len > 0) {
		cgroups_[t.cgroup].reserved -= len;
		VirtualTime pos_before = t.phase.total - t.phase.remaining;
		VirtualTime body_len = t.phase.total - t.phase.capture_tail;
		VirtualTime pos_after = pos_before + len;
		VirtualTime body_part = std::min(pos_after, body_len) -
		                        std::min(pos_before, body_len);
		VirtualTime tail_part = len - body_part;
		t.phase.remaining -= len;
		c.quantum_left -= len;
		if(body_part > 0) {
			charge(t, body_part, t.phase.body);
		}
		if(tail_part > 0) {
			charge(t, tail_part, Account::KernelCapture);
		}
	}
	c.seg_len = 0;
	c.seg_switch = 0;
}

void Engine::handle_core_advance(CoreId cid, std::uint64_t gen)
{
	CoreRt& c = cores_.at(cid);
	if(c.seg_gen != gen || c.running == kNoId) {
		return; // stale plan
	}
	ThreadRt& t = thread(c.running);
	charge_segment(c, t, now_ - c.seg_start);
	int guard = 0;
	while(c.running == t.id && t.state == ThreadState::Running &&
	      t.phase.remaining == 0) {
		if(++guard > 1'000'000) {
			throw InvariantError("livelock: zero-length phase loop at thread " +
			                     t.label);
		}
		dispatch_completion(t);
	}
	continue_or_release(c, t);
}

void Engine::dispatch_completion(ThreadRt& t)
{
	if(t.stage != ConsumerStage::None) {
		consumer_stage_done(t);
	} else {
		t.program->on_phase_done(*this, t);
	}
}

void Engine::continue_or_release(CoreRt& c, ThreadRt& t)
{
	if(c.running != t.id) {
		return;
	}
	if(t.state != ThreadState::Running) {
		t.core = kNoId;
		release_core(c);
		try_dispatch(c);
		return;
	}
	if(c.quantum_left <= 0) {
		bool contention = false;
		for(ThreadId other : runq_) {
			if(eligible(c, thread(other))) {
				contention = true;
				break;
			}
		}
		if(contention) {
			enqueue_runnable(t);
			release_core(c);
			try_dispatch(c);
			return;
		}
		c.quantum_left = cfg_.machine.quantum;
	}
	plan_segment(c);
}

void Engine::schedule(VirtualTime at, ActionKind kind, std::int64_t a,
                      std::int64_t b)
{
	if(at < now_) {
		throw InvariantError("scheduling into the past");
	}
	queue_.push(at, kind, a, b);
}

// ---------------------------------------------------------------------
// Thread state changes
// ---------------------------------------------------------------------

void Engine::set_phase(ThreadRt& t, VirtualTime len, Account body,
                       VirtualTime capture_tail)
{
	if(len < 0 || capture_tail < 0 || capture_tail > len) {
		throw InvariantError("malformed phase");
	}
	t.phase.total = len;
	t.phase.remaining = len;
	t.phase.capture_tail = capture_tail;
	t.phase.body = body;
}

void Engine::sleep_thread(ThreadRt& t)
{
	t.state = ThreadState::Sleeping;
	trace_thread(t, "state:sleeping");
}

void Engine::wake_thread(ThreadRt& t)
{
	// Only sleepers wake this way; blocked producers are woken by
	// wake_waiters once their pending record stores.
	if(t.state != ThreadState::Sleeping) {
		return;
	}
	enqueue_runnable(t);
	trace_thread(t, "state:runnable");
	if(started_) {
		kick_idle_cores();
	}
}

void Engine::exit_thread(ThreadRt& t)
{
	if(capture_enabled() && cfg_.arch->compute == ComputeMode::Threadlet &&
	   t.own_buffer != kNoId && !buffers_[t.own_buffer].empty()) {
		invoke_consumer(t, InvokeTrigger::ThreadExit);
		return;
	}
	t.state = ThreadState::Exited;
	trace_thread(t, "state:exited");
}

// ---------------------------------------------------------------------
// Capture path
// ---------------------------------------------------------------------

BufferId Engine::route_buffer(const ThreadRt& t) const
{
	switch(cfg_.arch->scheme) {
	case BufferScheme::PerThread:
		if(t.own_buffer == kNoId) {
			throw InvariantError("no per-thread buffer for " + t.label);
		}
		return t.own_buffer;
	case BufferScheme::PerCore:
		if(t.core == kNoId) {
			throw InvariantError("capture from off-core thread " + t.label);
		}
		return static_cast<BufferId>(t.core);
	case BufferScheme::Single:
		return 0;
	}
	throw InvariantError("unreachable buffer scheme");
}

void Engine::note_store(const StoredRecord& rec, BufferId bid, ThreadRt& emitter)
{
	ledger_.flow.generated++;
	ledger_.flow.recorded++;
	if(rec.marker) {
		ledger_.flow.marker_generated++;
		ledger_.flow.marker_recorded++;
		trace_thread(emitter, "capture:marker_stored");
	}
	if(emitter.app_index != kNoId) {
		ledger_.apps[emitter.app_index].events_emitted++;
	}
	wake_buffer_watcher(bid);
}

void Engine::note_drop(const StoredRecord& rec, ThreadRt& emitter)
{
	ledger_.flow.generated++;
	ledger_.flow.dropped++;
	if(ledger_.first_drop_time < 0) {
		ledger_.first_drop_time = now_;
	}
	if(rec.marker) {
		ledger_.flow.marker_generated++;
		ledger_.flow.marker_dropped++;
		trace_thread(emitter, "capture:marker_dropped");
	}
	if(emitter.app_index != kNoId) {
		ledger_.apps[emitter.app_index].events_emitted++;
	}
}

bool Engine::capture_event(ThreadRt& t, bool marker)
{
	if(!capture_enabled()) {
		return true;
	}
	StoredRecord rec{t.record_bytes, marker};
	BufferId bid = route_buffer(t);
	switch(buffers_[bid].push(rec)) {
	case PushOutcome::Stored:
		note_store(rec, bid, t);
		return true;
	case PushOutcome::Dropped:
		note_drop(rec, t);
		return true;
	case PushOutcome::WouldBlock:
		if(cfg_.arch->compute == ComputeMode::Threadlet) {
			t.pending = rec;
			t.has_pending = true;
			invoke_consumer(t, InvokeTrigger::BufferFull);
		} else {
			block_on_buffer(t, bid, rec, marker);
		}
		return false;
	}
	return true;
}

void Engine::block_on_buffer(ThreadRt& t, BufferId bid, const StoredRecord& rec,
                             bool /*marker*/)
{
	t.pending = rec;
	t.has_pending = true;
	t.blocked_on = bid;
	t.state = ThreadState::BlockedOnBuffer;
	buffer_waiters_[bid].push_back(t.id);
	trace_thread(t, "state:blocked_on_buffer");
}

void Engine::wake_waiters(BufferId bid)
{
	auto& waiters = buffer_waiters_[bid];
	bool woke = false;
	while(!waiters.empty()) {
		ThreadRt& t = thread(waiters.front());
		if(!buffers_[bid].fits(t.pending.size_bytes)) {
			break;
		}
		waiters.pop_front();
		PushOutcome out = buffers_[bid].push(t.pending);
		if(out != PushOutcome::Stored) {
			throw InvariantError("woken producer failed to store");
		}
		note_store(t.pending, bid, t);
		t.has_pending = false;
		t.blocked_on = kNoId;
		enqueue_runnable(t);
		trace_thread(t, "state:runnable");
		woke = true;
	}
	if(woke) {
		kick_idle_cores();
	}
}

void Engine::wake_buffer_watcher(BufferId bid)
{
	ThreadId watcher = buffer_watcher_.empty() ? kNoId : buffer_watcher_[bid];
	if(watcher == kNoId) {
		return;
	}
	ThreadRt& t = thread(watcher);
	if(t.state == ThreadState::Sleeping) {
		t.program->on_wake(*this, t);
	}
}

std::int64_t Engine::claim_from_buffer(BufferId bid, std::size_t max)
{
	LoggingBuffer& buf = buffers_.at(bid);
	claim_scratch_.clear();
	std::size_t got = buf.pop_batch(max, claim_scratch_);
	if(got > 0) {
		ledger_.flow.claimed += static_cast<std::int64_t>(got);
		wake_waiters(bid);
	}
	return static_cast<std::int64_t>(got);
}

void Engine::account_consumed(std::int64_t done, std::int64_t downstream,
                              std::int64_t reduced)
{
	if(done != downstream + reduced || done < 0 || downstream < 0 ||
	   reduced < 0) {
		throw InvariantError("inconsistent consumption accounting");
	}
	ledger_.flow.consumed += done;
	ledger_.flow.downstream_consumed += downstream;
	ledger_.flow.reduced_away += reduced;
}

// ---------------------------------------------------------------------
// Threadlet consumer lifecycle
// ---------------------------------------------------------------------

void Engine::invoke_consumer(ThreadRt& t, InvokeTrigger trigger)
{
	ConsumerState& cs = t.consumer;
	if(cs.phase == ConsumerPhase::Active) {
		throw InvariantError("consumer invoked while active: atomicity breach");
	}
	if(t.state != ThreadState::Running) {
		throw InvariantError("consumer invoked on a non-running thread");
	}
	t.trigger = trigger;
	if(trigger == InvokeTrigger::BufferFull) {
		t.saved_phase = t.phase;
		t.has_saved_phase = true;
	} else {
		t.has_saved_phase = false;
	}
	cs.activations++;
	trace_thread(t, "consumer:invoke");
	if(cs.phase == ConsumerPhase::Uninitialized) {
		if(cs.load_paid) {
			throw InvariantError("consumer load paid twice");
		}
		cs.load_paid = true;
		cs.load_charges++;
		t.stage = ConsumerStage::Load;
		set_phase(t, cfg_.costs.consumer_load_cost, Account::ConsumerWork, 0);
		trace_thread(t, "consumer:load");
		return;
	}
	t.stage = ConsumerStage::Invoke;
	set_phase(t, cfg_.costs.consumer_invoke_cost, Account::ConsumerWork, 0);
}

void Engine::consumer_stage_done(ThreadRt& t)
{
	ConsumerState& cs = t.consumer;
	switch(t.stage) {
	case ConsumerStage::Load:
		cs.phase = ConsumerPhase::Loaded;
		t.stage = ConsumerStage::Invoke;
		set_phase(t, cfg_.costs.consumer_invoke_cost, Account::ConsumerWork, 0);
		return;
	case ConsumerStage::Invoke:
		cs.phase = ConsumerPhase::Active;
		cs.key_enabled = true;
		cs.saved_privileges = t.privileges;
		t.privileges = PrivilegeFlags{true, true, true};
		cs.window_open = now_;
		trace_thread(t, "consumer:active");
		begin_drain(t);
		return;
	case ConsumerStage::Drain:
		ledger_.flow.consumed += t.drain_claim;
		ledger_.flow.downstream_consumed += t.drain_claim;
		cs.events_consumed += t.drain_claim;
		t.drain_claim = 0;
		t.stage = ConsumerStage::Exit;
		set_phase(t, cfg_.costs.consumer_exit_cost, Account::ConsumerWork, 0);
		return;
	case ConsumerStage::Exit:
		finish_consumer_exit(t);
		return;
	case ConsumerStage::None:
		throw InvariantError("consumer stage dispatch without a stage");
	}
}

void Engine::begin_drain(ThreadRt& t)
{
	LoggingBuffer& buf = buffers_[t.own_buffer];
	std::size_t n = buf.len();
	if(n == 0) {
		throw InvariantError("consumer drain with empty buffer");
	}
	claim_scratch_.clear();
	buf.pop_batch(n, claim_scratch_);
	ledger_.flow.claimed += static_cast<std::int64_t>(n);
	t.drain_claim = static_cast<std::int64_t>(n);
	t.stage = ConsumerStage::Drain;
	set_phase(t, static_cast<VirtualTime>(n) * cfg_.costs.consume_cost,
	          Account::ConsumerWork, 0);
}

void Engine::finish_consumer_exit(ThreadRt& t)
{
	ConsumerState& cs = t.consumer;
	cs.key_enabled = false;
	if(!cs.saved_privileges) {
		throw InvariantError("consumer exit without saved privileges");
	}
	t.privileges = *cs.saved_privileges;
	cs.saved_privileges.reset();
	cs.windows.emplace_back(cs.window_open, now_);
	cs.window_open = -1;
	trace_thread(t, "consumer:exit");
	// Deferred signals land now, strictly after the Active window.
	for(const DeferredSignal& d : cs.deferred_signals) {
		ledger_.signal_deliveries.push_back(
		    SignalDelivery{now_, t.id, d.signal_id, true});
		trace_thread(t, "signal:delivered_deferred");
	}
	cs.deferred_signals.clear();
	if(t.trigger == InvokeTrigger::BufferFull) {
		cs.phase = ConsumerPhase::Loaded;
		t.stage = ConsumerStage::None;
		if(!t.has_pending) {
			throw InvariantError("buffer-full activation without pending record");
		}
		PushOutcome out = buffers_[t.own_buffer].push(t.pending);
		if(out != PushOutcome::Stored) {
			throw InvariantError("pending record does not fit after drain");
		}
		note_store(t.pending, t.own_buffer, t);
		t.has_pending = false;
		if(!t.has_saved_phase) {
			throw InvariantError("no saved phase to resume after consumer");
		}
		t.phase = t.saved_phase;
		t.has_saved_phase = false;
		return;
	}
	cs.phase = ConsumerPhase::Exiting;
	t.stage = ConsumerStage::None;
	t.state = ThreadState::Exited;
	trace_thread(t, "state:exited");
}

// ---------------------------------------------------------------------
// Signals and protection probes
// ---------------------------------------------------------------------

void Engine::deliver_signal(ThreadRt& t, std::int32_t signal_id)
{
	if(t.state == ThreadState::Exited) {
		return;
	}
	if(t.consumer.phase == ConsumerPhase::Active) {
		t.consumer.deferred_signals.push_back(DeferredSignal{signal_id, now_});
		trace_thread(t, "signal:deferred");
		return;
	}
	ledger_.signal_deliveries.push_back(
	    SignalDelivery{now_, t.id, signal_id, false});
	trace_thread(t, "signal:delivered");
}

AccessResult Engine::probe_own_region(ThreadRt& t, AccessKind kind)
{
	const ProtectionRegion& region = t.consumer.region;
	AccessResult res = access_check(t.id, t.consumer.key_enabled,
	                                t.consumer.region.key, region, kind);
	if(res == AccessResult::Violation) {
		ledger_.violations.push_back(
		    ViolationLog{now_, t.id, region.owner, kind});
		trace_thread(t, "probe:violation");
	} else {
		ledger_.allowed_probes++;
		trace_thread(t, "probe:allowed");
	}
	return res;
}

void Engine::trace_thread(const ThreadRt& t, const std::string& transition)
{
	if(trace_.enabled()) {
		trace_.record(now_, "thread." + std::to_string(t.id), transition);
	}
}

// ---------------------------------------------------------------------
// Audits
// ---------------------------------------------------------------------

void Engine::audit_all()
{
	const FlowCounters& f = ledger_.flow;
	if(f.generated != f.recorded + f.dropped) {
		throw InvariantError("conservation: generated != recorded + dropped");
	}
	std::int64_t in_buffers = 0;
	for(const LoggingBuffer& b : buffers_) {
		if(!b.conservation_holds()) {
			throw InvariantError("buffer-level conservation failed");
		}
		in_buffers += static_cast<std::int64_t>(b.len());
	}
	if(f.recorded != f.claimed + in_buffers) {
		throw InvariantError("conservation: recorded != claimed + residual");
	}
	if(f.claimed != f.consumed + ledger_.in_flight) {
		throw InvariantError("conservation: claimed != consumed + in-flight");
	}
	if(f.consumed != f.downstream_consumed + f.reduced_away) {
		throw InvariantError("conservation: consumed != downstream + reduced");
	}
	if(f.marker_generated != f.marker_recorded + f.marker_dropped) {
		throw InvariantError("conservation: marker counters disagree");
	}
	// Work conservation per core.
	for(const CoreLedger& c : ledger_.cores) {
		if(c.busy + c.switch_time > ledger_.duration) {
			throw InvariantError("core charged beyond run duration");
		}
	}
	// Quota: per cgroup, per period, within one quantum of slack.
	for(const PeriodCharge& p : ledger_.period_log) {
		if(p.charged > p.allowance + cfg_.machine.quantum) {
			throw InvariantError("cgroup quota exceeded beyond quantum slack");
		}
	}
	// Consumer isolation: ConsumerWork in each cgroup's ledger must
	// equal the consumer time of that cgroup's own threads.
	std::vector<VirtualTime> per_cgroup(cgroups_.size(), 0);
	for(const auto& t : threads_) {
		per_cgroup[t->cgroup] += t->consumer_us;
	}
	for(std::size_t g = 0; g < cgroups_.size(); ++g) {
		VirtualTime ledgered =
		    ledger_.cgroup_account_us[g][static_cast<std::size_t>(
		        Account::ConsumerWork)];
		if(per_cgroup[g] != ledgered) {
			throw InvariantError("consumer work leaked across cgroups");
		}
	}
	// Threadlet state sanity at end of run.
	for(const auto& t : threads_) {
		if(t->consumer.load_charges > 1) {
			throw InvariantError("consumer load charged more than once");
		}
		if(t->consumer.phase != ConsumerPhase::Active &&
		   !t->consumer.deferred_signals.empty()) {
			throw InvariantError("deferred signals outside an active window");
		}
	}
}

} // namespace arena
