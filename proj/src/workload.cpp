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

#include "arena/workload.hpp"

#include <cmath>
#include <deque>

#include "arena/engine.hpp"

namespace arena {

const AppCommon& app_common(const AppSpec& spec)
{
	return std::visit(
	    [](const auto& s) -> const AppCommon& { return s.common; }, spec);
}

namespace {

// ---------------------------------------------------------------------
// Super-producer: a tight loop of app-work gaps, each optionally ending
// in one audited emission. Integer error-diffusion pacing keeps the
// long-run rate exact: cumulative busy time after n iterations is
// n * 1e6 / rate, and iteration n emits iff floor((n+1) * wf)
// increments over floor(n * wf).
// ---------------------------------------------------------------------

class ProducerProgram final : public ThreadProgram {
public:
	ProducerProgram(const SuperProducerSpec& spec, std::int32_t stats)
	    : spec_(spec), stats_(stats)
	{
		wf_ppm_ = static_cast<std::int64_t>(
		    std::llround(spec_.write_fraction * 1e6));
	}

	void on_start(Engine& eng, ThreadRt& t) override
	{
		arm_next(eng, t);
		eng.wake_thread(t);
	}

	void on_phase_done(Engine& eng, ThreadRt& t) override
	{
		if(want_exit_) {
			eng.exit_thread(t);
			return;
		}
		bool emit = emit_pending_;
		emit_pending_ = false;
		++iter_;
		if(emit) {
			++emitted_;
		}
		// Next phase is armed before the emission resolves so a blocked
		// or consumer-entered capture resumes it seamlessly.
		arm_next(eng, t);
		if(emit) {
			eng.app_stats(stats_).events_offered++;
			eng.capture_event(t, false);
		}
	}

private:
	void arm_next(Engine& eng, ThreadRt& t)
	{
		if(spec_.events_total > 0 && emitted_ >= spec_.events_total) {
			want_exit_ = true;
			eng.set_phase(t, 0, Account::AppWork, 0);
			return;
		}
		VirtualTime len;
		bool emits;
		if(spec_.stochastic) {
			std::exponential_distribution<double> gap(
			    static_cast<double>(spec_.peak_rate_per_proc) / 1e6);
			len = std::max<VirtualTime>(
			    1, static_cast<VirtualTime>(std::llround(gap(eng.rng()))));
			emits = wf_ppm_ >= 1'000'000 ||
			        std::uniform_int_distribution<std::int64_t>(
			            0, 999'999)(eng.rng()) < wf_ppm_;
		} else {
			VirtualTime c0 = iter_ * kMicrosPerSecond / spec_.peak_rate_per_proc;
			VirtualTime c1 =
			    (iter_ + 1) * kMicrosPerSecond / spec_.peak_rate_per_proc;
			len = c1 - c0;
			emits = (iter_ + 1) * wf_ppm_ / 1'000'000 >
			        iter_ * wf_ppm_ / 1'000'000;
		}
		if(emits) {
			VirtualTime cc = eng.capture_cost();
			eng.set_phase(t, std::max(len, cc), Account::AppWork, cc);
			emit_pending_ = true;
		} else {
			eng.set_phase(t, len, Account::AppWork, 0);
			emit_pending_ = false;
		}
	}

	SuperProducerSpec spec_;
	std::int32_t stats_ = kNoId;
	std::int64_t wf_ppm_ = 0;
	std::int64_t iter_ = 0;
	std::int64_t emitted_ = 0;
	bool emit_pending_ = false;
	bool want_exit_ = false;
};

class ProducerDriver final : public AppDriver {
public:
	explicit ProducerDriver(const SuperProducerSpec& spec) : spec_(spec)
	{
		if(spec_.peak_rate_per_proc <= 0 ||
		   spec_.peak_rate_per_proc > kMicrosPerSecond) {
			throw ConfigError("producer rate must be in [1, 1e6] events/s");
		}
		if(spec_.write_fraction < 0.0 || spec_.write_fraction > 1.0) {
			throw ConfigError("write fraction must be in [0, 1]");
		}
		if(spec_.process_count < 1) {
			throw ConfigError("producer needs at least one process");
		}
	}

	void install(Engine& eng, std::int32_t /*app_index*/) override
	{
		std::int32_t stats = eng.add_app_stats(spec_.common.name);
		CgroupId g = eng.cgroup_id(spec_.common.cgroup);
		for(std::int32_t p = 0; p < spec_.process_count; ++p) {
			ProcessId pid = eng.add_process(g);
			eng.add_thread(pid, spec_.common.pinned_core,
			               std::make_unique<ProducerProgram>(spec_, stats),
			               stats, spec_.common.name + "." + std::to_string(p),
			               spec_.common.arg_sizes);
		}
	}

private:
	SuperProducerSpec spec_;
};

// ---------------------------------------------------------------------
// Request server: a worker pool. Each request costs request_cpu_cost of
// app CPU split evenly around events_per_request emissions, each adding
// the capture cost on top. A request completes only after its last
// emission resolves, so time spent blocked on a full buffer shows up in
// latency and realized throughput.
// ---------------------------------------------------------------------

class ServerDriver;

class WorkerProgram final : public ThreadProgram {
public:
	WorkerProgram(const ServerAppSpec& spec, std::int32_t stats,
	              ServerDriver* driver, std::int32_t widx)
	    : spec_(spec), stats_(stats), driver_(driver), widx_(widx)
	{
	}

	void on_start(Engine& eng, ThreadRt& t) override
	{
		if(spec_.offered_rps == 0.0) {
			start_request(eng, t, 0);
			eng.wake_thread(t);
		}
		// Open loop: stay asleep until the driver assigns an arrival.
	}

	void assign(Engine& eng, ThreadRt& t, VirtualTime arrival)
	{
		start_request(eng, t, arrival);
		eng.wake_thread(t);
	}

	void on_phase_done(Engine& eng, ThreadRt& t) override;

private:
	void start_request(Engine& eng, ThreadRt& t, VirtualTime arrival)
	{
		arrival_ = arrival;
		sub_ = 0;
		completing_ = false;
		if(spec_.offered_rps == 0.0) {
			eng.app_stats(stats_).requests_arrived++;
		}
		arm_sub(eng, t);
	}

	void arm_sub(Engine& eng, ThreadRt& t)
	{
		std::int32_t epr = spec_.events_per_request;
		if(epr == 0) {
			eng.set_phase(t, spec_.request_cpu_cost, Account::AppWork, 0);
			return;
		}
		VirtualTime b0 = static_cast<VirtualTime>(sub_) *
		                 spec_.request_cpu_cost / epr;
		VirtualTime b1 = static_cast<VirtualTime>(sub_ + 1) *
		                 spec_.request_cpu_cost / epr;
		VirtualTime cc = eng.capture_cost();
		eng.set_phase(t, (b1 - b0) + cc, Account::AppWork, cc);
	}

	void finish_request(Engine& eng, ThreadRt& t);

	ServerAppSpec spec_;
	std::int32_t stats_ = kNoId;
	ServerDriver* driver_ = nullptr;
	std::int32_t widx_ = 0;
	VirtualTime arrival_ = 0;
	std::int32_t sub_ = 0;
	bool completing_ = false;

	friend class ServerDriver;
};

class ServerDriver final : public AppDriver {
public:
	explicit ServerDriver(const ServerAppSpec& spec) : spec_(spec)
	{
		if(spec_.concurrency < 1) {
			throw ConfigError("server concurrency must be >= 1");
		}
		if(spec_.request_cpu_cost < 1) {
			throw ConfigError("request cpu cost must be >= 1 us");
		}
		if(spec_.events_per_request < 0 || spec_.offered_rps < 0.0) {
			throw ConfigError("bad server workload parameters");
		}
	}

	void install(Engine& eng, std::int32_t app_index) override
	{
		app_index_ = app_index;
		stats_ = eng.add_app_stats(spec_.common.name);
		CgroupId g = eng.cgroup_id(spec_.common.cgroup);
		ProcessId pid = eng.add_process(g);
		for(std::int32_t w = 0; w < spec_.concurrency; ++w) {
			auto prog = std::make_unique<WorkerProgram>(spec_, stats_, this, w);
			progs_.push_back(prog.get());
			ThreadRt& t = eng.add_thread(
			    pid, spec_.common.pinned_core, std::move(prog), stats_,
			    spec_.common.name + ".w" + std::to_string(w),
			    spec_.common.arg_sizes);
			worker_tids_.push_back(t.id);
			if(spec_.offered_rps > 0.0) {
				idle_.push_back(w);
			}
		}
		if(spec_.offered_rps > 0.0) {
			eng.schedule(arrival_time(0), ActionKind::AppAction, app_index_, 0);
		}
	}

	void on_action(Engine& eng, std::int64_t payload) override
	{
		eng.app_stats(stats_).requests_arrived++;
		if(!idle_.empty()) {
			std::int32_t w = idle_.front();
			idle_.pop_front();
			progs_[w]->assign(eng, eng.thread(worker_tids_[w]), eng.now());
		} else {
			backlog_.push_back(eng.now());
		}
		eng.schedule(arrival_time(payload + 1), ActionKind::AppAction,
		             app_index_, payload + 1);
	}

	void worker_done(Engine& eng, std::int32_t widx)
	{
		if(!backlog_.empty()) {
			VirtualTime arr = backlog_.front();
			backlog_.pop_front();
			progs_[widx]->assign(eng, eng.thread(worker_tids_[widx]), arr);
			return;
		}
		idle_.push_back(widx);
		eng.sleep_thread(eng.thread(worker_tids_[widx]));
	}

private:
	VirtualTime arrival_time(std::int64_t n) const
	{
		return static_cast<VirtualTime>(
		    std::llround(static_cast<double>(n + 1) * 1e6 / spec_.offered_rps));
	}

	ServerAppSpec spec_;
	std::int32_t app_index_ = kNoId;
	std::int32_t stats_ = kNoId;
	std::vector<ThreadId> worker_tids_;
	std::vector<WorkerProgram*> progs_;
	std::deque<VirtualTime> backlog_;
	std::deque<std::int32_t> idle_;
};

void WorkerProgram::on_phase_done(Engine& eng, ThreadRt& t)
{
	if(completing_) {
		completing_ = false;
		finish_request(eng, t);
		return;
	}
	std::int32_t epr = spec_.events_per_request;
	if(epr == 0) {
		finish_request(eng, t);
		return;
	}
	// One request slice done; its emission resolves now. The next slice
	// (or the completion sentinel) is armed first.
	sub_++;
	if(sub_ < epr) {
		arm_sub(eng, t);
	} else {
		completing_ = true;
		eng.set_phase(t, 0, Account::AppWork, 0);
	}
	eng.app_stats(stats_).events_offered++;
	eng.capture_event(t, false);
}

void WorkerProgram::finish_request(Engine& eng, ThreadRt& t)
{
	AppStats& st = eng.app_stats(stats_);
	st.requests_completed++;
	st.latency_sum_us += static_cast<double>(eng.now() - arrival_);
	if(spec_.offered_rps == 0.0) {
		start_request(eng, t, eng.now());
		return;
	}
	driver_->worker_done(eng, widx_);
}

// ---------------------------------------------------------------------
// Malware: dormant until a seeded strike time, then a short burst of
// marker-tagged events through the exact same capture path as every
// other emission; the records are byte-identical to benign ones.
// ---------------------------------------------------------------------

class MalwareProgram final : public ThreadProgram {
public:
	MalwareProgram(const MalwareSpec& spec, std::int32_t stats)
	    : spec_(spec), stats_(stats)
	{
	}

	void on_wake(Engine& eng, ThreadRt& t) override
	{
		left_ = spec_.marker_count;
		arm(eng, t);
		eng.wake_thread(t);
	}

	void on_start(Engine& eng, ThreadRt& t) override
	{
		(void)eng;
		(void)t; // dormant until the strike wake
	}

	void on_phase_done(Engine& eng, ThreadRt& t) override
	{
		if(want_exit_) {
			eng.exit_thread(t);
			return;
		}
		left_--;
		arm(eng, t);
		eng.app_stats(stats_).events_offered++;
		eng.capture_event(t, true);
	}

private:
	void arm(Engine& eng, ThreadRt& t)
	{
		if(left_ <= 0) {
			want_exit_ = true;
			eng.set_phase(t, 0, Account::AppWork, 0);
			return;
		}
		VirtualTime cc = eng.capture_cost();
		eng.set_phase(t, std::max(spec_.inter_marker_gap, cc), Account::AppWork,
		              cc);
	}

	MalwareSpec spec_;
	std::int32_t stats_ = kNoId;
	std::int32_t left_ = 0;
	bool want_exit_ = false;
};

class MalwareDriver final : public AppDriver {
public:
	explicit MalwareDriver(const MalwareSpec& spec) : spec_(spec)
	{
		if(spec_.strike_min < 0 || spec_.strike_max < spec_.strike_min) {
			throw ConfigError("bad strike window");
		}
		if(spec_.marker_count < 1 || spec_.inter_marker_gap < 1) {
			throw ConfigError("bad marker burst parameters");
		}
	}

	void install(Engine& eng, std::int32_t /*app_index*/) override
	{
		std::int32_t stats = eng.add_app_stats(spec_.common.name);
		CgroupId g = eng.cgroup_id(spec_.common.cgroup);
		ProcessId pid = eng.add_process(g);
		ThreadRt& t = eng.add_thread(pid, spec_.common.pinned_core,
		                             std::make_unique<MalwareProgram>(spec_, stats),
		                             stats, spec_.common.name,
		                             spec_.common.arg_sizes);
		VirtualTime strike = spec_.strike_min;
		if(spec_.strike_max > spec_.strike_min) {
			strike = std::uniform_int_distribution<VirtualTime>(
			    spec_.strike_min, spec_.strike_max)(eng.rng());
		}
		eng.schedule(strike, ActionKind::ThreadWake, t.id, 0);
	}

private:
	MalwareSpec spec_;
};

// ---------------------------------------------------------------------
// Memory probe: periodically pokes its own consumer's protected region
// from outside consumer execution; every poke must land as a Violation.
// ---------------------------------------------------------------------

class ProbeProgram final : public ThreadProgram {
public:
	ProbeProgram(const MemoryProbeSpec& spec) : spec_(spec) {}

	void on_start(Engine& eng, ThreadRt& t) override
	{
		eng.set_phase(t, spec_.probe_interval, Account::AppWork, 0);
		eng.wake_thread(t);
	}

	void on_phase_done(Engine& eng, ThreadRt& t) override
	{
		eng.probe_own_region(t, AccessKind::Write);
		done_++;
		if(spec_.probe_count > 0 && done_ >= spec_.probe_count) {
			eng.exit_thread(t);
			return;
		}
		eng.set_phase(t, spec_.probe_interval, Account::AppWork, 0);
	}

private:
	MemoryProbeSpec spec_;
	std::int64_t done_ = 0;
};

class ProbeDriver final : public AppDriver {
public:
	explicit ProbeDriver(const MemoryProbeSpec& spec) : spec_(spec)
	{
		if(spec_.probe_interval < 1) {
			throw ConfigError("probe interval must be >= 1 us");
		}
	}

	void install(Engine& eng, std::int32_t /*app_index*/) override
	{
		std::int32_t stats = eng.add_app_stats(spec_.common.name);
		CgroupId g = eng.cgroup_id(spec_.common.cgroup);
		ProcessId pid = eng.add_process(g);
		eng.add_thread(pid, spec_.common.pinned_core,
		               std::make_unique<ProbeProgram>(spec_), stats,
		               spec_.common.name, spec_.common.arg_sizes);
	}

private:
	MemoryProbeSpec spec_;
};

} // namespace

std::unique_ptr<AppDriver> make_app_driver(const AppSpec& spec)
{
	return std::visit(
	    [](const auto& s) -> std::unique_ptr<AppDriver> {
		    using T = std::decay_t<decltype(s)>;
		    if constexpr(std::is_same_v<T, SuperProducerSpec>) {
			    return std::make_unique<ProducerDriver>(s);
		    } else if constexpr(std::is_same_v<T, ServerAppSpec>) {
			    return std::make_unique<ServerDriver>(s);
		    } else if constexpr(std::is_same_v<T, MalwareSpec>) {
			    return std::make_unique<MalwareDriver>(s);
		    } else {
			    return std::make_unique<ProbeDriver>(s);
		    }
	    },
	    spec);
}

} // namespace arena
