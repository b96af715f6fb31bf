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

#include <catch2/catch_amalgamated.hpp>

#include "arena/engine.hpp"
#include "arena/threadlet.hpp"

using namespace arena;

namespace {

// One self-consuming producer with a buffer sized to a known record count.
SimConfig threadlet_config(std::int64_t events_total, std::size_t buffer_records)
{
	SimConfig cfg;
	CollectorArch arch = make_preset("nodrop");
	arch.buffer_bytes = buffer_records * 126;
	cfg.arch = arch;
	SuperProducerSpec p;
	p.common.name = "producer";
	p.peak_rate_per_proc = 10'000;
	p.events_total = events_total;
	cfg.apps.emplace_back(p);
	return cfg;
}

} // namespace

TEST_CASE("activations count one per fill plus one exit drain", "[threadlet]")
{
	// 5,000 events into a 1,000-record buffer: the 1,001st, 2,001st,
	// 3,001st and 4,001st pushes block, the last 1,000 drain at exit.
	Engine eng(threadlet_config(5'000, 1'000));
	eng.run_until(seconds_us(3));
	const ConsumerState& cs = eng.thread(0).consumer;
	REQUIRE(cs.activations == 5);
	REQUIRE(cs.events_consumed == 5'000);
	REQUIRE(cs.load_charges == 1);
	REQUIRE(cs.windows.size() == 5);
	REQUIRE(cs.phase == ConsumerPhase::Exiting);
	REQUIRE(eng.metrics().flow.consumed == 5'000);
	REQUIRE(eng.metrics().flow.dropped == 0);
	REQUIRE_NOTHROW(eng.audit_all());
}

TEST_CASE("the exit drain flushes a partial buffer", "[threadlet]")
{
	Engine eng(threadlet_config(2'037, 1'000));
	eng.run_until(seconds_us(3));
	const ConsumerState& cs = eng.thread(0).consumer;
	REQUIRE(cs.activations == 3); // two fills plus 37 records at exit
	REQUIRE(cs.events_consumed == 2'037);
	REQUIRE(eng.metrics().flow.consumed == 2'037);
	REQUIRE(eng.metrics().residual_in_buffers == 0);
}

TEST_CASE("an empty buffer at exit never invokes the consumer",
          "[threadlet]")
{
	SimConfig cfg;
	cfg.arch = make_preset("nodrop");
	MemoryProbeSpec probe;
	probe.common.name = "probe";
	probe.probe_interval = 1'000;
	probe.probe_count = 3;
	cfg.apps.emplace_back(probe);
	Engine eng(std::move(cfg));
	eng.run_until(seconds_us(1));
	const ConsumerState& cs = eng.thread(0).consumer;
	REQUIRE(cs.activations == 0);
	REQUIRE(cs.load_paid == false);
	REQUIRE(cs.phase == ConsumerPhase::Uninitialized);
	REQUIRE(eng.thread(0).state == ThreadState::Exited);
}

TEST_CASE("out-of-window pokes at the protected region always violate",
          "[threadlet]")
{
	SimConfig cfg;
	cfg.arch = make_preset("nodrop");
	MemoryProbeSpec probe;
	probe.common.name = "probe";
	probe.probe_interval = 500;
	probe.probe_count = 7;
	cfg.apps.emplace_back(probe);
	Engine eng(std::move(cfg));
	eng.run_until(seconds_us(1));
	REQUIRE(eng.metrics().violations.size() == 7);
	REQUIRE(eng.metrics().allowed_probes == 0);
	for(const ViolationLog& v : eng.metrics().violations) {
		REQUIRE(v.actor == 0);
		REQUIRE(v.region_owner == 0);
	}
}

TEST_CASE("signals inside an active window defer to its close",
          "[threadlet]")
{
	// A 100-record buffer fills just after t=10ms; the first activation
	// then holds the window open for the 25ms whole-buffer drain.
	SimConfig cfg = threadlet_config(0, 100);
	Engine eng(std::move(cfg));
	eng.schedule(5'000, ActionKind::SignalInject, 0, 1);
	eng.schedule(15'000, ActionKind::SignalInject, 0, 2);
	eng.schedule(16'000, ActionKind::SignalInject, 0, 3);
	eng.schedule(17'000, ActionKind::SignalInject, 0, 4);
	eng.schedule(40'000, ActionKind::SignalInject, 0, 5);
	eng.run_until(45'000);

	const ConsumerState& cs = eng.thread(0).consumer;
	REQUIRE(cs.windows.size() == 1);
	VirtualTime open = cs.windows[0].first;
	VirtualTime close = cs.windows[0].second;
	REQUIRE(open < 15'000);
	REQUIRE(close > 17'000);
	REQUIRE(close < 40'000);

	const auto& dl = eng.metrics().signal_deliveries;
	REQUIRE(dl.size() == 5);
	// Before the window: straight through.
	REQUIRE(dl[0].signal_id == 1);
	REQUIRE(dl[0].time == 5'000);
	REQUIRE(dl[0].was_deferred == false);
	// Inside the window: parked, then delivered at close in arrival order.
	for(std::size_t i = 1; i <= 3; ++i) {
		REQUIRE(dl[i].signal_id == static_cast<std::int32_t>(i + 1));
		REQUIRE(dl[i].time == close);
		REQUIRE(dl[i].was_deferred == true);
	}
	// Between windows: straight through again.
	REQUIRE(dl[4].signal_id == 5);
	REQUIRE(dl[4].time == 40'000);
	REQUIRE(dl[4].was_deferred == false);
}

TEST_CASE("privileges escalate only within windows and restore after",
          "[threadlet]")
{
	Engine eng(threadlet_config(5'000, 1'000));
	eng.run_until(seconds_us(3));
	const ThreadRt& t = eng.thread(0);
	REQUIRE(t.privileges == PrivilegeFlags{});
	REQUIRE(t.consumer.saved_privileges.has_value() == false);
	// The consumer ran, so escalation did happen and was undone.
	REQUIRE(t.consumer.activations > 0);
}

TEST_CASE("the key check admits only the holder of the region key",
          "[threadlet]")
{
	ProtectionRegion region{0x1234, 7, 3};
	REQUIRE(access_check(3, true, 7, region, AccessKind::Write) ==
	        AccessResult::Allowed);
	REQUIRE(access_check(3, false, 7, region, AccessKind::Write) ==
	        AccessResult::Violation);
	REQUIRE(access_check(3, true, 8, region, AccessKind::Read) ==
	        AccessResult::Violation);
	REQUIRE(access_check(9, true, 7, region, AccessKind::Read) ==
	        AccessResult::Allowed); // key possession is what matters
}

TEST_CASE("each thread gets a distinct region, stable across seeds",
          "[threadlet]")
{
	auto two_producer_config = [] {
		SimConfig cfg;
		cfg.machine.core_count = 2;
		cfg.arch = make_preset("nodrop");
		for(int i = 0; i < 2; ++i) {
			SuperProducerSpec p;
			p.common.name = "p" + std::to_string(i);
			p.peak_rate_per_proc = 1'000;
			p.events_total = 10;
			cfg.apps.emplace_back(p);
		}
		cfg.seed = 42;
		return cfg;
	};
	Engine a(two_producer_config());
	Engine b(two_producer_config());
	REQUIRE(a.thread_count() == 2); // self-consuming: no collector thread
	REQUIRE(a.thread(0).consumer.region.key !=
	        a.thread(1).consumer.region.key);
	REQUIRE(a.thread(0).consumer.region.owner == 0);
	REQUIRE(a.thread(1).consumer.region.owner == 1);
	REQUIRE(a.thread(0).consumer.region.base ==
	        b.thread(0).consumer.region.base);
	REQUIRE(a.thread(1).consumer.region.base ==
	        b.thread(1).consumer.region.base);
}

TEST_CASE("drain work bills the host thread's own cgroup", "[threadlet]")
{
	SimConfig cfg = threadlet_config(3'000, 1'000);
	cfg.machine.cgroups.push_back(CgroupSpec{"tenant", 0.5});
	cfg.apps.clear();
	SuperProducerSpec p;
	p.common.name = "producer";
	p.common.cgroup = "tenant";
	p.peak_rate_per_proc = 10'000;
	p.events_total = 3'000;
	cfg.apps.emplace_back(p);
	Engine eng(std::move(cfg));
	eng.run_until(seconds_us(3));
	CgroupId tenant = eng.cgroup_id("tenant");
	const auto& acct = eng.metrics().cgroup_account_us;
	auto idx = [](Account a) { return static_cast<std::size_t>(a); };
	// 3,000 drained records at 250us each, all inside the tenant quota.
	REQUIRE(acct[tenant][idx(Account::ConsumerWork)] >= 3'000 * 250);
	REQUIRE(acct[tenant][idx(Account::CollectorWork)] == 0);
	REQUIRE(acct[0][idx(Account::ConsumerWork)] == 0); // root untouched
	REQUIRE(eng.thread(0).consumer_us >= 3'000 * 250);
}
