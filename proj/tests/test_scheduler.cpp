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

using namespace arena;

namespace {

// Pure CPU burner: write_fraction 0 emits nothing, so these tests see
// scheduling behavior with no capture path in the way.
SuperProducerSpec hog(const std::string& name, const std::string& cgroup)
{
	SuperProducerSpec s;
	s.common.name = name;
	s.common.cgroup = cgroup;
	s.peak_rate_per_proc = 10'000; // 100 us phase granularity
	s.write_fraction = 0.0;
	return s;
}

} // namespace

TEST_CASE("two equal threads share one core evenly", "[scheduler]")
{
	SimConfig cfg;
	cfg.apps.emplace_back(hog("a", "root"));
	cfg.apps.emplace_back(hog("b", "root"));
	Engine eng(std::move(cfg));
	eng.run_until(seconds_us(1));
	VirtualTime a = eng.thread(0).cpu_us;
	VirtualTime b = eng.thread(1).cpu_us;
	VirtualTime quantum = eng.config().machine.quantum;
	REQUIRE(std::abs(a - b) <= quantum);
	// Full utilization: work plus switch overhead fills the core.
	const CoreLedger& core = eng.metrics().cores.at(0);
	REQUIRE(core.busy == a + b);
	REQUIRE(core.busy + core.switch_time <= seconds_us(1));
	REQUIRE(core.busy + core.switch_time >= seconds_us(1) - quantum);
}

TEST_CASE("alternation costs exactly one switch per quantum expiry",
          "[scheduler]")
{
	SimConfig cfg;
	cfg.apps.emplace_back(hog("a", "root"));
	cfg.apps.emplace_back(hog("b", "root"));
	Engine eng(std::move(cfg));
	eng.run_until(seconds_us(1));
	const CoreLedger& core = eng.metrics().cores.at(0);
	VirtualTime cs = eng.costs().context_switch_cost;
	VirtualTime quantum = eng.config().machine.quantum;
	// Each (quantum + switch) cycle hands the core over once.
	std::int64_t cycles = seconds_us(1) / (quantum + cs);
	REQUIRE(core.switch_time >= (cycles - 2) * cs);
	REQUIRE(core.switch_time <= (cycles + 2) * cs);
}

TEST_CASE("a lone thread never pays for context switches", "[scheduler]")
{
	SimConfig cfg;
	cfg.apps.emplace_back(hog("solo", "root"));
	Engine eng(std::move(cfg));
	eng.run_until(seconds_us(1));
	REQUIRE(eng.metrics().cores.at(0).switch_time == 0);
	REQUIRE(eng.thread(0).cpu_us == seconds_us(1));
}

TEST_CASE("a 20% quota caps charged time at one fifth of the core",
          "[scheduler]")
{
	SimConfig cfg;
	cfg.machine.cgroups.push_back(CgroupSpec{"capped", 0.2});
	cfg.apps.emplace_back(hog("limited", "capped"));
	Engine eng(std::move(cfg));
	eng.run_until(seconds_us(1));
	// 10 full periods of 100 ms at 20,000 us allowance each.
	REQUIRE(eng.thread(0).cpu_us == 200'000);
	const CoreLedger& core = eng.metrics().cores.at(0);
	REQUIRE(core.busy == 200'000);
	REQUIRE(core.switch_time == 0);
}

TEST_CASE("no period ever charges beyond its allowance", "[scheduler]")
{
	SimConfig cfg;
	cfg.machine.cgroups.push_back(CgroupSpec{"small", 0.35});
	cfg.apps.emplace_back(hog("a", "small"));
	cfg.apps.emplace_back(hog("b", "small"));
	cfg.apps.emplace_back(hog("c", "root"));
	Engine eng(std::move(cfg));
	eng.run_until(seconds_us(2));
	VirtualTime quantum = eng.config().machine.quantum;
	REQUIRE_FALSE(eng.metrics().period_log.empty());
	for(const PeriodCharge& pc : eng.metrics().period_log) {
		REQUIRE(pc.charged <= pc.allowance + quantum);
	}
}

TEST_CASE("quota split between cgroups matches their fractions",
          "[scheduler]")
{
	SimConfig cfg;
	cfg.machine.cgroups.push_back(CgroupSpec{"gold", 0.7});
	cfg.machine.cgroups.push_back(CgroupSpec{"iron", 0.3});
	cfg.apps.emplace_back(hog("g", "gold"));
	cfg.apps.emplace_back(hog("i", "iron"));
	Engine eng(std::move(cfg));
	eng.run_until(seconds_us(1));
	VirtualTime g = eng.thread(0).cpu_us;
	VirtualTime i = eng.thread(1).cpu_us;
	// Demand exceeds both quotas, so each is pinned at its cap minus
	// at most switch overhead rounding.
	REQUIRE(g <= 700'000);
	REQUIRE(g >= 690'000);
	REQUIRE(i <= 300'000);
	REQUIRE(i >= 290'000);
}

TEST_CASE("pinned threads only run on their core", "[scheduler]")
{
	SimConfig cfg;
	cfg.machine.core_count = 2;
	SuperProducerSpec a = hog("a", "root");
	a.common.pinned_core = 0;
	SuperProducerSpec b = hog("b", "root");
	b.common.pinned_core = 0;
	cfg.apps.emplace_back(a);
	cfg.apps.emplace_back(b);
	Engine eng(std::move(cfg));
	eng.run_until(seconds_us(1));
	// Both compete for core 0; core 1 stays idle.
	REQUIRE(eng.metrics().cores.at(1).busy == 0);
	REQUIRE(eng.metrics().cores.at(0).busy > 900'000);
}

TEST_CASE("an unpinned thread spreads onto a free core", "[scheduler]")
{
	SimConfig cfg;
	cfg.machine.core_count = 2;
	cfg.apps.emplace_back(hog("a", "root"));
	cfg.apps.emplace_back(hog("b", "root"));
	Engine eng(std::move(cfg));
	eng.run_until(seconds_us(1));
	// Two runnable threads, two cores: both run in parallel.
	REQUIRE(eng.thread(0).cpu_us == seconds_us(1));
	REQUIRE(eng.thread(1).cpu_us == seconds_us(1));
	REQUIRE(eng.metrics().cores.at(0).switch_time == 0);
	REQUIRE(eng.metrics().cores.at(1).switch_time == 0);
}

TEST_CASE("charges land in the owning cgroup's ledger", "[scheduler]")
{
	SimConfig cfg;
	cfg.machine.cgroups.push_back(CgroupSpec{"tenant", 0.5});
	cfg.apps.emplace_back(hog("t", "tenant"));
	Engine eng(std::move(cfg));
	eng.run_until(seconds_us(1));
	CgroupId tenant = eng.cgroup_id("tenant");
	CgroupId root = eng.cgroup_id("root");
	REQUIRE(eng.metrics().cgroup_total_us(tenant) ==
	        eng.thread(0).cpu_us);
	REQUIRE(eng.metrics().cgroup_total_us(root) == 0);
}
