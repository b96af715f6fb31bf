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
#include "arena/workload.hpp"

using namespace arena;

TEST_CASE("a closed-loop server turns requests at the cpu cost exactly",
          "[workloads]")
{
	SimConfig cfg;
	ServerAppSpec s;
	s.common.name = "server";
	s.request_cpu_cost = 100;
	s.events_per_request = 0;
	s.concurrency = 1;
	cfg.apps.emplace_back(s);
	Engine eng(std::move(cfg));
	eng.run_until(seconds_us(1));
	const AppStats& st = eng.metrics().apps.at(0);
	REQUIRE(st.requests_completed == 10'000);
	REQUIRE(st.requests_arrived - st.requests_completed <= 1);
	REQUIRE(st.latency_sum_us / static_cast<double>(st.requests_completed) ==
	        Catch::Approx(100.0));
}

TEST_CASE("auditing overhead shows up as lost server throughput",
          "[workloads]")
{
	// 100us of work plus 10 audited events per request. With 1us
	// capture and 1us consume, the amortized cost per request is about
	// 100 + 10*1 + 10*1 + invoke overheads, so roughly 8,300 req/s.
	SimConfig cfg;
	cfg.costs.kernel_record_cost = 1;
	cfg.costs.consume_cost = 1;
	CollectorArch arch = make_preset("nodrop");
	arch.buffer_bytes = 10'000 * 126;
	cfg.arch = arch;
	ServerAppSpec s;
	s.common.name = "server";
	s.request_cpu_cost = 100;
	s.events_per_request = 10;
	s.concurrency = 1;
	cfg.apps.emplace_back(s);
	Engine eng(std::move(cfg));
	eng.run_until(seconds_us(1));
	const AppStats& st = eng.metrics().apps.at(0);
	REQUIRE(st.requests_completed > 8'200);
	REQUIRE(st.requests_completed < 8'400);
	REQUIRE(eng.metrics().flow.dropped == 0);
}

TEST_CASE("open-loop arrivals are deterministic and latency is service time",
          "[workloads]")
{
	SimConfig cfg;
	ServerAppSpec s;
	s.common.name = "server";
	s.request_cpu_cost = 200;
	s.offered_rps = 2'000.0;
	s.concurrency = 1; // one worker: wakes never pay a cross-thread switch
	cfg.apps.emplace_back(s);
	Engine eng(std::move(cfg));
	eng.run_until(seconds_us(1));
	const AppStats& st = eng.metrics().apps.at(0);
	// Arrivals land every 500us; service is 200us, so no queueing.
	REQUIRE(st.requests_arrived == 2'000);
	REQUIRE(st.requests_completed == 1'999); // the last one is in flight
	REQUIRE(st.latency_sum_us / static_cast<double>(st.requests_completed) ==
	        Catch::Approx(200.0));
}

TEST_CASE("a zero write fraction produces pure cpu load and no events",
          "[workloads]")
{
	SimConfig cfg;
	cfg.arch = make_preset("sysdig");
	SuperProducerSpec p;
	p.common.name = "hog";
	p.peak_rate_per_proc = 10'000;
	p.write_fraction = 0.0;
	cfg.apps.emplace_back(p);
	Engine eng(std::move(cfg));
	eng.run_until(seconds_us(1));
	REQUIRE(eng.metrics().apps.at(0).events_offered == 0);
	REQUIRE(eng.metrics().flow.generated == 0);
	REQUIRE(eng.thread(0).cpu_us == seconds_us(1));
}

TEST_CASE("offered equals realized when nothing pushes back", "[workloads]")
{
	SimConfig cfg;
	cfg.arch = make_preset("nodrop");
	SuperProducerSpec p;
	p.common.name = "producer";
	p.peak_rate_per_proc = 1'000;
	cfg.apps.emplace_back(p);
	Engine eng(std::move(cfg));
	eng.run_until(seconds_us(1));
	const AppStats& st = eng.metrics().apps.at(0);
	REQUIRE(st.events_offered == 1'000);
	REQUIRE(eng.metrics().flow.generated == 1'000);
	REQUIRE(eng.metrics().flow.recorded == 1'000);
	REQUIRE(eng.metrics().flow.dropped == 0);
}

TEST_CASE("with no consumer the offer is counted but nothing is captured",
          "[workloads]")
{
	SimConfig cfg;
	SuperProducerSpec p;
	p.common.name = "producer";
	p.peak_rate_per_proc = 5'000;
	cfg.apps.emplace_back(p);
	Engine eng(std::move(cfg));
	eng.run_until(seconds_us(2));
	REQUIRE(eng.metrics().apps.at(0).events_offered == 10'000);
	REQUIRE(eng.metrics().flow.generated == 0);
	REQUIRE(eng.capture_cost() == 0);
}

TEST_CASE("marker bursts ride the normal capture path", "[workloads]")
{
	SimConfig cfg;
	cfg.arch = make_preset("sysdig");
	MalwareSpec m;
	m.common.name = "malware";
	m.strike_min = 100'000;
	m.strike_max = 100'000;
	m.marker_count = 5;
	m.inter_marker_gap = 50;
	cfg.apps.emplace_back(m);
	Engine eng(std::move(cfg));
	eng.run_until(seconds_us(1));
	const FlowCounters& f = eng.metrics().flow;
	REQUIRE(f.marker_generated == 5);
	REQUIRE(f.marker_recorded == 5); // idle collector: nothing lost
	REQUIRE(f.marker_dropped == 0);
	REQUIRE(f.generated == 5);
	REQUIRE(eng.metrics().apps.at(0).events_offered == 5);
}

TEST_CASE("a strike window draws its time from the seeded rng",
          "[workloads]")
{
	auto strike_of = [](std::uint64_t seed) {
		SimConfig cfg;
		cfg.seed = seed;
		cfg.trace_enabled = true;
		cfg.arch = make_preset("sysdig");
		MalwareSpec m;
		m.common.name = "malware";
		m.strike_min = 100'000;
		m.strike_max = 900'000;
		cfg.apps.emplace_back(m);
		Engine eng(std::move(cfg));
		eng.run_until(seconds_us(1));
		// First marker lands one gap after the strike wake.
		for(const auto& line : eng.trace().lines()) {
			if(line.find("marker_stored") != std::string::npos) {
				return line;
			}
		}
		return std::string{};
	};
	std::string a = strike_of(7);
	std::string b = strike_of(7);
	std::string c = strike_of(8);
	REQUIRE(!a.empty());
	REQUIRE(a == b);
	REQUIRE(a != c);
}

TEST_CASE("process count multiplies the offered load", "[workloads]")
{
	auto generated_with = [](std::int32_t procs, std::int32_t cores) {
		SimConfig cfg;
		cfg.machine.core_count = cores;
		cfg.arch = make_preset("nodrop");
		SuperProducerSpec p;
		p.common.name = "producer";
		p.peak_rate_per_proc = 2'000;
		p.process_count = procs;
		cfg.apps.emplace_back(p);
		Engine eng(std::move(cfg));
		eng.run_until(seconds_us(3));
		return eng.metrics().flow.generated;
	};
	std::int64_t one = generated_with(1, 3);
	std::int64_t three = generated_with(3, 3);
	REQUIRE(one == 6'000);
	REQUIRE(three == 18'000);
}
