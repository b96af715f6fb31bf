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

#include "arena/config.hpp"
#include "arena/engine.hpp"

using namespace arena;

TEST_CASE("an empty config resolves to the documented defaults", "[config]")
{
	ResolvedConfig cfg = parse_config_text("");
	REQUIRE(cfg.machine.core_count == 1);
	REQUIRE(cfg.arch.has_value());
	REQUIRE(cfg.arch->name == "nodrop");
	REQUIRE(cfg.experiment.harness == "rq1");
	REQUIRE(cfg.experiment.seed == 1);
	REQUIRE(cfg.apps.empty());
	REQUIRE(cfg.costs.consume_cost == 250);
}

TEST_CASE("the emitted default config parses back to the defaults",
          "[config]")
{
	ResolvedConfig fresh = parse_config_text("");
	ResolvedConfig round = parse_config_text(default_config_text());
	REQUIRE(round.machine.core_count == fresh.machine.core_count);
	REQUIRE(round.machine.quantum == fresh.machine.quantum);
	REQUIRE(round.costs.kernel_record_cost == fresh.costs.kernel_record_cost);
	REQUIRE(round.arch->name == fresh.arch->name);
	REQUIRE(round.experiment.harness == fresh.experiment.harness);
}

TEST_CASE("comments and blank lines are ignored", "[config]")
{
	ResolvedConfig cfg = parse_config_text("# leading comment\n"
	                                       "\n"
	                                       "[machine]\n"
	                                       "cores = 4   # trailing comment\n");
	REQUIRE(cfg.machine.core_count == 4);
}

TEST_CASE("unknown keys and sections fail loudly", "[config]")
{
	REQUIRE_THROWS_WITH(parse_config_text("[machine]\nbogus = 1\n"),
	                    Catch::Matchers::ContainsSubstring(
	                        "unknown key 'bogus' in section [machine]"));
	REQUIRE_THROWS_WITH(parse_config_text("[nope]\n"),
	                    Catch::Matchers::ContainsSubstring("unknown section"));
	REQUIRE_THROWS_WITH(parse_config_text("[machine]\ncores = abc\n"),
	                    Catch::Matchers::ContainsSubstring(
	                        "invalid value for 'cores'"));
}

TEST_CASE("a misspelled preset reports the valid names", "[config]")
{
	REQUIRE_THROWS_WITH(parse_config_text("[collector]\npreset = sysdg\n"),
	                    Catch::Matchers::ContainsSubstring("sysdig"));
}

TEST_CASE("collector overrides apply on top of the preset", "[config]")
{
	ResolvedConfig cfg = parse_config_text("[collector]\n"
	                                       "preset = sysdig\n"
	                                       "buffer_bytes = 252000\n"
	                                       "claim_batch = 16\n"
	                                       "dedicated_core = true\n");
	REQUIRE(cfg.arch->name == "sysdig");
	REQUIRE(cfg.arch->buffer_bytes == 252'000);
	REQUIRE(cfg.arch->claim_batch == 16);
	REQUIRE(cfg.arch->dedicated_core);
}

TEST_CASE("overrides without a real preset are rejected", "[config]")
{
	REQUIRE_THROWS_AS(
	    parse_config_text("[collector]\npreset = none\nbuffer_bytes = 1\n"),
	    ConfigError);
	ResolvedConfig cfg = parse_config_text("[collector]\npreset = none\n");
	REQUIRE(!cfg.arch.has_value());
}

TEST_CASE("machine and cost knobs reach the engine", "[config]")
{
	ResolvedConfig cfg = parse_config_text("[machine]\n"
	                                       "cores = 32\n"
	                                       "quantum_us = 500\n"
	                                       "cgroup.tenant = 0.25\n"
	                                       "[costs]\n"
	                                       "consume_cost_us = 125\n"
	                                       "[collector]\n"
	                                       "preset = sysdig\n");
	REQUIRE(cfg.machine.quantum == 500);
	REQUIRE(cfg.costs.consume_cost == 125);
	Engine eng(cfg.sim_config());
	REQUIRE(eng.buffer_count() == 32); // one ring per core
	REQUIRE_NOTHROW(eng.cgroup_id("tenant"));
}

TEST_CASE("the root cgroup quota cannot be overridden", "[config]")
{
	REQUIRE_THROWS_WITH(parse_config_text("[machine]\ncgroup.root = 0.5\n"),
	                    Catch::Matchers::ContainsSubstring("root cgroup"));
}

TEST_CASE("workload sections build typed app specs", "[config]")
{
	ResolvedConfig cfg = parse_config_text("[machine]\n"
	                                       "cores = 2\n"
	                                       "cgroup.attacker = 0.5\n"
	                                       "[workload.burst]\n"
	                                       "type = producer\n"
	                                       "rate_per_proc = 250000\n"
	                                       "cgroup = attacker\n"
	                                       "pinned_core = 0\n"
	                                       "[workload.web]\n"
	                                       "type = server\n"
	                                       "request_cpu_cost_us = 100\n"
	                                       "events_per_request = 2\n"
	                                       "offered_rps = 2000\n"
	                                       "concurrency = 4\n"
	                                       "[workload.mal]\n"
	                                       "type = malware\n"
	                                       "strike_min_us = 1800000\n"
	                                       "strike_max_us = 2800000\n");
	REQUIRE(cfg.apps.size() == 3);
	const auto& p = std::get<SuperProducerSpec>(cfg.apps[0]);
	REQUIRE(p.common.name == "burst");
	REQUIRE(p.common.cgroup == "attacker");
	REQUIRE(p.peak_rate_per_proc == 250'000);
	const auto& s = std::get<ServerAppSpec>(cfg.apps[1]);
	REQUIRE(s.offered_rps == 2'000.0);
	REQUIRE(s.concurrency == 4);
	const auto& m = std::get<MalwareSpec>(cfg.apps[2]);
	REQUIRE(m.strike_min == 1'800'000);
	REQUIRE(m.strike_max == 2'800'000);
}

TEST_CASE("duplicate workload names are rejected", "[config]")
{
	REQUIRE_THROWS_WITH(
	    parse_config_text("[workload.x]\ntype = producer\n"
	                      "[workload.x]\ntype = malware\n"),
	    Catch::Matchers::ContainsSubstring("duplicate workload"));
}

TEST_CASE("experiment settings parse lists and durations", "[config]")
{
	ResolvedConfig cfg = parse_config_text("[experiment]\n"
	                                       "harness = pados\n"
	                                       "preset = sysdig-integrity\n"
	                                       "seed = 9\n"
	                                       "duration_s = 10\n"
	                                       "scenario = cgroup\n"
	                                       "rates = 1000, 2000, 3000\n"
	                                       "victim_rates = 200,400\n"
	                                       "archs = none, nodrop\n"
	                                       "out = /tmp/arena-out\n");
	const ExperimentSpec& e = cfg.experiment;
	REQUIRE(e.harness == "pados");
	REQUIRE(e.preset == "sysdig-integrity");
	REQUIRE(e.seed == 9);
	REQUIRE(e.duration == seconds_us(10));
	REQUIRE(e.scenario == "cgroup");
	REQUIRE(e.rates == std::vector<std::int64_t>{1'000, 2'000, 3'000});
	REQUIRE(e.victim_rates == std::vector<std::int64_t>{200, 400});
	REQUIRE(e.archs == std::vector<std::string>{"none", "nodrop"});
	REQUIRE(e.out_dir == "/tmp/arena-out");
}

TEST_CASE("bad experiment enums are rejected", "[config]")
{
	REQUIRE_THROWS_AS(parse_config_text("[experiment]\nharness = bogus\n"),
	                  ConfigError);
	REQUIRE_THROWS_AS(parse_config_text("[experiment]\nscenario = bogus\n"),
	                  ConfigError);
}

TEST_CASE("sim_config carries seed and trace straight through", "[config]")
{
	ResolvedConfig cfg = parse_config_text("[experiment]\nseed = 77\n");
	cfg.trace_enabled = true;
	SimConfig sim = cfg.sim_config();
	REQUIRE(sim.seed == 77);
	REQUIRE(sim.trace_enabled);
	REQUIRE(sim.arch.has_value());
}
