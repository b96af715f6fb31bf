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

#include <string>
#include <vector>

#include "arena/types.hpp"

namespace arena {

// Hard CPU quota in the cpu.max style: a group may charge at most
// quota_fraction x period x core_count microseconds per period, then its
// threads are throttled until the next period boundary.
struct CgroupSpec {
	std::string name = "root";
	double quota_fraction = 1.0;
};

struct MachineSpec {
	std::int32_t core_count = 1;
	VirtualTime quantum = 1'000;
	VirtualTime period = 100'000;
	// Index 0 is always the root cgroup with quota 1.0.
	std::vector<CgroupSpec> cgroups = {CgroupSpec{}};

	void validate() const
	{
		if(core_count < 1 || core_count > 1024) {
			throw ConfigError("core count must be in [1, 1024]");
		}
		if(quantum <= 0 || period <= 0 || period < quantum) {
			throw ConfigError("need 0 < quantum <= period");
		}
		if(cgroups.empty() || cgroups[0].name != "root") {
			throw ConfigError("cgroup 0 must be the root group");
		}
		for(const CgroupSpec& g : cgroups) {
			if(g.quota_fraction <= 0.0 || g.quota_fraction > 1.0) {
				throw ConfigError("cgroup quota must be in (0, 1]: " + g.name);
			}
		}
	}

	CgroupId find_cgroup(const std::string& name) const
	{
		for(std::size_t i = 0; i < cgroups.size(); ++i) {
			if(cgroups[i].name == name) {
				return static_cast<CgroupId>(i);
			}
		}
		throw ConfigError("unknown cgroup: " + name);
	}
};

} // namespace arena
