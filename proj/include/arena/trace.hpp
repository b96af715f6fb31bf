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

// State-transition trace: newline-delimited `time_us,entity,transition`
// records. Disabled by default; when disabled, recording is a no-op so
// hot paths stay cheap.
class SimTrace {
public:
	void enable() { enabled_ = true; }
	bool enabled() const { return enabled_; }

	void record(VirtualTime t, const std::string& entity,
	            const std::string& transition)
	{
		if(!enabled_) {
			return;
		}
		lines_.push_back(std::to_string(t) + "," + entity + "," + transition);
	}

	const std::vector<std::string>& lines() const { return lines_; }

	std::string to_text() const
	{
		std::string out;
		for(const std::string& l : lines_) {
			out += l;
			out += '\n';
		}
		return out;
	}

	void write_file(const std::string& path) const;

private:
	bool enabled_ = false;
	std::vector<std::string> lines_;
};

} // namespace arena
