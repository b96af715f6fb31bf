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

#include <cstdint>
#include <stdexcept>
#include <string>

namespace arena {

// Simulated time in integer microseconds since the start of the run.
// All rates in configs are given per second and converted to microsecond
// gaps; the virtual clock never goes backwards.
using VirtualTime = std::int64_t;

constexpr VirtualTime kMicrosPerSecond = 1'000'000;
constexpr VirtualTime kMicrosPerMilli = 1'000;

constexpr VirtualTime seconds_us(double s)
{
	return static_cast<VirtualTime>(s * static_cast<double>(kMicrosPerSecond));
}

using ThreadId = std::int32_t;
using ProcessId = std::int32_t;
using CoreId = std::int32_t;
using CgroupId = std::int32_t;
using BufferId = std::int32_t;

constexpr std::int32_t kNoId = -1;

// Where a slice of simulated CPU time is booked.
enum class Account : std::uint8_t {
	AppWork,       // the application's own computation
	KernelCapture, // in-kernel event recording on the syscall path
	ConsumerWork,  // threadlet consumer executing inside the host thread
	CollectorWork, // centralized collector / reducer threads
};

constexpr std::size_t kAccountCount = 4;

const char* account_name(Account a);

// Raised for bad configuration (unknown keys, impossible machine shapes,
// records larger than a buffer can ever hold). Maps to exit code 1.
class ConfigError : public std::runtime_error {
public:
	explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised when the simulation detects an internal contradiction
// (clock regression, charging a non-running thread, re-entrant consumer
// invocation). Maps to exit code 2.
class InvariantError : public std::logic_error {
public:
	explicit InvariantError(const std::string& msg) : std::logic_error(msg) {}
};

// splitmix64; used to derive independent per-trial seeds from a base seed.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt);

} // namespace arena
