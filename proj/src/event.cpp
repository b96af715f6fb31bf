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

#include "arena/event.hpp"

namespace arena {

const char* account_name(Account a)
{
	switch(a) {
	case Account::AppWork:
		return "app_work";
	case Account::KernelCapture:
		return "kernel_capture";
	case Account::ConsumerWork:
		return "consumer_work";
	case Account::CollectorWork:
		return "collector_work";
	}
	return "unknown";
}

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt)
{
	std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (salt + 1);
	z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
	z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
	return z ^ (z >> 31);
}

const char* event_kind_name(EventKind k)
{
	switch(k) {
	case EventKind::Syscall:
		return "syscall";
	case EventKind::ThreadSwitch:
		return "thread_switch";
	case EventKind::Signal:
		return "signal";
	}
	return "unknown";
}

SimEvent SimEvent::syscall(VirtualTime ts, ThreadId tid,
                           std::vector<std::uint32_t> args, bool marker)
{
	SimEvent ev;
	ev.kind = EventKind::Syscall;
	ev.timestamp = ts;
	ev.tid = tid;
	ev.arg_sizes = std::move(args);
	ev.marker = marker;
	return ev;
}

SimEvent SimEvent::thread_switch(VirtualTime ts, ThreadId tid)
{
	SimEvent ev;
	ev.kind = EventKind::ThreadSwitch;
	ev.timestamp = ts;
	ev.tid = tid;
	ev.arg_sizes = {8, 8};
	return ev;
}

SimEvent SimEvent::signal(VirtualTime ts, ThreadId tid)
{
	SimEvent ev;
	ev.kind = EventKind::Signal;
	ev.timestamp = ts;
	ev.tid = tid;
	ev.arg_sizes = {8, 8};
	return ev;
}

std::uint32_t record_size_for_args(const std::vector<std::uint32_t>& arg_sizes)
{
	std::uint32_t total = kMetadataBytes;
	for(std::uint32_t len : arg_sizes) {
		total += kArgHeaderBytes + std::min(len, kMaxArgBytes);
	}
	return total;
}

std::uint32_t record_size(const SimEvent& ev)
{
	return record_size_for_args(ev.arg_sizes);
}

namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v)
{
	out.push_back(static_cast<std::uint8_t>(v & 0xff));
	out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v)
{
	for(int i = 0; i < 4; ++i) {
		out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
	}
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v)
{
	for(int i = 0; i < 8; ++i) {
		out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
	}
}

} // namespace

EventRecord encode(const SimEvent& ev)
{
	EventRecord rec;
	rec.bytes.reserve(record_size(ev));
	put_u32(rec.bytes, static_cast<std::uint32_t>(ev.kind));
	put_u64(rec.bytes, static_cast<std::uint64_t>(ev.timestamp));
	put_u64(rec.bytes, static_cast<std::uint64_t>(ev.tid));
	put_u32(rec.bytes, record_size(ev));
	for(std::size_t a = 0; a < ev.arg_sizes.size(); ++a) {
		std::uint32_t kept = std::min(ev.arg_sizes[a], kMaxArgBytes);
		put_u16(rec.bytes, static_cast<std::uint16_t>(kept));
		for(std::uint32_t i = 0; i < kept; ++i) {
			rec.bytes.push_back(static_cast<std::uint8_t>((a + i) & 0xff));
		}
	}
	return rec;
}

} // namespace arena
