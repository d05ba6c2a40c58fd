/* Copyright 2026 The ddlring Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "ddl/wire.h"

namespace ddl::wire {

namespace {

template <typename T>
void put(std::byte* out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out[i] = static_cast<std::byte>((value >> (8 * i)) & 0xff);
  }
}

template <typename T>
T get(const std::byte* in) {
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    value |= static_cast<T>(static_cast<std::uint8_t>(in[i])) << (8 * i);
  }
  return value;
}

}  // namespace

std::array<std::byte, kFrameHeaderSize> encode(const FrameHeader& header) {
  std::array<std::byte, kFrameHeaderSize> out{};
  put(out.data(), header.magic);
  put(out.data() + 4, header.phase);
  put(out.data() + 8, header.chunk);
  put(out.data() + 12, header.byte_length);
  return out;
}

FrameHeader decode_frame_header(std::span<const std::byte, kFrameHeaderSize> bytes) {
  return {get<std::uint32_t>(bytes.data()), get<std::uint32_t>(bytes.data() + 4),
          get<std::uint32_t>(bytes.data() + 8), get<std::uint64_t>(bytes.data() + 12)};
}

std::array<std::byte, kHelloSize> encode(const PeerHello& hello) {
  std::array<std::byte, kHelloSize> out{};
  put(out.data(), hello.magic);
  put(out.data() + 4, hello.rank);
  put(out.data() + 8, hello.plan_hash);
  put(out.data() + 16, hello.dtype);
  put(out.data() + 20, hello.length);
  return out;
}

PeerHello decode_hello(std::span<const std::byte, kHelloSize> bytes) {
  return {get<std::uint32_t>(bytes.data()), get<std::uint32_t>(bytes.data() + 4),
          get<std::uint64_t>(bytes.data() + 8), get<std::uint32_t>(bytes.data() + 16),
          get<std::uint64_t>(bytes.data() + 20)};
}

}  // namespace ddl::wire
