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

#ifndef DDL_WIRE_H_
#define DDL_WIRE_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>

namespace ddl::wire {

// All integers are little-endian on the wire.

// Data frame header, followed by `byte_length` payload bytes.
//   u32 magic | u32 phase | u32 chunk | u64 byte_length
inline constexpr std::uint32_t kFrameMagic = 0x464C4444;  // "DDLF"
inline constexpr std::size_t kFrameHeaderSize = 20;

struct FrameHeader {
  std::uint32_t magic = kFrameMagic;
  std::uint32_t phase = 0;
  std::uint32_t chunk = 0;
  std::uint64_t byte_length = 0;

  friend bool operator==(const FrameHeader&, const FrameHeader&) = default;
};

std::array<std::byte, kFrameHeaderSize> encode(const FrameHeader& header);
FrameHeader decode_frame_header(std::span<const std::byte, kFrameHeaderSize> bytes);

// Exchanged once per peer connection before any data flows.
//   u32 magic | u32 rank | u64 plan_hash | u32 dtype | u64 length
inline constexpr std::uint32_t kHelloMagic = 0x484C4444;  // "DDLH"
inline constexpr std::size_t kHelloSize = 28;

struct PeerHello {
  std::uint32_t magic = kHelloMagic;
  std::uint32_t rank = 0;
  std::uint64_t plan_hash = 0;
  std::uint32_t dtype = 0;
  std::uint64_t length = 0;

  friend bool operator==(const PeerHello&, const PeerHello&) = default;
};

std::array<std::byte, kHelloSize> encode(const PeerHello& hello);
PeerHello decode_hello(std::span<const std::byte, kHelloSize> bytes);

}  // namespace ddl::wire

#endif  // DDL_WIRE_H_
