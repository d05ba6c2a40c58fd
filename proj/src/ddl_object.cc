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

#include "ddl/ddl_object.h"

#include <algorithm>
#include <cstring>

#include "ddl/error.h"

namespace ddl {

std::size_t element_size(DType dtype) {
  switch (dtype) {
    case DType::f32:
      return 4;
    case DType::f64:
    case DType::i64:
      return 8;
  }
  throw InvalidArgument("unknown element type");
}

std::string_view to_string(DType dtype) {
  switch (dtype) {
    case DType::f32:
      return "f32";
    case DType::f64:
      return "f64";
    case DType::i64:
      return "i64";
  }
  return "?";
}

DType parse_dtype(std::string_view text) {
  if (text == "f32") return DType::f32;
  if (text == "f64") return DType::f64;
  if (text == "i64") return DType::i64;
  throw InvalidArgument("unknown element type '" + std::string(text) + "'");
}

DdlObject::DdlObject(DType dtype, std::size_t count, Placement placement)
    : dtype_(dtype),
      count_(count),
      placement_(std::move(placement)),
      data_(count * element_size(dtype)) {}

void DdlObject::check_type(DType requested) const {
  if (requested != dtype_) {
    throw InvalidArgument("object holds " + std::string(to_string(dtype_)) + ", not " +
                          std::string(to_string(requested)));
  }
}

void assign(DdlObject& dst, const DdlObject& src) {
  if (&dst == &src) return;
  if (dst.dtype() != src.dtype()) {
    throw InvalidArgument("cannot assign " + std::string(to_string(src.dtype())) + " object to " +
                          std::string(to_string(dst.dtype())) + " object");
  }
  if (dst.size() != src.size()) {
    throw InvalidArgument("cannot assign object of length " + std::to_string(src.size()) +
                          " to object of length " + std::to_string(dst.size()));
  }
  std::copy(src.bytes().begin(), src.bytes().end(), dst.bytes().begin());
}

std::uint64_t digest(std::span<const std::byte> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::byte b : bytes) {
    h ^= static_cast<std::uint8_t>(b);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace ddl
